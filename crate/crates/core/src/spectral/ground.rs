use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{raw_lowest, signed, EigenPair, Solver};
use crate::error::{Error, Result};
use crate::model::{build_full_hamiltonian, parity_sectors, ModelParams};
use crate::operators::{ProductBasis, RealSymOperator};

/// How the photon cutoff grows between stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Double,
    Add(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub n_start: usize,
    pub n_cap: usize,
    /// Target for the enlarged-space residual.
    pub epsilon: f64,
    /// Relative gap below which the two lowest levels count as degenerate.
    pub epsilon_d: f64,
    pub growth: Growth,
    #[serde(default)]
    pub solver: Solver,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            n_start: 40,
            n_cap: 200,
            epsilon: 1e-10,
            epsilon_d: 1e-10,
            growth: Growth::Double,
            solver: Solver::Auto,
        }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_start < 2 || self.n_start > self.n_cap {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= n_start <= n_cap, got n_start = {}, n_cap = {}",
                self.n_start, self.n_cap
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !(self.epsilon_d > 0.0 && self.epsilon_d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon_d = {} must be positive",
                self.epsilon_d
            )));
        }
        if self.growth == Growth::Add(0) {
            return Err(Error::InvalidParameter("growth step must be positive".into()));
        }
        Ok(())
    }

    fn next(&self, n: usize) -> usize {
        let grown = match self.growth {
            Growth::Double => n.saturating_mul(2),
            Growth::Add(step) => n.saturating_add(step),
        };
        grown.min(self.n_cap)
    }
}

/// Parity of a ground state under `Π = (−1)^(n + m + N/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+1")]
    Even,
    #[serde(rename = "-1")]
    Odd,
    /// Equal-weight combination of a degenerate doublet.
    #[serde(rename = "mixed")]
    Mixed,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "+1",
            Parity::Odd => "-1",
            Parity::Mixed => "mixed",
        })
    }
}

/// Outcome of one truncation stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub n_max: usize,
    pub energy: f64,
    pub residual: f64,
}

/// Ground state chosen from the lowest eigenpairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyResolution {
    pub energy: f64,
    pub vector: DVector<f64>,
    pub degenerate: bool,
    /// `E₂ − E₁`.
    pub gap: f64,
    /// `(E₂ − E₁)/|E₁|`, or the absolute gap when `|E₁| < 1e−14`.
    pub relative_gap: f64,
    pub parity: Parity,
    /// The two lowest pairs, sign-fixed, even member first within a
    /// degenerate doublet.
    pub members: Vec<EigenPair>,
}

/// Picks the ground vector from ascending eigenpairs.
///
/// When the two lowest levels are degenerate within `epsilon_d` the result is
/// `(v₁ + v₂)/‖v₁ + v₂‖` with each member's largest coefficient positive.
pub fn resolve_degeneracy(pairs: &[EigenPair], config: &TruncationConfig) -> Result<DegeneracyResolution> {
    if pairs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two eigenpairs, got {}",
            pairs.len()
        )));
    }
    let mut members: Vec<EigenPair> = pairs[..2]
        .iter()
        .map(|p| EigenPair {
            value: p.value,
            vector: signed(p.vector.clone()),
            parity: p.parity,
        })
        .collect();
    let e1 = members[0].value;
    let gap = (members[1].value - e1).max(0.0);
    let relative_gap = if e1.abs() < 1e-14 { gap } else { gap / e1.abs() };
    let degenerate = relative_gap <= config.epsilon_d;

    if degenerate && members[0].parity == Some(Parity::Odd) && members[1].parity == Some(Parity::Even) {
        members.swap(0, 1);
    }
    let (vector, parity) = if degenerate {
        let sum = &members[0].vector + &members[1].vector;
        let norm = sum.norm();
        (sum / norm, Parity::Mixed)
    } else {
        (members[0].vector.clone(), members[0].parity.unwrap_or(Parity::Mixed))
    };
    Ok(DegeneracyResolution {
        energy: e1,
        vector,
        degenerate,
        gap,
        relative_gap,
        parity,
        members,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateResult {
    pub params: ModelParams,
    pub basis: ProductBasis,
    /// `E₁`.
    pub energy: f64,
    pub vector: DVector<f64>,
    pub degenerate: bool,
    pub gap: f64,
    pub relative_gap: f64,
    /// Enlarged-space residual of the final stage.
    pub residual: f64,
    pub n_max_used: usize,
    pub parity: Parity,
    /// The cutoff reached `n_cap` with the residual still above target.
    pub cap_hit: bool,
    pub members: Vec<EigenPair>,
    pub stages: Vec<StageRecord>,
}

impl GroundStateResult {
    pub fn summary(&self) -> GroundSummary {
        GroundSummary {
            energy: self.energy,
            gap: self.gap,
            degenerate: self.degenerate,
            residual: self.residual,
            n_max_used: self.n_max_used,
            parity: self.parity,
            cap_hit: self.cap_hit,
        }
    }

    /// The lowest member alone; equals `vector` for non-degenerate results.
    pub fn first_member(&self) -> &DVector<f64> {
        &self.members[0].vector
    }
}

/// Serializable digest of a [`GroundStateResult`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundSummary {
    pub energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub residual: f64,
    pub n_max_used: usize,
    pub parity: Parity,
    pub cap_hit: bool,
}

/// `‖H' ψ' − E ψ'‖/|E|` where `ψ'` is `state` zero-padded into a basis with
/// two more photons and `H'` is the Hamiltonian there. Falls back to the
/// absolute norm when `|E| < 1e−14`.
pub fn truncation_residual(
    params: &ModelParams,
    basis: &ProductBasis,
    state: &DVector<f64>,
    energy: f64,
) -> Result<f64> {
    let big = ProductBasis::with_sizes(basis.n_max() + 2, basis.n_atoms())?;
    let h = build_full_hamiltonian(params, &big)?;
    let padded = basis.embed(state, &big)?;
    let r = (h.apply(&padded)? - padded.scale(energy)).norm();
    Ok(if energy.abs() < 1e-14 { r } else { r / energy.abs() })
}

/// Two lowest pairs of each parity sector, merged and sorted ascending.
fn sector_pairs(
    h: &RealSymOperator,
    basis: &ProductBasis,
    solver: Solver,
    warm: Option<&[Vec<DVector<f64>>; 2]>,
) -> Result<(Vec<EigenPair>, [Vec<DVector<f64>>; 2])> {
    let (even, odd) = parity_sectors(basis);
    let mut pairs = Vec::with_capacity(4);
    let mut kept: [Vec<DVector<f64>>; 2] = [Vec::new(), Vec::new()];
    for (s, (idx, parity)) in [(even, Parity::Even), (odd, Parity::Odd)].into_iter().enumerate() {
        let block = h.restrict(&idx);
        let k = idx.len().min(2);
        let start: Option<Vec<f64>> = warm.map(|w| {
            let mut v = vec![0.0; idx.len()];
            for prev in &w[s] {
                for (slot, &i) in v.iter_mut().zip(&idx) {
                    *slot += prev[i];
                }
            }
            v
        });
        for (value, local) in raw_lowest(&block, k, solver, start.as_deref())? {
            let mut full = DVector::zeros(basis.dim());
            for (&i, c) in idx.iter().zip(local) {
                full[i] = c;
            }
            let full = signed(full);
            kept[s].push(full.clone());
            pairs.push(EigenPair {
                value,
                vector: full,
                parity: Some(parity),
            });
        }
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok((pairs, kept))
}

/// Ground state with adaptive photon cutoff.
///
/// Each stage diagonalizes the two parity sectors separately, so the members
/// are exact parity eigenstates. The stage's ground vector is checked against
/// the Hamiltonian with two extra photons; the cutoff grows until that
/// residual reaches `epsilon` or the cap is hit. Later stages are seeded with
/// the previous stage's vectors.
pub fn converge_ground_state(params: &ModelParams, config: &TruncationConfig) -> Result<GroundStateResult> {
    params.validate()?;
    config.validate()?;
    let mut n = config.n_start;
    let mut stages = Vec::new();
    let mut warm: Option<[Vec<DVector<f64>>; 2]> = None;
    loop {
        let basis = ProductBasis::with_sizes(n, params.n_atoms)?;
        let h = build_full_hamiltonian(params, &basis)?;
        let (pairs, kept) = sector_pairs(&h, &basis, config.solver, warm.as_ref())?;
        let resolved = resolve_degeneracy(&pairs, config)?;
        let residual = truncation_residual(params, &basis, &resolved.vector, resolved.energy)?;
        stages.push(StageRecord {
            n_max: n,
            energy: resolved.energy,
            residual,
        });
        log::debug!("n_max = {n}: E1 = {:.15e}, residual = {residual:.3e}", resolved.energy);

        let done = residual <= config.epsilon;
        if done || n >= config.n_cap {
            let cap_hit = !done;
            if cap_hit {
                log::warn!(
                    "photon cutoff {n} reached with residual {residual:.3e} (target {:.1e}) at lambda = {}, kappa = {}, N = {}",
                    config.epsilon,
                    params.lambda,
                    params.kappa,
                    params.n_atoms
                );
            }
            return Ok(GroundStateResult {
                params: *params,
                basis,
                energy: resolved.energy,
                vector: resolved.vector,
                degenerate: resolved.degenerate,
                gap: resolved.gap,
                relative_gap: resolved.relative_gap,
                residual,
                n_max_used: n,
                parity: resolved.parity,
                cap_hit,
                members: resolved.members,
                stages,
            });
        }

        let next = config.next(n);
        let big = ProductBasis::with_sizes(next, params.n_atoms)?;
        let mut seeds: [Vec<DVector<f64>>; 2] = [Vec::new(), Vec::new()];
        for (s, vs) in kept.iter().enumerate() {
            for v in vs {
                seeds[s].push(basis.embed(v, &big)?);
            }
        }
        warm = Some(seeds);
        n = next;
    }
}
