//! Closed-form weak- and strong-coupling predictions.
//!
//! The weak-coupling side follows from a squeezing transform that removes the
//! quadratic field term, followed by a second transform that removes the
//! linear coupling to leading order. The strong-coupling side is the
//! coherent-state mean field of the full model.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ModelParams;
use crate::operators::ProductBasis;

/// Small-parameter threshold used for the validity annotations.
pub const VALIDITY_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedParams {
    /// Squeeze parameter `κ/[2(ω_f + 2κ)]`, in `[0, 1/4)`.
    pub eta: f64,
    pub omega_f_tilde: f64,
    pub g_tilde: f64,
    pub kappa_tilde: f64,
    pub xi: f64,
    pub omega_a_tilde: f64,
    pub lambda_tilde: f64,
    /// `η < 0.1`.
    pub eta_small: bool,
    /// `ξ < 0.1`.
    pub xi_small: bool,
}

impl TransformedParams {
    /// Both expansion parameters are small, so the weak-coupling formulas are
    /// inside their derivation regime.
    pub fn valid(&self) -> bool {
        self.eta_small && self.xi_small
    }
}

pub fn transformed_params(p: &ModelParams) -> TransformedParams {
    let (wa, wf, k, l) = (p.omega_a, p.omega_f, p.kappa, p.lambda);
    let n = p.n_atoms as f64;
    let eta = k / (2.0 * (wf + 2.0 * k));
    let omega_f_tilde = wf * (wf + 4.0 * k) / (wf + 2.0 * k);
    let g_tilde = l * (wf + k) / (wf + 2.0 * k);
    let kappa_tilde = k * wf / (wf + 2.0 * k);
    let xi = g_tilde / (n.sqrt() * (wa + omega_f_tilde));
    let omega_a_tilde = 2.0 * g_tilde * g_tilde / (n * (wa + omega_f_tilde));
    let lambda_tilde = 2.0 * omega_f_tilde * g_tilde / (wa + omega_f_tilde);
    TransformedParams {
        eta,
        omega_f_tilde,
        g_tilde,
        kappa_tilde,
        xi,
        omega_a_tilde,
        lambda_tilde,
        eta_small: eta < VALIDITY_THRESHOLD,
        xi_small: xi < VALIDITY_THRESHOLD,
    }
}

/// Weak-coupling critical value, where the effective coupling reaches
/// `√(ω_a ω̃_f)`.
pub fn critical_coupling_weak(p: &ModelParams) -> f64 {
    let (wa, wf, k) = (p.omega_a, p.omega_f, p.kappa);
    (wf * (wa + wf) + 2.0 * k * (wa + 2.0 * wf)) / (2.0 * (wf + k))
        * (wa * (wf + 2.0 * k) / (wf * (wf + 4.0 * k))).sqrt()
}

/// Strong-coupling critical value `½√(ω_a(ω_f + 4κ))`, where the mean-field
/// amplitude becomes nonzero.
pub fn critical_coupling_strong(p: &ModelParams) -> f64 {
    0.5 * (p.omega_a * (p.omega_f + 4.0 * p.kappa)).sqrt()
}

/// Which classical energy the mean field minimizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanFieldVariant {
    /// `κ(a + a†)² → 4κα²`, the classical image of the diagonalized model.
    #[default]
    Consistent,
    /// `κα²` in the energy and `4λ²` in the amplitude denominator, kept for
    /// comparison only. The two expressions do not describe the same minimum.
    Literal,
}

/// `W = ω_f + 4κ`, the stiffness of the classical field energy.
fn stiffness(p: &ModelParams) -> f64 {
    p.omega_f + 4.0 * p.kappa
}

/// Classical energy `ω_f α² + 4κα² − (N/2)√(ω_a² + 16λ²α²/N)` of a real
/// coherent amplitude `α` (with `κα²` under [`MeanFieldVariant::Literal`]).
pub fn classical_energy(p: &ModelParams, alpha: f64, variant: MeanFieldVariant) -> f64 {
    let n = p.n_atoms as f64;
    let quad = match variant {
        MeanFieldVariant::Consistent => p.omega_f + 4.0 * p.kappa,
        MeanFieldVariant::Literal => p.omega_f + p.kappa,
    };
    quad * alpha * alpha
        - 0.5 * n * (p.omega_a * p.omega_a + 16.0 * p.lambda * p.lambda * alpha * alpha / n).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `λ ≤ λ_S`: vacuum field, all atoms down.
    Normal,
    Superradiant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub alpha_r: f64,
    pub alpha_i: f64,
    /// Amplitude ratio of the single-atom state `(|g⟩ + β|e⟩)/√(1+β²)`;
    /// `None` on the normal branch.
    pub beta_aux: Option<f64>,
    pub energy: f64,
    pub branch: Branch,
}

impl MeanFieldSolution {
    pub fn alpha_squared(&self) -> f64 {
        self.alpha_r * self.alpha_r
    }
}

pub fn mean_field_solution(p: &ModelParams) -> MeanFieldSolution {
    mean_field_solution_variant(p, MeanFieldVariant::Consistent)
}

pub fn mean_field_solution_variant(p: &ModelParams, variant: MeanFieldVariant) -> MeanFieldSolution {
    let n = p.n_atoms as f64;
    let (wa, l) = (p.omega_a, p.lambda);
    let w = stiffness(p);
    let l2 = l * l;
    let disc = 16.0 * l2 * l2 - wa * wa * w * w;
    if l <= critical_coupling_strong(p) || disc <= 0.0 {
        return MeanFieldSolution {
            alpha_r: 0.0,
            alpha_i: 0.0,
            beta_aux: None,
            energy: -0.5 * n * wa,
            branch: Branch::Normal,
        };
    }
    let denom = match variant {
        MeanFieldVariant::Consistent => 16.0 * l2 * w * w,
        MeanFieldVariant::Literal => 4.0 * l2 * w * w,
    };
    let alpha_r = (n * disc / denom).sqrt();
    let energy = match variant {
        MeanFieldVariant::Consistent => -n * (16.0 * l2 * l2 + wa * wa * w * w) / (16.0 * l2 * w),
        MeanFieldVariant::Literal => classical_energy(p, alpha_r, variant),
    };
    MeanFieldSolution {
        alpha_r,
        alpha_i: 0.0,
        beta_aux: Some((wa * w - 4.0 * l2) / disc.sqrt()),
        energy,
        branch: Branch::Superradiant,
    }
}

/// `⟨Jz⟩ = (N/2)(β² − 1)/(β² + 1)` for the product state built on `β`.
pub fn population_difference(beta: f64, n_atoms: usize) -> f64 {
    let b2 = beta * beta;
    0.5 * n_atoms as f64 * (b2 - 1.0) / (b2 + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakGroundState {
    pub vector: DVector<f64>,
    /// `κ̃ − Nω_a/2`.
    pub energy: f64,
    pub eta: f64,
}

/// `(|0⟩ − η|2⟩)/√(1+η²) ⊗ |j, −j⟩`.
pub fn weak_ground_state(p: &ModelParams, basis: &ProductBasis) -> Result<WeakGroundState> {
    check(p, basis)?;
    let t = transformed_params(p);
    let norm = (1.0 + t.eta * t.eta).sqrt();
    let mut v = DVector::zeros(basis.dim());
    v[basis.index(0, 0)] = 1.0 / norm;
    v[basis.index(2, 0)] = -t.eta / norm;
    Ok(WeakGroundState {
        vector: v,
        energy: t.kappa_tilde - 0.5 * p.n_atoms as f64 * p.omega_a,
        eta: t.eta,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongGroundState {
    /// `|α_R⟩ ⊗ |v⟩^⊗N`.
    pub product: DVector<f64>,
    /// `|G_S(α_R)⟩ + |G_S(−α_R)⟩`, normalized.
    pub symmetric: DVector<f64>,
    /// `|G_S(α_R)⟩ − |G_S(−α_R)⟩`, normalized; absent on the normal branch
    /// where the two product states coincide.
    pub antisymmetric: Option<DVector<f64>>,
    pub energy: f64,
    /// Coherent-state weight beyond the photon cutoff before renormalizing.
    pub truncation_loss: f64,
    pub mean_field: MeanFieldSolution,
}

/// Truncated coherent-state amplitudes `e^{−α²/2} αⁿ/√n!` and the weight lost
/// above the cutoff.
pub fn coherent_amplitudes(alpha: f64, n_max: usize) -> (Vec<f64>, f64) {
    let mut c = Vec::with_capacity(n_max + 1);
    let mut x = (-0.5 * alpha * alpha).exp();
    c.push(x);
    for n in 1..=n_max {
        x *= alpha / (n as f64).sqrt();
        c.push(x);
    }
    let kept: f64 = c.iter().map(|v| v * v).sum();
    let s = kept.sqrt();
    c.iter_mut().for_each(|v| *v /= s);
    (c, (1.0 - kept).max(0.0))
}

/// Dicke-basis amplitudes of `((|g⟩ + β|e⟩)/√(1+β²))^⊗N`, indexed by the
/// number of excited atoms.
pub fn spin_product_amplitudes(beta: f64, n_atoms: usize) -> Vec<f64> {
    let norm = (1.0 + beta * beta).powf(0.5 * n_atoms as f64);
    (0..=n_atoms)
        .map(|k| binomial(n_atoms, k).sqrt() * beta.powi(k as i32) / norm)
        .collect()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn strong_ground_state(p: &ModelParams, basis: &ProductBasis) -> Result<StrongGroundState> {
    check(p, basis)?;
    let mf = mean_field_solution(p);
    let beta = mf.beta_aux.unwrap_or(0.0);
    let (field, loss) = coherent_amplitudes(mf.alpha_r, basis.n_max());
    if loss > 1e-8 {
        log::warn!(
            "coherent amplitude {:.3} loses {loss:.2e} of its weight above n_max = {}",
            mf.alpha_r,
            basis.n_max()
        );
    }
    let spin = spin_product_amplitudes(beta, p.n_atoms);
    let build = |sign: f64| {
        DVector::from_fn(basis.dim(), |i, _| {
            let (n, k) = basis.unflatten(i);
            // α → −α flips odd photon numbers, β → −β flips odd k.
            let s = if (n + k) % 2 == 1 { sign } else { 1.0 };
            s * field[n] * spin[k]
        })
    };
    let plus = build(1.0);
    let minus = build(-1.0);
    let sym = &plus + &minus;
    let symmetric = &sym / sym.norm();
    let anti = &plus - &minus;
    let antisymmetric = (anti.norm() > 1e-12).then(|| &anti / anti.norm());
    Ok(StrongGroundState {
        product: plus,
        symmetric,
        antisymmetric,
        energy: mf.energy,
        truncation_loss: loss,
        mean_field: mf,
    })
}

fn check(p: &ModelParams, basis: &ProductBasis) -> Result<()> {
    p.validate()?;
    if p.n_atoms != basis.n_atoms() {
        return Err(crate::Error::InvalidParameter(format!(
            "basis holds {} atoms but parameters ask for {}",
            basis.n_atoms(),
            p.n_atoms
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn res(n: usize, lambda: f64, kappa: f64) -> ModelParams {
        ModelParams::resonant(n, lambda, kappa).unwrap()
    }

    #[test]
    fn transforms_collapse_without_squeezing() {
        let t = transformed_params(&res(2, 0.7, 0.0));
        assert_eq!(t.eta, 0.0);
        assert_eq!(t.omega_f_tilde, 1.0);
        assert_eq!(t.g_tilde, 0.7);
        assert_eq!(t.kappa_tilde, 0.0);
        assert_relative_eq!(t.lambda_tilde, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn squeeze_parameter() {
        let t = transformed_params(&res(2, 1.0, 2.4));
        assert_relative_eq!(t.eta, 2.4 / 11.6, epsilon = 1e-15);
        assert!(!t.eta_small);
    }

    #[test]
    fn critical_couplings() {
        assert_relative_eq!(critical_coupling_weak(&res(2, 0.0, 0.0)), 1.0, epsilon = 1e-15);
        assert_relative_eq!(critical_coupling_strong(&res(2, 0.0, 0.0)), 0.5, epsilon = 1e-15);
        assert_relative_eq!(critical_coupling_strong(&res(2, 0.0, 2.0)), 1.5, epsilon = 1e-15);
        assert_relative_eq!(critical_coupling_weak(&res(2, 0.0, 0.3)), 3.8 / 2.6 * (1.6f64 / 2.2).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(critical_coupling_strong(&res(2, 0.0, 0.3)), 0.7416, epsilon = 5e-5);
    }

    #[test]
    fn table_marker_mean_field() {
        let mf = mean_field_solution(&res(2, 3.323, 0.0));
        assert_eq!(mf.branch, Branch::Superradiant);
        assert_relative_eq!(mf.alpha_squared(), 22.07, epsilon = 0.01);
        let beta = mf.beta_aux.unwrap();
        let l2 = 3.323f64 * 3.323;
        assert_relative_eq!(beta, (1.0 - 4.0 * l2) / (16.0 * l2 * l2 - 1.0).sqrt(), epsilon = 1e-14);
        // cos θ = −(λ_S/λ)² on the superradiant branch.
        assert_relative_eq!(population_difference(beta, 2), -0.25 / l2, epsilon = 1e-12);
    }

    #[test]
    fn normal_branch_below_threshold() {
        let mf = mean_field_solution(&res(3, 0.4, 0.0));
        assert_eq!(mf.branch, Branch::Normal);
        assert_eq!(mf.alpha_r, 0.0);
        assert_eq!(mf.energy, -1.5);
    }

    #[test]
    fn beta_tends_to_minus_one_deep_in_the_strong_regime() {
        let beta = mean_field_solution(&res(2, 200.0, 0.1)).beta_aux.unwrap();
        assert!((beta + 1.0).abs() < 1e-3);
    }

    #[test]
    fn weak_state_populations() {
        let b = ProductBasis::with_sizes(10, 2).unwrap();
        let g = weak_ground_state(&res(2, 0.05, 0.3), &b).unwrap();
        assert_relative_eq!(g.eta, 0.09375, epsilon = 1e-15);
        let p2 = g.vector[b.index(2, 0)].powi(2);
        assert_relative_eq!(p2, g.eta * g.eta / (1.0 + g.eta * g.eta), epsilon = 1e-15);
        assert_relative_eq!(g.vector.norm(), 1.0, epsilon = 1e-15);
        let g0 = weak_ground_state(&res(2, 0.05, 0.0), &b).unwrap();
        assert_eq!(g0.vector[0], 1.0);
        assert_eq!(g0.energy, -1.0);
    }

    #[test]
    fn spin_amplitudes_are_binomial() {
        let amps = spin_product_amplitudes(-0.5, 3);
        let norm = 1.25f64.powf(1.5);
        assert_relative_eq!(amps[1], 3f64.sqrt() * -0.5 / norm, epsilon = 1e-15);
        assert_relative_eq!(amps.iter().map(|a| a * a).sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn strong_state_parity_partners() {
        let b = ProductBasis::with_sizes(80, 2).unwrap();
        let s = strong_ground_state(&res(2, 5.0, 0.1), &b).unwrap();
        assert!(s.truncation_loss < 1e-8);
        let anti = s.antisymmetric.unwrap();
        assert!(s.symmetric.dot(&anti).abs() < 1e-12);
        for i in 0..b.dim() {
            let (n, k) = b.unflatten(i);
            if (n + k) % 2 == 1 {
                assert_eq!(s.symmetric[i], 0.0);
            }
        }
    }

    #[test]
    fn literal_variant_differs() {
        let p = res(2, 3.323, 0.3);
        let a = mean_field_solution_variant(&p, MeanFieldVariant::Literal);
        let b = mean_field_solution(&p);
        assert_relative_eq!(a.alpha_squared(), 4.0 * b.alpha_squared(), max_relative = 1e-12);
    }
}
