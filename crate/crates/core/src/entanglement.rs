//! Field-ensemble entanglement entropy and pairwise atomic concurrence.
//!
//! All states handled here are real, so reduced density matrices are real
//! symmetric and the spin flip `σy ⊗ σy` can be applied as a real matrix with
//! signs `[[0,0,0,−1],[0,0,1,0],[0,1,0,0],[−1,0,0,0]]`.

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};

use crate::analytic::binomial;
use crate::error::{Error, Result};
use crate::operators::{check_dim, ProductBasis};

/// Real symmetric, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<f64>,
}

impl DensityMatrix {
    /// Accepts rounding-level asymmetry (which is removed), trace within
    /// `1e−10` of one and eigenvalues above `−1e−10`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}x{} is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("asymmetry {asym:e}")));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        let trace = matrix.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let min = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        if min < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &DVector<f64>) -> Result<Self> {
        Self::new(state * state.transpose())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|v| v * v).sum()
    }

    /// Ascending eigenvalues, with rounding-level negatives set to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0))
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Coefficients `c[n, k]` of a product-basis state as a `(n_max+1) × (N+1)`
/// matrix.
pub fn coefficient_matrix(state: &DVector<f64>, basis: &ProductBasis) -> Result<DMatrix<f64>> {
    check_dim(basis.dim(), state.len())?;
    let cols = basis.dicke().dim();
    Ok(DMatrix::from_fn(basis.fock().dim(), cols, |n, k| state[n * cols + k]))
}

/// `ρ[k, k'] = Σₙ c[n,k] c[n,k']`, indexed by excitation number.
pub fn reduce_to_ensemble(state: &DVector<f64>, basis: &ProductBasis) -> Result<DensityMatrix> {
    let c = coefficient_matrix(state, basis)?;
    DensityMatrix::new(c.transpose() * c)
}

/// Squared Schmidt coefficients of the field-ensemble split, descending.
pub fn schmidt_weights(state: &DVector<f64>, basis: &ProductBasis) -> Result<Vec<f64>> {
    let c = coefficient_matrix(state, basis)?;
    let mut w: Vec<f64> = c.singular_values().iter().map(|s| s * s).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(w)
}

/// Von Neumann entropy in bits, with `0·log 0 = 0`.
pub fn entropy_of_entanglement(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Qubit-pair basis index `2·q₁ + q₂` with `0 = ground`, `1 = excited`.
fn weight(x: usize) -> usize {
    (x >> 1) + (x & 1)
}

/// Reduced state of any two atoms, derived from the ensemble state.
///
/// A Dicke state with `k` excitations splits as
/// `Σₓ √(C(N−2, k−w(x))/C(N,k)) |x⟩ ⊗ |D^{N−2}_{k−w(x)}⟩`, where `w(x)` counts
/// the excitations of the pair configuration `x`.
pub fn pair_reduction(ensemble: &DensityMatrix, n_atoms: usize) -> Result<DensityMatrix> {
    if n_atoms < 2 {
        return Err(Error::InvalidParameter(format!(
            "pairwise reduction needs at least two atoms, got {n_atoms}"
        )));
    }
    check_dim(n_atoms + 1, ensemble.dim())?;
    let rho = ensemble.matrix();
    let c = |w: usize, r: usize| (binomial(n_atoms - 2, r) / binomial(n_atoms, r + w)).sqrt();
    let mut out = DMatrix::zeros(4, 4);
    for x in 0..4 {
        for y in 0..4 {
            let (wx, wy) = (weight(x), weight(y));
            out[(x, y)] = (0..=n_atoms - 2)
                .map(|r| rho[(r + wx, r + wy)] * c(wx, r) * c(wy, r))
                .sum();
        }
    }
    DensityMatrix::new(out)
}

pub fn two_qubit_reduction(state: &DVector<f64>, basis: &ProductBasis) -> Result<DensityMatrix> {
    if basis.n_atoms() < 2 {
        return Err(Error::InvalidParameter(format!(
            "pairwise reduction needs at least two atoms, got {}",
            basis.n_atoms()
        )));
    }
    pair_reduction(&reduce_to_ensemble(state, basis)?, basis.n_atoms())
}

fn spin_flip() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    )
}

/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λᵢ` the descending square roots of the
/// eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)`, obtained from the symmetric form
/// `√ρ ρ̃ √ρ`.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    check_dim(4, rho.dim())?;
    let m = Matrix4::from_iterator(rho.matrix().iter().copied());
    let eig = SymmetricEigen::new(m);
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let flip = spin_flip();
    let tilde = flip * m * flip;
    let r = sqrt_rho * tilde * sqrt_rho;
    let r = (r + r.transpose()) * 0.5;
    let mut l: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Brute-force route through the full `2^N` qubit space, for testing the
/// combinatorial reduction.
pub mod reference {
    use super::*;

    /// Amplitudes `ψ[n, s]` over photon number and qubit configuration `s`,
    /// with qubit 0 as the most significant bit.
    pub fn expand_to_qubits(state: &DVector<f64>, basis: &ProductBasis) -> Result<DMatrix<f64>> {
        let c = coefficient_matrix(state, basis)?;
        let n_atoms = basis.n_atoms();
        Ok(DMatrix::from_fn(basis.fock().dim(), 1 << n_atoms, |n, s| {
            let k = (s as u64).count_ones() as usize;
            c[(n, k)] / binomial(n_atoms, k).sqrt()
        }))
    }

    /// Reduced state of qubits `i ≠ j` (in that order) of a field-qubit
    /// amplitude table from [`expand_to_qubits`].
    pub fn partial_trace_pair(psi: &DMatrix<f64>, n_atoms: usize, i: usize, j: usize) -> Result<DensityMatrix> {
        if i == j || i >= n_atoms || j >= n_atoms {
            return Err(Error::InvalidParameter(format!("bad qubit pair ({i}, {j})")));
        }
        let bit = |q: usize| 1usize << (n_atoms - 1 - q);
        let mut out = DMatrix::zeros(4, 4);
        for n in 0..psi.nrows() {
            for s in 0..psi.ncols() {
                let a = psi[(n, s)];
                if a == 0.0 {
                    continue;
                }
                let rest = s & !(bit(i) | bit(j));
                let x = 2 * usize::from(s & bit(i) != 0) + usize::from(s & bit(j) != 0);
                for y in 0..4 {
                    let t = rest | if y & 2 != 0 { bit(i) } else { 0 } | if y & 1 != 0 { bit(j) } else { 0 };
                    out[(x, y)] += a * psi[(n, t)];
                }
            }
        }
        DensityMatrix::new(out)
    }
}
