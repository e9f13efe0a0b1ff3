//! Hamiltonians and the parity symmetry on a [`ProductBasis`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    annihilator, atomic_operator, collective_spin, field_operator, tensor, ProductBasis,
    RealOperator, RealSymOperator,
};

/// Physical parameters in units of the atomic frequency, `ħ = 1`.
///
/// `omega_f` is the effective field frequency with the pump detuning already
/// absorbed (`ω_f = ω_p − 2κ`); the bare `ω_p` is never needed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_a: f64,
    pub omega_f: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub n_atoms: usize,
}

impl ModelParams {
    pub fn new(omega_a: f64, omega_f: f64, kappa: f64, lambda: f64, n_atoms: usize) -> Result<Self> {
        let p = Self {
            omega_a,
            omega_f,
            kappa,
            lambda,
            n_atoms,
        };
        p.validate()?;
        Ok(p)
    }

    /// `ω_a = ω_f = 1`.
    pub fn resonant(n_atoms: usize, lambda: f64, kappa: f64) -> Result<Self> {
        Self::new(1.0, 1.0, kappa, lambda, n_atoms)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("{what} = {v} is out of range")))
        };
        for (what, v) in [
            ("omega_a", self.omega_a),
            ("omega_f", self.omega_f),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return bad(what, v);
            }
        }
        if self.omega_a <= 0.0 {
            return bad("omega_a", self.omega_a);
        }
        if self.omega_f <= 0.0 {
            return bad("omega_f", self.omega_f);
        }
        if self.kappa < 0.0 {
            return bad("kappa", self.kappa);
        }
        if self.lambda < 0.0 {
            return bad("lambda", self.lambda);
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        Ok(())
    }

    /// Multiplies every frequency by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            omega_a: self.omega_a * c,
            omega_f: self.omega_f * c,
            kappa: self.kappa * c,
            lambda: self.lambda * c,
            n_atoms: self.n_atoms,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self { kappa, ..*self }
    }
}

fn check_basis(params: &ModelParams, basis: &ProductBasis) -> Result<()> {
    params.validate()?;
    if basis.n_atoms() != params.n_atoms {
        return Err(Error::InvalidParameter(format!(
            "basis holds {} atoms but parameters ask for {}",
            basis.n_atoms(),
            params.n_atoms
        )));
    }
    Ok(())
}

/// `ω_f a†a + ω_a Jz + (λ/√N)(a + a†)(J+ + J−) + κ(a + a†)²`.
///
/// The atoms couple through `J+ + J− = Σσx`, twice the spin operator `Jx`.
/// The quadratic term is the truncated projection `a² + a†² + 2a†a + 1`, so
/// the matrix at cutoff `n` is the leading block of the matrix at any larger
/// cutoff.
pub fn build_full_hamiltonian(params: &ModelParams, basis: &ProductBasis) -> Result<RealSymOperator> {
    check_basis(params, basis)?;
    let a = annihilator(&basis.fock());
    let s = collective_spin(&basis.dicke());
    let g = params.lambda / (params.n_atoms as f64).sqrt();

    let free = field_operator(&a.number(), basis)?
        .scale(params.omega_f)
        .add(&atomic_operator(&s.jz, basis)?.scale(params.omega_a))?;
    let coupling = tensor(&a.position(), &s.pauli_x_sum(), basis)?.scale(g);
    let quadratic = field_operator(&a.position_squared(), basis)?.scale(params.kappa);
    RealSymOperator::new(free.add(&coupling)?.add(&quadratic)?)
}

/// Rotating-wave Dicke model `ω_p a†a + ω_a Jz + (λ/√N)(a J+ + a† J−)`,
/// with `ω_f` standing in for `ω_p`.
pub fn build_dicke_hamiltonian(params: &ModelParams, basis: &ProductBasis) -> Result<RealSymOperator> {
    check_basis(params, basis)?;
    let a = annihilator(&basis.fock());
    let s = collective_spin(&basis.dicke());
    let g = params.lambda / (params.n_atoms as f64).sqrt();

    let free = field_operator(&a.number(), basis)?
        .scale(params.omega_f)
        .add(&atomic_operator(&s.jz, basis)?.scale(params.omega_a))?;
    let coupling = tensor(&a.lower, &s.jplus, basis)?
        .add(&tensor(&a.raise, &s.jminus, basis)?)?
        .scale(g);
    RealSymOperator::new(free.add(&coupling)?)
}

/// Degenerate parametric term `κ(a² + a†²)`.
pub fn build_pdc_hamiltonian(params: &ModelParams, basis: &ProductBasis) -> Result<RealSymOperator> {
    check_basis(params, basis)?;
    let a = annihilator(&basis.fock());
    let a2 = a.lower.matmul(&a.lower)?;
    let pair = a2.add(&a2.transpose())?;
    RealSymOperator::new(field_operator(&pair, basis)?.scale(params.kappa))
}

/// Parity label `(−1)^(n + k)` of basis state `(n, k)`, with `k = m + N/2`.
pub fn parity_sign(basis: &ProductBasis, index: usize) -> f64 {
    let (n, k) = basis.unflatten(index);
    if (n + k) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Π = exp[iπ(a†a + Jz + N/2)]` as a ±1 diagonal.
pub fn parity_operator(basis: &ProductBasis) -> RealSymOperator {
    let diag: Vec<f64> = (0..basis.dim()).map(|i| parity_sign(basis, i)).collect();
    RealSymOperator::new(RealOperator::diagonal(&diag)).expect("diagonal is symmetric")
}

/// Flat indices of the even and odd parity sectors, each in ascending order.
pub fn parity_sectors(basis: &ProductBasis) -> (Vec<usize>, Vec<usize>) {
    (0..basis.dim()).partition(|&i| parity_sign(basis, i) > 0.0)
}
