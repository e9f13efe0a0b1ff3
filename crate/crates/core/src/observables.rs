//! Field and atomic statistics of a real ground-state vector.

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operators::{
    annihilator, atomic_operator, check_dim, collective_spin, field_operator, FockTruncation,
    ImaginaryOperator, ProductBasis, RealOperator,
};

/// Variances down to this value are treated as rounding noise and clamped.
pub const VARIANCE_TOLERANCE: f64 = 1e-12;

/// Below this `⟨Jx⟩²` the phase-uncertainty product is reported as saturated.
pub const PHASE_SATURATION: f64 = 1e-24;

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(state: &DVector<f64>, op: &RealOperator) -> Result<f64> {
    check_dim(op.dim(), state.len())?;
    Ok(state.dot(&op.apply(state)?))
}

/// `⟨(O − ⟨O⟩)²⟩` as the squared norm `‖(O − ⟨O⟩)ψ‖²`, returned with the mean.
pub fn mean_and_variance(state: &DVector<f64>, op: &RealOperator) -> Result<(f64, f64)> {
    check_dim(op.dim(), state.len())?;
    let o = op.apply(state)?;
    let mean = state.dot(&o);
    Ok((mean, (o - state.scale(mean)).norm_squared()))
}

/// `⟨(iB)²⟩ = ‖Bψ‖²`; the mean of `iB` vanishes for real states.
pub fn imaginary_second_moment(state: &DVector<f64>, op: &ImaginaryOperator) -> Result<f64> {
    check_dim(op.dim(), state.len())?;
    Ok(op.generator().apply(state)?.norm_squared())
}

/// Clamps rounding-level negative variances to zero; anything more negative
/// is an error.
pub fn clamp_variance(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -VARIANCE_TOLERANCE {
        log::warn!("{name} variance {value:e} clamped to zero");
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance { name, value })
    }
}

/// Which field state the quadratures are evaluated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureConvention {
    /// The single-mode state `Σₙ √P(n) |n⟩` built from the photon-number
    /// distribution. Reproduces the published marker panel.
    #[default]
    PhotonAmplitude,
    /// Expectation values in the full field-atom state.
    FullState,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadratures {
    pub var_x: f64,
    pub var_y: f64,
    pub product: f64,
}

/// Variances of `X = a + a†` and `Y = i(a† − a)`; a coherent state gives 1.
pub fn quadrature_variances(state: &DVector<f64>, basis: &ProductBasis) -> Result<Quadratures> {
    quadrature_variances_with(state, basis, QuadratureConvention::default())
}

pub fn quadrature_variances_with(
    state: &DVector<f64>,
    basis: &ProductBasis,
    convention: QuadratureConvention,
) -> Result<Quadratures> {
    check_dim(basis.dim(), state.len())?;
    let a = annihilator(&basis.fock());
    let (x, y) = match convention {
        QuadratureConvention::FullState => {
            let x = field_operator(&a.position(), basis)?;
            let y = ImaginaryOperator::new(field_operator(a.momentum().generator(), basis)?)?;
            (x, y)
        }
        QuadratureConvention::PhotonAmplitude => {
            let p = distributions(state, basis)?.photon;
            let phi = DVector::from_iterator(p.len(), p.iter().map(|v| v.sqrt()));
            return field_quadratures(&phi, &basis.fock());
        }
    };
    let (_, var_x) = mean_and_variance(state, &x)?;
    let var_y = imaginary_second_moment(state, &y)?;
    finish_quadratures(var_x, var_y)
}

/// Quadrature variances of a pure single-mode state.
pub fn field_quadratures(phi: &DVector<f64>, fock: &FockTruncation) -> Result<Quadratures> {
    let a = annihilator(fock);
    let (_, var_x) = mean_and_variance(phi, &a.position())?;
    let var_y = imaginary_second_moment(phi, &a.momentum())?;
    finish_quadratures(var_x, var_y)
}

fn finish_quadratures(var_x: f64, var_y: f64) -> Result<Quadratures> {
    let var_x = clamp_variance("X", var_x)?;
    let var_y = clamp_variance("Y", var_y)?;
    Ok(Quadratures {
        var_x,
        var_y,
        product: var_x * var_y,
    })
}

/// `4⟨ΔJz²⟩⟨ΔJy²⟩/⟨Jx⟩²`, or a saturation marker when `⟨Jx⟩` vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseProduct {
    Finite(f64),
    Saturated,
}

impl PhaseProduct {
    pub fn value(&self) -> f64 {
        match self {
            PhaseProduct::Finite(v) => *v,
            PhaseProduct::Saturated => f64::INFINITY,
        }
    }
}

impl Serialize for PhaseProduct {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PhaseProduct::Finite(v) => s.serialize_f64(*v),
            PhaseProduct::Saturated => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PhaseProduct {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PhaseProduct::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(PhaseProduct::Saturated),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unexpected phase product {t:?}"))),
        }
    }
}

impl std::fmt::Display for PhaseProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseProduct::Finite(v) => write!(f, "{v}"),
            PhaseProduct::Saturated => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentumPanel {
    pub mean_jx: f64,
    pub var_jx: f64,
    pub mean_jy: f64,
    pub var_jy: f64,
    pub mean_jz: f64,
    pub var_jz: f64,
    pub phase_product: PhaseProduct,
}

pub fn angular_momentum_panel(state: &DVector<f64>, basis: &ProductBasis) -> Result<AngularMomentumPanel> {
    check_dim(basis.dim(), state.len())?;
    let s = collective_spin(&basis.dicke());
    let (mean_jx, var_jx) = mean_and_variance(state, &atomic_operator(&s.jx, basis)?)?;
    let (mean_jz, var_jz) = mean_and_variance(state, &atomic_operator(&s.jz, basis)?)?;
    let jy = ImaginaryOperator::new(atomic_operator(s.jy().generator(), basis)?)?;
    let var_jy = imaginary_second_moment(state, &jy)?;
    let phase_product = if mean_jx * mean_jx < PHASE_SATURATION {
        PhaseProduct::Saturated
    } else {
        PhaseProduct::Finite(4.0 * var_jz * var_jy / (mean_jx * mean_jx))
    };
    Ok(AngularMomentumPanel {
        mean_jx,
        var_jx,
        mean_jy: 0.0,
        var_jy,
        mean_jz,
        var_jz,
        phase_product,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    /// `P(n)` for `n = 0..=n_max`.
    pub photon: Vec<f64>,
    /// `P(m)` for `m = −N/2..=N/2`.
    pub atomic: Vec<f64>,
}

pub fn distributions(state: &DVector<f64>, basis: &ProductBasis) -> Result<Distributions> {
    check_dim(basis.dim(), state.len())?;
    let mut photon = vec![0.0; basis.fock().dim()];
    let mut atomic = vec![0.0; basis.dicke().dim()];
    for (i, c) in state.iter().enumerate() {
        let (n, k) = basis.unflatten(i);
        photon[n] += c * c;
        atomic[k] += c * c;
    }
    Ok(Distributions { photon, atomic })
}

/// Field and atomic statistics of one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub mean_n: f64,
    pub var_n: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub uncertainty_xy: f64,
    /// Quadrature variances in the full field-atom state.
    pub var_x_state: f64,
    pub var_y_state: f64,
    pub mean_jx: f64,
    pub var_jx: f64,
    pub mean_jy: f64,
    pub var_jy: f64,
    pub mean_jz: f64,
    pub var_jz: f64,
    pub phase_uncertainty_product: PhaseProduct,
    pub photon_distribution: Vec<f64>,
    pub angmom_distribution: Vec<f64>,
}

impl ObservableRecord {
    /// `⟨Δn²⟩/⟨n⟩`; below one means sub-Poissonian light.
    pub fn fano_factor(&self) -> f64 {
        self.var_n / self.mean_n
    }
}

pub fn observe(state: &DVector<f64>, basis: &ProductBasis) -> Result<ObservableRecord> {
    check_dim(basis.dim(), state.len())?;
    let a = annihilator(&basis.fock());
    let (mean_n, var_n) = mean_and_variance(state, &field_operator(&a.number(), basis)?)?;
    let quad = quadrature_variances_with(state, basis, QuadratureConvention::PhotonAmplitude)?;
    let full = quadrature_variances_with(state, basis, QuadratureConvention::FullState)?;
    let spin = angular_momentum_panel(state, basis)?;
    let dist = distributions(state, basis)?;
    Ok(ObservableRecord {
        mean_n,
        var_n,
        var_x: quad.var_x,
        var_y: quad.var_y,
        uncertainty_xy: quad.product,
        var_x_state: full.var_x,
        var_y_state: full.var_y,
        mean_jx: spin.mean_jx,
        var_jx: spin.var_jx,
        mean_jy: spin.mean_jy,
        var_jy: spin.var_jy,
        mean_jz: spin.mean_jz,
        var_jz: spin.var_jz,
        phase_uncertainty_product: spin.phase_product,
        photon_distribution: dist.photon,
        angmom_distribution: dist.atomic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::coherent_amplitudes;
    use approx::assert_relative_eq;

    fn ground(basis: &ProductBasis) -> DVector<f64> {
        let mut v = DVector::zeros(basis.dim());
        v[0] = 1.0;
        v
    }

    #[test]
    fn identity_and_jz_expectations() {
        let b = ProductBasis::with_sizes(4, 3).unwrap();
        let v = ground(&b);
        assert_eq!(expectation(&v, &RealOperator::identity(b.dim())).unwrap(), 1.0);
        let s = collective_spin(&b.dicke());
        let jz = atomic_operator(&s.jz, &b).unwrap();
        assert_eq!(expectation(&v, &jz).unwrap(), -1.5);
        assert!(expectation(&DVector::zeros(3), &jz).is_err());
    }

    #[test]
    fn vacuum_quadratures() {
        let b = ProductBasis::with_sizes(6, 2).unwrap();
        for c in [QuadratureConvention::PhotonAmplitude, QuadratureConvention::FullState] {
            let q = quadrature_variances_with(&ground(&b), &b, c).unwrap();
            assert_relative_eq!(q.var_x, 1.0, epsilon = 1e-15);
            assert_relative_eq!(q.var_y, 1.0, epsilon = 1e-15);
            assert_relative_eq!(q.product, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn coherent_state_is_minimum_uncertainty() {
        let fock = FockTruncation::new(60).unwrap();
        let (c, loss) = coherent_amplitudes(2.0, 60);
        assert!(loss < 1e-15);
        let q = field_quadratures(&DVector::from_vec(c), &fock).unwrap();
        assert_relative_eq!(q.var_x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(q.var_y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_spin_state_panel() {
        let b = ProductBasis::with_sizes(3, 2).unwrap();
        let p = angular_momentum_panel(&ground(&b), &b).unwrap();
        assert_eq!(p.mean_jz, -1.0);
        assert_eq!(p.var_jz, 0.0);
        assert_relative_eq!(p.var_jy, 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.var_jx, 0.5, epsilon = 1e-15);
        assert_eq!(p.phase_product, PhaseProduct::Saturated);
    }

    #[test]
    fn phase_product_serializes_sentinel() {
        assert_eq!(serde_json::to_string(&PhaseProduct::Saturated).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&PhaseProduct::Finite(1.5)).unwrap(), "1.5");
        let back: PhaseProduct = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, PhaseProduct::Saturated);
    }

    #[test]
    fn variance_clamp() {
        assert_eq!(clamp_variance("n", -1e-13).unwrap(), 0.0);
        assert!(clamp_variance("n", -1e-9).is_err());
        assert_eq!(clamp_variance("n", 0.25).unwrap(), 0.25);
    }

    #[test]
    fn marginals_of_a_superposition() {
        let b = ProductBasis::with_sizes(3, 2).unwrap();
        let mut v = DVector::zeros(b.dim());
        v[b.index(0, 0)] = 0.6;
        v[b.index(1, 2)] = 0.8;
        let d = distributions(&v, &b).unwrap();
        assert_relative_eq!(d.photon[1], 0.64, epsilon = 1e-15);
        assert_relative_eq!(d.atomic[0], 0.36, epsilon = 1e-15);
        let r = observe(&v, &b).unwrap();
        assert_relative_eq!(r.mean_n, 0.64, epsilon = 1e-15);
        assert_relative_eq!(r.var_n, 0.64 * 0.36, epsilon = 1e-15);
    }
}
