//! Lowest eigenpairs, adaptive Fock truncation and ground-state assembly.

pub mod dense;
mod ground;
mod lanczos;
mod tridiag;

pub use ground::{
    converge_ground_state, resolve_degeneracy, truncation_residual, DegeneracyResolution, Growth,
    GroundStateResult, GroundSummary, Parity, StageRecord, TruncationConfig,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{RealOperator, RealSymOperator};

/// Blocks up to this dimension are diagonalized densely under [`Solver::Auto`].
pub const DENSE_CUTOFF: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Dense for small blocks, Lanczos otherwise.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
    /// Set when the pair was computed inside a parity sector.
    pub parity: Option<Parity>,
}

/// The `k ≥ 2` lowest eigenpairs, ascending, with orthonormal vectors under
/// the sign convention of [`fix_sign`].
pub fn lowest_eigenpairs(h: &RealSymOperator, k: usize) -> Result<Vec<EigenPair>> {
    lowest_eigenpairs_with(h, k, Solver::Auto, None)
}

pub fn lowest_eigenpairs_with(
    h: &RealSymOperator,
    k: usize,
    solver: Solver,
    start: Option<&DVector<f64>>,
) -> Result<Vec<EigenPair>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least two eigenpairs are needed for a gap, got k = {k}"
        )));
    }
    if k > h.dim() {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenpairs of a {0}x{0} operator",
            h.dim()
        )));
    }
    Ok(raw_lowest(h, k, solver, start.map(|s| s.as_slice()))?
        .into_iter()
        .map(|(value, v)| EigenPair {
            value,
            vector: signed(DVector::from_vec(v)),
            parity: None,
        })
        .collect())
}

pub(crate) fn raw_lowest(
    op: &RealOperator,
    k: usize,
    solver: Solver,
    start: Option<&[f64]>,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if op.iter().all(|(i, j, _)| i == j) {
        return Ok(diagonal_lowest(op, k));
    }
    let use_dense = match solver {
        Solver::Dense => true,
        Solver::Lanczos => false,
        Solver::Auto => op.dim() <= DENSE_CUTOFF,
    };
    if use_dense {
        Ok(dense::lowest(op, k))
    } else {
        lanczos::lowest(op, k, start)
    }
}

/// Exact eigenpairs of a diagonal operator; ties keep index order.
fn diagonal_lowest(op: &RealOperator, k: usize) -> Vec<(f64, Vec<f64>)> {
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| op.get(a, a).total_cmp(&op.get(b, b)));
    order
        .into_iter()
        .take(k)
        .map(|i| {
            let mut v = vec![0.0; op.dim()];
            v[i] = 1.0;
            (op.get(i, i), v)
        })
        .collect()
}

/// Makes the largest-magnitude coefficient positive. Near-ties resolve to
/// the lowest index so the choice is reproducible.
pub fn fix_sign(v: &mut DVector<f64>) {
    let max = v.amax();
    if max == 0.0 {
        return;
    }
    if let Some(x) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

pub(crate) fn signed(mut v: DVector<f64>) -> DVector<f64> {
    fix_sign(&mut v);
    v
}

/// Fractional part of `i·φ` from a 64-bit Weyl sequence.
pub(crate) fn golden_fraction(i: u64) -> f64 {
    (i.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64
}
