use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{converge_ground_state, TruncationConfig};
use crate::observables::angular_momentum_panel;

/// Crossover estimate along one coupling line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    pub lambda_star: f64,
    /// Peak of `−Δ²⟨Jz⟩/Δλ²` on the grid.
    pub susceptibility: f64,
    /// Grid index of the peak.
    pub index: usize,
}

/// Second-difference curvature `−d²y/dx²` at the interior points of a
/// possibly non-uniform grid.
fn curvature(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    -2.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0) / (h0 + h1)
}

/// `λ*` as the argmax of `−Δ²⟨Jz⟩/Δλ²`, refined by a parabola through the
/// peak and its neighbours. Needs at least three strictly increasing points.
pub fn locate_transition(lambdas: &[f64], mean_jz: &[f64]) -> Result<TransitionEstimate> {
    if lambdas.len() != mean_jz.len() {
        return Err(Error::DimensionMismatch {
            expected: lambdas.len(),
            found: mean_jz.len(),
        });
    }
    if lambdas.len() < 3 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "transition search needs at least three strictly increasing couplings".into(),
        ));
    }
    let chi: Vec<f64> = (1..lambdas.len() - 1).map(|i| curvature(lambdas, mean_jz, i)).collect();
    let (peak, &susceptibility) = chi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let index = peak + 1;
    let mut lambda_star = lambdas[index];
    if peak > 0 && peak + 1 < chi.len() {
        let (x0, x1, x2) = (lambdas[index - 1], lambdas[index], lambdas[index + 1]);
        let (y0, y1, y2) = (chi[peak - 1], chi[peak], chi[peak + 1]);
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        if a < 0.0 {
            lambda_star = (-b / (2.0 * a)).clamp(x0, x2);
        }
    }
    Ok(TransitionEstimate {
        lambda_star,
        susceptibility,
        index,
    })
}

/// Computes `⟨Jz⟩` along `lambdas` at fixed remaining parameters and locates
/// the crossover.
pub fn scan_transition(
    base: &ModelParams,
    lambdas: &[f64],
    config: &TruncationConfig,
) -> Result<TransitionEstimate> {
    let mut jz = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let g = converge_ground_state(&base.with_lambda(l), config)?;
        jz.push(angular_momentum_panel(&g.vector, &g.basis)?.mean_jz);
    }
    locate_transition(lambdas, &jz)
}
