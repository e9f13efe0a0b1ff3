//! Full single-point pipeline: ground state, observables, entanglement.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::entanglement::{entropy_of_entanglement, reduce_to_ensemble, pair_reduction, wootters_concurrence};
use crate::error::Result;
use crate::model::ModelParams;
use crate::observables::{observe, ObservableRecord};
use crate::operators::ProductBasis;
use crate::spectral::{converge_ground_state, GroundStateResult, TruncationConfig};

/// Entropy of the field-ensemble split and pairwise atomic concurrence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementPair {
    pub entropy_bits: f64,
    /// Absent for a single atom.
    pub concurrence: Option<f64>,
    /// `(N − 1)·C`.
    pub concurrence_scaled: Option<f64>,
}

pub fn entanglement_of(state: &DVector<f64>, basis: &ProductBasis) -> Result<EntanglementPair> {
    let ensemble = reduce_to_ensemble(state, basis)?;
    let entropy_bits = entropy_of_entanglement(&ensemble);
    let n = basis.n_atoms();
    let concurrence = if n >= 2 {
        Some(wootters_concurrence(&pair_reduction(&ensemble, n)?)?)
    } else {
        None
    };
    Ok(EntanglementPair {
        entropy_bits,
        concurrence,
        concurrence_scaled: concurrence.map(|c| (n as f64 - 1.0) * c),
    })
}

/// Statistics of one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub observables: ObservableRecord,
    pub entanglement: EntanglementPair,
}

pub fn report_state(state: &DVector<f64>, basis: &ProductBasis) -> Result<StateReport> {
    Ok(StateReport {
        observables: observe(state, basis)?,
        entanglement: entanglement_of(state, basis)?,
    })
}

#[derive(Clone, Debug)]
pub struct PointEvaluation {
    pub ground: GroundStateResult,
    /// Statistics of the reported ground vector (the combined state at a
    /// degenerate point).
    pub report: StateReport,
    /// Statistics of the lowest member alone, only at degenerate points.
    pub first_member: Option<StateReport>,
}

pub fn evaluate_point(params: &ModelParams, config: &TruncationConfig) -> Result<PointEvaluation> {
    let ground = converge_ground_state(params, config)?;
    let report = report_state(&ground.vector, &ground.basis)?;
    let first_member = if ground.degenerate {
        Some(report_state(ground.first_member(), &ground.basis)?)
    } else {
        None
    };
    Ok(PointEvaluation {
        ground,
        report,
        first_member,
    })
}
