//! Worked examples at the level of the public pipeline.

use approx::assert_abs_diff_eq;

use dicke_pdc::analytic::{
    critical_coupling_strong, critical_coupling_weak, mean_field_solution, population_difference,
    transformed_params,
};
use dicke_pdc::model::ModelParams;
use dicke_pdc::observables::PhaseProduct;
use dicke_pdc::point::evaluate_point;
use dicke_pdc::spectral::TruncationConfig;
use dicke_pdc::sweep::{run_sweep, scan_transition, Execution, PointStatus, SweepGrid, GridPreset};

/// Four-digit worked values are matched to this.
const FOUR_DIGITS: f64 = 5e-4;

fn point(n: usize, lambda: f64, kappa: f64) -> dicke_pdc::point::PointEvaluation {
    evaluate_point(&ModelParams::resonant(n, lambda, kappa).unwrap(), &TruncationConfig::default()).unwrap()
}

#[test]
fn decoupled_point() {
    let e = point(2, 0.0, 0.0);
    let o = &e.report.observables;
    assert_eq!(o.mean_jz, -1.0);
    assert_eq!(o.mean_n, 0.0);
    assert_eq!(o.var_jz, 0.0);
    assert_abs_diff_eq!(o.var_jy, 0.5, epsilon = 1e-15);
    assert_eq!(e.report.entanglement.entropy_bits, 0.0);
    assert_eq!(e.report.entanglement.concurrence, Some(0.0));
    assert_eq!((o.var_x, o.var_y, o.uncertainty_xy), (1.0, 1.0, 1.0));
    assert_eq!(e.ground.energy, -1.0);
}

#[test]
fn superradiant_photon_number() {
    let o = point(2, 3.323, 0.0).report.observables;
    assert!((o.mean_n - 22.078).abs() / 22.078 <= 0.005, "{}", o.mean_n);
}

#[test]
fn squeezed_quadratures() {
    let o = point(2, 3.323, 0.3).report.observables;
    assert_abs_diff_eq!(o.var_x, 0.676, epsilon = 0.01);
    assert_abs_diff_eq!(o.var_y, 1.481, epsilon = 0.01);
    assert_abs_diff_eq!(o.uncertainty_xy, 1.000, epsilon = 0.01);
}

#[test]
fn strong_squeezing_spin_panel() {
    let o = point(2, 3.323, 4.8).report.observables;
    assert_abs_diff_eq!(o.mean_jz, -0.781, epsilon = 0.01);
    assert_abs_diff_eq!(o.var_jz, 0.269, epsilon = 0.01);
    let o = point(5, 3.019, 4.8).report.observables;
    assert_abs_diff_eq!(o.var_jz, 0.837, epsilon = 0.01);
}

#[test]
fn coherent_phase_product() {
    let o = point(5, 3.019, 0.0).report.observables;
    match o.phase_uncertainty_product {
        PhaseProduct::Finite(v) => assert_abs_diff_eq!(v, 1.0, epsilon = 0.01),
        PhaseProduct::Saturated => panic!("expected a finite product"),
    }
}

#[test]
fn weak_regime_is_nearly_separable() {
    let e = point(2, 0.05, 0.3);
    assert!(e.report.entanglement.entropy_bits <= 1e-4, "{}", e.report.entanglement.entropy_bits);
}

#[test]
fn analytic_table_values() {
    let p = |k: f64| ModelParams::resonant(2, 0.0, k).unwrap();
    assert_eq!(critical_coupling_weak(&p(0.0)), 1.0);
    assert_eq!(critical_coupling_strong(&p(0.0)), 0.5);
    assert_abs_diff_eq!(critical_coupling_weak(&p(0.3)), 1.2465, epsilon = FOUR_DIGITS);
    assert_abs_diff_eq!(critical_coupling_strong(&p(0.3)), 0.7416, epsilon = FOUR_DIGITS);
    assert_abs_diff_eq!(transformed_params(&p(2.4)).eta, 0.2069, epsilon = FOUR_DIGITS);

    let mf = mean_field_solution(&ModelParams::resonant(2, 3.323, 0.0).unwrap());
    assert_abs_diff_eq!(mf.alpha_squared(), 22.07, epsilon = 0.01);
    let beta = mf.beta_aux.unwrap();
    assert_abs_diff_eq!(beta, -0.9778, epsilon = FOUR_DIGITS);
    assert_abs_diff_eq!(population_difference(beta, 2), -0.0224, epsilon = FOUR_DIGITS);
}

#[test]
fn one_point_grid() {
    let mut grid = SweepGrid::preset(GridPreset::Desk, 2);
    grid.lambda_axis = vec![0.0];
    grid.kappa_axis = vec![0.0];
    let r = run_sweep(&grid, Execution::Sequential).unwrap();
    assert_eq!(r.records.len(), 1);
    let rec = &r.records[0];
    assert_eq!(rec.status, PointStatus::Ok);
    let o = rec.observables.as_ref().unwrap();
    assert_eq!((o.mean_jz, o.mean_n), (-1.0, 0.0));
    let e = rec.entanglement.unwrap();
    assert_eq!((e.entropy_bits, e.concurrence), (0.0, Some(0.0)));
}

#[test]
fn transition_estimates() {
    let config = TruncationConfig::default();
    let lambdas: Vec<f64> = (0..=40).map(|i| 0.3 + 0.025 * i as f64).collect();
    let est = scan_transition(&ModelParams::resonant(6, 0.0, 0.0).unwrap(), &lambdas, &config).unwrap();
    // Finite-N rounding of the mean-field threshold at 0.5.
    assert!((0.6..0.9).contains(&est.lambda_star), "{}", est.lambda_star);
}
