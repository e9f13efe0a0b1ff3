//! Acceptance criteria. Every check prints one `PASS` or `FAIL` line; a
//! criterion's test fails when any of its checks fails.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dicke_pdc::analytic::{
    critical_coupling_strong, critical_coupling_weak, mean_field_solution, population_difference,
    strong_ground_state, transformed_params, weak_ground_state,
};
use dicke_pdc::entanglement::{pair_reduction, reduce_to_ensemble, reference};
use dicke_pdc::markers::{validate_markers, CellStatus};
use dicke_pdc::model::{build_full_hamiltonian, parity_operator, ModelParams};
use dicke_pdc::observables::{distributions, expectation};
use dicke_pdc::operators::{collective_spin, annihilator, DickeSpace, FockTruncation, ProductBasis};
use dicke_pdc::point::evaluate_point;
use dicke_pdc::spectral::TruncationConfig;
use dicke_pdc::sweep::{run_sweep, Execution, GridPreset, Quantity, SweepGrid, SweepResult};

struct Checks {
    criterion: u32,
    failed: Vec<String>,
}

impl Checks {
    fn new(criterion: u32) -> Self {
        Self { criterion, failed: Vec::new() }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} ({detail})", self.criterion);
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn finish(self) {
        assert!(
            self.failed.is_empty(),
            "criterion {} failed checks: {:?}",
            self.criterion,
            self.failed
        );
    }
}

fn workers() -> Execution {
    Execution::from_workers(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[test]
fn criterion_1_marker_panel() {
    let mut c = Checks::new(1);
    let t = Instant::now();
    let report = validate_markers(&TruncationConfig::default(), None).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    for cell in &report.cells {
        let name = format!("{} {}", cell.column, cell.quantity);
        let detail = format!(
            "expected {}, computed {:.6}, delta {:.2e}, {}",
            cell.expected, cell.computed, cell.delta, cell.rule
        );
        match cell.status {
            CellStatus::Waived => println!("WAIVED criterion 1: {name} ({detail})"),
            s => c.check(&name, s == CellStatus::Pass, detail),
        }
    }
    c.check("runtime under 60 s", elapsed < 60.0, format!("{elapsed:.1} s"));
    c.finish();
}

#[test]
fn criterion_2_weak_regime() {
    let mut c = Checks::new(2);
    let config = TruncationConfig::default();
    for n in [2, 5] {
        for kappa in [0.0, 0.3] {
            let p = ModelParams::resonant(n, 0.05, kappa).unwrap();
            let eval = evaluate_point(&p, &config).unwrap();
            let g = &eval.ground;
            let w = weak_ground_state(&p, &g.basis).unwrap();
            let overlap = w.vector.dot(&g.vector).powi(2);
            c.check(
                &format!("N={n} kappa={kappa} overlap"),
                overlap >= 0.99,
                format!("|<G_W|psi>|^2 = {overlap:.8}"),
            );
            let de = (g.energy - w.energy).abs();
            c.check(
                &format!("N={n} kappa={kappa} energy"),
                de <= 1e-3,
                format!("E1 = {:.8}, E_GW = {:.8}, |diff| = {de:.3e}", g.energy, w.energy),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_3_strong_regime() {
    let mut c = Checks::new(3);
    let n = 2;
    let p = ModelParams::resonant(n, 5.0 * (n as f64).sqrt(), 0.0).unwrap();
    let eval = evaluate_point(&p, &TruncationConfig::default()).unwrap();
    let o = &eval.report.observables;
    let mf = mean_field_solution(&p);
    let a2 = mf.alpha_squared();
    let rel_n = (o.mean_n - a2).abs() / a2;
    c.check("mean photon number", rel_n <= 0.05, format!("<n> = {:.5}, alpha_R^2 = {a2:.5}, rel {rel_n:.2e}", o.mean_n));
    let jz = population_difference(mf.beta_aux.unwrap(), n);
    let djz = (o.mean_jz - jz).abs();
    c.check("population difference", djz <= 0.05, format!("<Jz> = {:.5}, analytic {jz:.5}, diff {djz:.2e}", o.mean_jz));
    let e1 = eval.ground.energy;
    let rel_e = (e1 - mf.energy).abs() / mf.energy.abs();
    c.check("energy", rel_e <= 0.02, format!("E1 = {e1:.6}, E_GS = {:.6}, rel {rel_e:.2e}", mf.energy));
    c.finish();
}

/// Brent root of `f` on a bracketing interval.
fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    assert!(fa * fb <= 0.0, "root not bracketed: f({a}) = {fa}, f({b}) = {fb}");
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    b
}

/// Classical energy of a coherent field `α` and a collective spin tilted by
/// `θ` from the ground pole, before any minimization.
fn classical_energy_2d(p: &ModelParams, alpha: f64, theta: f64) -> f64 {
    let n = p.n_atoms as f64;
    let g = p.lambda / n.sqrt();
    (p.omega_f + 4.0 * p.kappa) * alpha * alpha - 0.5 * n * p.omega_a * theta.cos()
        + g * 2.0 * alpha * n * theta.sin()
}

/// Second partial derivatives at the origin by central differences with
/// one Richardson step.
fn hessian_determinant(p: &ModelParams) -> f64 {
    let e = |a: f64, t: f64| classical_energy_2d(p, a, t);
    let second = |h: f64| {
        let e00 = e(0.0, 0.0);
        let aa = (e(h, 0.0) - 2.0 * e00 + e(-h, 0.0)) / (h * h);
        let tt = (e(0.0, h) - 2.0 * e00 + e(0.0, -h)) / (h * h);
        let at = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
        (aa, tt, at)
    };
    let h = 1e-3;
    let (a1, t1, x1) = second(h);
    let (a2, t2, x2) = second(h / 2.0);
    let rich = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let (aa, tt, at) = (rich(a1, a2), rich(t1, t2), rich(x1, x2));
    aa * tt - at * at
}

#[test]
fn criterion_4_critical_couplings() {
    let mut c = Checks::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let (mut worst_s, mut worst_w) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let omega_f = rng.random_range(0.5..=2.0);
        let kappa = rng.random_range(0.0..=5.0);
        let n_atoms = 1 + i % 5;
        let base = ModelParams::new(1.0, omega_f, kappa, 0.0, n_atoms).unwrap();

        let numeric_s = brent(|l| hessian_determinant(&base.with_lambda(l)), 1e-6, 50.0, 1e-13);
        let ds = (numeric_s - critical_coupling_strong(&base)).abs();
        worst_s = worst_s.max(ds);

        let target = |l: f64| {
            let t = transformed_params(&base.with_lambda(l));
            t.lambda_tilde - (base.omega_a * t.omega_f_tilde).sqrt()
        };
        let numeric_w = brent(target, 0.0, 100.0, 1e-14);
        let dw = (numeric_w - critical_coupling_weak(&base)).abs();
        worst_w = worst_w.max(dw);
        if ds > 1e-8 || dw > 1e-10 {
            println!("  omega_f = {omega_f}, kappa = {kappa}: strong diff {ds:.2e}, weak diff {dw:.2e}");
        }
    }
    c.check("strong coupling vs classical Hessian zero", worst_s <= 1e-8, format!("max diff {worst_s:.2e}"));
    c.check("weak coupling vs effective-coupling root", worst_w <= 1e-10, format!("max diff {worst_w:.2e}"));
    c.finish();
}

fn random_symmetric_state(rng: &mut ChaCha8Rng, basis: &ProductBasis) -> DVector<f64> {
    let v = DVector::from_fn(basis.dim(), |_, _| rng.random_range(-1.0..1.0));
    &v / v.norm()
}

#[test]
fn criterion_5_properties() {
    let mut c = Checks::new(5);
    let config = TruncationConfig::default();

    // Operator algebra. Ladder elements are square roots, so products of them
    // reproduce the integer entries of 2Jz only to rounding.
    let mut worst_alg = 0.0f64;
    for n in 1..=6 {
        let s = collective_spin(&DickeSpace::new(n).unwrap());
        let comm = s.jplus.commutator(&s.jminus).unwrap();
        worst_alg = worst_alg.max(comm.sub(&s.jz.scale(2.0)).unwrap().max_abs());
        let zp = s.jz.commutator(&s.jplus).unwrap();
        worst_alg = worst_alg.max(zp.sub(&s.jplus).unwrap().max_abs());
        let zm = s.jz.commutator(&s.jminus).unwrap();
        worst_alg = worst_alg.max(zm.add(&s.jminus).unwrap().max_abs());
    }
    let ulps = 8.0 * f64::EPSILON * 36.0;
    c.check("su(2) commutators exact to rounding", worst_alg <= ulps, format!("max entry error {worst_alg:.2e}, bound {ulps:.2e}"));
    let a = annihilator(&FockTruncation::new(30).unwrap());
    c.check("photon number symmetric", a.number().max_asymmetry() == 0.0, "exact".into());

    let points = [(1, 0.3, 0.0), (2, 0.05, 0.3), (2, 3.323, 0.3), (3, 1.2, 1.0), (4, 2.0, 2.4), (5, 3.019, 4.8)];
    for &(n, lambda, kappa) in &points {
        let tag = format!("N={n} lambda={lambda} kappa={kappa}");
        let p = ModelParams::resonant(n, lambda, kappa).unwrap();
        let eval = evaluate_point(&p, &config).unwrap();
        let g = &eval.ground;
        let h = build_full_hamiltonian(&p, &g.basis).unwrap();
        c.check(&format!("{tag} hermitian"), h.max_asymmetry() == 0.0, format!("{:e}", h.max_asymmetry()));
        let pi = parity_operator(&g.basis);
        let hp = h.commutator(&pi).unwrap().max_abs();
        c.check(&format!("{tag} parity commutes"), hp == 0.0, format!("max |[H, P]| = {hp:e}"));

        let mut worst_res = g.residual;
        for m in &g.members {
            let r = (h.apply(&m.vector).unwrap() - &m.vector * m.value).norm() / h.inf_norm();
            worst_res = worst_res.max(r);
        }
        c.check(&format!("{tag} residuals"), worst_res <= 1e-10, format!("{worst_res:.2e}"));

        let ew = expectation(&weak_ground_state(&p, &g.basis).unwrap().vector, &h).unwrap();
        let strong = strong_ground_state(&p, &g.basis).unwrap();
        let es = expectation(&strong.symmetric, &h).unwrap();
        let slack = 1e-9 * g.energy.abs().max(1.0);
        c.check(
            &format!("{tag} variational bound"),
            g.energy <= ew + slack && g.energy <= es + slack,
            format!("E1 = {:.6}, <G_W|H|G_W> = {ew:.6}, <G_S|H|G_S> = {es:.6}", g.energy),
        );

        let o = &eval.report.observables;
        c.check(&format!("{tag} Heisenberg"), o.uncertainty_xy >= 1.0 - 1e-9, format!("{:.10}", o.uncertainty_xy));
        let d = distributions(&g.vector, &g.basis).unwrap();
        let (sp, sm) = (d.photon.iter().sum::<f64>(), d.atomic.iter().sum::<f64>());
        c.check(
            &format!("{tag} distributions normalized"),
            (sp - 1.0).abs() <= 1e-10 && (sm - 1.0).abs() <= 1e-10,
            format!("sum P(n) - 1 = {:.1e}, sum P(m) - 1 = {:.1e}", sp - 1.0, sm - 1.0),
        );
        let e = &eval.report.entanglement;
        let s_max = ((n + 1) as f64).log2();
        c.check(
            &format!("{tag} entropy bounds"),
            e.entropy_bits >= 0.0 && e.entropy_bits <= s_max + 1e-12,
            format!("S = {:.6} in [0, {s_max:.6}]", e.entropy_bits),
        );
        if let Some(conc) = e.concurrence {
            let bound = 2.0 / n as f64 + 1e-9;
            c.check(&format!("{tag} concurrence bound"), conc <= bound, format!("C = {conc:.6} <= {bound:.6}"));
        }
    }

    // Combinatorial pair reduction against the brute-force qubit partial trace.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 2 + i % 4;
        let basis = ProductBasis::with_sizes(3, n).unwrap();
        let psi = random_symmetric_state(&mut rng, &basis);
        let fast = pair_reduction(&reduce_to_ensemble(&psi, &basis).unwrap(), n).unwrap();
        let qubits = reference::expand_to_qubits(&psi, &basis).unwrap();
        let slow = reference::partial_trace_pair(&qubits, n, 0, n - 1).unwrap();
        worst = worst.max((fast.matrix() - slow.matrix()).amax());
    }
    c.check("pair reduction matches brute force", worst <= 1e-12, format!("max entry diff {worst:.2e} over 100 states"));
    c.finish();
}

fn desk_sweep(n_atoms: usize) -> SweepResult {
    let grid = SweepGrid::preset(GridPreset::Desk, n_atoms);
    run_sweep(&grid, workers()).unwrap()
}

fn grid_max(result: &SweepResult, q: Quantity) -> f64 {
    result.matrix(q).iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
}

/// Concurrence above this counts as entangled pairs for the band check.
const BAND_THRESHOLD: f64 = 0.01;

#[test]
fn criterion_6_phase_diagram() {
    let mut c = Checks::new(6);
    let t = Instant::now();
    let two = desk_sweep(2);
    let elapsed = t.elapsed().as_secs_f64();
    c.check("N=2 desk sweep under 10 min", elapsed < 600.0, format!("{elapsed:.1} s"));
    c.check("N=2 no failed points", two.failed() == 0, format!("{} failed, {} at the cap", two.failed(), two.cap_hits()));

    let corner = two.record(0, 0);
    let (s, conc, jz) = (
        Quantity::Entropy.value(corner),
        Quantity::Concurrence.value(corner),
        Quantity::MeanJz.value(corner),
    );
    c.check(
        "weak corner",
        s < 1e-3 && conc < 1e-3 && (jz + 1.0).abs() <= 0.01,
        format!("S = {s:.2e}, C = {conc:.2e}, <Jz> = {jz:.6}"),
    );

    // Strong coupling at low squeezing: λ/√N >= 4 and κ <= 0.5.
    let mut worst = 0.0f64;
    let mut cells = 0;
    for (ik, &kappa) in two.grid.kappa_axis.iter().enumerate() {
        for (il, &x) in two.grid.lambda_axis.iter().enumerate() {
            if kappa <= 0.5 + 1e-12 && x >= 4.0 - 1e-12 {
                worst = worst.max(Quantity::MeanJz.value(two.record(il, ik)).abs());
                cells += 1;
            }
        }
    }
    c.check("strong low-kappa region has null population difference", worst <= 0.05, format!("max |<Jz>| = {worst:.4} over {cells} cells"));

    // Concurrence-positive cells must lie between the two analytic overlays,
    // allowing one grid step on either side.
    let step = two.grid.lambda_axis[1] - two.grid.lambda_axis[0];
    let mut outside = Vec::new();
    for (ik, row) in two.overlay.iter().enumerate() {
        let lo = row.lambda_w_axis.min(row.lambda_s_axis) - step;
        let hi = row.lambda_w_axis.max(row.lambda_s_axis) + step;
        for (il, &x) in two.grid.lambda_axis.iter().enumerate() {
            let cv = Quantity::Concurrence.value(two.record(il, ik));
            if cv > BAND_THRESHOLD && !(lo..=hi).contains(&x) {
                outside.push(format!("(x={x:.2}, kappa={:.2}, C={cv:.3})", row.kappa));
            }
        }
    }
    let shown: Vec<_> = outside.iter().take(6).cloned().collect();
    c.check(
        "concurrence band between the analytic overlays",
        outside.is_empty(),
        format!("{} cells with C > {BAND_THRESHOLD} outside, e.g. {}", outside.len(), shown.join(" ")),
    );

    let five = desk_sweep(5);
    c.check("N=5 no failed points", five.failed() == 0, format!("{} failed, {} at the cap", five.failed(), five.cap_hits()));
    let (m2, m5) = (grid_max(&two, Quantity::Concurrence), grid_max(&five, Quantity::Concurrence));
    c.check("max concurrence shrinks with N", m5 < m2, format!("N=2: {m2:.4}, N=5: {m5:.4}"));
    c.finish();
}
