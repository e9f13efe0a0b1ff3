use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

use dicke_pdc::analytic::{
    critical_coupling_strong, critical_coupling_weak, mean_field_solution, population_difference,
    transformed_params, Branch, VALIDITY_THRESHOLD,
};
use dicke_pdc::markers::validate_markers;
use dicke_pdc::model::ModelParams;
use dicke_pdc::observables::{ObservableRecord, PhaseProduct};
use dicke_pdc::point::{evaluate_point, EntanglementPair, StateReport};
use dicke_pdc::spectral::{GroundSummary, TruncationConfig};
use dicke_pdc::sweep::{parse_range, run_sweep_checkpointed, AxisMode, Execution, SweepGrid};

use crate::args::{AnalyticArgs, PointArgs, ReportFormat, SweepArgs, ValidateArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CAP_HIT: u8 = 3;

/// Fraction of failed points above which a sweep exits nonzero.
const SWEEP_FAILURE_LIMIT: f64 = 0.10;

pub const OUT_DIR_ENV: &str = "DICKE_PDC_OUT_DIR";

#[derive(Serialize)]
struct CriticalCouplings {
    lambda_w: f64,
    lambda_s: f64,
}

#[derive(Serialize)]
struct PointOutput {
    params: ModelParams,
    truncation: TruncationConfig,
    ground: GroundSummary,
    observables: ObservableRecord,
    entanglement: EntanglementPair,
    first_member: Option<StateReport>,
    analytic: CriticalCouplings,
}

#[derive(Serialize)]
struct PointDryRun<'a> {
    subcommand: &'static str,
    params: ModelParams,
    truncation: TruncationConfig,
    format: &'static str,
    dump_state: &'a Option<PathBuf>,
}

#[derive(Serialize)]
struct StateDump<'a> {
    n_max: usize,
    n_atoms: usize,
    /// Basis index `n·(N + 1) + k` for photon number `n` and `k` excited atoms.
    index: &'static str,
    energy: f64,
    degenerate: bool,
    vector: &'a [f64],
}

pub fn point(args: &PointArgs) -> Result<u8> {
    let params = args.model.params()?;
    let truncation = args.truncation.config()?;
    if args.dry_run {
        let format = if args.json { "json" } else if args.csv { "csv" } else { "text" };
        let echo = PointDryRun {
            subcommand: "point",
            params,
            truncation,
            format,
            dump_state: &args.dump_state,
        };
        println!("{}", serde_json::to_string_pretty(&echo)?);
        return Ok(EXIT_OK);
    }

    let eval = evaluate_point(&params, &truncation)?;
    let summary = eval.ground.summary();
    let out = PointOutput {
        params,
        truncation,
        ground: summary,
        observables: eval.report.observables,
        entanglement: eval.report.entanglement,
        first_member: eval.first_member,
        analytic: CriticalCouplings {
            lambda_w: critical_coupling_weak(&params),
            lambda_s: critical_coupling_strong(&params),
        },
    };

    if let Some(path) = &args.dump_state {
        let dump = StateDump {
            n_max: eval.ground.basis.n_max(),
            n_atoms: params.n_atoms,
            index: "n*(N+1)+k",
            energy: eval.ground.energy,
            degenerate: eval.ground.degenerate,
            vector: eval.ground.vector.as_slice(),
        };
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer(f, &dump)?;
    }

    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    if args.json {
        serde_json::to_writer_pretty(&mut w, &out)?;
        writeln!(w)?;
    } else if args.csv {
        let (header, row) = point_csv(&out);
        writeln!(w, "{}", header.join(","))?;
        writeln!(w, "{}", row.join(","))?;
    } else {
        write_point_text(&mut w, &out)?;
    }

    if summary.cap_hit {
        log::warn!("photon cap {} reached before the residual target", truncation.n_cap);
        eprintln!(
            "warning: residual {:.3e} still above {:.1e} at the photon cap n_max = {}",
            summary.residual, truncation.epsilon, summary.n_max_used
        );
        return Ok(EXIT_CAP_HIT);
    }
    Ok(EXIT_OK)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn point_csv(out: &PointOutput) -> (Vec<&'static str>, Vec<String>) {
    let o = &out.observables;
    let g = &out.ground;
    let e = &out.entanglement;
    let cells: Vec<(&'static str, String)> = vec![
        ("n_atoms", out.params.n_atoms.to_string()),
        ("lambda", out.params.lambda.to_string()),
        ("kappa", out.params.kappa.to_string()),
        ("omega_a", out.params.omega_a.to_string()),
        ("omega_f", out.params.omega_f.to_string()),
        ("energy", g.energy.to_string()),
        ("gap", g.gap.to_string()),
        ("degenerate", g.degenerate.to_string()),
        ("residual", g.residual.to_string()),
        ("n_max_used", g.n_max_used.to_string()),
        ("cap_hit", g.cap_hit.to_string()),
        ("mean_n", o.mean_n.to_string()),
        ("var_n", o.var_n.to_string()),
        ("var_X", o.var_x.to_string()),
        ("var_Y", o.var_y.to_string()),
        ("uncert_XY", o.uncertainty_xy.to_string()),
        ("mean_Jx", o.mean_jx.to_string()),
        ("var_Jx", o.var_jx.to_string()),
        ("mean_Jy", o.mean_jy.to_string()),
        ("var_Jy", o.var_jy.to_string()),
        ("mean_Jz", o.mean_jz.to_string()),
        ("var_Jz", o.var_jz.to_string()),
        ("phase_product", o.phase_uncertainty_product.to_string()),
        ("entropy_bits", e.entropy_bits.to_string()),
        ("concurrence", opt(e.concurrence)),
        ("concurrence_scaled", opt(e.concurrence_scaled)),
        ("lambda_w", out.analytic.lambda_w.to_string()),
        ("lambda_s", out.analytic.lambda_s.to_string()),
    ];
    cells.into_iter().unzip()
}

fn write_point_text(w: &mut impl Write, out: &PointOutput) -> std::io::Result<()> {
    let p = &out.params;
    let g = &out.ground;
    let o = &out.observables;
    let e = &out.entanglement;
    writeln!(
        w,
        "N = {}  lambda = {}  kappa = {}  omega_a = {}  omega_f = {}",
        p.n_atoms, p.lambda, p.kappa, p.omega_a, p.omega_f
    )?;
    writeln!(
        w,
        "lambda_W = {:.6}  lambda_S = {:.6}",
        out.analytic.lambda_w, out.analytic.lambda_s
    )?;
    writeln!(w)?;
    writeln!(w, "energy          {:.10}", g.energy)?;
    writeln!(w, "gap             {:.3e}", g.gap)?;
    writeln!(w, "degenerate      {}", g.degenerate)?;
    writeln!(w, "parity          {}", g.parity)?;
    writeln!(w, "residual        {:.3e}", g.residual)?;
    writeln!(w, "n_max used      {}{}", g.n_max_used, if g.cap_hit { "  (cap hit)" } else { "" })?;
    writeln!(w)?;
    let rows = [
        ("<n>", o.mean_n),
        ("<dn^2>", o.var_n),
        ("<dX^2>", o.var_x),
        ("<dY^2>", o.var_y),
        ("<dX^2><dY^2>", o.uncertainty_xy),
        ("<Jx>", o.mean_jx),
        ("<dJx^2>", o.var_jx),
        ("<Jy>", o.mean_jy),
        ("<dJy^2>", o.var_jy),
        ("<Jz>", o.mean_jz),
        ("<dJz^2>", o.var_jz),
    ];
    for (name, v) in rows {
        writeln!(w, "{name:<15} {v:.6}")?;
    }
    match o.phase_uncertainty_product {
        PhaseProduct::Finite(v) => writeln!(w, "{:<15} {v:.6}", "phase product")?,
        PhaseProduct::Saturated => writeln!(w, "{:<15} inf (<Jx> = 0)", "phase product")?,
    }
    writeln!(w, "{:<15} {:.6}", "Fano factor", o.fano_factor())?;
    writeln!(w)?;
    writeln!(w, "entropy (bits)  {:.6}", e.entropy_bits)?;
    if let Some(c) = e.concurrence {
        writeln!(w, "concurrence     {c:.6}")?;
        writeln!(w, "(N-1)C          {:.6}", e.concurrence_scaled.unwrap_or(0.0))?;
    }
    if let Some(m) = &out.first_member {
        writeln!(w)?;
        writeln!(
            w,
            "lowest member alone: <Jz> = {:.6}  <Jx> = {:.6}  S = {:.6}",
            m.observables.mean_jz, m.observables.mean_jx, m.entanglement.entropy_bits
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepDryRun<'a> {
    subcommand: &'static str,
    grid: &'a SweepGrid,
    points: usize,
    workers: usize,
    resume: bool,
    out_dir: &'a PathBuf,
}

pub fn resolve_grid(args: &SweepArgs) -> Result<SweepGrid> {
    let mut grid = SweepGrid::preset(args.grid.into(), args.n_atoms);
    if let Some(r) = &args.lambda_range {
        grid.lambda_axis = parse_range(r)?;
        grid.axis_mode = AxisMode::Lambda;
    }
    if let Some(r) = &args.kappa_range {
        grid.kappa_axis = parse_range(r)?;
    }
    if let Some(a) = args.axis {
        grid.axis_mode = a.into();
    }
    grid.omega_a = args.omega_a;
    grid.omega_f = args.omega_f;
    grid.truncation = args.truncation.config()?;
    grid.validate()?;
    Ok(grid)
}

pub fn out_dir(flag: &PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag.clone(),
    }
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let grid = resolve_grid(args)?;
    let dir = out_dir(&args.out_dir);
    if args.workers == 0 {
        return Err(dicke_pdc::Error::InvalidParameter("--workers must be at least 1".into()).into());
    }
    if args.dry_run {
        let echo = SweepDryRun {
            subcommand: "sweep",
            grid: &grid,
            points: grid.len(),
            workers: args.workers,
            resume: args.resume,
            out_dir: &dir,
        };
        println!("{}", serde_json::to_string_pretty(&echo)?);
        return Ok(EXIT_OK);
    }

    let result = run_sweep_checkpointed(&grid, Execution::from_workers(args.workers), &dir, args.resume)?;
    let (failed, caps) = (result.failed(), result.cap_hits());
    println!(
        "{} points: {} ok, {} at the photon cap, {} failed; output in {}",
        result.records.len(),
        result.records.len() - failed - caps,
        caps,
        failed,
        dir.display()
    );
    for r in result.records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "  point {} (lambda = {}, kappa = {}): {}",
            r.index,
            r.lambda,
            r.kappa,
            r.error.as_deref().unwrap_or_default()
        );
    }
    if result.failure_fraction() > SWEEP_FAILURE_LIMIT {
        eprintln!(
            "error: {:.1}% of points failed (limit {:.0}%)",
            100.0 * result.failure_fraction(),
            100.0 * SWEEP_FAILURE_LIMIT
        );
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AnalyticTable {
    params: ModelParams,
    lambda_w: f64,
    lambda_s: f64,
    eta: f64,
    omega_f_tilde: f64,
    g_tilde: f64,
    kappa_tilde: f64,
    lambda_tilde: f64,
    xi: f64,
    alpha_r_squared: f64,
    beta: Option<f64>,
    population_difference: f64,
    energy_weak: f64,
    energy_strong: f64,
    branch: Branch,
    notes: Vec<String>,
}

pub fn analytic(args: &AnalyticArgs) -> Result<u8> {
    let p = args.model.params()?;
    let t = transformed_params(&p);
    let mf = mean_field_solution(&p);
    let n = p.n_atoms as f64;
    let mut notes = Vec::new();
    if !t.eta_small {
        notes.push(format!(
            "eta = {:.4} >= {VALIDITY_THRESHOLD}: weak-coupling expressions outside their regime",
            t.eta
        ));
    }
    if !t.xi_small {
        notes.push(format!(
            "xi = {:.4} >= {VALIDITY_THRESHOLD}: weak-coupling expressions outside their regime",
            t.xi
        ));
    }
    let table = AnalyticTable {
        params: p,
        lambda_w: critical_coupling_weak(&p),
        lambda_s: critical_coupling_strong(&p),
        eta: t.eta,
        omega_f_tilde: t.omega_f_tilde,
        g_tilde: t.g_tilde,
        kappa_tilde: t.kappa_tilde,
        lambda_tilde: t.lambda_tilde,
        xi: t.xi,
        alpha_r_squared: mf.alpha_squared(),
        beta: mf.beta_aux,
        population_difference: mf
            .beta_aux
            .map_or(-0.5 * n, |b| population_difference(b, p.n_atoms)),
        energy_weak: t.kappa_tilde - 0.5 * n * p.omega_a,
        energy_strong: mf.energy,
        branch: mf.branch,
        notes,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&table)?);
        return Ok(EXIT_OK);
    }
    println!(
        "N = {}  lambda = {}  kappa = {}  omega_a = {}  omega_f = {}",
        p.n_atoms, p.lambda, p.kappa, p.omega_a, p.omega_f
    );
    let rows = [
        ("lambda_W", table.lambda_w),
        ("lambda_S", table.lambda_s),
        ("eta", table.eta),
        ("omega_f~", table.omega_f_tilde),
        ("g~", table.g_tilde),
        ("kappa~", table.kappa_tilde),
        ("lambda~", table.lambda_tilde),
        ("xi", table.xi),
        ("alpha_R^2", table.alpha_r_squared),
    ];
    for (name, v) in rows {
        println!("{name:<12} {v:.6}");
    }
    match table.beta {
        Some(b) => println!("{:<12} {b:.6}", "beta"),
        None => println!("{:<12} -", "beta"),
    }
    println!("{:<12} {:.6}", "<Jz> (MF)", table.population_difference);
    println!("{:<12} {:.6}", "E_GW", table.energy_weak);
    println!("{:<12} {:.6}", "E_GS", table.energy_strong);
    println!("{:<12} {:?}", "branch", table.branch);
    for note in &table.notes {
        println!("note: {note}");
    }
    Ok(EXIT_OK)
}

pub fn validate(args: &ValidateArgs) -> Result<u8> {
    let config = args.truncation.config()?;
    if let Some(l) = args.lambda {
        if !(l.is_finite() && l >= 0.0) {
            return Err(dicke_pdc::Error::InvalidParameter(format!("--lambda {l} must be >= 0")).into());
        }
    }
    let report = validate_markers(&config, args.lambda)?;
    let passed = report.passed();
    match args.report {
        ReportFormat::Json => {
            let out = serde_json::json!({ "passed": passed, "report": report });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        ReportFormat::Text => {
            print!("{report}");
            let fails = report.failures().count();
            println!();
            println!("{}: {} cells, {fails} failed", if passed { "PASS" } else { "FAIL" }, report.cells.len());
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}
