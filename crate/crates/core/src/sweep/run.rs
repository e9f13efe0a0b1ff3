use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::grid::{GridPoint, SweepGrid};
use super::io::{self, RunManifest};
use crate::analytic::{critical_coupling_strong, critical_coupling_weak};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::ObservableRecord;
use crate::point::{evaluate_point, EntanglementPair, StateReport};
use crate::spectral::GroundSummary;

/// How grid points are scheduled. Output never depends on the choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// A dedicated pool with this many threads. Without the `parallel`
    /// feature this runs sequentially.
    Parallel { workers: usize },
}

impl Execution {
    /// `Sequential` for zero or one worker.
    pub fn from_workers(workers: usize) -> Self {
        if workers <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }

    pub fn workers(self) -> usize {
        match self {
            Execution::Sequential => 1,
            Execution::Parallel { workers } => workers,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Converged state returned at the photon cap with the residual above target.
    CapHit,
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::CapHit => "cap_hit",
            PointStatus::Failed => "failed",
        }
    }
}

/// Everything computed at one grid point; one line of the records file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub i_lambda: usize,
    pub i_kappa: usize,
    pub axis_value: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub status: PointStatus,
    pub ground: Option<GroundSummary>,
    pub observables: Option<ObservableRecord>,
    pub entanglement: Option<EntanglementPair>,
    /// The lowest doublet member alone, at degenerate points.
    pub first_member: Option<StateReport>,
    pub error: Option<String>,
}

pub fn evaluate_grid_point(grid: &SweepGrid, point: &GridPoint) -> PointRecord {
    let mut record = PointRecord {
        index: point.index,
        i_lambda: point.i_lambda,
        i_kappa: point.i_kappa,
        axis_value: point.axis_value,
        lambda: point.params.lambda,
        kappa: point.params.kappa,
        status: PointStatus::Failed,
        ground: None,
        observables: None,
        entanglement: None,
        first_member: None,
        error: None,
    };
    match evaluate_point(&point.params, &grid.truncation) {
        Ok(eval) => {
            let summary = eval.ground.summary();
            record.status = if summary.cap_hit {
                PointStatus::CapHit
            } else {
                PointStatus::Ok
            };
            record.ground = Some(summary);
            record.observables = Some(eval.report.observables);
            record.entanglement = Some(eval.report.entanglement);
            record.first_member = eval.first_member;
        }
        Err(e) => {
            log::warn!(
                "point {} (lambda = {}, kappa = {}) failed: {e}",
                point.index,
                point.params.lambda,
                point.params.kappa
            );
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Analytic critical couplings at one κ, on the λ scale and the axis scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub kappa: f64,
    pub lambda_w: f64,
    pub lambda_s: f64,
    pub lambda_w_axis: f64,
    pub lambda_s_axis: f64,
}

pub fn overlay(grid: &SweepGrid) -> Vec<OverlayRow> {
    grid.kappa_axis
        .iter()
        .map(|&kappa| {
            let p = ModelParams {
                omega_a: grid.omega_a,
                omega_f: grid.omega_f,
                kappa,
                lambda: 0.0,
                n_atoms: grid.n_atoms,
            };
            let (lw, ls) = (critical_coupling_weak(&p), critical_coupling_strong(&p));
            OverlayRow {
                kappa,
                lambda_w: lw,
                lambda_s: ls,
                lambda_w_axis: grid.axis_mode.from_lambda(lw, grid.n_atoms),
                lambda_s_axis: grid.axis_mode.from_lambda(ls, grid.n_atoms),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub grid: SweepGrid,
    /// Sorted by grid index, one per point.
    pub records: Vec<PointRecord>,
    pub overlay: Vec<OverlayRow>,
    pub manifest: RunManifest,
}

impl SweepResult {
    pub fn record(&self, i_lambda: usize, i_kappa: usize) -> &PointRecord {
        &self.records[i_kappa * self.grid.lambda_axis.len() + i_lambda]
    }

    pub fn failed(&self) -> usize {
        self.count(PointStatus::Failed)
    }

    pub fn cap_hits(&self) -> usize {
        self.count(PointStatus::CapHit)
    }

    fn count(&self, status: PointStatus) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    /// Fraction of points that produced no result.
    pub fn failure_fraction(&self) -> f64 {
        self.failed() as f64 / self.records.len().max(1) as f64
    }

    /// Values of one heatmap quantity, rows = κ index, NaN where missing.
    pub fn matrix(&self, quantity: io::Quantity) -> Vec<Vec<f64>> {
        let nl = self.grid.lambda_axis.len();
        self.records
            .chunks(nl)
            .map(|row| row.iter().map(|r| quantity.value(r)).collect())
            .collect()
    }

    /// Writes the CSV table, heatmap matrices and manifest into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        io::write_csv(&self.records, &dir.join(io::CSV_FILE))?;
        io::write_matrices(self, dir)?;
        io::write_manifest(&self.manifest, &dir.join(io::MANIFEST_FILE))?;
        Ok(())
    }
}

fn map_points<F>(points: Vec<GridPoint>, execution: Execution, f: F) -> Vec<PointRecord>
where
    F: Fn(&GridPoint) -> PointRecord + Sync + Send,
{
    match execution {
        Execution::Sequential => points.iter().map(f).collect(),
        Execution::Parallel { workers } => parallel_map(points, workers, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<F>(points: Vec<GridPoint>, workers: usize, f: F) -> Vec<PointRecord>
where
    F: Fn(&GridPoint) -> PointRecord + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| points.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running sequentially");
            points.iter().map(f).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<F>(points: Vec<GridPoint>, workers: usize, f: F) -> Vec<PointRecord>
where
    F: Fn(&GridPoint) -> PointRecord + Sync + Send,
{
    log::debug!("built without the parallel feature; ignoring workers = {workers}");
    points.iter().map(f).collect()
}

/// Evaluates every grid point in memory.
pub fn run_sweep(grid: &SweepGrid, execution: Execution) -> Result<SweepResult> {
    grid.validate()?;
    let points: Vec<GridPoint> = grid.points().collect();
    let records = map_points(points, execution, |p| evaluate_grid_point(grid, p));
    Ok(assemble(grid, records, execution))
}

fn assemble(grid: &SweepGrid, mut records: Vec<PointRecord>, execution: Execution) -> SweepResult {
    records.sort_by_key(|r| r.index);
    let overlay = overlay(grid);
    let manifest = RunManifest::new(grid, &records, &overlay, execution.workers());
    SweepResult {
        grid: grid.clone(),
        records,
        overlay,
        manifest,
    }
}

/// Records already present in a records file, keyed by index. Lines that do
/// not parse (for example a line cut short by an interrupted run) are skipped.
pub fn load_records(path: &Path, grid: &SweepGrid) -> Result<BTreeMap<usize, PointRecord>> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        match serde_json::from_str::<PointRecord>(&line) {
            Ok(r) if r.index < grid.len() => {
                done.insert(r.index, r);
            }
            Ok(r) => log::warn!("ignoring record with out-of-range index {}", r.index),
            Err(e) => log::warn!("ignoring unreadable record line: {e}"),
        }
    }
    Ok(done)
}

/// Runs a sweep that streams each finished point to `dir/records.jsonl` and
/// writes the exports at the end. With `resume`, points already present in
/// the records file are kept and skipped; the grid must match the one that
/// started the run.
pub fn run_sweep_checkpointed(
    grid: &SweepGrid,
    execution: Execution,
    dir: &Path,
    resume: bool,
) -> Result<SweepResult> {
    grid.validate()?;
    fs::create_dir_all(dir)?;
    let records_path = dir.join(io::RECORDS_FILE);
    let config_path = dir.join(io::CONFIG_FILE);
    let hash = io::config_hash(grid)?;

    let done = if resume && records_path.exists() {
        let previous: SweepGrid = serde_json::from_reader(File::open(&config_path).map_err(|e| {
            Error::InvalidParameter(format!(
                "cannot resume: {} is unreadable ({e})",
                config_path.display()
            ))
        })?)?;
        if io::config_hash(&previous)? != hash {
            return Err(Error::InvalidParameter(
                "cannot resume: the existing records belong to a different grid".into(),
            ));
        }
        let done = load_records(&records_path, grid)?;
        // Rewrite the file so a torn trailing line cannot precede new records.
        rewrite_records(&records_path, done.values())?;
        done
    } else {
        File::create(&records_path)?;
        BTreeMap::new()
    };
    serde_json::to_writer_pretty(File::create(&config_path)?, grid)?;

    log::info!(
        "{} of {} points already complete; evaluating the rest",
        done.len(),
        grid.len()
    );
    let todo: Vec<GridPoint> = grid.points().filter(|p| !done.contains_key(&p.index)).collect();
    let sink = Mutex::new(OpenOptions::new().append(true).open(&records_path)?);
    let write_error: Mutex<Option<std::io::Error>> = Mutex::new(None);
    let fresh = map_points(todo, execution, |p| {
        let record = evaluate_grid_point(grid, p);
        let line = serde_json::to_string(&record).expect("records serialize");
        let mut file = sink.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
            write_error.lock().unwrap_or_else(|e| e.into_inner()).get_or_insert(e);
        }
        record
    });
    if let Some(e) = write_error.into_inner().unwrap_or_else(|e| e.into_inner()) {
        return Err(e.into());
    }

    let records: Vec<PointRecord> = done.into_values().chain(fresh).collect();
    let result = assemble(grid, records, execution);
    result.export(dir)?;
    Ok(result)
}

fn rewrite_records<'a>(path: &Path, records: impl Iterator<Item = &'a PointRecord>) -> Result<()> {
    let mut file = File::create(path)?;
    for r in records {
        writeln!(file, "{}", serde_json::to_string(r)?)?;
    }
    file.flush()?;
    Ok(())
}
