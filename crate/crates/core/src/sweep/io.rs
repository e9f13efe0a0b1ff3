//! Sweep persistence: records stream, CSV table, heatmap matrices, manifest.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::SweepGrid;
use super::run::{OverlayRow, PointRecord, PointStatus, SweepResult};
use crate::error::Result;
use crate::observables::PhaseProduct;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CONFIG_FILE: &str = "grid.json";
pub const CSV_FILE: &str = "sweep.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// CSV header, in order. Failed points leave the numeric cells empty.
pub const CSV_COLUMNS: [&str; 22] = [
    "lambda",
    "kappa",
    "energy",
    "gap",
    "degenerate",
    "residual",
    "n_max_used",
    "mean_Jz",
    "mean_n",
    "var_n",
    "var_X",
    "var_Y",
    "uncert_XY",
    "mean_Jx",
    "var_Jx",
    "var_Jy",
    "var_Jz",
    "phase_product",
    "entropy_bits",
    "concurrence",
    "concurrence_scaled",
    "status",
];

/// Scalar per grid point that gets its own heatmap file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Gap,
    Degenerate,
    Residual,
    MeanN,
    VarN,
    VarX,
    VarY,
    UncertXY,
    MeanJx,
    VarJx,
    VarJy,
    MeanJz,
    VarJz,
    PhaseProduct,
    Entropy,
    Concurrence,
    ConcurrenceScaled,
}

impl Quantity {
    pub const ALL: [Quantity; 18] = [
        Quantity::Energy,
        Quantity::Gap,
        Quantity::Degenerate,
        Quantity::Residual,
        Quantity::MeanN,
        Quantity::VarN,
        Quantity::VarX,
        Quantity::VarY,
        Quantity::UncertXY,
        Quantity::MeanJx,
        Quantity::VarJx,
        Quantity::VarJy,
        Quantity::MeanJz,
        Quantity::VarJz,
        Quantity::PhaseProduct,
        Quantity::Entropy,
        Quantity::Concurrence,
        Quantity::ConcurrenceScaled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Energy => "energy",
            Quantity::Gap => "gap",
            Quantity::Degenerate => "degenerate",
            Quantity::Residual => "residual",
            Quantity::MeanN => "mean_n",
            Quantity::VarN => "var_n",
            Quantity::VarX => "var_X",
            Quantity::VarY => "var_Y",
            Quantity::UncertXY => "uncert_XY",
            Quantity::MeanJx => "mean_Jx",
            Quantity::VarJx => "var_Jx",
            Quantity::VarJy => "var_Jy",
            Quantity::MeanJz => "mean_Jz",
            Quantity::VarJz => "var_Jz",
            Quantity::PhaseProduct => "phase_product",
            Quantity::Entropy => "entropy_bits",
            Quantity::Concurrence => "concurrence",
            Quantity::ConcurrenceScaled => "concurrence_scaled",
        }
    }

    /// NaN when the point failed or the quantity does not exist (concurrence
    /// of a single atom); `+inf` for a saturated phase product.
    pub fn value(self, r: &PointRecord) -> f64 {
        let g = r.ground.as_ref();
        let o = r.observables.as_ref();
        let e = r.entanglement.as_ref();
        let v = match self {
            Quantity::Energy => g.map(|g| g.energy),
            Quantity::Gap => g.map(|g| g.gap),
            Quantity::Degenerate => g.map(|g| f64::from(u8::from(g.degenerate))),
            Quantity::Residual => g.map(|g| g.residual),
            Quantity::MeanN => o.map(|o| o.mean_n),
            Quantity::VarN => o.map(|o| o.var_n),
            Quantity::VarX => o.map(|o| o.var_x),
            Quantity::VarY => o.map(|o| o.var_y),
            Quantity::UncertXY => o.map(|o| o.uncertainty_xy),
            Quantity::MeanJx => o.map(|o| o.mean_jx),
            Quantity::VarJx => o.map(|o| o.var_jx),
            Quantity::VarJy => o.map(|o| o.var_jy),
            Quantity::MeanJz => o.map(|o| o.mean_jz),
            Quantity::VarJz => o.map(|o| o.var_jz),
            Quantity::PhaseProduct => o.map(|o| o.phase_uncertainty_product.value()),
            Quantity::Entropy => e.map(|e| e.entropy_bits),
            Quantity::Concurrence => e.and_then(|e| e.concurrence),
            Quantity::ConcurrenceScaled => e.and_then(|e| e.concurrence_scaled),
        };
        v.unwrap_or(f64::NAN)
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One CSV row in [`CSV_COLUMNS`] order.
pub fn csv_row(r: &PointRecord) -> Vec<String> {
    let g = r.ground.as_ref();
    let o = r.observables.as_ref();
    let e = r.entanglement.as_ref();
    vec![
        r.lambda.to_string(),
        r.kappa.to_string(),
        cell(g.map(|g| g.energy)),
        cell(g.map(|g| g.gap)),
        g.map(|g| g.degenerate.to_string()).unwrap_or_default(),
        cell(g.map(|g| g.residual)),
        g.map(|g| g.n_max_used.to_string()).unwrap_or_default(),
        cell(o.map(|o| o.mean_jz)),
        cell(o.map(|o| o.mean_n)),
        cell(o.map(|o| o.var_n)),
        cell(o.map(|o| o.var_x)),
        cell(o.map(|o| o.var_y)),
        cell(o.map(|o| o.uncertainty_xy)),
        cell(o.map(|o| o.mean_jx)),
        cell(o.map(|o| o.var_jx)),
        cell(o.map(|o| o.var_jy)),
        cell(o.map(|o| o.var_jz)),
        o.map(|o| match o.phase_uncertainty_product {
            PhaseProduct::Finite(v) => v.to_string(),
            PhaseProduct::Saturated => "inf".to_string(),
        })
        .unwrap_or_default(),
        cell(e.map(|e| e.entropy_bits)),
        cell(e.and_then(|e| e.concurrence)),
        cell(e.and_then(|e| e.concurrence_scaled)),
        r.status.as_str().to_string(),
    ]
}

pub fn write_csv(records: &[PointRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// One `matrix_<quantity>.csv` per quantity: rows follow the κ axis,
/// columns the coupling axis, no header. Axis values go to `axes.json`.
pub fn write_matrices(result: &SweepResult, dir: &Path) -> Result<()> {
    for q in Quantity::ALL {
        let mut f = File::create(dir.join(format!("matrix_{}.csv", q.name())))?;
        for row in result.matrix(q) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(","))?;
        }
    }
    let axes = serde_json::json!({
        "rows": "kappa",
        "columns": result.grid.axis_mode,
        "kappa": result.grid.kappa_axis,
        "coupling": result.grid.lambda_axis,
    });
    serde_json::to_writer_pretty(File::create(dir.join("axes.json"))?, &axes)?;
    Ok(())
}

/// SHA-256 of the canonical JSON form of the grid.
pub fn config_hash(grid: &SweepGrid) -> Result<String> {
    let bytes = serde_json::to_vec(grid)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub created: String,
    pub workers: usize,
    pub points: usize,
    pub failed: usize,
    pub cap_hits: usize,
    pub csv_columns: Vec<String>,
    pub grid: SweepGrid,
    pub overlay: Vec<OverlayRow>,
}

impl RunManifest {
    pub fn new(grid: &SweepGrid, records: &[PointRecord], overlay: &[OverlayRow], workers: usize) -> Self {
        let count = |s: PointStatus| records.iter().filter(|r| r.status == s).count();
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(grid).unwrap_or_default(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            workers,
            points: records.len(),
            failed: count(PointStatus::Failed),
            cap_hits: count(PointStatus::CapHit),
            csv_columns: CSV_COLUMNS.iter().map(|s| s.to_string()).collect(),
            grid: grid.clone(),
            overlay: overlay.to_vec(),
        }
    }
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    writeln!(f)?;
    Ok(())
}
