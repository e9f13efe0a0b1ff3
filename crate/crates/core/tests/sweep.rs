use std::fs;
use std::io::Write;

use dicke_pdc::sweep::io::{config_hash, RunManifest, CSV_COLUMNS, CSV_FILE, MANIFEST_FILE, RECORDS_FILE};
use dicke_pdc::sweep::{
    linspace, load_records, run_sweep, run_sweep_checkpointed, AxisMode, Execution, GridPreset,
    Quantity, SweepGrid,
};

fn small_grid(n_atoms: usize) -> SweepGrid {
    let mut g = SweepGrid::preset(GridPreset::Desk, n_atoms);
    g.lambda_axis = linspace(0.0, 2.5, 6);
    g.kappa_axis = linspace(0.0, 2.0, 3);
    g
}

fn csv_bytes(grid: &SweepGrid, execution: Execution) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    run_sweep(grid, execution).unwrap().export(dir.path()).unwrap();
    fs::read(dir.path().join(CSV_FILE)).unwrap()
}

#[test]
fn worker_count_does_not_change_output() {
    let grid = small_grid(2);
    let one = csv_bytes(&grid, Execution::Sequential);
    let many = csv_bytes(&grid, Execution::Parallel { workers: 4 });
    assert_eq!(one, many);
    let header = String::from_utf8(one).unwrap();
    assert_eq!(header.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(header.lines().count(), grid.len() + 1);
}

#[test]
fn resume_after_interruption_gives_identical_csv() {
    let grid = small_grid(3);
    let full = tempfile::tempdir().unwrap();
    run_sweep_checkpointed(&grid, Execution::Sequential, full.path(), false).unwrap();
    let reference = fs::read(full.path().join(CSV_FILE)).unwrap();

    // Simulate a run killed part-way: keep the first few records and a
    // half-written line.
    let cut = tempfile::tempdir().unwrap();
    run_sweep_checkpointed(&grid, Execution::Sequential, cut.path(), false).unwrap();
    let records = fs::read_to_string(cut.path().join(RECORDS_FILE)).unwrap();
    let lines: Vec<&str> = records.lines().collect();
    let mut f = fs::File::create(cut.path().join(RECORDS_FILE)).unwrap();
    for line in &lines[..7] {
        writeln!(f, "{line}").unwrap();
    }
    write!(f, "{}", &lines[7][..lines[7].len() / 2]).unwrap();
    drop(f);
    fs::remove_file(cut.path().join(CSV_FILE)).unwrap();

    let resumed = run_sweep_checkpointed(&grid, Execution::Parallel { workers: 3 }, cut.path(), true).unwrap();
    assert_eq!(resumed.records.len(), grid.len());
    assert_eq!(fs::read(cut.path().join(CSV_FILE)).unwrap(), reference);
    assert_eq!(load_records(&cut.path().join(RECORDS_FILE), &grid).unwrap().len(), grid.len());
}

#[test]
fn resume_refuses_a_different_grid() {
    let grid = small_grid(2);
    let dir = tempfile::tempdir().unwrap();
    run_sweep_checkpointed(&grid, Execution::Sequential, dir.path(), false).unwrap();
    let mut other = grid.clone();
    other.kappa_axis = vec![0.0, 1.0];
    assert!(run_sweep_checkpointed(&other, Execution::Sequential, dir.path(), true).is_err());
}

#[test]
fn exports_and_manifest() {
    let grid = small_grid(2);
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&grid, Execution::Sequential).unwrap();
    result.export(dir.path()).unwrap();

    for q in Quantity::ALL {
        let text = fs::read_to_string(dir.path().join(format!("matrix_{}.csv", q.name()))).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), grid.kappa_axis.len());
        assert!(rows.iter().all(|r| r.split(',').count() == grid.lambda_axis.len()));
    }
    let manifest: RunManifest =
        serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest.grid, grid);
    assert_eq!(manifest.config_hash, config_hash(&grid).unwrap());
    assert_eq!(manifest.points, grid.len());
    assert_eq!(manifest.overlay.len(), grid.kappa_axis.len());
    assert_eq!(manifest.overlay[0].lambda_s, 0.5);
    assert_eq!(manifest.grid.axis_mode, AxisMode::LambdaOverSqrtN);
}

#[test]
fn heatmap_rows_follow_kappa() {
    let grid = small_grid(2);
    let r = run_sweep(&grid, Execution::Sequential).unwrap();
    let jz = r.matrix(Quantity::MeanJz);
    // At zero coupling every row sits at the ground pole.
    assert!(jz.iter().all(|row| (row[0] + 1.0).abs() < 1e-12), "{jz:?}");
    // Coupling along a row raises the population difference.
    assert!(jz[0][5] > -0.5);
}
