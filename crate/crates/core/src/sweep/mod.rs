//! Phase-diagram sweeps over a (λ, κ) grid.

mod grid;
pub mod io;
mod run;
mod transition;

pub use grid::{linspace, parse_range, AxisMode, GridPoint, GridPreset, SweepGrid};
pub use run::{
    evaluate_grid_point, load_records, overlay, run_sweep, run_sweep_checkpointed, Execution,
    OverlayRow, PointRecord, PointStatus, SweepResult,
};
pub use io::Quantity;
pub use transition::{locate_transition, scan_transition, TransitionEstimate};
