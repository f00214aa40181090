//! Dataset preparation, the compression grid and its reports.

mod grid;
mod prepare;
mod report;

pub use grid::{fit_model, run_grid, run_grid_with, target_nmi, Cell, EvaluationRecord, GridConfig, DEFAULT_RATES};
pub use prepare::{prepare_splits, PrepareConfig, Prepared};
pub use report::{record_row, write_report, ElbowEntry, NmiSeries, Report, WaveletFit, RECORD_HEADER};
