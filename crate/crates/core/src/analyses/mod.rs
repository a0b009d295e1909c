//! DC sweep, transient, AC, homotopy continuation and period detection.

pub mod ac;
pub mod dcsweep;
pub mod homotopy;
pub mod period;
pub mod transient;

use thiserror::Error;

use crate::engine::EngineError;
use crate::solver::SolverError;

pub use ac::{ac_sweep, log_frequencies, small_signal_poles, AcResult};
pub use dcsweep::{dc_sweep, sweep_values, DcSweep, SweepPoint};
pub use homotopy::{homotopy, CurveSet, FoldPoint, HomotopyOptions};
pub use period::{detect_period, PeriodEstimate};
pub use transient::{transient, TransientOptions, TransientResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Invalid(String),
    #[error("no converged starting point: {0}")]
    Start(String),
}

/// Samples over a strictly increasing axis (time), one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub axis: String,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl Waveform {
    pub fn new(axis: &str, columns: Vec<String>) -> Self {
        Self {
            axis: axis.to_string(),
            columns,
            times: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        debug_assert_eq!(row.len(), self.columns.len());
        self.times.push(t);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
    }

    /// One column as a vector; `None` if no column has that name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}
