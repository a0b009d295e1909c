//! DC sweep of one independent source.
//!
//! Each point starts Newton from the previous converged solution and nothing
//! else: a predictor would move the iterate off a flat branch and change which
//! solution a folded curve settles on. When Newton cannot get there within
//! its budget, typically just past a fold, the point is retried by
//! pseudo-transient continuation from the same previous solution, which
//! follows the circuit's own dynamics to a stable equilibrium.

use super::AnalysisError;
use crate::engine::DaeSystem;
use crate::solver::{solve_with_fallback, NewtonOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub solution: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Why the point failed, if it did.
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcSweep {
    pub source: String,
    pub columns: Vec<String>,
    pub points: Vec<SweepPoint>,
}

impl DcSweep {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))?;
        Some(self.points.iter().map(|p| p.solution[k]).collect())
    }
}

/// `start, start+step, ..., stop`, then back down to `start` when `updown`.
pub fn sweep_values(
    start: f64,
    stop: f64,
    step: f64,
    updown: bool,
) -> Result<Vec<f64>, AnalysisError> {
    if !(step.is_finite() && step != 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(AnalysisError::Invalid(format!(
            "bad sweep {start} to {stop} step {step}"
        )));
    }
    let span = stop - start;
    if span != 0.0 && span.signum() != step.signum() {
        return Err(AnalysisError::Invalid(format!(
            "step {step} does not lead from {start} to {stop}"
        )));
    }
    let count = (span / step + 1e-9).floor() as usize;
    let mut values: Vec<f64> = (0..=count).map(|k| start + step * k as f64).collect();
    if (values[count] - stop).abs() > 1e-9 * step.abs() {
        values.push(stop);
    } else {
        values[count] = stop;
    }
    if updown {
        let back: Vec<f64> = values.iter().rev().skip(1).copied().collect();
        values.extend(back);
    }
    Ok(values)
}

/// Solve the DC equations at each value of `source`, in order.
pub fn dc_sweep(
    dae: &DaeSystem,
    source: &str,
    values: &[f64],
    opts: &NewtonOptions,
) -> Result<DcSweep, AnalysisError> {
    let src = dae.source_index(source)?;
    let mut inputs = dae.dc_inputs();
    let mut guess = opts
        .initial_guess
        .clone()
        .unwrap_or_else(|| vec![0.0; dae.n()]);
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        inputs[src] = value;
        let point = match solve_with_fallback(dae, &inputs, &guess, opts) {
            Ok(rep) => {
                if rep.converged {
                    guess.clone_from(&rep.solution);
                }
                SweepPoint {
                    value,
                    converged: rep.converged,
                    iterations: rep.iterations,
                    message: (!rep.converged)
                        .then(|| format!("no convergence in {} iterations", rep.iterations)),
                    solution: rep.solution,
                }
            }
            Err(e) => SweepPoint {
                value,
                solution: vec![f64::NAN; dae.n()],
                converged: false,
                iterations: 0,
                message: Some(e.to_string()),
            },
        };
        points.push(point);
    }
    Ok(DcSweep {
        source: dae.sources()[src].name.clone(),
        columns: dae.unknown_names(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values_inclusive_and_updown() {
        assert_eq!(
            sweep_values(0.0, 1.0, 0.5, false).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(
            sweep_values(0.0, 1.0, 0.5, true).unwrap(),
            vec![0.0, 0.5, 1.0, 0.5, 0.0]
        );
        assert_eq!(
            sweep_values(1.0, -1.0, -1.0, false).unwrap(),
            vec![1.0, 0.0, -1.0]
        );
        let v = sweep_values(-1.0, 1.0, 0.1, false).unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(*v.last().unwrap(), 1.0);
        assert_eq!(sweep_values(0.0, 1.0, 0.3, false).unwrap().len(), 5);
        assert!(sweep_values(0.0, 1.0, -0.1, false).is_err());
        assert!(sweep_values(0.0, 1.0, 0.0, false).is_err());
    }
}
