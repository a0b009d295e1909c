//! Fixed-step transient analysis with backward Euler or the trapezoidal rule.

use super::{AnalysisError, Waveform};
use crate::circuit::IntegrationMethod;
use crate::engine::DaeSystem;
use crate::solver::{newton_solve, NewtonOptions, StepEquations};

/// How many times a failed step is halved before the run stops.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TransientOptions {
    pub tstart: f64,
    pub tstop: f64,
    pub dt: f64,
    pub method: IntegrationMethod,
    /// Initial values by unknown name. These rows are held fixed while the
    /// starting point is solved; everything else is consistent with them.
    pub ic: Vec<(String, f64)>,
    pub newton: NewtonOptions,
}

impl TransientOptions {
    pub fn new(dt: f64, tstop: f64, method: IntegrationMethod) -> Self {
        Self {
            tstart: 0.0,
            tstop,
            dt,
            method,
            ic: Vec::new(),
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub waveform: Waveform,
    /// Set when the run stopped before `tstop`; the waveform holds what was
    /// computed up to that point.
    pub failure: Option<String>,
    /// Steps that needed halving to converge.
    pub halved_steps: usize,
}

impl TransientResult {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

struct Stepper<'a> {
    dae: &'a DaeSystem,
    method: IntegrationMethod,
    newton: &'a NewtonOptions,
}

impl Stepper<'_> {
    /// One step of size `h` from `(t, x)`; `None` if Newton does not converge.
    fn step(
        &self,
        t: f64,
        x: &[f64],
        h: f64,
        first: bool,
    ) -> Result<Option<Vec<f64>>, AnalysisError> {
        let dae = self.dae;
        let prev = dae.eval(x, &dae.inputs_at(t), None)?;
        let trap = self.method == IntegrationMethod::Trapezoidal && !first;
        let (alpha, history): (f64, Vec<f64>) = if trap {
            let a = 2.0 / h;
            (
                a,
                prev.q.iter().zip(&prev.f).map(|(q, f)| a * q - f).collect(),
            )
        } else {
            (1.0 / h, prev.q.iter().map(|q| q / h).collect())
        };
        let inputs = dae.inputs_at(t + h);
        let eqs = StepEquations {
            inputs: &inputs,
            alpha,
            history: Some(&history),
            clamps: &[],
        };
        match newton_solve(dae, &eqs, x, self.newton) {
            Ok(rep) if rep.converged => Ok(Some(rep.solution)),
            Ok(_) | Err(crate::solver::SolverError::Linear { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Cover `[t, t+h]`, splitting into halves on failure.
    fn advance(
        &self,
        t: f64,
        x: &[f64],
        h: f64,
        first: bool,
        depth: u32,
        halved: &mut bool,
    ) -> Result<Option<Vec<f64>>, AnalysisError> {
        if let Some(next) = self.step(t, x, h, first)? {
            return Ok(Some(next));
        }
        if depth >= MAX_HALVINGS {
            return Ok(None);
        }
        *halved = true;
        let half = 0.5 * h;
        let Some(mid) = self.advance(t, x, half, first, depth + 1, halved)? else {
            return Ok(None);
        };
        self.advance(t + half, &mid, half, false, depth + 1, halved)
    }
}

/// Integrate from a consistent starting point to `tstop` on a uniform grid.
///
/// The starting point is the DC solution at `tstart` with the initial
/// conditions imposed. The first step always uses backward Euler so the
/// trapezoidal rule never starts from an inconsistent `dq/dt`.
pub fn transient(
    dae: &DaeSystem,
    opts: &TransientOptions,
) -> Result<TransientResult, AnalysisError> {
    let TransientOptions {
        tstart, tstop, dt, ..
    } = *opts;
    if !(dt.is_finite() && dt > 0.0 && tstop.is_finite() && tstop > tstart) {
        return Err(AnalysisError::Invalid(format!(
            "transient needs dt > 0 and tstop > tstart, got dt={dt}, {tstart}..{tstop}"
        )));
    }
    let clamps = opts
        .ic
        .iter()
        .map(|(name, v)| Ok((dae.unknown_index(name)?, *v)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let inputs = dae.inputs_at(tstart);
    let eqs = StepEquations {
        clamps: &clamps,
        ..StepEquations::dc(&inputs)
    };
    let x0 = opts
        .newton
        .initial_guess
        .clone()
        .unwrap_or_else(|| clamped_guess(dae.n(), &clamps));
    let start = newton_solve(dae, &eqs, &x0, &opts.newton)
        .map_err(|e| AnalysisError::Start(e.to_string()))?;
    if !start.converged {
        return Err(AnalysisError::Start(format!(
            "operating point at t={tstart} did not converge in {} iterations",
            start.iterations
        )));
    }

    let mut waveform = Waveform::new("time", dae.unknown_names());
    waveform.push(tstart, start.solution.clone());
    let stepper = Stepper {
        dae,
        method: opts.method,
        newton: &opts.newton,
    };
    let steps = ((tstop - tstart) / dt - 1e-9).ceil().max(1.0) as usize;
    let mut x = start.solution;
    let mut t = tstart;
    let mut halved_steps = 0;
    for k in 1..=steps {
        let t_next = if k == steps {
            tstop
        } else {
            tstart + k as f64 * dt
        };
        let mut halved = false;
        match stepper.advance(t, &x, t_next - t, k == 1, 0, &mut halved)? {
            Some(next) => {
                x = next;
                t = t_next;
                halved_steps += halved as usize;
                waveform.push(t, x.clone());
            }
            None => {
                return Ok(TransientResult {
                    waveform,
                    failure: Some(format!(
                        "step from t={t} did not converge after {MAX_HALVINGS} halvings"
                    )),
                    halved_steps,
                });
            }
        }
    }
    Ok(TransientResult {
        waveform,
        failure: None,
        halved_steps,
    })
}

fn clamped_guess(n: usize, clamps: &[(usize, f64)]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for &(i, v) in clamps {
        x[i] = v;
    }
    x
}
