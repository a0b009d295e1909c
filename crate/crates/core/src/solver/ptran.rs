//! Pseudo-transient continuation: a fallback when Newton alone cannot reach
//! a DC solution from the given starting point.
//!
//! The circuit's own charges and fluxes provide the dynamics; backward Euler
//! steps with a growing pseudo-time step walk the state toward a stable
//! equilibrium, and a final plain Newton solve polishes it.

use super::newton::{newton_solve, NewtonOptions, SolveReport, SolverError, StepEquations};
use crate::engine::DaeSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoTransientOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub growth: f64,
    pub max_steps: usize,
}

impl Default for PseudoTransientOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-9,
            max_step: 1e15,
            growth: 2.0,
            max_steps: 500,
        }
    }
}

/// Solve the static equations with `inputs` starting from `x0`.
///
/// `iterations` in the report totals every Newton iteration spent.
pub fn pseudo_transient(
    dae: &DaeSystem,
    inputs: &[f64],
    x0: &[f64],
    newton: &NewtonOptions,
    opts: &PseudoTransientOptions,
) -> Result<SolveReport, SolverError> {
    let step_newton = NewtonOptions {
        max_iters: newton.max_iters.min(25),
        ..newton.clone()
    };
    let dc = StepEquations::dc(inputs);
    let mut x = x0.to_vec();
    let mut h = opts.initial_step;
    let mut total = 0;
    let mut last = None;
    for _ in 0..opts.max_steps {
        let q: Vec<f64> = dae.eval(&x, inputs, None)?.q;
        let history: Vec<f64> = q.iter().map(|v| v / h).collect();
        let eqs = StepEquations {
            alpha: 1.0 / h,
            history: Some(&history),
            ..dc
        };
        let step = match newton_solve(dae, &eqs, &x, &step_newton) {
            Ok(rep) => Some(rep),
            Err(SolverError::Linear { .. }) => None,
            Err(e) => return Err(e),
        };
        match step {
            Some(rep) if rep.converged => {
                total += rep.iterations;
                let settled = dae
                    .step_tolerance(&x)
                    .iter()
                    .zip(x.iter().zip(&rep.solution))
                    .all(|(t, (a, b))| (a - b).abs() <= *t);
                x = rep.solution;
                if settled || h >= opts.max_step {
                    let fin = newton_solve(dae, &dc, &x, &step_newton)?;
                    total += fin.iterations;
                    if fin.converged {
                        return Ok(SolveReport {
                            iterations: total,
                            ..fin
                        });
                    }
                    last = Some(fin);
                }
                h = (h * opts.growth).min(opts.max_step);
            }
            other => {
                total += other.map_or(0, |r| r.iterations);
                h /= 8.0;
                if h < 1e-6 * opts.initial_step {
                    break;
                }
            }
        }
    }
    let mut rep = last.unwrap_or(SolveReport {
        solution: x,
        iterations: 0,
        converged: false,
        residual_norm: f64::INFINITY,
        step_norms: Vec::new(),
    });
    rep.iterations = total;
    rep.converged = false;
    Ok(rep)
}

/// Plain Newton from `guess`; if that does not converge, pseudo-transient
/// continuation from the same guess.
pub fn solve_with_fallback(
    dae: &DaeSystem,
    inputs: &[f64],
    guess: &[f64],
    opts: &NewtonOptions,
) -> Result<SolveReport, SolverError> {
    let first = newton_solve(dae, &StepEquations::dc(inputs), guess, opts);
    if matches!(
        first,
        Ok(SolveReport {
            converged: true,
            ..
        })
    ) {
        return first;
    }
    let spent = first.as_ref().map_or(0, |r| r.iterations);
    let mut rep = pseudo_transient(dae, inputs, guess, opts, &PseudoTransientOptions::default())?;
    rep.iterations += spent;
    Ok(rep)
}
