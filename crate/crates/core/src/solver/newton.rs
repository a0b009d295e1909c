//! Newton-Raphson on the assembled circuit equations.

use thiserror::Error;

use crate::engine::{DaeSystem, EngineError};
use crate::linsolve::{solve, LinearSolveError, Triplets};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub max_iters: usize,
    pub limiting: bool,
    /// Starting point; all zeros when absent.
    pub initial_guess: Option<Vec<f64>>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            limiting: true,
            initial_guess: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("iteration {iteration}: {source}")]
    Linear {
        iteration: usize,
        #[source]
        source: LinearSolveError,
    },
    #[error("initial guess has {got} entries, system has {expected} unknowns")]
    GuessLength { got: usize, expected: usize },
}

/// Outcome of one Newton solve. Running out of iterations is reported here,
/// not as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// Linear solves performed, including the final verifying one.
    pub iterations: usize,
    pub converged: bool,
    /// Infinity norm of the residual at the last evaluated point.
    pub residual_norm: f64,
    /// Infinity norm of each Newton update.
    pub step_norms: Vec<f64>,
}

/// The equations one Newton solve works on:
/// `f(X, u) + alpha * q(X) - history = 0`, with some rows optionally
/// replaced by `X_i = value`.
#[derive(Debug, Clone, Copy)]
pub struct StepEquations<'a> {
    pub inputs: &'a [f64],
    pub alpha: f64,
    pub history: Option<&'a [f64]>,
    pub clamps: &'a [(usize, f64)],
}

impl<'a> StepEquations<'a> {
    /// Static equations (`d/dt = 0`).
    pub fn dc(inputs: &'a [f64]) -> Self {
        Self {
            inputs,
            alpha: 0.0,
            history: None,
            clamps: &[],
        }
    }
}

/// Residual and Jacobian of `eqs` at `x`.
pub(crate) fn residual_and_jacobian(
    dae: &DaeSystem,
    eqs: &StepEquations,
    x: &[f64],
    xlim: Option<&[f64]>,
) -> Result<(Vec<f64>, Triplets), EngineError> {
    let a = dae.eval(x, eqs.inputs, xlim)?;
    let n = dae.n();
    let mut r = a.f;
    let mut jac = a.g;
    if eqs.alpha != 0.0 {
        for (ri, qi) in r.iter_mut().zip(&a.q) {
            *ri += eqs.alpha * qi;
        }
        for &(i, j, v) in &a.c.entries {
            jac.push(i, j, eqs.alpha * v);
        }
    }
    if let Some(h) = eqs.history {
        for (ri, hi) in r.iter_mut().zip(h) {
            *ri -= hi;
        }
    }
    if !eqs.clamps.is_empty() {
        let clamped = |row: usize| eqs.clamps.iter().any(|c| c.0 == row);
        jac.entries.retain(|e| !clamped(e.0));
        for &(i, v) in eqs.clamps {
            r[i] = x[i] - v;
            jac.push(i, i, 1.0);
        }
    }
    debug_assert_eq!(jac.n, n);
    Ok((r, jac))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton iteration from `x0`.
///
/// With limiting on, each device's limited expressions are replaced by the
/// limiter's output before evaluation and the equations are linearized about
/// that substituted point. Convergence requires every update within
/// `reltol * |x| + abstol`, the residual within `residualtol`, and no limiter
/// still altering its argument.
pub fn newton_solve(
    dae: &DaeSystem,
    eqs: &StepEquations,
    x0: &[f64],
    opts: &NewtonOptions,
) -> Result<SolveReport, SolverError> {
    let n = dae.n();
    if x0.len() != n {
        return Err(SolverError::GuessLength {
            got: x0.len(),
            expected: n,
        });
    }
    let tol = *dae.tolerances();
    let limiting = opts.limiting && dae.limited_count() > 0;
    let mut x = x0.to_vec();
    let mut lim = dae.limited_values(&x);
    let mut step_norms = Vec::new();
    let mut residual_norm = f64::INFINITY;

    for iteration in 1..=opts.max_iters.max(1) {
        let (r, jac) = residual_and_jacobian(dae, eqs, &x, limiting.then_some(&lim[..]))?;
        residual_norm = inf_norm(&r);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solve(&jac, &rhs).map_err(|source| SolverError::Linear { iteration, source })?;
        step_norms.push(inf_norm(&dx));

        let step_ok = dae
            .step_tolerance(&x)
            .iter()
            .zip(&dx)
            .all(|(t, d)| d.abs() <= *t);
        let limiter_idle = !limiting
            || dae
                .limited_values(&x)
                .iter()
                .zip(&lim)
                .all(|(e, l)| (e - l).abs() <= tol.reltol * e.abs() + tol.abstol_v);
        let x_new: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();

        if step_ok && residual_norm <= tol.residualtol && limiter_idle {
            return Ok(SolveReport {
                solution: x_new,
                iterations: iteration,
                converged: true,
                residual_norm,
                step_norms,
            });
        }
        if limiting {
            lim = dae.limit(&x_new, &lim);
        }
        x = x_new;
    }

    Ok(SolveReport {
        solution: x,
        iterations: opts.max_iters,
        converged: false,
        residual_norm,
        step_norms,
    })
}

/// DC operating point: static equations with sources at their DC values.
pub fn dc_operating_point(
    dae: &DaeSystem,
    opts: &NewtonOptions,
) -> Result<SolveReport, SolverError> {
    let inputs = dae.dc_inputs();
    let x0 = opts
        .initial_guess
        .clone()
        .unwrap_or_else(|| vec![0.0; dae.n()]);
    newton_solve(dae, &StepEquations::dc(&inputs), &x0, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, SourceWaveform};
    use crate::devices::DeviceKind;
    use crate::engine::{assemble, Tolerances};

    fn sinh_bench(v: f64) -> DaeSystem {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(v))
            .add("R1", DeviceKind::Resistor, "1", "2", &[("r", 1.0)])
            .add("D1", DeviceKind::SinhDev, "2", "0", &[("k", 1.0)]);
        let tol = Tolerances {
            abstol_v: 1e-12,
            abstol_i: 1e-12,
            ..Tolerances::default()
        };
        assemble(&c, tol).unwrap()
    }

    #[test]
    fn linear_circuit_one_step_plus_verification() {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(1.0))
            .add("R1", DeviceKind::Resistor, "1", "0", &[("r", 1.0)]);
        let dae = assemble(&c, Tolerances::default()).unwrap();
        let rep = dc_operating_point(&dae, &NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 2);
        assert!((rep.solution[0] - 1.0).abs() < 1e-12);
        assert!((rep.solution[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn sinh_benchmark_with_and_without_limiting() {
        for v in [1.0, 10.0, 100.0, 1000.0] {
            let dae = sinh_bench(v);
            let rep = dc_operating_point(&dae, &NewtonOptions::default()).unwrap();
            assert!(rep.converged, "V={v}");
            assert!(rep.iterations <= 6, "V={v}: {}", rep.iterations);
        }
        let off = NewtonOptions {
            limiting: false,
            ..NewtonOptions::default()
        };
        let rep = dc_operating_point(&sinh_bench(1000.0), &off);
        assert!(!matches!(
            rep,
            Ok(SolveReport {
                converged: true,
                ..
            })
        ));
    }

    #[test]
    fn clamped_rows_hold_their_value() {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(1.0))
            .add("R1", DeviceKind::Resistor, "1", "2", &[])
            .add("C1", DeviceKind::Capacitor, "2", "0", &[]);
        let dae = assemble(&c, Tolerances::default()).unwrap();
        let inputs = dae.dc_inputs();
        let clamps = [(1, 0.25)];
        let eqs = StepEquations {
            clamps: &clamps,
            ..StepEquations::dc(&inputs)
        };
        let rep = newton_solve(&dae, &eqs, &[0.0; 3], &NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.solution[1], 0.25);
        assert!((rep.solution[2] + 0.75e-3).abs() < 1e-10);
    }

    #[test]
    fn guess_length_checked() {
        let dae = sinh_bench(1.0);
        let opts = NewtonOptions {
            initial_guess: Some(vec![0.0]),
            ..NewtonOptions::default()
        };
        assert!(matches!(
            dc_operating_point(&dae, &opts),
            Err(SolverError::GuessLength { .. })
        ));
    }
}
