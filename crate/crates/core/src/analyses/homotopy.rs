//! Pseudo-arclength continuation of the DC solution curve in one source value.
//!
//! The curve is traced in `(X, lambda)` with `lambda` the source value, so it
//! follows turning points that a plain DC sweep would jump across.

use super::AnalysisError;
use crate::engine::DaeSystem;
use crate::linsolve::{solve, Triplets};
use crate::solver::{
    newton_solve, residual_and_jacobian, solve_with_fallback, NewtonOptions, StepEquations,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyOptions {
    /// First arclength step as a fraction of `|lmax - lmin|`.
    pub initial_step: f64,
    /// Largest step, same units.
    pub max_step: f64,
    /// Below this the trace gives up, same units.
    pub min_step: f64,
    pub max_samples: usize,
    pub max_corrector_iters: usize,
    /// Smallest cosine allowed between consecutive tangents before the step
    /// is retried shorter; keeps the corrector from hopping between branches.
    pub min_tangent_cosine: f64,
    /// Options for the Newton solve of the starting point.
    pub newton: NewtonOptions,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-3,
            max_step: 2e-2,
            min_step: 1e-12,
            max_samples: 100_000,
            max_corrector_iters: 12,
            min_tangent_cosine: 0.95,
            newton: NewtonOptions::default(),
        }
    }
}

/// A point where the curve turns back in `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPoint {
    pub lambda: f64,
    pub state: Vec<f64>,
    /// Index of the last sample before the fold.
    pub sample: usize,
}

/// The traced solution curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub source: String,
    pub columns: Vec<String>,
    /// Samples in arclength order.
    pub lambdas: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `d lambda / ds` at each sample, unit-tangent normalized.
    pub lambda_slopes: Vec<f64>,
    pub folds: Vec<FoldPoint>,
    /// False when the trace stopped before leaving `[lmin, lmax]`.
    pub complete: bool,
    pub message: Option<String>,
}

impl CurveSet {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))?;
        Some(self.states.iter().map(|s| s[k]).collect())
    }
}

/// Below this `|d lambda/ds|` the sign of the slope is not trusted.
const SLOPE_FLOOR: f64 = 1e-8;

struct Tracer<'a> {
    dae: &'a DaeSystem,
    src: usize,
    inputs: Vec<f64>,
    opts: &'a HomotopyOptions,
}

impl Tracer<'_> {
    fn n(&self) -> usize {
        self.dae.n()
    }

    /// Residual, Jacobian in X, and derivative in lambda at `y = (X, lambda)`.
    fn system(&self, y: &[f64]) -> Result<(Vec<f64>, Triplets, Vec<f64>), AnalysisError> {
        let n = self.n();
        let mut inputs = self.inputs.clone();
        inputs[self.src] = y[n];
        let eqs = StepEquations::dc(&inputs);
        let (r, j) = residual_and_jacobian(self.dae, &eqs, &y[..n], None)?;
        let a = self.dae.eval(&y[..n], &inputs, None)?;
        Ok((r, j, a.f_u[self.src].clone()))
    }

    fn bordered(j: &Triplets, f_lambda: &[f64], row: &[f64]) -> Triplets {
        let n = j.n;
        let mut m = Triplets::new(n + 1);
        m.entries.extend_from_slice(&j.entries);
        for (i, &v) in f_lambda.iter().enumerate() {
            if v != 0.0 {
                m.push(i, n, v);
            }
        }
        for (k, &v) in row.iter().enumerate() {
            if v != 0.0 {
                m.push(n, k, v);
            }
        }
        m
    }

    /// Unit tangent at `y`, oriented to agree with `reference`.
    fn tangent(&self, y: &[f64], reference: &[f64]) -> Result<Vec<f64>, AnalysisError> {
        let (_, j, fl) = self.system(y)?;
        let m = Self::bordered(&j, &fl, reference);
        let mut rhs = vec![0.0; self.n() + 1];
        rhs[self.n()] = 1.0;
        let t = solve(&m, &rhs).map_err(|e| AnalysisError::Invalid(format!("tangent: {e}")))?;
        Ok(normalize(t))
    }

    fn step_ok(&self, y: &[f64], dy: &[f64]) -> bool {
        let n = self.n();
        let tol = self.dae.tolerances();
        let ok_x = self
            .dae
            .step_tolerance(&y[..n])
            .iter()
            .zip(dy)
            .all(|(t, d)| d.abs() <= *t);
        ok_x && dy[n].abs() <= tol.reltol * y[n].abs() + tol.abstol_v
    }

    /// Newton on the curve equations plus the hyperplane through `pred`
    /// orthogonal to `t`.
    fn correct(&self, pred: &[f64], t: &[f64]) -> Result<Option<(Vec<f64>, usize)>, AnalysisError> {
        let n = self.n();
        let residualtol = self.dae.tolerances().residualtol;
        let mut y = pred.to_vec();
        for it in 1..=self.opts.max_corrector_iters {
            let (mut r, j, fl) = self.system(&y)?;
            let rnorm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !rnorm.is_finite() {
                return Ok(None);
            }
            r.push(
                y.iter()
                    .zip(pred)
                    .zip(t)
                    .map(|((a, b), c)| (a - b) * c)
                    .sum(),
            );
            let m = Self::bordered(&j, &fl, t);
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let Ok(dy) = solve(&m, &rhs) else {
                return Ok(None);
            };
            let done = rnorm <= residualtol && self.step_ok(&y, &dy);
            for (a, d) in y.iter_mut().zip(&dy) {
                *a += d;
            }
            if done {
                return Ok(Some((y, it)));
            }
            debug_assert_eq!(y.len(), n + 1);
        }
        Ok(None)
    }

    /// Solve at a fixed `lambda` from `guess`.
    fn solve_at(&self, lambda: f64, guess: &[f64]) -> Result<Option<Vec<f64>>, AnalysisError> {
        let mut inputs = self.inputs.clone();
        inputs[self.src] = lambda;
        let opts = NewtonOptions {
            limiting: false,
            initial_guess: None,
            ..self.opts.newton.clone()
        };
        Ok(
            match newton_solve(self.dae, &StepEquations::dc(&inputs), guess, &opts) {
                Ok(rep) if rep.converged => Some(rep.solution),
                _ => None,
            },
        )
    }

    /// Locate where `d lambda/ds` vanishes between `y0` (tangent `t0`) and an
    /// arclength `h` further on, by bisection on the arclength.
    fn refine_fold(
        &self,
        y0: &[f64],
        t0: &[f64],
        h: f64,
    ) -> Result<Option<Vec<f64>>, AnalysisError> {
        let n = self.n();
        let sign0 = t0[n].signum();
        let (mut lo, mut hi) = (0.0, h);
        let mut best: Option<Vec<f64>> = None;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let pred: Vec<f64> = y0.iter().zip(t0).map(|(a, b)| a + mid * b).collect();
            let Some((y, _)) = self.correct(&pred, t0)? else {
                break;
            };
            let t = self.tangent(&y, t0)?;
            if t[n].signum() == sign0 {
                lo = mid;
            } else {
                hi = mid;
            }
            best = Some(y);
            if hi - lo <= 1e-14 * h.max(1.0) {
                break;
            }
        }
        Ok(best)
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trace the DC solutions of `dae` as `source` goes from `lmin` towards `lmax`.
pub fn homotopy(
    dae: &DaeSystem,
    source: &str,
    lmin: f64,
    lmax: f64,
    opts: &HomotopyOptions,
) -> Result<CurveSet, AnalysisError> {
    if !(lmin.is_finite() && lmax.is_finite() && lmax != lmin) {
        return Err(AnalysisError::Invalid(format!(
            "homotopy range {lmin}..{lmax} is empty"
        )));
    }
    let src = dae.source_index(source)?;
    let n = dae.n();
    let tracer = Tracer {
        dae,
        src,
        inputs: dae.dc_inputs(),
        opts,
    };
    let span = (lmax - lmin).abs();
    let dir = (lmax - lmin).signum();
    let (lo, hi) = (lmin.min(lmax), lmin.max(lmax));
    let edge = 1e-12 * span;

    let guess = opts
        .newton
        .initial_guess
        .clone()
        .unwrap_or_else(|| vec![0.0; n]);
    let mut inputs = dae.dc_inputs();
    inputs[src] = lmin;
    let start = solve_with_fallback(dae, &inputs, &guess, &opts.newton)
        .map_err(|e| AnalysisError::Start(e.to_string()))?;
    if !start.converged {
        return Err(AnalysisError::Start(format!(
            "no DC solution at {source}={lmin}"
        )));
    }
    let mut y = start.solution;
    y.push(lmin);
    let mut reference = vec![0.0; n + 1];
    reference[n] = dir;
    let mut t = tracer
        .tangent(&y, &reference)
        .map_err(|e| AnalysisError::Start(e.to_string()))?;

    let mut curve = CurveSet {
        source: dae.sources()[src].name.clone(),
        columns: dae.unknown_names(),
        lambdas: vec![lmin],
        states: vec![y[..n].to_vec()],
        lambda_slopes: vec![t[n]],
        folds: Vec::new(),
        complete: false,
        message: None,
    };
    let mut last_sign = if t[n].abs() > SLOPE_FLOOR {
        t[n].signum()
    } else {
        dir
    };
    let mut h = opts.initial_step * span;
    let (hmax, hmin) = (opts.max_step * span, opts.min_step * span);

    while curve.lambdas.len() < opts.max_samples {
        let pred: Vec<f64> = y.iter().zip(&t).map(|(a, b)| a + h * b).collect();
        let accepted = match tracer.correct(&pred, &t)? {
            Some((y_new, iters)) => match tracer.tangent(&y_new, &t) {
                Ok(t_new) if dot(&t, &t_new) >= opts.min_tangent_cosine => {
                    Some((y_new, t_new, iters))
                }
                _ => None,
            },
            None => None,
        };
        let Some((y_new, t_new, iters)) = accepted else {
            h *= 0.5;
            if h < hmin {
                curve.message = Some(format!("step fell below {hmin:e} at {source}={}", y[n]));
                return Ok(curve);
            }
            continue;
        };

        if y_new[n] > hi + edge || y_new[n] < lo - edge {
            // Left the range: close the curve exactly on the boundary.
            let target = if y_new[n] > hi { hi } else { lo };
            let w = (target - y[n]) / (y_new[n] - y[n]);
            let guess: Vec<f64> = (0..n).map(|i| y[i] + w * (y_new[i] - y[i])).collect();
            if let Some(x_end) = tracer.solve_at(target, &guess)? {
                curve.lambdas.push(target);
                curve.states.push(x_end);
                curve.lambda_slopes.push(t_new[n]);
            }
            curve.complete = true;
            return Ok(curve);
        }

        if t_new[n].abs() > SLOPE_FLOOR {
            let sign = t_new[n].signum();
            if sign != last_sign {
                let sample = curve.lambdas.len() - 1;
                let point = if t[n].abs() > SLOPE_FLOOR {
                    tracer.refine_fold(&y, &t, h)?
                } else {
                    None
                };
                let point = point.unwrap_or_else(|| {
                    if t[n].abs() < t_new[n].abs() {
                        y.clone()
                    } else {
                        y_new.clone()
                    }
                });
                curve.folds.push(FoldPoint {
                    lambda: point[n],
                    state: point[..n].to_vec(),
                    sample,
                });
                last_sign = sign;
            }
        }

        y = y_new;
        t = t_new;
        curve.lambdas.push(y[n]);
        curve.states.push(y[..n].to_vec());
        curve.lambda_slopes.push(t[n]);
        if iters <= 3 {
            h = (h * 1.5).min(hmax);
        } else if iters > 6 {
            h *= 0.7;
        }
    }
    curve.message = Some(format!("stopped after {} samples", opts.max_samples));
    Ok(curve)
}
