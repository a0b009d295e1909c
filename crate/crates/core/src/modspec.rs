//! The device-model contract.
//!
//! A model exposes explicit outputs `z = d/dt qe(x, y) + fe(x, y, u)` and
//! implicit equations `0 = d/dt qi(x, y) + fi(x, y, u)`. Internal unknowns `y`
//! are ordinary circuit unknowns; a model never stores state, time or step
//! size, so evaluation takes no time argument.
//!
//! Scalar arguments of fast-growing nonlinearities may be declared as limited
//! variables. During evaluation the model reads them from a separate `xlim`
//! slice, which lets the Newton solver substitute damped values.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use thiserror::Error;

use crate::dual::Dual;
use crate::solver::limiting::{pnjlim, sinhlim};

/// Upper bound on the number of independent inputs (x, y, xlim, u) of a model.
pub const MAX_MODEL_INPUTS: usize = 8;

pub type MDual = Dual<MAX_MODEL_INPUTS>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model {model}: {what} has length {got}, expected {expected}")]
    Dimension {
        model: String,
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("model {model}: non-finite {entry}")]
    NonFinite { model: String, entry: String },
}

/// Which limiting function applies to a limited variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limiter {
    None,
    Pnjlim { vt: f64, vcrit: f64 },
    Sinhlim { k: f64 },
}

impl Limiter {
    pub fn name(&self) -> &'static str {
        match self {
            Limiter::None => "none",
            Limiter::Pnjlim { .. } => "pnjlim",
            Limiter::Sinhlim { .. } => "sinhlim",
        }
    }
}

/// A limited scalar: an affine combination of x and y entries, plus its limiter.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitedVarSpec {
    pub name: String,
    pub x_coeffs: Vec<f64>,
    pub y_coeffs: Vec<f64>,
    pub limiter: Limiter,
}

impl LimitedVarSpec {
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.x_coeffs, x) + dot(&self.y_coeffs, y)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Apply a limited variable's limiter to a proposed value.
pub fn limit_step(spec: &LimitedVarSpec, xnew: f64, xold: f64) -> f64 {
    match spec.limiter {
        Limiter::None => xnew,
        Limiter::Pnjlim { vt, vcrit } => pnjlim(xnew, xold, vt, vcrit),
        Limiter::Sinhlim { k } => sinhlim(xnew, xold, k),
    }
}

/// Dual-valued arguments handed to a model's equations.
pub struct ModelInputs {
    pub x: Vec<MDual>,
    pub y: Vec<MDual>,
    pub xlim: Vec<MDual>,
    pub u: Vec<MDual>,
}

#[derive(Debug, Default)]
pub struct ModelOutputs {
    pub fe: Vec<MDual>,
    pub qe: Vec<MDual>,
    pub fi: Vec<MDual>,
    pub qi: Vec<MDual>,
}

/// The four equation functions of a model, written over dual numbers.
pub trait ModelEquations: Send + Sync + fmt::Debug {
    fn eval(&self, inputs: &ModelInputs) -> ModelOutputs;
}

/// Values and partial Jacobians of one model evaluation.
///
/// Partials are taken with the limited variables held at `xlim`; `*_lim`
/// holds the sensitivities to those substituted values.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub fe: Vec<f64>,
    pub qe: Vec<f64>,
    pub fi: Vec<f64>,
    pub qi: Vec<f64>,
    pub fe_x: DMatrix<f64>,
    pub fe_y: DMatrix<f64>,
    pub fe_lim: DMatrix<f64>,
    pub fe_u: DMatrix<f64>,
    pub qe_x: DMatrix<f64>,
    pub qe_y: DMatrix<f64>,
    pub qe_lim: DMatrix<f64>,
    pub fi_x: DMatrix<f64>,
    pub fi_y: DMatrix<f64>,
    pub fi_lim: DMatrix<f64>,
    pub fi_u: DMatrix<f64>,
    pub qi_x: DMatrix<f64>,
    pub qi_y: DMatrix<f64>,
    pub qi_lim: DMatrix<f64>,
}

/// Jacobians with the limited variables tied back to `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalJacobians {
    pub fe_x: DMatrix<f64>,
    pub fe_y: DMatrix<f64>,
    pub qe_x: DMatrix<f64>,
    pub qe_y: DMatrix<f64>,
    pub fi_x: DMatrix<f64>,
    pub fi_y: DMatrix<f64>,
    pub qi_x: DMatrix<f64>,
    pub qi_y: DMatrix<f64>,
}

/// A device model: I/O and internal-unknown names, parameters, limited
/// variables and equations.
#[derive(Clone)]
pub struct ModelDescriptor {
    pub name: String,
    pub x_names: Vec<String>,
    pub z_names: Vec<String>,
    pub y_names: Vec<String>,
    pub u_names: Vec<String>,
    pub params: IndexMap<String, f64>,
    pub limited_vars: Vec<LimitedVarSpec>,
    equations: Arc<dyn ModelEquations>,
}

impl fmt::Debug for ModelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelDescriptor")
            .field("name", &self.name)
            .field("x_names", &self.x_names)
            .field("z_names", &self.z_names)
            .field("y_names", &self.y_names)
            .field("u_names", &self.u_names)
            .field("params", &self.params)
            .field("limited_vars", &self.limited_vars)
            .finish()
    }
}

impl ModelDescriptor {
    pub fn new(
        name: impl Into<String>,
        x_names: &[&str],
        z_names: &[&str],
        y_names: &[&str],
        u_names: &[&str],
        equations: Arc<dyn ModelEquations>,
    ) -> Self {
        let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Self {
            name: name.into(),
            x_names: owned(x_names),
            z_names: owned(z_names),
            y_names: owned(y_names),
            u_names: owned(u_names),
            params: IndexMap::new(),
            limited_vars: Vec::new(),
            equations,
        }
    }

    pub fn with_params(mut self, params: IndexMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_limited(mut self, spec: LimitedVarSpec) -> Self {
        self.limited_vars.push(spec);
        self
    }

    pub fn nx(&self) -> usize {
        self.x_names.len()
    }

    pub fn ny(&self) -> usize {
        self.y_names.len()
    }

    pub fn nz(&self) -> usize {
        self.z_names.len()
    }

    pub fn nu(&self) -> usize {
        self.u_names.len()
    }

    pub fn nlim(&self) -> usize {
        self.limited_vars.len()
    }

    /// Values of the limited expressions at `(x, y)`.
    pub fn limited_values(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.limited_vars.iter().map(|l| l.value(x, y)).collect()
    }

    /// Evaluate with the limited variables substituted by `xlim`.
    pub fn evaluate(
        &self,
        x: &[f64],
        y: &[f64],
        u: &[f64],
        xlim: &[f64],
    ) -> Result<EvalResult, ModelError> {
        self.check_len("x", x.len(), self.nx())?;
        self.check_len("y", y.len(), self.ny())?;
        self.check_len("u", u.len(), self.nu())?;
        self.check_len("xlim", xlim.len(), self.nlim())?;

        let (nx, ny, nl) = (self.nx(), self.ny(), self.nlim());
        let mut next = 0;
        let mut seed = |v: f64| {
            let d = MDual::seed(v, next);
            next += 1;
            d
        };
        let inputs = ModelInputs {
            x: x.iter().map(|&v| seed(v)).collect(),
            y: y.iter().map(|&v| seed(v)).collect(),
            xlim: xlim.iter().map(|&v| seed(v)).collect(),
            u: u.iter().map(|&v| seed(v)).collect(),
        };
        let out = self.equations.eval(&inputs);
        self.check_len("fe", out.fe.len(), self.nz())?;
        self.check_len("qe", out.qe.len(), self.nz())?;
        self.check_len("fi", out.fi.len(), self.ny())?;
        self.check_len("qi", out.qi.len(), self.ny())?;

        let offsets = [0, nx, nx + ny, nx + ny + nl];
        let block = |rows: &[MDual], start: usize, width: usize| {
            DMatrix::from_fn(rows.len(), width, |r, c| rows[r].grad[start + c])
        };
        let nu = self.nu();
        let res = EvalResult {
            fe: out.fe.iter().map(|d| d.value).collect(),
            qe: out.qe.iter().map(|d| d.value).collect(),
            fi: out.fi.iter().map(|d| d.value).collect(),
            qi: out.qi.iter().map(|d| d.value).collect(),
            fe_x: block(&out.fe, offsets[0], nx),
            fe_y: block(&out.fe, offsets[1], ny),
            fe_lim: block(&out.fe, offsets[2], nl),
            fe_u: block(&out.fe, offsets[3], nu),
            qe_x: block(&out.qe, offsets[0], nx),
            qe_y: block(&out.qe, offsets[1], ny),
            qe_lim: block(&out.qe, offsets[2], nl),
            fi_x: block(&out.fi, offsets[0], nx),
            fi_y: block(&out.fi, offsets[1], ny),
            fi_lim: block(&out.fi, offsets[2], nl),
            fi_u: block(&out.fi, offsets[3], nu),
            qi_x: block(&out.qi, offsets[0], nx),
            qi_y: block(&out.qi, offsets[1], ny),
            qi_lim: block(&out.qi, offsets[2], nl),
        };
        self.check_finite(&out)?;
        Ok(res)
    }

    /// Evaluate with every limited variable equal to its expression value.
    pub fn evaluate_unlimited(
        &self,
        x: &[f64],
        y: &[f64],
        u: &[f64],
    ) -> Result<EvalResult, ModelError> {
        let xlim = self.limited_values(x, y);
        self.evaluate(x, y, u, &xlim)
    }

    fn check_len(&self, what: &'static str, got: usize, expected: usize) -> Result<(), ModelError> {
        if got == expected {
            Ok(())
        } else {
            Err(ModelError::Dimension {
                model: self.name.clone(),
                what,
                got,
                expected,
            })
        }
    }

    fn check_finite(&self, out: &ModelOutputs) -> Result<(), ModelError> {
        let groups = [
            ("fe", &out.fe),
            ("qe", &out.qe),
            ("fi", &out.fi),
            ("qi", &out.qi),
        ];
        for (label, rows) in groups {
            for (i, d) in rows.iter().enumerate() {
                if !d.value.is_finite() {
                    return Err(self.non_finite(format!("{label}[{i}]")));
                }
                if let Some(c) = d.grad.iter().position(|g| !g.is_finite()) {
                    return Err(self.non_finite(format!("d{label}[{i}]/d{}", self.input_label(c))));
                }
            }
        }
        Ok(())
    }

    fn non_finite(&self, entry: String) -> ModelError {
        ModelError::NonFinite {
            model: self.name.clone(),
            entry,
        }
    }

    fn input_label(&self, col: usize) -> String {
        let (nx, ny, nl) = (self.nx(), self.ny(), self.nlim());
        if col < nx {
            self.x_names[col].clone()
        } else if col < nx + ny {
            self.y_names[col - nx].clone()
        } else if col < nx + ny + nl {
            format!("xlim[{}]", col - nx - ny)
        } else {
            self.u_names
                .get(col - nx - ny - nl)
                .cloned()
                .unwrap_or_else(|| format!("input[{col}]"))
        }
    }
}

impl EvalResult {
    /// Chain the limited-variable partials through their affine expressions.
    pub fn total_jacobians(&self, limited: &[LimitedVarSpec]) -> TotalJacobians {
        let nx = self.fe_x.ncols();
        let ny = self.fe_y.ncols();
        let lx = DMatrix::from_fn(limited.len(), nx, |r, c| limited[r].x_coeffs[c]);
        let ly = DMatrix::from_fn(limited.len(), ny, |r, c| limited[r].y_coeffs[c]);
        TotalJacobians {
            fe_x: &self.fe_x + &self.fe_lim * &lx,
            fe_y: &self.fe_y + &self.fe_lim * &ly,
            qe_x: &self.qe_x + &self.qe_lim * &lx,
            qe_y: &self.qe_y + &self.qe_lim * &ly,
            fi_x: &self.fi_x + &self.fi_lim * &lx,
            fi_y: &self.fi_y + &self.fi_lim * &ly,
            qi_x: &self.qi_x + &self.qi_lim * &lx,
            qi_y: &self.qi_y + &self.qi_lim * &ly,
        }
    }
}

/// Worst relative discrepancy between analytic and central-difference
/// Jacobians of fe, qe, fi, qi with respect to x and y.
///
/// The perturbation for input `p` is `h * max(1, |p|)`. Entries that are
/// negligible next to the largest entry of their row (below 1e-9 of it) are
/// compared against that row scale instead of their own magnitude. The part
/// of a discrepancy that is within the rounding error of its difference
/// quotient (`64 * eps * max|value| / step`) is not counted.
pub fn check_jacobians(
    model: &ModelDescriptor,
    x: &[f64],
    y: &[f64],
    u: &[f64],
    h: f64,
) -> Result<f64, ModelError> {
    let base = model.evaluate_unlimited(x, y, u)?;
    let total = base.total_jacobians(&model.limited_vars);
    let (nx, ny) = (model.nx(), model.ny());

    // fd[k] holds the difference quotients for input k, stacked [fe; qe; fi; qi]
    let mut fd: Vec<Vec<f64>> = Vec::with_capacity(nx + ny);
    // noise[k] is the rounding uncertainty of each entry of fd[k]
    let mut noise: Vec<Vec<f64>> = Vec::with_capacity(nx + ny);
    for k in 0..nx + ny {
        let mut xp = x.to_vec();
        let mut yp = y.to_vec();
        let mut xm = x.to_vec();
        let mut ym = y.to_vec();
        let (val, plus, minus) = if k < nx {
            (x[k], &mut xp[k], &mut xm[k])
        } else {
            (y[k - nx], &mut yp[k - nx], &mut ym[k - nx])
        };
        let step = h * val.abs().max(1.0);
        *plus = val + step;
        *minus = val - step;
        let rp = model.evaluate_unlimited(&xp, &yp, u)?;
        let rm = model.evaluate_unlimited(&xm, &ym, u)?;
        let stack = |r: &EvalResult| {
            r.fe.iter()
                .chain(&r.qe)
                .chain(&r.fi)
                .chain(&r.qi)
                .copied()
                .collect::<Vec<f64>>()
        };
        let (sp, sm) = (stack(&rp), stack(&rm));
        noise.push(
            sp.iter()
                .zip(&sm)
                .map(|(a, b)| 64.0 * f64::EPSILON * a.abs().max(b.abs()) / step)
                .collect(),
        );
        fd.push(
            sp.iter()
                .zip(&sm)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect(),
        );
    }

    let blocks = [
        (&total.fe_x, &total.fe_y),
        (&total.qe_x, &total.qe_y),
        (&total.fi_x, &total.fi_y),
        (&total.qi_x, &total.qi_y),
    ];
    let mut worst = 0.0f64;
    let mut row0 = 0;
    for (jx, jy) in blocks {
        for r in 0..jx.nrows() {
            let analytic: Vec<f64> = (0..nx)
                .map(|c| jx[(r, c)])
                .chain((0..ny).map(|c| jy[(r, c)]))
                .collect();
            let numeric: Vec<f64> = (0..nx + ny).map(|k| fd[k][row0 + r]).collect();
            let slack: Vec<f64> = (0..nx + ny).map(|k| noise[k][row0 + r]).collect();
            let scale = analytic
                .iter()
                .chain(&numeric)
                .fold(0.0f64, |m, v| m.max(v.abs()));
            for ((a, n), e) in analytic.iter().zip(&numeric).zip(&slack) {
                let denom = a
                    .abs()
                    .max(n.abs())
                    .max(1e-9 * scale)
                    .max(f64::MIN_POSITIVE);
                worst = worst.max(((a - n).abs() - e).max(0.0) / denom);
            }
        }
        row0 += jx.nrows();
    }
    Ok(worst)
}
