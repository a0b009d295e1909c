//! Small-signal frequency response and linearized poles about an operating point.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::AnalysisError;
use crate::engine::DaeSystem;
use crate::linsolve::solve;

#[derive(Debug, Clone, PartialEq)]
pub struct AcResult {
    pub source: String,
    pub columns: Vec<String>,
    pub frequencies: Vec<f64>,
    /// One row per frequency, one phasor per unknown. A frequency whose
    /// system could not be solved has NaN entries and a message in `errors`.
    pub values: Vec<Vec<Complex64>>,
    pub errors: Vec<Option<String>>,
}

impl AcResult {
    pub fn column(&self, name: &str) -> Option<Vec<Complex64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))?;
        Some(self.values.iter().map(|r| r[k]).collect())
    }
}

/// Logarithmically spaced frequencies, `points_per_decade` per decade,
/// including both ends.
pub fn log_frequencies(
    fstart: f64,
    fstop: f64,
    points_per_decade: usize,
) -> Result<Vec<f64>, AnalysisError> {
    if !(fstart > 0.0 && fstop >= fstart && fstop.is_finite()) || points_per_decade == 0 {
        return Err(AnalysisError::Invalid(format!(
            "bad frequency range {fstart}..{fstop} with {points_per_decade} points per decade"
        )));
    }
    let decades = (fstop / fstart).log10();
    let count = (decades * points_per_decade as f64 - 1e-9).ceil().max(0.0) as usize;
    let mut f: Vec<f64> = (0..=count)
        .map(|k| fstart * 10f64.powf(k as f64 / points_per_decade as f64))
        .collect();
    *f.last_mut().unwrap() = fstop;
    if f.len() > 1 && f[f.len() - 1] <= f[f.len() - 2] {
        f.remove(f.len() - 2);
    }
    Ok(f)
}

/// Response of every unknown to a unit phasor on `source`, linearized at `op`.
pub fn ac_sweep(
    dae: &DaeSystem,
    op: &[f64],
    source: &str,
    frequencies: &[f64],
) -> Result<AcResult, AnalysisError> {
    let src = dae.source_index(source)?;
    let a = dae.eval(op, &dae.dc_inputs(), None)?;
    let b: Vec<Complex64> = a.f_u[src].iter().map(|v| Complex64::new(-v, 0.0)).collect();
    let mut values = Vec::with_capacity(frequencies.len());
    let mut errors = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let m = a.g.combine_complex(&a.c, Complex64::new(0.0, 2.0 * PI * f));
        match solve(&m, &b) {
            Ok(x) => {
                values.push(x);
                errors.push(None);
            }
            Err(e) => {
                values.push(vec![Complex64::new(f64::NAN, f64::NAN); dae.n()]);
                errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(AcResult {
        source: dae.sources()[src].name.clone(),
        columns: dae.unknown_names(),
        frequencies: frequencies.to_vec(),
        values,
        errors,
    })
}

/// Finite eigenvalues `mu` of `-G v = mu C v` at `x`: the poles of the
/// linearized system. A positive real part means the point is unstable.
///
/// The pencil is shifted so that `(G + sigma C)` is invertible, then
/// `(G + sigma C)^-1 C` is an ordinary eigenproblem whose zero eigenvalues
/// correspond to the infinite (algebraic) modes and are dropped.
pub fn small_signal_poles(
    dae: &DaeSystem,
    x: &[f64],
    inputs: &[f64],
) -> Result<Vec<Complex64>, AnalysisError> {
    let a = dae.eval(x, inputs, None)?;
    let g = a.g.to_dense();
    let c = a.c.to_dense();
    let cmax = c.amax();
    if cmax == 0.0 {
        return Ok(Vec::new());
    }
    let scale = g.amax().max(f64::MIN_POSITIVE) / cmax;
    for shift in [1.2345, -2.5, 7.25, -0.375] {
        let sigma = shift * scale;
        let lu = (&g + &c * sigma).lu();
        let Some(m) = lu.solve(&c) else { continue };
        let nu = DMatrix::from(m).complex_eigenvalues();
        let numax = nu.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
        if !numax.is_finite() {
            continue;
        }
        let mut poles: Vec<Complex64> = nu
            .iter()
            .filter(|v| v.norm() > 1e-10 * numax)
            .map(|v| Complex64::new(sigma, 0.0) - v.inv())
            .collect();
        poles.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        return Ok(poles);
    }
    Err(AnalysisError::Invalid(
        "G + sigma*C singular for every trial shift".into(),
    ))
}
