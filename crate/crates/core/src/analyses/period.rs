//! Period estimation for a sampled signal.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    /// Estimated period in the units of the time axis; `None` if the signal
    /// does not look periodic.
    pub period: Option<f64>,
    /// Peak-to-peak amplitude over the window examined.
    pub amplitude: f64,
    /// Normalized autocorrelation at the chosen lag.
    pub correlation: f64,
}

impl PeriodEstimate {
    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }
}

/// Minimum normalized autocorrelation at the period lag.
pub const MIN_CORRELATION: f64 = 0.99;

/// Estimate the period of `values` sampled at uniformly spaced `times`.
///
/// Only the trailing half of the record is used so start-up transients do not
/// count. The period is the first autocorrelation maximum after the first zero
/// crossing, refined by a parabola through the three samples around it. The
/// signal is called periodic when that maximum reaches `MIN_CORRELATION` and
/// the swing is at least `100 * abstol`.
pub fn detect_period(times: &[f64], values: &[f64], abstol: f64) -> PeriodEstimate {
    let n = times.len().min(values.len());
    let none = |amplitude, correlation| PeriodEstimate {
        period: None,
        amplitude,
        correlation,
    };
    if n < 8 {
        return none(0.0, 0.0);
    }
    let tail = &values[n / 2..n];
    let dt = (times[n - 1] - times[n / 2]) / (tail.len() - 1) as f64;
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let amplitude = hi - lo;
    if !(amplitude.is_finite() && amplitude >= 100.0 * abstol) {
        return none(amplitude, 0.0);
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let centered: Vec<f64> = tail.iter().map(|v| v - mean).collect();
    let m = centered.len();
    // Normalized by the overlap length and the two segments' energies so a
    // clean periodic signal scores 1 at its period whatever the lag.
    let corr = |lag: usize| -> f64 {
        let (a, b) = (&centered[..m - lag], &centered[lag..]);
        let num: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let ea: f64 = a.iter().map(|x| x * x).sum();
        let eb: f64 = b.iter().map(|x| x * x).sum();
        if ea == 0.0 || eb == 0.0 {
            0.0
        } else {
            num / (ea * eb).sqrt()
        }
    };
    let max_lag = m / 2;
    let r: Vec<f64> = (0..=max_lag).map(corr).collect();
    let Some(zero) = r.iter().position(|&v| v <= 0.0) else {
        return none(amplitude, 0.0);
    };
    let mut best: Option<usize> = None;
    for k in zero.max(1)..max_lag {
        if r[k] >= r[k - 1] && r[k] >= r[k + 1] && r[k] > 0.0 {
            best = Some(k);
            break;
        }
    }
    let Some(k) = best else {
        return none(amplitude, 0.0);
    };
    let (y0, y1, y2) = (r[k - 1], r[k], r[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let offset = if denom < 0.0 {
        (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let peak = y1 - 0.25 * (y0 - y2) * offset;
    let correlation = peak.min(1.0);
    if correlation < MIN_CORRELATION {
        return none(amplitude, correlation);
    }
    PeriodEstimate {
        period: Some((k as f64 + offset) * dt),
        amplitude,
        correlation,
    }
}
