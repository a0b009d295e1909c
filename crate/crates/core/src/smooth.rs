//! Smooth and safe scalar primitives.
//!
//! Every device equation in this crate is composed from these functions. Each
//! returns the value together with its analytic first derivative so device
//! Jacobians can be assembled exactly.

use thiserror::Error;

/// Default curvature scale for smoothed discontinuities.
pub const DEFAULT_SMOOTHING: f64 = 1e-8;
/// Default derivative cap for growth-limited functions.
pub const DEFAULT_MAXSLOPE: f64 = 1e15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothError {
    #[error("smoothing must be positive and finite, got {0}")]
    Smoothing(f64),
    #[error("maxslope must be finite and greater than 1, got {0}")]
    MaxSlope(f64),
}

/// A function value paired with its derivative with respect to the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValDer {
    pub value: f64,
    pub deriv: f64,
}

impl ValDer {
    pub const fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }
}

/// Value and partials of a two-input primitive such as [`safepow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValDer2 {
    pub value: f64,
    pub d_a: f64,
    pub d_b: f64,
}

/// Value and partials of [`smoothswitch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchValDer {
    pub value: f64,
    pub d_fn: f64,
    pub d_fp: f64,
    pub d_x: f64,
}

/// Validated smoothing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothParams {
    smoothing: f64,
    maxslope: f64,
}

impl Default for SmoothParams {
    fn default() -> Self {
        Self {
            smoothing: DEFAULT_SMOOTHING,
            maxslope: DEFAULT_MAXSLOPE,
        }
    }
}

impl SmoothParams {
    pub fn new(smoothing: f64, maxslope: f64) -> Result<Self, SmoothError> {
        check_smoothing(smoothing)?;
        check_maxslope(maxslope)?;
        Ok(Self {
            smoothing,
            maxslope,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn maxslope(&self) -> f64 {
        self.maxslope
    }

    pub fn smoothstep(&self, x: f64) -> ValDer {
        smoothstep_raw(x, self.smoothing)
    }

    pub fn smoothclip(&self, x: f64) -> ValDer {
        smoothclip_raw(x, self.smoothing)
    }

    pub fn smoothswitch(&self, f_neg: f64, f_pos: f64, x: f64) -> SwitchValDer {
        smoothswitch_raw(f_neg, f_pos, x, self.smoothing)
    }

    pub fn safeexp(&self, x: f64) -> ValDer {
        safeexp_raw(x, self.maxslope)
    }

    pub fn safesinh(&self, x: f64) -> ValDer {
        safesinh_raw(x, self.maxslope)
    }

    pub fn safelog(&self, x: f64) -> ValDer {
        safelog_raw(x, self.smoothing)
    }

    pub fn safepow(&self, a: f64, b: f64) -> ValDer2 {
        safepow_raw(a, b, self)
    }
}

fn check_smoothing(smoothing: f64) -> Result<(), SmoothError> {
    if smoothing.is_finite() && smoothing > 0.0 {
        Ok(())
    } else {
        Err(SmoothError::Smoothing(smoothing))
    }
}

fn check_maxslope(maxslope: f64) -> Result<(), SmoothError> {
    if maxslope.is_finite() && maxslope > 1.0 {
        Ok(())
    } else {
        Err(SmoothError::MaxSlope(maxslope))
    }
}

/// `0.5 * (x / sqrt(x^2 + smoothing) + 1)`.
pub fn smoothstep(x: f64, smoothing: f64) -> Result<ValDer, SmoothError> {
    check_smoothing(smoothing)?;
    Ok(smoothstep_raw(x, smoothing))
}

/// `0.5 * (x + sqrt(x^2 + smoothing))`, a strictly positive smooth ramp.
pub fn smoothclip(x: f64, smoothing: f64) -> Result<ValDer, SmoothError> {
    check_smoothing(smoothing)?;
    Ok(smoothclip_raw(x, smoothing))
}

/// Blend from `f_neg` (for `x` well below zero) to `f_pos` (well above zero).
pub fn smoothswitch(
    f_neg: f64,
    f_pos: f64,
    x: f64,
    smoothing: f64,
) -> Result<SwitchValDer, SmoothError> {
    check_smoothing(smoothing)?;
    Ok(smoothswitch_raw(f_neg, f_pos, x, smoothing))
}

/// Exponential that continues linearly once its slope reaches `maxslope`.
pub fn safeexp(x: f64, maxslope: f64) -> Result<ValDer, SmoothError> {
    check_maxslope(maxslope)?;
    Ok(safeexp_raw(x, maxslope))
}

pub fn safesinh(x: f64, maxslope: f64) -> Result<ValDer, SmoothError> {
    check_maxslope(maxslope)?;
    Ok(safesinh_raw(x, maxslope))
}

/// `ln(smoothclip(x))`; finite for every finite input.
pub fn safelog(x: f64, smoothing: f64) -> Result<ValDer, SmoothError> {
    check_smoothing(smoothing)?;
    Ok(safelog_raw(x, smoothing))
}

/// `safeexp(b * safelog(a))`.
pub fn safepow(a: f64, b: f64, params: &SmoothParams) -> ValDer2 {
    safepow_raw(a, b, params)
}

pub(crate) fn smoothstep_raw(x: f64, smoothing: f64) -> ValDer {
    let r = x.hypot(smoothing.sqrt());
    // 1 + x/r loses everything to cancellation for x << 0; use the conjugate form.
    let value = if x < 0.0 {
        0.5 * smoothing / (r * (r - x))
    } else {
        0.5 * (x / r + 1.0)
    };
    let deriv = 0.5 * smoothing / (r * r * r);
    ValDer::new(value, if deriv.is_finite() { deriv } else { 0.0 })
}

pub(crate) fn smoothclip_raw(x: f64, smoothing: f64) -> ValDer {
    let r = x.hypot(smoothing.sqrt());
    let value = if x < 0.0 {
        0.5 * smoothing / (r - x)
    } else {
        0.5 * (x + r)
    };
    let deriv = if x < 0.0 {
        0.5 * smoothing / (r * (r - x))
    } else {
        0.5 * (1.0 + x / r)
    };
    ValDer::new(value, deriv)
}

pub(crate) fn smoothswitch_raw(f_neg: f64, f_pos: f64, x: f64, smoothing: f64) -> SwitchValDer {
    let w = smoothstep_raw(x, smoothing);
    SwitchValDer {
        value: f_neg + (f_pos - f_neg) * w.value,
        d_fn: 1.0 - w.value,
        d_fp: w.value,
        d_x: (f_pos - f_neg) * w.deriv,
    }
}

pub(crate) fn safeexp_raw(x: f64, maxslope: f64) -> ValDer {
    let knee = maxslope.ln();
    if x <= knee {
        let e = x.exp();
        ValDer::new(e, e)
    } else {
        ValDer::new(maxslope * (1.0 + x - knee), maxslope)
    }
}

pub(crate) fn safesinh_raw(x: f64, maxslope: f64) -> ValDer {
    let knee = maxslope.ln();
    if x.abs() <= knee {
        return ValDer::new(x.sinh(), x.cosh());
    }
    let p = safeexp_raw(x, maxslope);
    let n = safeexp_raw(-x, maxslope);
    ValDer::new(0.5 * (p.value - n.value), 0.5 * (p.deriv + n.deriv))
}

pub(crate) fn safelog_raw(x: f64, smoothing: f64) -> ValDer {
    let c = smoothclip_raw(x, smoothing);
    ValDer::new(c.value.ln(), c.deriv / c.value)
}

pub(crate) fn safepow_raw(a: f64, b: f64, params: &SmoothParams) -> ValDer2 {
    let l = safelog_raw(a, params.smoothing);
    let e = safeexp_raw(b * l.value, params.maxslope);
    ValDer2 {
        value: e.value,
        d_a: e.deriv * b * l.deriv,
        d_b: e.deriv * l.value,
    }
}
