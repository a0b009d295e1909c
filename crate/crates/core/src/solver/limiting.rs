//! Newton limiting functions for fast-growing device nonlinearities.

/// Junction-voltage limiting for exponential characteristics.
///
/// When the proposed value jumps upward by more than `2 * vt` above `xcrit`,
/// the returned value reproduces the current predicted by the linearization
/// at `xold` on the exponential curve instead. Decreases pass through.
pub fn pnjlim(xnew: f64, xold: f64, vt: f64, xcrit: f64) -> f64 {
    if xnew > xcrit && xnew - xold > 2.0 * vt {
        xold + vt * (1.0 + (xnew - xold) / vt).ln()
    } else {
        xnew
    }
}

/// Limiting for `sinh(k * x)` characteristics.
///
/// Finds the argument whose sinh equals the value predicted by linearizing
/// `sinh(k * x)` at `xold` and stepping to `xnew`. Smooth in both arguments.
pub fn sinhlim(xnew: f64, xold: f64, k: f64) -> f64 {
    let a = k * xold;
    let d = k * (xnew - xold);
    let ylim = a.sinh() + a.cosh() * d;
    if ylim.is_finite() {
        return ylim.asinh() / k;
    }
    // |a| is past the overflow point: sinh(a) + cosh(a)*d ~ exp(|a|)/2 * (sgn(a) + d)
    let w = a.signum() + d;
    w.signum() * (a.abs() + w.abs().ln()) / k
}

/// Initial critical voltage used by SPICE for a junction: `vt * ln(vt / (sqrt(2) * is))`.
pub fn pnj_vcrit(vt: f64, is: f64) -> f64 {
    vt * (vt / (std::f64::consts::SQRT_2 * is)).ln()
}
