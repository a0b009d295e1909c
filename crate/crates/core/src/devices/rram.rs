//! Bipolar RRAM model with a filament-gap internal unknown.
//!
//! The gap is carried in nanometres and both its implicit equation and its
//! charge term are scaled by [`STATE_EQUATION_SCALE`], so the state row reads
//! `-1e-9 * d(gap)/dt + 1e-9 * f2*(vtb, gap) = 0`.
//!
//! Bounds on the gap are enforced with additive clipping terms rather than a
//! multiplicative window, which keeps the DC solution set a single curve.

use std::sync::Arc;

use indexmap::IndexMap;

use super::STATE_EQUATION_SCALE;
use super::{invalid, require_positive, thermal_voltage, DeviceError, DeviceKind};
use crate::dual::Dual;
use crate::modspec::{
    LimitedVarSpec, Limiter, MDual, ModelDescriptor, ModelEquations, ModelInputs, ModelOutputs,
};
use crate::smooth::SmoothParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RramParams {
    pub i0: f64,
    pub g0: f64,
    pub v0: f64,
    /// Gap growth velocity prefactor (netlist name `vel0`), nm/s.
    pub vel0: f64,
    pub ea: f64,
    pub a0: f64,
    pub tox: f64,
    pub gamma0: f64,
    pub beta: f64,
    pub temperature: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub kclip: f64,
    pub smooth: SmoothParams,
}

impl RramParams {
    pub fn from_map(p: &IndexMap<String, f64>) -> Result<Self, DeviceError> {
        let kind = DeviceKind::Rram;
        require_positive(
            kind,
            p,
            &[
                "I0", "g0", "V0", "vel0", "Ea", "a0", "tox", "gamma0", "T", "Kclip",
            ],
        )?;
        let smooth = SmoothParams::new(p["smoothing"], p["maxslope"])
            .map_err(|e| invalid(kind, e.to_string()))?;
        let params = Self {
            i0: p["I0"],
            g0: p["g0"],
            v0: p["V0"],
            vel0: p["vel0"],
            ea: p["Ea"],
            a0: p["a0"],
            tox: p["tox"],
            gamma0: p["gamma0"],
            beta: p["beta"],
            temperature: p["T"],
            min_gap: p["minGap"],
            max_gap: p["maxGap"],
            kclip: p["Kclip"],
            smooth,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), DeviceError> {
        let kind = DeviceKind::Rram;
        if self.min_gap < 0.0 || self.max_gap <= self.min_gap {
            return Err(invalid(kind, "need maxGap > minGap >= 0"));
        }
        // gamma is monotone in gap, so checking both ends covers the range
        for g in [self.min_gap, self.max_gap] {
            if self.gamma(g) <= 0.0 {
                return Err(invalid(
                    kind,
                    format!("field enhancement gamma0 - beta*gap^3 is not positive at gap = {g}"),
                ));
            }
        }
        Ok(())
    }

    pub fn thermal_voltage(&self) -> f64 {
        thermal_voltage(self.temperature)
    }

    pub fn gamma(&self, gap: f64) -> f64 {
        self.gamma0 - self.beta * gap.powi(3)
    }

    /// Coefficient `k` of `sinh(k * vtb)` in f1.
    pub fn f1_sinh_coeff(&self) -> f64 {
        1.0 / self.v0
    }

    /// Largest coefficient of `vtb` inside the f2 sinh, over the gap range.
    pub fn f2_sinh_coeff(&self) -> f64 {
        let gmax = self.gamma(self.min_gap).max(self.gamma(self.max_gap));
        gmax * self.a0 / (self.tox * self.thermal_voltage())
    }
}

impl Default for RramParams {
    fn default() -> Self {
        let map = super::resolve_params(DeviceKind::Rram, &[]).expect("defaults resolve");
        Self::from_map(&map).expect("defaults are valid")
    }
}

/// `I0 * exp(-gap/g0) * sinh(vtb/V0)` with safe exponentials.
pub fn rram_f1<const N: usize>(vtb: Dual<N>, gap: Dual<N>, p: &RramParams) -> Dual<N> {
    let s = &p.smooth;
    (gap / -p.g0).safeexp(s) * (vtb / p.v0).safesinh(s) * p.i0
}

/// Unbounded gap growth rate, nm/s.
pub fn rram_f2<const N: usize>(vtb: Dual<N>, gap: Dual<N>, p: &RramParams) -> Dual<N> {
    let s = &p.smooth;
    let vt = p.thermal_voltage();
    let gamma = p.gamma0 - gap.powi(3) * p.beta;
    let rate = s.safeexp(-p.ea / vt).value * p.vel0;
    (vtb * gamma * (p.a0 / (p.tox * vt))).safesinh(s) * -rate
}

/// Add the lower/upper clipping forces to a state equation.
///
/// Below `lower` the original rate is cancelled and replaced by a fast
/// growing positive term; above `upper` by a negative one.
pub(crate) fn clip_rate<const N: usize>(
    f2: Dual<N>,
    state: Dual<N>,
    lower: f64,
    upper: f64,
    kclip: f64,
    s: &SmoothParams,
) -> Dual<N> {
    let below = (lower - state).smoothstep(s);
    let above = (state - upper).smoothstep(s);
    let push_up = ((lower - state) * kclip).safeexp(s);
    let push_down = -((state - upper) * kclip).safeexp(s);
    f2 + (push_up - f2) * below + (push_down - f2) * above
}

/// Gap growth rate with clipping terms at `minGap` and `maxGap`.
pub fn rram_f2_star<const N: usize>(vtb: Dual<N>, gap: Dual<N>, p: &RramParams) -> Dual<N> {
    clip_rate(
        rram_f2(vtb, gap, p),
        gap,
        p.min_gap,
        p.max_gap,
        p.kclip,
        &p.smooth,
    )
}

#[derive(Debug)]
struct Rram(RramParams);

impl ModelEquations for Rram {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        let gap = i.y[0];
        let p = &self.0;
        ModelOutputs {
            fe: vec![rram_f1(i.xlim[0], gap, p)],
            qe: vec![MDual::constant(0.0)],
            fi: vec![rram_f2_star(i.xlim[1], gap, p) * STATE_EQUATION_SCALE],
            qi: vec![gap * -STATE_EQUATION_SCALE],
        }
    }
}

pub(super) fn descriptor(p: RramParams) -> ModelDescriptor {
    let limited = |name: &str, k: f64| LimitedVarSpec {
        name: name.into(),
        x_coeffs: vec![1.0],
        y_coeffs: vec![0.0],
        limiter: Limiter::Sinhlim { k },
    };
    ModelDescriptor::new("rram", &["vtb"], &["itb"], &["gap"], &[], Arc::new(Rram(p)))
        .with_limited(limited("vtb_f1", p.f1_sinh_coeff()))
        .with_limited(limited("vtb_f2", p.f2_sinh_coeff()))
}
