//! General memristor family: five I-V relationships times six state dynamics.
//!
//! The state `s` is dimensionless with bounds `[0, 1]`, enforced by the same
//! additive clipping construction as the RRAM model. Every fast-growing or
//! discontinuous piece is replaced by its smooth/safe counterpart, and the
//! threshold-type dynamics (variants 4 and 5) place the zero set of f2 on a
//! sloped line `vpn = v*(s)` so DC hysteresis comes from a fold, not a flat
//! region.

use std::sync::Arc;

use indexmap::IndexMap;

use super::rram::clip_rate;
use super::{invalid, thermal_voltage, DeviceError, DeviceKind, STATE_EQUATION_SCALE};
use crate::dual::Dual;
use crate::modspec::{MDual, ModelDescriptor, ModelEquations, ModelInputs, ModelOutputs};
use crate::smooth::SmoothParams;

/// Lower and upper bounds of the state.
pub const STATE_BOUNDS: (f64, f64) = (0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorParams {
    pub f1_switch: u8,
    pub f2_switch: u8,
    pub ron: f64,
    pub roff: f64,
    pub lambda: f64,
    pub n: f64,
    pub beta: f64,
    pub alpha: f64,
    pub chi: f64,
    pub gamma_i: f64,
    pub a1: f64,
    pub a2: f64,
    pub b_sinh: f64,
    pub i0: f64,
    pub g0: f64,
    pub v0: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub mu_v: f64,
    pub a: f64,
    pub m: i32,
    pub c_off: f64,
    pub c_on: f64,
    pub i_off: f64,
    pub i_on: f64,
    pub a_off: f64,
    pub a_on: f64,
    pub w_c: f64,
    pub b: f64,
    pub k_off: f64,
    pub k_on: f64,
    pub v_off: f64,
    pub v_on: f64,
    pub alpha_off: f64,
    pub alpha_on: f64,
    pub ap: f64,
    pub an: f64,
    pub vp: f64,
    pub vn: f64,
    pub vel0: f64,
    pub ea: f64,
    pub a0: f64,
    pub tox: f64,
    pub gamma0: f64,
    pub beta0: f64,
    pub temperature: f64,
    pub kclip: f64,
    pub smooth: SmoothParams,
}

fn switch(
    p: &IndexMap<String, f64>,
    name: &'static str,
    max: u8,
    range: &'static str,
) -> Result<u8, DeviceError> {
    let v = p[name];
    if v.fract() != 0.0 || v < 1.0 || v > f64::from(max) {
        return Err(DeviceError::SwitchRange(name, range));
    }
    Ok(v as u8)
}

impl MemristorParams {
    pub fn from_map(p: &IndexMap<String, f64>) -> Result<Self, DeviceError> {
        let kind = DeviceKind::Memristor;
        let f1_switch = switch(p, "f1_switch", 5, "1..5")?;
        let f2_switch = switch(p, "f2_switch", 6, "1..6")?;
        let smooth = SmoothParams::new(p["smoothing"], p["maxslope"])
            .map_err(|e| invalid(kind, e.to_string()))?;
        let m = p["m"];
        if m.fract() != 0.0 || m < 1.0 {
            return Err(invalid(
                kind,
                format!("m must be a positive integer, got {m}"),
            ));
        }
        let params = Self {
            f1_switch,
            f2_switch,
            ron: p["Ron"],
            roff: p["Roff"],
            lambda: p["lambda"],
            n: p["n"],
            beta: p["beta"],
            alpha: p["alpha"],
            chi: p["chi"],
            gamma_i: p["gammaI"],
            a1: p["A1"],
            a2: p["A2"],
            b_sinh: p["B"],
            i0: p["I0"],
            g0: p["g0"],
            v0: p["V0"],
            min_gap: p["minGap"],
            max_gap: p["maxGap"],
            mu_v: p["mu_v"],
            a: p["a"],
            m: m as i32,
            c_off: p["c_off"],
            c_on: p["c_on"],
            i_off: p["i_off"],
            i_on: p["i_on"],
            a_off: p["a_off"],
            a_on: p["a_on"],
            w_c: p["w_c"],
            b: p["b"],
            k_off: p["k_off"],
            k_on: p["k_on"],
            v_off: p["v_off"],
            v_on: p["v_on"],
            alpha_off: p["alpha_off"],
            alpha_on: p["alpha_on"],
            ap: p["Ap"],
            an: p["An"],
            vp: p["Vp"],
            vn: p["Vn"],
            vel0: p["vel0"],
            ea: p["Ea"],
            a0: p["a0"],
            tox: p["tox"],
            gamma0: p["gamma0"],
            beta0: p["beta0"],
            temperature: p["T"],
            kclip: p["Kclip"],
            smooth,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), DeviceError> {
        let kind = DeviceKind::Memristor;
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(invalid(kind, format!("{name} must be positive, got {v}")))
            }
        };
        positive("Kclip", self.kclip)?;
        match self.f1_switch {
            1 => {
                positive("Ron", self.ron)?;
                positive("Roff", self.roff)?;
            }
            2 => positive("Ron", self.ron)?,
            3 => positive("n", self.n)?,
            5 => {
                positive("g0", self.g0)?;
                positive("V0", self.v0)?;
            }
            _ => {}
        }
        match self.f2_switch {
            1 => positive("Ron", self.ron)?,
            3 => {
                for (name, v) in [
                    ("i_off", self.i_off),
                    ("i_on", self.i_on),
                    ("w_c", self.w_c),
                    ("b", self.b),
                ] {
                    positive(name, v)?;
                }
            }
            4 => {
                positive("v_off", self.v_off)?;
                if self.v_on >= 0.0 {
                    return Err(invalid(kind, "v_on must be negative"));
                }
                positive("alpha_off", self.alpha_off)?;
                positive("alpha_on", self.alpha_on)?;
            }
            6 => {
                for (name, v) in [
                    ("Ea", self.ea),
                    ("a0", self.a0),
                    ("tox", self.tox),
                    ("T", self.temperature),
                ] {
                    positive(name, v)?;
                }
                for s in [0.0, 1.0] {
                    if self.gamma(s) <= 0.0 {
                        return Err(invalid(
                            kind,
                            "field enhancement gamma0 - beta0*Gap^3 must stay positive",
                        ));
                    }
                }
            }
            _ => {}
        }
        if (self.f1_switch == 5 || self.f2_switch == 6)
            && (self.min_gap < 0.0 || self.max_gap <= self.min_gap)
        {
            return Err(invalid(kind, "need maxGap > minGap >= 0"));
        }
        Ok(())
    }

    fn gap_of(&self, s: f64) -> f64 {
        s * self.min_gap + (1.0 - s) * self.max_gap
    }

    fn gamma(&self, s: f64) -> f64 {
        self.gamma0 - self.beta0 * self.gap_of(s).powi(3)
    }

    /// `v*(s)` for the threshold variants (4 and 5).
    pub fn fold_voltage(&self, s: f64) -> f64 {
        match self.f2_switch {
            4 => (1.0 - s) * self.v_off + s * self.v_on,
            5 => -self.vn * s + self.vp * (1.0 - s),
            _ => f64::NAN,
        }
    }
}

impl Default for MemristorParams {
    fn default() -> Self {
        let map = super::resolve_params(DeviceKind::Memristor, &[]).expect("defaults resolve");
        Self::from_map(&map).expect("defaults are valid")
    }
}

/// Device current for the selected I-V relationship.
pub fn memristor_f1<const N: usize>(vpn: Dual<N>, s: Dual<N>, p: &MemristorParams) -> Dual<N> {
    let sm = &p.smooth;
    match p.f1_switch {
        1 => {
            // Ron*s + Roff*(1-s) crosses zero just outside [0, 1]; keep it
            // above the smaller end-state resistance instead
            let r_min = p.ron.min(p.roff);
            let r_lin = s * p.ron + (1.0 - s) * p.roff;
            vpn / ((r_lin - r_min).smoothclip(sm) + r_min)
        }
        2 => ((1.0 - s) * -p.lambda).safeexp(sm) * vpn / p.ron,
        3 => {
            s.safepow(Dual::constant(p.n), sm) * p.beta * (vpn * p.alpha).safesinh(sm)
                + ((vpn * p.gamma_i).safeexp(sm) - 1.0) * p.chi
        }
        4 => {
            let sh = (vpn * p.b_sinh).safesinh(sm);
            let pos = s * sh * p.a1;
            let neg = s * sh * p.a2;
            Dual::smoothswitch(neg, pos, vpn, sm)
        }
        5 => {
            let gap = s * p.min_gap + (1.0 - s) * p.max_gap;
            (gap / -p.g0).safeexp(sm) * (vpn / p.v0).safesinh(sm) * p.i0
        }
        _ => unreachable!("f1_switch validated at construction"),
    }
}

/// State dynamics before the boundary clipping terms are added.
pub fn memristor_f2_unclipped<const N: usize>(
    vpn: Dual<N>,
    s: Dual<N>,
    p: &MemristorParams,
) -> Dual<N> {
    let sm = &p.smooth;
    match p.f2_switch {
        1 => memristor_f1(vpn, s, p) * (p.mu_v * p.ron),
        2 => vpn.powi(p.m) * p.a,
        3 => {
            let i = memristor_f1(vpn, s, p);
            let pos = (i / p.i_off).safesinh(sm)
                * (-((s - p.a_off) / p.w_c - i / p.b).safeexp(sm) - s / p.w_c).safeexp(sm)
                * p.c_off;
            let neg = (i / p.i_on).safesinh(sm)
                * (-((p.a_on - s) / p.w_c + i / p.b).safeexp(sm) - s / p.w_c).safeexp(sm)
                * p.c_on;
            Dual::smoothswitch(neg, pos, i, sm)
        }
        4 => {
            let vstar = (1.0 - s) * p.v_off + s * p.v_on;
            let dv = vpn - vstar;
            let pos = (dv / p.v_off).safepow(Dual::constant(p.alpha_off), sm) * p.k_off;
            let neg = (dv / p.v_on).safepow(Dual::constant(p.alpha_on), sm) * p.k_on;
            Dual::smoothswitch(neg, pos, dv, sm)
        }
        5 => {
            let vstar = s * -p.vn + (1.0 - s) * p.vp;
            let pos = (vpn.safeexp(sm) - vstar.safeexp(sm)) * p.ap;
            let neg = ((-vpn).safeexp(sm) - (-vstar).safeexp(sm)) * -p.an;
            Dual::smoothswitch(neg, pos, vpn - vstar, sm)
        }
        6 => {
            let vt = thermal_voltage(p.temperature);
            let gap = s * p.min_gap + (1.0 - s) * p.max_gap;
            let gamma = p.gamma0 - gap.powi(3) * p.beta0;
            let rate = (p.max_gap - p.min_gap) * p.vel0 * sm.safeexp(-p.ea / vt).value;
            (vpn * gamma * (p.a0 / (p.tox * vt))).safesinh(sm) * rate
        }
        _ => unreachable!("f2_switch validated at construction"),
    }
}

/// State dynamics with clipping at the bounds `[0, 1]`.
pub fn memristor_f2<const N: usize>(vpn: Dual<N>, s: Dual<N>, p: &MemristorParams) -> Dual<N> {
    let (lo, hi) = STATE_BOUNDS;
    clip_rate(
        memristor_f2_unclipped(vpn, s, p),
        s,
        lo,
        hi,
        p.kclip,
        &p.smooth,
    )
}

#[derive(Debug)]
struct Memristor(MemristorParams);

impl ModelEquations for Memristor {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        let (v, s) = (i.x[0], i.y[0]);
        ModelOutputs {
            fe: vec![memristor_f1(v, s, &self.0)],
            qe: vec![MDual::constant(0.0)],
            fi: vec![memristor_f2(v, s, &self.0) * STATE_EQUATION_SCALE],
            qi: vec![s * -STATE_EQUATION_SCALE],
        }
    }
}

pub(super) fn descriptor(p: MemristorParams) -> ModelDescriptor {
    ModelDescriptor::new(
        "memristor",
        &["vpn"],
        &["ipn"],
        &["s"],
        &[],
        Arc::new(Memristor(p)),
    )
}
