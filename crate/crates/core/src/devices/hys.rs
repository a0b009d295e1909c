//! The hysteresis template device.
//!
//! `i = (v / R) * (tanh(s) + 1)` and `tau * ds/dt = v - s^3 + s`. The zero set
//! of the state equation folds back on itself, which produces DC hysteresis.

use std::sync::Arc;

use indexmap::IndexMap;

use super::{require_positive, DeviceError, DeviceKind};
use crate::dual::Dual;
use crate::modspec::{MDual, ModelDescriptor, ModelEquations, ModelInputs, ModelOutputs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysParams {
    pub r: f64,
    pub tau: f64,
}

impl Default for HysParams {
    fn default() -> Self {
        Self { r: 1.0, tau: 1e-6 }
    }
}

impl HysParams {
    pub fn from_map(p: &IndexMap<String, f64>) -> Result<Self, DeviceError> {
        require_positive(DeviceKind::Hys, p, &["R", "tau"])?;
        Ok(Self {
            r: p["R"],
            tau: p["tau"],
        })
    }
}

pub fn hys_f1<const N: usize>(v: Dual<N>, s: Dual<N>, p: &HysParams) -> Dual<N> {
    v / p.r * (s.tanh() + 1.0)
}

pub fn hys_f2<const N: usize>(v: Dual<N>, s: Dual<N>, p: &HysParams) -> Dual<N> {
    (v - s.powi(3) + s) / p.tau
}

#[derive(Debug)]
struct Hys(HysParams);

impl ModelEquations for Hys {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        let (v, s) = (i.x[0], i.y[0]);
        ModelOutputs {
            fe: vec![hys_f1(v, s, &self.0)],
            qe: vec![MDual::constant(0.0)],
            // tau * f2, with the time constant moved into qi
            fi: vec![v - s.powi(3) + s],
            qi: vec![s * -self.0.tau],
        }
    }
}

pub(super) fn descriptor(p: HysParams) -> ModelDescriptor {
    ModelDescriptor::new("hys", &["vpn"], &["ipn"], &["s"], &[], Arc::new(Hys(p)))
}
