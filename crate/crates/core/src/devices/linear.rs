//! Linear elements, independent sources and the sinh benchmark device.

use std::sync::Arc;

use indexmap::IndexMap;

use super::{require_positive, DeviceError, DeviceKind};
use crate::modspec::{
    LimitedVarSpec, Limiter, MDual, ModelDescriptor, ModelEquations, ModelInputs, ModelOutputs,
};

fn zero() -> MDual {
    MDual::constant(0.0)
}

#[derive(Debug)]
struct Resistor {
    r: f64,
}

impl ModelEquations for Resistor {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        ModelOutputs {
            fe: vec![i.x[0] / self.r],
            qe: vec![zero()],
            ..Default::default()
        }
    }
}

pub(super) fn resistor(p: &IndexMap<String, f64>) -> Result<ModelDescriptor, DeviceError> {
    require_positive(DeviceKind::Resistor, p, &["r"])?;
    Ok(ModelDescriptor::new(
        "resistor",
        &["vpn"],
        &["ipn"],
        &[],
        &[],
        Arc::new(Resistor { r: p["r"] }),
    ))
}

#[derive(Debug)]
struct Capacitor {
    c: f64,
}

impl ModelEquations for Capacitor {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        ModelOutputs {
            fe: vec![zero()],
            qe: vec![i.x[0] * self.c],
            ..Default::default()
        }
    }
}

pub(super) fn capacitor(p: &IndexMap<String, f64>) -> Result<ModelDescriptor, DeviceError> {
    require_positive(DeviceKind::Capacitor, p, &["c"])?;
    Ok(ModelDescriptor::new(
        "capacitor",
        &["vpn"],
        &["ipn"],
        &[],
        &[],
        Arc::new(Capacitor { c: p["c"] }),
    ))
}

/// `vpn = d/dt (L * ipn)`.
#[derive(Debug)]
struct Inductor {
    l: f64,
}

impl ModelEquations for Inductor {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        ModelOutputs {
            fe: vec![zero()],
            qe: vec![i.x[0] * self.l],
            ..Default::default()
        }
    }
}

pub(super) fn inductor(p: &IndexMap<String, f64>) -> Result<ModelDescriptor, DeviceError> {
    require_positive(DeviceKind::Inductor, p, &["l"])?;
    Ok(ModelDescriptor::new(
        "inductor",
        &["ipn"],
        &["vpn"],
        &[],
        &[],
        Arc::new(Inductor { l: p["l"] }),
    ))
}

/// Explicit output equal to the input `u`: the source value.
#[derive(Debug)]
struct Source;

impl ModelEquations for Source {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        ModelOutputs {
            fe: vec![i.u[0]],
            qe: vec![zero()],
            ..Default::default()
        }
    }
}

pub(super) fn vsource() -> ModelDescriptor {
    ModelDescriptor::new("vsource", &["ipn"], &["vpn"], &[], &["E"], Arc::new(Source))
}

pub(super) fn isource() -> ModelDescriptor {
    ModelDescriptor::new("isource", &["vpn"], &["ipn"], &[], &["I"], Arc::new(Source))
}

/// `i = sinh(k * v)` with `v` declared as a sinh-limited variable.
#[derive(Debug)]
struct SinhDev {
    k: f64,
}

impl ModelEquations for SinhDev {
    fn eval(&self, i: &ModelInputs) -> ModelOutputs {
        ModelOutputs {
            fe: vec![(i.xlim[0] * self.k).sinh()],
            qe: vec![zero()],
            ..Default::default()
        }
    }
}

pub(super) fn sinhdev(p: &IndexMap<String, f64>) -> Result<ModelDescriptor, DeviceError> {
    require_positive(DeviceKind::SinhDev, p, &["k"])?;
    let k = p["k"];
    Ok(ModelDescriptor::new(
        "sinhdev",
        &["vpn"],
        &["ipn"],
        &[],
        &[],
        Arc::new(SinhDev { k }),
    )
    .with_limited(LimitedVarSpec {
        name: "vpn".into(),
        x_coeffs: vec![1.0],
        y_coeffs: vec![],
        limiter: Limiter::Sinhlim { k },
    }))
}

#[cfg(test)]
mod tests {
    use crate::devices::{build_device, DeviceKind};
    use crate::modspec::check_jacobians;

    #[test]
    fn resistor_1k() {
        let r = build_device(DeviceKind::Resistor, &[("r".into(), 1e3)]).unwrap();
        let e = r.evaluate_unlimited(&[2.5], &[], &[]).unwrap();
        assert_eq!(e.fe, vec![2.5 / 1000.0]);
        assert_eq!(e.fe_x[(0, 0)], 1e-3);
        for v in [-1e3, -2.0, 0.0, 0.37, 55.0] {
            assert!(check_jacobians(&r, &[v], &[], &[], 1e-4).unwrap() < 1e-10);
        }
    }

    #[test]
    fn sources_follow_input() {
        let v = build_device(DeviceKind::VSource, &[]).unwrap();
        let e = v.evaluate(&[0.3], &[], &[1.5], &[]).unwrap();
        assert_eq!(e.fe, vec![1.5]);
        assert_eq!(e.fe_u[(0, 0)], 1.0);
        assert_eq!(e.fe_x[(0, 0)], 0.0);
    }

    #[test]
    fn reactive_elements_only_store_charge() {
        let c = build_device(DeviceKind::Capacitor, &[("C".into(), 2e-6)]).unwrap();
        let e = c.evaluate_unlimited(&[3.0], &[], &[]).unwrap();
        assert_eq!(e.fe, vec![0.0]);
        assert_eq!(e.qe, vec![6e-6]);
        let l = build_device(DeviceKind::Inductor, &[("L".into(), 1e-3)]).unwrap();
        let e = l.evaluate_unlimited(&[2.0], &[], &[]).unwrap();
        assert_eq!(e.qe, vec![2e-3]);
    }

    #[test]
    fn sinhdev_uses_limited_value() {
        let d = build_device(DeviceKind::SinhDev, &[("k".into(), 2.0)]).unwrap();
        let e = d.evaluate(&[10.0], &[], &[], &[0.5]).unwrap();
        assert_eq!(e.fe, vec![1.0f64.sinh()]);
        assert_eq!(e.fe_x[(0, 0)], 0.0);
        assert_eq!(e.fe_lim[(0, 0)], 2.0 * 1.0f64.cosh());
        assert!(check_jacobians(&d, &[0.7], &[], &[], 1e-5).unwrap() < 1e-6);
    }
}
