//! The shipped device library.
//!
//! Every device is two-terminal. Parameter names are matched
//! case-insensitively; unspecified parameters take the defaults listed in
//! [`param_table`].

mod hys;
mod linear;
mod memristor;
mod rram;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

use crate::modspec::ModelDescriptor;
use crate::smooth::{DEFAULT_MAXSLOPE, DEFAULT_SMOOTHING};

pub use hys::{hys_f1, hys_f2, HysParams};
pub use memristor::{memristor_f1, memristor_f2, memristor_f2_unclipped, MemristorParams};
pub use rram::{rram_f1, rram_f2, rram_f2_star, RramParams};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Scale applied to the implicit equations of the RRAM and memristor models
/// so the internal-unknown row carries current-like magnitudes.
pub const STATE_EQUATION_SCALE: f64 = 1e-9;

pub fn thermal_voltage(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELEMENTARY_CHARGE
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("unknown device kind '{0}'")]
    UnknownKind(String),
    #[error("{kind}: unknown parameter '{name}'")]
    UnknownParam { kind: DeviceKind, name: String },
    #[error("{kind}: parameter '{name}' must be finite")]
    NonFinite { kind: DeviceKind, name: String },
    #[error("{0} out of range {1}")]
    SwitchRange(&'static str, &'static str),
    #[error("{kind}: {message}")]
    Invalid { kind: DeviceKind, message: String },
}

/// Kinds of device a netlist may instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    Resistor,
    Capacitor,
    Inductor,
    VSource,
    ISource,
    Hys,
    Rram,
    Memristor,
    SinhDev,
}

impl DeviceKind {
    pub const ALL: [DeviceKind; 9] = [
        DeviceKind::Resistor,
        DeviceKind::VSource,
        DeviceKind::ISource,
        DeviceKind::Hys,
        DeviceKind::Rram,
        DeviceKind::Memristor,
        DeviceKind::SinhDev,
        DeviceKind::Capacitor,
        DeviceKind::Inductor,
    ];

    /// The device models proper; capacitor and inductor are plain linear elements.
    pub const MODELS: [DeviceKind; 7] = [
        DeviceKind::Resistor,
        DeviceKind::VSource,
        DeviceKind::ISource,
        DeviceKind::Hys,
        DeviceKind::Rram,
        DeviceKind::Memristor,
        DeviceKind::SinhDev,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DeviceKind::Resistor => "resistor",
            DeviceKind::Capacitor => "capacitor",
            DeviceKind::Inductor => "inductor",
            DeviceKind::VSource => "vsource",
            DeviceKind::ISource => "isource",
            DeviceKind::Hys => "hys",
            DeviceKind::Rram => "rram",
            DeviceKind::Memristor => "memristor",
            DeviceKind::SinhDev => "sinhdev",
        }
    }

    pub fn is_source(&self) -> bool {
        matches!(self, DeviceKind::VSource | DeviceKind::ISource)
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeviceKind {
    type Err = DeviceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DeviceKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DeviceError::UnknownKind(s.to_string()))
    }
}

/// One entry of a device's parameter table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamInfo {
    pub name: &'static str,
    pub default: f64,
    pub unit: &'static str,
}

const fn p(name: &'static str, default: f64, unit: &'static str) -> ParamInfo {
    ParamInfo {
        name,
        default,
        unit,
    }
}

const RESISTOR_PARAMS: &[ParamInfo] = &[p("r", 1e3, "ohm")];
const CAPACITOR_PARAMS: &[ParamInfo] = &[p("c", 1e-6, "F")];
const INDUCTOR_PARAMS: &[ParamInfo] = &[p("l", 1e-3, "H")];
const SINHDEV_PARAMS: &[ParamInfo] = &[p("k", 1.0, "1/V")];
const HYS_PARAMS: &[ParamInfo] = &[p("R", 1.0, "ohm"), p("tau", 1e-6, "s")];

const RRAM_PARAMS: &[ParamInfo] = &[
    p("I0", 1e-3, "A"),
    p("g0", 0.25, "nm"),
    p("V0", 0.25, "V"),
    p("vel0", 1e6, "nm/s"),
    p("Ea", 0.6, "eV"),
    p("a0", 0.25, "nm"),
    p("tox", 12.0, "nm"),
    p("gamma0", 16.0, ""),
    p("beta", 1.25, "1/nm^3"),
    p("T", 300.0, "K"),
    p("minGap", 0.0, "nm"),
    p("maxGap", 1.7, "nm"),
    p("Kclip", 200.0, "1/nm"),
    p("smoothing", DEFAULT_SMOOTHING, ""),
    p("maxslope", DEFAULT_MAXSLOPE, ""),
];

const MEMRISTOR_PARAMS: &[ParamInfo] = &[
    p("f1_switch", 1.0, ""),
    p("f2_switch", 1.0, ""),
    // f1 variants
    p("Ron", 1e3, "ohm"),
    p("Roff", 1e5, "ohm"),
    p("lambda", 4.605_170_185_988_092, ""),
    p("n", 2.0, ""),
    p("beta", 1e-4, "A"),
    p("alpha", 2.0, "1/V"),
    p("chi", 1e-5, "A"),
    p("gammaI", 2.0, "1/V"),
    p("A1", 1e-4, "A"),
    p("A2", 1e-4, "A"),
    p("B", 2.0, "1/V"),
    p("I0", 1e-3, "A"),
    p("g0", 0.25, "nm"),
    p("V0", 0.5, "V"),
    p("minGap", 0.0, "nm"),
    p("maxGap", 1.7, "nm"),
    // f2 variants
    p("mu_v", 1.0, "1/(ohm s A)"),
    p("a", 1.0, "1/(s V^m)"),
    p("m", 3.0, ""),
    p("c_off", 0.5, "1/s"),
    p("c_on", 0.5, "1/s"),
    p("i_off", 5e-3, "A"),
    p("i_on", 5e-3, "A"),
    p("a_off", 0.6, ""),
    p("a_on", 0.4, ""),
    p("w_c", 0.2, ""),
    p("b", 5e-3, "A"),
    p("k_off", 1.0, "1/s"),
    p("k_on", -1.0, "1/s"),
    p("v_off", 1.0, "V"),
    p("v_on", -1.0, "V"),
    p("alpha_off", 2.0, ""),
    p("alpha_on", 2.0, ""),
    p("Ap", 1.0, "1/s"),
    p("An", 1.0, "1/s"),
    p("Vp", 0.5, "V"),
    p("Vn", 0.5, "V"),
    p("vel0", 1e5, "nm/s"),
    p("Ea", 0.6, "eV"),
    p("a0", 0.25, "nm"),
    p("tox", 12.0, "nm"),
    p("gamma0", 4.0, ""),
    p("beta0", 0.3, "1/nm^3"),
    p("T", 300.0, "K"),
    // clipping and smoothing
    p("Kclip", 50.0, ""),
    p("smoothing", DEFAULT_SMOOTHING, ""),
    p("maxslope", DEFAULT_MAXSLOPE, ""),
];

/// Parameter table (names, defaults, units) of a device kind.
pub fn param_table(kind: DeviceKind) -> &'static [ParamInfo] {
    match kind {
        DeviceKind::Resistor => RESISTOR_PARAMS,
        DeviceKind::Capacitor => CAPACITOR_PARAMS,
        DeviceKind::Inductor => INDUCTOR_PARAMS,
        DeviceKind::VSource | DeviceKind::ISource => &[],
        DeviceKind::Hys => HYS_PARAMS,
        DeviceKind::Rram => RRAM_PARAMS,
        DeviceKind::Memristor => MEMRISTOR_PARAMS,
        DeviceKind::SinhDev => SINHDEV_PARAMS,
    }
}

/// Canonical spelling of a parameter name, if the kind has it.
pub fn canonical_param(kind: DeviceKind, name: &str) -> Option<&'static str> {
    param_table(kind)
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .map(|p| p.name)
}

/// Merge overrides into the default table, validating names and finiteness.
pub fn resolve_params(
    kind: DeviceKind,
    overrides: &[(String, f64)],
) -> Result<IndexMap<String, f64>, DeviceError> {
    let mut map: IndexMap<String, f64> = param_table(kind)
        .iter()
        .map(|p| (p.name.to_string(), p.default))
        .collect();
    for (name, value) in overrides {
        let canon = canonical_param(kind, name).ok_or_else(|| DeviceError::UnknownParam {
            kind,
            name: name.clone(),
        })?;
        if !value.is_finite() {
            return Err(DeviceError::NonFinite {
                kind,
                name: canon.to_string(),
            });
        }
        map.insert(canon.to_string(), *value);
    }
    Ok(map)
}

pub(crate) fn invalid(kind: DeviceKind, message: impl Into<String>) -> DeviceError {
    DeviceError::Invalid {
        kind,
        message: message.into(),
    }
}

pub(crate) fn require_positive(
    kind: DeviceKind,
    params: &IndexMap<String, f64>,
    names: &[&str],
) -> Result<(), DeviceError> {
    for name in names {
        let v = params[*name];
        if v <= 0.0 {
            return Err(invalid(kind, format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Build a descriptor for `kind` with parameter overrides applied.
pub fn build_device(
    kind: DeviceKind,
    overrides: &[(String, f64)],
) -> Result<ModelDescriptor, DeviceError> {
    let params = resolve_params(kind, overrides)?;
    let desc = match kind {
        DeviceKind::Resistor => linear::resistor(&params)?,
        DeviceKind::Capacitor => linear::capacitor(&params)?,
        DeviceKind::Inductor => linear::inductor(&params)?,
        DeviceKind::VSource => linear::vsource(),
        DeviceKind::ISource => linear::isource(),
        DeviceKind::SinhDev => linear::sinhdev(&params)?,
        DeviceKind::Hys => hys::descriptor(HysParams::from_map(&params)?),
        DeviceKind::Rram => rram::descriptor(RramParams::from_map(&params)?),
        DeviceKind::Memristor => memristor::descriptor(MemristorParams::from_map(&params)?),
    };
    Ok(desc.with_params(params))
}

/// Whether a device's explicit output is its branch current or its branch voltage.
pub fn is_voltage_explicit(desc: &ModelDescriptor) -> bool {
    desc.z_names.first().is_some_and(|z| z.starts_with('v'))
}
