//! Circuit description: instances, source waveforms and analysis directives.

use std::f64::consts::PI;

use crate::devices::DeviceKind;

/// Name of the reference node.
pub const GROUND: &str = "0";

/// Time dependence of an independent source.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceWaveform {
    Dc(f64),
    /// `offset + amplitude * sin(2*pi*frequency*t + phase)`, phase in degrees.
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Piecewise-linear through `(t, value)` points, held constant outside.
    Pwl(Vec<(f64, f64)>),
}

impl Default for SourceWaveform {
    fn default() -> Self {
        SourceWaveform::Dc(0.0)
    }
}

impl SourceWaveform {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            SourceWaveform::Dc(v) => *v,
            SourceWaveform::Sine {
                offset,
                amplitude,
                frequency,
                phase,
            } => offset + amplitude * (2.0 * PI * frequency * t + phase.to_radians()).sin(),
            SourceWaveform::Pwl(points) => pwl_value(points, t),
        }
    }

    /// Value used by a DC operating point: a sine contributes its offset only.
    pub fn dc_value(&self) -> f64 {
        match self {
            SourceWaveform::Dc(v) => *v,
            SourceWaveform::Sine { offset, .. } => *offset,
            SourceWaveform::Pwl(points) => pwl_value(points, 0.0),
        }
    }
}

fn pwl_value(points: &[(f64, f64)], t: f64) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    if t <= first.0 {
        return first.1;
    }
    for w in points.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if t <= t1 {
            if t1 == t0 {
                return v1;
            }
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    points[points.len() - 1].1
}

/// One device placed between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub kind: DeviceKind,
    pub pos: String,
    pub neg: String,
    /// Parameter overrides, canonical names, in netlist order.
    pub params: Vec<(String, f64)>,
    /// Only for sources.
    pub waveform: Option<SourceWaveform>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMethod {
    BackwardEuler,
    Trapezoidal,
}

impl IntegrationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            IntegrationMethod::BackwardEuler => "be",
            IntegrationMethod::Trapezoidal => "trap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Op,
    Dc {
        source: String,
        start: f64,
        stop: f64,
        step: f64,
        /// Sweep `start -> stop` then back to `start`.
        updown: bool,
    },
    Tran {
        dt: f64,
        tstop: f64,
        method: IntegrationMethod,
        /// Initial conditions keyed by unknown name, e.g. `v(2)` or `s(h1)`.
        ic: Vec<(String, f64)>,
    },
    Ac {
        source: String,
        fstart: f64,
        fstop: f64,
        points_per_decade: usize,
    },
    Homotopy {
        source: String,
        lmin: f64,
        lmax: f64,
    },
    /// Write the preceding analysis's table to this CSV path.
    PrintCsv(String),
}

impl Analysis {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Analysis::Op => "op",
            Analysis::Dc { .. } => "dc",
            Analysis::Tran { .. } => "tran",
            Analysis::Ac { .. } => "ac",
            Analysis::Homotopy { .. } => "homotopy",
            Analysis::PrintCsv(_) => "print",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub instances: Vec<Instance>,
    pub analyses: Vec<Analysis>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn instance(&self, name: &str) -> Option<&Instance> {
        self.instances
            .iter()
            .find(|i| i.name.eq_ignore_ascii_case(name))
    }

    /// Add a device without a waveform.
    pub fn add(
        &mut self,
        name: &str,
        kind: DeviceKind,
        pos: &str,
        neg: &str,
        params: &[(&str, f64)],
    ) -> &mut Self {
        self.instances.push(Instance {
            name: name.to_string(),
            kind,
            pos: pos.to_ascii_lowercase(),
            neg: neg.to_ascii_lowercase(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            waveform: kind.is_source().then(SourceWaveform::default),
        });
        self
    }

    /// Add an independent voltage or current source.
    pub fn add_source(
        &mut self,
        name: &str,
        kind: DeviceKind,
        pos: &str,
        neg: &str,
        waveform: SourceWaveform,
    ) -> &mut Self {
        assert!(kind.is_source(), "{kind} is not a source");
        self.instances.push(Instance {
            name: name.to_string(),
            kind,
            pos: pos.to_ascii_lowercase(),
            neg: neg.to_ascii_lowercase(),
            params: Vec::new(),
            waveform: Some(waveform),
        });
        self
    }

    /// Non-ground node names in order of first appearance.
    pub fn nodes(&self) -> Vec<String> {
        let mut nodes: Vec<String> = Vec::new();
        for inst in &self.instances {
            for n in [&inst.pos, &inst.neg] {
                if n != GROUND && !nodes.contains(n) {
                    nodes.push(n.clone());
                }
            }
        }
        nodes
    }
}
