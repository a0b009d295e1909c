//! Modified nodal analysis: a circuit becomes `d/dt q(X) + f(X, u) = 0`.
//!
//! The unknown vector holds node voltages (first appearance order), then the
//! branch currents of voltage-explicit devices (sources and inductors), then
//! every device's internal unknowns in instance order.

use thiserror::Error;

use crate::circuit::{Circuit, SourceWaveform, GROUND};
use crate::devices::{build_device, is_voltage_explicit, DeviceError, DeviceKind};
use crate::linsolve::Triplets;
use crate::modspec::{limit_step, ModelDescriptor, ModelError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub reltol: f64,
    pub abstol_v: f64,
    pub abstol_i: f64,
    pub residualtol: f64,
    pub gmin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            reltol: 1e-6,
            abstol_v: 1e-6,
            abstol_i: 1e-12,
            residualtol: 1e-12,
            gmin: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), EngineError> {
        for (name, value) in [
            ("reltol", self.reltol),
            ("abstol_v", self.abstol_v),
            ("abstol_i", self.abstol_i),
            ("residualtol", self.residualtol),
            ("gmin", self.gmin),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(EngineError::Tolerance { name, value });
            }
        }
        Ok(())
    }

    /// Absolute step tolerance for an unknown of the given kind.
    ///
    /// Internal unknowns are scaled to O(1) by the models, so they share the
    /// voltage tolerance.
    pub fn abstol(&self, kind: UnknownKind) -> f64 {
        match kind {
            UnknownKind::NodeVoltage | UnknownKind::Internal => self.abstol_v,
            UnknownKind::BranchCurrent => self.abstol_i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("floating node '{0}': no DC path to ground")]
    FloatingNode(String),
    #[error("duplicate instance name '{0}'")]
    DuplicateInstance(String),
    #[error("instance {instance}: {source}")]
    Device {
        instance: String,
        #[source]
        source: DeviceError,
    },
    #[error("instance {instance}: {source}")]
    Model {
        instance: String,
        #[source]
        source: ModelError,
    },
    #[error("'{0}' is not an independent source")]
    UnknownSource(String),
    #[error("no unknown named '{0}'")]
    UnknownName(String),
    #[error("tolerance {name} = {value} must be positive and finite")]
    Tolerance { name: &'static str, value: f64 },
    #[error("circuit has no devices")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnknownKind {
    NodeVoltage,
    BranchCurrent,
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unknown {
    pub name: String,
    pub kind: UnknownKind,
}

/// An independent source whose value is an input of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceInfo {
    pub name: String,
    pub kind: DeviceKind,
    pub waveform: SourceWaveform,
}

/// Where one device sits in the global system.
#[derive(Debug, Clone)]
struct Stamp {
    name: String,
    model: ModelDescriptor,
    pos: Option<usize>,
    neg: Option<usize>,
    /// Branch-current unknown of a voltage-explicit device.
    branch: Option<usize>,
    internal: usize,
    input: Option<usize>,
    lim_offset: usize,
}

impl Stamp {
    fn ny(&self) -> usize {
        self.model.ny()
    }

    /// Global columns (with signs) making up the device's local input `x[0]`.
    fn x_map(&self) -> Vec<(usize, f64)> {
        match self.branch {
            Some(b) => vec![(b, 1.0)],
            None => self.terminal_map(),
        }
    }

    /// `+1` at the positive node, `-1` at the negative one, ground omitted.
    fn terminal_map(&self) -> Vec<(usize, f64)> {
        let mut m = Vec::with_capacity(2);
        if let Some(p) = self.pos {
            m.push((p, 1.0));
        }
        if let Some(n) = self.neg {
            m.push((n, -1.0));
        }
        m
    }

    fn local(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let xl = self.x_map().iter().map(|&(i, s)| s * x[i]).sum();
        let yl = x[self.internal..self.internal + self.ny()].to_vec();
        (vec![xl], yl)
    }
}

/// Residual pieces and Jacobians at one point.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub f: Vec<f64>,
    pub q: Vec<f64>,
    /// `df/dX`.
    pub g: Triplets,
    /// `dq/dX`.
    pub c: Triplets,
    /// `df/du`, one column per source input.
    pub f_u: Vec<Vec<f64>>,
}

/// The assembled circuit DAE.
#[derive(Debug, Clone)]
pub struct DaeSystem {
    unknowns: Vec<Unknown>,
    stamps: Vec<Stamp>,
    sources: Vec<SourceInfo>,
    tol: Tolerances,
    nlim: usize,
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Build the DAE for a circuit.
pub fn assemble(circuit: &Circuit, tol: Tolerances) -> Result<DaeSystem, EngineError> {
    tol.validate()?;
    if circuit.instances.is_empty() {
        return Err(EngineError::Empty);
    }
    for (k, inst) in circuit.instances.iter().enumerate() {
        if circuit.instances[..k]
            .iter()
            .any(|o| o.name.eq_ignore_ascii_case(&inst.name))
        {
            return Err(EngineError::DuplicateInstance(inst.name.clone()));
        }
    }

    let nodes = circuit.nodes();
    let node_index = |name: &str| nodes.iter().position(|n| n == name);

    // every node needs a path to ground; GMIN sits across every device, so
    // plain graph connectivity decides this
    let ground = nodes.len();
    let mut dsu = DisjointSet((0..=nodes.len()).collect());
    for inst in &circuit.instances {
        let a = node_index(&inst.pos).unwrap_or(ground);
        let b = node_index(&inst.neg).unwrap_or(ground);
        dsu.union(a, b);
    }
    let ground_root = dsu.find(ground);
    if let Some(i) = (0..nodes.len()).find(|&i| dsu.find(i) != ground_root) {
        return Err(EngineError::FloatingNode(nodes[i].clone()));
    }

    let mut unknowns: Vec<Unknown> = nodes
        .iter()
        .map(|n| Unknown {
            name: format!("v({n})"),
            kind: UnknownKind::NodeVoltage,
        })
        .collect();

    let mut models = Vec::with_capacity(circuit.instances.len());
    for inst in &circuit.instances {
        let model =
            build_device(inst.kind, &inst.params).map_err(|source| EngineError::Device {
                instance: inst.name.clone(),
                source,
            })?;
        models.push(model);
    }

    let mut branches = Vec::with_capacity(models.len());
    for (inst, model) in circuit.instances.iter().zip(&models) {
        if is_voltage_explicit(model) {
            branches.push(Some(unknowns.len()));
            unknowns.push(Unknown {
                name: format!("i({})", inst.name),
                kind: UnknownKind::BranchCurrent,
            });
        } else {
            branches.push(None);
        }
    }

    let mut stamps = Vec::with_capacity(models.len());
    let mut sources = Vec::new();
    let mut nlim = 0;
    for ((inst, model), branch) in circuit.instances.iter().zip(models).zip(branches) {
        let internal = unknowns.len();
        for y in &model.y_names {
            unknowns.push(Unknown {
                name: format!("{y}({})", inst.name),
                kind: UnknownKind::Internal,
            });
        }
        let input = if inst.kind.is_source() {
            sources.push(SourceInfo {
                name: inst.name.clone(),
                kind: inst.kind,
                waveform: inst.waveform.clone().unwrap_or_default(),
            });
            Some(sources.len() - 1)
        } else {
            None
        };
        let lim_offset = nlim;
        nlim += model.nlim();
        stamps.push(Stamp {
            name: inst.name.clone(),
            pos: (inst.pos != GROUND)
                .then(|| node_index(&inst.pos))
                .flatten(),
            neg: (inst.neg != GROUND)
                .then(|| node_index(&inst.neg))
                .flatten(),
            model,
            branch,
            internal,
            input,
            lim_offset,
        });
    }

    Ok(DaeSystem {
        unknowns,
        stamps,
        sources,
        tol,
        nlim,
    })
}

impl DaeSystem {
    pub fn n(&self) -> usize {
        self.unknowns.len()
    }

    pub fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    pub fn unknown_names(&self) -> Vec<String> {
        self.unknowns.iter().map(|u| u.name.clone()).collect()
    }

    pub fn unknown_index(&self, name: &str) -> Result<usize, EngineError> {
        self.unknowns
            .iter()
            .position(|u| u.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| EngineError::UnknownName(name.to_string()))
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) -> Result<(), EngineError> {
        tol.validate()?;
        self.tol = tol;
        Ok(())
    }

    /// Step tolerance `reltol * |x_i| + abstol(kind_i)` for every unknown.
    pub fn step_tolerance(&self, x: &[f64]) -> Vec<f64> {
        self.unknowns
            .iter()
            .zip(x)
            .map(|(u, v)| self.tol.reltol * v.abs() + self.tol.abstol(u.kind))
            .collect()
    }

    pub fn sources(&self) -> &[SourceInfo] {
        &self.sources
    }

    pub fn source_index(&self, name: &str) -> Result<usize, EngineError> {
        self.sources
            .iter()
            .position(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| EngineError::UnknownSource(name.to_string()))
    }

    /// Source values at time `t`.
    pub fn inputs_at(&self, t: f64) -> Vec<f64> {
        self.sources
            .iter()
            .map(|s| s.waveform.value_at(t))
            .collect()
    }

    /// Source values for a DC operating point.
    pub fn dc_inputs(&self) -> Vec<f64> {
        self.sources.iter().map(|s| s.waveform.dc_value()).collect()
    }

    /// Total number of limited variables over all devices.
    pub fn limited_count(&self) -> usize {
        self.nlim
    }

    /// Values of every limited expression at `x`.
    pub fn limited_values(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nlim);
        for s in &self.stamps {
            if s.model.nlim() > 0 {
                let (xl, yl) = s.local(x);
                out.extend(s.model.limited_values(&xl, &yl));
            }
        }
        out
    }

    /// Apply each device's limiter to the proposed point `x`, relative to the
    /// previous limited values.
    pub fn limit(&self, x: &[f64], previous: &[f64]) -> Vec<f64> {
        let proposed = self.limited_values(x);
        let mut out = Vec::with_capacity(self.nlim);
        for s in &self.stamps {
            for (j, spec) in s.model.limited_vars.iter().enumerate() {
                let k = s.lim_offset + j;
                out.push(limit_step(spec, proposed[k], previous[k]));
            }
        }
        out
    }

    /// Evaluate `f`, `q` and their Jacobians.
    ///
    /// With `xlim`, every limited expression is evaluated at its substituted
    /// value and `f`, `q` are the linearizations about that point carried
    /// back to `x`; the Jacobians chain through the limited expressions.
    pub fn eval(
        &self,
        x: &[f64],
        inputs: &[f64],
        xlim: Option<&[f64]>,
    ) -> Result<Assembled, EngineError> {
        let n = self.n();
        let mut f = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut g = Triplets::new(n);
        let mut c = Triplets::new(n);
        let mut f_u = vec![vec![0.0; n]; self.sources.len()];
        let gmin = self.tol.gmin;

        for s in &self.stamps {
            let (xl, yl) = s.local(x);
            let u: Vec<f64> = s.input.map(|k| inputs[k]).into_iter().collect();
            let exact = s.model.limited_values(&xl, &yl);
            let lim = match xlim {
                Some(all) => all[s.lim_offset..s.lim_offset + s.model.nlim()].to_vec(),
                None => exact.clone(),
            };
            let r = s
                .model
                .evaluate(&xl, &yl, &u, &lim)
                .map_err(|source| EngineError::Model {
                    instance: s.name.clone(),
                    source,
                })?;
            let jac = r.total_jacobians(&s.model.limited_vars);
            let delta: Vec<f64> = exact.iter().zip(&lim).map(|(e, l)| e - l).collect();
            let correct = |value: f64, partials: &nalgebra::DMatrix<f64>, row: usize| {
                value
                    + delta
                        .iter()
                        .enumerate()
                        .map(|(j, d)| partials[(row, j)] * d)
                        .sum::<f64>()
            };
            let fe = correct(r.fe[0], &r.fe_lim, 0);
            let qe = correct(r.qe[0], &r.qe_lim, 0);
            let xmap = s.x_map();
            let ymap = |j: usize| s.internal + j;
            let terminals = s.terminal_map();

            match s.branch {
                None => {
                    // explicit output is the current from pos to neg
                    for &(row, sign) in &terminals {
                        f[row] += sign * fe;
                        q[row] += sign * qe;
                        for &(col, cs) in &xmap {
                            g.push(row, col, sign * cs * jac.fe_x[(0, 0)]);
                            c.push(row, col, sign * cs * jac.qe_x[(0, 0)]);
                        }
                        for j in 0..s.ny() {
                            g.push(row, ymap(j), sign * jac.fe_y[(0, j)]);
                            c.push(row, ymap(j), sign * jac.qe_y[(0, j)]);
                        }
                        if let Some(k) = s.input {
                            f_u[k][row] += sign * r.fe_u[(0, 0)];
                        }
                    }
                }
                Some(b) => {
                    // branch current enters KCL; the branch row reads
                    // vpn - (d/dt qe + fe) = 0
                    let ib = x[b];
                    for &(row, sign) in &terminals {
                        f[row] += sign * ib;
                        g.push(row, b, sign);
                    }
                    let vpn: f64 = terminals.iter().map(|&(i, sg)| sg * x[i]).sum();
                    f[b] += vpn - fe;
                    q[b] -= qe;
                    for &(col, sign) in &terminals {
                        g.push(b, col, sign);
                    }
                    g.push(b, b, -jac.fe_x[(0, 0)]);
                    c.push(b, b, -jac.qe_x[(0, 0)]);
                    for j in 0..s.ny() {
                        g.push(b, ymap(j), -jac.fe_y[(0, j)]);
                        c.push(b, ymap(j), -jac.qe_y[(0, j)]);
                    }
                    if let Some(k) = s.input {
                        f_u[k][b] -= r.fe_u[(0, 0)];
                    }
                }
            }

            for i in 0..s.ny() {
                let row = ymap(i);
                f[row] += correct(r.fi[i], &r.fi_lim, i);
                q[row] += correct(r.qi[i], &r.qi_lim, i);
                for &(col, cs) in &xmap {
                    g.push(row, col, cs * jac.fi_x[(i, 0)]);
                    c.push(row, col, cs * jac.qi_x[(i, 0)]);
                }
                for j in 0..s.ny() {
                    g.push(row, ymap(j), jac.fi_y[(i, j)]);
                    c.push(row, ymap(j), jac.qi_y[(i, j)]);
                }
                if let Some(k) = s.input {
                    f_u[k][row] += r.fi_u[(i, 0)];
                }
            }

            // GMIN across the terminal pair
            let vpn: f64 = terminals.iter().map(|&(i, sg)| sg * x[i]).sum();
            for &(row, rs) in &terminals {
                f[row] += rs * gmin * vpn;
                for &(col, cs) in &terminals {
                    g.push(row, col, rs * cs * gmin);
                }
            }
        }

        Ok(Assembled { f, q, g, c, f_u })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SourceWaveform;

    fn divider() -> Circuit {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(1.0))
            .add("R1", DeviceKind::Resistor, "1", "0", &[("r", 1.0)]);
        c
    }

    #[test]
    fn layout_nodes_then_branches_then_internals() {
        let mut c = divider();
        c.add("H1", DeviceKind::Hys, "1", "0", &[]);
        let dae = assemble(&c, Tolerances::default()).unwrap();
        assert_eq!(dae.unknown_names(), vec!["v(1)", "i(V1)", "s(H1)"]);
        assert_eq!(dae.unknowns()[2].kind, UnknownKind::Internal);
    }

    #[test]
    fn resistor_source_residual_vanishes_at_solution() {
        let dae = assemble(&divider(), Tolerances::default()).unwrap();
        let x = [1.0, -1.0];
        let a = dae.eval(&x, &dae.dc_inputs(), None).unwrap();
        // the only leftover is GMIN current across the two devices
        assert!(a.f.iter().all(|v| v.abs() < 1e-11));
        let g = a.g.to_dense();
        assert!((g[(0, 0)] - (1.0 + 2e-12)).abs() < 1e-15);
        assert_eq!(g[(0, 1)], 1.0);
        assert_eq!(g[(1, 0)], 1.0);
        assert_eq!(a.f_u[0], vec![0.0, -1.0]);
    }

    #[test]
    fn floating_node_is_named() {
        let mut c = divider();
        c.add("R2", DeviceKind::Resistor, "a", "b", &[]);
        assert_eq!(
            assemble(&c, Tolerances::default()).unwrap_err(),
            EngineError::FloatingNode("a".into())
        );
    }

    #[test]
    fn capacitor_path_counts_with_gmin() {
        let mut c = divider();
        c.add("C1", DeviceKind::Capacitor, "1", "2", &[]).add(
            "C2",
            DeviceKind::Capacitor,
            "2",
            "0",
            &[],
        );
        assert!(assemble(&c, Tolerances::default()).is_ok());
    }

    #[test]
    fn duplicate_and_bad_tolerances() {
        let mut c = divider();
        c.add("r1", DeviceKind::Resistor, "1", "0", &[]);
        assert!(matches!(
            assemble(&c, Tolerances::default()),
            Err(EngineError::DuplicateInstance(_))
        ));
        let tol = Tolerances {
            gmin: 0.0,
            ..Tolerances::default()
        };
        assert!(matches!(
            assemble(&divider(), tol),
            Err(EngineError::Tolerance { name: "gmin", .. })
        ));
    }

    #[test]
    fn rram_state_row_is_scaled() {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(0.0))
            .add("X1", DeviceKind::Rram, "1", "0", &[]);
        let dae = assemble(&c, Tolerances::default()).unwrap();
        let k = dae.unknown_index("gap(X1)").unwrap();
        let a = dae.eval(&[0.0, 0.0, 0.85], &[0.0], None).unwrap();
        assert_eq!(a.c.to_dense()[(k, k)], -1e-9);
    }

    #[test]
    fn limited_evaluation_linearizes_back_to_x() {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(3.0))
            .add("D1", DeviceKind::SinhDev, "1", "0", &[]);
        let dae = assemble(&c, Tolerances::default()).unwrap();
        let x = [3.0, 0.0];
        let lim = [1.0];
        let a = dae.eval(&x, &[3.0], Some(&lim)).unwrap();
        // sinh(1) + cosh(1) * (3 - 1), plus GMIN across both devices
        let expected = 1f64.sinh() + 1f64.cosh() * 2.0 + 6e-12;
        assert!((a.f[0] - expected).abs() < 1e-12);
        assert!((a.g.to_dense()[(0, 0)] - (1f64.cosh() + 2e-12)).abs() < 1e-12);
    }
}
