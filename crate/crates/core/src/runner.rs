//! Execute a parsed netlist's directives and write their results as CSV.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analyses::{
    ac_sweep, dc_sweep, homotopy, log_frequencies, sweep_values, transient, AnalysisError,
    HomotopyOptions, TransientOptions,
};
use crate::circuit::Analysis;
use crate::engine::{assemble, DaeSystem, EngineError, Tolerances};
use crate::netlist::{format_number, Diagnostic, NetlistDocument};
use crate::solver::{dc_operating_point, NewtonOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub tolerances: Tolerances,
    pub limiting: bool,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            tolerances: Tolerances::default(),
            limiting: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("netlist has {} error(s); first: {}", .0.len(), .0[0])]
    Netlist(Vec<Diagnostic>),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// What a run produced. Analyses that fail still write what they computed;
/// their messages land in `failures`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A rectangular result: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

struct Outcome {
    table: Table,
    /// Extra file written next to the main one, with this suffix on its stem.
    sidecar: Option<(&'static str, Table)>,
    failure: Option<String>,
}

/// Check a document and assemble its circuit without running anything.
pub fn check(doc: &NetlistDocument, tol: Tolerances) -> Result<DaeSystem, RunError> {
    if !doc.is_ok() {
        return Err(RunError::Netlist(doc.diagnostics.clone()));
    }
    Ok(assemble(&doc.circuit, tol)?)
}

/// Run every directive in order. `.op` tables go to `out`.
pub fn run(
    doc: &NetlistDocument,
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<RunReport, RunError> {
    let dae = check(doc, opts.tolerances)?;
    let newton = NewtonOptions {
        limiting: opts.limiting,
        ..NewtonOptions::default()
    };
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(&opts.out_dir).map_err(io_err(&opts.out_dir))?;

    let mut report = RunReport::default();
    let mut counts: HashMap<&'static str, usize> = HashMap::new();
    let analyses = &doc.circuit.analyses;
    for (k, analysis) in analyses.iter().enumerate() {
        if matches!(analysis, Analysis::PrintCsv(_)) {
            continue;
        }
        let kind = analysis.kind_name();
        let n = counts.entry(kind).or_default();
        *n += 1;
        let label = format!("{kind}{n}");
        let outcome = match execute(&dae, analysis, &newton) {
            Ok(o) => o,
            Err(e) => {
                report.failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        if let Some(msg) = &outcome.failure {
            report.failures.push(format!("{label}: {msg}"));
        }
        let bound = match analyses.get(k + 1) {
            Some(Analysis::PrintCsv(p)) => Some(opts.out_dir.join(p)),
            _ => None,
        };
        if matches!(analysis, Analysis::Op) {
            print_op(&outcome.table, out).map_err(io_err(Path::new("<stdout>")))?;
            if bound.is_none() {
                continue;
            }
        }
        let path = bound.unwrap_or_else(|| opts.out_dir.join(format!("{label}.csv")));
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, outcome.table.to_csv()).map_err(io_err(&path))?;
        report.files.push(path.clone());
        if let Some((suffix, table)) = outcome.sidecar {
            let stem = path
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let side = path.with_file_name(format!("{stem}{suffix}.csv"));
            fs::write(&side, table.to_csv()).map_err(io_err(&side))?;
            report.files.push(side);
        }
    }
    Ok(report)
}

fn print_op(table: &Table, out: &mut dyn Write) -> io::Result<()> {
    let width = table.header.iter().map(|h| h.len()).max().unwrap_or(0);
    for (name, value) in table.header.iter().zip(&table.rows[0]) {
        writeln!(out, "{name:<width$}  {}", format_number(*value))?;
    }
    Ok(())
}

fn execute(
    dae: &DaeSystem,
    analysis: &Analysis,
    newton: &NewtonOptions,
) -> Result<Outcome, AnalysisError> {
    let names = dae.unknown_names();
    let with_axis = |axis: &str| {
        let mut h = vec![axis.to_string()];
        h.extend(names.iter().cloned());
        h
    };
    match analysis {
        Analysis::Op => {
            let rep = dc_operating_point(dae, newton)?;
            let failure = (!rep.converged)
                .then(|| format!("no convergence in {} iterations", rep.iterations));
            Ok(Outcome {
                table: Table {
                    header: names.clone(),
                    rows: vec![rep.solution],
                },
                sidecar: None,
                failure,
            })
        }
        Analysis::Dc {
            source,
            start,
            stop,
            step,
            updown,
        } => {
            let values = sweep_values(*start, *stop, *step, *updown)?;
            let sweep = dc_sweep(dae, source, &values, newton)?;
            let mut header = with_axis(&sweep.source);
            header.push("converged".into());
            let rows = sweep
                .points
                .iter()
                .map(|p| {
                    let mut r = vec![p.value];
                    r.extend(&p.solution);
                    r.push(if p.converged { 1.0 } else { 0.0 });
                    r
                })
                .collect();
            let failed = sweep.points.iter().filter(|p| !p.converged).count();
            Ok(Outcome {
                table: Table { header, rows },
                sidecar: None,
                failure: (failed > 0).then(|| format!("{failed} sweep point(s) did not converge")),
            })
        }
        Analysis::Tran {
            dt,
            tstop,
            method,
            ic,
        } => {
            let opts = TransientOptions {
                ic: ic.clone(),
                newton: newton.clone(),
                ..TransientOptions::new(*dt, *tstop, *method)
            };
            let res = transient(dae, &opts)?;
            let w = &res.waveform;
            let rows = w
                .times
                .iter()
                .zip(&w.rows)
                .map(|(t, r)| {
                    let mut row = vec![*t];
                    row.extend(r);
                    row
                })
                .collect();
            Ok(Outcome {
                table: Table {
                    header: with_axis("t"),
                    rows,
                },
                sidecar: None,
                failure: res.failure,
            })
        }
        Analysis::Ac {
            source,
            fstart,
            fstop,
            points_per_decade,
        } => {
            let op = dc_operating_point(dae, newton)?;
            if !op.converged {
                return Err(AnalysisError::Start(
                    "operating point did not converge".into(),
                ));
            }
            let freqs = log_frequencies(*fstart, *fstop, *points_per_decade)?;
            let res = ac_sweep(dae, &op.solution, source, &freqs)?;
            let mut header = vec!["freq".to_string()];
            for n in &names {
                header.push(format!("mag({n})"));
                header.push(format!("phase({n})"));
            }
            let rows = freqs
                .iter()
                .zip(&res.values)
                .map(|(f, vals)| {
                    let mut row = vec![*f];
                    for v in vals {
                        row.push(v.norm());
                        row.push(v.arg().to_degrees());
                    }
                    row
                })
                .collect();
            let failed = res.errors.iter().filter(|e| e.is_some()).count();
            Ok(Outcome {
                table: Table { header, rows },
                sidecar: None,
                failure: (failed > 0).then(|| format!("{failed} frequency point(s) were singular")),
            })
        }
        Analysis::Homotopy { source, lmin, lmax } => {
            let opts = HomotopyOptions {
                newton: newton.clone(),
                ..HomotopyOptions::default()
            };
            let curve = homotopy(dae, source, *lmin, *lmax, &opts)?;
            let rows = curve
                .lambdas
                .iter()
                .zip(&curve.states)
                .map(|(l, s)| {
                    let mut row = vec![*l];
                    row.extend(s);
                    row
                })
                .collect();
            let mut fold_header = vec!["sample".to_string()];
            fold_header.extend(with_axis("lambda"));
            let folds = Table {
                header: fold_header,
                rows: curve
                    .folds
                    .iter()
                    .map(|f| {
                        let mut row = vec![f.sample as f64, f.lambda];
                        row.extend(&f.state);
                        row
                    })
                    .collect(),
            };
            let failure = (!curve.complete).then(|| {
                curve
                    .message
                    .clone()
                    .unwrap_or_else(|| "continuation stopped early".into())
            });
            Ok(Outcome {
                table: Table {
                    header: with_axis("lambda"),
                    rows,
                },
                sidecar: Some((".folds", folds)),
                failure,
            })
        }
        Analysis::PrintCsv(_) => unreachable!("handled by the caller"),
    }
}

/// One row of the limiting benchmark: Newton iterations with and without
/// limiting, `None` where the solve did not converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub voltage: f64,
    pub limited: Option<usize>,
    pub unlimited: Option<usize>,
}

pub const BENCH_VOLTAGES: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// `V - 1 ohm - sinhdev(k=1)` from a zero guess with tight tolerances, for
/// each voltage in [`BENCH_VOLTAGES`].
pub fn sinhlim_benchmark() -> Result<Vec<BenchRow>, RunError> {
    use crate::circuit::{Circuit, SourceWaveform};
    use crate::devices::DeviceKind;

    let tol = Tolerances {
        reltol: 1e-6,
        abstol_v: 1e-12,
        abstol_i: 1e-12,
        residualtol: 1e-12,
        ..Tolerances::default()
    };
    let mut rows = Vec::new();
    for v in BENCH_VOLTAGES {
        let mut c = Circuit::new();
        c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(v))
            .add("R1", DeviceKind::Resistor, "1", "2", &[("r", 1.0)])
            .add("D1", DeviceKind::SinhDev, "2", "0", &[("k", 1.0)]);
        let dae = assemble(&c, tol)?;
        let count = |limiting: bool| {
            let opts = NewtonOptions {
                limiting,
                ..NewtonOptions::default()
            };
            match dc_operating_point(&dae, &opts) {
                Ok(r) if r.converged => Some(r.iterations),
                _ => None,
            }
        };
        rows.push(BenchRow {
            voltage: v,
            limited: count(true),
            unlimited: count(false),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    #[test]
    fn csv_layout() {
        let t = Table {
            header: vec!["t".into(), "v(1)".into()],
            rows: vec![vec![0.0, 1e-7], vec![0.5, -2.0]],
        };
        assert_eq!(t.to_csv(), "t,v(1)\n0,1e-7\n0.5,-2\n");
    }

    #[test]
    fn op_prints_and_defaults_name_files() {
        let dir = tempfile::tempdir().unwrap();
        let doc = parse_netlist(
            "V1 1 0 vsource dc=2\nR1 1 2 resistor r=1k\nR2 2 0 resistor r=1k\n.op\n.dc V1 0 1 0.5\n.dc V1 0 1 1\n.print csv sub/b.csv\n",
        );
        let mut out = Vec::new();
        let rep = run(&doc, &RunOptions::new(dir.path()), &mut out).unwrap();
        assert!(rep.success(), "{:?}", rep.failures);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("v(2)   1\n"), "{text}");
        assert_eq!(
            rep.files,
            vec![dir.path().join("dc1.csv"), dir.path().join("sub/b.csv")]
        );
        let csv = fs::read_to_string(dir.path().join("dc1.csv")).unwrap();
        assert!(csv.starts_with("V1,v(1),v(2),i(V1),converged\n0,"), "{csv}");
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn netlist_errors_stop_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let doc = parse_netlist("R1 1 0 resistor r=x\n.op");
        let err = run(&doc, &RunOptions::new(dir.path()), &mut Vec::new()).unwrap_err();
        assert!(matches!(err, RunError::Netlist(_)));
    }
}
