use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use memsim::circuit::Analysis;
use memsim::devices::{param_table, DeviceKind};
use memsim::engine::Tolerances;
use memsim::netlist::{format_number, parse_netlist, NetlistDocument};
use memsim::runner::{check, run, sinhlim_benchmark, RunError, RunOptions};

#[derive(Parser)]
#[command(
    name = "memsim",
    version,
    about = "Circuit simulator for memristor and RRAM compact models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis in a netlist and write CSV results.
    Run {
        file: PathBuf,
        /// Directory for CSV output.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        reltol: Option<f64>,
        #[arg(long = "abstol-v")]
        abstol_v: Option<f64>,
        #[arg(long = "abstol-i")]
        abstol_i: Option<f64>,
        #[arg(long)]
        residualtol: Option<f64>,
        #[arg(long)]
        gmin: Option<f64>,
        /// Turn off device limiting in every Newton solve.
        #[arg(long = "no-limiting")]
        no_limiting: bool,
    },
    /// Parse and assemble a netlist without running it.
    Check { file: PathBuf },
    /// List device kinds with their parameters and defaults.
    Models,
    /// Run a built-in benchmark.
    Bench {
        #[arg(value_enum)]
        which: Bench,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Bench {
    /// Newton iteration counts with and without sinh limiting.
    Sinhlim,
}

fn load(file: &Path) -> Result<NetlistDocument, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    Ok(parse_netlist(&text))
}

fn report(file: &Path, err: &RunError) {
    match err {
        RunError::Netlist(diags) => {
            for d in diags {
                eprintln!("{}:{}:{}: {}", file.display(), d.line, d.column, d.message);
            }
        }
        other => eprintln!("{}: {other}", file.display()),
    }
}

fn models(out: &mut dyn Write) -> io::Result<()> {
    for kind in DeviceKind::MODELS {
        writeln!(out, "{kind}")?;
        if kind.is_source() {
            writeln!(
                out,
                "  dc, amp, freq, phase (V or A, Hz, degrees), or pwl=(t v ...)"
            )?;
        }
        for p in param_table(kind) {
            let unit = if p.unit.is_empty() {
                String::new()
            } else {
                format!(" {}", p.unit)
            };
            writeln!(out, "  {:<12} {}{unit}", p.name, format_number(p.default))?;
        }
        if kind == DeviceKind::Memristor {
            writeln!(
                out,
                "  30 switch combinations: f1_switch 1..5 x f2_switch 1..6"
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            out,
            reltol,
            abstol_v,
            abstol_i,
            residualtol,
            gmin,
            no_limiting,
        } => {
            let doc = match load(&file) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            let d = Tolerances::default();
            let tolerances = Tolerances {
                reltol: reltol.unwrap_or(d.reltol),
                abstol_v: abstol_v.unwrap_or(d.abstol_v),
                abstol_i: abstol_i.unwrap_or(d.abstol_i),
                residualtol: residualtol.unwrap_or(d.residualtol),
                gmin: gmin.unwrap_or(d.gmin),
            };
            let opts = RunOptions {
                out_dir: out,
                tolerances,
                limiting: !no_limiting,
            };
            match run(&doc, &opts, &mut io::stdout().lock()) {
                Ok(rep) => {
                    for f in &rep.failures {
                        eprintln!("{}: {f}", file.display());
                    }
                    if rep.success() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    report(&file, &e);
                    ExitCode::from(1)
                }
            }
        }
        Command::Check { file } => {
            let doc = match load(&file) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            match check(&doc, Tolerances::default()) {
                Ok(dae) => {
                    let analyses = doc
                        .circuit
                        .analyses
                        .iter()
                        .filter(|a| !matches!(a, Analysis::PrintCsv(_)))
                        .count();
                    println!(
                        "{}: ok, {} instances, {} unknowns, {} analyses",
                        file.display(),
                        doc.circuit.instances.len(),
                        dae.n(),
                        analyses
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    report(&file, &e);
                    ExitCode::from(1)
                }
            }
        }
        Command::Models => match models(&mut io::stdout().lock()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
        Command::Bench {
            which: Bench::Sinhlim,
        } => match sinhlim_benchmark() {
            Ok(rows) => {
                let cell =
                    |n: Option<usize>| n.map_or("no convergence".to_string(), |n| n.to_string());
                println!("{:>6}  {:>14}  {:>14}", "V", "sinhlim", "no limiting");
                for r in rows {
                    println!(
                        "{:>6}  {:>14}  {:>14}",
                        format_number(r.voltage),
                        cell(r.limited),
                        cell(r.unlimited)
                    );
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
    }
}
