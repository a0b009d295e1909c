//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! the measured quantities; the process exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use memsim::analyses::{
    ac_sweep, dc_sweep, detect_period, homotopy, sweep_values, transient, CurveSet,
    HomotopyOptions, TransientOptions,
};
use memsim::circuit::{Circuit, IntegrationMethod, SourceWaveform};
use memsim::devices::{
    build_device, memristor_f1, memristor_f2, resolve_params, DeviceKind, MemristorParams,
    RramParams,
};
use memsim::dual::Dual;
use memsim::engine::{assemble, DaeSystem, Tolerances};
use memsim::linsolve::Triplets;
use memsim::modspec::check_jacobians;
use memsim::runner::sinhlim_benchmark;
use memsim::solver::{newton_solve, NewtonOptions, StepEquations};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn triangle(amp: f64, period: f64) -> SourceWaveform {
    SourceWaveform::Pwl(vec![
        (0.0, 0.0),
        (period / 4.0, amp),
        (0.75 * period, -amp),
        (period, 0.0),
    ])
}

fn two_terminal(kind: DeviceKind, name: &str, wave: SourceWaveform) -> DaeSystem {
    let mut c = Circuit::new();
    c.add_source("V1", DeviceKind::VSource, "1", "0", wave)
        .add(name, kind, "1", "0", &[]);
    assemble(&c, Tolerances::default()).unwrap()
}

fn limiting_benchmark() -> Outcome {
    let rows = sinhlim_benchmark().map_err(|e| e.to_string())?;
    let limited: Vec<Option<usize>> = rows.iter().map(|r| r.limited).collect();
    let unlimited: Vec<Option<usize>> = rows.iter().map(|r| r.unlimited).collect();
    let detail = format!("with sinhlim {limited:?}, without {unlimited:?}");

    let lim: Option<Vec<usize>> = limited.iter().copied().collect();
    let lim_ok = lim.is_some_and(|c| {
        let (lo, hi) = (c.iter().min().unwrap(), c.iter().max().unwrap());
        *hi <= 6 && hi - lo <= 1
    });
    let targets = [4usize, 9, 50];
    let unlim_ok = unlimited[..3]
        .iter()
        .zip(targets)
        .all(|(c, t)| c.is_some_and(|c| c.abs_diff(t) <= 2))
        && unlimited[..3].windows(2).all(|w| w[0] < w[1])
        && unlimited[3].is_none();
    ensure(lim_ok && unlim_ok, detail)
}

/// Point on the curve at `lambda`, refined from a linear interpolation
/// between the two samples that bracket it.
fn curve_point(dae: &DaeSystem, curve: &CurveSet, k: usize, lambda: f64) -> Option<Vec<f64>> {
    let (l0, l1) = (curve.lambdas[k], curve.lambdas[k + 1]);
    let w = (lambda - l0) / (l1 - l0);
    let guess: Vec<f64> = curve.states[k]
        .iter()
        .zip(&curve.states[k + 1])
        .map(|(a, b)| a + w * (b - a))
        .collect();
    let mut inputs = dae.dc_inputs();
    inputs[dae.source_index(&curve.source).ok()?] = lambda;
    let r = newton_solve(
        dae,
        &StepEquations::dc(&inputs),
        &guess,
        &NewtonOptions::default(),
    )
    .ok()?;
    r.converged.then_some(r.solution)
}

fn hys_folds() -> Outcome {
    let dae = two_terminal(DeviceKind::Hys, "H1", SourceWaveform::Dc(0.0));
    let curve =
        homotopy(&dae, "V1", -1.0, 1.0, &HomotopyOptions::default()).map_err(|e| e.to_string())?;
    let si = dae.unknown_index("s(H1)").unwrap();
    let lam = 2.0 / (3.0 * 3f64.sqrt());
    let knee = 1.0 / 3f64.sqrt();
    let folds: Vec<(f64, f64)> = curve
        .folds
        .iter()
        .map(|f| (f.lambda, f.state[si]))
        .collect();

    let mut at_zero = Vec::new();
    for k in 0..curve.lambdas.len() - 1 {
        let (a, b) = (curve.lambdas[k], curve.lambdas[k + 1]);
        if a == 0.0 {
            at_zero.push(curve.states[k][si]);
        } else if a * b < 0.0 {
            if let Some(x) = curve_point(&dae, &curve, k, 0.0) {
                at_zero.push(x[si]);
            }
        }
    }
    let detail = format!(
        "{} samples, complete {}, folds (lambda, s) {folds:?}, s at lambda=0 {at_zero:?}",
        curve.lambdas.len(),
        curve.complete
    );

    let mut fold_ok = folds.len() == 2;
    for (l, s) in &folds {
        fold_ok &= (l.abs() - lam).abs() <= 0.005 && (s + l.signum() * knee).abs() <= 0.005;
    }
    fold_ok &= folds.len() == 2 && folds[0].0.signum() != folds[1].0.signum();
    let mut sorted = at_zero.clone();
    sorted.sort_by(f64::total_cmp);
    let zero_ok = sorted.len() == 3
        && sorted
            .iter()
            .zip([-1.0, 0.0, 1.0])
            .all(|(s, e)| (s - e).abs() <= 1e-4);
    ensure(curve.complete && fold_ok && zero_ok, detail)
}

fn hys_hysteresis() -> Outcome {
    let jump = 2.0 / (3.0 * 3f64.sqrt());

    // DC up then down
    let dae = two_terminal(DeviceKind::Hys, "H1", SourceWaveform::Dc(0.0));
    let values = sweep_values(-1.0, 1.0, 0.01, true).map_err(|e| e.to_string())?;
    let sweep =
        dc_sweep(&dae, "V1", &values, &NewtonOptions::default()).map_err(|e| e.to_string())?;
    let s = sweep.column("s(H1)").unwrap();
    let half = values.len() / 2;
    let zero = |range: std::ops::Range<usize>| {
        range.into_iter().find(|&k| values[k].abs() < 1e-9).unwrap()
    };
    let dc_gap = (s[zero(0..half)] - s[zero(half..values.len())]).abs();
    let mut dc_jumps = Vec::new();
    for k in 1..values.len() {
        if s[k].signum() != s[k - 1].signum() {
            dc_jumps.push(values[k]);
        }
    }

    // slow triangle from the lower branch
    let dae = two_terminal(DeviceKind::Hys, "H1", triangle(1.0, 0.1));
    let mut o = TransientOptions::new(2e-5, 0.1, IntegrationMethod::BackwardEuler);
    o.ic = vec![("s(H1)".into(), -1.0)];
    let run = transient(&dae, &o).map_err(|e| e.to_string())?;
    let t = &run.waveform.times;
    let v = run.waveform.column("v(1)").unwrap();
    let ts = run.waveform.column("s(H1)").unwrap();
    let near = |target: f64| {
        (0..t.len())
            .min_by(|&a, &b| (t[a] - target).abs().total_cmp(&(t[b] - target).abs()))
            .unwrap()
    };
    let tran_gap = (ts[near(0.05)] - ts[near(0.1)]).abs();
    let mut tran_jumps = Vec::new();
    for k in 1..t.len() {
        if ts[k].signum() != ts[k - 1].signum() {
            tran_jumps.push(v[k]);
        }
    }

    let located = |jumps: &[f64]| {
        jumps.len() == 2
            && jumps.iter().any(|j| (j - jump).abs() <= 0.02)
            && jumps.iter().any(|j| (j + jump).abs() <= 0.02)
    };
    let detail = format!(
        "DC: all converged {}, s gap at 0 V {dc_gap:.4}, jumps {dc_jumps:?}; transient: complete {}, s gap at 0 V {tran_gap:.4}, jumps {tran_jumps:?}",
        sweep.all_converged(),
        run.completed()
    );
    ensure(
        sweep.all_converged()
            && run.completed()
            && dc_gap >= 1.5
            && tran_gap >= 1.5
            && located(&dc_jumps)
            && located(&tran_jumps),
        detail,
    )
}

fn rram_well_posed() -> Outcome {
    let tol = Tolerances::default();
    let p = RramParams::from_map(&resolve_params(DeviceKind::Rram, &[]).unwrap()).unwrap();
    let band = 3.0 * p.smooth.smoothing().sqrt();

    // (a) and (c): triangular transient
    let period = 100.0;
    let dae = two_terminal(DeviceKind::Rram, "X1", triangle(1.0, period));
    let mut o = TransientOptions::new(period / 1e4, period, IntegrationMethod::BackwardEuler);
    o.ic = vec![("gap(X1)".into(), p.max_gap)];
    let run = transient(&dae, &o).map_err(|e| e.to_string())?;
    let gap = run.waveform.column("gap(X1)").unwrap();
    let v = run.waveform.column("v(1)").unwrap();
    let i = run.waveform.column("i(V1)").unwrap();
    let (gmin, gmax) = gap
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), g| {
            (a.min(*g), b.max(*g))
        });
    let band_ok = run.completed() && gmin >= p.min_gap - band && gmax <= p.max_gap + band;
    let mut pinch: f64 = 0.0;
    let mut crossings = 0;
    for k in 1..v.len() {
        if v[k] == 0.0 {
            pinch = pinch.max(i[k].abs());
            crossings += 1;
        } else if v[k - 1] != 0.0 && v[k].signum() != v[k - 1].signum() {
            let w = v[k - 1] / (v[k - 1] - v[k]);
            pinch = pinch.max((i[k - 1] + w * (i[k] - i[k - 1])).abs());
            crossings += 1;
        }
    }
    let pinch_ok = crossings >= 2 && pinch <= 10.0 * tol.abstol_i;

    // (b): DC up and down
    let values = sweep_values(-1.0, 1.0, 0.03, true).map_err(|e| e.to_string())?;
    let opts = NewtonOptions {
        initial_guess: Some(vec![-1.0, 0.0, p.max_gap]),
        ..NewtonOptions::default()
    };
    let sweep = dc_sweep(&dae, "V1", &values, &opts).map_err(|e| e.to_string())?;
    let g = sweep.column("gap(X1)").unwrap();
    let m = g.len();
    let spread = (0..m / 2)
        .map(|k| (g[k] - g[m - 1 - k]).abs())
        .fold(0.0, f64::max);
    let sweep_ok = sweep.all_converged() && spread <= 10.0 * tol.reltol * p.max_gap;

    // (d): continuation
    let curve =
        homotopy(&dae, "V1", -1.0, 1.0, &HomotopyOptions::default()).map_err(|e| e.to_string())?;
    let fold_ok = curve.complete && curve.folds.is_empty();

    let detail = format!(
        "(a) gap in [{gmin:.3e}, {gmax:.6}] vs band {band:.0e} {}; (b) up/down spread {spread:.1e} ({} points converged) {}; (c) |i| at {crossings} zero crossings {pinch:.1e} {}; (d) {} folds, complete {} {}",
        mark(band_ok),
        sweep.points.iter().filter(|p| p.converged).count(),
        mark(sweep_ok),
        mark(pinch_ok),
        curve.folds.len(),
        curve.complete,
        mark(fold_ok),
    );
    ensure(band_ok && sweep_ok && pinch_ok && fold_ok, detail)
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

fn memristor_family() -> Outcome {
    let mut problems = Vec::new();
    let mut evaluations = 0usize;
    for f1 in 1..=5u8 {
        for f2 in 1..=6u8 {
            let overrides = [
                ("f1_switch".to_string(), f64::from(f1)),
                ("f2_switch".to_string(), f64::from(f2)),
            ];
            let dev = build_device(DeviceKind::Memristor, &overrides).unwrap();
            let p = MemristorParams::from_map(
                &resolve_params(DeviceKind::Memristor, &overrides).unwrap(),
            )
            .unwrap();
            let delta = 3.0 * p.smooth.smoothing().sqrt();
            let mut finite = true;
            let mut signs = true;
            let mut pinched = true;
            for v in grid(101, -2.0, 2.0) {
                for s in grid(101, -0.5, 1.5) {
                    evaluations += 1;
                    match dev.evaluate_unlimited(&[v], &[s], &[]) {
                        Ok(e) => {
                            finite &= [
                                e.fe_x[(0, 0)],
                                e.fe_y[(0, 0)],
                                e.fi_x[(0, 0)],
                                e.fi_y[(0, 0)],
                            ]
                            .iter()
                            .all(|x| x.is_finite())
                        }
                        Err(_) => finite = false,
                    }
                    let f = memristor_f2(Dual::<1>::constant(v), Dual::constant(s), &p).value;
                    if s < -delta {
                        signs &= f > 0.0;
                    } else if s > 1.0 + delta {
                        signs &= f < 0.0;
                    }
                }
            }
            for s in grid(101, -0.5, 1.5) {
                pinched &=
                    memristor_f1(Dual::<1>::constant(0.0), Dual::constant(s), &p).value == 0.0;
            }
            for (ok, what) in [
                (finite, "non-finite"),
                (signs, "boundary sign"),
                (pinched, "not pinched"),
            ] {
                if !ok {
                    problems.push(format!("({f1},{f2}) {what}"));
                }
            }
        }
    }
    let detail = format!("30 combinations, {evaluations} grid points, problems {problems:?}");
    ensure(problems.is_empty(), detail)
}

fn dense(t: &Triplets) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; t.n]; t.n];
    for &(r, c, v) in &t.entries {
        m[r][c] += v;
    }
    m
}

fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new();
    c.add_source(
        "V1",
        DeviceKind::VSource,
        "1",
        "0",
        SourceWaveform::Dc(rng.gen_range(-1.0..1.0)),
    );
    for n in 1..4 {
        c.add(
            &format!("Rg{n}"),
            DeviceKind::Resistor,
            &n.to_string(),
            "0",
            &[("r", 1e3)],
        );
    }
    for k in 0..rng.gen_range(2..6) {
        let a = rng.gen_range(0..4).to_string();
        let b = rng.gen_range(0..4).to_string();
        let name = format!("X{k}");
        match rng.gen_range(0..7) {
            0 => c.add(
                &name,
                DeviceKind::Resistor,
                &a,
                &b,
                &[("r", rng.gen_range(10.0..1e4))],
            ),
            1 => c.add(
                &name,
                DeviceKind::Capacitor,
                &a,
                &b,
                &[("c", rng.gen_range(1e-9..1e-3))],
            ),
            2 => c.add(
                &name,
                DeviceKind::Inductor,
                &a,
                &b,
                &[("l", rng.gen_range(1e-6..1e-1))],
            ),
            3 => c.add(
                &name,
                DeviceKind::SinhDev,
                &a,
                &b,
                &[("k", rng.gen_range(0.5..2.0))],
            ),
            4 => c.add(&name, DeviceKind::Hys, &a, &b, &[]),
            5 => c.add(&name, DeviceKind::Rram, &a, &b, &[]),
            _ => c.add(
                &name,
                DeviceKind::Memristor,
                &a,
                &b,
                &[
                    ("f1_switch", f64::from(rng.gen_range(1u8..=5))),
                    ("f2_switch", f64::from(rng.gen_range(1u8..=6))),
                ],
            ),
        };
    }
    c
}

fn circuit_jacobian_error(dae: &DaeSystem, rng: &mut ChaCha8Rng) -> f64 {
    let n = dae.n();
    let x: Vec<f64> = dae
        .unknown_names()
        .iter()
        .map(|name| {
            let r = rng.gen_range(-0.4..0.4);
            if name.starts_with("gap(") {
                1.0 + r
            } else if name.starts_with("s(") {
                0.5 + r
            } else {
                r
            }
        })
        .collect();
    let inputs = dae.dc_inputs();
    let a = dae.eval(&x, &inputs, None).unwrap();
    let (g, c) = (dense(&a.g), dense(&a.c));
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[j] += h;
        xm[j] -= h;
        let p = dae.eval(&xp, &inputs, None).unwrap();
        let m = dae.eval(&xm, &inputs, None).unwrap();
        for i in 0..n {
            for (jac, plus, minus) in [(&g, &p.f, &m.f), (&c, &p.q, &m.q)] {
                let scale = jac[i].iter().fold(0.0f64, |s, v| s.max(v.abs()));
                let fd = (plus[i] - minus[i]) / (2.0 * h);
                let noise = 64.0 * f64::EPSILON * plus[i].abs().max(minus[i].abs()) / h;
                let denom = jac[i][j]
                    .abs()
                    .max(fd.abs())
                    .max(1e-9 * scale)
                    .max(f64::MIN_POSITIVE);
                worst = worst.max(((fd - jac[i][j]).abs() - noise).max(0.0) / denom);
            }
        }
    }
    worst
}

fn jacobian_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut device_worst = Vec::new();
    for kind in DeviceKind::MODELS {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let v = rng.gen_range(-2.0..2.0);
            let (overrides, y): (Vec<(String, f64)>, Vec<f64>) = match kind {
                DeviceKind::Memristor => {
                    let f1 = f64::from(rng.gen_range(1u8..=5));
                    let f2 = f64::from(rng.gen_range(1u8..=6));
                    let s = rng.gen_range(0.02..0.98);
                    (
                        vec![("f1_switch".into(), f1), ("f2_switch".into(), f2)],
                        vec![s],
                    )
                }
                DeviceKind::Hys => (vec![], vec![rng.gen_range(-1.5..1.5)]),
                DeviceKind::Rram => (vec![], vec![rng.gen_range(0.3..1.6)]),
                _ => (vec![], vec![]),
            };
            let dev = build_device(kind, &overrides).unwrap();
            // explicit device inputs: branch voltage, or branch current for sources
            let x: Vec<f64> = (0..dev.nx()).map(|_| v).collect();
            let u: Vec<f64> = (0..dev.nu()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut y = y;
            y.resize(dev.ny(), 0.0);
            if let Ok(e) = check_jacobians(&dev, &x, &y, &u, 1e-6) {
                worst = worst.max(e);
            } else {
                worst = f64::INFINITY;
            }
        }
        device_worst.push((kind, worst));
    }
    let mut circuit_worst: f64 = 0.0;
    for _ in 0..10 {
        let dae = assemble(&random_circuit(&mut rng), Tolerances::default()).unwrap();
        circuit_worst = circuit_worst.max(circuit_jacobian_error(&dae, &mut rng));
    }
    let devices: Vec<String> = device_worst
        .iter()
        .map(|(k, w)| format!("{k} {w:.1e}"))
        .collect();
    let detail = format!(
        "worst relative error per device [{}]; 10 circuits {circuit_worst:.1e}",
        devices.join(", ")
    );
    ensure(
        device_worst.iter().all(|(_, w)| *w <= 1e-5) && circuit_worst <= 1e-5,
        detail,
    )
}

fn rc_circuit() -> DaeSystem {
    let mut c = Circuit::new();
    c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(1.0))
        .add("R1", DeviceKind::Resistor, "1", "2", &[("r", 1e3)])
        .add("C1", DeviceKind::Capacitor, "2", "0", &[("c", 1e-6)]);
    assemble(&c, Tolerances::default()).unwrap()
}

fn integrator_accuracy() -> Outcome {
    let rc = 1e-3;
    let dae = rc_circuit();
    let step_error = |dt: f64| -> Result<f64, String> {
        let mut o = TransientOptions::new(dt, 5.0 * rc, IntegrationMethod::Trapezoidal);
        o.ic = vec![("v(2)".into(), 0.0)];
        let run = transient(&dae, &o).map_err(|e| e.to_string())?;
        if !run.completed() {
            return Err(format!("transient stopped: {:?}", run.failure));
        }
        let v = run.waveform.column("v(2)").unwrap();
        Ok(run
            .waveform
            .times
            .iter()
            .zip(&v)
            .map(|(t, v)| (v - (1.0 - (-t / rc).exp())).abs())
            .fold(0.0, f64::max))
    };
    let e1 = step_error(rc / 100.0)?;
    let e2 = step_error(rc / 200.0)?;
    let ratio = e1 / e2;

    let op = memsim::solver::dc_operating_point(&dae, &NewtonOptions::default())
        .map_err(|e| e.to_string())?;
    let corner = 1.0 / (2.0 * std::f64::consts::PI * rc);
    let ac = ac_sweep(&dae, &op.solution, "V1", &[corner]).map_err(|e| e.to_string())?;
    let h = ac.column("v(2)").unwrap()[0].norm();
    let h_err = (h - std::f64::consts::FRAC_1_SQRT_2).abs();

    let detail = format!(
        "max error {:.3}% of final value at dt = RC/100, ratio {ratio:.3} on halving; |H(1/RC)| = {h:.9} (off by {h_err:.1e})",
        e1 * 100.0
    );
    ensure(
        e1 < 0.01 && (3.0..=5.0).contains(&ratio) && h_err <= 1e-6,
        detail,
    )
}

fn oscillator() -> Outcome {
    let mut c = Circuit::new();
    c.add_source("V1", DeviceKind::VSource, "1", "0", SourceWaveform::Dc(2.0))
        .add("R1", DeviceKind::Resistor, "1", "2", &[("r", 1e4)])
        .add("C1", DeviceKind::Capacitor, "2", "0", &[("c", 1e-6)])
        .add(
            "M1",
            DeviceKind::Memristor,
            "2",
            "0",
            &[
                ("f1_switch", 2.0),
                ("f2_switch", 5.0),
                ("Ron", 1e3),
                ("Ap", 1e3),
                ("An", 1e3),
                ("Vp", 1.0),
                ("Vn", -0.5),
            ],
        );
    let dae = assemble(&c, Tolerances::default()).unwrap();
    let abstol = dae.tolerances().abstol_v;
    let estimate = |dt: f64| -> Result<(Option<f64>, f64, bool), String> {
        let mut o = TransientOptions::new(dt, 0.12, IntegrationMethod::BackwardEuler);
        o.ic = vec![("v(2)".into(), 0.0), ("s(M1)".into(), 0.5)];
        let run = transient(&dae, &o).map_err(|e| e.to_string())?;
        if !run.completed() {
            return Err(format!("transient stopped: {:?}", run.failure));
        }
        let s = run.waveform.column("s(M1)").unwrap();
        let est = detect_period(&run.waveform.times, &s, abstol);
        Ok((est.period, est.correlation, est.is_periodic()))
    };
    let (p1, c1, ok1) = estimate(2e-5)?;
    let (p2, c2, ok2) = estimate(1e-5)?;
    let agree = match (p1, p2) {
        (Some(a), Some(b)) => (a - b).abs() <= 0.05 * b,
        _ => false,
    };
    let detail = format!(
        "dt 20us: period {p1:?} correlation {c1:.5}; dt 10us: period {p2:?} correlation {c2:.5}"
    );
    ensure(ok1 && ok2 && c1 >= 0.99 && c2 >= 0.99 && agree, detail)
}

fn main() -> ExitCode {
    let checks: [Check; 8] = [
        (
            "1 limiting benchmark",
            limiting_benchmark,
            Duration::from_secs(1),
        ),
        ("2 hys fold structure", hys_folds, Duration::from_secs(5)),
        ("3 hys hysteresis", hys_hysteresis, Duration::from_secs(10)),
        (
            "4 rram well-posedness",
            rram_well_posed,
            Duration::from_secs(10),
        ),
        (
            "5 memristor family",
            memristor_family,
            Duration::from_secs(30),
        ),
        (
            "6 jacobian correctness",
            jacobian_correctness,
            Duration::from_secs(10),
        ),
        (
            "7 integrator accuracy",
            integrator_accuracy,
            Duration::from_secs(5),
        ),
        ("8 oscillator", oscillator, Duration::from_secs(20)),
    ];
    let mut failed = 0;
    for (name, check, budget) in checks {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let in_time = took <= budget;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        let timing = format!("{:.2}s of {}s", took.as_secs_f64(), budget.as_secs());
        let timing = if in_time {
            timing
        } else {
            format!("{timing}, over budget")
        };
        println!(
            "{} {name}: {detail} [{timing}]",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
