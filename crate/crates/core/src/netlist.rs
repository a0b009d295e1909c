//! Netlist text format: parsing with positioned diagnostics, and formatting
//! back to text.
//!
//! ```text
//! * comment            ; also a comment
//! V1 1 0 vsource dc=1 amp=0.5 freq=1k
//! R1 1 2 resistor r=2.5meg
//! H1 2 0 hys tau=1u
//! .tran 1u 1m method=trap ic s(H1)=-1
//! .print csv out.csv
//! ```

use std::fmt::Write as _;

use crate::circuit::{Analysis, Circuit, Instance, IntegrationMethod, SourceWaveform};
use crate::devices::{build_device, canonical_param, DeviceKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based.
    pub line: usize,
    /// 1-based character column of the offending token.
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetlistDocument {
    pub source: String,
    pub circuit: Circuit,
    pub diagnostics: Vec<Diagnostic>,
}

impl NetlistDocument {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Parse a number with an optional SPICE scale suffix (`t g meg k m u n p f`,
/// any case). Non-finite results are rejected.
pub fn parse_number(text: &str) -> Option<f64> {
    let lower = text.to_ascii_lowercase();
    const SUFFIXES: [(&str, f64); 9] = [
        ("meg", 1e6),
        ("t", 1e12),
        ("g", 1e9),
        ("k", 1e3),
        ("m", 1e-3),
        ("u", 1e-6),
        ("n", 1e-9),
        ("p", 1e-12),
        ("f", 1e-15),
    ];
    let (mantissa, scale) = SUFFIXES
        .iter()
        .find_map(|(s, k)| lower.strip_suffix(s).map(|m| (m, *k)))
        .unwrap_or((lower.as_str(), 1.0));
    // Rust accepts "inf" and "nan"; a netlist number has to start like one.
    let first = mantissa.chars().next()?;
    if !(first.is_ascii_digit() || matches!(first, '.' | '-' | '+')) {
        return None;
    }
    let value = mantissa.parse::<f64>().ok()? * scale;
    value.is_finite().then_some(value)
}

/// Shortest text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Split on whitespace, keeping parenthesized groups (which may contain
/// spaces) inside one token.
fn tokenize(line: &str) -> Result<Vec<Token<'_>>, (usize, String)> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut depth = 0usize;
    let mut open_col = 0;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        let column = col + 1;
        if ch == '(' {
            if depth == 0 {
                open_col = column;
            }
            depth += 1;
        } else if ch == ')' {
            if depth == 0 {
                return Err((column, "unmatched ')'".into()));
            }
            depth -= 1;
        }
        if ch.is_whitespace() && depth == 0 {
            if let Some((b, c)) = start.take() {
                tokens.push(Token {
                    text: &line[b..byte],
                    column: c,
                });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if depth > 0 {
        return Err((open_col, "unclosed '('".into()));
    }
    if let Some((b, c)) = start {
        tokens.push(Token {
            text: &line[b..],
            column: c,
        });
    }
    Ok(tokens)
}

struct Parser {
    line: usize,
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    fn error(&mut self, column: usize, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            line: self.line,
            column,
            message: message.into(),
        });
    }

    fn number(&mut self, tok: Token) -> Option<f64> {
        let v = parse_number(tok.text);
        if v.is_none() {
            self.error(
                tok.column,
                format!("expected a number, found '{}'", tok.text),
            );
        }
        v
    }

    /// Split `key=value`; reports and returns `None` if there is no `=`.
    fn key_value<'a>(&mut self, tok: Token<'a>) -> Option<(&'a str, Token<'a>)> {
        match tok.text.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => Some((
                k,
                Token {
                    text: v,
                    column: tok.column + k.chars().count() + 1,
                },
            )),
            _ => {
                self.error(
                    tok.column,
                    format!("expected key=value, found '{}'", tok.text),
                );
                None
            }
        }
    }

    fn device(&mut self, toks: &[Token], circuit: &Circuit) -> Option<Instance> {
        if toks.len() < 4 {
            let col = toks.last().map_or(1, |t| t.column + t.text.chars().count());
            self.error(
                col,
                "device line needs: name node+ node- kind [key=value ...]",
            );
            return None;
        }
        let name = toks[0].text;
        if circuit.instance(name).is_some() {
            self.error(toks[0].column, format!("duplicate instance '{name}'"));
            return None;
        }
        let kind: DeviceKind = match toks[3].text.parse() {
            Ok(k) => k,
            Err(e) => {
                self.error(toks[3].column, e.to_string());
                return None;
            }
        };
        let mut params = Vec::new();
        let mut source = SourceParams::default();
        let mut ok = true;
        for &tok in &toks[4..] {
            let Some((key, val)) = self.key_value(tok) else {
                ok = false;
                continue;
            };
            if kind.is_source() {
                ok &= self.source_param(&mut source, key, val, tok.column, kind);
                continue;
            }
            let Some(canon) = canonical_param(kind, key) else {
                self.error(tok.column, format!("{kind}: unknown parameter '{key}'"));
                ok = false;
                continue;
            };
            if params.iter().any(|(k, _): &(String, f64)| k == canon) {
                self.error(tok.column, format!("parameter '{canon}' given twice"));
                ok = false;
                continue;
            }
            match self.number(val) {
                Some(v) => params.push((canon.to_string(), v)),
                None => ok = false,
            }
        }
        if !ok {
            return None;
        }
        if let Err(e) = build_device(kind, &params) {
            self.error(toks[3].column, format!("{name}: {e}"));
            return None;
        }
        let waveform = if kind.is_source() {
            match source.waveform() {
                Ok(w) => Some(w),
                Err(msg) => {
                    self.error(toks[0].column, format!("{name}: {msg}"));
                    return None;
                }
            }
        } else {
            None
        };
        Some(Instance {
            name: name.to_string(),
            kind,
            pos: toks[1].text.to_ascii_lowercase(),
            neg: toks[2].text.to_ascii_lowercase(),
            params,
            waveform,
        })
    }

    fn source_param(
        &mut self,
        src: &mut SourceParams,
        key: &str,
        val: Token,
        column: usize,
        kind: DeviceKind,
    ) -> bool {
        let key = key.to_ascii_lowercase();
        if src.seen.contains(&key) {
            self.error(column, format!("parameter '{key}' given twice"));
            return false;
        }
        let slot = match key.as_str() {
            "dc" => &mut src.dc,
            "amp" => &mut src.amp,
            "freq" => &mut src.freq,
            "phase" => &mut src.phase,
            "pwl" => {
                src.seen.push(key);
                return match self.pwl(val) {
                    Some(points) => {
                        src.pwl = Some(points);
                        true
                    }
                    None => false,
                };
            }
            _ => {
                self.error(column, format!("{kind}: unknown parameter '{key}'"));
                return false;
            }
        };
        src.seen.push(key);
        match self.number(val) {
            Some(v) => {
                *slot = Some(v);
                true
            }
            None => false,
        }
    }

    fn pwl(&mut self, val: Token) -> Option<Vec<(f64, f64)>> {
        let inner = val.text.strip_prefix('(').and_then(|s| s.strip_suffix(')'));
        let Some(inner) = inner else {
            self.error(val.column, "pwl expects (t1 v1 t2 v2 ...)");
            return None;
        };
        let mut nums = Vec::new();
        for part in inner.split(|c: char| c.is_whitespace() || c == ',') {
            if part.is_empty() {
                continue;
            }
            match parse_number(part) {
                Some(v) => nums.push(v),
                None => {
                    self.error(val.column, format!("pwl: '{part}' is not a number"));
                    return None;
                }
            }
        }
        if nums.is_empty() || nums.len() % 2 != 0 {
            self.error(
                val.column,
                "pwl needs a non-empty list of (time, value) pairs",
            );
            return None;
        }
        let points: Vec<(f64, f64)> = nums.chunks(2).map(|c| (c[0], c[1])).collect();
        if points.windows(2).any(|w| w[1].0 < w[0].0) {
            self.error(val.column, "pwl times must be non-decreasing");
            return None;
        }
        Some(points)
    }

    fn directive(&mut self, toks: &[Token]) -> Option<Analysis> {
        let head = toks[0];
        let name = head.text[1..].to_ascii_lowercase();
        let args = &toks[1..];
        let want = |p: &mut Self, n: usize, usage: &str| -> bool {
            if args.len() < n {
                p.error(head.column, format!("usage: {usage}"));
                false
            } else {
                true
            }
        };
        match name.as_str() {
            "op" => {
                if let Some(extra) = args.first() {
                    self.error(extra.column, "unexpected argument to .op");
                    return None;
                }
                Some(Analysis::Op)
            }
            "dc" => {
                let usage = ".dc SRC start stop step [dir=updown]";
                if !want(self, 4, usage) {
                    return None;
                }
                let nums = self.numbers(&args[1..4])?;
                let mut updown = false;
                for &tok in &args[4..] {
                    let (k, v) = self.key_value(tok)?;
                    match (
                        k.to_ascii_lowercase().as_str(),
                        v.text.to_ascii_lowercase().as_str(),
                    ) {
                        ("dir", "updown") => updown = true,
                        ("dir", "up") => updown = false,
                        _ => {
                            self.error(tok.column, format!("unexpected '{}' ({usage})", tok.text));
                            return None;
                        }
                    }
                }
                Some(Analysis::Dc {
                    source: args[0].text.to_string(),
                    start: nums[0],
                    stop: nums[1],
                    step: nums[2],
                    updown,
                })
            }
            "tran" => {
                let usage = ".tran dt tstop [method=be|trap] [ic name=value ...]";
                if !want(self, 2, usage) {
                    return None;
                }
                let nums = self.numbers(&args[..2])?;
                let mut method = IntegrationMethod::BackwardEuler;
                let mut ic = Vec::new();
                let mut in_ic = false;
                for &tok in &args[2..] {
                    if tok.text.eq_ignore_ascii_case("ic") {
                        in_ic = true;
                        continue;
                    }
                    let (k, v) = self.key_value(tok)?;
                    if in_ic {
                        ic.push((k.to_string(), self.number(v)?));
                        continue;
                    }
                    if !k.eq_ignore_ascii_case("method") {
                        self.error(tok.column, format!("unexpected '{}' ({usage})", tok.text));
                        return None;
                    }
                    method = match v.text.to_ascii_lowercase().as_str() {
                        "be" => IntegrationMethod::BackwardEuler,
                        "trap" => IntegrationMethod::Trapezoidal,
                        _ => {
                            self.error(v.column, format!("unknown method '{}'", v.text));
                            return None;
                        }
                    };
                }
                Some(Analysis::Tran {
                    dt: nums[0],
                    tstop: nums[1],
                    method,
                    ic,
                })
            }
            "ac" => {
                if !want(self, 4, ".ac SRC fstart fstop points_per_decade") {
                    return None;
                }
                let nums = self.numbers(&args[1..3])?;
                let ppd = match args[3].text.parse::<usize>() {
                    Ok(n) if n > 0 => n,
                    _ => {
                        self.error(
                            args[3].column,
                            "points per decade must be a positive integer",
                        );
                        return None;
                    }
                };
                self.no_extra(&args[4..])?;
                Some(Analysis::Ac {
                    source: args[0].text.to_string(),
                    fstart: nums[0],
                    fstop: nums[1],
                    points_per_decade: ppd,
                })
            }
            "homotopy" => {
                if !want(self, 3, ".homotopy SRC lmin lmax") {
                    return None;
                }
                let nums = self.numbers(&args[1..3])?;
                self.no_extra(&args[3..])?;
                Some(Analysis::Homotopy {
                    source: args[0].text.to_string(),
                    lmin: nums[0],
                    lmax: nums[1],
                })
            }
            "print" => {
                if args.len() != 2 || !args[0].text.eq_ignore_ascii_case("csv") {
                    self.error(head.column, "usage: .print csv PATH");
                    return None;
                }
                Some(Analysis::PrintCsv(args[1].text.to_string()))
            }
            _ => {
                self.error(head.column, format!("unknown directive '{}'", head.text));
                None
            }
        }
    }

    fn numbers(&mut self, toks: &[Token]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(toks.len());
        for &t in toks {
            out.push(self.number(t)?);
        }
        Some(out)
    }

    fn no_extra(&mut self, toks: &[Token]) -> Option<()> {
        match toks.first() {
            Some(t) => {
                self.error(t.column, format!("unexpected '{}'", t.text));
                None
            }
            None => Some(()),
        }
    }
}

#[derive(Default)]
struct SourceParams {
    seen: Vec<String>,
    dc: Option<f64>,
    amp: Option<f64>,
    freq: Option<f64>,
    phase: Option<f64>,
    pwl: Option<Vec<(f64, f64)>>,
}

impl SourceParams {
    fn waveform(&self) -> Result<SourceWaveform, &'static str> {
        let sine = self.amp.is_some() || self.freq.is_some() || self.phase.is_some();
        if let Some(points) = &self.pwl {
            if sine || self.dc.is_some() {
                return Err("pwl cannot be combined with dc, amp, freq or phase");
            }
            return Ok(SourceWaveform::Pwl(points.clone()));
        }
        if sine {
            return Ok(SourceWaveform::Sine {
                offset: self.dc.unwrap_or(0.0),
                amplitude: self.amp.unwrap_or(0.0),
                frequency: self.freq.unwrap_or(0.0),
                phase: self.phase.unwrap_or(0.0),
            });
        }
        Ok(SourceWaveform::Dc(self.dc.unwrap_or(0.0)))
    }
}

/// Parse netlist text. Never panics; every problem becomes a diagnostic.
pub fn parse_netlist(text: &str) -> NetlistDocument {
    let mut circuit = Circuit::new();
    let mut p = Parser {
        line: 0,
        diagnostics: Vec::new(),
    };
    let mut analysis_lines: Vec<(usize, Token)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        p.line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') || trimmed.starts_with(';') {
            continue;
        }
        let toks = match tokenize(raw) {
            Ok(t) => t,
            Err((col, msg)) => {
                p.error(col, msg);
                continue;
            }
        };
        if toks[0].text.starts_with('.') {
            if toks[0].text.eq_ignore_ascii_case(".end") {
                break;
            }
            if let Some(a) = p.directive(&toks) {
                if matches!(a, Analysis::PrintCsv(_)) && circuit.analyses.is_empty() {
                    p.error(toks[0].column, ".print must follow an analysis");
                    continue;
                }
                if let Analysis::Dc { .. } | Analysis::Ac { .. } | Analysis::Homotopy { .. } = a {
                    analysis_lines.push((p.line, toks[1]));
                }
                circuit.analyses.push(a);
            }
        } else if let Some(inst) = p.device(&toks, &circuit) {
            circuit.instances.push(inst);
        }
    }
    // Sweep sources may be declared after the directive that names them.
    let swept = circuit.analyses.iter().filter_map(|a| match a {
        Analysis::Dc { source, .. }
        | Analysis::Ac { source, .. }
        | Analysis::Homotopy { source, .. } => Some(source),
        _ => None,
    });
    for (source, (line, tok)) in swept.zip(&analysis_lines) {
        let ok = circuit.instance(source).is_some_and(|i| i.kind.is_source());
        if !ok {
            p.diagnostics.push(Diagnostic {
                line: *line,
                column: tok.column,
                message: format!("'{source}' is not an independent source"),
            });
        }
    }
    p.diagnostics.sort_by_key(|d| (d.line, d.column));
    NetlistDocument {
        source: text.to_string(),
        circuit,
        diagnostics: p.diagnostics,
    }
}

fn format_waveform(w: &SourceWaveform) -> String {
    match w {
        SourceWaveform::Dc(v) => format!("dc={}", format_number(*v)),
        SourceWaveform::Sine {
            offset,
            amplitude,
            frequency,
            phase,
        } => format!(
            "dc={} amp={} freq={} phase={}",
            format_number(*offset),
            format_number(*amplitude),
            format_number(*frequency),
            format_number(*phase)
        ),
        SourceWaveform::Pwl(points) => {
            let body: Vec<String> = points
                .iter()
                .map(|(t, v)| format!("{} {}", format_number(*t), format_number(*v)))
                .collect();
            format!("pwl=({})", body.join(" "))
        }
    }
}

/// Netlist text for `circuit`; parsing it gives back an equal circuit.
pub fn format_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    for inst in &circuit.instances {
        let _ = write!(out, "{} {} {} {}", inst.name, inst.pos, inst.neg, inst.kind);
        for (k, v) in &inst.params {
            let _ = write!(out, " {k}={}", format_number(*v));
        }
        if let Some(w) = &inst.waveform {
            let _ = write!(out, " {}", format_waveform(w));
        }
        out.push('\n');
    }
    for a in &circuit.analyses {
        let line = match a {
            Analysis::Op => ".op".to_string(),
            Analysis::Dc {
                source,
                start,
                stop,
                step,
                updown,
            } => format!(
                ".dc {source} {} {} {}{}",
                format_number(*start),
                format_number(*stop),
                format_number(*step),
                if *updown { " dir=updown" } else { "" }
            ),
            Analysis::Tran {
                dt,
                tstop,
                method,
                ic,
            } => {
                let mut s = format!(
                    ".tran {} {} method={}",
                    format_number(*dt),
                    format_number(*tstop),
                    method.name()
                );
                if !ic.is_empty() {
                    s.push_str(" ic");
                    for (k, v) in ic {
                        let _ = write!(s, " {k}={}", format_number(*v));
                    }
                }
                s
            }
            Analysis::Ac {
                source,
                fstart,
                fstop,
                points_per_decade,
            } => format!(
                ".ac {source} {} {} {points_per_decade}",
                format_number(*fstart),
                format_number(*fstop)
            ),
            Analysis::Homotopy { source, lmin, lmax } => format!(
                ".homotopy {source} {} {}",
                format_number(*lmin),
                format_number(*lmax)
            ),
            Analysis::PrintCsv(path) => format!(".print csv {path}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
