//! JSON-lines trace files, one step per line.
//!
//! ```text
//! {"i":0,"axiom":"N0","action":{"kind":"init","args":[...]},"layer":null,
//!  "pre":"<hex16>","post":"<hex16>","lambda":null,"err":null,"end":null,"r":...}
//! ```
//!
//! Numbers are written with 17 significant digits.

use std::fmt::{self, Write as _};
use std::io::{self, BufRead, Write};

use lukmlp_core::num::Sig17;
use lukmlp_core::{Action, Axiom, Digest, TraceStep, UnitValue};
use serde::Deserialize;

#[derive(Debug)]
pub enum TraceIoError {
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for TraceIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceIoError::Io(e) => write!(f, "{e}"),
            TraceIoError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for TraceIoError {}

impl From<io::Error> for TraceIoError {
    fn from(e: io::Error) -> Self {
        TraceIoError::Io(e)
    }
}

fn push_values(out: &mut String, values: &[UnitValue]) {
    out.push('[');
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", Sig17(v.get()));
    }
    out.push(']');
}

fn push_opt_number(out: &mut String, v: Option<UnitValue>) {
    match v {
        Some(v) => {
            let _ = write!(out, "{}", Sig17(v.get()));
        }
        None => out.push_str("null"),
    }
}

/// One record, without the trailing newline.
pub fn format_step(s: &TraceStep) -> String {
    let mut out = String::with_capacity(160);
    let _ = write!(
        out,
        "{{\"i\":{},\"axiom\":\"{}\",\"action\":{{\"kind\":\"{}\",\"args\":",
        s.index,
        s.axiom,
        s.action.kind()
    );
    push_values(&mut out, s.action.args());
    out.push_str("},\"layer\":");
    match s.layer {
        Some(t) => {
            let _ = write!(out, "{t}");
        }
        None => out.push_str("null"),
    }
    let _ = write!(out, ",\"pre\":\"{}\",\"post\":\"{}\",\"lambda\":", s.pre, s.post);
    match &s.lambda {
        Some(l) => push_values(&mut out, l),
        None => out.push_str("null"),
    }
    out.push_str(",\"err\":");
    push_opt_number(&mut out, s.err);
    out.push_str(",\"end\":");
    push_opt_number(&mut out, s.end);
    let _ = write!(out, ",\"r\":{}}}", Sig17(s.r.get()));
    out
}

pub fn write_trace<W: Write>(mut w: W, trace: &[TraceStep]) -> io::Result<()> {
    for s in trace {
        writeln!(w, "{}", format_step(s))?;
    }
    w.flush()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    kind: String,
    args: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    i: usize,
    axiom: String,
    action: RawAction,
    layer: Option<usize>,
    pre: String,
    post: String,
    lambda: Option<Vec<f64>>,
    err: Option<f64>,
    end: Option<f64>,
    r: f64,
}

fn unit(field: &str, x: f64) -> Result<UnitValue, String> {
    UnitValue::new(x).map_err(|_| format!("{field} value {x} outside [0,1]"))
}

fn units(field: &str, xs: Vec<f64>) -> Result<Vec<UnitValue>, String> {
    xs.into_iter().map(|x| unit(field, x)).collect()
}

fn digest(field: &str, s: &str) -> Result<Digest, String> {
    Digest::from_hex(s).ok_or_else(|| format!("{field} is not a 16-digit hex digest: {s:?}"))
}

pub fn parse_step(text: &str) -> Result<TraceStep, String> {
    let raw: RawStep = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let axiom = Axiom::from_name(&raw.axiom).ok_or_else(|| format!("unknown axiom {:?}", raw.axiom))?;
    let args = units("action.args", raw.action.args)?;
    let action = Action::from_parts(&raw.action.kind, args)
        .ok_or_else(|| format!("invalid action {:?}", raw.action.kind))?;
    Ok(TraceStep {
        index: raw.i,
        axiom,
        action,
        layer: raw.layer,
        pre: digest("pre", &raw.pre)?,
        post: digest("post", &raw.post)?,
        lambda: raw.lambda.map(|l| units("lambda", l)).transpose()?,
        err: raw.err.map(|x| unit("err", x)).transpose()?,
        end: raw.end.map(|x| unit("end", x)).transpose()?,
        r: unit("r", raw.r)?,
    })
}

/// Reads every nonblank line as a step.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceStep>, TraceIoError> {
    let mut trace = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let step = parse_step(&line).map_err(|message| TraceIoError::Parse { line: k + 1, message })?;
        trace.push(step);
    }
    Ok(trace)
}
