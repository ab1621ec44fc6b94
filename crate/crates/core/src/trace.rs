//! Training runs as sequences of axiom-tagged steps over configurations
//! `⟨r, w, b⟩`, and a checker that replays them.
//!
//! A single-sample epoch is `N0` (init, configuration unchanged), one `N1` per
//! layer (train, recording that layer's activations), then `N3` when the
//! stopping predicate holds or `N2` (update, counter `r ⊕ 1/E`) when it does
//! not. Once the counter saturates the run ends with `N0E`.
//!
//! Configurations appear in records as the digest of the network's canonical
//! text; the counter after each step is the record's `r`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::mv::{UnitValue, TAU};
use crate::network::{end_condition, forward_layer, Digest, NetworkState};
use crate::training::{train_step, Sample, TrainConfig, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    N0,
    N0E,
    N1,
    N2,
    N3,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::N0 => "N0",
            Axiom::N0E => "N0E",
            Axiom::N1 => "N1",
            Axiom::N2 => "N2",
            Axiom::N3 => "N3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "N0" => Axiom::N0,
            "N0E" => Axiom::N0E,
            "N1" => Axiom::N1,
            "N2" => Axiom::N2,
            "N3" => Axiom::N3,
            _ => return None,
        })
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Init(Vec<UnitValue>),
    Train(Vec<UnitValue>),
    Update,
    Stop(Option<Vec<UnitValue>>),
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Init(_) => "init",
            Action::Train(_) => "train",
            Action::Update => "update",
            Action::Stop(_) => "stop",
        }
    }

    pub fn args(&self) -> &[UnitValue] {
        match self {
            Action::Init(v) | Action::Train(v) | Action::Stop(Some(v)) => v,
            Action::Update | Action::Stop(None) => &[],
        }
    }

    /// Inverse of [`kind`](Self::kind) and [`args`](Self::args); a stop with
    /// no arguments is `Stop(None)`.
    pub fn from_parts(kind: &str, args: Vec<UnitValue>) -> Option<Self> {
        Some(match kind {
            "init" => Action::Init(args),
            "train" => Action::Train(args),
            "update" if args.is_empty() => Action::Update,
            "stop" if args.is_empty() => Action::Stop(None),
            "stop" => Action::Stop(Some(args)),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub epoch_r: UnitValue,
    pub net: NetworkState,
}

impl Configuration {
    pub fn new(net: NetworkState) -> Self {
        Configuration {
            epoch_r: UnitValue::ZERO,
            net,
        }
    }

    pub fn digest(&self) -> Digest {
        self.net.digest()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub index: usize,
    pub axiom: Axiom,
    pub action: Action,
    pub layer: Option<usize>,
    pub pre: Digest,
    pub post: Digest,
    pub lambda: Option<Vec<UnitValue>>,
    pub err: Option<UnitValue>,
    pub end: Option<UnitValue>,
    /// Counter of the post configuration.
    pub r: UnitValue,
}

pub type Trace = Vec<TraceStep>;

/// `r ⊕ 1/E`
pub fn epoch_tick(r: UnitValue, epochs: u32) -> UnitValue {
    r.oplus(UnitValue::saturating(1.0 / epochs.max(1) as f64))
}

fn saturated(r: UnitValue) -> bool {
    r.get() >= 1.0 - TAU
}

fn step(index: usize, axiom: Axiom, action: Action, pre: Digest, post: Digest, r: UnitValue) -> TraceStep {
    TraceStep {
        index,
        axiom,
        action,
        layer: None,
        pre,
        post,
        lambda: None,
        err: None,
        end: None,
        r,
    }
}

/// Runs the single-sample loop for at most `epochs` epochs. `eps` and
/// `epochs` override the corresponding fields of `cfg`; everything else
/// (learning rate, update mode, aggregator) comes from `cfg`.
pub fn symbolic_train_loop(
    init: &Configuration,
    input: &[UnitValue],
    target: UnitValue,
    eps: UnitValue,
    epochs: u32,
    cfg: &TrainConfig,
) -> Result<Trace, TrainError> {
    let cfg = TrainConfig {
        eps,
        max_epochs: epochs,
        ..cfg.clone()
    };
    cfg.validate()?;
    let sample = Sample {
        input: input.to_vec(),
        target,
    };
    let mut net = init.net.clone();
    let mut r = init.epoch_r;
    let mut trace = Vec::new();
    loop {
        let digest = net.digest();
        if saturated(r) {
            trace.push(step(trace.len(), Axiom::N0E, Action::Stop(None), digest, digest, r));
            return Ok(trace);
        }
        trace.push(step(trace.len(), Axiom::N0, Action::Init(input.to_vec()), digest, digest, r));
        let mut act = input.to_vec();
        for (t, layer) in net.layers().iter().enumerate() {
            let (_, out) = forward_layer(layer, &act)?;
            let mut s = step(trace.len(), Axiom::N1, Action::Train(act), digest, digest, r);
            s.layer = Some(t);
            s.lambda = Some(out.clone());
            trace.push(s);
            act = out;
        }
        let check = end_condition(target, &act, eps, cfg.aggregator)?;
        if saturated(check.truth) {
            let mut s = step(trace.len(), Axiom::N3, Action::Stop(Some(act)), digest, digest, r);
            s.err = Some(check.distance);
            s.end = Some(check.truth);
            trace.push(s);
            return Ok(trace);
        }
        let (next, _) = train_step(&net, core::slice::from_ref(&sample), &cfg)?;
        net = next;
        r = epoch_tick(r, epochs);
        let mut s = step(trace.len(), Axiom::N2, Action::Update, digest, net.digest(), r);
        s.err = Some(check.distance);
        s.end = Some(check.truth);
        trace.push(s);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Position in the trace.
    pub step: usize,
    pub axiom: Option<Axiom>,
    pub clause: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.axiom {
            Some(a) => write!(f, "step {} ({a}): {}", self.step, self.clause),
            None => write!(f, "step {}: {}", self.step, self.clause),
        }
    }
}

fn values_match(a: &[UnitValue], b: &[UnitValue]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(*y, TAU))
}

fn opt_match(a: Option<UnitValue>, b: UnitValue) -> bool {
    a.is_some_and(|a| a.approx_eq(b, TAU))
}

enum Phase {
    EpochStart,
    Layer(usize, Vec<UnitValue>),
    Decide(Vec<UnitValue>),
    Done,
}

struct Checker<'a> {
    violations: Vec<Violation>,
    pos: usize,
    step: &'a TraceStep,
}

impl Checker<'_> {
    fn flag(&mut self, clause: impl Into<String>) {
        self.violations.push(Violation {
            step: self.pos,
            axiom: Some(self.step.axiom),
            clause: clause.into(),
        });
    }

    fn require(&mut self, ok: bool, clause: &str) {
        if !ok {
            self.flag(clause);
        }
    }
}

/// Replays `trace` from `initial`, recomputing every step of the
/// single-sample loop for `sample` with `cfg.eps` and `cfg.max_epochs`.
/// All violations are collected; after a mismatch checking continues from
/// the recomputed state.
pub fn check_trace(
    trace: &[TraceStep],
    initial: &Configuration,
    sample: &Sample,
    cfg: &TrainConfig,
) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if trace.is_empty() {
        violations.push(Violation {
            step: 0,
            axiom: None,
            clause: "empty trace".into(),
        });
        return Err(violations);
    }
    if let Err(e) = cfg.validate() {
        violations.push(Violation {
            step: 0,
            axiom: None,
            clause: alloc::format!("{e}"),
        });
        return Err(violations);
    }
    let mut net = initial.net.clone();
    let mut digest = net.digest();
    let mut r = initial.epoch_r;
    let mut phase = Phase::EpochStart;
    let depth = net.layers().len();

    for (pos, s) in trace.iter().enumerate() {
        let mut c = Checker {
            violations: core::mem::take(&mut violations),
            pos,
            step: s,
        };
        if s.index != pos {
            c.flag("index mismatch");
        }
        if matches!(phase, Phase::Done) {
            c.flag("step after stop");
            violations = c.violations;
            continue;
        }
        c.require(s.pre == digest, "pre-state mismatch");
        phase = match phase {
            Phase::EpochStart if saturated(r) => {
                if s.axiom == Axiom::N0E {
                    c.require(s.action == Action::Stop(None), "action mismatch");
                    c.require(s.post == digest, "post-state mismatch");
                    c.require(s.approx_r(r), "counter mismatch");
                    c.require(s.layer.is_none() && s.lambda.is_none(), "unexpected payload");
                    c.require(s.err.is_none() && s.end.is_none(), "unexpected payload");
                    Phase::Done
                } else {
                    c.flag("axiom mismatch: expected N0E");
                    if s.axiom == Axiom::N0 {
                        // keep replaying so a later update is reported too
                        check_init(&mut c, s, sample, digest, r);
                        Phase::Layer(0, sample.input.clone())
                    } else {
                        Phase::Done
                    }
                }
            }
            Phase::EpochStart => {
                if s.axiom != Axiom::N0 {
                    c.flag("axiom mismatch: expected N0");
                }
                check_init(&mut c, s, sample, digest, r);
                Phase::Layer(0, sample.input.clone())
            }
            Phase::Layer(t, act) => {
                if s.axiom != Axiom::N1 {
                    c.flag("axiom mismatch: expected N1");
                }
                c.require(s.layer == Some(t), "layer mismatch");
                c.require(
                    matches!(&s.action, Action::Train(v) if values_match(v, &act)),
                    "action mismatch",
                );
                c.require(s.post == digest, "post-state mismatch");
                c.require(s.approx_r(r), "counter mismatch");
                c.require(s.err.is_none() && s.end.is_none(), "unexpected payload");
                let out = match forward_layer(&net.layers()[t], &act) {
                    Ok((_, out)) => out,
                    Err(e) => {
                        c.flag(alloc::format!("layer evaluation failed: {e}"));
                        violations = c.violations;
                        phase = Phase::Done;
                        break;
                    }
                };
                c.require(
                    s.lambda.as_deref().is_some_and(|l| values_match(l, &out)),
                    "lambda mismatch",
                );
                if t + 1 == depth {
                    Phase::Decide(out)
                } else {
                    Phase::Layer(t + 1, out)
                }
            }
            Phase::Decide(out) => {
                let check = match end_condition(sample.target, &out, cfg.eps, cfg.aggregator) {
                    Ok(check) => check,
                    Err(e) => {
                        c.flag(alloc::format!("end evaluation failed: {e}"));
                        violations = c.violations;
                        phase = Phase::Done;
                        break;
                    }
                };
                c.require(opt_match(s.err, check.distance), "err mismatch");
                c.require(opt_match(s.end, check.truth), "end mismatch");
                c.require(s.layer.is_none() && s.lambda.is_none(), "unexpected payload");
                let expected = if saturated(check.truth) { Axiom::N3 } else { Axiom::N2 };
                if s.axiom != expected {
                    c.flag(alloc::format!("axiom mismatch: expected {expected}"));
                }
                if s.axiom == Axiom::N2 {
                    if saturated(r) {
                        c.flag("update after final epoch");
                    }
                    if saturated(check.truth) {
                        c.flag("update with end satisfied");
                    }
                }
                if expected == Axiom::N3 {
                    c.require(
                        matches!(&s.action, Action::Stop(Some(v)) if values_match(v, &out)),
                        "action mismatch",
                    );
                    c.require(s.post == digest, "post-state mismatch");
                    c.require(s.approx_r(r), "counter mismatch");
                    Phase::Done
                } else {
                    c.require(s.action == Action::Update, "action mismatch");
                    match train_step(&net, core::slice::from_ref(sample), cfg) {
                        Ok((next, _)) => net = next,
                        Err(e) => {
                            c.flag(alloc::format!("update failed: {e}"));
                            violations = c.violations;
                            phase = Phase::Done;
                            break;
                        }
                    }
                    digest = net.digest();
                    r = epoch_tick(r, cfg.max_epochs);
                    c.require(s.post == digest, "post-state mismatch");
                    c.require(s.approx_r(r), "counter mismatch");
                    Phase::EpochStart
                }
            }
            Phase::Done => unreachable!(),
        };
        violations = c.violations;
    }
    if !matches!(phase, Phase::Done) {
        violations.push(Violation {
            step: trace.len(),
            axiom: None,
            clause: "trace truncated".into(),
        });
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

fn check_init(c: &mut Checker<'_>, s: &TraceStep, sample: &Sample, digest: Digest, r: UnitValue) {
    c.require(
        matches!(&s.action, Action::Init(v) if values_match(v, &sample.input)),
        "action mismatch",
    );
    c.require(s.post == digest, "post-state mismatch");
    c.require(s.approx_r(r), "counter mismatch");
    c.require(s.layer.is_none() && s.lambda.is_none(), "unexpected payload");
    c.require(s.err.is_none() && s.end.is_none(), "unexpected payload");
}

impl TraceStep {
    fn approx_r(&self, r: UnitValue) -> bool {
        self.r.approx_eq(r, TAU)
    }
}

/// Structural check of the condensed per-epoch trace written by
/// [`crate::training::train`]. Parameters are not recomputed; the digest
/// chain, counter arithmetic, stopping guards and the `end` values implied by
/// each `err` are.
pub fn check_summary_trace(trace: &[TraceStep], initial: Digest, cfg: &TrainConfig) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut prev_post = initial;
    let mut r = UnitValue::ZERO;
    let mut finished = false;
    for (pos, s) in trace.iter().enumerate() {
        let mut c = Checker {
            violations: core::mem::take(&mut violations),
            pos,
            step: s,
        };
        if s.index != pos {
            c.flag("index mismatch");
        }
        if finished {
            c.flag("step after stop");
            violations = c.violations;
            continue;
        }
        c.require(s.pre == prev_post, "pre-state mismatch");
        if let (Some(err), Some(end)) = (s.err, s.end) {
            c.require(end.approx_eq(err.implies(cfg.eps), TAU), "end mismatch");
        }
        match s.axiom {
            Axiom::N2 => {
                if saturated(r) {
                    c.flag("update after final epoch");
                }
                c.require(s.action == Action::Update, "action mismatch");
                c.require(s.err.is_some() && s.end.is_some(), "missing err/end");
                r = epoch_tick(r, cfg.max_epochs);
                c.require(s.approx_r(r), "counter mismatch");
                // training may only continue past an epoch that missed the tolerance
                if let (Some(next), Some(end)) = (trace.get(pos + 1), s.end) {
                    if next.axiom == Axiom::N2 && saturated(end) {
                        c.flag("update with end satisfied");
                    }
                }
            }
            Axiom::N3 => {
                c.require(s.end.is_some_and(saturated), "stop with end unsatisfied");
                c.require(s.post == s.pre, "post-state mismatch");
                c.require(matches!(s.action, Action::Stop(_)), "action mismatch");
                c.require(s.approx_r(r), "counter mismatch");
                finished = true;
            }
            Axiom::N0E => {
                c.require(saturated(r), "epoch limit not reached");
                c.require(s.post == s.pre, "post-state mismatch");
                c.require(s.action == Action::Stop(None), "action mismatch");
                c.require(s.approx_r(r), "counter mismatch");
                finished = true;
            }
            Axiom::N0 | Axiom::N1 => c.flag("axiom not used in summary traces"),
        }
        prev_post = s.post;
        violations = c.violations;
    }
    if !finished {
        violations.push(Violation {
            step: trace.len(),
            axiom: None,
            clause: "trace truncated".into(),
        });
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
