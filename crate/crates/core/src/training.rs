//! Backpropagation with the loss `d_L(y, ŷ)` and updates written in
//! Łukasiewicz terms.
//!
//! For each layer `t` the mask `Dₜ` marks the units with `0 < zₜᵢ < 1`. The
//! output error is `δ_k = D_k ⊙ g` with `g = sign(a_k − y)`, hidden errors are
//! `δₜ = Dₜ wₜ₊₁ᵀ δₜ₊₁`, and the raw gradients are `G_wₜ = δₜ aₜ₋₁ᵀ`,
//! `G_bₜ = δₜ`. Magnitudes are normalized per layer and per parameter kind,
//! `ĝ = |G| / (‖G‖∞ + ε)`, combined with the learning rate into
//! `Δ = η ⊗ ĝ`, and applied as `(w ⊖ Δ⁻) ⊕ Δ⁺`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dataset::Prng;
use crate::mv::UnitValue;
use crate::network::{end_condition, Aggregator, Digest, ForwardCache, NetworkError, NetworkState};
use crate::trace::{Action, Axiom, Trace, TraceStep};

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Network(NetworkError),
    InvalidConfig(&'static str),
    EmptyBatch,
    EmptyDataset,
    TargetWidth { expected: usize, found: usize },
    ParameterEscaped(f64),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Network(e) => write!(f, "{e}"),
            TrainError::InvalidConfig(what) => write!(f, "invalid training configuration: {what}"),
            TrainError::EmptyBatch => f.write_str("empty batch"),
            TrainError::EmptyDataset => f.write_str("empty dataset"),
            TrainError::TargetWidth { expected, found } => {
                write!(f, "target has width {found}, network outputs {expected}")
            }
            TrainError::ParameterEscaped(v) => write!(f, "parameter {v} left [0,1]"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<NetworkError> for TrainError {
    fn from(e: NetworkError) -> Self {
        TrainError::Network(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// `(w ⊖ Δ⁻) ⊕ Δ⁺`
    #[default]
    Lukasiewicz,
    /// `relu1(w − η·G)`
    ClippedGd,
}

impl UpdateMode {
    pub fn name(self) -> &'static str {
        match self {
            UpdateMode::Lukasiewicz => "lukasiewicz",
            UpdateMode::ClippedGd => "clipped_gd",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lukasiewicz" => Some(UpdateMode::Lukasiewicz),
            "clipped_gd" | "clipped-gd" => Some(UpdateMode::ClippedGd),
            _ => None,
        }
    }
}

/// How `η` and `ĝ` are combined into the step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaCombine {
    /// `η ⊙ ĝ = max(0, η + ĝ − 1)`
    #[default]
    LukasiewiczProduct,
    /// `η · ĝ`
    RealProduct,
}

impl EtaCombine {
    pub fn combine(self, eta: UnitValue, ghat: UnitValue) -> UnitValue {
        match self {
            EtaCombine::LukasiewiczProduct => eta.otimes(ghat),
            EtaCombine::RealProduct => eta.scale(ghat),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EtaCombine::LukasiewiczProduct => "lukasiewicz_product",
            EtaCombine::RealProduct => "real_product",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lukasiewicz_product" | "lukasiewicz-product" => Some(EtaCombine::LukasiewiczProduct),
            "real_product" | "real-product" => Some(EtaCombine::RealProduct),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: UnitValue,
    /// Tolerance of the stopping predicate.
    pub eps: UnitValue,
    pub max_epochs: u32,
    pub batch_size: usize,
    pub update_mode: UpdateMode,
    pub eta_combine: EtaCombine,
    /// Added to the ℓ∞ norm before normalizing.
    pub norm_eps: f64,
    pub seed: u64,
    pub aggregator: Aggregator,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: UnitValue::ONE,
            eps: UnitValue::ZERO,
            max_epochs: 250,
            batch_size: 128,
            update_mode: UpdateMode::Lukasiewicz,
            eta_combine: EtaCombine::LukasiewiczProduct,
            norm_eps: 1e-8,
            seed: 42,
            aggregator: Aggregator::Max,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.max_epochs == 0 {
            return Err(TrainError::InvalidConfig("max_epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be at least 1"));
        }
        if !(self.norm_eps > 0.0 && self.norm_eps.is_finite()) {
            return Err(TrainError::InvalidConfig("norm_eps must be positive"));
        }
        Ok(())
    }

    /// `1_E = 1/E`
    pub fn epoch_unit(&self) -> UnitValue {
        UnitValue::saturating(1.0 / self.max_epochs.max(1) as f64)
    }
}

/// One labelled input.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<UnitValue>,
    pub target: UnitValue,
}

/// Gradient data for one kind of parameter (weights or biases) of a layer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamGrad {
    pub raw: Vec<f64>,
    pub ghat: Vec<f64>,
    pub delta_plus: Vec<UnitValue>,
    pub delta_minus: Vec<UnitValue>,
}

impl ParamGrad {
    fn from_raw(raw: Vec<f64>, cfg: &TrainConfig) -> Self {
        let ghat = normalize(&raw, cfg.norm_eps);
        let mut delta_plus = vec![UnitValue::ZERO; raw.len()];
        let mut delta_minus = vec![UnitValue::ZERO; raw.len()];
        for (k, (&g, &m)) in raw.iter().zip(&ghat).enumerate() {
            let step = cfg.eta_combine.combine(cfg.eta, UnitValue::saturating(m));
            if g < 0.0 {
                delta_plus[k] = step;
            } else if g > 0.0 {
                delta_minus[k] = step;
            }
        }
        ParamGrad {
            raw,
            ghat,
            delta_plus,
            delta_minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerGradient {
    /// `Dₜ`: true where `0 < zₜᵢ < 1`. For batch bundles, true where any
    /// sample had the unit active.
    pub mask: Vec<bool>,
    pub weights: ParamGrad,
    pub bias: ParamGrad,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradientBundle {
    /// `g ∈ {−1, 0, 1}` per output.
    pub sign: Vec<i8>,
    pub layers: Vec<LayerGradient>,
}

/// Unnormalized gradients, used for batch accumulation.
#[derive(Debug, Clone)]
struct RawGradients {
    sign: Vec<i8>,
    masks: Vec<Vec<bool>>,
    grad_w: Vec<Vec<f64>>,
    grad_b: Vec<Vec<f64>>,
}

impl RawGradients {
    fn zeros(net: &NetworkState) -> Self {
        RawGradients {
            sign: vec![0; net.output_width()],
            masks: net.layers().iter().map(|l| vec![false; l.rows()]).collect(),
            grad_w: net.layers().iter().map(|l| vec![0.0; l.weights().len()]).collect(),
            grad_b: net.layers().iter().map(|l| vec![0.0; l.rows()]).collect(),
        }
    }

    fn add(&mut self, other: &RawGradients) {
        for (a, b) in self.masks.iter_mut().zip(&other.masks) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x |= y);
        }
        for (a, b) in self.grad_w.iter_mut().zip(&other.grad_w) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.grad_b.iter_mut().zip(&other.grad_b) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    fn scale(&mut self, factor: f64) {
        for g in self.grad_w.iter_mut().chain(self.grad_b.iter_mut()) {
            g.iter_mut().for_each(|x| *x *= factor);
        }
    }

    fn into_bundle(self, cfg: &TrainConfig) -> GradientBundle {
        let layers = self
            .masks
            .into_iter()
            .zip(self.grad_w)
            .zip(self.grad_b)
            .map(|((mask, gw), gb)| LayerGradient {
                mask,
                weights: ParamGrad::from_raw(gw, cfg),
                bias: ParamGrad::from_raw(gb, cfg),
            })
            .collect();
        GradientBundle {
            sign: self.sign,
            layers,
        }
    }
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn active(z: f64) -> bool {
    z > 0.0 && z < 1.0
}

/// Chain rule from an output seed `∂loss/∂aₖ` (before the output mask).
fn raw_backward(net: &NetworkState, cache: &ForwardCache, sign: Vec<i8>, seed: &[f64]) -> RawGradients {
    let layers = net.layers();
    let depth = layers.len();
    let masks: Vec<Vec<bool>> = cache
        .z
        .iter()
        .map(|zt| zt.iter().map(|&z| active(z)).collect())
        .collect();
    let mut grad_w = vec![Vec::new(); depth];
    let mut grad_b = vec![Vec::new(); depth];
    let mut delta: Vec<f64> = seed
        .iter()
        .zip(&masks[depth - 1])
        .map(|(&s, &m)| if m { s } else { 0.0 })
        .collect();
    for t in (0..depth).rev() {
        let layer = &layers[t];
        let prev = cache.layer_input(t);
        let cols = layer.cols();
        let mut gw = vec![0.0; layer.weights().len()];
        for (i, &d) in delta.iter().enumerate() {
            if d != 0.0 {
                for (j, a) in prev.iter().enumerate() {
                    gw[i * cols + j] = d * a.get();
                }
            }
        }
        grad_w[t] = gw;
        grad_b[t] = delta.clone();
        if t > 0 {
            let mut next = vec![0.0; cols];
            for (i, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    for (j, w) in layer.row(i).iter().enumerate() {
                        next[j] += w.get() * d;
                    }
                }
            }
            for (n, &m) in next.iter_mut().zip(&masks[t - 1]) {
                if !m {
                    *n = 0.0;
                }
            }
            delta = next;
        }
    }
    RawGradients {
        sign,
        masks,
        grad_w,
        grad_b,
    }
}

fn raw_aggregate(
    net: &NetworkState,
    cache: &ForwardCache,
    target: UnitValue,
    aggregator: Aggregator,
) -> RawGradients {
    let g = sign_of(cache.yhat.get() - target.get());
    let route = aggregator.route(cache.output());
    let sign: Vec<i8> = route.iter().map(|&r| if r != 0.0 { g } else { 0 }).collect();
    let seed: Vec<f64> = sign.iter().map(|&s| s as f64).collect();
    raw_backward(net, cache, sign, &seed)
}

/// Gradients of `Σⱼ d_L(yⱼ, aₖⱼ)`, with `g = sign(aₖ − y)` elementwise.
pub fn backward(
    net: &NetworkState,
    cache: &ForwardCache,
    target: &[UnitValue],
    cfg: &TrainConfig,
) -> Result<GradientBundle, TrainError> {
    check_cache(net, cache)?;
    if target.len() != net.output_width() {
        return Err(TrainError::TargetWidth {
            expected: net.output_width(),
            found: target.len(),
        });
    }
    let sign: Vec<i8> = cache
        .output()
        .iter()
        .zip(target)
        .map(|(a, y)| sign_of(a.get() - y.get()))
        .collect();
    let seed: Vec<f64> = sign.iter().map(|&s| s as f64).collect();
    Ok(raw_backward(net, cache, sign, &seed).into_bundle(cfg))
}

/// Gradients of `d_L(y, ŷ)` for a scalar target, routed through the
/// configured aggregator.
pub fn backward_aggregate(
    net: &NetworkState,
    cache: &ForwardCache,
    target: UnitValue,
    cfg: &TrainConfig,
) -> Result<GradientBundle, TrainError> {
    check_cache(net, cache)?;
    Ok(raw_aggregate(net, cache, target, cfg.aggregator).into_bundle(cfg))
}

fn check_cache(net: &NetworkState, cache: &ForwardCache) -> Result<(), TrainError> {
    let layers = net.layers();
    if cache.z.len() != layers.len() || cache.a.len() != layers.len() {
        return Err(NetworkError::DimensionMismatch {
            layer: cache.z.len().min(cache.a.len()),
            expected: layers.len(),
            found: cache.z.len(),
        }
        .into());
    }
    for (t, layer) in layers.iter().enumerate() {
        if cache.z[t].len() != layer.rows() || cache.a[t].len() != layer.rows() {
            return Err(NetworkError::DimensionMismatch {
                layer: t,
                expected: layer.rows(),
                found: cache.z[t].len(),
            }
            .into());
        }
    }
    if cache.input.len() != net.input_width() {
        return Err(NetworkError::DimensionMismatch {
            layer: 0,
            expected: net.input_width(),
            found: cache.input.len(),
        }
        .into());
    }
    Ok(())
}

/// `ĝ = |raw| / (max|raw| + norm_eps)`; every entry lies in `[0, 1)`.
pub fn normalize(raw: &[f64], norm_eps: f64) -> Vec<f64> {
    let max = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let denom = max + norm_eps;
    raw.iter().map(|x| x.abs() / denom).collect()
}

/// Applies the bundle's update to every parameter.
pub fn apply_update(net: &NetworkState, bundle: &GradientBundle, cfg: &TrainConfig) -> NetworkState {
    let mut next = net.clone();
    for (layer, grad) in next.layers_mut().iter_mut().zip(&bundle.layers) {
        update_params(layer.weights_mut(), &grad.weights, cfg);
        update_params(layer.biases_mut(), &grad.bias, cfg);
    }
    next
}

fn update_params(params: &mut [UnitValue], grad: &ParamGrad, cfg: &TrainConfig) {
    match cfg.update_mode {
        UpdateMode::Lukasiewicz => {
            for (k, p) in params.iter_mut().enumerate() {
                let raw = grad.raw[k];
                if raw != 0.0 {
                    *p = p.ominus(grad.delta_minus[k]).oplus(grad.delta_plus[k]);
                }
            }
        }
        UpdateMode::ClippedGd => {
            for (k, p) in params.iter_mut().enumerate() {
                let raw = grad.raw[k];
                if raw != 0.0 {
                    *p = UnitValue::saturating(p.get() - cfg.eta.get() * raw);
                }
            }
        }
    }
}

/// Averages raw gradients over the batch, then normalizes and updates once.
/// Returns the new state and the batch mean of `d_L(y, ŷ)` before the update.
pub fn train_step(
    net: &NetworkState,
    batch: &[Sample],
    cfg: &TrainConfig,
) -> Result<(NetworkState, UnitValue), TrainError> {
    let (next, stats) = train_step_stats(net, batch, cfg)?;
    Ok((next, UnitValue::saturating(stats.loss_sum / batch.len() as f64)))
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchStats {
    loss_sum: f64,
    correct: usize,
}

fn train_step_stats(
    net: &NetworkState,
    batch: &[Sample],
    cfg: &TrainConfig,
) -> Result<(NetworkState, BatchStats), TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut total = RawGradients::zeros(net);
    let mut stats = BatchStats::default();
    for sample in batch {
        let cache = net.forward_with(&sample.input, cfg.aggregator)?;
        stats.loss_sum += sample.target.dist(cache.yhat).get();
        if predict_label(cache.yhat) == predict_label(sample.target) {
            stats.correct += 1;
        }
        let raw = raw_aggregate(net, &cache, sample.target, cfg.aggregator);
        total.add(&raw);
    }
    if batch.len() > 1 {
        total.scale(1.0 / batch.len() as f64);
    }
    let bundle = total.into_bundle(cfg);
    Ok((apply_update(net, &bundle, cfg), stats))
}

/// Decision rule: `ŷ ≥ 0.5` predicts class 1.
pub fn predict_label(yhat: UnitValue) -> u8 {
    (yhat.get() >= 0.5) as u8
}

pub fn accuracy(net: &NetworkState, data: &[Sample], aggregator: Aggregator) -> Result<f64, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut correct = 0usize;
    for s in data {
        let yhat = aggregator.aggregate(&net.predict(&s.input)?)?;
        if predict_label(yhat) == predict_label(s.target) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: u32,
    /// Mean `d_L(y, ŷ)` over the epoch, each batch measured before its update.
    pub mean_loss: f64,
    /// Accuracy over the epoch, measured the same way.
    pub train_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: NetworkState,
    pub history: Vec<EpochRecord>,
    /// One condensed record per epoch (see [`crate::trace::check_summary_trace`]).
    pub trace: Trace,
    pub stopped_early: bool,
}

/// Salt separating the shuffling stream from other uses of the seed.
pub const SHUFFLE_SALT: u64 = 0x5348_5546_464c_4531;

/// Mini-batch training over shuffled epochs.
///
/// After each epoch the mean distance is compared with `eps`; the run stops
/// when it is within tolerance, otherwise after `max_epochs` epochs.
pub fn train(net: &NetworkState, data: &[Sample], cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut rng = Prng::new(cfg.seed ^ SHUFFLE_SALT);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut current = net.clone();
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut r = UnitValue::ZERO;
    let unit = cfg.epoch_unit();
    let mut stopped_early = false;

    for epoch in 1..=cfg.max_epochs {
        let pre = current.digest();
        rng.shuffle(&mut order);
        let mut stats = BatchStats::default();
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let (next, s) = train_step_stats(&current, &batch, cfg)?;
            if let Some(bad) = next.max_param_violation() {
                return Err(TrainError::ParameterEscaped(bad));
            }
            current = next;
            stats.loss_sum += s.loss_sum;
            stats.correct += s.correct;
        }
        let n = data.len() as f64;
        let mean_loss = stats.loss_sum / n;
        history.push(EpochRecord {
            epoch,
            mean_loss,
            train_accuracy: stats.correct as f64 / n,
        });
        let err = UnitValue::saturating(mean_loss);
        let end = err.implies(cfg.eps);
        let post = current.digest();
        r = r.oplus(unit);
        trace.push(summary_step(trace.len(), Axiom::N2, Action::Update, pre, post, err, end, r));
        if end.is_top() {
            trace.push(summary_step(trace.len(), Axiom::N3, Action::Stop(None), post, post, err, end, r));
            stopped_early = true;
            break;
        }
    }
    if !stopped_early {
        let d = current.digest();
        trace.push(TraceStep {
            index: trace.len(),
            axiom: Axiom::N0E,
            action: Action::Stop(None),
            layer: None,
            pre: d,
            post: d,
            lambda: None,
            err: None,
            end: None,
            r,
        });
    }
    Ok(TrainOutcome {
        net: current,
        history,
        trace,
        stopped_early,
    })
}

#[allow(clippy::too_many_arguments)]
fn summary_step(
    index: usize,
    axiom: Axiom,
    action: Action,
    pre: Digest,
    post: Digest,
    err: UnitValue,
    end: UnitValue,
    r: UnitValue,
) -> TraceStep {
    TraceStep {
        index,
        axiom,
        action,
        layer: None,
        pre,
        post,
        lambda: None,
        err: Some(err),
        end: Some(end),
        r,
    }
}

/// Location of one parameter: layer, and index into weights (row-major)
/// followed by biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamRef {
    pub layer: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCoordinate {
    pub param: ParamRef,
    pub analytic: f64,
    pub numeric: f64,
    pub kinked: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FdReport {
    pub coordinates: Vec<FdCoordinate>,
    /// Coordinates away from any kink.
    pub checked: usize,
    pub kinked: usize,
    pub sign_agreements: usize,
    /// Over checked coordinates with a nonzero analytic gradient.
    pub max_abs_deviation: f64,
    pub active: usize,
}

impl FdReport {
    pub fn sign_agreement_rate(&self) -> f64 {
        if self.checked == 0 {
            1.0
        } else {
            self.sign_agreements as f64 / self.checked as f64
        }
    }
}

/// The piecewise-linear region a forward pass falls in: activation masks,
/// plus which side of the target `ŷ` lies on and which output it came from.
#[derive(PartialEq)]
struct Region {
    masks: Vec<Vec<u8>>,
    side: i8,
    route: Vec<f64>,
}

fn region_code(z: f64) -> u8 {
    if z <= 0.0 {
        0
    } else if z < 1.0 {
        1
    } else {
        2
    }
}

/// Forward pass on raw parameters, one of which is shifted by `delta`; the
/// shifted value may leave `[0,1]`.
fn perturbed_loss(
    net: &NetworkState,
    sample: &Sample,
    aggregator: Aggregator,
    param: ParamRef,
    delta: f64,
) -> (f64, Region) {
    let mut current: Vec<f64> = sample.input.iter().map(|x| x.get()).collect();
    let mut masks = Vec::with_capacity(net.layers().len());
    for (t, layer) in net.layers().iter().enumerate() {
        let cols = layer.cols();
        let nw = layer.weights().len();
        let shift = |k: usize, v: f64| {
            if param.layer == t && param.index == k {
                v + delta
            } else {
                v
            }
        };
        let mut z = Vec::with_capacity(layer.rows());
        for i in 0..layer.rows() {
            let mut terms = (0..cols)
                .rev()
                .map(|j| shift(i * cols + j, layer.weight(i, j).get()) * current[j]);
            let last = terms.next().unwrap_or(0.0);
            let sum = terms.fold(last, |acc, t| t + acc);
            z.push(shift(nw + i, layer.bias(i).get()) + sum);
        }
        masks.push(z.iter().map(|&v| region_code(v)).collect());
        current = z.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    }
    let outputs: Vec<UnitValue> = current.iter().map(|&v| UnitValue::saturating(v)).collect();
    let yhat = aggregator.aggregate(&outputs).expect("nonempty outputs").get();
    let region = Region {
        masks,
        side: sign_of(yhat - sample.target.get()),
        route: aggregator.route(&outputs),
    };
    ((yhat - sample.target.get()).abs(), region)
}

/// Compares analytic raw gradients with central differences of
/// `d_L(y, ŷ(w))`. Coordinates whose `±h` perturbation crosses a kink (a
/// unit entering or leaving `(0,1)`, `ŷ` crossing `y`, or a change of the
/// routed output) are reported but excluded from the statistics. Values with
/// magnitude at most `tol` count as zero when comparing signs.
pub fn finite_diff_check(
    net: &NetworkState,
    sample: &Sample,
    aggregator: Aggregator,
    h: f64,
    tol: f64,
) -> Result<FdReport, TrainError> {
    let cache = net.forward_with(&sample.input, aggregator)?;
    let raw = raw_aggregate(net, &cache, sample.target, aggregator);
    let zero = ParamRef { layer: 0, index: 0 };
    let (_, base) = perturbed_loss(net, sample, aggregator, zero, 0.0);
    let mut report = FdReport::default();
    let sign_tol = |x: f64| if x.abs() <= tol { 0 } else { sign_of(x) };
    for (t, layer) in net.layers().iter().enumerate() {
        let nw = layer.weights().len();
        for index in 0..nw + layer.rows() {
            let param = ParamRef { layer: t, index };
            let analytic = if index < nw {
                raw.grad_w[t][index]
            } else {
                raw.grad_b[t][index - nw]
            };
            let (plus, region_plus) = perturbed_loss(net, sample, aggregator, param, h);
            let (minus, region_minus) = perturbed_loss(net, sample, aggregator, param, -h);
            let numeric = (plus - minus) / (2.0 * h);
            let kinked = region_plus != base || region_minus != base;
            report.coordinates.push(FdCoordinate {
                param,
                analytic,
                numeric,
                kinked,
            });
            if kinked {
                report.kinked += 1;
                continue;
            }
            report.checked += 1;
            if sign_tol(analytic) == sign_tol(numeric) {
                report.sign_agreements += 1;
            }
            if analytic != 0.0 {
                report.active += 1;
                report.max_abs_deviation = report.max_abs_deviation.max((analytic - numeric).abs());
            }
        }
    }
    Ok(report)
}

/// True when every parameter lies in `[0,1]`.
pub fn parameters_closed(net: &NetworkState) -> bool {
    net.max_param_violation().is_none()
}

/// Runs the per-sample stopping predicate on the current state.
pub fn sample_end(
    net: &NetworkState,
    sample: &Sample,
    cfg: &TrainConfig,
) -> Result<crate::network::EndCheck, TrainError> {
    let out = net.predict(&sample.input)?;
    Ok(end_condition(sample.target, &out, cfg.eps, cfg.aggregator)?)
}
