//! ReLU₁ perceptrons with every parameter in `[0,1]`.
//!
//! A layer maps activations `a` to `relu1(w a + b)`. With nonnegative
//! operands this is exactly the Łukasiewicz aggregation
//! `bᵢ ⊕ ◇_{wᵢ₀}a₀ ⊕ … ⊕ ◇_{wᵢₙ}aₙ`, and the sums are evaluated in the same
//! order as the extracted formula (`b ⊕ (t₀ ⊕ (t₁ ⊕ …))`) so that the two
//! agree bit for bit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::dataset::Prng;
use crate::mv::{MvError, UnitValue};
use crate::num::{fnv1a64, Sig17};

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    /// `layer` is 0-based; `expected`/`found` are vector or matrix widths.
    DimensionMismatch {
        layer: usize,
        expected: usize,
        found: usize,
    },
    NoLayers,
    ZeroWidth,
    EmptyOutputs,
    Parameter {
        layer: usize,
        index: usize,
        source: MvError,
    },
    Parse {
        line: usize,
        message: String,
    },
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::DimensionMismatch {
                layer,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch at layer {layer}: expected width {expected}, found {found}"
            ),
            NetworkError::NoLayers => f.write_str("network must have at least one layer"),
            NetworkError::ZeroWidth => f.write_str("layer widths must be positive"),
            NetworkError::EmptyOutputs => f.write_str("cannot aggregate an empty output vector"),
            NetworkError::Parameter {
                layer,
                index,
                source,
            } => write!(f, "layer {layer} parameter {index}: {source}"),
            NetworkError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl core::error::Error for NetworkError {}

/// Weights (row-major, one row per neuron) and biases of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    rows: usize,
    cols: usize,
    weights: Vec<UnitValue>,
    bias: Vec<UnitValue>,
}

impl LayerParams {
    pub fn new(
        rows: usize,
        cols: usize,
        weights: Vec<UnitValue>,
        bias: Vec<UnitValue>,
    ) -> Result<Self, NetworkError> {
        if rows == 0 || cols == 0 {
            return Err(NetworkError::ZeroWidth);
        }
        if weights.len() != rows * cols {
            return Err(NetworkError::DimensionMismatch {
                layer: 0,
                expected: rows * cols,
                found: weights.len(),
            });
        }
        if bias.len() != rows {
            return Err(NetworkError::DimensionMismatch {
                layer: 0,
                expected: rows,
                found: bias.len(),
            });
        }
        Ok(LayerParams {
            rows,
            cols,
            weights,
            bias,
        })
    }

    /// Builds a layer from rows of raw numbers, rejecting values outside `[0,1]`.
    pub fn from_rows(rows: &[&[f64]], bias: &[f64]) -> Result<Self, NetworkError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut weights = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(NetworkError::DimensionMismatch {
                    layer: 0,
                    expected: cols,
                    found: row.len(),
                });
            }
            for &w in row.iter() {
                let index = weights.len();
                weights.push(UnitValue::new(w).map_err(|source| NetworkError::Parameter {
                    layer: 0,
                    index,
                    source,
                })?);
            }
        }
        let bias = bias
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                UnitValue::new(b).map_err(|source| NetworkError::Parameter {
                    layer: 0,
                    index: rows.len() * cols + i,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        LayerParams::new(rows.len(), cols, weights, bias)
    }

    /// Width of this layer.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Width of the previous layer.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, row: usize, col: usize) -> UnitValue {
        self.weights[row * self.cols + col]
    }

    pub fn bias(&self, row: usize) -> UnitValue {
        self.bias[row]
    }

    pub fn weights(&self) -> &[UnitValue] {
        &self.weights
    }

    pub fn biases(&self) -> &[UnitValue] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [UnitValue] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [UnitValue] {
        &mut self.bias
    }

    pub fn row(&self, row: usize) -> &[UnitValue] {
        &self.weights[row * self.cols..(row + 1) * self.cols]
    }

    /// Pre-activation of one neuron: `b + (w₀x₀ + (w₁x₁ + …))`.
    #[inline]
    pub(crate) fn pre_activation(&self, row: usize, input: &[UnitValue]) -> f64 {
        let mut terms = self
            .row(row)
            .iter()
            .zip(input)
            .rev()
            .map(|(w, x)| w.get() * x.get());
        let last = terms.next().unwrap_or(0.0);
        let sum = terms.fold(last, |acc, t| t + acc);
        self.bias[row].get() + sum
    }
}

/// One Łukasiewicz layer step: `zᵢ = Σⱼ wᵢⱼ inputⱼ + bᵢ`, `aᵢ = relu1(zᵢ)`.
pub fn forward_layer(
    params: &LayerParams,
    input: &[UnitValue],
) -> Result<(Vec<f64>, Vec<UnitValue>), NetworkError> {
    if input.len() != params.cols {
        return Err(NetworkError::DimensionMismatch {
            layer: 0,
            expected: params.cols,
            found: input.len(),
        });
    }
    let z: Vec<f64> = (0..params.rows)
        .map(|i| params.pre_activation(i, input))
        .collect();
    let a = z.iter().map(|&zi| UnitValue::saturating(zi)).collect();
    Ok((z, a))
}

/// Łukasiewicz-definable ways of collapsing the output vector to `ŷ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Max,
    Min,
    TruncatedSum,
}

impl Aggregator {
    pub fn aggregate(self, outputs: &[UnitValue]) -> Result<UnitValue, NetworkError> {
        let (&first, rest) = outputs.split_first().ok_or(NetworkError::EmptyOutputs)?;
        Ok(match self {
            Aggregator::Max => rest.iter().fold(first, |acc, &x| acc.join(x)),
            Aggregator::Min => rest.iter().fold(first, |acc, &x| acc.meet(x)),
            Aggregator::TruncatedSum => rest.iter().fold(first, |acc, &x| acc.oplus(x)),
        })
    }

    /// Subgradient `∂ŷ/∂outputⱼ` for each output, each 0 or 1.
    ///
    /// For `Max`/`Min` only the first extremal index receives the gradient.
    pub fn route(self, outputs: &[UnitValue]) -> Vec<f64> {
        let mut d = alloc::vec![0.0; outputs.len()];
        if outputs.is_empty() {
            return d;
        }
        match self {
            Aggregator::Max | Aggregator::Min => {
                let mut best = 0;
                for (j, x) in outputs.iter().enumerate().skip(1) {
                    let better = match self {
                        Aggregator::Max => x.get() > outputs[best].get(),
                        _ => x.get() < outputs[best].get(),
                    };
                    if better {
                        best = j;
                    }
                }
                d[best] = 1.0;
            }
            Aggregator::TruncatedSum => {
                let sum: f64 = outputs.iter().map(|x| x.get()).sum();
                if sum < 1.0 {
                    d.iter_mut().for_each(|v| *v = 1.0);
                }
            }
        }
        d
    }

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Max => "max",
            Aggregator::Min => "min",
            Aggregator::TruncatedSum => "sum",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "max" => Some(Aggregator::Max),
            "min" => Some(Aggregator::Min),
            "sum" => Some(Aggregator::TruncatedSum),
            _ => None,
        }
    }
}

/// Default (max) aggregation of the outputs.
pub fn aggregate(outputs: &[UnitValue]) -> Result<UnitValue, NetworkError> {
    Aggregator::Max.aggregate(outputs)
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub input: Vec<UnitValue>,
    /// Pre-activations per layer; may lie outside `[0,1]`.
    pub z: Vec<Vec<f64>>,
    /// `relu1(z)` per layer.
    pub a: Vec<Vec<UnitValue>>,
    pub yhat: UnitValue,
}

impl ForwardCache {
    pub fn output(&self) -> &[UnitValue] {
        self.a.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Activations feeding layer `t` (the input for `t = 0`).
    pub fn layer_input(&self, t: usize) -> &[UnitValue] {
        if t == 0 {
            &self.input
        } else {
            &self.a[t - 1]
        }
    }
}

/// Outcome of the stopping predicate `d_L(y, ŷ) →_L ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndCheck {
    pub distance: UnitValue,
    pub truth: UnitValue,
    pub satisfied: bool,
}

/// Evaluates `end(y, λ, ε) = d_L(y, agg λ) →_L ε`; satisfied when the truth
/// value is `1` up to [`TAU`].
pub fn end_condition(
    y: UnitValue,
    outputs: &[UnitValue],
    eps: UnitValue,
    aggregator: Aggregator,
) -> Result<EndCheck, NetworkError> {
    let yhat = aggregator.aggregate(outputs)?;
    let distance = y.dist(yhat);
    let truth = distance.implies(eps);
    Ok(EndCheck {
        distance,
        truth,
        satisfied: truth.is_top(),
    })
}

/// 64-bit FNV-1a digest of a network's canonical text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub u64);

impl Digest {
    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 16 {
            return None;
        }
        u64::from_str_radix(s, 16).ok().map(Digest)
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// All layers of a perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    input_width: usize,
    layers: Vec<LayerParams>,
}

impl NetworkState {
    pub fn new(input_width: usize, layers: Vec<LayerParams>) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::NoLayers);
        }
        if input_width == 0 {
            return Err(NetworkError::ZeroWidth);
        }
        let mut width = input_width;
        for (t, layer) in layers.iter().enumerate() {
            if layer.cols != width {
                return Err(NetworkError::DimensionMismatch {
                    layer: t,
                    expected: width,
                    found: layer.cols,
                });
            }
            width = layer.rows;
        }
        Ok(NetworkState { input_width, layers })
    }

    /// All parameters zero.
    pub fn zeros(dims: &[usize]) -> Result<Self, NetworkError> {
        Self::from_fn(dims, |_, _| UnitValue::ZERO)
    }

    /// Builds a network whose parameters are produced by `param(layer, index)`,
    /// where indices run over the weights row-major and then the biases.
    pub fn from_fn<F>(dims: &[usize], mut param: F) -> Result<Self, NetworkError>
    where
        F: FnMut(usize, usize) -> UnitValue,
    {
        if dims.len() < 2 {
            return Err(NetworkError::NoLayers);
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (t, pair) in dims.windows(2).enumerate() {
            let (cols, rows) = (pair[0], pair[1]);
            let weights = (0..rows * cols).map(|k| param(t, k)).collect();
            let bias = (0..rows).map(|i| param(t, rows * cols + i)).collect();
            layers.push(LayerParams::new(rows, cols, weights, bias)?);
        }
        NetworkState::new(dims[0], layers)
    }

    /// Seeded initialization: weights uniform on `[0, 1/fan_in]`, biases 0.
    pub fn random(dims: &[usize], rng: &mut Prng) -> Result<Self, NetworkError> {
        let fans: Vec<(usize, usize)> = dims.windows(2).map(|p| (p[0], p[1])).collect();
        Self::from_fn(dims, |t, k| {
            let (fan_in, rows) = fans[t];
            if k < rows * fan_in {
                UnitValue::saturating(rng.next_f64() / fan_in as f64)
            } else {
                UnitValue::ZERO
            }
        })
    }

    /// Every parameter uniform on `[0,1]`.
    pub fn random_uniform(dims: &[usize], rng: &mut Prng) -> Result<Self, NetworkError> {
        Self::from_fn(dims, |_, _| UnitValue::saturating(rng.next_f64()))
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    /// `[input_width, width₁, …, width_k]`
    pub fn dims(&self) -> Vec<usize> {
        core::iter::once(self.input_width)
            .chain(self.layers.iter().map(|l| l.rows))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, input: &[UnitValue]) -> Result<ForwardCache, NetworkError> {
        self.forward_with(input, Aggregator::Max)
    }

    pub fn forward_with(
        &self,
        input: &[UnitValue],
        aggregator: Aggregator,
    ) -> Result<ForwardCache, NetworkError> {
        if input.len() != self.input_width {
            return Err(NetworkError::DimensionMismatch {
                layer: 0,
                expected: self.input_width,
                found: input.len(),
            });
        }
        let mut z = Vec::with_capacity(self.layers.len());
        let mut a: Vec<Vec<UnitValue>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let prev = a.last().map(Vec::as_slice).unwrap_or(input);
            let (zt, at) = forward_layer(layer, prev)?;
            z.push(zt);
            a.push(at);
        }
        let yhat = aggregator.aggregate(a.last().expect("at least one layer"))?;
        Ok(ForwardCache {
            input: input.to_vec(),
            z,
            a,
            yhat,
        })
    }

    /// Output activations only, without keeping the cache.
    pub fn predict(&self, input: &[UnitValue]) -> Result<Vec<UnitValue>, NetworkError> {
        if input.len() != self.input_width {
            return Err(NetworkError::DimensionMismatch {
                layer: 0,
                expected: self.input_width,
                found: input.len(),
            });
        }
        let mut current = input.to_vec();
        for layer in &self.layers {
            current = (0..layer.rows)
                .map(|i| UnitValue::saturating(layer.pre_activation(i, &current)))
                .collect();
        }
        Ok(current)
    }

    /// Canonical text: the number of dims, each dim, then every parameter
    /// (layer by layer, weights row-major followed by biases), one per line,
    /// with 17 significant digits.
    pub fn to_canonical_text(&self) -> String {
        let dims = self.dims();
        let mut out = String::with_capacity(24 * (self.param_count() + dims.len() + 1));
        let _ = writeln!(out, "{}", dims.len());
        for d in &dims {
            let _ = writeln!(out, "{d}");
        }
        for layer in &self.layers {
            for v in layer.weights.iter().chain(&layer.bias) {
                let _ = writeln!(out, "{}", Sig17(v.get()));
            }
        }
        out
    }

    pub fn from_canonical_text(text: &str) -> Result<Self, NetworkError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next_line = |what: &str| {
            lines.next().ok_or_else(|| NetworkError::Parse {
                line: 0,
                message: format!("unexpected end of input, expected {what}"),
            })
        };
        let parse_usize = |(line, s): (usize, &str)| {
            s.parse::<usize>().map_err(|_| NetworkError::Parse {
                line,
                message: format!("expected a nonnegative integer, found {s:?}"),
            })
        };
        let count = parse_usize(next_line("dimension count")?)?;
        if count < 2 {
            return Err(NetworkError::NoLayers);
        }
        let mut dims = Vec::with_capacity(count);
        for _ in 0..count {
            dims.push(parse_usize(next_line("dimension")?)?);
        }
        if dims.contains(&0) {
            return Err(NetworkError::ZeroWidth);
        }
        let mut failure = None;
        let net = NetworkState::from_fn(&dims, |_, _| {
            if failure.is_some() {
                return UnitValue::ZERO;
            }
            let parsed = next_line("parameter").and_then(|(line, s)| {
                let x = s.parse::<f64>().map_err(|_| NetworkError::Parse {
                    line,
                    message: format!("expected a number, found {s:?}"),
                })?;
                UnitValue::new(x).map_err(|e| NetworkError::Parse {
                    line,
                    message: format!("{e}"),
                })
            });
            match parsed {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    UnitValue::ZERO
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if let Ok((line, s)) = next_line("end") {
            return Err(NetworkError::Parse {
                line,
                message: format!("trailing content {s:?}"),
            });
        }
        Ok(net)
    }

    pub fn digest(&self) -> Digest {
        Digest(fnv1a64(self.to_canonical_text().as_bytes()))
    }

    /// The worked two-neuron example: `w₀ = [[0.4,0.3],[0.6,0.1]]`,
    /// `w₁ = [[0.9,0.8],[0,1]]`, `b₀ = 0.1`, `b₁ = 0.15` (broadcast).
    pub fn worked_example() -> Self {
        let l0 = LayerParams::from_rows(&[&[0.4, 0.3], &[0.6, 0.1]], &[0.1, 0.1]).unwrap();
        let l1 = LayerParams::from_rows(&[&[0.9, 0.8], &[0.0, 1.0]], &[0.15, 0.15]).unwrap();
        NetworkState::new(2, alloc::vec![l0, l1]).unwrap()
    }

    pub(crate) fn max_param_violation(&self) -> Option<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|v| v.get())
            .find(|v| !(0.0..=1.0).contains(v) || v.is_nan())
    }
}

/// Exact-bit equality of two networks, as opposed to the tolerant `==`.
pub fn bit_identical(a: &NetworkState, b: &NetworkState) -> bool {
    a.dims() == b.dims()
        && a.layers.iter().zip(&b.layers).all(|(x, y)| {
            x.weights
                .iter()
                .chain(&x.bias)
                .zip(y.weights.iter().chain(&y.bias))
                .all(|(p, q)| p.get().to_bits() == q.get().to_bits())
        })
}
