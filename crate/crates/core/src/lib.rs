//! Multilayer perceptrons computed entirely in standard MV-algebra arithmetic
//! on the unit interval.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`mv`]: the Łukasiewicz kernel ([`UnitValue`] and its operations),
//! - [`formula`]: rmv-formulas with rational constants and the `◇ᵣ` scalar
//!   modality, a parser/printer, an axiom-driven simplifier and the
//!   network-to-formula extractor,
//! - [`network`]: ReLU₁ perceptron state, forward pass, aggregation and the
//!   stopping predicate,
//! - [`training`]: backpropagation whose updates are expressed with `⊕`, `⊖`
//!   and `⊙`, mini-batch training and finite-difference validation,
//! - [`trace`]: training runs as sequences of inference steps tagged with the
//!   training axioms, plus an independent checker,
//! - [`dataset`]: seeded two-moons generation, scaling and splitting,
//! - [`selftest`]: the algebra equation suite, generic over an implementation.
//!
//! File and terminal IO live in the `lukmlp` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod formula;
pub mod mv;
pub mod network;
pub mod num;
pub mod selftest;
pub mod trace;
pub mod training;

pub use dataset::{Dataset, Prng, Scaling};
pub use formula::Formula;
pub use mv::{clamp01, fold_oplus, relu1, MvError, UnitValue, TAU, TAU_ACCUMULATED};
pub use network::{Aggregator, Digest, ForwardCache, LayerParams, NetworkError, NetworkState};
pub use trace::{Action, Axiom, Configuration, Trace, TraceStep};
pub use training::{GradientBundle, Sample, TrainConfig};
