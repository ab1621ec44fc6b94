//! Randomized equation suite for MV-algebra implementations.
//!
//! An implementation supplies `⊕`, `¬` and scalar multiplication through
//! [`MvAlgebra`]; the remaining connectives default to their definitions in
//! terms of those. Each [`Equation`] compares two evaluations on sampled
//! points of `[0,1]`.

use alloc::vec::Vec;

use crate::dataset::Prng;
use crate::mv::{UnitValue, TAU};

pub trait MvAlgebra {
    fn oplus(&self, a: f64, b: f64) -> f64;
    fn neg(&self, a: f64) -> f64;
    fn scale(&self, r: f64, a: f64) -> f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn otimes(&self, a: f64, b: f64) -> f64 {
        self.neg(self.oplus(self.neg(a), self.neg(b)))
    }
    fn ominus(&self, a: f64, b: f64) -> f64 {
        self.otimes(a, self.neg(b))
    }
    fn join(&self, a: f64, b: f64) -> f64 {
        self.oplus(self.otimes(a, self.neg(b)), b)
    }
    fn meet(&self, a: f64, b: f64) -> f64 {
        self.otimes(self.oplus(a, self.neg(b)), b)
    }
    fn implies(&self, a: f64, b: f64) -> f64 {
        self.oplus(self.neg(a), b)
    }
}

/// The standard model, backed by [`UnitValue`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Standard;

impl MvAlgebra for Standard {
    fn oplus(&self, a: f64, b: f64) -> f64 {
        UnitValue::saturating(a).oplus(UnitValue::saturating(b)).get()
    }
    fn neg(&self, a: f64) -> f64 {
        UnitValue::saturating(a).neg().get()
    }
    fn scale(&self, r: f64, a: f64) -> f64 {
        UnitValue::saturating(r).scale(UnitValue::saturating(a)).get()
    }
    fn otimes(&self, a: f64, b: f64) -> f64 {
        UnitValue::saturating(a).otimes(UnitValue::saturating(b)).get()
    }
    fn ominus(&self, a: f64, b: f64) -> f64 {
        UnitValue::saturating(a).ominus(UnitValue::saturating(b)).get()
    }
    fn join(&self, a: f64, b: f64) -> f64 {
        UnitValue::saturating(a).join(UnitValue::saturating(b)).get()
    }
    fn meet(&self, a: f64, b: f64) -> f64 {
        UnitValue::saturating(a).meet(UnitValue::saturating(b)).get()
    }
    fn implies(&self, a: f64, b: f64) -> f64 {
        UnitValue::saturating(a).implies(UnitValue::saturating(b)).get()
    }
}

/// Deliberately broken model whose `⊕` does not truncate at 1; the suite
/// must reject it.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnclampedOplus;

impl MvAlgebra for UnclampedOplus {
    fn oplus(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn neg(&self, a: f64) -> f64 {
        1.0 - a
    }
    fn scale(&self, r: f64, a: f64) -> f64 {
        r * a
    }
}

/// Sampled point: three formula values `x, y, z` and two scalars `r, q`.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub r: f64,
    pub q: f64,
}

pub struct Equation {
    pub name: &'static str,
    /// Left- and right-hand sides at a point.
    pub sides: fn(&dyn MvAlgebra, &Point) -> (f64, f64),
}

macro_rules! eq {
    ($name:literal, |$a:ident, $p:ident| $lhs:expr, $rhs:expr) => {
        Equation {
            name: $name,
            sides: |$a: &dyn MvAlgebra, $p: &Point| ($lhs, $rhs),
        }
    };
}

/// Every equation in the suite. `M*` and `R*` are read under evaluation,
/// with `γᵣ` as the constant `r` and `◇ᵣ` as scalar multiplication.
pub fn equations() -> Vec<Equation> {
    alloc::vec![
        eq!("MV1", |a, p| a.neg(a.neg(p.x)), p.x),
        eq!("MV2", |a, p| a.oplus(a.neg(a.zero()), p.x), a.neg(a.zero())),
        eq!("MV3",
            |a, p| a.oplus(a.neg(a.oplus(a.neg(p.x), p.y)), p.y),
            a.oplus(a.neg(a.oplus(a.neg(p.y), p.x)), p.x)),
        eq!("Nom1", |a, p| a.neg(p.r), 1.0 - p.r),
        eq!("Nom2", |a, p| a.oplus(p.r, p.q), (p.r + p.q).min(1.0)),
        eq!("Nom3", |a, p| a.scale(p.r, p.q), p.r * p.q),
        eq!("M1", |a, p| a.oplus(p.x, a.oplus(p.y, p.z)), a.oplus(a.oplus(p.x, p.y), p.z)),
        eq!("M2", |a, p| a.oplus(a.neg(a.zero()), p.x), a.neg(a.zero())),
        eq!("M3",
            |a, p| a.oplus(a.otimes(p.x, a.neg(p.y)), p.y),
            a.oplus(a.otimes(p.y, a.neg(p.x)), p.x)),
        eq!("M4", |a, p| a.neg(a.neg(p.x)), p.x),
        eq!("M5", |a, p| a.oplus(p.x, p.y), a.oplus(p.y, p.x)),
        eq!("M6", |a, p| a.oplus(p.x, a.zero()), p.x),
        eq!("R1",
            |a, p| a.scale(p.r, a.otimes(p.x, a.neg(p.y))),
            a.otimes(a.scale(p.r, p.x), a.neg(a.scale(p.r, p.y)))),
        eq!("R2",
            |a, p| a.scale(a.otimes(p.r, a.neg(p.q)), p.x),
            a.otimes(a.scale(p.r, p.x), a.neg(a.scale(p.q, p.x)))),
        eq!("R3", |a, p| a.scale(p.r, a.scale(p.q, p.x)), a.scale(p.r * p.q, p.x)),
        eq!("R4", |a, p| a.scale(1.0, p.x), p.x),
        eq!("RMV1",
            |a, p| a.scale(p.r, a.ominus(p.x, p.y)),
            a.ominus(a.scale(p.r, p.x), a.scale(p.r, p.y))),
        eq!("RMV2",
            |a, p| a.scale(a.ominus(p.r, p.q), p.x),
            a.ominus(a.scale(p.r, p.x), a.scale(p.q, p.x))),
        eq!("RMV3", |a, p| a.scale(p.r, a.scale(p.q, p.x)), a.scale(p.r * p.q, p.x)),
        eq!("RMV4", |a, p| a.scale(1.0, p.x), p.x),
        eq!("fold",
            |a, p| [p.x, p.y, p.z, p.r, p.q].iter().fold(a.zero(), |acc, &v| a.oplus(acc, v)),
            (p.x + p.y + p.z + p.r + p.q).min(1.0)),
        eq!("order",
            |a, p| (a.implies(p.x, p.y) >= 1.0 - TAU) as u8 as f64,
            (p.x <= p.y + TAU) as u8 as f64),
        eq!("join", |a, p| a.join(p.x, p.y), p.x.max(p.y)),
        eq!("meet", |a, p| a.meet(p.x, p.y), p.x.min(p.y)),
        eq!("dist",
            |a, p| a.oplus(a.ominus(p.x, p.y), a.ominus(p.y, p.x)),
            (p.x - p.y).abs()),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationResult {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub results: Vec<EquationResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.failures == 0).count()
    }

    pub fn failed(&self) -> usize {
        self.results.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

pub const DEFAULT_SAMPLES: usize = 100_000;

/// Mostly uniform, with exact endpoints and repeated values mixed in so that
/// boundary cases are hit.
fn sample_value(rng: &mut Prng, previous: f64) -> f64 {
    match rng.below(20) {
        0 => 0.0,
        1 => 1.0,
        2 => previous,
        _ => rng.next_f64(),
    }
}

fn sample_point(rng: &mut Prng) -> Point {
    let x = sample_value(rng, 0.5);
    let y = sample_value(rng, x);
    let z = sample_value(rng, y);
    let r = sample_value(rng, z);
    let q = sample_value(rng, r);
    Point { x, y, z, r, q }
}

/// Evaluates every equation on `samples` points, failing a sample whose
/// sides differ by more than `tol` or that leaves `[0,1]`.
pub fn run_suite(alg: &dyn MvAlgebra, samples: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut results = Vec::new();
    for (k, eq) in equations().into_iter().enumerate() {
        let mut rng = Prng::new(seed.wrapping_add(k as u64));
        let mut failures = 0;
        let mut max_error = 0.0f64;
        for _ in 0..samples {
            let p = sample_point(&mut rng);
            let (lhs, rhs) = (eq.sides)(alg, &p);
            let err = (lhs - rhs).abs();
            let in_range = (0.0..=1.0).contains(&lhs) && (0.0..=1.0).contains(&rhs);
            if !(err <= tol) || !in_range {
                failures += 1;
            }
            if err.is_nan() {
                max_error = f64::INFINITY;
            } else {
                max_error = max_error.max(err);
            }
        }
        results.push(EquationResult {
            name: eq.name,
            samples,
            failures,
            max_error,
        });
    }
    SuiteReport { results }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_model_passes() {
        let report = run_suite(&Standard, 5_000, 1, TAU);
        assert!(report.all_passed(), "{report:?}");
        assert!(report.results.len() >= 22);
    }

    #[test]
    fn unclamped_oplus_is_caught() {
        let report = run_suite(&UnclampedOplus, 2_000, 1, TAU);
        assert!(!report.all_passed());
        let failed: Vec<_> = report.results.iter().filter(|r| r.failures > 0).map(|r| r.name).collect();
        assert!(failed.contains(&"MV2"), "{failed:?}");
        assert!(failed.contains(&"Nom2"));
    }
}
