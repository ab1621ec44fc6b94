//! The standard MV-algebra `[0,1]` with the Łukasiewicz connectives and the
//! real-product scalar action.

use core::cmp::Ordering;
use core::fmt;

/// Absolute tolerance for comparing the result of a single operation.
pub const TAU: f64 = 1e-9;

/// Tolerance for quantities accumulated over a full forward/backward pass.
pub const TAU_ACCUMULATED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MvError {
    NonFinite(f64),
    OutOfRange(f64),
}

impl fmt::Display for MvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MvError::NonFinite(x) => write!(f, "non-finite value {x}"),
            MvError::OutOfRange(x) => write!(f, "value {x} outside [0,1]"),
        }
    }
}

impl core::error::Error for MvError {}

/// A truth value in `[0,1]`.
///
/// Equality is approximate: two values compare equal when they differ by at
/// most [`TAU`].
#[derive(Clone, Copy, Default)]
#[repr(transparent)]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    /// Strict constructor: rejects anything outside `[0,1]`.
    pub fn new(x: f64) -> Result<Self, MvError> {
        if !x.is_finite() {
            return Err(MvError::NonFinite(x));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(MvError::OutOfRange(x));
        }
        Ok(UnitValue(x))
    }

    /// Clamping constructor: `min(1, max(0, x))`.
    pub fn clamp01(x: f64) -> Result<Self, MvError> {
        if !x.is_finite() {
            return Err(MvError::NonFinite(x));
        }
        Ok(Self::saturating(x))
    }

    /// Clamps without the finiteness check. NaN maps to 0.
    #[inline]
    pub fn saturating(x: f64) -> Self {
        if x >= 1.0 {
            UnitValue(1.0)
        } else if x > 0.0 {
            UnitValue(x)
        } else {
            UnitValue(0.0)
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `x ⊕ y = min(1, x + y)`
    #[inline]
    pub fn oplus(self, other: Self) -> Self {
        Self::saturating(self.0 + other.0)
    }

    /// `¬x = 1 − x`
    #[inline]
    pub fn neg(self) -> Self {
        UnitValue(1.0 - self.0)
    }

    /// Łukasiewicz product `x ⊙ y = max(0, x + y − 1)`.
    #[inline]
    pub fn otimes(self, other: Self) -> Self {
        Self::saturating(self.0 + other.0 - 1.0)
    }

    /// Truncated difference `x ⊖ y = max(0, x − y)`.
    #[inline]
    pub fn ominus(self, other: Self) -> Self {
        Self::saturating(self.0 - other.0)
    }

    #[inline]
    pub fn join(self, other: Self) -> Self {
        UnitValue(self.0.max(other.0))
    }

    #[inline]
    pub fn meet(self, other: Self) -> Self {
        UnitValue(self.0.min(other.0))
    }

    /// `x →_L y = min(1, 1 − x + y)`
    #[inline]
    pub fn implies(self, other: Self) -> Self {
        Self::saturating(1.0 - self.0 + other.0)
    }

    /// `d_L(x, y) = |x − y|`
    #[inline]
    pub fn dist(self, other: Self) -> Self {
        UnitValue((self.0 - other.0).abs())
    }

    /// Scalar action of `r` on `x`, the real product.
    #[inline]
    pub fn scale(self, x: Self) -> Self {
        UnitValue(self.0 * x.0)
    }

    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        (self.0 - other.0).abs() <= tol
    }

    /// True when the value counts as the top element `1`.
    pub fn is_top(self) -> bool {
        self.0 >= 1.0 - TAU
    }
}

impl PartialEq for UnitValue {
    fn eq(&self, other: &Self) -> bool {
        (self.0 - other.0).abs() <= TAU
    }
}

impl PartialOrd for UnitValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Debug for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<UnitValue> for f64 {
    fn from(v: UnitValue) -> f64 {
        v.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = MvError;

    fn try_from(x: f64) -> Result<Self, MvError> {
        UnitValue::new(x)
    }
}

pub fn clamp01(x: f64) -> Result<UnitValue, MvError> {
    UnitValue::clamp01(x)
}

/// The ReLU₁ activation `min(1, max(0, x))`.
pub fn relu1(x: f64) -> Result<UnitValue, MvError> {
    UnitValue::clamp01(x)
}

/// Left fold of `⊕`; the empty fold is `0`.
pub fn fold_oplus<I>(values: I) -> UnitValue
where
    I: IntoIterator<Item = UnitValue>,
{
    values.into_iter().fold(UnitValue::ZERO, UnitValue::oplus)
}

/// Parses a vector of unit values, rejecting anything outside `[0,1]`.
pub fn unit_vec(xs: &[f64]) -> Result<alloc::vec::Vec<UnitValue>, MvError> {
    xs.iter().map(|&x| UnitValue::new(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: f64) -> UnitValue {
        UnitValue::new(x).unwrap()
    }

    fn close(a: UnitValue, b: f64) -> bool {
        (a.get() - b).abs() <= 1e-12
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp01(0.5).unwrap().get(), 0.5);
        assert_eq!(clamp01(1.3).unwrap().get(), 1.0);
        assert_eq!(clamp01(-0.2).unwrap().get(), 0.0);
        assert!(matches!(clamp01(f64::NAN), Err(MvError::NonFinite(_))));
        assert!(matches!(clamp01(f64::INFINITY), Err(MvError::NonFinite(_))));
    }

    #[test]
    fn strict_constructor_rejects_out_of_range() {
        assert!(matches!(UnitValue::new(1.5), Err(MvError::OutOfRange(_))));
        assert!(matches!(UnitValue::new(-0.0001), Err(MvError::OutOfRange(_))));
        assert_eq!(UnitValue::new(1.0).unwrap().get(), 1.0);
    }

    #[test]
    fn relu1_examples() {
        assert_eq!(relu1(0.27).unwrap().get(), 0.27);
        assert_eq!(relu1(2.0).unwrap().get(), 1.0);
        assert_eq!(relu1(-1.0).unwrap().get(), 0.0);
    }

    #[test]
    fn oplus_and_neg() {
        assert!(close(u(0.2).oplus(u(0.3)), 0.5));
        assert!(close(u(0.7).oplus(u(0.7)), 1.0));
        assert!(close(u(0.42).oplus(UnitValue::ZERO), 0.42));
        assert!(close(u(0.0).neg(), 1.0));
        assert!(close(u(0.3).neg(), 0.7));
        assert!(close(u(0.42).neg().neg(), 0.42));
    }

    #[test]
    fn derived_operations() {
        assert!(close(u(0.174).otimes(u(0.9)), 0.074));
        assert!(close(u(0.174).implies(u(0.1)), 0.926));
        assert!(close(u(0.8).dist(u(0.626)), 0.174));
        assert!(close(u(0.7).ominus(u(0.2)), 0.5));
        assert!(close(u(0.2).ominus(u(0.7)), 0.0));
        assert!(close(u(0.2).join(u(0.7)), 0.7));
        assert!(close(u(0.2).meet(u(0.7)), 0.2));
    }

    #[test]
    fn scale_examples() {
        assert!(close(UnitValue::ONE.scale(u(0.37)), 0.37));
        assert!(close(u(0.5).scale(u(0.5)), 0.25));
        assert!(close(UnitValue::ZERO.scale(u(0.9)), 0.0));
    }

    #[test]
    fn fold_examples() {
        assert_eq!(fold_oplus([]).get(), 0.0);
        let s = fold_oplus([u(0.08), u(0.09), u(0.1)]);
        assert!(close(s, 0.27));
        assert!(close(fold_oplus([u(0.6), u(0.6), u(0.6)]), 1.0));
    }

    #[test]
    fn equality_is_tolerant() {
        assert_eq!(u(0.5), u(0.5 + 5e-10));
        assert_ne!(u(0.5), u(0.5 + 5e-9));
    }
}
