//! rmv-sort formulas: nominal constants `γᵣ`, variables, `¬`, `⊕` and the
//! scalar modality `◇ᵣ`.
//!
//! Text syntax (whitespace between tokens is ignored):
//!
//! ```text
//! formula := "(" formula "(+)" formula ")" | unary
//! unary   := "!" unary | "<" NUM ">" unary | atom
//! atom    := "c" NUM | "x" NAT | "(" formula ")"
//! ```
//!
//! `NUM` is a decimal in `[0,1]` with at most nine fractional digits.

mod extract;
mod parse;
mod simplify;

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::mv::UnitValue;
use crate::network::NetworkError;

pub use extract::{extract, extract_aggregate, extract_all};
pub use parse::parse;
pub use simplify::simplify;

#[derive(Debug, Clone, PartialEq)]
pub enum FormulaError {
    UnboundVariable(usize),
    Syntax { offset: usize, message: String },
    CoefficientOutOfRange { offset: usize, value: f64 },
    NonUnitParameter,
    OutputIndex { index: usize, width: usize },
    Network(NetworkError),
}

impl fmt::Display for FormulaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaError::UnboundVariable(i) => write!(f, "unbound variable x{i}"),
            FormulaError::Syntax { offset, message } => {
                write!(f, "syntax error at byte {offset}: {message}")
            }
            FormulaError::CoefficientOutOfRange { offset, value } => {
                write!(f, "coefficient out of range at byte {offset}: {value}")
            }
            FormulaError::NonUnitParameter => {
                f.write_str("extraction requires unit-interval parameters")
            }
            FormulaError::OutputIndex { index, width } => {
                write!(f, "output index {index} out of range for width {width}")
            }
            FormulaError::Network(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FormulaError {}

impl From<NetworkError> for FormulaError {
    fn from(e: NetworkError) -> Self {
        FormulaError::Network(e)
    }
}

/// A formula over the primitive connectives. Derived connectives are smart
/// constructors that expand into these.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Const(UnitValue),
    Var(usize),
    Neg(Box<Formula>),
    Oplus(Box<Formula>, Box<Formula>),
    Scale(UnitValue, Box<Formula>),
}

impl Formula {
    pub fn constant(r: UnitValue) -> Self {
        Formula::Const(r)
    }

    pub fn var(i: usize) -> Self {
        Formula::Var(i)
    }

    pub fn not(phi: Formula) -> Self {
        Formula::Neg(Box::new(phi))
    }

    pub fn oplus(a: Formula, b: Formula) -> Self {
        Formula::Oplus(Box::new(a), Box::new(b))
    }

    pub fn scale(r: UnitValue, phi: Formula) -> Self {
        Formula::Scale(r, Box::new(phi))
    }

    /// `a ⊙ b := ¬(¬a ⊕ ¬b)`
    pub fn otimes(a: Formula, b: Formula) -> Self {
        Self::not(Self::oplus(Self::not(a), Self::not(b)))
    }

    /// `a ⊖ b := a ⊙ ¬b`
    pub fn ominus(a: Formula, b: Formula) -> Self {
        Self::otimes(a, Self::not(b))
    }

    /// `a ∨ b := (a ⊙ ¬b) ⊕ b`
    pub fn join(a: Formula, b: Formula) -> Self {
        Self::oplus(Self::otimes(a, Self::not(b.clone())), b)
    }

    /// `a ∧ b := (a ⊕ ¬b) ⊙ b`
    pub fn meet(a: Formula, b: Formula) -> Self {
        Self::otimes(Self::oplus(a, Self::not(b.clone())), b)
    }

    /// `a → b := ¬a ⊕ b`
    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::oplus(Self::not(a), b)
    }

    /// `d(a, b) := (a ⊙ ¬b) ⊕ (b ⊙ ¬a)`
    pub fn dist(a: Formula, b: Formula) -> Self {
        Self::oplus(
            Self::otimes(a.clone(), Self::not(b.clone())),
            Self::otimes(b, Self::not(a)),
        )
    }

    /// Standard-model evaluation; `env[i]` is the value of `xᵢ`.
    pub fn eval(&self, env: &[UnitValue]) -> Result<UnitValue, FormulaError> {
        Ok(match self {
            Formula::Const(r) => *r,
            Formula::Var(i) => *env.get(*i).ok_or(FormulaError::UnboundVariable(*i))?,
            Formula::Neg(a) => a.eval(env)?.neg(),
            Formula::Oplus(a, b) => a.eval(env)?.oplus(b.eval(env)?),
            Formula::Scale(r, a) => r.scale(a.eval(env)?),
        })
    }

    pub fn node_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 1,
            Formula::Neg(a) | Formula::Scale(_, a) => 1 + a.node_count(),
            Formula::Oplus(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 1,
            Formula::Neg(a) | Formula::Scale(_, a) => 1 + a.depth(),
            Formula::Oplus(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// One past the largest variable index, 0 for closed formulas.
    pub fn arity(&self) -> usize {
        match self {
            Formula::Const(_) => 0,
            Formula::Var(i) => i + 1,
            Formula::Neg(a) | Formula::Scale(_, a) => a.arity(),
            Formula::Oplus(a, b) => a.arity().max(b.arity()),
        }
    }
}

/// Up to nine fractional digits, trailing zeros stripped.
pub(crate) struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = String::new();
        fmt::write(&mut buf, format_args!("{:.9}", self.0))?;
        let trimmed = buf.trim_end_matches('0').trim_end_matches('.');
        f.write_str(if trimmed == "-0" { "0" } else { trimmed })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(r) => write!(f, "c{}", Num(r.get())),
            Formula::Var(i) => write!(f, "x{i}"),
            Formula::Neg(a) => write!(f, "!{a}"),
            Formula::Oplus(a, b) => write!(f, "({a} (+) {b})"),
            Formula::Scale(r, a) => write!(f, "<{}>{a}", Num(r.get())),
        }
    }
}

/// Renders a formula in the text syntax.
pub fn print(phi: &Formula) -> String {
    alloc::format!("{phi}")
}
