//! Directed rewrites taken from the rmv axioms, applied innermost-first until
//! nothing fires:
//!
//! | rule                     | axiom  |
//! |--------------------------|--------|
//! | `¬γᵣ → γ₁₋ᵣ`             | Nom1   |
//! | `γᵣ ⊕ γ_q → γ_{r⊕q}`     | Nom2   |
//! | `◇ᵣγ_q → γ_{r·q}`        | Nom3   |
//! | `¬¬φ → φ`                | M4     |
//! | `φ ⊕ γ₀ → φ`, `γ₀ ⊕ φ → φ` | M5, M6 |
//! | `◇₁φ → φ`                | R4     |
//! | `◇ᵣ◇_qφ → ◇_{r·q}φ`      | R3     |
//!
//! Every rule removes at least one node, so rewriting terminates and never
//! grows the formula.

use alloc::boxed::Box;

use super::Formula;

pub fn simplify(phi: &Formula) -> Formula {
    normalize(phi.clone())
}

/// Children are normalized first; a rule firing at the root re-normalizes
/// the result, whose children are already in normal form.
fn normalize(phi: Formula) -> Formula {
    let phi = match phi {
        Formula::Neg(a) => Formula::Neg(Box::new(normalize(*a))),
        Formula::Oplus(a, b) => Formula::Oplus(Box::new(normalize(*a)), Box::new(normalize(*b))),
        Formula::Scale(r, a) => Formula::Scale(r, Box::new(normalize(*a))),
        leaf => leaf,
    };
    match rewrite_root(phi) {
        Ok(rewritten) => normalize(rewritten),
        Err(unchanged) => unchanged,
    }
}

fn is_const(phi: &Formula, value: f64) -> bool {
    matches!(phi, Formula::Const(r) if r.get() == value)
}

/// One rule application at the root, or the formula back if none applies.
fn rewrite_root(phi: Formula) -> Result<Formula, Formula> {
    match phi {
        Formula::Neg(a) => match *a {
            Formula::Const(r) => Ok(Formula::Const(r.neg())),
            Formula::Neg(inner) => Ok(*inner),
            other => Err(Formula::Neg(Box::new(other))),
        },
        Formula::Oplus(a, b) => match (*a, *b) {
            (Formula::Const(r), Formula::Const(q)) => Ok(Formula::Const(r.oplus(q))),
            (left, right) if is_const(&right, 0.0) => Ok(left),
            (left, right) if is_const(&left, 0.0) => Ok(right),
            (left, right) => Err(Formula::oplus(left, right)),
        },
        Formula::Scale(r, a) => {
            if r.get() == 1.0 {
                return Ok(*a);
            }
            match *a {
                Formula::Const(q) => Ok(Formula::Const(r.scale(q))),
                Formula::Scale(q, inner) => Ok(Formula::Scale(r.scale(q), inner)),
                other => Err(Formula::Scale(r, Box::new(other))),
            }
        }
        leaf => Err(leaf),
    }
}
