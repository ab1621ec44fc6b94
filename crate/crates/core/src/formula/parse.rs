use alloc::format;
use alloc::string::ToString;

use super::{Formula, FormulaError};
use crate::mv::UnitValue;

const MAX_FRACTION_DIGITS: usize = 9;

/// Parses the text syntax. Errors carry the byte offset of the problem.
pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let phi = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(phi)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> FormulaError {
        FormulaError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn at_oplus_token(&mut self) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(b"(+)")
    }

    fn expect(&mut self, c: u8) -> Result<(), FormulaError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Formula::not(self.formula()?))
            }
            Some(b'<') => {
                self.pos += 1;
                let r = self.number()?;
                self.expect(b'>')?;
                Ok(Formula::scale(r, self.formula()?))
            }
            Some(b'c') => {
                self.pos += 1;
                Ok(Formula::Const(self.number()?))
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(Formula::Var(self.natural()?))
            }
            Some(b'(') => {
                if self.at_oplus_token() {
                    return Err(self.error("'(+)' without a left operand"));
                }
                self.pos += 1;
                let left = self.formula()?;
                if self.at_oplus_token() {
                    self.pos += 3;
                    let right = self.formula()?;
                    self.expect(b')')?;
                    Ok(Formula::oplus(left, right))
                } else {
                    self.expect(b')')?;
                    Ok(left)
                }
            }
            Some(_) => Err(self.error("expected a formula")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn natural(&mut self) -> Result<usize, FormulaError> {
        let start = self.pos;
        if self.digits() == 0 {
            return Err(self.error("expected a variable index"));
        }
        let s = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        s.parse().map_err(|_| FormulaError::Syntax {
            offset: start,
            message: "variable index too large".to_string(),
        })
    }

    fn number(&mut self) -> Result<UnitValue, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        if self.digits() == 0 {
            return Err(self.error("expected a number"));
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits();
            if frac == 0 {
                return Err(self.error("expected fractional digits"));
            }
            if frac > MAX_FRACTION_DIGITS {
                return Err(FormulaError::Syntax {
                    offset: start,
                    message: format!("more than {MAX_FRACTION_DIGITS} fractional digits"),
                });
            }
        }
        let s = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = s.parse().map_err(|_| FormulaError::Syntax {
            offset: start,
            message: "malformed number".to_string(),
        })?;
        UnitValue::new(value)
            .map_err(|_| FormulaError::CoefficientOutOfRange { offset: start, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::print;

    fn u(x: f64) -> UnitValue {
        UnitValue::new(x).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse("c0.5").unwrap(), Formula::Const(u(0.5)));
        assert_eq!(
            parse("!(c0.2 (+) c0.3)").unwrap(),
            Formula::not(Formula::oplus(Formula::Const(u(0.2)), Formula::Const(u(0.3))))
        );
        assert_eq!(
            parse("<1.5>x0"),
            Err(FormulaError::CoefficientOutOfRange {
                offset: 1,
                value: 1.5
            })
        );
    }

    #[test]
    fn whitespace_and_parentheses() {
        let phi = parse("  ( ( c0.1 )  (+)\t<0.4> x0 ) ").unwrap();
        assert_eq!(print(&phi), "(c0.1 (+) <0.4>x0)");
        assert_eq!(parse("((x3))").unwrap(), Formula::Var(3));
        assert_eq!(parse("c1").unwrap(), Formula::Const(UnitValue::ONE));
    }

    #[test]
    fn syntax_errors_report_offsets() {
        let cases = [
            ("", 0),
            ("(c0.1 (+) c0.2", 14),
            ("c0.1 c0.2", 5),
            ("c.5", 1),
            ("x", 1),
            ("c0.", 3),
            ("(+) c0", 0),
            ("<0.5 x0", 5),
            ("y0", 0),
        ];
        for (text, offset) in cases {
            match parse(text) {
                Err(FormulaError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(matches!(parse("c0.1234567891"), Err(FormulaError::Syntax { .. })));
    }

    #[test]
    fn printed_output_parses_back() {
        let text = "(!<0.25>(x0 (+) c0.5) (+) <1>!!x12)";
        assert_eq!(print(&parse(text).unwrap()), text);
    }
}
