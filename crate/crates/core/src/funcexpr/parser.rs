//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := unary ("^" nonneg_integer)? ;
//! unary  := "-"? base ;
//! base   := "z" | "i" | number | "(" expr ")" | func "(" expr ")" ;
//! func   := "exp" | "sin" | "cos" | "log" ;
//! ```

use thiserror::Error;

use super::ast::{Func, HoloExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_, s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v, s.to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {wanted}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expr(&mut self) -> Result<HoloExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = HoloExpr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = HoloExpr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<HoloExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = HoloExpr::mul(lhs, self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = HoloExpr::div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<HoloExpr, ParseError> {
        let base = self.unary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Minus => Err(ParseError::NegativeExponent { pos }),
            Tok::Num(_, s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let n: u32 = s.parse().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: format!("exponent `{s}` is too large"),
                })?;
                Ok(HoloExpr::pow(base, n))
            }
            Tok::Num(_, s) => Err(ParseError::Syntax {
                pos,
                msg: format!("exponent must be a non-negative integer, found `{s}`"),
            }),
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected integer exponent, found {}", other.describe()),
            }),
        }
    }

    fn unary(&mut self) -> Result<HoloExpr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(HoloExpr::Neg(Box::new(self.base()?)))
        } else {
            self.base()
        }
    }

    fn base(&mut self) -> Result<HoloExpr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(HoloExpr::real(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "z" => Ok(HoloExpr::Var),
                    "i" => Ok(HoloExpr::I),
                    other => match Func::from_name(other) {
                        Some(func) => {
                            self.expect(Tok::LParen, "`(` after function name")?;
                            let arg = self.expr()?;
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(HoloExpr::call(func, arg))
                        }
                        None => Err(ParseError::UnknownIdentifier {
                            pos,
                            name: name.clone(),
                        }),
                    },
                }
            }
            _ => Err(self.unexpected("an operand")),
        }
    }
}

/// Parses an expression in the variable `z`.
pub fn parse_expr(text: &str) -> Result<HoloExpr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::Ident(_) | Tok::Num(..) | Tok::LParen => Err(ParseError::Syntax {
            pos: p.pos(),
            msg: format!(
                "unexpected {} (implicit multiplication is not supported)",
                p.peek().describe()
            ),
        }),
        _ => Err(p.unexpected("an operator or end of input")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use HoloExpr::*;

    fn b(e: HoloExpr) -> Box<HoloExpr> {
        Box::new(e)
    }

    #[test]
    fn polynomial_with_imaginary_unit() {
        let e = parse_expr("z^2 + i*z").unwrap();
        assert_eq!(e, Add(b(Pow(b(Var), 2)), b(Mul(b(I), b(Var)))));
    }

    #[test]
    fn nested_call() {
        let e = parse_expr("exp(i/(1-z))").unwrap();
        let inner = Div(b(I), b(Sub(b(HoloExpr::real(1.0)), b(Var))));
        assert_eq!(e, Call(Func::Exp, b(inner)));
    }

    #[test]
    fn negative_exponent_rejected() {
        assert_eq!(
            parse_expr("z^-1"),
            Err(ParseError::NegativeExponent { pos: 2 })
        );
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(matches!(
            parse_expr("z^2.5"),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
    }

    #[test]
    fn implicit_multiplication_rejected() {
        let err = parse_expr("2z").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 1, .. }), "{err}");
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse_expr("1 + sqrt(z)"),
            Err(ParseError::UnknownIdentifier {
                pos: 4,
                name: "sqrt".into()
            })
        );
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        assert_eq!(parse_expr("-z^2").unwrap(), Pow(b(Neg(b(Var))), 2));
    }

    #[test]
    fn chained_power_is_an_error() {
        assert!(parse_expr("z^2^3").is_err());
        assert!(parse_expr("(z^2)^3").is_ok());
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse_expr("1e-3").unwrap(), HoloExpr::real(1e-3));
        assert_eq!(parse_expr(".5").unwrap(), HoloExpr::real(0.5));
    }

    #[test]
    fn unbalanced_parens() {
        assert!(parse_expr("(z + 1").is_err());
        assert!(parse_expr("z + 1)").is_err());
        assert!(parse_expr("").is_err());
    }
}
