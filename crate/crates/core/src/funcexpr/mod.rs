//! Expression trees for holomorphic functions, a text parser, and jet
//! evaluation giving machine-precision derivatives of any order.

mod ast;
mod jet;
mod parser;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use ast::{Func, HoloExpr};
pub use jet::{Jet, SINGULAR_MODULUS};
pub use parser::{parse_expr, ParseError};

use crate::error::Result;

/// A labelled holomorphic function.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFunction {
    pub expr: HoloExpr,
    pub label: String,
}

impl HoloFunction {
    pub fn new(expr: HoloExpr, label: impl Into<String>) -> Self {
        HoloFunction {
            expr,
            label: label.into(),
        }
    }

    /// Parses `text`; the source text becomes the label.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        Ok(HoloFunction::new(parse_expr(text)?, text.trim()))
    }

    pub fn zero() -> Self {
        HoloFunction::new(HoloExpr::real(0.0), "0")
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_jet(z, 0)?.value())
    }

    pub fn eval_jet(&self, z0: Complex64, order: usize) -> Result<Jet> {
        eval_node(&self.expr, z0, order)
    }

    /// `k`-th complex derivative at `z0`.
    pub fn derivative(&self, z0: Complex64, k: usize) -> Result<Complex64> {
        Ok(self.eval_jet(z0, k)?.derivative(k))
    }

    pub fn is_constant(&self) -> bool {
        self.expr.is_constant()
    }
}

impl std::fmt::Display for HoloFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.expr)
    }
}

impl Serialize for HoloFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.expr.to_string())
    }
}

impl<'de> Deserialize<'de> for HoloFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        HoloFunction::parse(&text).map_err(serde::de::Error::custom)
    }
}

fn eval_node(e: &HoloExpr, z0: Complex64, order: usize) -> Result<Jet> {
    use HoloExpr::*;
    Ok(match e {
        Var => Jet::variable(z0, order),
        Lit(c) => Jet::constant(z0, order, *c),
        I => Jet::constant(z0, order, Complex64::i()),
        Neg(a) => -&eval_node(a, z0, order)?,
        Add(a, b) => &eval_node(a, z0, order)? + &eval_node(b, z0, order)?,
        Sub(a, b) => &eval_node(a, z0, order)? - &eval_node(b, z0, order)?,
        Mul(a, b) => &eval_node(a, z0, order)? * &eval_node(b, z0, order)?,
        Div(a, b) => eval_node(a, z0, order)?.try_div(&eval_node(b, z0, order)?)?,
        Pow(a, n) => eval_node(a, z0, order)?.powi(*n),
        Call(f, a) => {
            let inner = eval_node(a, z0, order)?;
            match f {
                Func::Exp => inner.exp(),
                Func::Sin => inner.sin_cos().0,
                Func::Cos => inner.sin_cos().1,
                Func::Log => inner.try_ln()?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, SingularityKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f(s: &str) -> HoloFunction {
        HoloFunction::parse(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(f("z^2").eval(c(2.0, 0.0)).unwrap(), c(4.0, 0.0));
        assert_eq!(f("exp(z)").eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert!(matches!(
            f("1/(1-z)").eval(c(1.0, 0.0)),
            Err(Error::Singularity {
                kind: SingularityKind::DivisionByZero,
                ..
            })
        ));
        assert!(matches!(
            f("log(z)").eval(c(0.0, 0.0)),
            Err(Error::Singularity {
                kind: SingularityKind::LogOfZero,
                ..
            })
        ));
    }

    #[test]
    fn jet_examples() {
        let j = f("z^3").eval_jet(c(2.0, 0.0), 2).unwrap();
        assert_eq!(j.coeffs(), &[c(8.0, 0.0), c(12.0, 0.0), c(6.0, 0.0)]);

        let j = f("exp(z)").eval_jet(c(0.0, 0.0), 4).unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (got, w) in j.coeffs().iter().zip(want) {
            assert!((got - c(w, 0.0)).norm() < 1e-16);
        }

        let a = c(0.3, -0.4);
        let j = f("z").eval_jet(a, 1).unwrap();
        assert_eq!(j.coeffs(), &[a, c(1.0, 0.0)]);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(f("z^3").derivative(c(2.0, 0.0), 2).unwrap(), c(12.0, 0.0));
        for k in 0..7 {
            let d = f("exp(z)").derivative(c(0.0, 0.0), k).unwrap();
            assert!((d - c(1.0, 0.0)).norm() < 1e-13, "k={k}");
        }
        assert_eq!(f("z^2/2").derivative(c(0.0, 0.0), 2).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn trig_and_log_derivatives() {
        let z0 = c(0.2, 0.1);
        let d = f("sin(z)").derivative(z0, 3).unwrap();
        assert!((d + z0.cos()).norm() < 1e-14);
        let d = f("cos(z)").derivative(z0, 2).unwrap();
        assert!((d + z0.cos()).norm() < 1e-14);
        let d = f("log(1+z)").derivative(z0, 3).unwrap();
        let want = 2.0 / (c(1.0, 0.0) + z0).powi(3);
        assert!((d - want).norm() < 1e-13);
    }

    #[test]
    fn serde_as_dsl_string() {
        let h = f("exp(i/(1-z))");
        let json = serde_json::to_string(&h).unwrap();
        let back: HoloFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back.expr, h.expr);
    }
}
