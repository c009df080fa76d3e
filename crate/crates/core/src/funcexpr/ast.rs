use std::fmt;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Log => "log",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Expression tree of a holomorphic function of the variable `z`.
///
/// The printed form (via `Display`) re-parses to a structurally identical
/// tree for every tree produced by the parser. Literals with a non-zero
/// imaginary part only arise from programmatic construction and print as an
/// equivalent sum.
#[derive(Debug, Clone, PartialEq)]
pub enum HoloExpr {
    Var,
    Lit(Complex64),
    I,
    Neg(Box<HoloExpr>),
    Add(Box<HoloExpr>, Box<HoloExpr>),
    Sub(Box<HoloExpr>, Box<HoloExpr>),
    Mul(Box<HoloExpr>, Box<HoloExpr>),
    Div(Box<HoloExpr>, Box<HoloExpr>),
    Pow(Box<HoloExpr>, u32),
    Call(Func, Box<HoloExpr>),
}

#[allow(clippy::should_implement_trait)]
impl HoloExpr {
    pub fn real(v: f64) -> Self {
        HoloExpr::Lit(Complex64::new(v, 0.0))
    }

    pub fn lit(c: Complex64) -> Self {
        HoloExpr::Lit(c)
    }

    pub fn add(a: HoloExpr, b: HoloExpr) -> Self {
        HoloExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: HoloExpr, b: HoloExpr) -> Self {
        HoloExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: HoloExpr, b: HoloExpr) -> Self {
        HoloExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: HoloExpr, b: HoloExpr) -> Self {
        HoloExpr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: HoloExpr, n: u32) -> Self {
        HoloExpr::Pow(Box::new(a), n)
    }

    pub fn call(f: Func, a: HoloExpr) -> Self {
        HoloExpr::Call(f, Box::new(a))
    }

    /// Replaces every occurrence of the variable with `sub`.
    pub fn substitute(&self, sub: &HoloExpr) -> HoloExpr {
        use HoloExpr::*;
        match self {
            Var => sub.clone(),
            Lit(c) => Lit(*c),
            I => I,
            Neg(a) => Neg(Box::new(a.substitute(sub))),
            Add(a, b) => HoloExpr::add(a.substitute(sub), b.substitute(sub)),
            Sub(a, b) => HoloExpr::sub(a.substitute(sub), b.substitute(sub)),
            Mul(a, b) => HoloExpr::mul(a.substitute(sub), b.substitute(sub)),
            Div(a, b) => HoloExpr::div(a.substitute(sub), b.substitute(sub)),
            Pow(a, n) => HoloExpr::pow(a.substitute(sub), *n),
            Call(f, a) => HoloExpr::call(*f, a.substitute(sub)),
        }
    }

    /// True when the tree does not mention the variable.
    pub fn is_constant(&self) -> bool {
        use HoloExpr::*;
        match self {
            Var => false,
            Lit(_) | I => true,
            Neg(a) | Pow(a, _) | Call(_, a) => a.is_constant(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.is_constant() && b.is_constant(),
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    write!(f, "{v:?}")
}

impl fmt::Display for HoloExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use HoloExpr::*;
        match self {
            Var => f.write_str("z"),
            I => f.write_str("i"),
            Lit(c) => {
                if c.im == 0.0 {
                    if c.re.is_sign_negative() {
                        f.write_str("(")?;
                        write_real(f, c.re)?;
                        f.write_str(")")
                    } else {
                        write_real(f, c.re)
                    }
                } else if c.re == 0.0 {
                    f.write_str("(")?;
                    write_real(f, c.im)?;
                    f.write_str(" * i)")
                } else {
                    f.write_str("(")?;
                    write_real(f, c.re)?;
                    f.write_str(if c.im < 0.0 { " - " } else { " + " })?;
                    write_real(f, c.im.abs())?;
                    f.write_str(" * i)")
                }
            }
            Neg(a) => match **a {
                // `-z^2` parses as `(-z)^2`, so a negated power needs its own parentheses.
                Pow(..) => write!(f, "(-({a}))"),
                _ => write!(f, "(-{a})"),
            },
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, n) => match **a {
                Pow(..) => write!(f, "({a})^{n}"),
                _ => write!(f, "{a}^{n}"),
            },
            Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
