//! Truncated Taylor series in one complex variable.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, SingularityKind};

/// Denominators (and log arguments) below this modulus are singular.
pub const SINGULAR_MODULUS: f64 = 1e-300;

type Coeffs = SmallVec<[Complex64; 8]>;

/// Taylor coefficients `c_j = f^(j)(z0) / j!` for `j = 0..=order`.
///
/// Binary operations require both operands to share the base point and the
/// order; mixing jets from different expansions panics.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    base: Complex64,
    coeffs: Coeffs,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Jet {
    pub fn new(base: Complex64, coeffs: &[Complex64]) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet {
            base,
            coeffs: coeffs.iter().copied().collect(),
        }
    }

    pub fn constant(base: Complex64, order: usize, value: Complex64) -> Self {
        let mut coeffs: Coeffs = SmallVec::from_elem(zero(), order + 1);
        coeffs[0] = value;
        Jet { base, coeffs }
    }

    /// The identity map expanded at `base`.
    pub fn variable(base: Complex64, order: usize) -> Self {
        let mut j = Jet::constant(base, order, base);
        if order >= 1 {
            j.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `k!` times the `k`-th coefficient.
    pub fn derivative(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.coeffs[k] * fact
    }

    fn like(&self) -> Jet {
        Jet {
            base: self.base,
            coeffs: SmallVec::from_elem(zero(), self.coeffs.len()),
        }
    }

    fn check_compatible(&self, other: &Jet) {
        assert!(
            self.coeffs.len() == other.coeffs.len() && self.base == other.base,
            "jets must share base point and order"
        );
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            base: self.base,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn try_div(&self, den: &Jet) -> Result<Jet, Error> {
        self.check_compatible(den);
        let b0 = den.coeffs[0];
        if !(b0.norm() >= SINGULAR_MODULUS) {
            return Err(Error::Singularity {
                kind: SingularityKind::DivisionByZero,
                at: self.base,
            });
        }
        let mut out = self.like();
        for n in 0..self.coeffs.len() {
            let mut acc = self.coeffs[n];
            for j in 1..=n {
                acc -= den.coeffs[j] * out.coeffs[n - j];
            }
            out.coeffs[n] = acc / b0;
        }
        Ok(out)
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut result = Jet::constant(self.base, self.order(), Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn exp(&self) -> Jet {
        let mut out = self.like();
        out.coeffs[0] = self.coeffs[0].exp();
        for n in 1..self.coeffs.len() {
            let mut acc = zero();
            for j in 1..=n {
                acc += self.coeffs[j] * out.coeffs[n - j] * j as f64;
            }
            out.coeffs[n] = acc / n as f64;
        }
        out
    }

    /// Returns `(sin, cos)` of the series.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let mut s = self.like();
        let mut c = self.like();
        s.coeffs[0] = self.coeffs[0].sin();
        c.coeffs[0] = self.coeffs[0].cos();
        for n in 1..self.coeffs.len() {
            let mut sa = zero();
            let mut ca = zero();
            for j in 1..=n {
                let w = self.coeffs[j] * j as f64;
                sa += w * c.coeffs[n - j];
                ca -= w * s.coeffs[n - j];
            }
            s.coeffs[n] = sa / n as f64;
            c.coeffs[n] = ca / n as f64;
        }
        (s, c)
    }

    /// Principal logarithm.
    pub fn try_ln(&self) -> Result<Jet, Error> {
        let a0 = self.coeffs[0];
        if !(a0.norm() >= SINGULAR_MODULUS) {
            return Err(Error::Singularity {
                kind: SingularityKind::LogOfZero,
                at: self.base,
            });
        }
        let mut out = self.like();
        out.coeffs[0] = a0.ln();
        for n in 1..self.coeffs.len() {
            let mut acc = zero();
            for j in 1..n {
                acc += out.coeffs[j] * self.coeffs[n - j] * j as f64;
            }
            out.coeffs[n] = (self.coeffs[n] - acc / n as f64) / a0;
        }
        Ok(out)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        Jet {
            base: self.base,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        Jet {
            base: self.base,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let mut out = self.like();
        for n in 0..self.coeffs.len() {
            let mut acc = zero();
            for j in 0..=n {
                acc += self.coeffs[j] * rhs.coeffs[n - j];
            }
            out.coeffs[n] = acc;
        }
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            base: self.base,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cube_at_two() {
        let z = Jet::variable(c(2.0), 2);
        let j = z.powi(3);
        assert_eq!(j.coeffs(), &[c(8.0), c(12.0), c(6.0)]);
    }

    #[test]
    fn zeroth_power_is_one() {
        let z = Jet::variable(c(0.0), 3);
        assert_eq!(z.powi(0).coeffs(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn log_inverts_exp() {
        let z = Jet::variable(Complex64::new(0.3, -0.2), 5);
        let round = z.exp().try_ln().unwrap();
        for (a, b) in round.coeffs().iter().zip(z.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn sin_squared_plus_cos_squared() {
        let z = Jet::variable(Complex64::new(0.4, 0.7), 6);
        let (s, co) = z.sin_cos();
        let one = &(&s * &s) + &(&co * &co);
        assert!((one.coeffs()[0] - c(1.0)).norm() < 1e-14);
        for k in 1..=6 {
            assert!(one.coeffs()[k].norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn division_by_zero_constant() {
        let z = Jet::variable(c(1.0), 2);
        let one = Jet::constant(c(1.0), 2, c(1.0));
        let den = &one - &z;
        assert!(matches!(
            one.try_div(&den),
            Err(Error::Singularity {
                kind: SingularityKind::DivisionByZero,
                ..
            })
        ));
    }

    #[test]
    fn geometric_series() {
        let z = Jet::variable(c(0.0), 4);
        let one = Jet::constant(c(0.0), 4, c(1.0));
        let q = one.try_div(&(&one - &z)).unwrap();
        assert!(q.coeffs().iter().all(|&a| a == c(1.0)));
    }
}
