//! The normality functional `(1-|z|²) f#(z)`, its φ-weighted variants, and
//! sup estimation over `|z| <= r_max`.

mod phi;
mod sweep;
mod trend;

use num_complex::Complex64;

pub use phi::{
    validate_phi, ConvexityFlag, Phi, PhiKind, PhiValidation, CONVEXITY_SLACK, DEFAULT_A_PROBE,
    DEFAULT_COMPACT_RADIUS, DEFAULT_R_PROBE, LOCAL_TOLERANCE,
};
pub use sweep::{estimate_sup, pattern_search, scan, Candidate, PolarGrid, SearchBox, SupEstimate};
pub use trend::{classify_trend, TrendAnalysis, TrendVerdict, SLOPE_THRESHOLD};

use crate::error::{Error, Result};
use crate::harmonic::HarmonicMap;
use crate::metrics::DiskPoint;

pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_REFINE_ITERS: usize = 3;

pub fn normality_functional(f: &HarmonicMap, z: DiskPoint) -> Result<f64> {
    let z = z.value();
    Ok((1.0 - z.norm_sqr()) * f.spherical_derivative(z)?)
}

pub fn phi_normality_functional(f: &HarmonicMap, phi: &Phi, z: DiskPoint) -> Result<f64> {
    let z = z.value();
    Ok(f.spherical_derivative(z)? / phi.eval(z.norm())?)
}

/// `f#(k)(z) / φ(|z|)^k`.
pub fn phi_k_functional(f: &HarmonicMap, phi: &Phi, z: DiskPoint, k: usize) -> Result<f64> {
    let z = z.value();
    let p = phi.eval(z.norm())?;
    Ok(f.extended_spherical_derivative(z, k)? / p.powi(k as i32))
}

/// A functional over the disk selected at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    Normality,
    Phi { phi: Phi, k: usize },
}

impl Functional {
    pub fn eval(&self, f: &HarmonicMap, z: Complex64) -> Result<f64> {
        let z = DiskPoint::new(z)?;
        match self {
            Functional::Normality => normality_functional(f, z),
            Functional::Phi { phi, k } => phi_k_functional(f, phi, z, *k),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Functional::Normality => "normality".into(),
            Functional::Phi { phi, k: 1 } => format!("phi[{}]", phi.spec),
            Functional::Phi { phi, k } => format!("phi[{}]^k, k={k}", phi.spec),
        }
    }
}

pub fn estimate_sup_functional(
    f: &HarmonicMap,
    functional: &Functional,
    r_max: f64,
    grid: usize,
    refine_iters: usize,
) -> Result<SupEstimate> {
    estimate_sup(|z| functional.eval(f, z), r_max, grid, refine_iters)
}

pub fn estimate_sup_normality(
    f: &HarmonicMap,
    r_max: f64,
    grid: usize,
    refine_iters: usize,
) -> Result<SupEstimate> {
    estimate_sup_functional(f, &Functional::Normality, r_max, grid, refine_iters)
}

/// Sup of `f#(k)/φ^k`; `k = 1` is the plain φ-normality functional.
pub fn estimate_sup_phi(
    f: &HarmonicMap,
    phi: &Phi,
    r_max: f64,
    grid: usize,
    refine_iters: usize,
    k: usize,
) -> Result<SupEstimate> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let functional = Functional::Phi {
        phi: phi.clone(),
        k,
    };
    estimate_sup_functional(f, &functional, r_max, grid, refine_iters)
}

impl SupEstimate {
    pub fn trend_analysis(&self) -> TrendAnalysis {
        classify_trend(&self.trend)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(Complex64::new(re, im)).unwrap()
    }

    fn cusp() -> HarmonicMap {
        HarmonicMap::parse("exp(i/(1-z))", None, "cusp").unwrap()
    }

    #[test]
    fn functional_examples() {
        let id = HarmonicMap::parse("z", None, "id").unwrap();
        assert_eq!(normality_functional(&id, dp(0.0, 0.0)).unwrap(), 1.0);
        assert!((normality_functional(&id, dp(0.5, 0.0)).unwrap() - 0.6).abs() < 1e-15);
        let v = normality_functional(&cusp(), dp(0.99, 0.0)).unwrap();
        assert!((v - 99.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn phi_functional_examples() {
        let phi = Phi::power(2.0).unwrap();
        let id = HarmonicMap::parse("z", None, "id").unwrap();
        assert_eq!(
            phi_normality_functional(&id, &phi, dp(0.0, 0.0)).unwrap(),
            1.0
        );
        let v = phi_normality_functional(&cusp(), &phi, dp(0.99, 0.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
        let crit = HarmonicMap::parse("z^2", Some("z^2"), "c").unwrap();
        assert_eq!(
            phi_normality_functional(&crit, &phi, dp(0.0, 0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn k_one_matches_plain_phi() {
        let phi = Phi::power(2.0).unwrap();
        let f = HarmonicMap::parse("z", Some("z^2/2"), "m").unwrap();
        let a = estimate_sup_phi(&f, &phi, 0.99, 16, 2, 1).unwrap();
        let plain = |z: Complex64| phi_normality_functional(&f, &phi, DiskPoint::new(z)?);
        let b = estimate_sup(plain, 0.99, 16, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_sup_is_one_at_origin() {
        let id = HarmonicMap::parse("z", None, "id").unwrap();
        let est = estimate_sup_normality(&id, 0.99, 32, 3).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6);
        assert!(est.argmax.norm() < 1e-6);
        assert_eq!(est.trend_analysis().verdict, TrendVerdict::Flat);
    }

    #[test]
    fn cusp_grows() {
        let est = estimate_sup_normality(&cusp(), 0.999, 64, 3).unwrap();
        assert!(est.value >= 99.0);
        assert_eq!(est.trend_analysis().verdict, TrendVerdict::Growing);
    }
}
