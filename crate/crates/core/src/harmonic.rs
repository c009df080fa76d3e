//! Harmonic mappings `f = h + conj(g)` and the pointwise quantities built on
//! them: Jacobian, dilatation, spherical and extended spherical derivatives,
//! precomposition with disk automorphisms, and rescaling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcexpr::{HoloExpr, HoloFunction, Jet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMap {
    pub h: HoloFunction,
    pub g: HoloFunction,
    pub label: String,
}

/// Jets of both holomorphic parts at a common point.
#[derive(Debug, Clone)]
pub struct LocalJets {
    pub h: Jet,
    pub g: Jet,
}

impl LocalJets {
    pub fn value(&self) -> Complex64 {
        self.h.value() + self.g.value().conj()
    }

    /// `h^(i) + conj(g^(i))`.
    pub fn f_derivative(&self, i: usize) -> Complex64 {
        self.h.derivative(i) + self.g.derivative(i).conj()
    }

    /// `|h^(k)| + |g^(k)|`.
    pub fn derivative_sum(&self, k: usize) -> f64 {
        self.h.derivative(k).norm() + self.g.derivative(k).norm()
    }

    pub fn spherical_derivative(&self) -> f64 {
        let fz = self.value();
        self.derivative_sum(1) / (1.0 + fz.norm_sqr())
    }

    pub fn extended_spherical_derivative(&self, k: usize) -> f64 {
        let fz = self.value();
        let m2 = fz.norm_sqr();
        let pw = if k == 1 {
            m2
        } else {
            m2.sqrt().powi(k as i32 + 1)
        };
        self.derivative_sum(k) / (1.0 + pw)
    }

    pub fn jacobian(&self) -> f64 {
        let hp = self.h.derivative(1);
        let gp = self.g.derivative(1);
        hp.norm_sqr() - gp.norm_sqr()
    }
}

/// Outcome of a sampled Lewy check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenseCheck {
    pub preserving: bool,
    /// First sample where `h' = 0` or `J_f <= 0`.
    pub witness: Option<Complex64>,
    pub samples_checked: usize,
}

/// Record form used by map files: `{"h": ..., "g": ..., "label": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub h: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default)]
    pub label: String,
}

impl HarmonicMap {
    pub fn new(h: HoloFunction, g: HoloFunction, label: impl Into<String>) -> Self {
        HarmonicMap {
            h,
            g,
            label: label.into(),
        }
    }

    /// Parses both parts; an absent `g` means `g = 0`.
    pub fn parse(h: &str, g: Option<&str>, label: impl Into<String>) -> Result<Self> {
        let h = HoloFunction::parse(h)?;
        let g = match g {
            Some(text) => HoloFunction::parse(text)?,
            None => HoloFunction::zero(),
        };
        Ok(HarmonicMap::new(h, g, label))
    }

    pub fn from_record(rec: &MapRecord) -> Result<Self> {
        HarmonicMap::parse(&rec.h, rec.g.as_deref(), rec.label.clone())
    }

    pub fn to_record(&self) -> MapRecord {
        MapRecord {
            h: self.h.expr.to_string(),
            g: Some(self.g.expr.to_string()),
            label: self.label.clone(),
        }
    }

    pub fn local(&self, z: Complex64, order: usize) -> Result<LocalJets> {
        Ok(LocalJets {
            h: self.h.eval_jet(z, order)?,
            g: self.g.eval_jet(z, order)?,
        })
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.local(z, 0)?.value())
    }

    pub fn f_derivative(&self, z: Complex64, i: usize) -> Result<Complex64> {
        Ok(self.local(z, i)?.f_derivative(i))
    }

    pub fn jacobian(&self, z: Complex64) -> Result<f64> {
        Ok(self.local(z, 1)?.jacobian())
    }

    pub fn dilatation(&self, z: Complex64) -> Result<Complex64> {
        let lj = self.local(z, 1)?;
        let hp = lj.h.derivative(1);
        if hp == Complex64::new(0.0, 0.0) {
            return Err(Error::UndefinedDilatation(z));
        }
        Ok(lj.g.derivative(1) / hp)
    }

    pub fn is_sense_preserving(&self, samples: &[Complex64]) -> Result<SenseCheck> {
        for (n, &z) in samples.iter().enumerate() {
            let lj = self.local(z, 1)?;
            let hp = lj.h.derivative(1);
            if hp == Complex64::new(0.0, 0.0) || !(lj.jacobian() > 0.0) {
                return Ok(SenseCheck {
                    preserving: false,
                    witness: Some(z),
                    samples_checked: n + 1,
                });
            }
        }
        Ok(SenseCheck {
            preserving: true,
            witness: None,
            samples_checked: samples.len(),
        })
    }

    pub fn spherical_derivative(&self, z: Complex64) -> Result<f64> {
        Ok(self.local(z, 1)?.spherical_derivative())
    }

    pub fn extended_spherical_derivative(&self, z: Complex64, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(self.local(z, k)?.extended_spherical_derivative(k))
    }

    /// Whether `g(z0) = 0` (to 1e-12).
    pub fn check_canonical(&self, z0: Complex64) -> Result<bool> {
        Ok(self.g.eval(z0)?.norm() <= 1e-12)
    }

    /// `f ∘ σ` with `σ(z) = e^{iθ}(z + a)/(1 + conj(a) z)`.
    pub fn precompose_automorphism(&self, a: Complex64, theta: f64) -> Result<HarmonicMap> {
        if !(a.norm() < 1.0) || !theta.is_finite() {
            return Err(Error::OutsideDisk(a));
        }
        if a == Complex64::new(0.0, 0.0) && theta == 0.0 {
            return Ok(self.clone());
        }
        let mut sigma = if a == Complex64::new(0.0, 0.0) {
            HoloExpr::Var
        } else {
            HoloExpr::div(
                HoloExpr::add(HoloExpr::Var, HoloExpr::lit(a)),
                HoloExpr::add(
                    HoloExpr::real(1.0),
                    HoloExpr::mul(HoloExpr::lit(a.conj()), HoloExpr::Var),
                ),
            )
        };
        if theta != 0.0 {
            sigma = HoloExpr::mul(HoloExpr::lit(Complex64::from_polar(1.0, theta)), sigma);
        }
        let compose = |p: &HoloFunction| {
            HoloFunction::new(p.expr.substitute(&sigma), format!("({})∘σ", p.label))
        };
        Ok(HarmonicMap::new(
            compose(&self.h),
            compose(&self.g),
            format!("{}∘σ[a={a}, θ={theta}]", self.label),
        ))
    }

    /// `ζ ↦ scale^alpha · f(center + scale ζ)`.
    pub fn rescale(&self, center: Complex64, scale: f64, alpha: f64) -> Result<RescaledMap> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed -1, got {alpha}"
            )));
        }
        Ok(RescaledMap {
            base: self.clone(),
            center,
            scale,
            alpha,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledMap {
    pub base: HarmonicMap,
    pub center: Complex64,
    pub scale: f64,
    pub alpha: f64,
}

impl RescaledMap {
    /// `scale^alpha`, computed in real arithmetic.
    pub fn amplitude(&self) -> f64 {
        (self.alpha * self.scale.ln()).exp()
    }

    fn point(&self, zeta: Complex64) -> Complex64 {
        self.center + zeta * self.scale
    }

    pub fn evaluate(&self, zeta: Complex64) -> Result<Complex64> {
        Ok(self.base.evaluate(self.point(zeta))? * self.amplitude())
    }

    /// Values and first derivatives of the rescaled parts `c h(w)`, `c g(w)`.
    pub fn parts(&self, zeta: Complex64) -> Result<[Complex64; 4]> {
        let c = self.amplitude();
        let lj = self.base.local(self.point(zeta), 1)?;
        Ok([
            lj.h.value() * c,
            lj.h.derivative(1) * (c * self.scale),
            lj.g.value() * c,
            lj.g.derivative(1) * (c * self.scale),
        ])
    }

    /// Spherical derivative of the rescaled map computed from its own parts.
    pub fn spherical_derivative(&self, zeta: Complex64) -> Result<f64> {
        let [h, hp, g, gp] = self.parts(zeta)?;
        let fz = h + g.conj();
        Ok((hp.norm() + gp.norm()) / (1.0 + fz.norm_sqr()))
    }

    /// The same quantity expressed through base-map values:
    /// `ρ^{1+α}(1+|f(w)|²) f#(w) / (1 + ρ^{2α}|f(w)|²)`, `w = center + ρζ`.
    pub fn spherical_derivative_from_base(&self, zeta: Complex64) -> Result<f64> {
        let lj = self.base.local(self.point(zeta), 1)?;
        let m2 = lj.value().norm_sqr();
        let fs = lj.spherical_derivative();
        let rho = self.scale;
        let a = self.alpha;
        let num = ((1.0 + a) * rho.ln()).exp() * (1.0 + m2) * fs;
        let den = 1.0 + (2.0 * a * rho.ln()).exp() * m2;
        Ok(num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn map(h: &str, g: Option<&str>) -> HarmonicMap {
        HarmonicMap::parse(h, g, "test").unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = map("z", Some("z^2/2"));
        assert_eq!(f.evaluate(c(0.5, 0.0)).unwrap(), c(0.625, 0.0));
        let a = c(0.2, -0.7);
        assert_eq!(map("z", None).evaluate(a).unwrap(), a);
        let v = map("0", Some("z")).evaluate(c(0.0, 1.0)).unwrap();
        assert_eq!(v, c(0.0, -1.0));
    }

    #[test]
    fn f_derivative_examples() {
        let f = map("z", Some("z^2/2"));
        assert_eq!(f.f_derivative(c(0.0, 0.0), 1).unwrap(), c(1.0, 0.0));
        assert_eq!(f.f_derivative(c(0.0, 0.0), 2).unwrap(), c(1.0, 0.0));
        let z = c(0.3, 0.4);
        assert_eq!(f.f_derivative(z, 0).unwrap(), f.evaluate(z).unwrap());
    }

    #[test]
    fn jacobian_examples() {
        assert!((map("z", Some("z^2/2")).jacobian(c(0.5, 0.0)).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(map("z", None).jacobian(c(0.3, 0.1)).unwrap(), 1.0);
        assert_eq!(map("z", Some("z")).jacobian(c(0.3, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn dilatation_examples() {
        let w = map("z", Some("z^2/2")).dilatation(c(0.5, 0.0)).unwrap();
        assert!((w - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(map("z", None).dilatation(c(0.1, 0.1)).unwrap(), c(0.0, 0.0));
        assert!(matches!(
            map("z^2", Some("z^2")).dilatation(c(0.0, 0.0)),
            Err(Error::UndefinedDilatation(_))
        ));
    }

    #[test]
    fn sense_preserving_examples() {
        let grid: Vec<_> = (0..20)
            .flat_map(|i| {
                (0..24)
                    .map(move |j| Complex64::from_polar(0.99 * i as f64 / 19.0, j as f64 * 0.2618))
            })
            .collect();
        let chk = map("z", Some("z^2/2")).is_sense_preserving(&grid).unwrap();
        assert!(chk.preserving);
        assert_eq!(chk.samples_checked, grid.len());

        let chk = map("z", Some("2*z"))
            .is_sense_preserving(&[c(0.1, 0.2)])
            .unwrap();
        assert!(!chk.preserving);
        assert_eq!(chk.witness, Some(c(0.1, 0.2)));

        let chk = map("z^2", None)
            .is_sense_preserving(&[c(0.5, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert_eq!(chk.witness, Some(c(0.0, 0.0)));
    }

    #[test]
    fn spherical_derivative_examples() {
        let id = map("z", None);
        assert_eq!(id.spherical_derivative(c(0.0, 0.0)).unwrap(), 1.0);
        assert!((id.spherical_derivative(c(0.5, 0.0)).unwrap() - 0.8).abs() < 1e-15);
        let f = map("z", Some("z^2/2"));
        let want = 1.5 / 1.390625;
        assert!((f.spherical_derivative(c(0.5, 0.0)).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn extended_examples() {
        let f = map("z", Some("z^2/2"));
        for z in [c(0.0, 0.0), c(0.3, -0.5), c(-0.7, 0.1)] {
            assert_eq!(
                f.extended_spherical_derivative(z, 1).unwrap(),
                f.spherical_derivative(z).unwrap()
            );
        }
        assert_eq!(
            f.extended_spherical_derivative(c(0.0, 0.0), 2).unwrap(),
            1.0
        );
        let cube = map("z^3", None);
        assert_eq!(
            cube.extended_spherical_derivative(c(0.0, 0.0), 3).unwrap(),
            6.0
        );
        assert!(cube.extended_spherical_derivative(c(0.0, 0.0), 0).is_err());
    }

    #[test]
    fn precompose_examples() {
        let f = map("z", Some("z^2/2"));
        assert_eq!(f.precompose_automorphism(c(0.0, 0.0), 0.0).unwrap(), f);

        let g = map("z", None)
            .precompose_automorphism(c(0.5, 0.0), 0.0)
            .unwrap();
        assert_eq!(g.h.expr.to_string(), "((z + 0.5) / (1.0 + (0.5 * z)))");

        assert!(matches!(
            f.precompose_automorphism(c(0.6, 0.8), 0.0),
            Err(Error::OutsideDisk(_))
        ));
    }

    #[test]
    fn precompose_values() {
        let f = map("exp(z)", Some("z^2/4"));
        let a = c(0.3, -0.2);
        let theta = 0.7;
        let g = f.precompose_automorphism(a, theta).unwrap();
        let z = c(0.1, 0.45);
        let s = Complex64::from_polar(1.0, theta) * (z + a) / (1.0 + a.conj() * z);
        assert!((g.evaluate(z).unwrap() - f.evaluate(s).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn rescale_examples() {
        let f = map("z", Some("z^2/2"));
        let r = f.rescale(c(0.0, 0.0), 1.0, 0.0).unwrap();
        let z = c(0.2, 0.3);
        assert_eq!(r.evaluate(z).unwrap(), f.evaluate(z).unwrap());

        let r = map("z", None).rescale(c(0.0, 0.0), 0.1, 0.0).unwrap();
        assert!((r.evaluate(c(1.0, 0.0)).unwrap() - c(0.1, 0.0)).norm() < 1e-16);

        assert!(f.rescale(c(0.0, 0.0), 0.0, 0.0).is_err());
        assert!(f.rescale(c(0.0, 0.0), 0.1, -1.0).is_err());
    }

    #[test]
    fn rescaled_spherical_derivative_matches_finite_differences() {
        // Oracle: spherical derivative of the composed map from finite
        // differences of its Wirtinger derivatives, f_ζ and f_ζbar.
        let f = map("exp(i/(1-z))", Some("z^2/4"));
        let r = f.rescale(c(0.6, 0.1), 0.05, 0.5).unwrap();
        let zeta = c(0.3, -0.4);
        let step = 1e-6;
        let fx =
            (r.evaluate(zeta + step).unwrap() - r.evaluate(zeta - step).unwrap()) / (2.0 * step);
        let fy = (r.evaluate(zeta + c(0.0, step)).unwrap()
            - r.evaluate(zeta - c(0.0, step)).unwrap())
            / (2.0 * step);
        let fz = (fx - Complex64::i() * fy) * 0.5;
        let fzbar = (fx + Complex64::i() * fy) * 0.5;
        let val = r.evaluate(zeta).unwrap();
        let oracle = (fz.norm() + fzbar.norm()) / (1.0 + val.norm_sqr());
        let own = r.spherical_derivative(zeta).unwrap();
        let formula = r.spherical_derivative_from_base(zeta).unwrap();
        assert!((own - oracle).abs() / oracle < 1e-7, "{own} vs {oracle}");
        assert!((formula - own).abs() / own < 1e-12);
    }

    #[test]
    fn map_record_without_g() {
        let rec: MapRecord = serde_json::from_str(r#"{"h": "z^2", "label": "sq"}"#).unwrap();
        let f = HarmonicMap::from_record(&rec).unwrap();
        assert!(f.g.is_constant());
        assert_eq!(f.evaluate(c(0.5, 0.0)).unwrap(), c(0.25, 0.0));
        assert!(f.check_canonical(c(0.0, 0.0)).unwrap());
    }
}
