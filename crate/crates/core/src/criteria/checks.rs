use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fiber::{FiberCache, DEFAULT_SEED_GRID};
use crate::error::{Error, Result};
use crate::harmonic::{HarmonicMap, SenseCheck};
use crate::normality::{
    classify_trend, estimate_sup, pattern_search, Phi, PolarGrid, SearchBox, TrendAnalysis,
    TrendVerdict,
};

pub const DISTINCT_SEPARATION: f64 = 1e-8;
/// Number of radii in the fiber-sup schedule.
pub const SCHEDULE_LEN: usize = 8;
const SENSE_GRID: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonNegPolynomial {
    coeffs: Vec<f64>,
}

impl NonNegPolynomial {
    /// Coefficients in increasing degree, `c0 + c1 x + ...`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidParameter(
                "polynomial degree must be at least 1".into(),
            ));
        }
        if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter(
                "polynomial coefficients must be non-negative reals".into(),
            ));
        }
        if !(coeffs[coeffs.len() - 1] > 0.0) {
            return Err(Error::InvalidParameter(
                "leading coefficient must be positive".into(),
            ));
        }
        Ok(NonNegPolynomial { coeffs })
    }

    pub fn identity() -> Self {
        NonNegPolynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    PhiNormal,
    Normal,
    NoPrediction,
}

/// Sup of one quantity over fibers, tracked along the radius schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSup {
    pub sup: f64,
    pub argmax: Option<Complex64>,
    pub schedule: Vec<(f64, f64)>,
    pub trend: TrendAnalysis,
    pub roots: usize,
}

impl FiberSup {
    pub fn bounded(&self) -> bool {
        self.sup.is_finite() && self.trend.verdict == TrendVerdict::Flat
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub theorem_id: String,
    #[serde(rename = "E")]
    pub e: Vec<Complex64>,
    pub k: Option<usize>,
    pub sup_over_fibers: f64,
    pub auxiliary_sups: BTreeMap<String, f64>,
    pub hypothesis_met: bool,
    pub prediction: Prediction,
    pub vacuous: bool,
    pub r_max: f64,
    pub sense_check: Option<SenseCheck>,
    pub fiber_sizes: Vec<usize>,
    pub trends: BTreeMap<String, TrendAnalysis>,
    pub caveats: Vec<String>,
}

/// `r_j = 1 - (1 - r_max) 2^{J-1-j}`, keeping positive radii.
pub fn fiber_schedule(r_max: f64) -> Vec<f64> {
    (0..SCHEDULE_LEN)
        .map(|j| 1.0 - (1.0 - r_max) * 2f64.powi((SCHEDULE_LEN - 1 - j) as i32))
        .filter(|r| *r > 0.0)
        .collect()
}

pub fn sense_samples(r_max: f64) -> Vec<Complex64> {
    let grid = PolarGrid::new(r_max, SENSE_GRID);
    let mut out = Vec::new();
    for &r in &grid.radii {
        if r == 0.0 {
            out.push(Complex64::new(0.0, 0.0));
        } else {
            out.extend(grid.angles.iter().map(|&t| Complex64::from_polar(r, t)));
        }
    }
    out
}

fn check_distinct(e: &[Complex64], need: usize, theorem: &str) -> Result<()> {
    if e.len() != need {
        return Err(Error::InvalidParameter(format!(
            "theorem {theorem} needs |E| = {need}, got {}",
            e.len()
        )));
    }
    for (i, a) in e.iter().enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if e[..i].iter().any(|b| (a - b).norm() < DISTINCT_SEPARATION) {
            return Err(Error::InvalidParameter(format!(
                "E contains repeated value {a}"
            )));
        }
    }
    Ok(())
}

fn check_r_max(r_max: f64) -> Result<()> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r_max must lie in (0,1), got {r_max}"
        )));
    }
    Ok(())
}

/// Sup of `quantity` over the fibers of `targets`, with per-radius maxima.
fn fiber_sup<Q>(
    f: &HarmonicMap,
    targets: &[Complex64],
    r_max: f64,
    cache: &mut FiberCache,
    seed_grid: usize,
    quantity: Q,
) -> Result<(FiberSup, Vec<usize>)>
where
    Q: Fn(Complex64) -> Result<f64>,
{
    let schedule = fiber_schedule(r_max);
    let mut per_radius = vec![0.0f64; schedule.len()];
    let mut sup = 0.0f64;
    let mut argmax = None;
    let mut sizes = Vec::new();
    let mut roots = 0;
    for &a in targets {
        let fb = cache.get(f, a, r_max, seed_grid)?;
        sizes.push(fb.roots.len());
        roots += fb.roots.len();
        for &z in &fb.roots {
            let v = quantity(z)?;
            if v > sup {
                sup = v;
                argmax = Some(z);
            }
            for (slot, &r) in per_radius.iter_mut().zip(&schedule) {
                if z.norm() <= r {
                    *slot = slot.max(v);
                }
            }
        }
    }
    let schedule: Vec<(f64, f64)> = schedule.into_iter().zip(per_radius).collect();
    let trend = classify_trend(&schedule);
    Ok((
        FiberSup {
            sup,
            argmax,
            schedule,
            trend,
            roots,
        },
        sizes,
    ))
}

/// Infimum of `f#` over `|z| <= r_max`; the hypothesis is `inf > epsilon`.
pub fn check_min_spherical(
    f: &HarmonicMap,
    epsilon: f64,
    r_max: f64,
    grid: usize,
) -> Result<CriterionReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    check_r_max(r_max)?;
    let est = estimate_sup(|z| Ok(-f.spherical_derivative(z)?), r_max, grid, 0)?;
    let pg = PolarGrid::new(r_max, grid);
    let start = crate::normality::Candidate {
        r: est.argmax.norm(),
        theta: est.argmax.arg(),
        value: est.value,
    };
    let bounds = SearchBox {
        r_lower: 0.0,
        r_upper: r_max,
        dr: pg.radii[grid] - pg.radii[grid - 1],
        dtheta: pg.angles[1],
    };
    let (mut singular, mut evals) = (est.singular_points, 0);
    let best = pattern_search(
        &|z| Ok(-f.spherical_derivative(z)?),
        start,
        bounds,
        12,
        1e-12,
        &mut singular,
        &mut evals,
    )?;
    let inf = -best.value;
    let met = inf > epsilon;
    let mut aux = BTreeMap::new();
    aux.insert("epsilon".to_string(), epsilon);
    aux.insert("inf_spherical".to_string(), inf);
    Ok(CriterionReport {
        theorem_id: "1.2".into(),
        e: vec![],
        k: None,
        sup_over_fibers: inf,
        auxiliary_sups: aux,
        hypothesis_met: met,
        prediction: if met {
            Prediction::Normal
        } else {
            Prediction::NoPrediction
        },
        vacuous: false,
        r_max,
        sense_check: None,
        fiber_sizes: vec![],
        trends: BTreeMap::new(),
        caveats: vec![format!("infimum sampled on |z| <= {r_max}")],
    })
}

struct Common {
    sense: SenseCheck,
    caveats: Vec<String>,
}

fn common(f: &HarmonicMap, r_max: f64) -> Result<Common> {
    let sense = f.is_sense_preserving(&sense_samples(r_max))?;
    let mut caveats = vec![
        "only the stated set E is tested; exceptional values of a limit map are not detected"
            .to_string(),
    ];
    if !sense.preserving {
        caveats.push("sense-preserving precondition violated on samples".into());
    }
    Ok(Common { sense, caveats })
}

/// Largest `|f^(i)(z)|`, `i = 0..k-1`, over the zero fiber.
fn zero_fiber_sup(
    f: &HarmonicMap,
    k: usize,
    r_max: f64,
    cache: &mut FiberCache,
    seed_grid: usize,
) -> Result<(FiberSup, usize)> {
    let quantity = |z: Complex64| -> Result<f64> {
        let lj = f.local(z, k.saturating_sub(1))?;
        Ok((0..k)
            .map(|i| lj.f_derivative(i).norm())
            .fold(0.0, f64::max))
    };
    let (s, sizes) = fiber_sup(
        f,
        &[Complex64::new(0.0, 0.0)],
        r_max,
        cache,
        seed_grid,
        quantity,
    )?;
    Ok((s, sizes[0]))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    theorem: &str,
    e: &[Complex64],
    k: Option<usize>,
    r_max: f64,
    main: FiberSup,
    sizes: Vec<usize>,
    extra: Vec<(&str, FiberSup)>,
    common: Common,
) -> CriterionReport {
    let mut auxiliary_sups = BTreeMap::new();
    let mut trends = BTreeMap::new();
    let mut met = common.sense.preserving && main.bounded();
    let mut any_roots = main.roots > 0;
    for (name, s) in &extra {
        auxiliary_sups.insert(name.to_string(), s.sup);
        trends.insert(name.to_string(), s.trend.clone());
        met &= s.bounded();
        any_roots |= s.roots > 0 && *name != "zero_fiber";
    }
    trends.insert("fibers".to_string(), main.trend.clone());
    let vacuous = main.roots == 0 && !any_roots;
    let mut caveats = common.caveats;
    if vacuous {
        caveats.push("vacuous: every fiber of E is empty within r_max".into());
    }
    CriterionReport {
        theorem_id: theorem.into(),
        e: e.to_vec(),
        k,
        sup_over_fibers: main.sup,
        auxiliary_sups,
        hypothesis_met: met,
        prediction: if met {
            Prediction::PhiNormal
        } else {
            Prediction::NoPrediction
        },
        vacuous,
        r_max,
        sense_check: Some(common.sense),
        fiber_sizes: sizes,
        trends,
        caveats,
    }
}

pub fn check_lappan_poly(
    f: &HarmonicMap,
    p: &NonNegPolynomial,
    e: &[Complex64],
    phi: &Phi,
    r_max: f64,
) -> Result<CriterionReport> {
    check_lappan_poly_cached(
        f,
        p,
        e,
        phi,
        r_max,
        &mut FiberCache::new(),
        DEFAULT_SEED_GRID,
    )
}

pub fn check_lappan_poly_cached(
    f: &HarmonicMap,
    p: &NonNegPolynomial,
    e: &[Complex64],
    phi: &Phi,
    r_max: f64,
    cache: &mut FiberCache,
    seed_grid: usize,
) -> Result<CriterionReport> {
    check_r_max(r_max)?;
    check_distinct(e, 5, "1.3")?;
    let common = common(f, r_max)?;
    let q = |z: Complex64| Ok(p.eval(f.spherical_derivative(z)?) / phi.eval(z.norm())?);
    let (main, sizes) = fiber_sup(f, e, r_max, cache, seed_grid, q)?;
    Ok(assemble("1.3", e, None, r_max, main, sizes, vec![], common))
}

fn ratio_k<'a>(
    f: &'a HarmonicMap,
    phi: &'a Phi,
    k: usize,
) -> impl Fn(Complex64) -> Result<f64> + 'a {
    move |z: Complex64| {
        Ok(f.extended_spherical_derivative(z, k)? / phi.eval(z.norm())?.powi(k as i32))
    }
}

pub fn check_thm_y(
    f: &HarmonicMap,
    k: usize,
    e: &[Complex64],
    phi: &Phi,
    r_max: f64,
) -> Result<CriterionReport> {
    check_thm_y_cached(
        f,
        k,
        e,
        phi,
        r_max,
        &mut FiberCache::new(),
        DEFAULT_SEED_GRID,
    )
}

pub fn check_thm_y_cached(
    f: &HarmonicMap,
    k: usize,
    e: &[Complex64],
    phi: &Phi,
    r_max: f64,
    cache: &mut FiberCache,
    seed_grid: usize,
) -> Result<CriterionReport> {
    check_r_max(r_max)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_distinct(e, k + 4, "1.5")?;
    let common = common(f, r_max)?;
    let (zero, _) = zero_fiber_sup(f, k, r_max, cache, seed_grid)?;
    let (main, sizes) = fiber_sup(f, e, r_max, cache, seed_grid, ratio_k(f, phi, k))?;
    Ok(assemble(
        "1.5",
        e,
        Some(k),
        r_max,
        main,
        sizes,
        vec![("zero_fiber", zero)],
        common,
    ))
}

pub fn check_thm_ya(
    f: &HarmonicMap,
    k: usize,
    e: &[Complex64],
    phi: &Phi,
    r_max: f64,
) -> Result<CriterionReport> {
    check_thm_ya_cached(
        f,
        k,
        e,
        phi,
        r_max,
        &mut FiberCache::new(),
        DEFAULT_SEED_GRID,
    )
}

pub fn check_thm_ya_cached(
    f: &HarmonicMap,
    k: usize,
    e: &[Complex64],
    phi: &Phi,
    r_max: f64,
    cache: &mut FiberCache,
    seed_grid: usize,
) -> Result<CriterionReport> {
    check_r_max(r_max)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_distinct(e, k / 2 + 4, "1.6")?;
    let common = common(f, r_max)?;
    let (zero, _) = zero_fiber_sup(f, k, r_max, cache, seed_grid)?;
    let (main, sizes) = fiber_sup(f, e, r_max, cache, seed_grid, ratio_k(f, phi, k))?;
    let ya3 = |z: Complex64| -> Result<f64> {
        let lj = f.local(z, k + 1)?;
        Ok(lj.derivative_sum(k + 1) / (1.0 + lj.derivative_sum(k).powi(k as i32 + 1)))
    };
    let (third, _) = fiber_sup(f, e, r_max, cache, seed_grid, ya3)?;
    Ok(assemble(
        "1.6",
        e,
        Some(k),
        r_max,
        main,
        sizes,
        vec![("zero_fiber", zero), ("ya3", third)],
        common,
    ))
}
