//! Fiber solving, the Lappan-type hypothesis checks, and a harness comparing
//! their predictions with direct sup estimates.

mod checks;
mod fiber;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use checks::{
    check_lappan_poly, check_lappan_poly_cached, check_min_spherical, check_thm_y,
    check_thm_y_cached, check_thm_ya, check_thm_ya_cached, fiber_schedule, sense_samples,
    CriterionReport, FiberSup, NonNegPolynomial, Prediction, DISTINCT_SEPARATION, SCHEDULE_LEN,
};
pub use fiber::{
    real_jacobian, solve_fiber, Fiber, FiberCache, DEDUP_RADIUS, DEFAULT_SEED_GRID,
    RESIDUAL_TOLERANCE,
};

use crate::error::Result;
use crate::harmonic::HarmonicMap;
use crate::normality::{
    estimate_sup_normality, estimate_sup_phi, validate_phi, Phi, PhiValidation, TrendVerdict,
    DEFAULT_A_PROBE, DEFAULT_COMPACT_RADIUS, DEFAULT_R_PROBE,
};

/// Targets used when no explicit `E` is given; the first `n` are taken.
pub const DEFAULT_TARGETS: [(f64, f64); 8] = [
    (0.0, 0.0),
    (0.3, 0.0),
    (-0.3, 0.0),
    (0.0, 0.3),
    (0.0, -0.3),
    (0.15, 0.15),
    (-0.15, -0.15),
    (0.5, 0.0),
];

pub fn default_targets(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| match DEFAULT_TARGETS.get(i) {
            Some(&(re, im)) => Complex64::new(re, im),
            None => Complex64::new(0.55, 0.05 * (i + 1 - DEFAULT_TARGETS.len()) as f64),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub r_max: f64,
    pub grid: usize,
    pub refine_iters: usize,
    pub k_list: Vec<usize>,
    pub epsilon: f64,
    pub seed_grid: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            r_max: 0.999,
            grid: 64,
            refine_iters: 3,
            k_list: vec![1, 2, 3],
            epsilon: 0.25,
            seed_grid: DEFAULT_SEED_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub theorem_id: String,
    pub k: Option<usize>,
    pub hypothesis_met: bool,
    /// The direct trend the prediction is compared against.
    pub direct_trend: TrendVerdict,
    pub vacuous: bool,
    pub red: bool,
    pub report: CriterionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryCheck {
    pub k: usize,
    pub value: f64,
    pub trend: TrendVerdict,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCrossCheck {
    pub label: String,
    pub normality_sup: f64,
    pub normality_trend: TrendVerdict,
    pub phi_sup: f64,
    pub phi_trend: TrendVerdict,
    pub checks: Vec<CheckOutcome>,
    /// Ratio-of-derivatives trends for a map that looks φ-normal.
    pub necessary: Vec<NecessaryCheck>,
    /// `|sup(thm 1.5, k=1) - sup(thm 1.3, P=x)|` on a shared E.
    pub reduction_gap: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub phi: String,
    pub phi_validation: PhiValidation,
    pub phi_rejected: bool,
    pub config: HarnessConfig,
    pub maps: Vec<MapCrossCheck>,
    pub red_flags: Vec<String>,
    pub necessary_violations: Vec<String>,
    pub inclusion_violations: Vec<String>,
    pub target_metric: String,
}

fn map_cross_check(f: &HarmonicMap, phi: &Phi, cfg: &HarnessConfig) -> Result<MapCrossCheck> {
    let mut warnings = Vec::new();
    let norm = estimate_sup_normality(f, cfg.r_max, cfg.grid, cfg.refine_iters)?;
    let normality_trend = norm.trend_analysis().verdict;
    let phi_est = estimate_sup_phi(f, phi, cfg.r_max, cfg.grid, cfg.refine_iters, 1)?;
    let phi_trend = phi_est.trend_analysis().verdict;

    let mut checks = Vec::new();
    let mut push = |report: CriterionReport, direct: TrendVerdict| {
        let red = report.hypothesis_met && direct == TrendVerdict::Growing;
        checks.push(CheckOutcome {
            theorem_id: report.theorem_id.clone(),
            k: report.k,
            hypothesis_met: report.hypothesis_met,
            direct_trend: direct,
            vacuous: report.vacuous,
            red,
            report,
        });
    };

    push(
        check_min_spherical(f, cfg.epsilon, cfg.r_max, cfg.grid)?,
        normality_trend,
    );

    let mut cache = FiberCache::new();
    let e5 = default_targets(5);
    let lappan = check_lappan_poly_cached(
        f,
        &NonNegPolynomial::identity(),
        &e5,
        phi,
        cfg.r_max,
        &mut cache,
        cfg.seed_grid,
    )?;
    let lappan_sup = lappan.sup_over_fibers;
    push(lappan, phi_trend);

    let mut reduction_gap = None;
    for &k in &cfg.k_list {
        let y = check_thm_y_cached(
            f,
            k,
            &default_targets(k + 4),
            phi,
            cfg.r_max,
            &mut cache,
            cfg.seed_grid,
        )?;
        if k == 1 {
            reduction_gap = Some((y.sup_over_fibers - lappan_sup).abs());
        }
        push(y, phi_trend);
        let ya = check_thm_ya_cached(
            f,
            k,
            &default_targets(k / 2 + 4),
            phi,
            cfg.r_max,
            &mut cache,
            cfg.seed_grid,
        )?;
        push(ya, phi_trend);
    }

    let mut necessary = Vec::new();
    if phi_trend == TrendVerdict::Flat {
        for k in [2usize, 3] {
            let est = estimate_sup_phi(f, phi, cfg.r_max, cfg.grid, cfg.refine_iters, k)?;
            let trend = est.trend_analysis().verdict;
            necessary.push(NecessaryCheck {
                k,
                value: est.value,
                trend,
                passed: trend != TrendVerdict::Growing,
            });
        }
    } else {
        warnings.push(format!(
            "phi trend {phi_trend:?}; derivative ratio check skipped"
        ));
    }

    Ok(MapCrossCheck {
        label: f.label.clone(),
        normality_sup: norm.value,
        normality_trend,
        phi_sup: phi_est.value,
        phi_trend,
        checks,
        necessary,
        reduction_gap,
        warnings,
    })
}

/// Runs every applicable check on every map. An unvalidated φ (failing
/// either growth or local uniformity) stops the run before any check.
pub fn cross_check(maps: &[HarmonicMap], phi: &Phi, cfg: &HarnessConfig) -> Result<HarnessReport> {
    let phi_validation = validate_phi(
        phi,
        &DEFAULT_R_PROBE,
        DEFAULT_COMPACT_RADIUS,
        &DEFAULT_A_PROBE,
    )?;
    let phi_rejected = !(phi_validation.growth && phi_validation.locally_uniform);
    let phi = phi.clone().with_convexity(phi_validation.convexity_flag());
    let mut report = HarnessReport {
        phi: phi.spec.clone(),
        phi_validation,
        phi_rejected,
        config: cfg.clone(),
        maps: Vec::new(),
        red_flags: Vec::new(),
        necessary_violations: Vec::new(),
        inclusion_violations: Vec::new(),
        target_metric: crate::metrics::TARGET_METRIC.to_string(),
    };
    if phi_rejected {
        return Ok(report);
    }
    for f in maps {
        let mc = map_cross_check(f, &phi, cfg)?;
        for c in mc.checks.iter().filter(|c| c.red) {
            report.red_flags.push(format!(
                "{}: theorem {} (k={:?}) hypothesis met but direct trend growing",
                mc.label, c.theorem_id, c.k
            ));
        }
        for n in mc.necessary.iter().filter(|n| !n.passed) {
            report
                .necessary_violations
                .push(format!("{}: k={} ratio trend growing", mc.label, n.k));
        }
        if mc.normality_trend == TrendVerdict::Flat && mc.phi_trend == TrendVerdict::Growing {
            report
                .inclusion_violations
                .push(format!("{}: normal but phi trend growing", mc.label));
        }
        report.maps.push(mc);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_targets_distinct() {
        let t = default_targets(12);
        for i in 0..t.len() {
            for j in 0..i {
                assert!((t[i] - t[j]).norm() > 1e-8, "{i} {j}");
            }
        }
    }

    #[test]
    fn rejected_phi_runs_nothing() {
        let f = HarmonicMap::parse("exp(i/(1-z))", None, "cusp").unwrap();
        let rep = cross_check(&[f], &Phi::power(1.0).unwrap(), &HarnessConfig::default()).unwrap();
        assert!(rep.phi_rejected);
        assert!(rep.maps.is_empty());
    }

    #[test]
    fn identity_harness() {
        let f = HarmonicMap::parse("z", None, "identity").unwrap();
        let cfg = HarnessConfig {
            r_max: 0.99,
            grid: 32,
            ..HarnessConfig::default()
        };
        let rep = cross_check(&[f], &Phi::power(2.0).unwrap(), &cfg).unwrap();
        assert!(rep.red_flags.is_empty());
        let m = &rep.maps[0];
        assert_eq!(m.normality_trend, TrendVerdict::Flat);
        assert!(m.checks.iter().all(|c| c.hypothesis_met), "{:#?}", m.checks);
    }
}
