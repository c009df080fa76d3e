//! Zalcman-type rescaling: blow-up probes, the `F(t_n, z_n) = 1`
//! normalization by bisection, and the rescaled maps with diagnostics.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{HarmonicMap, RescaledMap};
use crate::metrics::DiskPoint;
use crate::normality::{
    normality_functional, pattern_search, scan, Candidate, PolarGrid, SearchBox,
};

pub const M_TOLERANCE: f64 = 1e-6;
pub const MAX_BISECTIONS: usize = 80;
pub const SD_TOLERANCE: f64 = 1e-3;
pub const RHO_GAP_LIMIT: f64 = 0.05;
pub const SKIP_LIMIT: f64 = 0.1;

const STEP_GRID: usize = 64;
const REFINE_LEVELS: usize = 48;
const MIN_STEP: f64 = 1e-15;
const ANNULUS_RADII: usize = 9;
const ANNULUS_ANGLES: usize = 1024;
const COMPACT_RADIUS: f64 = 2.0;
const COMPACT_RADII: usize = 9;
const COMPACT_ANGLES: usize = 32;

/// `F(t, z)` built from `s = 1 - |z|²/r_n²`, `|f(z)|²` and `f#(z)`.
fn f_from_parts(t: f64, s: f64, m2: f64, sd: f64, alpha: f64) -> f64 {
    let st = s * t;
    let ln = st.ln();
    ((1.0 + alpha) * ln).exp() * (1.0 + m2) * sd / (1.0 + (2.0 * alpha * ln).exp() * m2)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must exceed -1, got {alpha}"
        )));
    }
    Ok(())
}

#[allow(non_snake_case)]
pub fn F_value(f: &HarmonicMap, t: f64, z: Complex64, r_n: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "t must lie in (0,1], got {t}"
        )));
    }
    if !(r_n > 0.0 && r_n < 1.0) || !(z.norm() < r_n) {
        return Err(Error::InvalidParameter(format!(
            "need |z| < r_n < 1, got |z| = {}, r_n = {r_n}",
            z.norm()
        )));
    }
    let lj = f.local(z, 1)?;
    let s = 1.0 - z.norm_sqr() / (r_n * r_n);
    Ok(f_from_parts(
        t,
        s,
        lj.value().norm_sqr(),
        lj.spherical_derivative(),
        alpha,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupProbe {
    pub radius: f64,
    pub z: Complex64,
    pub value: f64,
    pub blowup: bool,
}

/// `r_j = 1 - 10^{-(j+1)}`.
pub fn default_schedule(n_steps: usize) -> Vec<f64> {
    (0..n_steps)
        .map(|j| 1.0 - 10f64.powi(-(j as i32 + 1)))
        .collect()
}

/// Maximizes the normality functional over the annulus
/// `max(0, r - (1 - r)) <= |z| <= r` for each scheduled radius.
pub fn find_blowup_probes(
    f: &HarmonicMap,
    n_steps: usize,
    r_schedule: &[f64],
) -> Result<Vec<BlowupProbe>> {
    if r_schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "r_schedule must increase strictly".into(),
        ));
    }
    if let Some(&r) = r_schedule.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "schedule radius {r} outside (0,1)"
        )));
    }
    let functional = |z: Complex64| normality_functional(f, DiskPoint::new(z)?);
    let mut out = Vec::new();
    for &r in r_schedule.iter().take(n_steps) {
        let inner = (r - (1.0 - r)).max(0.0);
        let dr = (r - inner) / (ANNULUS_RADII - 1) as f64;
        let radii = (0..ANNULUS_RADII).map(|i| inner + dr * i as f64).collect();
        let grid = PolarGrid::with_radii(radii, ANNULUS_ANGLES);
        let (mut singular, mut evals) = (0, 0);
        let (best, _) = scan(&functional, &grid, &mut singular, &mut evals)?;
        let best = best.ok_or(Error::AllSingular)?;
        let bounds = SearchBox {
            r_lower: inner,
            r_upper: r,
            dr,
            dtheta: std::f64::consts::TAU / ANNULUS_ANGLES as f64,
        };
        let best = pattern_search(
            &functional,
            best,
            bounds,
            REFINE_LEVELS,
            MIN_STEP,
            &mut singular,
            &mut evals,
        )?;
        out.push(BlowupProbe {
            radius: r,
            z: best.point(),
            value: best.value,
            blowup: best.value > 1.0,
        });
    }
    Ok(out)
}

/// Per-node data cached for a step: `|z|²`, `|f|²`, `f#`.
struct NodeCache {
    nodes: Vec<(f64, f64, f64, f64, f64)>,
    skipped: usize,
}

impl NodeCache {
    fn build(f: &HarmonicMap, grid: &PolarGrid) -> Self {
        let mut nodes = Vec::new();
        let mut skipped = 0;
        for &r in &grid.radii {
            let thetas: &[f64] = if r == 0.0 { &[0.0] } else { &grid.angles };
            for &theta in thetas {
                let z = Complex64::from_polar(r, theta);
                match f.local(z, 1) {
                    Ok(lj) => {
                        let sd = lj.spherical_derivative();
                        let m2 = lj.value().norm_sqr();
                        if sd.is_finite() && m2.is_finite() {
                            nodes.push((r, theta, z.norm_sqr(), m2, sd));
                        } else {
                            skipped += 1;
                        }
                    }
                    Err(_) => skipped += 1,
                }
            }
        }
        NodeCache { nodes, skipped }
    }

    fn total(&self) -> usize {
        self.nodes.len() + self.skipped
    }
}

struct Maximizer<'a> {
    f: &'a HarmonicMap,
    r_n: f64,
    alpha: f64,
    cache: NodeCache,
    seeds: Vec<Candidate>,
    dr: f64,
    dtheta: f64,
}

impl Maximizer<'_> {
    fn eval(&self, t: f64, z: Complex64) -> Result<f64> {
        let lj = self.f.local(z, 1)?;
        let s = 1.0 - z.norm_sqr() / (self.r_n * self.r_n);
        Ok(f_from_parts(
            t,
            s,
            lj.value().norm_sqr(),
            lj.spherical_derivative(),
            self.alpha,
        ))
    }

    /// `M(t)`: best cached node, then deep refinement from it and the seeds.
    fn max_at(&self, t: f64) -> Result<Candidate> {
        let rr = self.r_n * self.r_n;
        let mut best: Option<Candidate> = None;
        for &(r, theta, z2, m2, sd) in &self.cache.nodes {
            let v = f_from_parts(t, 1.0 - z2 / rr, m2, sd, self.alpha);
            if v.is_finite() && best.is_none_or(|b| v > b.value) {
                best = Some(Candidate { r, theta, value: v });
            }
        }
        let mut starts: Vec<Candidate> = best.into_iter().collect();
        for s in &self.seeds {
            if let Ok(v) = self.eval(t, s.point()) {
                if v.is_finite() {
                    starts.push(Candidate { value: v, ..*s });
                }
            }
        }
        let func = |z: Complex64| self.eval(t, z);
        let bounds = SearchBox {
            r_lower: 0.0,
            r_upper: self.r_n * (1.0 - 1e-13),
            dr: self.dr,
            dtheta: self.dtheta,
        };
        let (mut singular, mut evals) = (0, 0);
        let mut out: Option<Candidate> = None;
        for s in starts {
            let c = pattern_search(
                &func,
                s,
                bounds,
                REFINE_LEVELS,
                MIN_STEP,
                &mut singular,
                &mut evals,
            )?;
            if out.is_none_or(|b| c.value > b.value) {
                out = Some(c);
            }
        }
        out.ok_or(Error::AllSingular)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZalcmanStep {
    pub n: usize,
    pub z_star: Complex64,
    /// `(1 - |z*|²/r_n²) f#(z*)`, which should diverge along the sequence.
    pub probe_value: f64,
    pub r_n: f64,
    pub t_n: f64,
    pub z_n: Complex64,
    pub rho_n: f64,
    pub rho_over_gap: f64,
    /// `(r_n + |z_n|) t_n / r_n²`.
    pub rho_gap_bound: f64,
    #[serde(skip)]
    pub rescaled: RescaledMap,
    /// Spherical derivative of the rescaled map at 0 from its own parts.
    pub sd_at_zero: f64,
    /// The same from base-map quantities.
    pub sd_at_zero_formula: f64,
    pub f_value: f64,
    pub m_residual: f64,
    pub bisections: usize,
    pub epsilon: f64,
    pub ceiling: f64,
    pub compact_max_sd: f64,
    pub skips: usize,
    pub nodes: usize,
    pub unreliable: bool,
}

pub fn solve_rescaling(f: &HarmonicMap, z_star: Complex64, alpha: f64) -> Result<ZalcmanStep> {
    solve_step(f, 0, z_star, alpha)
}

fn solve_step(f: &HarmonicMap, n: usize, z_star: Complex64, alpha: f64) -> Result<ZalcmanStep> {
    check_alpha(alpha)?;
    if !(z_star.norm() < 1.0) {
        return Err(Error::OutsideDisk(z_star));
    }
    let r_n = (1.0 + z_star.norm()) / 2.0;
    let radii: Vec<f64> = (0..STEP_GRID)
        .map(|i| {
            let u = 1.0 - i as f64 / STEP_GRID as f64;
            r_n * (1.0 - u * u)
        })
        .collect();
    let grid = PolarGrid::with_radii(radii, 4 * STEP_GRID);
    let cache = NodeCache::build(f, &grid);
    if cache.nodes.is_empty() {
        return Err(Error::AllSingular);
    }
    let star = Candidate {
        r: z_star.norm(),
        theta: z_star.arg(),
        value: 0.0,
    };
    let mut mx = Maximizer {
        f,
        r_n,
        alpha,
        cache,
        seeds: vec![star],
        dr: r_n / (STEP_GRID * STEP_GRID) as f64 + (1.0 - z_star.norm()) / 8.0,
        dtheta: std::f64::consts::TAU / (4 * STEP_GRID) as f64,
    };

    let top = mx.max_at(1.0)?;
    if !(top.value > 1.0) {
        return Err(Error::NotApplicable(top.value));
    }
    mx.seeds.push(top);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best: Option<(f64, Candidate)> = None;
    let mut iters = 0;
    while iters < MAX_BISECTIONS && hi - lo > 1e-15 * hi {
        iters += 1;
        let mid = 0.5 * (lo + hi);
        let c = mx.max_at(mid)?;
        if best.is_none_or(|(_, b)| (c.value - 1.0).abs() < (b.value - 1.0).abs()) {
            best = Some((mid, c));
        }
        if c.value > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (t_n, zc) = best.ok_or_else(|| Error::BracketFailure("no bisection steps".into()))?;
    if !((zc.value - 1.0).abs() <= M_TOLERANCE) {
        return Err(Error::BracketFailure(format!(
            "|M(t) - 1| = {:.3e} after {iters} steps",
            (zc.value - 1.0).abs()
        )));
    }

    let z_n = zc.point();
    let s_n = 1.0 - z_n.norm_sqr() / (r_n * r_n);
    let rho_n = s_n * t_n;
    let rescaled = f.rescale(z_n, rho_n, alpha)?;
    let zero = Complex64::new(0.0, 0.0);
    let sd_at_zero = rescaled.spherical_derivative(zero)?;
    let sd_at_zero_formula = rescaled.spherical_derivative_from_base(zero)?;
    let f_value = F_value(f, t_n, z_n, r_n, alpha)?;

    let mut epsilon: f64 = 0.0;
    let mut compact_max_sd: f64 = 0.0;
    for i in 0..COMPACT_RADII {
        let rr = COMPACT_RADIUS * i as f64 / (COMPACT_RADII - 1) as f64;
        let n_ang = if i == 0 { 1 } else { COMPACT_ANGLES };
        for j in 0..n_ang {
            let zeta =
                Complex64::from_polar(rr, std::f64::consts::TAU * j as f64 / COMPACT_ANGLES as f64);
            let w = z_n + zeta * rho_n;
            let s_w = 1.0 - w.norm_sqr() / (r_n * r_n);
            epsilon = if s_w > 0.0 {
                epsilon.max((s_n / s_w - 1.0).abs())
            } else {
                f64::INFINITY
            };
            if let Ok(v) = rescaled.spherical_derivative(zeta) {
                compact_max_sd = compact_max_sd.max(v);
            }
        }
    }
    let ceiling = if epsilon < 1.0 {
        (1.0 + epsilon).powf(1.0 + alpha) / (1.0 - epsilon).powf(2.0 * alpha)
    } else {
        f64::INFINITY
    };

    let probe_value = {
        let s = 1.0 - z_star.norm_sqr() / (r_n * r_n);
        s * f.spherical_derivative(z_star)?
    };
    let skips = mx.cache.skipped;
    let nodes = mx.cache.total();
    Ok(ZalcmanStep {
        n,
        z_star,
        probe_value,
        r_n,
        t_n,
        z_n,
        rho_n,
        rho_over_gap: rho_n / (1.0 - z_n.norm()),
        rho_gap_bound: (r_n + z_n.norm()) * t_n / (r_n * r_n),
        rescaled,
        sd_at_zero,
        sd_at_zero_formula,
        f_value,
        m_residual: zc.value - 1.0,
        bisections: iters,
        epsilon,
        ceiling,
        compact_max_sd,
        skips,
        nodes,
        unreliable: skips as f64 > SKIP_LIMIT * nodes as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StepFailure {
    pub n: usize,
    pub z_star: Complex64,
    /// `not-applicable`, `bracket-failure` or `all-singular`.
    pub kind: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZalcmanSequence {
    pub alpha: f64,
    pub probes: Vec<BlowupProbe>,
    pub steps: Vec<ZalcmanStep>,
    pub failures: Vec<StepFailure>,
    pub converged_flag: bool,
}

impl ZalcmanSequence {
    fn assess(steps: &[ZalcmanStep]) -> bool {
        let Some(last) = steps.last() else {
            return false;
        };
        steps.windows(2).all(|w| w[1].rho_n < w[0].rho_n)
            && steps
                .windows(2)
                .all(|w| w[1].rho_over_gap <= w[0].rho_over_gap)
            && last.rho_over_gap < RHO_GAP_LIMIT
            && steps
                .iter()
                .all(|s| (s.sd_at_zero - 1.0).abs() <= SD_TOLERANCE)
    }
}

pub fn extract_sequence(f: &HarmonicMap, alpha: f64, n_steps: usize) -> Result<ZalcmanSequence> {
    extract_sequence_with(f, alpha, n_steps, &default_schedule(n_steps))
}

pub fn extract_sequence_with(
    f: &HarmonicMap,
    alpha: f64,
    n_steps: usize,
    schedule: &[f64],
) -> Result<ZalcmanSequence> {
    check_alpha(alpha)?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    let probes = find_blowup_probes(f, n_steps, schedule)?;
    let mut steps = Vec::new();
    let mut failures = Vec::new();
    for (i, p) in probes.iter().enumerate() {
        match solve_step(f, i + 1, p.z, alpha) {
            Ok(step) => steps.push(step),
            Err(e @ (Error::NotApplicable(_) | Error::BracketFailure(_) | Error::AllSingular)) => {
                let kind = match e {
                    Error::NotApplicable(_) => "not-applicable",
                    Error::BracketFailure(_) => "bracket-failure",
                    _ => "all-singular",
                };
                failures.push(StepFailure {
                    n: i + 1,
                    z_star: p.z,
                    kind: kind.into(),
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    let converged_flag = ZalcmanSequence::assess(&steps);
    Ok(ZalcmanSequence {
        alpha,
        probes,
        steps,
        failures,
        converged_flag,
    })
}
