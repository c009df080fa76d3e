//! Hyperbolic distance on the disk, chordal distance on the target, and a
//! sampled Lipschitz quotient `σ(f(z), f(w)) / Λ(z, w)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::HarmonicMap;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if value.norm() < 1.0 {
            Ok(DiskPoint(value))
        } else {
            Err(Error::OutsideDisk(value))
        }
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// Pseudo-hyperbolic distance `|z - w| / |1 - conj(w) z|`.
pub fn pseudo_hyperbolic(z: DiskPoint, w: DiskPoint) -> f64 {
    let (z, w) = (z.0, w.0);
    // Written out so that swapping z and w only flips the sign of `im`.
    let re = 1.0 - (w.re * z.re + w.im * z.im);
    let im = w.re * z.im - w.im * z.re;
    (z - w).norm() / re.hypot(im)
}

/// `½ log((1+t)/(1-t))` with `t` the pseudo-hyperbolic distance.
pub fn hyperbolic_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    pseudo_hyperbolic(z, w).min(1.0).atanh()
}

pub fn chordal_distance(w1: Complex64, w2: Complex64) -> Result<f64> {
    if !(w1.re.is_finite() && w1.im.is_finite() && w2.re.is_finite() && w2.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((w1 - w2).norm() / ((1.0 + w1.norm_sqr()).sqrt() * (1.0 + w2.norm_sqr()).sqrt()))
}

/// Name of the target metric used in quotients, stored with every estimate.
pub const TARGET_METRIC: &str = "chordal";

const MIN_HYPERBOLIC: f64 = 1e-8;
const TAU_MIN: f64 = 1e-6;
const TAU_MAX: f64 = 0.5;
const REFINE_TOP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub argmax: Option<(Complex64, Complex64)>,
    pub pairs_evaluated: usize,
    pub pairs_singular: usize,
    pub pairs_rejected: usize,
    pub metric: String,
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while n > 0 {
        out += f * (n % base) as f64;
        n /= base;
        f *= inv;
    }
    out
}

/// Pair parameterization: first point in polar form with a log-scaled gap to
/// the boundary, partner at hyperbolic offset `τ e^{iφ}` from it.
#[derive(Debug, Clone, Copy)]
struct PairCoords {
    depth: f64,
    theta: f64,
    log_tau: f64,
    phi: f64,
}

impl PairCoords {
    fn points(&self, r_max: f64) -> Option<(Complex64, Complex64)> {
        if !(0.0..=1.0).contains(&self.depth) {
            return None;
        }
        let r = 1.0 - (1.0 - r_max).powf(self.depth);
        let z = Complex64::from_polar(r, self.theta);
        let tau = self.log_tau.exp();
        if !(tau < 1.0) {
            return None;
        }
        let e = Complex64::from_polar(tau, self.phi);
        let w = (z + e) / (1.0 + z.conj() * e);
        Some((z, w))
    }

    fn offset(&self, axis: usize, step: f64) -> PairCoords {
        let mut c = *self;
        match axis {
            0 => c.depth += step,
            1 => c.theta += step,
            2 => c.log_tau += step,
            _ => c.phi += step,
        }
        c
    }
}

enum PairValue {
    Value(f64),
    Rejected,
    Singular,
}

fn pair_quotient(f: &HarmonicMap, z: Complex64, w: Complex64, r_max: f64) -> PairValue {
    if z.norm() > r_max || w.norm() > r_max {
        return PairValue::Rejected;
    }
    let lam = hyperbolic_distance(DiskPoint(z), DiskPoint(w));
    if !(lam >= MIN_HYPERBOLIC) {
        return PairValue::Rejected;
    }
    let (fz, fw) = match (f.evaluate(z), f.evaluate(w)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return PairValue::Singular,
    };
    match chordal_distance(fz, fw) {
        Ok(s) => PairValue::Value(s / lam),
        Err(_) => PairValue::Singular,
    }
}

/// Maximum of the Lipschitz quotient over `n_pairs` quasi-random pairs in
/// `|z| <= r_max`, followed by a local pattern search from the best pairs.
pub fn lipschitz_quotient_estimate(
    f: &HarmonicMap,
    n_pairs: usize,
    r_max: f64,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r_max must lie in (0,1), got {r_max}"
        )));
    }
    if n_pairs == 0 {
        return Err(Error::InvalidParameter("n_pairs must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
    let tau_span = (TAU_MAX / TAU_MIN).ln();

    let mut est = LipschitzEstimate {
        value: 0.0,
        argmax: None,
        pairs_evaluated: 0,
        pairs_singular: 0,
        pairs_rejected: 0,
        metric: TARGET_METRIC.to_string(),
    };
    let mut scored: Vec<(f64, PairCoords)> = Vec::new();

    for n in 1..=n_pairs as u64 {
        let u: Vec<f64> = [2u64, 3, 5, 7]
            .iter()
            .zip(shift)
            .map(|(&b, s)| (radical_inverse(n, b) + s).fract())
            .collect();
        let coords = PairCoords {
            depth: u[0],
            theta: std::f64::consts::TAU * u[1],
            log_tau: TAU_MIN.ln() + tau_span * u[2],
            phi: std::f64::consts::TAU * u[3],
        };
        let Some((z, w)) = coords.points(r_max) else {
            est.pairs_rejected += 1;
            continue;
        };
        match pair_quotient(f, z, w, r_max) {
            PairValue::Value(q) => {
                est.pairs_evaluated += 1;
                if q > est.value {
                    est.value = q;
                    est.argmax = Some((z, w));
                }
                scored.push((q, coords));
            }
            PairValue::Rejected => est.pairs_rejected += 1,
            PairValue::Singular => est.pairs_singular += 1,
        }
    }

    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(REFINE_TOP);
    let score = |c: &PairCoords| match c.points(r_max) {
        Some((z, w)) => match pair_quotient(f, z, w, r_max) {
            PairValue::Value(q) => Some((q, z, w)),
            _ => None,
        },
        None => None,
    };
    for (q0, start) in scored {
        let mut best = start;
        let mut best_q = q0;
        let mut steps = [0.05, 0.05, 0.5, 0.5];
        for _level in 0..30 {
            let mut moved = true;
            let mut guard = 0;
            while moved && guard < 200 {
                moved = false;
                guard += 1;
                #[allow(clippy::needless_range_loop)]
                for axis in 0..4 {
                    for sign in [1.0, -1.0] {
                        let cand = best.offset(axis, sign * steps[axis]);
                        if let Some((q, z, w)) = score(&cand) {
                            if q > best_q {
                                best_q = q;
                                best = cand;
                                moved = true;
                                if q > est.value {
                                    est.value = q;
                                    est.argmax = Some((z, w));
                                }
                            }
                        }
                    }
                }
            }
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    Ok(est)
}
