//! Solutions of `f(z) = a` in `|z| <= r_max` by damped Newton iteration on
//! the real 2×2 system.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::HarmonicMap;

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const DEDUP_RADIUS: f64 = 1e-6;
pub const DEFAULT_SEED_GRID: usize = 24;
const MAX_HALVINGS: usize = 20;
const MAX_ITERS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub target: Complex64,
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub region_r_max: f64,
    pub seeds: usize,
    pub abandoned: usize,
}

impl Fiber {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Real Jacobian of `(Re f, Im f)` in `(x, y)` from `A = h'` and `B = conj(g')`,
/// together with its determinant `|A|² - |B|²`.
pub fn real_jacobian(hp: Complex64, gp: Complex64) -> ([[f64; 2]; 2], f64) {
    let a = hp;
    let b = gp.conj();
    let m = [[(a + b).re, -(a - b).im], [(a + b).im, (a - b).re]];
    (m, a.norm_sqr() - b.norm_sqr())
}

struct Probe {
    value: Complex64,
    hp: Complex64,
    gp: Complex64,
}

fn probe(f: &HarmonicMap, z: Complex64) -> Option<Probe> {
    let lj = f.local(z, 1).ok()?;
    let value = lj.value();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return None;
    }
    Some(Probe {
        value,
        hp: lj.h.derivative(1),
        gp: lj.g.derivative(1),
    })
}

fn newton_step(p: &Probe, a: Complex64) -> Option<Complex64> {
    let (m, det) = real_jacobian(p.hp, p.gp);
    let scale = p.hp.norm_sqr() + p.gp.norm_sqr();
    if det == 0.0 || !(det.abs() > 1e-14 * scale) {
        return None;
    }
    let r = p.value - a;
    let dx = -(m[1][1] * r.re - m[0][1] * r.im) / det;
    let dy = -(-m[1][0] * r.re + m[0][0] * r.im) / det;
    Some(Complex64::new(dx, dy))
}

/// Damped Newton from `z0`; `None` when the seed is abandoned. A point is a
/// root when the residual is below tolerance and the next Newton correction
/// is below `STEP_TOLERANCE`; the second test rejects points where `f - a`
/// is merely tiny, such as near an asymptotic value at the boundary.
fn newton(f: &HarmonicMap, a: Complex64, z0: Complex64) -> Option<(Complex64, f64)> {
    let mut z = z0;
    let mut p = probe(f, z)?;
    let mut res = (p.value - a).norm();
    for _ in 0..MAX_ITERS {
        if res == 0.0 {
            return Some((z, res));
        }
        let Some(step) = newton_step(&p, a) else {
            // Flat map near z: only an exact hit counts.
            return (res <= RESIDUAL_TOLERANCE).then_some((z, res));
        };
        if res <= RESIDUAL_TOLERANCE && step.norm() <= STEP_TOLERANCE {
            return Some(polish(f, a, z, p, res));
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = z + step * lambda;
            if cand.norm() < 1.0 {
                if let Some(q) = probe(f, cand) {
                    let rq = (q.value - a).norm();
                    if rq < res {
                        accepted = Some((cand, q, rq));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((cand, q, rq)) => {
                z = cand;
                p = q;
                res = rq;
            }
            None => {
                // Residual at round-off level: accept if the correction is small.
                let small = newton_step(&p, a).is_some_and(|s| s.norm() <= STEP_TOLERANCE);
                return (res <= RESIDUAL_TOLERANCE && small).then_some((z, res));
            }
        }
    }
    None
}

/// A few undamped Newton steps on an accepted root, kept while the residual
/// does not grow, so that roots reached from different seeds agree to round-off.
fn polish(
    f: &HarmonicMap,
    a: Complex64,
    mut z: Complex64,
    mut p: Probe,
    mut res: f64,
) -> (Complex64, f64) {
    for _ in 0..3 {
        let Some(step) = newton_step(&p, a) else {
            break;
        };
        let cand = z + step;
        let Some(q) = probe(f, cand).filter(|_| cand.norm() < 1.0) else {
            break;
        };
        let rq = (q.value - a).norm();
        if rq > res {
            break;
        }
        (z, p, res) = (cand, q, rq);
        if step.norm() == 0.0 {
            break;
        }
    }
    (z, res)
}

pub fn solve_fiber(f: &HarmonicMap, a: Complex64, r_max: f64, seed_grid: usize) -> Result<Fiber> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r_max must lie in (0,1), got {r_max}"
        )));
    }
    if seed_grid == 0 {
        return Err(Error::InvalidParameter("seed_grid must be positive".into()));
    }
    if !(a.re.is_finite() && a.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = seed_grid as f64;
    let mut found = Vec::new();
    let mut abandoned = 0;
    for i in 0..seed_grid {
        let r = r_max * (i as f64 + 0.5) / n;
        for j in 0..seed_grid {
            let seed = Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / n);
            match newton(f, a, seed) {
                Some((z, res)) if z.norm() <= r_max => found.push((z, res)),
                Some(_) => {}
                None => abandoned += 1,
            }
        }
    }
    found.sort_by(|p, q| p.0.re.total_cmp(&q.0.re).then(p.0.im.total_cmp(&q.0.im)));
    let mut roots: Vec<Complex64> = Vec::new();
    let mut residuals = Vec::new();
    for (z, res) in found {
        if roots.iter().all(|r| (r - z).norm() >= DEDUP_RADIUS) {
            roots.push(z);
            residuals.push(res);
        }
    }
    Ok(Fiber {
        target: a,
        roots,
        residuals,
        region_r_max: r_max,
        seeds: seed_grid * seed_grid,
        abandoned,
    })
}

/// Fibers of one map keyed by target, reused across checks.
#[derive(Debug, Default)]
pub struct FiberCache {
    fibers: BTreeMap<(u64, u64), Fiber>,
}

impl FiberCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &mut self,
        f: &HarmonicMap,
        a: Complex64,
        r_max: f64,
        seed_grid: usize,
    ) -> Result<&Fiber> {
        let key = (a.re.to_bits(), a.im.to_bits());
        let stale = self
            .fibers
            .get(&key)
            .is_none_or(|fb| fb.region_r_max != r_max || fb.seeds != seed_grid * seed_grid);
        if stale {
            let fb = solve_fiber(f, a, r_max, seed_grid)?;
            self.fibers.insert(key, fb);
        }
        Ok(&self.fibers[&key])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_fiber() {
        let f = HarmonicMap::parse("z", None, "id").unwrap();
        let fb = solve_fiber(&f, c(0.3, 0.0), 0.9, 8).unwrap();
        assert_eq!(fb.roots.len(), 1);
        assert!((fb.roots[0] - c(0.3, 0.0)).norm() < 1e-12);
        assert!(fb.residuals[0] < 1e-12);
    }

    #[test]
    fn square_fiber() {
        let f = HarmonicMap::parse("z^2", None, "sq").unwrap();
        let fb = solve_fiber(&f, c(0.25, 0.0), 0.9, 16).unwrap();
        assert_eq!(fb.roots.len(), 2);
        assert!((fb.roots[0] + 0.5).norm() < 1e-8);
        assert!((fb.roots[1] - 0.5).norm() < 1e-8);
    }

    #[test]
    fn unreachable_target_is_empty() {
        let f = HarmonicMap::parse("z", Some("z^2/2"), "m").unwrap();
        let fb = solve_fiber(&f, c(2.0, 0.0), 0.9, 16).unwrap();
        assert!(fb.is_empty());
    }

    #[test]
    fn sense_reversing_fiber() {
        let f = HarmonicMap::parse("z", Some("2*z"), "rev").unwrap();
        let fb = solve_fiber(&f, c(0.3, 0.6), 0.9, 8).unwrap();
        assert_eq!(fb.roots.len(), 1);
        assert!((f.evaluate(fb.roots[0]).unwrap() - c(0.3, 0.6)).norm() < 1e-10);
    }

    #[test]
    fn asymptotic_value_is_not_a_root() {
        let f = HarmonicMap::parse("exp(i/(1-z))", None, "cusp").unwrap();
        let fb = solve_fiber(&f, c(0.0, 0.0), 0.999, 24).unwrap();
        assert!(fb.is_empty(), "{:?}", fb.roots);
    }

    #[test]
    fn double_root_resolved() {
        let f = HarmonicMap::parse("z^2", None, "sq").unwrap();
        let fb = solve_fiber(&f, c(0.0, 0.0), 0.9, 8).unwrap();
        assert_eq!(fb.roots.len(), 1);
        assert!(fb.roots[0].norm() < 1e-7);
    }

    #[test]
    fn jacobian_determinant() {
        let (m, det) = real_jacobian(c(1.0, 2.0), c(0.5, -0.25));
        let direct = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - direct).abs() < 1e-14);
        assert!((det - (5.0 - 0.3125)).abs() < 1e-14);
    }
}
