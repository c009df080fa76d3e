//! Polar-grid maximization with local pattern-search refinement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(r, max over |z| = r)` pairs in increasing `r`.
pub type Trend = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Complex64,
    pub r_max: f64,
    pub grid_resolution: usize,
    pub refined: bool,
    /// `(r, max over the sampled circle |z| = r)` with `r` increasing.
    pub trend: Vec<(f64, f64)>,
    pub singular_points: usize,
    pub evaluations: usize,
}

/// Radii `r_i = r_max (1 - (1 - i/n)^2)` for `i = 0..=n` and `4n` angles.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
}

impl PolarGrid {
    pub fn new(r_max: f64, n: usize) -> Self {
        let radii = (0..=n)
            .map(|i| {
                let u = 1.0 - i as f64 / n as f64;
                r_max * (1.0 - u * u)
            })
            .collect();
        Self::with_radii(radii, 4 * n)
    }

    pub fn with_radii(radii: Vec<f64>, n_angles: usize) -> Self {
        let angles = (0..n_angles)
            .map(|j| std::f64::consts::TAU * j as f64 / n_angles as f64)
            .collect();
        PolarGrid { radii, angles }
    }
}

/// Evaluation outcome: singular points are skipped, other errors abort.
fn probe<F>(func: &F, z: Complex64, singular: &mut usize) -> Result<Option<f64>>
where
    F: Fn(Complex64) -> Result<f64>,
{
    match func(z) {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) | Err(Error::Singularity { .. }) | Err(Error::NonFinite) => {
            *singular += 1;
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub r: f64,
    pub theta: f64,
    pub value: f64,
}

impl Candidate {
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

/// Exhaustive scan of a polar grid. Returns the best point and per-circle maxima.
/// A strict `>` comparison in radius-major order keeps the first maximizer,
/// so ties go to the smaller radius, then the smaller angle.
pub fn scan<F>(
    func: &F,
    grid: &PolarGrid,
    singular: &mut usize,
    evaluations: &mut usize,
) -> Result<(Option<Candidate>, Trend)>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let mut best: Option<Candidate> = None;
    let mut trend = Vec::with_capacity(grid.radii.len());
    for &r in &grid.radii {
        let thetas: &[f64] = if r == 0.0 { &[0.0] } else { &grid.angles };
        let mut circle: Option<f64> = None;
        for &theta in thetas {
            *evaluations += 1;
            let Some(v) = probe(func, Complex64::from_polar(r, theta), singular)? else {
                continue;
            };
            if circle.is_none_or(|c| v > c) {
                circle = Some(v);
            }
            if best.is_none_or(|b| v > b.value) {
                best = Some(Candidate { r, theta, value: v });
            }
        }
        if let Some(c) = circle {
            trend.push((r, c));
        }
    }
    Ok((best, trend))
}

/// Bounds and step sizes for [`pattern_search`].
#[derive(Debug, Clone, Copy)]
pub struct SearchBox {
    pub r_lower: f64,
    pub r_upper: f64,
    pub dr: f64,
    pub dtheta: f64,
}

const MAX_MOVES: usize = 64;

/// 3×3 pattern search in `(r, θ)`: move to the best neighbour until the
/// centre wins, then shrink both steps by 4. Runs `levels` such rounds, or
/// until steps fall below `min_step`.
pub fn pattern_search<F>(
    func: &F,
    start: Candidate,
    bounds: SearchBox,
    levels: usize,
    min_step: f64,
    singular: &mut usize,
    evaluations: &mut usize,
) -> Result<Candidate>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let mut best = start;
    let (mut dr, mut dt) = (bounds.dr, bounds.dtheta);
    for _ in 0..levels {
        if dr.max(dt) < min_step {
            break;
        }
        for _ in 0..MAX_MOVES {
            let centre = best;
            for i in [-1.0, 0.0, 1.0] {
                let r = (centre.r + i * dr).clamp(bounds.r_lower, bounds.r_upper);
                for j in [-1.0, 0.0, 1.0] {
                    if i == 0.0 && j == 0.0 {
                        continue;
                    }
                    let theta = centre.theta + j * dt;
                    *evaluations += 1;
                    if let Some(v) = probe(func, Complex64::from_polar(r, theta), singular)? {
                        if v > best.value {
                            best = Candidate { r, theta, value: v };
                        }
                    }
                }
            }
            if best.value == centre.value && best.r == centre.r && best.theta == centre.theta {
                break;
            }
        }
        dr *= 0.25;
        dt *= 0.25;
    }
    Ok(best)
}

/// Grid scan to `r_max` followed by `refine_iters` refinement levels.
pub fn estimate_sup<F>(func: F, r_max: f64, grid: usize, refine_iters: usize) -> Result<SupEstimate>
where
    F: Fn(Complex64) -> Result<f64>,
{
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r_max must lie in (0,1), got {r_max}"
        )));
    }
    if grid < 16 {
        return Err(Error::InvalidParameter(format!(
            "grid must be at least 16, got {grid}"
        )));
    }
    let pg = PolarGrid::new(r_max, grid);
    let mut singular = 0;
    let mut evaluations = 0;
    let (best, trend) = scan(&func, &pg, &mut singular, &mut evaluations)?;
    let best = best.ok_or(Error::AllSingular)?;

    let idx = pg.radii.partition_point(|&r| r < best.r).min(grid);
    let below = if idx > 0 {
        best.r - pg.radii[idx - 1]
    } else {
        0.0
    };
    let above = if idx < grid {
        pg.radii[idx + 1] - best.r
    } else {
        0.0
    };
    let bounds = SearchBox {
        r_lower: 0.0,
        r_upper: r_max,
        dr: below.max(above),
        dtheta: pg.angles[1] - pg.angles[0],
    };
    let refined = pattern_search(
        &func,
        best,
        bounds,
        refine_iters,
        0.0,
        &mut singular,
        &mut evaluations,
    )?;
    let argmax = if refined.r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        refined.point()
    };
    Ok(SupEstimate {
        value: refined.value,
        argmax,
        r_max,
        grid_resolution: grid,
        refined: refine_iters > 0,
        trend,
        singular_points: singular,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = PolarGrid::new(0.9, 16);
        assert_eq!(g.radii.len(), 17);
        assert_eq!(g.angles.len(), 64);
        assert_eq!(g.radii[0], 0.0);
        assert_eq!(g.radii[16], 0.9);
        assert!(g.radii.windows(2).all(|w| w[1] > w[0]));
        assert!(g.radii[16] - g.radii[15] < g.radii[1] - g.radii[0]);
    }

    #[test]
    fn refinement_finds_off_grid_peak() {
        let peak = Complex64::new(0.4123, 0.2771);
        let f = |z: Complex64| Ok(1.0 / (1.0 + 50.0 * (z - peak).norm_sqr()));
        let coarse = estimate_sup(f, 0.9, 16, 0).unwrap();
        let fine = estimate_sup(f, 0.9, 16, 8).unwrap();
        assert!(fine.value >= coarse.value);
        assert!((fine.argmax - peak).norm() < 1e-5, "{:?}", fine.argmax);
    }

    #[test]
    fn ties_prefer_small_radius() {
        let est = estimate_sup(|_| Ok(1.0), 0.5, 16, 3).unwrap();
        assert_eq!(est.argmax, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn all_singular_is_an_error() {
        let f = |z: Complex64| {
            Err(Error::Singularity {
                kind: crate::error::SingularityKind::DivisionByZero,
                at: z,
            })
        };
        assert!(matches!(
            estimate_sup(f, 0.5, 16, 0),
            Err(Error::AllSingular)
        ));
    }

    #[test]
    fn bad_arguments() {
        assert!(estimate_sup(|_| Ok(0.0), 1.0, 16, 0).is_err());
        assert!(estimate_sup(|_| Ok(0.0), 0.5, 8, 0).is_err());
    }
}
