use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvexityFlag {
    Verified,
    Failed,
    Unchecked,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhiKind {
    /// `(1 - r)^{-s}`.
    Power { s: f64 },
    /// Linear interpolation through `(r, φ(r))` nodes.
    Table { r: Vec<f64>, v: Vec<f64> },
}

/// A weight `φ: [0,1) → (0,∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi {
    pub kind: PhiKind,
    pub spec: String,
    pub convexity: ConvexityFlag,
}

impl Phi {
    pub fn power(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phi exponent must be finite, got {s}"
            )));
        }
        Ok(Phi {
            kind: PhiKind::Power { s },
            spec: format!("pow:{s}"),
            convexity: ConvexityFlag::Unchecked,
        })
    }

    pub fn from_points(r: Vec<f64>, v: Vec<f64>, spec: impl Into<String>) -> Result<Self> {
        if r.len() < 2 || r.len() != v.len() {
            return Err(Error::InvalidParameter(
                "phi table needs at least two (r, phi) rows".into(),
            ));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "phi table radii must increase strictly".into(),
            ));
        }
        if r[0] < 0.0 || !(r[r.len() - 1] < 1.0) {
            return Err(Error::InvalidParameter(
                "phi table radii must lie in [0,1)".into(),
            ));
        }
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParameter(
                "phi table values must be positive".into(),
            ));
        }
        Ok(Phi {
            kind: PhiKind::Table { r, v },
            spec: spec.into(),
            convexity: ConvexityFlag::Unchecked,
        })
    }

    /// Reads a headerless or headed CSV of `r,phi` rows.
    pub fn from_table(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if rec.len() < 2 {
                return Err(Error::Io(format!(
                    "{}: row {} needs two columns",
                    path.display(),
                    line + 1
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    r.push(a);
                    v.push(b);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Io(format!(
                        "{}: row {} is not numeric",
                        path.display(),
                        line + 1
                    )))
                }
            }
        }
        Phi::from_points(r, v, format!("table:{}", path.display()))
    }

    /// Parses `pow:<s>` or `table:<path>`.
    pub fn parse_spec(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(s) = text.strip_prefix("pow:") {
            let s: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad phi exponent in {text:?}")))?;
            Phi::power(s)
        } else if let Some(p) = text.strip_prefix("table:") {
            Phi::from_table(Path::new(p.trim()))
        } else {
            Err(Error::InvalidParameter(format!(
                "phi spec must be pow:<s> or table:<path>, got {text:?}"
            )))
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            PhiKind::Power { .. } => (0.0, 1.0),
            PhiKind::Table { r, .. } => (r[0], r[r.len() - 1]),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::PhiDomain(r));
        }
        match &self.kind {
            PhiKind::Power { s } => Ok((1.0 - r).powf(-s)),
            PhiKind::Table { r: rs, v } => {
                if r < rs[0] || r > rs[rs.len() - 1] {
                    return Err(Error::PhiDomain(r));
                }
                let j = rs.partition_point(|&x| x <= r).clamp(1, rs.len() - 1);
                let (r0, r1) = (rs[j - 1], rs[j]);
                let w = (r - r0) / (r1 - r0);
                Ok(v[j - 1] + w * (v[j] - v[j - 1]))
            }
        }
    }

    pub fn with_convexity(mut self, flag: ConvexityFlag) -> Self {
        self.convexity = flag;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiValidation {
    pub spec: String,
    /// `φ(r)(1-r)` grows without bound along the probes.
    pub growth: bool,
    /// `R_a → 1` uniformly on the probed disk.
    pub locally_uniform: bool,
    /// `1/φ` is discretely convex.
    pub convex: bool,
    pub growth_values: Vec<(f64, f64)>,
    /// `(a, max |R_a - 1|)`; `None` where `R_a` left the domain of φ.
    pub deviations: Vec<(f64, Option<f64>)>,
    pub min_second_difference: f64,
}

impl PhiValidation {
    pub fn convexity_flag(&self) -> ConvexityFlag {
        if self.convex {
            ConvexityFlag::Verified
        } else {
            ConvexityFlag::Failed
        }
    }
}

pub const DEFAULT_R_PROBE: [f64; 7] = [0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999];
pub const DEFAULT_A_PROBE: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];
pub const DEFAULT_COMPACT_RADIUS: f64 = 1.0;
pub const LOCAL_TOLERANCE: f64 = 0.1;
pub const CONVEXITY_SLACK: f64 = 1e-12;
const GROWTH_FACTOR: f64 = 10.0;
const CONVEXITY_GRID: usize = 2000;

fn check_probe(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} is empty")));
    }
    if p.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(format!(
            "{name} must increase strictly"
        )));
    }
    if let Some(&bad) = p.iter().find(|&&r| !(0.0..1.0).contains(&r)) {
        return Err(Error::PhiDomain(bad));
    }
    Ok(())
}

/// Maximum of `|R_a(z) - 1|` over a polar grid of `|z| <= radius`, or `None`
/// if some `a + z/φ(a)` falls outside the domain of φ.
fn local_deviation(phi: &Phi, a: f64, radius: f64) -> Result<Option<f64>> {
    let pa = phi.eval(a)?;
    let mut worst: f64 = 0.0;
    for i in 1..=8 {
        let rr = radius * i as f64 / 8.0;
        for j in 0..64 {
            let z = Complex64::from_polar(rr, std::f64::consts::TAU * j as f64 / 64.0);
            let m = (Complex64::new(a, 0.0) + z / pa).norm();
            match phi.eval(m) {
                Ok(val) => worst = worst.max((val / pa - 1.0).abs()),
                Err(Error::PhiDomain(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Some(worst))
}

pub fn validate_phi(
    phi: &Phi,
    r_probe: &[f64],
    compact_radius: f64,
    a_probe: &[f64],
) -> Result<PhiValidation> {
    check_probe("r_probe", r_probe)?;
    check_probe("a_probe", a_probe)?;
    if !(compact_radius > 0.0 && compact_radius.is_finite()) {
        return Err(Error::InvalidParameter(
            "compact_radius must be positive".into(),
        ));
    }

    let growth_values = r_probe
        .iter()
        .map(|&r| Ok((r, phi.eval(r)? * (1.0 - r))))
        .collect::<Result<Vec<_>>>()?;
    let q: Vec<f64> = growth_values.iter().map(|p| p.1).collect();
    let tail = &q[q.len().saturating_sub(5)..];
    let growth = q[q.len() - 1] > GROWTH_FACTOR * q[0] && tail.windows(2).all(|w| w[1] >= w[0]);

    let deviations = a_probe
        .iter()
        .map(|&a| Ok((a, local_deviation(phi, a, compact_radius)?)))
        .collect::<Result<Vec<_>>>()?;
    let locally_uniform = match deviations.iter().map(|d| d.1).collect::<Option<Vec<f64>>>() {
        Some(d) => d.windows(2).all(|w| w[1] <= w[0]) && d[d.len() - 1] < LOCAL_TOLERANCE,
        None => false,
    };

    let (lo, dom_hi) = phi.domain();
    let hi = if dom_hi < 1.0 {
        dom_hi
    } else {
        r_probe[r_probe.len() - 1]
    };
    let step = (hi - lo) / CONVEXITY_GRID as f64;
    let inv = (0..=CONVEXITY_GRID)
        .map(|i| Ok(1.0 / phi.eval((lo + step * i as f64).min(hi))?))
        .collect::<Result<Vec<f64>>>()?;
    let min_second_difference = inv
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::INFINITY, f64::min);
    let convex = min_second_difference >= -CONVEXITY_SLACK;

    Ok(PhiValidation {
        spec: phi.spec.clone(),
        growth,
        locally_uniform,
        convex,
        growth_values,
        deviations,
        min_second_difference,
    })
}
