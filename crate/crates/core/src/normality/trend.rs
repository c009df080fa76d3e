use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendVerdict {
    Flat,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendAnalysis {
    pub verdict: TrendVerdict,
    /// Log-log slope over the outer half in `x = log(1/(1-r))`.
    pub tail_slope: Option<f64>,
    /// Log-log slope over the outer quarter.
    pub end_slope: Option<f64>,
    pub points_used: usize,
}

pub const SLOPE_THRESHOLD: f64 = 0.2;
const MIN_POINTS: usize = 3;

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < MIN_POINTS {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Classifies `(r, max over |z| = r)` pairs by the least-squares slope of
/// `log(value)` against `log(1/(1-r))`.
pub fn classify_trend(trend: &[(f64, f64)]) -> TrendAnalysis {
    let usable: Vec<(f64, f64)> = trend
        .iter()
        .filter(|(r, v)| *r > 0.0 && *r < 1.0 && v.is_finite())
        .copied()
        .collect();
    if !usable.is_empty() && usable.iter().all(|p| p.1 == usable[0].1) {
        return TrendAnalysis {
            verdict: TrendVerdict::Flat,
            tail_slope: None,
            end_slope: None,
            points_used: usable.len(),
        };
    }
    let logs: Vec<(f64, f64)> = usable
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(r, v)| (-(1.0 - r).ln(), v.ln()))
        .collect();
    let x_max = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let window = |frac: f64| -> Vec<(f64, f64)> {
        logs.iter()
            .filter(|p| p.0 >= frac * x_max)
            .copied()
            .collect()
    };
    let tail = window(0.5);
    let tail_slope = slope(&tail);
    let end_slope = slope(&window(0.75));
    let verdict = match (tail_slope, end_slope) {
        (None, _) => TrendVerdict::Inconclusive,
        (Some(s), end) if s > SLOPE_THRESHOLD => match end {
            Some(e) if e <= -SLOPE_THRESHOLD => TrendVerdict::Inconclusive,
            _ => TrendVerdict::Growing,
        },
        (Some(s), _) if s < -SLOPE_THRESHOLD => TrendVerdict::Flat,
        (Some(_), end) => match end {
            Some(e) if e > SLOPE_THRESHOLD => TrendVerdict::Inconclusive,
            _ => TrendVerdict::Flat,
        },
    };
    TrendAnalysis {
        verdict,
        tail_slope,
        end_slope,
        points_used: tail.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=40)
            .map(|i| {
                let r = 1.0 - 10f64.powf(-3.0 * i as f64 / 40.0);
                (r, f(r))
            })
            .collect()
    }

    #[test]
    fn power_law_growth() {
        let t = classify_trend(&series(|r| 1.0 / (1.0 - r)));
        assert_eq!(t.verdict, TrendVerdict::Growing);
        assert!((t.tail_slope.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_and_decaying() {
        assert_eq!(classify_trend(&series(|_| 0.5)).verdict, TrendVerdict::Flat);
        assert_eq!(
            classify_trend(&series(|r| 1.0 - r * r)).verdict,
            TrendVerdict::Flat
        );
        assert_eq!(classify_trend(&series(|_| 0.0)).verdict, TrendVerdict::Flat);
    }

    #[test]
    fn slow_logarithmic_growth_is_flat() {
        let t = classify_trend(&series(|r| 1.0 + 0.1 * (-(1.0 - r).ln()).ln_1p()));
        assert_eq!(t.verdict, TrendVerdict::Flat);
    }

    #[test]
    fn constant_short_series_is_flat() {
        let t = classify_trend(&[(0.6, 0.25), (0.8, 0.25), (0.9, 0.25)]);
        assert_eq!(t.verdict, TrendVerdict::Flat);
    }

    #[test]
    fn too_few_points() {
        let t = classify_trend(&[(0.5, 1.0), (0.9, 2.0)]);
        assert_eq!(t.verdict, TrendVerdict::Inconclusive);
    }
}
