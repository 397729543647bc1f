//! Finite-resolution verdicts for suprema over unbounded index sets.
//!
//! A quantity `q` is sampled along a ladder whose scale variable is either
//! `ln(1/(1-t))` (radial ladders) or `ln n` (index ladders). Over the
//! deepest half of the ladder two least-squares slopes are fitted:
//!
//! * the power slope, `d ln q / d scale`, which catches growth like `n^p`;
//! * the log slope, `d ln q / d ln(1 + scale)`, which catches growth like
//!   `log^p n` or `log log n` that the power slope cannot separate from
//!   zero at desk-scale depths.

use serde::{Deserialize, Serialize};

/// Power slopes below this are read as bounded.
pub const BOUNDED_SLOPE: f64 = 0.05;
/// Power slopes above this are read as unbounded.
pub const UNBOUNDED_SLOPE: f64 = 0.15;
/// Log slopes above this are read as (logarithmically) unbounded.
pub const LOG_UNBOUNDED_SLOPE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Unbounded => "unbounded",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub slope: f64,
    pub log_slope: f64,
    pub verdict: Verdict,
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Classify a ladder of `(scale, quantity)` samples, `scale` increasing.
pub fn trend_test(points: &[(f64, f64)]) -> Trend {
    let start = points.len() / 2;
    let deep = &points[start..];
    if deep.iter().any(|(_, q)| !q.is_finite()) {
        return Trend {
            slope: f64::INFINITY,
            log_slope: f64::INFINITY,
            verdict: Verdict::Unbounded,
        };
    }
    // A quantity that has dropped to zero (a tail past the last atom) is
    // bounded regardless of what came before.
    if deep.last().map_or(true, |&(_, q)| q <= 0.0) {
        return Trend {
            slope: f64::NEG_INFINITY,
            log_slope: f64::NEG_INFINITY,
            verdict: Verdict::Bounded,
        };
    }
    let positive: Vec<(f64, f64)> = deep.iter().copied().filter(|&(_, q)| q > 0.0).collect();
    if positive.len() < 3 {
        return Trend {
            slope: f64::NAN,
            log_slope: f64::NAN,
            verdict: Verdict::Inconclusive,
        };
    }
    let scale: Vec<f64> = positive.iter().map(|p| p.0).collect();
    let log_scale: Vec<f64> = positive.iter().map(|p| p.0.ln_1p()).collect();
    let lq: Vec<f64> = positive.iter().map(|p| p.1.ln()).collect();
    let slope = ls_slope(&scale, &lq);
    let log_slope = ls_slope(&log_scale, &lq);
    let verdict = classify(slope, log_slope);
    Trend {
        slope,
        log_slope,
        verdict,
    }
}

pub fn classify(slope: f64, log_slope: f64) -> Verdict {
    if slope > UNBOUNDED_SLOPE || log_slope > LOG_UNBOUNDED_SLOPE {
        Verdict::Unbounded
    } else if slope < BOUNDED_SLOPE {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=24)
            .map(|m| {
                let u = m as f64 * std::f64::consts::LN_2;
                (u, f(u))
            })
            .collect()
    }

    #[test]
    fn constant_is_bounded() {
        let t = trend_test(&ladder(|_| 3.0));
        assert_eq!(t.verdict, Verdict::Bounded);
        assert!(t.slope.abs() < 1e-12);
    }

    #[test]
    fn power_growth_is_unbounded() {
        let t = trend_test(&ladder(|u| u.exp()));
        assert_eq!(t.verdict, Verdict::Unbounded);
        assert!((t.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_growth_is_unbounded() {
        assert_eq!(trend_test(&ladder(|u| 1.0 + u)).verdict, Verdict::Unbounded);
        assert_eq!(trend_test(&ladder(|u| (1.0 + u).ln())).verdict, Verdict::Unbounded);
    }

    #[test]
    fn decaying_and_saturating_are_bounded() {
        assert_eq!(trend_test(&ladder(|u| (-0.5 * u).exp())).verdict, Verdict::Bounded);
        assert_eq!(trend_test(&ladder(|u| 2.0 - 1.0 / (1.0 + u))).verdict, Verdict::Bounded);
    }

    #[test]
    fn vanishing_tail_is_bounded() {
        assert_eq!(trend_test(&ladder(|u| if u > 3.0 { 0.0 } else { 1.0 })).verdict, Verdict::Bounded);
    }
}
