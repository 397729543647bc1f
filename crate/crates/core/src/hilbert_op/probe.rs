//! Empirical lower bounds on the operator norm `B_ω → B_ν` and their
//! behaviour as the truncation grows.

use serde::{Deserialize, Serialize};

use super::operator::{apply_coefficient, OperatorConfig};
use crate::bloch::{bloch_norm_direct, default_depth, SIGNED_ANGLES};
use crate::error::{Error, Result};
use crate::series::TaylorSeries;
use crate::trend::{trend_test, Trend, Verdict};
use crate::weights::{extremal_within_degree, NormalWeight};

/// Truncations `2^7 … 2^11` used by [`probe_growth`].
pub const PROBE_TRUNCATIONS: [usize; 5] = [1 << 7, 1 << 8, 1 << 9, 1 << 10, 1 << 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCase {
    pub name: String,
    pub norm_in: f64,
    pub norm_out: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub truncation: usize,
    pub radial_depth: u32,
    pub value: f64,
    pub argmax: String,
    pub cases: Vec<ProbeCase>,
}

/// `1`, `z` and the extremal function `1 + ∫_0^z g` of `ω` of degree at
/// most `n`.
pub fn probe_catalog(omega: &NormalWeight, n: usize) -> Result<Vec<(String, TaylorSeries)>> {
    let mut out = vec![
        ("1".to_string(), TaylorSeries::constant(1.0)),
        ("z".to_string(), TaylorSeries::monomial(1, 1.0)),
    ];
    match extremal_within_degree(omega, n.saturating_sub(1) as u64) {
        Ok(e) => out.push((format!("extremal(deg {})", e.degree() + 1), e.antiderivative_series())),
        Err(Error::Construction(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// `max_f ‖I f‖_ν / ‖f‖_ω` over `catalog`, all norms by the direct
/// estimator at the depth matched to the truncation.
pub fn operator_norm_probe(
    cfg: &OperatorConfig,
    omega: &NormalWeight,
    nu: &NormalWeight,
    catalog: &[(String, TaylorSeries)],
) -> Result<ProbeReport> {
    let n = cfg.truncation;
    let depth = default_depth(n);
    let mut cases = Vec::with_capacity(catalog.len());
    for (name, f) in catalog {
        let f = f.truncate(n);
        let norm_in = bloch_norm_direct(&f, omega, depth, SIGNED_ANGLES).value;
        if !(norm_in.is_finite() && norm_in > 0.0) {
            return Err(Error::Precondition(format!("test function {name} has norm {norm_in} in the source space")));
        }
        let g = apply_coefficient(&f, cfg)?;
        let norm_out = bloch_norm_direct(&g, nu, depth, SIGNED_ANGLES).value;
        cases.push(ProbeCase {
            name: name.clone(),
            norm_in,
            norm_out,
            ratio: norm_out / norm_in,
        });
    }
    let best = cases
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .ok_or_else(|| Error::Precondition("empty probe catalog".into()))?;
    Ok(ProbeReport {
        truncation: n,
        radial_depth: depth,
        value: best.ratio,
        argmax: best.name.clone(),
        cases,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeClass {
    Stable,
    Growing,
    Unclear,
}

impl ProbeClass {
    /// The criterion verdict this class corroborates.
    pub fn verdict(&self) -> Verdict {
        match self {
            ProbeClass::Stable => Verdict::Bounded,
            ProbeClass::Growing => Verdict::Unbounded,
            ProbeClass::Unclear => Verdict::Inconclusive,
        }
    }
}

/// Largest ratio of successive increments still read as convergence.
pub const CONVERGENT_INCREMENT_RATIO: f64 = 0.9;
/// Smallest ratio of successive increments read as steady growth.
pub const STEADY_INCREMENT_RATIO: f64 = 0.95;

/// Power slope first; in the gap between the thresholds the last three
/// increments decide. Shrinking geometrically means the probe settles
/// (a limit exists), roughly constant means logarithmic growth. The log
/// slope of the trend test is not used: five truncations span too short a
/// range of `ln ln N` for it to mean anything.
pub fn classify_probe(values: &[f64], trend: &Trend) -> ProbeClass {
    if trend.slope > crate::trend::UNBOUNDED_SLOPE {
        return ProbeClass::Growing;
    }
    if trend.slope < crate::trend::BOUNDED_SLOPE {
        return ProbeClass::Stable;
    }
    let inc: Vec<f64> = values.windows(2).map(|p| p[1] - p[0]).collect();
    if inc.len() < 3 {
        return ProbeClass::Unclear;
    }
    let ratios: Vec<f64> = inc[inc.len() - 3..].windows(2).map(|p| p[1] / p[0]).collect();
    if ratios.iter().all(|&r| r.is_finite() && r < CONVERGENT_INCREMENT_RATIO) {
        ProbeClass::Stable
    } else if ratios.iter().all(|&r| r >= STEADY_INCREMENT_RATIO) {
        ProbeClass::Growing
    } else {
        ProbeClass::Unclear
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrowth {
    /// `(N, probe value)`.
    pub points: Vec<(usize, f64)>,
    pub trend: Trend,
    pub class: ProbeClass,
    pub reports: Vec<ProbeReport>,
}

/// Probe at each truncation with the catalog rebuilt to fit it; the
/// class comes from [`classify_probe`] on the values against `ln N`.
pub fn probe_growth(
    cfg: &OperatorConfig,
    omega: &NormalWeight,
    nu: &NormalWeight,
    truncations: &[usize],
) -> Result<ProbeGrowth> {
    let mut reports = Vec::with_capacity(truncations.len());
    for &n in truncations {
        let catalog = probe_catalog(omega, n)?;
        reports.push(operator_norm_probe(&cfg.with_truncation(n), omega, nu, &catalog)?);
    }
    let points: Vec<(usize, f64)> = reports.iter().map(|r| (r.truncation, r.value)).collect();
    let lp: Vec<(f64, f64)> = points.iter().map(|&(n, v)| ((n as f64).ln(), v)).collect();
    let trend = trend_test(&lp);
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    let class = classify_probe(&values, &trend);
    Ok(ProbeGrowth {
        points,
        trend,
        class,
        reports,
    })
}
