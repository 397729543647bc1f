//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert_op::{Resolution, PROBE_TRUNCATIONS};
use crate::measures::{MeasureSpec, CARLESON_DEPTH};
use crate::trend::Verdict;
use crate::weights::WeightSpec;

use super::catalog::SeriesSpec;

pub const CONFIG_VERSION: u32 = 1;

/// Every suite id with a registered checker.
pub const THEOREM_IDS: [&str; 18] = [
    "L2.1", "L2.2", "L2.3", "L2.4", "L2.5", "T3.1", "E3.1", "T3.3", "P4.1", "T4.2", "T4.3", "T5.1", "T5.3", "T5.4",
    "T5.6", "T5.7", "T5.8", "remark5",
];

/// One case; fields a suite does not read must be absent. Missing
/// `measure`, `nu` or `series` are filled from the config-level lists by
/// cross product.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Expected verdict; a mismatch clears the case's agreement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolutionSpec {
    /// Series truncation `N`; norm-equivalence suites also run at `2N`.
    pub truncation: usize,
    pub n_max: u64,
    /// Dyadic radius ladder depth.
    pub depth: u32,
    pub probe_truncations: Vec<usize>,
    /// Shallow and deep ladder depths for the lacunary-sum check.
    pub sum_depths: [u32; 2],
    pub deltas: Vec<f64>,
}

impl Default for ResolutionSpec {
    fn default() -> Self {
        ResolutionSpec {
            truncation: 1 << 13,
            n_max: 1 << 20,
            depth: CARLESON_DEPTH,
            probe_truncations: PROBE_TRUNCATIONS.to_vec(),
            sum_depths: [16, 20],
            deltas: (0..=8).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect(),
        }
    }
}

impl ResolutionSpec {
    pub fn ladders(&self) -> Resolution {
        Resolution {
            n_max: self.n_max,
            depth: self.depth,
        }
    }

    /// Multiplies the ladder depths by `k`: the radius ladders, the
    /// lacunary-sum depths and `log2 n_max`. Truncations are unchanged.
    pub fn scaled(&self, k: f64) -> ResolutionSpec {
        let l = self.ladders().scaled(k);
        let d = |m: u32| ((m as f64 * k).round() as u32).clamp(2, 60);
        ResolutionSpec {
            n_max: l.n_max,
            depth: l.depth,
            sum_depths: [d(self.sum_depths[0]), d(self.sum_depths[1])],
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.truncation >= 1
            && self.n_max >= 1
            && self.depth >= 1
            && self.probe_truncations.iter().all(|&n| n >= 1)
            && self.sum_depths.iter().all(|&d| d >= 1)
            && self.deltas.iter().all(|&d| d > 0.0 && d < (-2.0f64).exp());
        if !ok {
            return Err(Error::Config(format!("resolutions must be positive (deltas in (0, e^-2)): {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Two-sided norm-equivalence band `[1/C, C]`.
    pub band: f64,
    /// Allowed relative drift of a ratio when the truncation doubles.
    pub drift: f64,
    /// Ceiling for `max/min` of the Gamma-type integral over δ.
    pub q_ratio: f64,
    /// Allowed growth factor of the lacunary sum when its ladder deepens.
    pub depth_change: f64,
    /// Ceiling for constants that must merely be finite.
    pub constant: f64,
    /// Relative agreement of two evaluations of one integral.
    pub relative: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            band: 50.0,
            drift: 0.2,
            q_ratio: 100.0,
            depth_change: 2.0,
            constant: 1e3,
            relative: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub theorem: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesSpec>,
    #[serde(default)]
    pub cases: Vec<CaseSpec>,
    #[serde(default)]
    pub resolution: ResolutionSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Seed for randomized catalogs.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(theorem: &str) -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            theorem: theorem.into(),
            weights: Vec::new(),
            measures: Vec::new(),
            series: Vec::new(),
            cases: Vec::new(),
            resolution: ResolutionSpec::default(),
            thresholds: Thresholds::default(),
            seed: 0,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !THEOREM_IDS.contains(&self.theorem.as_str()) {
            return Err(Error::Config(format!("unknown theorem id {:?}", self.theorem)));
        }
        self.resolution.validate()
    }

    /// Cases after the cross product with the config-level lists.
    pub fn expanded_cases(&self) -> Vec<CaseSpec> {
        let base = if self.cases.is_empty() {
            vec![CaseSpec::default()]
        } else {
            self.cases.clone()
        };
        let mut out = Vec::new();
        for c in base {
            let ms: Vec<Option<MeasureSpec>> = match (&c.measure, self.measures.is_empty()) {
                (None, false) => self.measures.iter().cloned().map(Some).collect(),
                _ => vec![c.measure.clone()],
            };
            let ws: Vec<Option<WeightSpec>> = match (&c.nu, self.weights.is_empty()) {
                (None, false) => self.weights.iter().cloned().map(Some).collect(),
                _ => vec![c.nu.clone()],
            };
            let ss: Vec<Option<SeriesSpec>> = match (&c.series, self.series.is_empty()) {
                (None, false) => self.series.iter().cloned().map(Some).collect(),
                _ => vec![c.series.clone()],
            };
            for s in &ss {
                for w in &ws {
                    for m in &ms {
                        out.push(CaseSpec {
                            measure: m.clone(),
                            nu: w.clone(),
                            series: s.clone(),
                            ..c.clone()
                        });
                    }
                }
            }
        }
        out
    }
}
