//! Verification reports and their JSON, CSV and markdown renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::config::{ResolutionSpec, Thresholds};
use crate::error::Result;
use crate::trend::Verdict;

/// Reals that may be infinite or NaN; JSON carries those as strings.
mod lossless {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    #[serde(with = "lossless")]
    pub value: f64,
}

impl PartialEq for Quantity {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && (self.value == o.value || (self.value.is_nan() && o.value.is_nan()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedVerdict {
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub label: String,
    pub quantities: Vec<Quantity>,
    pub verdicts: Vec<NamedVerdict>,
    pub agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CaseReport {
    pub fn new(label: impl Into<String>) -> Self {
        CaseReport {
            label: label.into(),
            quantities: Vec::new(),
            verdicts: Vec::new(),
            agree: false,
            error: None,
            notes: Vec::new(),
        }
    }

    pub fn failed(label: impl Into<String>, error: String) -> Self {
        CaseReport {
            error: Some(error),
            ..Self::new(label)
        }
    }

    pub fn q(&mut self, name: &str, value: f64) -> &mut Self {
        self.quantities.push(Quantity {
            name: name.into(),
            value,
        });
        self
    }

    pub fn v(&mut self, name: &str, verdict: Verdict) -> &mut Self {
        self.verdicts.push(NamedVerdict {
            name: name.into(),
            verdict,
        });
        self
    }

    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.name == name).map(|v| v.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub version: u32,
    pub seed: u64,
    pub resolution: ResolutionSpec,
    pub thresholds: Thresholds,
    pub cases: Vec<CaseReport>,
    /// True iff every case agrees.
    pub agreement: bool,
    /// Excluded from determinism comparisons.
    pub wall_time_s: f64,
}

impl VerificationReport {
    /// JSON with the wall time zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    #[value(name = "md", alias = "markdown")]
    Markdown,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        format!("{v}")
    }
}

fn quantities_cell(c: &CaseReport) -> String {
    c.quantities
        .iter()
        .map(|q| format!("{}={}", q.name, fmt_value(q.value)))
        .collect::<Vec<_>>()
        .join("; ")
}

fn verdicts_cell(c: &CaseReport) -> String {
    c.verdicts
        .iter()
        .map(|v| format!("{}={}", v.name, v.verdict))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn emit_report(report: &VerificationReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)?),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["theorem", "case", "agree", "verdicts", "quantities", "error"])?;
            for c in &report.cases {
                w.write_record([
                    report.theorem.as_str(),
                    c.label.as_str(),
                    if c.agree { "true" } else { "false" },
                    &verdicts_cell(c),
                    &quantities_cell(c),
                    c.error.as_deref().unwrap_or(""),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        ReportFormat::Markdown => {
            let mut s = String::new();
            let _ = writeln!(s, "# {}\n", report.theorem);
            let _ = writeln!(
                s,
                "agreement: **{}** ({} cases, seed {}, n_max {}, depth {}, truncation {})\n",
                report.agreement,
                report.cases.len(),
                report.seed,
                report.resolution.n_max,
                report.resolution.depth,
                report.resolution.truncation
            );
            if report.cases.is_empty() {
                s.push_str("_no cases_\n");
                return Ok(s);
            }
            s.push_str("| case | agree | verdicts | quantities | error |\n|---|---|---|---|---|\n");
            for c in &report.cases {
                let esc = |x: &str| x.replace('|', "\\|");
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} |",
                    esc(&c.label),
                    c.agree,
                    esc(&verdicts_cell(c)),
                    esc(&quantities_cell(c)),
                    esc(c.error.as_deref().unwrap_or(""))
                );
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> VerificationReport {
        VerificationReport {
            theorem: "T4.3".into(),
            version: 1,
            seed: 0,
            resolution: ResolutionSpec::default(),
            thresholds: Thresholds::default(),
            cases: Vec::new(),
            agreement: true,
            wall_time_s: 0.5,
        }
    }

    #[test]
    fn empty_report_documents() {
        let r = empty();
        let j = emit_report(&r, ReportFormat::Json).unwrap();
        let back: VerificationReport = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
        let c = emit_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(c.lines().count(), 1);
        let m = emit_report(&r, ReportFormat::Markdown).unwrap();
        assert!(m.starts_with("# T4.3"));
    }

    #[test]
    fn json_is_lossless_for_non_finite_values() {
        let mut r = empty();
        let mut c = CaseReport::new("x");
        c.q("inf", f64::INFINITY).q("nan", f64::NAN).q("v", 1.25).v("a", Verdict::Bounded);
        c.agree = true;
        r.cases.push(c);
        let j = emit_report(&r, ReportFormat::Json).unwrap();
        let back: VerificationReport = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.cases[0].quantity("inf"), Some(f64::INFINITY));
        let csv = emit_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.contains("inf=inf"));
    }

    #[test]
    fn canonical_json_ignores_wall_time() {
        let mut a = empty();
        let b = empty();
        a.wall_time_s = 9.0;
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
