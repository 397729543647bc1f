//! Built-in weights, measures and test series, and the default
//! configuration of every suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CaseSpec, ExperimentConfig, THEOREM_IDS};
use crate::error::{Error, Result};
use crate::hilbert_op::OperatorConfig;
use crate::measures::{MeasureSpec, RadialMeasure};
use crate::series::TaylorSeries;
use crate::trend::Verdict;
use crate::weights::{extremal_within_degree, NormalWeight, WeightSpec};

/// Test series, built at a requested truncation `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesSpec {
    Constant { c: f64 },
    Monomial { k: usize },
    /// `a_0 = 0`, `a_k = k^{-p}`.
    InversePower { p: f64 },
    /// `a_k = 1`.
    Ones,
    /// `a_k = ratio^k`.
    Geometric { ratio: f64 },
    /// `1 + ∫_0^z g` for the lacunary extremal function of `weight`, of
    /// degree at most `N`.
    Extremal { weight: WeightSpec },
    Coefficients { coeffs: Vec<f64> },
    /// Uniform coefficients in `[-1, 1]`, seeded by the config.
    RandomSigned { degree: usize },
}

impl SeriesSpec {
    pub fn label(&self) -> String {
        match self {
            SeriesSpec::Constant { c } => format!("{c}"),
            SeriesSpec::Monomial { k } => format!("z^{k}"),
            SeriesSpec::InversePower { p } => format!("k^-{p}"),
            SeriesSpec::Ones => "ones".into(),
            SeriesSpec::Geometric { ratio } => format!("{ratio}^k"),
            SeriesSpec::Extremal { weight } => match NormalWeight::from_spec(weight) {
                Ok(w) => format!("extremal[{}]", w.label()),
                Err(_) => "extremal[?]".into(),
            },
            SeriesSpec::Coefficients { coeffs } => format!("poly(deg {})", coeffs.len().saturating_sub(1)),
            SeriesSpec::RandomSigned { degree } => format!("random(deg {degree})"),
        }
    }

    pub fn build(&self, n: usize, seed: u64) -> Result<TaylorSeries> {
        Ok(match self {
            SeriesSpec::Constant { c } => TaylorSeries::constant(*c),
            SeriesSpec::Monomial { k } => TaylorSeries::monomial(*k, 1.0),
            SeriesSpec::InversePower { p } => {
                TaylorSeries::from_fn(n, |k| if k == 0 { 0.0 } else { (k as f64).powf(-p) })
            }
            SeriesSpec::Ones => TaylorSeries::from_fn(n, |_| 1.0),
            SeriesSpec::Geometric { ratio } => TaylorSeries::from_fn(n, |k| ratio.powi(k as i32)),
            SeriesSpec::Extremal { weight } => {
                extremal_within_degree(&NormalWeight::from_spec(weight)?, n.saturating_sub(1) as u64)?.antiderivative_series()
            }
            SeriesSpec::Coefficients { coeffs } => TaylorSeries::try_from_coefficients(coeffs.clone())?,
            SeriesSpec::RandomSigned { degree } => random_signed(*degree, seed),
        })
    }
}

pub fn random_signed(degree: usize, seed: u64) -> TaylorSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TaylorSeries::from_coefficients((0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

pub struct Catalog {
    pub weights: Vec<NormalWeight>,
    pub measures: Vec<RadialMeasure>,
    pub series: Vec<SeriesSpec>,
    pub operators: Vec<(String, OperatorConfig)>,
}

fn w(r: Result<NormalWeight>) -> NormalWeight {
    r.expect("built-in weight")
}

fn m(r: Result<RadialMeasure>) -> RadialMeasure {
    r.expect("built-in measure")
}

pub fn catalog_builtin() -> Catalog {
    let mut weights: Vec<NormalWeight> = [0.5, 1.0, 2.0].iter().map(|&g| w(NormalWeight::power(g))).collect();
    weights.push(w(NormalWeight::power_log(1.0, 1.0)));
    weights.extend([-2.0, -1.0, 0.0, 1.0].iter().map(|&b| w(NormalWeight::log_power(b))));
    let mut measures = vec![RadialMeasure::lebesgue(), m(RadialMeasure::dirac(0.5)), m(RadialMeasure::dirac(0.0))];
    measures.extend([-0.5, 0.5, 1.0, 1.5, 2.0].iter().map(|&s| m(RadialMeasure::power_density(s))));
    measures.push(m(RadialMeasure::power_log_density(0.0, -1.0)));
    measures.push(m(RadialMeasure::power_log_density(-1.0, -2.0)));
    measures.push(m(RadialMeasure::atom_ladder(30, 0.25)));
    let bloch = WeightSpec::Power { gamma: 1.0, a: None, b: None };
    let series = vec![
        SeriesSpec::Constant { c: 1.0 },
        SeriesSpec::Monomial { k: 1 },
        SeriesSpec::Monomial { k: 2 },
        SeriesSpec::Monomial { k: 5 },
        SeriesSpec::InversePower { p: 2.0 },
        SeriesSpec::InversePower { p: 1.5 },
        SeriesSpec::InversePower { p: 1.0 },
        SeriesSpec::InversePower { p: 0.5 },
        SeriesSpec::Ones,
        SeriesSpec::Geometric { ratio: 0.5 },
        SeriesSpec::Geometric { ratio: 0.9 },
        SeriesSpec::Extremal { weight: bloch },
        SeriesSpec::Extremal { weight: WeightSpec::Power { gamma: 0.5, a: None, b: None } },
    ];
    let classic = OperatorConfig::new(0.0, RadialMeasure::lebesgue(), 1 << 12).expect("classic Hilbert config");
    Catalog {
        weights,
        measures,
        series,
        operators: vec![("classic_hilbert".into(), classic)],
    }
}

fn power(gamma: f64) -> WeightSpec {
    WeightSpec::Power { gamma, a: None, b: None }
}

fn log_power(beta: f64) -> WeightSpec {
    WeightSpec::LogPower { beta, a: None, b: None }
}

fn power_log(t: f64, delta: f64) -> WeightSpec {
    WeightSpec::PowerLog { t, delta, a: None, b: None }
}

fn spec(m: RadialMeasure) -> MeasureSpec {
    m.to_spec()
}

fn density(s: f64) -> MeasureSpec {
    spec(m(RadialMeasure::power_density(s)))
}

fn lebesgue() -> MeasureSpec {
    spec(RadialMeasure::lebesgue())
}

fn dirac(t: f64) -> MeasureSpec {
    spec(m(RadialMeasure::dirac(t)))
}

fn ladder() -> MeasureSpec {
    spec(m(RadialMeasure::atom_ladder(30, 0.25)))
}

fn case() -> CaseSpec {
    CaseSpec::default()
}

fn params(mu: MeasureSpec, alpha: f64, beta: Option<f64>, gamma: f64, expect: Verdict) -> CaseSpec {
    CaseSpec {
        measure: Some(mu),
        alpha: Some(alpha),
        beta,
        gamma: Some(gamma),
        expect: Some(expect),
        ..case()
    }
}

use Verdict::{Bounded as B, Unbounded as U};

fn norm_series() -> Vec<SeriesSpec> {
    let mut s = catalog_builtin().series;
    s.pop();
    s
}

fn norm_weights() -> Vec<WeightSpec> {
    vec![power(0.5), power(1.0), power(2.0), power_log(1.0, 1.0)]
}

/// Weights for the weight-inequality suites.
fn inequality_weights() -> Vec<WeightSpec> {
    vec![power(0.5), power(1.0), power_log(1.0, 1.0), power(2.0), log_power(1.0)]
}

/// The shipped configuration of `id`.
pub fn default_config(id: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(id);
    match id {
        "L2.1" | "T3.1" => {
            cfg.series = norm_series();
            cfg.weights = norm_weights();
        }
        "T3.3" => {
            cfg.series = vec![
                SeriesSpec::Constant { c: 1.0 },
                SeriesSpec::InversePower { p: 2.0 },
                SeriesSpec::InversePower { p: 1.5 },
                SeriesSpec::InversePower { p: 1.0 },
                SeriesSpec::InversePower { p: 0.5 },
                SeriesSpec::Ones,
                SeriesSpec::Geometric { ratio: 0.5 },
                SeriesSpec::Geometric { ratio: 0.9 },
            ];
            cfg.weights = norm_weights();
        }
        "L2.2" | "L2.3" | "L2.4" | "E3.1" => cfg.weights = inequality_weights(),
        "L2.5" => {
            let c = |mu: MeasureSpec, beta: f64, gamma: f64, expect: Verdict| CaseSpec {
                measure: Some(mu),
                beta: Some(beta),
                gamma: Some(gamma),
                expect: Some(expect),
                ..case()
            };
            cfg.cases = vec![
                c(density(2.0), 2.0, 1.0, B),
                c(density(0.5), 1.0, 1.0, U),
                c(dirac(0.0), 3.0, 2.0, B),
                c(lebesgue(), 0.5, 0.5, B),
                c(lebesgue(), 1.0, 0.5, U),
                c(dirac(0.5), 1.0, 1.0, B),
                c(density(1.5), 1.0, 1.5, B),
                c(ladder(), 1.0, 1.0, B),
            ];
        }
        "P4.1" => {
            cfg.measures = vec![
                lebesgue(),
                dirac(0.5),
                density(0.5),
                density(-0.5),
                spec(m(RadialMeasure::power_log_density(-1.0, -2.0))),
            ];
            let c = |omega: WeightSpec| CaseSpec {
                omega: Some(omega),
                ..case()
            };
            cfg.cases = vec![c(power(0.5)), c(power(1.0)), c(log_power(-2.0)), c(log_power(0.5))];
        }
        "T4.2" | "T4.3" => {
            cfg.measures = vec![dirac(0.5), lebesgue(), density(0.5), density(-0.5), density(1.5), ladder()];
            let c = |omega: WeightSpec, nu: WeightSpec, alpha: f64| CaseSpec {
                omega: Some(omega),
                nu: Some(nu),
                alpha: Some(alpha),
                ..case()
            };
            cfg.cases = if id == "T4.3" {
                vec![
                    c(power(0.5), power(1.0), 0.0),
                    c(power(0.5), power(0.5), 0.0),
                    c(log_power(-2.0), power(1.0), 1.0),
                ]
            } else {
                // ω = power(2) needs ∫dμ/(1-t) < ∞, so Lebesgue and (1-t)^-0.5 are left out
                let mut v = vec![c(power(1.0), power(1.0), 0.0), c(power(1.0), power(2.0), 0.0)];
                for mu in [dirac(0.5), density(0.5), density(1.5), ladder()] {
                    v.push(CaseSpec {
                        measure: Some(mu),
                        ..c(power(2.0), power(2.0), 0.5)
                    });
                }
                v
            };
        }
        "T5.1" => {
            cfg.cases = vec![
                params(lebesgue(), 0.0, None, 1.0, U),
                params(spec(m(RadialMeasure::power_log_density(0.5, -1.0))), 0.5, None, 1.0, B),
                params(dirac(0.5), 0.0, None, 1.0, B),
                params(lebesgue(), 0.0, None, 2.0, B),
                params(density(1.0), 0.0, None, 1.0, B),
                params(density(0.5), 0.0, None, 0.5, U),
            ];
        }
        "T5.3" => {
            cfg.cases = [0.5, 0.75, 1.0, 1.25, 1.5]
                .iter()
                .map(|&s| params(density(s), 0.0, Some(2.0), 1.0, if s >= 1.0 { B } else { U }))
                .collect();
            cfg.cases.push(params(lebesgue(), 0.0, Some(2.0), 1.0, U));
        }
        "T5.4" => {
            cfg.cases = [-0.5, -0.25, 0.0, 0.25, 0.5]
                .iter()
                .map(|&s| params(density(s), 0.0, Some(0.5), 1.0, if s >= 0.0 { B } else { U }))
                .collect();
        }
        "T5.6" => {
            cfg.cases = vec![
                params(lebesgue(), 0.0, Some(0.0), 1.0, B),
                params(lebesgue(), 0.0, Some(1.0), 2.0, B),
                params(lebesgue(), 0.0, Some(0.0), 0.0, U),
                params(lebesgue(), 0.0, Some(1.0), 1.0, U),
                params(density(0.5), 0.0, Some(0.0), 0.0, B),
            ];
        }
        "T5.7" => {
            cfg.cases = vec![
                params(lebesgue(), 0.0, Some(-1.0), 0.0, U),
                params(lebesgue(), 0.0, Some(-1.0), 1.0, B),
                params(density(0.5), 0.0, Some(-1.0), 0.0, B),
            ];
        }
        "T5.8" => {
            cfg.cases = vec![
                params(lebesgue(), 0.0, Some(-2.0), -1.0, U),
                params(lebesgue(), 0.0, Some(-2.0), 0.0, B),
                params(lebesgue(), 0.0, Some(-2.0), 1.0, B),
                params(density(-0.5), 0.0, Some(-2.0), 0.0, U),
            ];
        }
        "remark5" => {
            cfg.cases = [(0.0, 1.0), (1.0, 2.0), (-1.0, 0.0), (-2.0, -1.0), (0.5, 1.5), (-0.5, 0.5), (-3.0, -2.0)]
                .iter()
                .map(|&(b, g)| params(lebesgue(), 0.0, Some(b), g, if b > -1.0 { B } else { U }))
                .collect();
        }
        other => return Err(Error::Config(format!("unknown theorem id {other:?}"))),
    }
    Ok(cfg)
}

/// File name of the shipped config for `id`.
pub fn default_config_file(id: &str) -> String {
    format!("{id}.json")
}

pub fn all_default_configs() -> Vec<ExperimentConfig> {
    THEOREM_IDS
        .iter()
        .map(|id| default_config(id).expect("registered id"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contents() {
        let c = catalog_builtin();
        assert!(c.measures.iter().any(|m| m.label() == "lebesgue"));
        assert!(c.measures.iter().all(|m| m.mass().is_finite() && m.mass() > 0.0));
        let (_, classic) = &c.operators[0];
        assert_eq!(classic.alpha, 0.0);
        assert_eq!(classic.measure.label(), "lebesgue");
        assert_eq!(c.weights.len(), 8);
    }

    #[test]
    fn series_build() {
        let s = SeriesSpec::InversePower { p: 2.0 }.build(8, 0).unwrap();
        assert_eq!(s.coeffs()[0], 0.0);
        assert_eq!(s.coeffs()[2], 0.25);
        assert_eq!(s.truncation(), 8);
        let a = SeriesSpec::RandomSigned { degree: 10 }.build(0, 7).unwrap();
        let b = SeriesSpec::RandomSigned { degree: 10 }.build(0, 7).unwrap();
        assert_eq!(a, b);
        let e = SeriesSpec::Extremal { weight: power(1.0) }.build(1000, 0).unwrap();
        assert!(e.degree() <= 1000 && e.is_nonnegative());
    }

    #[test]
    fn every_id_has_a_default() {
        for cfg in all_default_configs() {
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(default_config("T9.9").is_err());
    }
}
