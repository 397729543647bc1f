use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use hilbloch::bloch::{bloch_norm_direct, coeff_criterion_s, dyadic_block_norm, monotone_criterion, SIGNED_ANGLES};
use hilbloch::harness::{
    all_default_configs, default_config_file, emit_report, run_suite, ExperimentConfig, ReportFormat,
};
use hilbloch::hilbert_op::{
    apply_coefficient, apply_sublinear, criterion_beta_spaces, criterion_bloch_to_gamma, criterion_general,
    criterion_log_spaces, criterion_moment, probe_growth, GammaMode, OperatorConfig, OperatorConfigSpec, Resolution,
    N_MAX, PROBE_TRUNCATIONS,
};
use hilbloch::measures::{MeasureSpec, RadialMeasure};
use hilbloch::series::{TaylorSeries, VnPolynomial};
use hilbloch::weights::{NormalWeight, WeightSpec};

#[derive(Parser)]
#[command(name = "hilbloch", version, about = "Integral-type Hilbert operators on normal-weight Bloch spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run verification suites; exits nonzero unless every case agrees.
    Verify {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, value_enum, num_args = 1.., default_values_t = [ReportFormat::Json])]
        format: Vec<ReportFormat>,
        /// Multiplies every ladder depth.
        #[arg(long, default_value_t = 1.0)]
        resolution_scale: f64,
    },
    /// Write the default config of every suite id into a directory.
    InitConfigs {
        #[arg(long, default_value = "configs")]
        out: PathBuf,
    },
    /// Moment table `n,moment` of a measure.
    Moments {
        /// Measure JSON (inline or a file path).
        #[arg(long)]
        measure: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 4, 8, 16, 64, 256, 1024])]
        n: Vec<u64>,
    },
    /// Bloch norm estimate of a series.
    BlochNorm {
        /// Coefficient array JSON (inline or a file path).
        #[arg(long)]
        series: String,
        /// Weight JSON (inline or a file path).
        #[arg(long)]
        weight: String,
        #[arg(long, value_enum, default_value_t = NormMethod::Direct)]
        method: NormMethod,
        /// Radial ladder depth (direct) or block depth (dyadic-block).
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Apply the operator to a series; prints the output coefficients.
    Apply {
        #[arg(long)]
        series: String,
        /// Operator config JSON: alpha, measure, truncation.
        #[arg(long)]
        config: String,
        #[arg(long)]
        sublinear: bool,
    },
    /// Evaluate a boundedness criterion.
    Criterion {
        #[arg(long, value_enum)]
        kind: CriterionKind,
        #[arg(long)]
        measure: String,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        nu: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = N_MAX)]
        n_max: u64,
        #[arg(long, default_value_t = 24)]
        depth: u32,
    },
    /// Operator norm probes over growing truncations.
    Probe {
        #[arg(long)]
        config: String,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        nu: String,
        #[arg(long, value_delimiter = ',')]
        truncations: Option<Vec<usize>>,
    },
    /// Dump the coefficients of `V_0 … V_n` as CSV `n,k,coefficient`.
    Vn {
        #[arg(long, default_value_t = 6)]
        n: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormMethod {
    Direct,
    CoeffS,
    Monotone,
    DyadicBlock,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionKind {
    General,
    Moment,
    BlochToGamma,
    BetaSpaces,
    LogSpaces,
}

/// Inline JSON if it looks like JSON, else a path to a JSON file.
fn json_arg<T: DeserializeOwned>(s: &str, what: &str) -> Result<T> {
    let t = s.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        s.to_string()
    } else {
        fs::read_to_string(s).with_context(|| format!("reading {what} from {s}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {what}"))
}

fn series_arg(s: &str) -> Result<TaylorSeries> {
    Ok(TaylorSeries::try_from_coefficients(json_arg(s, "series")?)?)
}

fn weight_arg(s: &str) -> Result<NormalWeight> {
    Ok(NormalWeight::from_spec(&json_arg::<WeightSpec>(s, "weight")?)?)
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn verify(configs: &[PathBuf], out: &Path, formats: &[ReportFormat], scale: f64) -> Result<bool> {
    if !(scale > 0.0) {
        bail!("--resolution-scale must be positive");
    }
    fs::create_dir_all(out)?;
    let mut all = true;
    for path in configs {
        let mut cfg = ExperimentConfig::load(path)?;
        cfg.resolution = cfg.resolution.scaled(scale);
        let report = run_suite(&cfg)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(&cfg.theorem).to_string();
        for f in formats {
            write_file(&out.join(format!("{stem}.{}", f.extension())), &emit_report(&report, *f)?)?;
        }
        let bad = report.cases.iter().filter(|c| !c.agree).count();
        println!(
            "{:<8} {} ({} cases, {} disagree, {:.1}s)",
            report.theorem,
            if report.agreement { "agree" } else { "DISAGREE" },
            report.cases.len(),
            bad,
            report.wall_time_s
        );
        all &= report.agreement;
    }
    Ok(all)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Verify {
            config,
            out,
            format,
            resolution_scale,
        } => return verify(&config, &out, &format, resolution_scale),
        Cmd::InitConfigs { out } => {
            fs::create_dir_all(&out)?;
            for cfg in all_default_configs() {
                write_file(&out.join(default_config_file(&cfg.theorem)), &(cfg.to_json() + "\n"))?;
            }
        }
        Cmd::Moments { measure, n } => {
            let mu = RadialMeasure::from_spec(&json_arg::<MeasureSpec>(&measure, "measure")?)?;
            mu.write_moment_table(&n, std::io::stdout())?;
        }
        Cmd::BlochNorm {
            series,
            weight,
            method,
            depth,
        } => {
            let f = series_arg(&series)?;
            let nu = weight_arg(&weight)?;
            let n = f.truncation();
            let est = match method {
                NormMethod::Direct => {
                    let angles = if f.is_nonnegative() { 1 } else { SIGNED_ANGLES };
                    bloch_norm_direct(&f, &nu, depth.unwrap_or_else(|| hilbloch::bloch::default_depth(n)), angles)
                }
                NormMethod::CoeffS => coeff_criterion_s(&f, &nu, n)?,
                NormMethod::Monotone => monotone_criterion(&f, &nu, n)?,
                NormMethod::DyadicBlock => {
                    let d = depth.unwrap_or_else(|| ((n + 1).ilog2()).saturating_sub(1).max(1));
                    dyadic_block_norm(&f, &nu, d)?
                }
            };
            print_json(&est)?;
        }
        Cmd::Apply {
            series,
            config,
            sublinear,
        } => {
            let f = series_arg(&series)?;
            let cfg = OperatorConfig::from_spec(&json_arg::<OperatorConfigSpec>(&config, "operator config")?)?;
            let g = if sublinear {
                apply_sublinear(&f, &cfg)?
            } else {
                apply_coefficient(&f, &cfg)?
            };
            println!("{}", g.to_json());
        }
        Cmd::Criterion {
            kind,
            measure,
            alpha,
            omega,
            nu,
            beta,
            gamma,
            n_max,
            depth,
        } => {
            let mu = RadialMeasure::from_spec(&json_arg::<MeasureSpec>(&measure, "measure")?)?;
            let res = Resolution { n_max, depth };
            let need = |o: Option<f64>, name: &str| o.with_context(|| format!("--{name} is required for this criterion"));
            let weight = |o: &Option<String>, name: &str| -> Result<NormalWeight> {
                weight_arg(o.as_deref().with_context(|| format!("--{name} is required for this criterion"))?)
            };
            let r = match kind {
                CriterionKind::General => criterion_general(&mu, &weight(&omega, "omega")?, &weight(&nu, "nu")?, alpha, &res)?,
                CriterionKind::Moment => criterion_moment(&mu, &weight(&omega, "omega")?, &weight(&nu, "nu")?, alpha, &res)?,
                CriterionKind::BlochToGamma => {
                    criterion_bloch_to_gamma(&mu, alpha, need(gamma, "gamma")?, GammaMode::Both, &res)?
                }
                CriterionKind::BetaSpaces => {
                    criterion_beta_spaces(&mu, alpha, need(beta, "beta")?, need(gamma, "gamma")?, &res)?
                }
                CriterionKind::LogSpaces => {
                    criterion_log_spaces(&mu, alpha, need(beta, "beta")?, need(gamma, "gamma")?, &res)?
                }
            };
            print_json(&serde_json::json!({ "resolution": res, "result": r }))?;
        }
        Cmd::Probe {
            config,
            omega,
            nu,
            truncations,
        } => {
            let cfg = OperatorConfig::from_spec(&json_arg::<OperatorConfigSpec>(&config, "operator config")?)?;
            let ns = truncations.unwrap_or_else(|| PROBE_TRUNCATIONS.to_vec());
            print_json(&probe_growth(&cfg, &weight_arg(&omega)?, &weight_arg(&nu)?, &ns)?)?;
        }
        Cmd::Vn { n } => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["n", "k", "coefficient"])?;
            for m in 0..=n {
                let v = VnPolynomial::new(m);
                for (j, c) in v.coeffs.iter().enumerate() {
                    w.write_record([m.to_string(), (v.offset + j).to_string(), format!("{c:e}")])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
