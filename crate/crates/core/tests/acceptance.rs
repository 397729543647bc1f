//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;

use hilbloch::harness::{default_config, run_suite, VerificationReport};
use hilbloch::hilbert_op::{
    apply_coefficient, apply_quadrature, criterion_beta_spaces, hankel_apply, OperatorConfig, Resolution,
};
use hilbloch::measures::RadialMeasure;
use hilbloch::series::{hardy_norm, min_samples, partition_check, sup_norm, TaylorSeries, VnPolynomial};
use hilbloch::trend::Verdict;

const CLASSIC_COEFF_TOL: f64 = 1e-10;
const CLASSIC_EVAL_TOL: f64 = 1e-9;
const MODE_TOL: f64 = 1e-8;
const MIN_MODE_CASES: usize = 30;
const MAX_Z: f64 = 0.9;
const BAND: f64 = 50.0;
const DRIFT: f64 = 0.2;
const Q_RATIO: f64 = 100.0;
const DEPTH_CHANGE: f64 = 2.0;
const HANKEL_TOL: f64 = 1e-10;
const PARTITION_TOL: f64 = 1e-12;
const VN_BAND: f64 = 4.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Result<Outcome, String>;

fn measures() -> Vec<RadialMeasure> {
    vec![
        RadialMeasure::lebesgue(),
        RadialMeasure::dirac(0.5).unwrap(),
        RadialMeasure::power_density(0.5).unwrap(),
        RadialMeasure::power_density(2.0).unwrap(),
        RadialMeasure::power_log_density(1.0, 1.0).unwrap(),
        RadialMeasure::atoms(&[(0.25, 0.5), (0.75, 0.25), (0.9, 0.125)]).unwrap(),
    ]
}

fn polynomials() -> Vec<TaylorSeries> {
    vec![
        TaylorSeries::constant(1.0),
        TaylorSeries::monomial(3, 1.0),
        TaylorSeries::from_fn(20, |k| 1.0 / ((k + 1) * (k + 1)) as f64),
        TaylorSeries::from_coefficients(vec![0.5, -1.0, 0.25, 0.0, -0.75, 0.3]),
        hilbloch::harness::catalog::random_signed(12, 7),
    ]
}

fn suite(id: &str) -> Result<VerificationReport, String> {
    let cfg = default_config(id).map_err(|e| e.to_string())?;
    run_suite(&cfg).map_err(|e| e.to_string())
}

fn failures(r: &VerificationReport) -> String {
    let bad: Vec<String> = r
        .cases
        .iter()
        .filter(|c| !c.agree)
        .map(|c| match &c.error {
            Some(e) => format!("{} ({e})", c.label),
            None => c.label.clone(),
        })
        .collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(", "))
    }
}

fn max_q(r: &VerificationReport, name: &str) -> f64 {
    r.cases.iter().filter_map(|c| c.quantity(name)).filter(|v| v.is_finite()).fold(0.0, f64::max)
}

fn test_points() -> Vec<Complex64> {
    let mut z = Vec::new();
    for &r in &[0.0, 0.3, 0.6, MAX_Z] {
        for k in 0..6 {
            z.push(Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 3.0 + 0.1));
        }
    }
    z
}

fn classic_hilbert() -> Result<Outcome, String> {
    let n = 1usize << 12;
    let cfg = OperatorConfig::new(0.0, RadialMeasure::lebesgue(), n).map_err(|e| e.to_string())?;
    let b = apply_coefficient(&TaylorSeries::constant(1.0), &cfg).map_err(|e| e.to_string())?;
    let coeff_err = (0..=n).map(|k| (b.coeffs()[k] - 1.0 / (k + 1) as f64).abs()).fold(0.0, f64::max);
    let mut eval_err: f64 = 0.0;
    for z in test_points() {
        let exact = if z.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            -(Complex64::new(1.0, 0.0) - z).ln() / z
        };
        eval_err = eval_err.max((b.evaluate(z) - exact).norm());
    }
    Ok(outcome(
        coeff_err < CLASSIC_COEFF_TOL && eval_err < CLASSIC_EVAL_TOL,
        format!("max |b_n - 1/(n+1)| = {coeff_err:.2e}, max eval error = {eval_err:.2e}"),
    ))
}

fn mode_agreement() -> Result<Outcome, String> {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.5, 1.0] {
        for mu in measures() {
            let cfg = OperatorConfig::new(alpha, mu, 1024).map_err(|e| e.to_string())?;
            for f in polynomials() {
                let g = apply_coefficient(&f, &cfg).map_err(|e| e.to_string())?;
                for z in test_points() {
                    let q = apply_quadrature(&f, &cfg, z).map_err(|e| e.to_string())?;
                    let tol = MODE_TOL * (1.0 - z.norm()).powf(-(alpha + 1.0));
                    worst = worst.max((g.evaluate(z) - q).norm() / tol);
                }
                cases += 1;
            }
        }
    }
    Ok(outcome(
        cases >= MIN_MODE_CASES && worst < 1.0,
        format!("{cases} (f, μ, α) cases, worst error / tolerance = {worst:.2e}"),
    ))
}

fn equivalence(id: &str) -> Result<Outcome, String> {
    let r = suite(id)?;
    let cfg = default_config(id).map_err(|e| e.to_string())?;
    let functions: std::collections::BTreeSet<String> =
        cfg.expanded_cases().iter().filter_map(|c| c.series.as_ref().map(|s| s.label())).collect();
    let weights: std::collections::BTreeSet<String> =
        cfg.expanded_cases().iter().filter_map(|c| c.nu.as_ref().map(|w| format!("{w:?}"))).collect();
    let ratio = |c: &hilbloch::harness::CaseReport| c.quantity("ratio@N").filter(|v| v.is_finite() && *v > 0.0);
    let hi = r.cases.iter().filter_map(ratio).fold(0.0, f64::max);
    let lo = r.cases.iter().filter_map(ratio).fold(f64::INFINITY, f64::min);
    let drift = max_q(&r, "drift");
    Ok(outcome(
        r.agreement && functions.len() >= 10 && weights.len() >= 4,
        format!(
            "{} cases ({} functions x {} weights), ratios in [{lo:.3}, {hi:.3}] (band C = {BAND}), max drift {:.1}% (< {:.0}%){}",
            r.cases.len(),
            functions.len(),
            weights.len(),
            100.0 * drift,
            100.0 * DRIFT,
            failures(&r)
        ),
    ))
}

fn all_agree(id: &str, summary: impl Fn(&VerificationReport) -> String) -> Result<Outcome, String> {
    let r = suite(id)?;
    let ok = r.agreement && !r.cases.is_empty();
    let agreed = r.cases.iter().filter(|c| c.agree).count();
    Ok(outcome(
        ok,
        format!("{agreed}/{} cases agree; {}{}", r.cases.len(), summary(&r), failures(&r)),
    ))
}

fn t31() -> Result<Outcome, String> {
    equivalence("T3.1")
}

fn l21() -> Result<Outcome, String> {
    equivalence("L2.1")
}

fn t33() -> Result<Outcome, String> {
    all_agree("T3.3", |_| "monotone vs S divergence flags".into())
}

fn l24() -> Result<Outcome, String> {
    all_agree("L2.4", |r| format!("max Q max/min = {:.2} (< {Q_RATIO})", max_q(r, "max/min")))
}

fn e31() -> Result<Outcome, String> {
    all_agree("E3.1", |r| format!("max change 16 -> 20 = {:.3} (< {DEPTH_CHANGE})", max_q(r, "change")))
}

fn l25() -> Result<Outcome, String> {
    let r = suite("L2.5")?;
    let bounded = r.cases.iter().filter(|c| c.verdict("original") == Some(Verdict::Bounded)).count();
    let agreed = r.cases.iter().filter(|c| c.agree).count();
    Ok(outcome(
        r.cases.len() == 8 && agreed == 8 && bounded > 0 && bounded < 8,
        format!("{agreed}/{} agree, {bounded} bounded{}", r.cases.len(), failures(&r)),
    ))
}

fn t43() -> Result<Outcome, String> {
    let r = suite("T4.3")?;
    let cfg = default_config("T4.3").map_err(|e| e.to_string())?;
    let measures: std::collections::BTreeSet<String> =
        cfg.expanded_cases().iter().filter_map(|c| c.measure.as_ref().map(|m| format!("{m:?}"))).collect();
    let agreed = r.cases.iter().filter(|c| c.agree).count();
    Ok(outcome(
        r.agreement && measures.len() >= 6,
        format!(
            "{agreed}/{} cases: moment = general = probe over {} measures{}",
            r.cases.len(),
            measures.len(),
            failures(&r)
        ),
    ))
}

fn remark5() -> Result<Outcome, String> {
    let r = suite("remark5")?;
    let need = [(0.0, 1.0, Verdict::Bounded), (1.0, 2.0, Verdict::Bounded), (-1.0, 0.0, Verdict::Unbounded), (-2.0, -1.0, Verdict::Unbounded)];
    let mut found = 0;
    for (b, g, v) in need {
        let tag = format!("β={b},γ={g}");
        if r.cases.iter().any(|c| c.label.contains(&tag) && c.verdict("verdict") == Some(v)) {
            found += 1;
        }
    }
    let agreed = r.cases.iter().filter(|c| c.agree).count();
    Ok(outcome(
        r.agreement && found == need.len(),
        format!(
            "{found}/{} required (β, γ) verdicts, {agreed}/{} cases match bounded iff β > -1{}",
            need.len(),
            r.cases.len(),
            failures(&r)
        ),
    ))
}

fn sigma_flip() -> Result<Outcome, String> {
    let res = Resolution::default();
    let alpha = 0.0;
    let mut lines = Vec::new();
    let mut ok = true;
    // (β, γ, threshold)
    for (beta, gamma, thr) in [(2.0, 1.0, alpha + 2.0 - 1.0), (0.5, 1.0, alpha + 1.0 - 1.0)] {
        let mut row = Vec::new();
        for d in [-0.5, -0.25, 0.25, 0.5] {
            let sigma: f64 = thr + d;
            let mu = RadialMeasure::power_density(sigma).map_err(|e| e.to_string())?;
            let v = criterion_beta_spaces(&mu, alpha, beta, gamma, &res).map_err(|e| e.to_string())?.verdict;
            let want = if d > 0.0 { Verdict::Bounded } else { Verdict::Unbounded };
            ok &= v == want;
            row.push(format!("σ={sigma}:{v}"));
        }
        lines.push(format!("β={beta} threshold {thr} [{}]", row.join(" ")));
    }
    Ok(outcome(ok, lines.join("; ")))
}

fn vn_properties() -> Result<Outcome, String> {
    let f = hilbloch::harness::catalog::random_signed(1000, 3);
    let defect = partition_check(&f, 10).map_err(|e| e.to_string())?;
    let (mut sup, mut h2, mut h1) = (Vec::new(), Vec::new(), Vec::new());
    for n in 1..=10u32 {
        let p = VnPolynomial::new(n).to_series();
        let m = min_samples(p.degree());
        sup.push(sup_norm(&p, m).map_err(|e| e.to_string())?.value / 2f64.powi(n as i32));
        h2.push(hardy_norm(&p, 2).map_err(|e| e.to_string())?.value / 2f64.powf(n as f64 / 2.0));
        h1.push(hardy_norm(&p, 1).map_err(|e| e.to_string())?.value);
    }
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let (a, b, c) = (spread(&sup), spread(&h2), spread(&h1));
    Ok(outcome(
        defect < PARTITION_TOL && a < VN_BAND && b < VN_BAND && c < VN_BAND,
        format!("defect {defect:.1e}; spreads sup {a:.3}, H2 {b:.3}, H1 {c:.3} (< {VN_BAND})"),
    ))
}

fn hankel() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for alpha in [0.0, 0.5, 1.0] {
        for mu in measures() {
            let cfg = OperatorConfig::new(alpha, mu, 256).map_err(|e| e.to_string())?;
            for f in polynomials() {
                let b = apply_coefficient(&f, &cfg).map_err(|e| e.to_string())?;
                let h = hankel_apply(f.coeffs(), &cfg.measure, alpha, 256).map_err(|e| e.to_string())?;
                for (x, y) in b.coeffs().iter().zip(&h) {
                    worst = worst.max((x - y).abs() / x.abs().max(1.0));
                }
                cases += 1;
            }
        }
    }
    Ok(outcome(
        worst < HANKEL_TOL,
        format!("{cases} polynomial cases, max deviation {worst:.2e}"),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 13] = [
        ("classic Hilbert closed form", classic_hilbert),
        ("coefficient vs quadrature mode agreement", mode_agreement),
        ("T3.1 direct norm vs a0 + S(f)", t31),
        ("L2.1 direct norm vs dyadic blocks", l21),
        ("T3.3 monotone vs S verdicts", t33),
        ("L2.4 Q(δ) bounded", l24),
        ("E3.1 lacunary sum stable in depth", e31),
        ("L2.5 Carleson transform agreement", l25),
        ("T4.3 moment / general / probe coherence", t43),
        ("remark5 log-space boundedness iff β > -1", remark5),
        ("T5.3/T5.4 σ threshold flip", sigma_flip),
        ("V_n partition and norm bands", vn_properties),
        ("Hankel identity", hankel),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t0 = Instant::now();
        let Outcome { pass, detail } = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("{}/{} criteria pass", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
