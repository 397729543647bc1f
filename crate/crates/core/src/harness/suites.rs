//! One checker per registered id. Each case reports both sides of the
//! equivalence it tests, the verdicts, and whether they agree.

use std::time::Instant;

use rayon::prelude::*;

use super::catalog::SeriesSpec;
use super::config::{CaseSpec, ExperimentConfig, ResolutionSpec, Thresholds};
use super::report::{CaseReport, VerificationReport};
use crate::bloch::{
    bloch_norm_direct, coeff_criterion_s, default_depth, dyadic_block_norm, monotone_criterion, NormEstimate,
    SIGNED_ANGLES,
};
use crate::error::{Error, Result};
use crate::hilbert_op::{
    criterion_beta_spaces, criterion_bloch_to_gamma, criterion_general, criterion_log_spaces, criterion_moment,
    probe_growth, well_defined_check, CriterionResult, GammaMode, OperatorConfig,
};
use crate::measures::{lemma25_equivalence_check, MeasureSpec, RadialMeasure};
use crate::trend::{BOUNDED_SLOPE, Verdict};
use crate::weights::{
    dyadic_grid, extremal_within_degree, eq31_ladder, eq31_sum_check, lemma23_ratio_check, lemma24_integral_check,
    normality_check_with_ceiling, NormalWeight, WeightSpec,
};

struct Ctx<'a> {
    res: &'a ResolutionSpec,
    th: &'a Thresholds,
    seed: u64,
}

fn need<T: Clone>(v: &Option<T>, what: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("case is missing `{what}`")))
}

fn measure(c: &CaseSpec) -> Result<RadialMeasure> {
    RadialMeasure::from_spec(&need(&c.measure, "measure")?)
}

fn weight(w: &Option<WeightSpec>, what: &str) -> Result<NormalWeight> {
    NormalWeight::from_spec(&need(w, what)?)
}

fn series(c: &CaseSpec, n: usize, seed: u64) -> Result<(String, crate::series::TaylorSeries)> {
    let s: SeriesSpec = need(&c.series, "series")?;
    Ok((s.label(), s.build(n, seed)?))
}

fn label(c: &CaseSpec, parts: &[String]) -> String {
    c.label.clone().unwrap_or_else(|| parts.join(" "))
}

fn measure_label(spec: &Option<MeasureSpec>) -> String {
    spec.as_ref()
        .and_then(|s| RadialMeasure::from_spec(s).ok())
        .map_or_else(|| "?".into(), |m| m.label().to_string())
}

fn verdict_of(e: &NormEstimate) -> Verdict {
    if e.divergent {
        Verdict::Unbounded
    } else {
        Verdict::Bounded
    }
}

fn fmt_params(c: &CaseSpec) -> String {
    let mut p = Vec::new();
    for (n, v) in [("α", c.alpha), ("β", c.beta), ("γ", c.gamma)] {
        if let Some(v) = v {
            p.push(format!("{n}={v}"));
        }
    }
    p.join(",")
}

fn check_expect(r: &mut CaseReport, c: &CaseSpec, got: Verdict) {
    if let Some(e) = c.expect {
        r.v("expected", e);
        if e != got {
            r.agree = false;
            r.notes.push(format!("expected {e}, got {got}"));
        }
    }
}

/// Ratio band and drift between `N` and `2N` for two norm estimators.
fn equivalence_case(
    c: &CaseSpec,
    ctx: &Ctx,
    other: &dyn Fn(&crate::series::TaylorSeries, &NormalWeight, usize) -> Result<NormEstimate>,
    other_name: &str,
) -> Result<CaseReport> {
    let nu = weight(&c.nu, "nu")?;
    let n = ctx.res.truncation;
    let mut ratios = Vec::new();
    let mut r = CaseReport::new("");
    let mut verdicts = Vec::new();
    let mut name = String::new();
    for (k, n) in [n, 2 * n].into_iter().enumerate() {
        let (lbl, f) = series(c, n, ctx.seed)?;
        name = lbl;
        let f = f.truncate(n);
        let direct = bloch_norm_direct(&f, &nu, default_depth(n), SIGNED_ANGLES);
        let o = other(&f, &nu, n)?;
        let tag = if k == 0 { "N" } else { "2N" };
        r.q(&format!("direct@{tag}"), direct.value).q(&format!("{other_name}@{tag}"), o.value);
        ratios.push(direct.value / o.value);
        verdicts.push((verdict_of(&direct), verdict_of(&o)));
    }
    r.label = label(c, &[name, nu.label()]);
    let drift = (ratios[1] / ratios[0] - 1.0).abs();
    r.q("ratio@N", ratios[0]).q("ratio@2N", ratios[1]).q("drift", drift);
    let (d, o) = verdicts[1];
    r.v("direct", d).v(other_name, o);
    let band = 1.0 / ctx.th.band..=ctx.th.band;
    r.agree = if d == Verdict::Bounded && o == Verdict::Bounded {
        ratios.iter().all(|x| band.contains(x)) && drift < ctx.th.drift
    } else {
        d == o
    };
    if d != Verdict::Bounded {
        r.notes.push("not in the space at this resolution; band not applied".into());
    }
    Ok(r)
}

fn suite_l21(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    equivalence_case(
        c,
        ctx,
        &|f, nu, n| {
            let depth = (usize::BITS - 1 - (n + 1).leading_zeros()).saturating_sub(1);
            dyadic_block_norm(f, nu, depth)
        },
        "block",
    )
}

fn suite_t31(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    equivalence_case(c, ctx, &|f, nu, n| coeff_criterion_s(f, nu, n), "S")
}

fn suite_t33(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let nu = weight(&c.nu, "nu")?;
    let n = ctx.res.truncation;
    let (name, f) = series(c, n, ctx.seed)?;
    let mono = monotone_criterion(&f, &nu, n)?;
    let s = coeff_criterion_s(&f, &nu, n)?;
    let mut r = CaseReport::new(label(c, &[name, nu.label()]));
    r.q("monotone", mono.value).q("S", s.value);
    r.v("monotone", verdict_of(&mono)).v("S", verdict_of(&s));
    r.agree = mono.divergent == s.divergent;
    Ok(r)
}

fn suite_l22(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let nu = weight(&c.nu, "nu")?;
    let e = extremal_within_degree(&nu, u64::MAX)?;
    let grid = e.evaluation_grid();
    let increasing = grid.windows(2).all(|p| e.g_at(p[1]) > e.g_at(p[0]));
    let mut r = CaseReport::new(label(c, &[nu.label()]));
    r.q("N1", e.n1).q("N2", e.n2).q("N2/N1", e.n2 / e.n1).q("levels", e.exponents.len() as f64);
    r.q("degree", e.degree() as f64);
    r.agree = e.n1 > 0.0 && e.n2 / e.n1 <= ctx.th.constant && increasing;
    if !increasing {
        r.notes.push("g is not increasing along the grid".into());
    }
    Ok(r)
}

fn suite_l23(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let nu = weight(&c.nu, "nu")?;
    let grid = dyadic_grid(ctx.res.depth);
    let sup = lemma23_ratio_check(&nu, &grid);
    let norm = normality_check_with_ceiling(&nu, &grid, ctx.th.constant)?;
    let mut r = CaseReport::new(label(c, &[nu.label()]));
    r.q("sup_ratio", sup).q("C_dec", norm.c_dec).q("C_inc", norm.c_inc);
    r.agree = sup.is_finite() && sup <= ctx.th.constant && norm.pass;
    Ok(r)
}

fn suite_l24(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let nu = weight(&c.nu, "nu")?;
    let rep = lemma24_integral_check(&nu, &ctx.res.deltas)?;
    let mut r = CaseReport::new(label(c, &[nu.label()]));
    r.q("max", rep.max).q("min", rep.min).q("max/min", rep.max / rep.min).q("slope", rep.trend.slope);
    r.agree = rep.max / rep.min < ctx.th.q_ratio && rep.trend.slope < BOUNDED_SLOPE;
    Ok(r)
}

fn suite_e31(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let nu = weight(&c.nu, "nu")?;
    let [a, b] = ctx.res.sum_depths;
    let lo = eq31_sum_check(&nu, &eq31_ladder(a))?;
    let hi = eq31_sum_check(&nu, &eq31_ladder(b))?;
    let mut r = CaseReport::new(label(c, &[nu.label()]));
    r.q(&format!("sup@{a}"), lo).q(&format!("sup@{b}"), hi).q("change", hi / lo);
    r.agree = hi.is_finite() && hi / lo < ctx.th.depth_change;
    Ok(r)
}

fn suite_l25(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let mu = measure(c)?;
    let (beta, gamma) = (need(&c.beta, "beta")?, need(&c.gamma, "gamma")?);
    let rep = lemma25_equivalence_check(&mu, beta, gamma, ctx.res.depth)?;
    let mut r = CaseReport::new(label(c, &[mu.label().to_string(), fmt_params(c)]));
    r.q("transformed_sup", rep.transformed.sup).q("original_sup", rep.original.sup);
    r.v("transformed", rep.transformed.verdict()).v("original", rep.original.verdict());
    r.agree = rep.agree;
    check_expect(&mut r, c, rep.original.verdict());
    Ok(r)
}

fn suite_p41(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let mu = measure(c)?;
    let omega = weight(&c.omega, "omega")?;
    let wd = well_defined_check(&mu, &omega, true)?;
    let fub = wd.fubini.unwrap_or(f64::NAN);
    let mut r = CaseReport::new(label(c, &[mu.label().to_string(), omega.label()]));
    r.q("integral", wd.integral).q("fubini", fub);
    let as_verdict = |finite: bool| if finite { Verdict::Bounded } else { Verdict::Unbounded };
    r.v("integral", as_verdict(wd.finite)).v("fubini", as_verdict(fub.is_finite()));
    r.agree = if wd.finite {
        fub.is_finite() && (wd.integral - fub).abs() <= ctx.th.relative * wd.integral.abs()
    } else {
        !fub.is_finite()
    };
    check_expect(&mut r, c, as_verdict(wd.finite));
    Ok(r)
}

fn criterion_case(c: &CaseSpec, res: &CriterionResult, r: &mut CaseReport) {
    r.q("sup", res.sup_value).q("attained_at", res.attained_at);
    if let Some(t) = res.trend {
        r.q("slope", t.slope).q("log_slope", t.log_slope);
    }
    r.v("verdict", res.verdict);
    for f in &res.forms {
        r.v(&f.name, f.verdict);
    }
    r.notes.extend(res.notes.iter().cloned());
    r.agree = res.verdict != Verdict::Inconclusive;
    check_expect(r, c, res.verdict);
}

fn probe_into(c: &CaseSpec, ctx: &Ctx, r: &mut CaseReport, alpha: f64, omega: &NormalWeight, nu: &NormalWeight) -> Result<Verdict> {
    let cfg = OperatorConfig::new(alpha, measure(c)?, ctx.res.probe_truncations[0])?;
    let g = probe_growth(&cfg, omega, nu, &ctx.res.probe_truncations)?;
    for (n, v) in &g.points {
        r.q(&format!("probe@{n}"), *v);
    }
    r.q("probe_slope", g.trend.slope);
    r.v("probe", g.class.verdict());
    Ok(g.class.verdict())
}

fn suite_t42(c: &CaseSpec, ctx: &Ctx, with_moment: bool) -> Result<CaseReport> {
    let mu = measure(c)?;
    let omega = weight(&c.omega, "omega")?;
    let nu = weight(&c.nu, "nu")?;
    let alpha = need(&c.alpha, "alpha")?;
    let lad = ctx.res.ladders();
    let general = criterion_general(&mu, &omega, &nu, alpha, &lad)?;
    let mut r = CaseReport::new(label(c, &[mu.label().to_string(), omega.label(), nu.label(), fmt_params(c)]));
    r.q("general_sup", general.sup_value).q("general_slope", general.trend.map_or(f64::NAN, |t| t.slope));
    r.v("general", general.verdict);
    let mut verdicts = vec![general.verdict];
    if with_moment {
        let m = criterion_moment(&mu, &omega, &nu, alpha, &lad)?;
        r.q("moment_sup", m.sup_value).q("moment_slope", m.trend.map_or(f64::NAN, |t| t.slope));
        r.v("moment", m.verdict);
        verdicts.push(m.verdict);
        if let Some(k) = m.compact {
            r.notes.push(format!("compact: {k}"));
        }
    }
    verdicts.push(probe_into(c, ctx, &mut r, alpha, &omega, &nu)?);
    r.agree = verdicts.iter().all(|&v| v == verdicts[0] && v != Verdict::Inconclusive);
    check_expect(&mut r, c, general.verdict);
    Ok(r)
}

fn suite_t51(c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    let mu = measure(c)?;
    let (alpha, gamma) = (need(&c.alpha, "alpha")?, need(&c.gamma, "gamma")?);
    let res = criterion_bloch_to_gamma(&mu, alpha, gamma, GammaMode::Both, &ctx.res.ladders())?;
    let mut r = CaseReport::new(label(c, &[mu.label().to_string(), fmt_params(c)]));
    criterion_case(c, &res, &mut r);
    Ok(r)
}

fn suite_beta(c: &CaseSpec, ctx: &Ctx, above_one: bool) -> Result<CaseReport> {
    let mu = measure(c)?;
    let (alpha, beta, gamma) = (need(&c.alpha, "alpha")?, need(&c.beta, "beta")?, need(&c.gamma, "gamma")?);
    if above_one != (beta > 1.0) {
        return Err(Error::Config(format!("β = {beta} is outside this suite's range")));
    }
    let res = criterion_beta_spaces(&mu, alpha, beta, gamma, &ctx.res.ladders())?;
    let mut r = CaseReport::new(label(c, &[mu.label().to_string(), fmt_params(c)]));
    criterion_case(c, &res, &mut r);
    Ok(r)
}

#[derive(Clone, Copy)]
enum LogRange {
    Above,
    At,
    Below,
    Any,
}

fn suite_log(c: &CaseSpec, ctx: &Ctx, range: LogRange, closing_remark: bool) -> Result<CaseReport> {
    let mu = measure(c)?;
    let (alpha, beta, gamma) = (need(&c.alpha, "alpha")?, need(&c.beta, "beta")?, need(&c.gamma, "gamma")?);
    let ok = match range {
        LogRange::Above => beta > -1.0,
        LogRange::At => beta == -1.0,
        LogRange::Below => beta < -1.0,
        LogRange::Any => true,
    };
    if !ok {
        return Err(Error::Config(format!("β = {beta} is outside this suite's range")));
    }
    let res = criterion_log_spaces(&mu, alpha, beta, gamma, &ctx.res.ladders())?;
    let mut r = CaseReport::new(label(c, &[mu.label().to_string(), fmt_params(c)]));
    criterion_case(c, &res, &mut r);
    if closing_remark {
        let predicted = if beta > -1.0 { Verdict::Bounded } else { Verdict::Unbounded };
        r.v("predicted", predicted);
        if res.verdict != predicted {
            r.agree = false;
        }
    }
    Ok(r)
}

fn run_case(id: &str, c: &CaseSpec, ctx: &Ctx) -> Result<CaseReport> {
    match id {
        "L2.1" => suite_l21(c, ctx),
        "L2.2" => suite_l22(c, ctx),
        "L2.3" => suite_l23(c, ctx),
        "L2.4" => suite_l24(c, ctx),
        "L2.5" => suite_l25(c, ctx),
        "T3.1" => suite_t31(c, ctx),
        "E3.1" => suite_e31(c, ctx),
        "T3.3" => suite_t33(c, ctx),
        "P4.1" => suite_p41(c, ctx),
        "T4.2" => suite_t42(c, ctx, false),
        "T4.3" => suite_t42(c, ctx, true),
        "T5.1" => suite_t51(c, ctx),
        "T5.3" => suite_beta(c, ctx, true),
        "T5.4" => suite_beta(c, ctx, false),
        "T5.6" => suite_log(c, ctx, LogRange::Above, false),
        "T5.7" => suite_log(c, ctx, LogRange::At, false),
        "T5.8" => suite_log(c, ctx, LogRange::Below, false),
        "remark5" => suite_log(c, ctx, LogRange::Any, true),
        other => Err(Error::Config(format!("unknown theorem id {other:?}"))),
    }
}

fn fallback_label(c: &CaseSpec) -> String {
    if let Some(l) = &c.label {
        return l.clone();
    }
    let mut parts = Vec::new();
    if c.measure.is_some() {
        parts.push(measure_label(&c.measure));
    }
    if let Some(s) = &c.series {
        parts.push(s.label());
    }
    for w in [&c.omega, &c.nu].into_iter().flatten() {
        parts.push(NormalWeight::from_spec(w).map_or_else(|_| "?".into(), |w| w.label()));
    }
    let p = fmt_params(c);
    if !p.is_empty() {
        parts.push(p);
    }
    parts.join(" ")
}

/// Runs the suite registered for `cfg.theorem`. Numeric failures are
/// recorded per case; only configuration errors abort.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let ctx = Ctx {
        res: &cfg.resolution,
        th: &cfg.thresholds,
        seed: cfg.seed,
    };
    let cases = cfg.expanded_cases();
    let reports: Vec<CaseReport> = cases
        .par_iter()
        .map(|c| match run_case(&cfg.theorem, c, &ctx) {
            Ok(r) => r,
            Err(e) => CaseReport::failed(fallback_label(c), e.to_string()),
        })
        .collect();
    let agreement = reports.iter().all(|r| r.agree);
    Ok(VerificationReport {
        theorem: cfg.theorem.clone(),
        version: cfg.version,
        seed: cfg.seed,
        resolution: cfg.resolution.clone(),
        thresholds: cfg.thresholds.clone(),
        cases: reports,
        agreement,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
