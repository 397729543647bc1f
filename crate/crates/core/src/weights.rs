//! Normal weights, the growth gauge `ω̃`, the lacunary extremal function and
//! numeric checkers for the standard weight inequalities.
//!
//! Weights are evaluated in log space through [`Gap`], so they stay usable
//! at radii where `1 - r` is far below `f64::EPSILON`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_gap_tail, Gap, QuadOptions, LINEAR_SPAN, MAX_GAP};
use crate::series::TaylorSeries;
use crate::trend::Trend;

/// JSON descriptor of a weight, e.g. `{"kind":"power","gamma":1.0,"a":1.0,"b":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Power {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    PowerLog {
        t: f64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    LogPower {
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    Table {
        samples: Vec<[f64; 2]>,
        a: f64,
        b: f64,
    },
}

/// Sampled weight, linear between samples and extended past the last
/// sample by `ν(r_last)·((1-r²)/(1-r_last²))^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    radii: Vec<f64>,
    values: Vec<f64>,
    last_ln_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `(1-r²)^γ`
    Power { gamma: f64 },
    /// `(1-r²)^t log^δ(e/(1-r²))`
    PowerLog { t: f64, delta: f64 },
    /// `(1-r²) log^{-β}(e/(1-r²))`
    LogPower { beta: f64 },
    Table(Arc<WeightTable>),
}

/// A normal weight with its declared normality exponents `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalWeight {
    kind: WeightKind,
    a: f64,
    b: f64,
}

fn check_exponents(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b >= a && b.is_finite()) {
        return Err(Error::Construction(format!(
            "normality exponents must satisfy 0 < a <= b < inf, got a={a}, b={b}"
        )));
    }
    Ok(())
}

impl NormalWeight {
    pub fn power(gamma: f64) -> Result<Self> {
        Self::power_with(gamma, gamma, gamma)
    }

    pub fn power_with(gamma: f64, a: f64, b: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Construction(format!("power weight needs gamma > 0, got {gamma}")));
        }
        check_exponents(a, b)?;
        Ok(NormalWeight {
            kind: WeightKind::Power { gamma },
            a,
            b,
        })
    }

    /// `(1-r²)^t log^δ(e/(1-r²))` with default exponents `a = t/2`, `b = t + 1/2`.
    pub fn power_log(t: f64, delta: f64) -> Result<Self> {
        Self::power_log_with(t, delta, 0.5 * t, t + 0.5)
    }

    pub fn power_log_with(t: f64, delta: f64, a: f64, b: f64) -> Result<Self> {
        if !(t > 0.0) || !delta.is_finite() {
            return Err(Error::Construction(format!("power_log weight needs t > 0, got t={t}, delta={delta}")));
        }
        check_exponents(a, b)?;
        Ok(NormalWeight {
            kind: WeightKind::PowerLog { t, delta },
            a,
            b,
        })
    }

    /// Logarithmic Bloch weight; defaults `a = 1/2`, `b = 3/2`.
    pub fn log_power(beta: f64) -> Result<Self> {
        Self::log_power_with(beta, 0.5, 1.5)
    }

    pub fn log_power_with(beta: f64, a: f64, b: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Construction("log_power weight needs a finite beta".into()));
        }
        check_exponents(a, b)?;
        Ok(NormalWeight {
            kind: WeightKind::LogPower { beta },
            a,
            b,
        })
    }

    /// Table weight; samples must start at `r = 0`, be strictly increasing in
    /// `r < 1` and positive. Values are rescaled so that `ν(0) = 1`.
    pub fn table(samples: &[[f64; 2]], a: f64, b: f64) -> Result<Self> {
        check_exponents(a, b)?;
        if samples.len() < 2 {
            return Err(Error::Construction("table weight needs at least two samples".into()));
        }
        if samples[0][0] != 0.0 {
            return Err(Error::Construction("table weight must start at r = 0".into()));
        }
        for w in samples.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return Err(Error::Construction("table radii must be strictly increasing".into()));
            }
        }
        if samples.iter().any(|s| !(s[1] > 0.0) || !s[1].is_finite() || !(s[0] < 1.0)) {
            return Err(Error::Construction("table values must be positive and radii below 1".into()));
        }
        let scale = samples[0][1];
        let radii: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        let values: Vec<f64> = samples.iter().map(|s| s[1] / scale).collect();
        let r_last = *radii.last().unwrap();
        let last_ln_scale = Gap::from_t(r_last).ln_one_minus_t_sq();
        Ok(NormalWeight {
            kind: WeightKind::Table(Arc::new(WeightTable {
                radii,
                values,
                last_ln_scale,
            })),
            a,
            b,
        })
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::Power { gamma, a, b } => Self::power_with(*gamma, a.unwrap_or(*gamma), b.unwrap_or(*gamma)),
            WeightSpec::PowerLog { t, delta, a, b } => {
                Self::power_log_with(*t, *delta, a.unwrap_or(0.5 * t), b.unwrap_or(t + 0.5))
            }
            WeightSpec::LogPower { beta, a, b } => Self::log_power_with(*beta, a.unwrap_or(0.5), b.unwrap_or(1.5)),
            WeightSpec::Table { samples, a, b } => Self::table(samples, *a, *b),
        }
    }

    pub fn to_spec(&self) -> WeightSpec {
        match &self.kind {
            WeightKind::Power { gamma } => WeightSpec::Power {
                gamma: *gamma,
                a: Some(self.a),
                b: Some(self.b),
            },
            WeightKind::PowerLog { t, delta } => WeightSpec::PowerLog {
                t: *t,
                delta: *delta,
                a: Some(self.a),
                b: Some(self.b),
            },
            WeightKind::LogPower { beta } => WeightSpec::LogPower {
                beta: *beta,
                a: Some(self.a),
                b: Some(self.b),
            },
            WeightKind::Table(tab) => WeightSpec::Table {
                samples: tab.radii.iter().zip(&tab.values).map(|(&r, &v)| [r, v]).collect(),
                a: self.a,
                b: self.b,
            },
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn label(&self) -> String {
        match &self.kind {
            WeightKind::Power { gamma } => format!("power({gamma})"),
            WeightKind::PowerLog { t, delta } => format!("power_log({t},{delta})"),
            WeightKind::LogPower { beta } => format!("log_power({beta})"),
            WeightKind::Table(tab) => format!("table({} samples)", tab.radii.len()),
        }
    }

    /// `ln ν(r)` at the radius described by `gap`.
    pub fn ln_eval(&self, gap: Gap) -> f64 {
        let ln_scale = gap.ln_one_minus_t_sq();
        let ln_log = || (1.0 - ln_scale).ln();
        match &self.kind {
            WeightKind::Power { gamma } => gamma * ln_scale,
            WeightKind::PowerLog { t, delta } => t * ln_scale + delta * ln_log(),
            WeightKind::LogPower { beta } => ln_scale - beta * ln_log(),
            WeightKind::Table(tab) => {
                let r = gap.t();
                let r_last = *tab.radii.last().unwrap();
                if r >= r_last {
                    tab.values.last().unwrap().ln() + self.a * (ln_scale - tab.last_ln_scale)
                } else {
                    let k = tab.radii.partition_point(|&x| x <= r) - 1;
                    let (r0, r1) = (tab.radii[k], tab.radii[k + 1]);
                    let (v0, v1) = (tab.values[k], tab.values[k + 1]);
                    (v0 + (v1 - v0) * (r - r0) / (r1 - r0)).ln()
                }
            }
        }
    }

    pub fn eval_gap(&self, gap: Gap) -> f64 {
        self.ln_eval(gap).exp()
    }

    /// `ν(r)` for `r ∈ [0,1)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain(format!("weight evaluated at r = {r}, outside [0,1)")));
        }
        Ok(self.eval_gap(Gap::from_t(r)))
    }

    /// `ν(1 - 1/n)`, computed without forming `1 - 1/n`.
    pub fn at_index(&self, n: f64) -> f64 {
        self.eval_gap(Gap::from_u(n.ln()))
    }

    /// Whether `ω̃(1) = ∫_0^1 ds/ω(s)` is finite, when it follows from the
    /// closed form of the weight family.
    pub fn omega_tilde_finite_closed_form(&self) -> Option<bool> {
        match &self.kind {
            WeightKind::Power { gamma } => Some(*gamma < 1.0),
            WeightKind::PowerLog { t, delta } => Some(*t < 1.0 || (*t == 1.0 && *delta > 1.0)),
            WeightKind::LogPower { beta } => Some(*beta < -1.0),
            WeightKind::Table(_) => None,
        }
    }

    /// Integrand of `ω̃` with respect to `u`: `e^{-u}/ν`.
    pub(crate) fn inverse_du(&self, gap: Gap) -> f64 {
        self.ln_inverse_du(gap).exp()
    }

    /// `ln` of [`Self::inverse_du`].
    pub(crate) fn ln_inverse_du(&self, gap: Gap) -> f64 {
        // ln(1-t²) = -u + ln(1+t); the -u cancels by hand so huge gaps
        // do not lose the exponent to rounding
        let ln_1pt = (2.0 - (-gap.u).exp()).ln();
        let ln_log = || (1.0 - gap.ln_one_minus_t_sq()).ln();
        match &self.kind {
            WeightKind::Power { gamma } => (gamma - 1.0) * gap.u - gamma * ln_1pt,
            WeightKind::PowerLog { t, delta } => (t - 1.0) * gap.u - t * ln_1pt - delta * ln_log(),
            WeightKind::LogPower { beta } => -ln_1pt + beta * ln_log(),
            WeightKind::Table(_) => -gap.u - self.ln_eval(gap),
        }
    }
}

/// Grid of radii `{0} ∪ {1 - 2^{-m} : 1 <= m <= depth}`.
pub fn dyadic_grid(depth: u32) -> Vec<Gap> {
    (0..=depth).map(|m| Gap::dyadic(m as f64)).collect()
}

/// Dyadic grid with `per_level` log-uniform samples inside every annulus.
pub fn refined_dyadic_grid(depth: u32, per_level: usize) -> Vec<Gap> {
    let per_level = per_level.max(1);
    let mut out = Vec::with_capacity(depth as usize * per_level + 1);
    for m in 0..depth {
        for j in 0..per_level {
            out.push(Gap::dyadic(m as f64 + j as f64 / per_level as f64));
        }
    }
    out.push(Gap::dyadic(depth as f64));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub c_dec: f64,
    pub c_inc: f64,
    pub ceiling: f64,
    pub pass: bool,
}

pub const NORMALITY_CEILING: f64 = 1e3;

/// Empirical "almost monotone" constants of `ν/(1-r²)^a` and `ν/(1-r²)^b`.
pub fn normality_check(w: &NormalWeight, grid: &[Gap]) -> Result<NormalityReport> {
    normality_check_with_ceiling(w, grid, NORMALITY_CEILING)
}

pub fn normality_check_with_ceiling(w: &NormalWeight, grid: &[Gap], ceiling: f64) -> Result<NormalityReport> {
    if grid.len() < 2 {
        return Err(Error::Precondition("normality check needs at least two radii".into()));
    }
    if grid.windows(2).any(|p| !(p[1].u > p[0].u)) {
        return Err(Error::Precondition("normality grid must be strictly increasing".into()));
    }
    // C_dec: max over r1 < r2 of h_a(r2)/h_a(r1); C_inc: max of h_b(r1)/h_b(r2).
    let mut min_a = f64::INFINITY;
    let mut max_b = f64::NEG_INFINITY;
    let mut c_dec = f64::NEG_INFINITY;
    let mut c_inc = f64::NEG_INFINITY;
    for (i, &g) in grid.iter().enumerate() {
        let ln_nu = w.ln_eval(g);
        let ln_scale = g.ln_one_minus_t_sq();
        let ha = ln_nu - w.a * ln_scale;
        let hb = ln_nu - w.b * ln_scale;
        if i > 0 {
            c_dec = c_dec.max(ha - min_a);
            c_inc = c_inc.max(max_b - hb);
        }
        min_a = min_a.min(ha);
        max_b = max_b.max(hb);
    }
    let c_dec = c_dec.exp();
    let c_inc = c_inc.exp();
    let pass = c_dec.is_finite() && c_inc.is_finite() && c_dec < ceiling && c_inc < ceiling;
    Ok(NormalityReport {
        c_dec,
        c_inc,
        ceiling,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaTildeValue {
    pub value: f64,
    pub finite: bool,
}

/// Relative increment tolerance of the `ω̃(1)` divergence heuristic.
pub const OMEGA_TILDE_DIVERGENCE_TOL: f64 = 1e-2;

/// `ω̃(t) = ∫_0^t ds/ω(s)`, with a finiteness flag at `t = 1`.
pub fn omega_tilde(w: &NormalWeight, t: f64) -> Result<OmegaTildeValue> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("omega_tilde at t = {t}, outside [0,1]")));
    }
    if t < 1.0 {
        let value = omega_tilde_gap(w, Gap::from_t(t))?;
        return Ok(OmegaTildeValue { value, finite: true });
    }
    let finite = match w.omega_tilde_finite_closed_form() {
        Some(f) => f,
        None => !omega_tilde_diverges_heuristic(w, OMEGA_TILDE_DIVERGENCE_TOL)?,
    };
    if !finite {
        return Ok(OmegaTildeValue {
            value: f64::INFINITY,
            finite,
        });
    }
    let value = match integrate_gap_tail(|g| w.inverse_du(g), 0.0, &QuadOptions::default()) {
        Ok(v) => v,
        Err(Error::Divergent(_)) => {
            return Ok(OmegaTildeValue {
                value: f64::INFINITY,
                finite: false,
            })
        }
        Err(e) => return Err(e),
    };
    Ok(OmegaTildeValue { value, finite })
}

/// `ω̃` at an interior radius given through its gap.
pub fn omega_tilde_gap(w: &NormalWeight, gap: Gap) -> Result<f64> {
    let breaks = panel_breaks(0.0, gap.u, 1.0);
    crate::quad::integrate_panels(&|u: f64| w.inverse_du(Gap::from_u(u)), &breaks, &QuadOptions::default())
        .map(|(v, _)| v)
}

fn panel_breaks(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Evaluates `ω̃(1 - 2^{-m})` for `m = 10, 15, 20, 25` and declares
/// divergence when the last increment exceeds `tol·(1 + |value|)`.
pub fn omega_tilde_diverges_heuristic(w: &NormalWeight, tol: f64) -> Result<bool> {
    let vals: Vec<f64> = [10.0, 15.0, 20.0, 25.0]
        .iter()
        .map(|&m| omega_tilde_gap(w, Gap::dyadic(m)))
        .collect::<Result<_>>()?;
    let last = vals[3];
    Ok(vals[3] - vals[2] > tol * (1.0 + last.abs()))
}

/// Cumulative table of `ω̃` in the gap variable, for integrands that need
/// `ω̃(t)` at thousands of quadrature nodes. Kept in logs: for weights
/// decaying faster than `1-t` the gauge outgrows `f64` near the boundary.
#[derive(Debug, Clone)]
pub struct OmegaTilde {
    weight: NormalWeight,
    breaks: Vec<f64>,
    ln_cumulative: Vec<f64>,
}

const OMEGA_TABLE_STEP: f64 = 0.25;

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Drop in `l` past which the integrand no longer matters.
const LN_NEGLIGIBLE: f64 = 700.0;

/// `ln ∫_a^b e^{l(u)} du`, scaled by the larger endpoint value. On long
/// panels of a monotone `l` the far side is exponentially small, so the
/// panel is cut where `l` has dropped by [`LN_NEGLIGIBLE`].
fn ln_panel<F: Fn(f64) -> f64>(l: &F, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(f64::NEG_INFINITY);
    }
    let (la, lb) = (l(a), l(b));
    let shift = la.max(lb);
    let (mut a, mut b) = (a, b);
    if (la - lb).abs() > LN_NEGLIGIBLE {
        let rising = lb > la;
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if !(m > lo && m < hi) {
                break;
            }
            if (l(m) > shift - LN_NEGLIGIBLE) == rising {
                hi = m;
            } else {
                lo = m;
            }
        }
        if rising {
            a = lo;
        } else {
            b = hi;
        }
        if b - a < 1e-10 * b {
            // too few representable points for quadrature; l is linear
            // to rounding across the window
            let k = (l(b) - l(a)).abs() / (b - a);
            return Ok(shift + (-(-k * (b - a)).exp_m1() / k).ln());
        }
    }
    let v = integrate(|u: f64| (l(u) - shift).exp(), a, b, &QuadOptions::with_rel_tol(1e-13))?;
    Ok(shift + v.ln())
}

impl OmegaTilde {
    pub fn new(weight: &NormalWeight) -> Result<Self> {
        let mut breaks: Vec<f64> = (0..=(LINEAR_SPAN / OMEGA_TABLE_STEP) as usize)
            .map(|k| k as f64 * OMEGA_TABLE_STEP)
            .collect();
        let mut a = LINEAR_SPAN;
        while a <= 2.0 * MAX_GAP {
            a *= 2.0;
            breaks.push(a);
        }
        let l = |u: f64| weight.ln_inverse_du(Gap::from_u(u));
        let mut ln_cumulative = Vec::with_capacity(breaks.len());
        let mut acc = f64::NEG_INFINITY;
        ln_cumulative.push(acc);
        for p in breaks.windows(2) {
            acc = ln_add(acc, ln_panel(&l, p[0], p[1])?);
            ln_cumulative.push(acc);
        }
        Ok(OmegaTilde {
            weight: weight.clone(),
            breaks,
            ln_cumulative,
        })
    }

    pub fn weight(&self) -> &NormalWeight {
        &self.weight
    }

    /// `ln ω̃` at the radius of `gap`; `-∞` at the origin.
    pub fn ln_eval(&self, gap: Gap) -> f64 {
        let u = gap.u;
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = (self.breaks.partition_point(|&b| b <= u) - 1).min(self.breaks.len() - 2);
        let l = |s: f64| self.weight.ln_inverse_du(Gap::from_u(s));
        let rest = ln_panel(&l, self.breaks[k], u).unwrap_or(f64::NAN);
        ln_add(self.ln_cumulative[k], rest)
    }

    /// `ln(ω̃ + 1)`.
    pub fn ln_eval_plus_one(&self, gap: Gap) -> f64 {
        ln_add(self.ln_eval(gap), 0.0)
    }

    pub fn eval(&self, gap: Gap) -> f64 {
        self.ln_eval(gap).exp()
    }
}

/// Lacunary extremal function `g(ζ) = 1 + Σ_s 2^s ζ^{n_s}` with
/// `ν(r_s) = 2^{-s}` and `n_s = ⌊(1-r_s)^{-1}⌋`, together with the measured
/// two-sided bounds `N1 <= ν(r) g(r)` and `ν(|ζ|)|g(ζ)| <= N2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalFunction {
    pub base: WeightSpec,
    /// `(n_s, 2^s)` for `s = 1..=S_max`.
    pub exponents: Vec<(u64, f64)>,
    pub radii: Vec<f64>,
    /// Gaps `-ln(1-r_s)`, exact where `radii` round to 1.
    pub radius_gaps: Vec<f64>,
    pub n1: f64,
    pub n2: f64,
}

/// Largest exponent `n_s` the construction accepts.
pub const MAX_EXTREMAL_DEGREE: f64 = 4.5e15;

pub fn build_extremal(w: &NormalWeight, s_max: u32) -> Result<ExtremalFunction> {
    if s_max < 1 {
        return Err(Error::Precondition("extremal construction needs S_max >= 1".into()));
    }
    let mut exponents = Vec::with_capacity(s_max as usize);
    let mut radii = Vec::new();
    let mut radius_gaps = Vec::new();
    for s in 1..=s_max {
        let target = -(s as f64) * std::f64::consts::LN_2;
        let u_s = solve_level(w, target).ok_or_else(|| {
            Error::Construction(format!("nu(r) = 2^-{s} has no root in [0,1) for {}", w.label()))
        })?;
        let n = u_s.exp().floor();
        if !(n <= MAX_EXTREMAL_DEGREE) {
            return Err(Error::Construction(format!("exponent n_{s} = {n:e} exceeds the supported degree")));
        }
        let n = n as u64;
        if let Some(&(prev, _)) = exponents.last() {
            if n <= prev {
                return Err(Error::Construction(format!(
                    "n_s not strictly increasing at s = {s} ({n} <= {prev})"
                )));
            }
        }
        exponents.push((n, 2f64.powi(s as i32)));
        radii.push(Gap::from_u(u_s).t());
        radius_gaps.push(u_s);
    }
    let mut ext = ExtremalFunction {
        base: w.to_spec(),
        exponents,
        radii,
        radius_gaps,
        n1: 0.0,
        n2: 0.0,
    };
    let grid = ext.evaluation_grid();
    let (mut n1, mut n2) = (f64::INFINITY, 0.0f64);
    for &g in &grid {
        let v = w.eval_gap(g) * ext.g_at(g);
        n1 = n1.min(v);
        n2 = n2.max(v);
    }
    ext.n1 = n1;
    ext.n2 = n2;
    Ok(ext)
}

/// Gap `u` with `ln ν = target`, found by bisection in `u` to 1e-12.
fn solve_level(w: &NormalWeight, target: f64) -> Option<f64> {
    let f = |u: f64| w.ln_eval(Gap::from_u(u)) - target;
    let mut lo = 0.0;
    if f(lo) < 0.0 {
        return None;
    }
    let mut hi = 1.0;
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

impl ExtremalFunction {
    /// Dyadic radii (eight samples per annulus) up to the deepest dyadic
    /// level not past the last constructed `r_s`.
    pub fn evaluation_grid(&self) -> Vec<Gap> {
        let u_last = *self.radius_gaps.last().unwrap_or(&0.0);
        let depth = (u_last / std::f64::consts::LN_2).floor() as u32;
        refined_dyadic_grid(depth, 8)
    }

    pub fn g_at(&self, gap: Gap) -> f64 {
        let ln_t = gap.ln_t();
        let mut v = 1.0;
        for &(n, c) in &self.exponents {
            v += c * (n as f64 * ln_t).exp();
        }
        v
    }

    /// `F(t) = 1 + ∫_0^t g = 1 + t + Σ 2^s t^{n_s+1}/(n_s+1)`.
    pub fn antiderivative_at(&self, gap: Gap) -> f64 {
        let ln_t = gap.ln_t();
        let mut v = 1.0 + gap.t();
        for &(n, c) in &self.exponents {
            let m = (n + 1) as f64;
            v += c * (m * ln_t).exp() / m;
        }
        v
    }

    pub fn degree(&self) -> u64 {
        self.exponents.last().map_or(0, |e| e.0)
    }

    pub fn g_series(&self) -> TaylorSeries {
        let mut c = vec![0.0; self.degree() as usize + 1];
        c[0] = 1.0;
        for &(n, w) in &self.exponents {
            c[n as usize] += w;
        }
        TaylorSeries::from_coefficients(c)
    }

    /// Taylor series of `F(z) = 1 + ∫_0^z g(s) ds`.
    pub fn antiderivative_series(&self) -> TaylorSeries {
        self.g_series().antiderivative(1.0)
    }
}

/// Largest `S` whose exponent `n_S` stays within `max_degree`.
pub fn extremal_within_degree(w: &NormalWeight, max_degree: u64) -> Result<ExtremalFunction> {
    let mut best = None;
    for s in 1..=62u32 {
        match build_extremal(w, s) {
            Ok(e) if e.degree() <= max_degree => best = Some(e),
            _ => break,
        }
    }
    best.ok_or_else(|| Error::Construction(format!("no extremal exponent of {} fits degree {max_degree}", w.label())))
}

/// `sup ν(|z|)/ν(|w|) / [X^a + X^b]`, `X = (1-|z|²)/(1-|w|²)`, over all pairs.
pub fn lemma23_ratio_check(w: &NormalWeight, grid: &[Gap]) -> f64 {
    let logs: Vec<(f64, f64)> = grid.iter().map(|&g| (w.ln_eval(g), g.ln_one_minus_t_sq())).collect();
    let mut sup = 0.0f64;
    for &(nz, sz) in &logs {
        for &(nw, sw) in &logs {
            let lx = sz - sw;
            let bracket = (w.a * lx).exp() + (w.b * lx).exp();
            sup = sup.max((nz - nw).exp() / bracket);
        }
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma24Report {
    /// `(δ, Q(δ))`
    pub values: Vec<(f64, f64)>,
    pub max: f64,
    pub min: f64,
    /// Slope of `ln Q` against `ln(1/δ)`; positive means growth toward small δ.
    pub trend: Trend,
}

/// `Q(δ) = ν(1-δ)·∫_e^∞ e^{-δt} dt/(t ν(1-1/t))`, split at `t = 1/δ`.
pub fn lemma24_q(w: &NormalWeight, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < (-2.0f64).exp()) {
        return Err(Error::Precondition(format!("delta = {delta} must lie in (0, e^-2)")));
    }
    let opts = QuadOptions::with_rel_tol(1e-11);
    let l = (1.0 / delta).ln();
    // t = e^v on [e, 1/δ]; ν(1 - 1/t) has gap u = v.
    let head = |v: f64| (-delta * v.exp() - w.ln_eval(Gap::from_u(v))).exp();
    let i1 = crate::quad::integrate_panels(&head, &panel_breaks(1.0, l, 0.5), &opts)?.0;
    // s = δt on [1, ∞); ν(1 - δ/s) has gap u = ln(s/δ).
    let tail = |s: f64| (-s - s.ln() - w.ln_eval(Gap::from_u((s / delta).ln()))).exp();
    let i2 = crate::quad::integrate_panels(&tail, &panel_breaks(1.0, 800.0, 2.0), &opts)?.0;
    Ok((i1 + i2) * w.eval_gap(Gap::from_u(l)))
}

pub fn lemma24_integral_check(w: &NormalWeight, deltas: &[f64]) -> Result<Lemma24Report> {
    let mut values = Vec::with_capacity(deltas.len());
    for &d in deltas {
        values.push((d, lemma24_q(w, d)?));
    }
    let mut pts: Vec<(f64, f64)> = values.iter().map(|&(d, q)| ((1.0 / d).ln(), q)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // the whole δ range is the ladder here, not only its deep half
    let slope = crate::trend::ls_slope(
        &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.1.ln()).collect::<Vec<_>>(),
    );
    let trend = Trend {
        slope,
        log_slope: f64::NAN,
        verdict: crate::trend::classify(slope, f64::NEG_INFINITY),
    };
    let max = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    Ok(Lemma24Report { values, max, min, trend })
}

/// `ν(r)·Σ_j r^{2^j}/ν(1-2^{-j})` at one radius `r ∈ [1/2, 1)`.
pub fn eq31_ratio(w: &NormalWeight, gap: Gap) -> Result<f64> {
    if gap.t() < 0.5 || !gap.u.is_finite() {
        return Err(Error::Precondition(format!("radius {} outside [1/2, 1)", gap.t())));
    }
    let ln_r = gap.ln_t();
    let mut sum = 0.0;
    let mut prev = 0.0;
    for j in 0..1100 {
        let pow = 2f64.powi(j);
        let ln_term = pow * ln_r - w.ln_eval(Gap::dyadic(j as f64));
        let term = ln_term.exp();
        sum += term;
        // terms eventually fall doubly exponentially; stop once past the peak
        if j > 0 && term < prev && (term <= 1e-18 * sum || ln_term < -745.0) {
            break;
        }
        prev = term;
    }
    Ok(sum * w.eval_gap(gap))
}

/// Max of [`eq31_ratio`] over the given radii.
pub fn eq31_sum_check(w: &NormalWeight, radii: &[Gap]) -> Result<f64> {
    let mut sup = 0.0f64;
    for &g in radii {
        sup = sup.max(eq31_ratio(w, g)?);
    }
    Ok(sup)
}

/// Radii `1 - 2^{-m}` for `m = 1..=depth`.
pub fn eq31_ladder(depth: u32) -> Vec<Gap> {
    (1..=depth).map(|m| Gap::dyadic(m as f64)).collect()
}
