//! Quadrature on [0,1) expressed in the log-gap variable `u = -ln(1-t)`.
//!
//! Every integrand in this crate concentrates its mass at `t -> 1`, so the
//! integrators here work on `u ∈ [u0, ∞)`: unit-width panels over the first
//! stretch (where `t^n` peaks for any practical `n`), then geometrically
//! doubling panels until the contributions die out. An integrand that keeps
//! contributing through the last panel is reported as divergent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of [0,1) stored through its log-gap `u = -ln(1-t)`.
///
/// Keeping `u` instead of `t` avoids the catastrophic rounding of `1-t`
/// near the boundary; `x = 1-t = e^{-u}` and `ln t = ln(1-e^{-u})` are
/// recovered accurately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub u: f64,
}

impl Gap {
    pub fn from_u(u: f64) -> Self {
        Gap { u }
    }

    /// `t` must lie in [0,1).
    pub fn from_t(t: f64) -> Self {
        Gap { u: -(-t).ln_1p() }
    }

    /// Dyadic radius `1 - 2^{-m}`.
    pub fn dyadic(m: f64) -> Self {
        Gap {
            u: m * std::f64::consts::LN_2,
        }
    }

    pub fn t(&self) -> f64 {
        -(-self.u).exp_m1()
    }

    /// `1 - t`.
    pub fn x(&self) -> f64 {
        (-self.u).exp()
    }

    /// `ln t`; `-inf` at `t = 0`.
    pub fn ln_t(&self) -> f64 {
        if self.u == 0.0 {
            f64::NEG_INFINITY
        } else {
            (-self.x()).ln_1p()
        }
    }

    /// `ln(1 - t^2)`, the log of the natural Bloch scale.
    pub fn ln_one_minus_t_sq(&self) -> f64 {
        -self.u + (2.0 - self.x()).ln()
    }

    /// `log(e/(1-t))`.
    pub fn log_e_over_gap(&self) -> f64 {
        1.0 + self.u
    }
}

/// A value that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 step: (kronrod estimate, |kronrod - gauss|).
fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let err = (kronrod - gauss).magnitude();
    (kronrod, err)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Global adaptive Gauss–Kronrod over the panels delimited by `breaks`.
///
/// Returns `(value, error_estimate)`. A run that exhausts
/// `max_intervals` is accepted if its error is within `1e-6` relative,
/// and rejected otherwise.
pub fn integrate_panels<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<(T, f64)> {
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (value, err) = gk15(f, w[0], w[1]);
        total = total + value;
        total_err += err;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    let tolerance = |total: &T| opts.abs_tol.max(opts.rel_tol * total.magnitude());
    while total_err > tolerance(&total) && heap.len() < opts.max_intervals {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(f, worst.a, mid);
        let (rv, re) = gk15(f, mid, worst.b);
        total = total - worst.value + lv + rv;
        total_err += le + re - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
    }
    // Re-sum to shed accumulated rounding from the incremental updates.
    let mut value = T::zero();
    let mut err = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        err += s.err;
    }
    let mag = value.magnitude();
    if mag == f64::INFINITY {
        return Err(Error::Divergent("the integrand overflows".into()));
    }
    if !mag.is_finite() {
        return Err(Error::Numeric("non-finite quadrature value".into()));
    }
    if err > tolerance(&value) && err > 1e-6 * value.magnitude() + opts.abs_tol {
        return Err(Error::Numeric(format!(
            "quadrature did not converge: estimate {:e}, error {:e}",
            value.magnitude(),
            err
        )));
    }
    Ok((value, err))
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    integrate_panels(&f, &[a, b], opts).map(|(v, _)| v)
}

/// Width of the unit-panel stretch that starts every half-line integral.
pub const LINEAR_SPAN: f64 = 64.0;
/// Panels stop doubling once their left end passes this point.
pub const MAX_GAP: f64 = 4.0e18;
/// Tails starting at `u0` run at least to `u0·TAIL_REACH`, so slowly
/// decaying integrands are not cut off near their own starting point.
const TAIL_REACH: f64 = 1e12;
/// A panel contributing less than this fraction of the total ends the ladder.
const TAIL_EPS: f64 = 1e-17;
/// Residual contribution above which a capped ladder counts as divergent.
const DIVERGENCE_EPS: f64 = 1e-8;

/// Integral of `h(u) du` over `u ∈ [u0, ∞)`.
///
/// `h` is the integrand with respect to `u` (any Jacobian already folded
/// in), which lets callers evaluate in log space past the point where
/// `1 - t` underflows.
pub fn integrate_gap_tail<T: QuadValue, F: Fn(Gap) -> T>(
    h: F,
    u0: f64,
    opts: &QuadOptions,
) -> Result<T> {
    let f = |u: f64| h(Gap::from_u(u));
    let lin_end = u0 + LINEAR_SPAN;
    let breaks: Vec<f64> = (0..=LINEAR_SPAN as usize).map(|k| u0 + k as f64).collect();
    let (mut total, _) = integrate_panels(&f, &breaks, opts)?;
    let mut a = lin_end;
    let mut quiet = 0usize;
    let cap = MAX_GAP.max(u0 * TAIL_REACH);
    loop {
        let b = 2.0 * a;
        let panel_opts = QuadOptions {
            abs_tol: opts.abs_tol.max(opts.rel_tol * total.magnitude()),
            ..*opts
        };
        let (value, _) = integrate_panels(&f, &[a, b], &panel_opts)?;
        total = total + value;
        let mag = value.magnitude();
        let tot = total.magnitude();
        if mag <= TAIL_EPS * tot || (tot == 0.0 && mag == 0.0) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        if b > cap {
            if mag > DIVERGENCE_EPS * tot {
                return Err(Error::Divergent(format!(
                    "contribution {:e} still {:.2e} of the running total at u = {:e}",
                    mag,
                    mag / tot.max(f64::MIN_POSITIVE),
                    b
                )));
            }
            return Ok(total);
        }
        a = b;
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// A fixed composite rule in `u`, reused across many integrands that share
/// the same measure (e.g. all Taylor coefficients of one operator output).
#[derive(Debug, Clone)]
pub struct GapRule {
    /// `(gap, weight)`; the weight is with respect to `du`.
    pub nodes: Vec<(Gap, f64)>,
}

impl GapRule {
    /// Panels of width `h` over `[0, LINEAR_SPAN]`, then doubling panels up
    /// to `u_end`, each carrying an `order`-point Gauss–Legendre rule.
    pub fn composite(h: f64, u_end: f64, order: usize) -> Self {
        let gl = gauss_legendre(order);
        let mut nodes = Vec::new();
        let push_panel = |a: f64, b: f64, nodes: &mut Vec<(Gap, f64)>| {
            let c = 0.5 * (a + b);
            let r = 0.5 * (b - a);
            for &(x, w) in &gl {
                nodes.push((Gap::from_u(c + r * x), r * w));
            }
        };
        let panels = (LINEAR_SPAN / h).ceil() as usize;
        for k in 0..panels {
            push_panel(k as f64 * h, ((k + 1) as f64 * h).min(LINEAR_SPAN), &mut nodes);
        }
        let mut a = LINEAR_SPAN;
        while a < u_end {
            let b = 2.0 * a;
            // four sub-panels per doubling keep polynomial-in-log tails accurate
            let step = (b - a) / 4.0;
            for j in 0..4 {
                push_panel(a + j as f64 * step, a + (j + 1) as f64 * step, &mut nodes);
            }
            a = b;
        }
        GapRule { nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_roundtrip_and_accuracy_near_one() {
        let g = Gap::from_t(0.75);
        assert!((g.t() - 0.75).abs() < 1e-15);
        assert!((g.x() - 0.25).abs() < 1e-15);
        let deep = Gap::dyadic(60.0);
        assert!((deep.x() - 2f64.powi(-60)).abs() < 1e-30);
        assert_eq!(Gap::from_t(0.0).ln_t(), f64::NEG_INFINITY);
    }

    #[test]
    fn gk_integrates_smooth_functions() {
        let v = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &QuadOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn half_line_exponential() {
        let v = integrate_gap_tail(|g: Gap| (-2.0 * g.u).exp(), 0.0, &QuadOptions::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn half_line_slow_algebraic_tail_converges() {
        // ∫_0^∞ du/(1+u)^2 = 1
        let v = integrate_gap_tail(|g: Gap| (1.0 + g.u).powi(-2), 0.0, &QuadOptions::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn half_line_divergence_detected() {
        let r = integrate_gap_tail(|g: Gap| 1.0 / (1.0 + g.u), 0.0, &QuadOptions::default());
        assert!(matches!(r, Err(Error::Divergent(_))));
    }

    #[test]
    fn gauss_legendre_exactness() {
        let rule = gauss_legendre(16);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let wsum: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_integrates_exponential_mass() {
        let rule = GapRule::composite(0.5, 1e6, 16);
        let s: f64 = rule.nodes.iter().map(|(g, w)| w * (-g.u).exp()).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}
