//! The operator `I_{μ_{α+1}}` in coefficient and quadrature form, its
//! sublinear companion, the Hankel-matrix form and the well-definedness
//! integral `∫(ω̃+1)dμ`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::GammaWeightTable;
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, RadialMeasure};
use crate::quad::{gauss_legendre, integrate_gap_tail, Gap, QuadOptions, LINEAR_SPAN, MAX_GAP};
use crate::series::TaylorSeries;
use crate::weights::{NormalWeight, OmegaTilde, WeightSpec};

/// Node-sharing quadrature policy for coefficient integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadPolicy {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Initial panel width in `u` on the linear stretch.
    pub h0: f64,
    /// Halvings allowed before giving up.
    pub max_halvings: u32,
    /// Relative stabilization tolerance for the hardest integral.
    pub tol: f64,
}

impl Default for QuadPolicy {
    fn default() -> Self {
        QuadPolicy {
            order: 16,
            h0: 1.0,
            max_halvings: 5,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OperatorConfig {
    pub alpha: f64,
    pub measure: Arc<RadialMeasure>,
    pub truncation: usize,
    /// Weight of the source space; when set, applications check `∫(ω̃+1)dμ < ∞`.
    pub source_weight: Option<NormalWeight>,
    pub policy: QuadPolicy,
}

/// JSON form of [`OperatorConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfigSpec {
    pub alpha: f64,
    pub measure: MeasureSpec,
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_weight: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<QuadPolicy>,
}

impl OperatorConfig {
    pub fn new(alpha: f64, measure: RadialMeasure, truncation: usize) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::Domain(format!("alpha must exceed -1, got {alpha}")));
        }
        if truncation < 1 {
            return Err(Error::Precondition("truncation must be at least 1".into()));
        }
        Ok(OperatorConfig {
            alpha,
            measure: Arc::new(measure),
            truncation,
            source_weight: None,
            policy: QuadPolicy::default(),
        })
    }

    pub fn with_source_weight(mut self, w: NormalWeight) -> Self {
        self.source_weight = Some(w);
        self
    }

    pub fn with_truncation(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.truncation = n;
        c
    }

    pub fn from_spec(spec: &OperatorConfigSpec) -> Result<Self> {
        let mut cfg = Self::new(spec.alpha, RadialMeasure::from_spec(&spec.measure)?, spec.truncation)?;
        if let Some(w) = &spec.source_weight {
            cfg.source_weight = Some(NormalWeight::from_spec(w)?);
        }
        if let Some(p) = spec.policy {
            cfg.policy = p;
        }
        Ok(cfg)
    }

    fn check_defined(&self) -> Result<()> {
        if let Some(w) = &self.source_weight {
            let wd = well_defined_check(&self.measure, w, false)?;
            if !wd.finite {
                return Err(Error::Divergent(format!(
                    "the operator is not defined on the source space: ∫(ω̃+1)dμ diverges for {} and {}",
                    self.measure.label(),
                    w.label()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellDefined {
    pub integral: f64,
    pub finite: bool,
    /// `μ([0,1)) + ∫_0^1 μ([s,1))/ω(s) ds`, the same integral after Fubini.
    pub fubini: Option<f64>,
}

/// `∫(ω̃(t)+1)dμ(t)`; divergence is a result, not an error.
pub fn well_defined_check(mu: &RadialMeasure, omega: &NormalWeight, with_fubini: bool) -> Result<WellDefined> {
    let tab = OmegaTilde::new(omega)?;
    let integral = match mu.integrate_ln(|g| tab.ln_eval_plus_one(g)) {
        Ok(v) => v,
        Err(Error::Divergent(_)) => {
            return Ok(WellDefined {
                integral: f64::INFINITY,
                finite: false,
                fubini: with_fubini.then_some(f64::INFINITY),
            })
        }
        Err(e) => return Err(e),
    };
    let fubini = if with_fubini {
        let opts = QuadOptions::with_rel_tol(1e-11);
        let tail_err = std::cell::RefCell::new(None::<String>);
        let v = integrate_gap_tail(
            |g| match mu.tail_gap(g) {
                Ok(t) if t > 0.0 => (t.ln() + omega.ln_inverse_du(g)).exp(),
                Ok(_) => 0.0,
                Err(e) => {
                    tail_err.borrow_mut().get_or_insert(e.to_string());
                    f64::NAN
                }
            },
            0.0,
            &opts,
        );
        if let Some(e) = tail_err.into_inner() {
            return Err(Error::Numeric(e));
        }
        Some(match v {
            Ok(v) => mu.mass() + v,
            Err(Error::Divergent(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        })
    } else {
        None
    };
    Ok(WellDefined {
        integral,
        finite: integral.is_finite(),
        fubini,
    })
}

/// Quadrature nodes for `∫ · dμ`: atoms exactly, the density through a
/// composite Gauss–Legendre rule in `u`. Weights carry the measure.
#[derive(Debug, Clone)]
pub struct MeasureRule {
    pub nodes: Vec<(Gap, f64)>,
}

/// Point past which `scale_fn` (an integrand per `du`) is negligible
/// against `scale`.
fn horizon<F: Fn(Gap) -> f64>(h: F, scale: f64) -> f64 {
    let mut a = LINEAR_SPAN;
    while a < MAX_GAP {
        let v = h(Gap::from_u(a)) * a;
        if v.is_finite() && v <= 1e-18 * scale {
            break;
        }
        a *= 2.0;
    }
    a
}

impl MeasureRule {
    /// `breaks` are extra panel ends in `u` (kinks of the integrand).
    pub fn build(mu: &RadialMeasure, h: f64, order: usize, u_end: f64, breaks: &[f64]) -> MeasureRule {
        let mut nodes: Vec<(Gap, f64)> = mu.atom_list().iter().map(|a| (a.gap, a.w)).collect();
        if let Some(d) = mu.density() {
            let gl = gauss_legendre(order);
            let mut ends: Vec<f64> = (0..=(LINEAR_SPAN / h).ceil() as usize)
                .map(|k| (k as f64 * h).min(LINEAR_SPAN))
                .collect();
            ends.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < LINEAR_SPAN));
            let mut a = LINEAR_SPAN;
            while a < u_end {
                let step = a / 4.0;
                for j in 1..=4 {
                    ends.push(a + j as f64 * step);
                }
                a *= 2.0;
            }
            ends.sort_by(f64::total_cmp);
            ends.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
            for p in ends.windows(2) {
                let c = 0.5 * (p[0] + p[1]);
                let r = 0.5 * (p[1] - p[0]);
                for &(x, w) in &gl {
                    let g = Gap::from_u(c + r * x);
                    nodes.push((g, r * w * d.mass_du(g)));
                }
            }
        }
        MeasureRule { nodes }
    }

    /// `∫ t^n φ dμ` for `n = 0..=n_max`, with `φ` already evaluated at the nodes.
    pub fn dense_moments(&self, phi: &[f64], n_max: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_max + 1];
        let mut pw: Vec<f64> = self.nodes.iter().zip(phi).map(|(n, p)| n.1 * p).collect();
        let ts: Vec<f64> = self.nodes.iter().map(|n| n.0.t()).collect();
        for o in out.iter_mut() {
            *o = pw.iter().sum();
            for (p, t) in pw.iter_mut().zip(&ts) {
                *p *= t;
            }
        }
        out
    }

    /// `∫ t^n φ dμ` for the listed `n`.
    pub fn sparse_moments(&self, phi: &[f64], ns: &[u64]) -> Vec<f64> {
        let lts: Vec<f64> = self.nodes.iter().map(|n| n.0.ln_t()).collect();
        ns.iter()
            .map(|&n| {
                self.nodes
                    .iter()
                    .zip(phi)
                    .zip(&lts)
                    .map(|((node, p), lt)| {
                        let pw = if n == 0 { 1.0 } else { (n as f64 * lt).exp() };
                        node.1 * p * pw
                    })
                    .sum()
            })
            .collect()
    }
}

/// Which `n` to integrate against.
pub enum MomentIndices<'a> {
    Dense(usize),
    Sparse(&'a [u64]),
}

/// `∫ t^n φ(t) dμ(t)` on shared nodes, halving the panel width until the
/// hardest (largest-n) and the n = 0 integrals move by less than
/// `policy.tol` relative to `∫ t^n |φ| dμ`.
pub fn shared_moments<F: Fn(Gap) -> f64>(
    mu: &RadialMeasure,
    phi: F,
    idx: MomentIndices<'_>,
    breaks: &[f64],
    policy: &QuadPolicy,
) -> Result<Vec<f64>> {
    let scale = mu.integrate(|g| phi(g).abs())?;
    let u_end = match mu.density() {
        Some(d) => horizon(|g| phi(g).abs() * d.mass_du(g), scale.max(f64::MIN_POSITIVE)),
        None => 0.0,
    };
    let run = |h: f64| -> (Vec<f64>, Vec<f64>) {
        let rule = MeasureRule::build(mu, h, policy.order, u_end, breaks);
        let vals: Vec<f64> = rule.nodes.iter().map(|n| phi(n.0)).collect();
        let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
        match idx {
            MomentIndices::Dense(n) => (rule.dense_moments(&vals, n), rule.dense_moments(&abs, n)),
            MomentIndices::Sparse(ns) => (rule.sparse_moments(&vals, ns), rule.sparse_moments(&abs, ns)),
        }
    };
    let mut h = policy.h0;
    let (mut prev, _) = run(h);
    if mu.density().is_none() {
        return Ok(prev);
    }
    for _ in 0..policy.max_halvings {
        h *= 0.5;
        let (cur, abs) = run(h);
        let last = cur.len() - 1;
        let settled = [0, last].iter().all(|&i| (cur[i] - prev[i]).abs() <= policy.tol * abs[i].max(1e-300));
        if settled {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numeric(format!(
        "coefficient integrals for {} did not stabilize down to panel width {h}",
        mu.label()
    )))
}

/// Sign changes of `f` on `(0,1)`, as `u`-positions, for panel breaks.
fn real_roots_u(f: &TaylorSeries) -> Vec<f64> {
    let mut out = Vec::new();
    let steps = 64 * 64;
    let at = |u: f64| f.eval_gap(Gap::from_u(u));
    let mut u0 = 1e-9;
    let mut f0 = at(u0);
    for k in 1..=steps {
        let u1 = k as f64 / 64.0;
        let f1 = at(u1);
        if f0 == 0.0 {
            out.push(u0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (u0, u1, f0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let fm = at(m);
                if fm * fa <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            out.push(0.5 * (a + b));
        }
        u0 = u1;
        f0 = f1;
    }
    out
}

fn apply_with(f: &TaylorSeries, cfg: &OperatorConfig, absolute: bool) -> Result<TaylorSeries> {
    cfg.check_defined()?;
    let n = cfg.truncation;
    let c = GammaWeightTable::new(n, cfg.alpha)?;
    let breaks = if absolute { real_roots_u(f) } else { Vec::new() };
    let m = if absolute {
        shared_moments(&cfg.measure, |g| f.eval_gap(g).abs(), MomentIndices::Dense(n), &breaks, &cfg.policy)?
    } else {
        shared_moments(&cfg.measure, |g| f.eval_gap(g), MomentIndices::Dense(n), &breaks, &cfg.policy)?
    };
    Ok(TaylorSeries::from_coefficients(
        m.iter().enumerate().map(|(k, v)| c.get(k) * v).collect(),
    ))
}

/// `b_n = c_n ∫ t^n f(t) dμ(t)` for `n <= N`.
pub fn apply_coefficient(f: &TaylorSeries, cfg: &OperatorConfig) -> Result<TaylorSeries> {
    apply_with(f, cfg, false)
}

/// `c_n ∫ t^n |f(t)| dμ(t)` for `n <= N`.
pub fn apply_sublinear(f: &TaylorSeries, cfg: &OperatorConfig) -> Result<TaylorSeries> {
    apply_with(f, cfg, true)
}

/// `∫ f(t)(1-tz)^{-(α+1)} dμ(t)` by adaptive quadrature, principal branch.
pub fn apply_quadrature(f: &TaylorSeries, cfg: &OperatorConfig, z: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::Domain(format!("|z| = {} is not inside the unit disk", z.norm())));
    }
    cfg.check_defined()?;
    let p = -(cfg.alpha + 1.0);
    let kernel = |g: Gap| -> Complex64 {
        let w = Complex64::new(1.0, 0.0) - z * g.t();
        (w.ln() * p).exp() * f.eval_gap(g)
    };
    let mut acc: Complex64 = cfg
        .measure
        .atom_list()
        .iter()
        .map(|a| kernel(a.gap) * a.w)
        .sum();
    if let Some(d) = cfg.measure.density() {
        acc += integrate_gap_tail(|g| kernel(g) * d.mass_du(g), 0.0, &QuadOptions::with_rel_tol(1e-13))?;
    }
    Ok(acc)
}

/// `out_n = c_n Σ_k μ_{n+k} a_k`, `n <= n_out`, for a polynomial `a`.
pub fn hankel_apply(a: &[f64], mu: &RadialMeasure, alpha: f64, n_out: usize) -> Result<Vec<f64>> {
    let c = GammaWeightTable::new(n_out, alpha)?;
    let mut out = Vec::with_capacity(n_out + 1);
    for n in 0..=n_out {
        let mut s = 0.0;
        for (k, &ak) in a.iter().enumerate() {
            if ak != 0.0 {
                s += mu.hankel_entry(n as u64, k as u64)? * ak;
            }
        }
        out.push(c.get(n) * s);
    }
    Ok(out)
}

/// [`hankel_apply`] for a truncated series: the inner sums must agree
/// between the full truncation and its first half to `tol` relative to
/// `Σ|a_k|μ_{n+k}`.
pub fn hankel_apply_series(a: &[f64], mu: &RadialMeasure, alpha: f64, n_out: usize, tol: f64) -> Result<Vec<f64>> {
    let half = a.len() / 2;
    for n in [0usize, n_out] {
        let mut tail = 0.0;
        let mut total = 0.0;
        for (k, &ak) in a.iter().enumerate() {
            let v = (mu.hankel_entry(n as u64, k as u64)? * ak).abs();
            total += v;
            if k >= half {
                tail += v;
            }
        }
        if tail > tol * total.max(1e-300) {
            return Err(Error::Numeric(format!(
                "inner Hankel sum at n = {n} has not stabilized: second half carries {:.2e} of the mass",
                tail / total
            )));
        }
    }
    hankel_apply(a, mu, alpha, n_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(alpha: f64, mu: RadialMeasure, n: usize) -> OperatorConfig {
        OperatorConfig::new(alpha, mu, n).unwrap()
    }

    #[test]
    fn coefficient_mode_examples() {
        let one = TaylorSeries::constant(1.0);
        let b = apply_coefficient(&one, &cfg(0.0, RadialMeasure::lebesgue(), 512)).unwrap();
        for (n, v) in b.coeffs().iter().enumerate() {
            assert_relative_eq!(*v, 1.0 / (n as f64 + 1.0), max_relative = 1e-11);
        }
        let d = RadialMeasure::dirac(0.5).unwrap();
        let b = apply_coefficient(&one, &cfg(0.0, d.clone(), 40)).unwrap();
        assert_relative_eq!(b.coeffs()[40], 2f64.powi(-40), max_relative = 1e-13);
        let b = apply_coefficient(&one, &cfg(1.0, d, 40)).unwrap();
        assert_relative_eq!(b.coeffs()[10], 11.0 * 2f64.powi(-10), max_relative = 1e-13);
    }

    #[test]
    fn quadrature_mode_examples() {
        let one = TaylorSeries::constant(1.0);
        let d = RadialMeasure::dirac(0.5).unwrap();
        let v = apply_quadrature(&one, &cfg(0.0, d, 8), Complex64::new(0.4, 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.25, max_relative = 1e-14);
        let v = apply_quadrature(&one, &cfg(0.0, RadialMeasure::lebesgue(), 8), Complex64::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(v.re, 2.0 * 2f64.ln(), max_relative = 1e-12);
        assert!(apply_quadrature(&one, &cfg(0.0, RadialMeasure::lebesgue(), 8), Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn sublinear_examples() {
        let f = TaylorSeries::from_coefficients(vec![-1.0, 2.0]);
        let d = RadialMeasure::dirac(0.5).unwrap();
        let b = apply_sublinear(&f, &cfg(0.0, d, 10)).unwrap();
        assert!(b.coeffs().iter().all(|&c| c.abs() < 1e-15));
        let b = apply_sublinear(&f, &cfg(0.0, RadialMeasure::lebesgue(), 10)).unwrap();
        assert_relative_eq!(b.coeffs()[0], 0.5, max_relative = 1e-12);
        // ∫ t|2t-1| dt = 1/4
        assert_relative_eq!(b.coeffs()[1], 0.25, max_relative = 1e-12);
        let pos = TaylorSeries::from_coefficients(vec![1.0, 0.5]);
        let c = cfg(0.5, RadialMeasure::power_density(0.5).unwrap(), 64);
        assert_eq!(apply_sublinear(&pos, &c).unwrap(), apply_coefficient(&pos, &c).unwrap());
    }

    #[test]
    fn hankel_examples() {
        let out = hankel_apply(&[1.0], &RadialMeasure::lebesgue(), 0.0, 5).unwrap();
        for (n, v) in out.iter().enumerate() {
            assert_relative_eq!(*v, 1.0 / (n as f64 + 1.0), max_relative = 1e-12);
        }
        let a: Vec<f64> = (0..60).map(|k| 0.5f64.powi(k)).collect();
        let out = hankel_apply_series(&a, &RadialMeasure::dirac(0.5).unwrap(), 0.0, 6, 1e-12).unwrap();
        assert_relative_eq!(out[6], 2f64.powi(-6) * 4.0 / 3.0, max_relative = 1e-12);
        let p = TaylorSeries::from_coefficients(vec![0.3, -0.2, 0.9, 0.1]);
        let mu = RadialMeasure::power_density(1.5).unwrap();
        let h = hankel_apply(p.coeffs(), &mu, 0.7, 20).unwrap();
        let b = apply_coefficient(&p, &cfg(0.7, mu, 20)).unwrap();
        for (x, y) in h.iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-12 * y.abs().max(1e-3));
        }
    }

    #[test]
    fn hankel_series_detects_unstable_sums() {
        let a = vec![1.0; 40];
        assert!(hankel_apply_series(&a, &RadialMeasure::lebesgue(), 0.0, 4, 1e-8).is_err());
    }

    #[test]
    fn well_defined_examples() {
        let half = NormalWeight::power(0.5).unwrap();
        let wd = well_defined_check(&RadialMeasure::power_density(0.3).unwrap(), &half, false).unwrap();
        assert!(wd.finite && wd.integral <= (std::f64::consts::FRAC_PI_2 + 1.0) * (1.0 / 1.3) + 1e-12);
        let bloch = NormalWeight::power(1.0).unwrap();
        let wd = well_defined_check(&RadialMeasure::lebesgue(), &bloch, true).unwrap();
        assert_relative_eq!(wd.integral, 2f64.ln() + 1.0, max_relative = 1e-10);
        assert_relative_eq!(wd.fubini.unwrap(), 2f64.ln() + 1.0, max_relative = 1e-8);
        let heavy = RadialMeasure::power_log_density(-1.0, -2.0).unwrap();
        let wd = well_defined_check(&heavy, &bloch, true).unwrap();
        assert!(!wd.finite);
        assert_eq!(wd.fubini, Some(f64::INFINITY));
        let c = cfg(0.0, heavy, 8).with_source_weight(bloch);
        assert!(matches!(apply_coefficient(&TaylorSeries::constant(1.0), &c), Err(Error::Divergent(_))));
    }

    #[test]
    fn config_json() {
        let j = r#"{"alpha":0.5,"measure":{"density":{"kind":"power_log","s":0.0}},"truncation":16,
                    "source_weight":{"kind":"power","gamma":0.5}}"#;
        let spec: OperatorConfigSpec = serde_json::from_str(j).unwrap();
        let c = OperatorConfig::from_spec(&spec).unwrap();
        assert_eq!(c.truncation, 16);
        assert!(c.source_weight.is_some());
        let bad = r#"{"alpha":-1.0,"measure":{},"truncation":16}"#;
        assert!(OperatorConfig::from_spec(&serde_json::from_str(bad).unwrap()).is_err());
    }
}
