//! Finite positive radial measures on [0,1): moments, tails, weighted
//! moments, Carleson-type suprema and the power transform `dμ/(1-t)^γ`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_gap_tail, Gap, QuadOptions};
use crate::trend::{trend_test, Trend, Verdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub gap: Gap,
    pub w: f64,
}

impl Atom {
    pub fn t(&self) -> f64 {
        self.gap.t()
    }
}

pub type LnMassFn = Arc<dyn Fn(Gap) -> f64 + Send + Sync>;
pub type TailFn = Arc<dyn Fn(Gap) -> f64 + Send + Sync>;

/// Absolutely continuous part, described by `ln` of its mass per unit `u`
/// (that is `ln(p(t)·(1-t))`).
#[derive(Clone)]
pub enum Density {
    /// `p(t) = (1-t)^s log^γ(e/(1-t))`
    PowerLog { s: f64, gamma: f64 },
    Custom { name: String, ln_mass_du: LnMassFn },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::PowerLog { s, gamma } => write!(f, "PowerLog {{ s: {s}, gamma: {gamma} }}"),
            Density::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl Density {
    pub fn ln_mass_du(&self, gap: Gap) -> f64 {
        self.ln_tilted_mass_du(gap, 0.0)
    }

    /// `ln` of the mass per unit `u` times `e^{k·u}`, with the factor folded
    /// into the exponent of `1-t` where the closed form allows.
    fn ln_tilted_mass_du(&self, gap: Gap, k: f64) -> f64 {
        match self {
            Density::PowerLog { s, gamma } => {
                let lg = if *gamma == 0.0 { 0.0 } else { gamma * gap.u.ln_1p() };
                (k - s - 1.0) * gap.u + lg
            }
            Density::Custom { ln_mass_du, .. } => k * gap.u + ln_mass_du(gap),
        }
    }

    pub fn mass_du(&self, gap: Gap) -> f64 {
        self.ln_mass_du(gap).exp()
    }

    /// Finiteness of the total mass when it follows from the closed form.
    fn finite_closed_form(&self) -> Option<bool> {
        match self {
            Density::PowerLog { s, gamma } => Some(*s > -1.0 || (*s == -1.0 && *gamma < -1.0)),
            Density::Custom { .. } => None,
        }
    }

    fn label(&self) -> String {
        match self {
            Density::PowerLog { s, gamma } if *gamma == 0.0 => {
                if *s == 0.0 {
                    "lebesgue".into()
                } else {
                    format!("(1-t)^{s}")
                }
            }
            Density::PowerLog { s, gamma } => format!("(1-t)^{s}log^{gamma}"),
            Density::Custom { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    PowerLog {
        s: f64,
        #[serde(default)]
        gamma: f64,
    },
}

/// JSON descriptor, e.g. `{"atoms":[[0.5,1.0]],"density":{"kind":"power_log","s":2.0,"gamma":1.0}}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A finite positive Borel measure on [0,1).
pub struct RadialMeasure {
    atoms: Vec<Atom>,
    density: Option<Density>,
    tail_closed_form: Option<TailFn>,
    mass: f64,
    label: String,
    cache: RwLock<HashMap<u64, f64>>,
}

impl Clone for RadialMeasure {
    fn clone(&self) -> Self {
        RadialMeasure {
            atoms: self.atoms.clone(),
            density: self.density.clone(),
            tail_closed_form: self.tail_closed_form.clone(),
            mass: self.mass,
            label: self.label.clone(),
            cache: RwLock::new(self.cache.read().expect("moment cache poisoned").clone()),
        }
    }
}

impl fmt::Debug for RadialMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialMeasure")
            .field("label", &self.label)
            .field("atoms", &self.atoms)
            .field("density", &self.density)
            .field("mass", &self.mass)
            .finish()
    }
}

fn quad() -> QuadOptions {
    QuadOptions::with_rel_tol(1e-13)
}

/// `t^n` at `gap`, with `t^0 = 1` also at `t = 0`.
pub fn pow_t(gap: Gap, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else {
        (n as f64 * gap.ln_t()).exp()
    }
}

/// Radii `1 - 2^{-m}` for `m = 0..=depth`.
pub fn dyadic_ladder(depth: u32) -> Vec<Gap> {
    (0..=depth).map(|m| Gap::dyadic(m as f64)).collect()
}

/// Default Carleson ladder depth.
pub const CARLESON_DEPTH: u32 = 24;

impl RadialMeasure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>) -> Result<Self> {
        for a in &atoms {
            if !(a.w > 0.0 && a.w.is_finite()) || !(a.gap.u >= 0.0 && a.gap.u.is_finite()) {
                return Err(Error::Construction(format!("atom at t={} with weight {} is invalid", a.t(), a.w)));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.gap.u.total_cmp(&b.gap.u));
        let atom_mass: f64 = atoms.iter().map(|a| a.w).sum();
        let density_mass = match &density {
            None => 0.0,
            Some(d) => {
                if d.finite_closed_form() == Some(false) {
                    return Err(Error::Construction(format!("density {} has infinite mass", d.label())));
                }
                match integrate_gap_tail(|g| d.mass_du(g), 0.0, &quad()) {
                    Ok(m) if m.is_finite() => m,
                    Ok(_) | Err(Error::Divergent(_)) => {
                        return Err(Error::Construction(format!("density {} has infinite mass", d.label())))
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let mut parts: Vec<String> = Vec::new();
        if !atoms.is_empty() {
            parts.push(if atoms.len() == 1 {
                format!("delta_{}", atoms[0].t())
            } else {
                format!("{} atoms", atoms.len())
            });
        }
        if let Some(d) = &density {
            parts.push(d.label());
        }
        let label = if parts.is_empty() { "zero".into() } else { parts.join("+") };
        let tail_closed_form: Option<TailFn> = match &density {
            Some(Density::PowerLog { s, gamma }) if *gamma == 0.0 && atoms.is_empty() => {
                let s = *s;
                Some(Arc::new(move |g: Gap| (-(s + 1.0) * g.u).exp() / (s + 1.0)))
            }
            _ => None,
        };
        Ok(RadialMeasure {
            atoms,
            density,
            tail_closed_form,
            mass: atom_mass + density_mass,
            label,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn lebesgue() -> Self {
        Self::power_density(0.0).expect("lebesgue measure is finite")
    }

    pub fn dirac(t: f64) -> Result<Self> {
        Self::atoms(&[(t, 1.0)])
    }

    pub fn atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        for &(t, _) in pairs {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::Domain(format!("atom position {t} outside [0,1)")));
            }
        }
        Self::new(
            pairs
                .iter()
                .map(|&(t, w)| Atom {
                    gap: Gap::from_t(t),
                    w,
                })
                .collect(),
            None,
        )
    }

    /// Density `(1-t)^s`.
    pub fn power_density(s: f64) -> Result<Self> {
        Self::power_log_density(s, 0.0)
    }

    /// Density `(1-t)^s log^γ(e/(1-t))`.
    pub fn power_log_density(s: f64, gamma: f64) -> Result<Self> {
        Self::new(Vec::new(), Some(Density::PowerLog { s, gamma }))
    }

    /// Atoms at `1 - 2^{-k}` with weights `ratio^k`, `k = 1..=count`.
    pub fn atom_ladder(count: u32, ratio: f64) -> Result<Self> {
        Self::new(
            (1..=count)
                .map(|k| Atom {
                    gap: Gap::dyadic(k as f64),
                    w: ratio.powi(k as i32),
                })
                .collect(),
            None,
        )
        .map(|m| m.with_label(format!("atom_ladder({count},{ratio})")))
    }

    pub fn from_spec(spec: &MeasureSpec) -> Result<Self> {
        let mut atoms = Vec::with_capacity(spec.atoms.len());
        for &[t, w] in &spec.atoms {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::Domain(format!("atom position {t} outside [0,1)")));
            }
            atoms.push(Atom { gap: Gap::from_t(t), w });
        }
        let density = spec.density.map(|d| match d {
            DensitySpec::PowerLog { s, gamma } => Density::PowerLog { s, gamma },
        });
        let m = Self::new(atoms, density)?;
        Ok(match &spec.label {
            Some(l) => m.with_label(l.clone()),
            None => m,
        })
    }

    /// Best-effort descriptor; custom densities are dropped.
    pub fn to_spec(&self) -> MeasureSpec {
        MeasureSpec {
            atoms: self.atoms.iter().map(|a| [a.t(), a.w]).collect(),
            density: match &self.density {
                Some(Density::PowerLog { s, gamma }) => Some(DensitySpec::PowerLog { s: *s, gamma: *gamma }),
                _ => None,
            },
            label: Some(self.label.clone()),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Attach a closed-form tail `t ↦ μ([t,1))`, verified against summation
    /// and quadrature to `1e-8` relative on the dyadic grid `m <= 20`.
    pub fn with_tail_closed_form(mut self, f: TailFn) -> Result<Self> {
        for g in dyadic_ladder(20) {
            let computed = self.tail_computed(g)?;
            let claimed = f(g);
            if (claimed - computed).abs() > 1e-8 * computed.abs().max(1e-300) {
                return Err(Error::Construction(format!(
                    "closed-form tail {claimed:e} disagrees with {computed:e} at t = {}",
                    g.t()
                )));
            }
        }
        self.tail_closed_form = Some(f);
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn atom_list(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn has_tail_closed_form(&self) -> bool {
        self.tail_closed_form.is_some()
    }

    /// `∫ φ dμ` for `φ ≥ 0` given in the gap variable.
    pub fn integrate<F: Fn(Gap) -> f64>(&self, phi: F) -> Result<f64> {
        let mut v: f64 = self.atoms.iter().map(|a| a.w * phi(a.gap)).sum();
        if let Some(d) = &self.density {
            v += integrate_gap_tail(|g| phi(g) * d.mass_du(g), 0.0, &quad())?;
        }
        Ok(v)
    }

    /// `∫ φ dμ` with `φ` given through its logarithm, for integrands whose
    /// factors overflow or underflow separately.
    pub fn integrate_ln<F: Fn(Gap) -> f64>(&self, ln_phi: F) -> Result<f64> {
        let mut v: f64 = self.atoms.iter().map(|a| a.w * ln_phi(a.gap).exp()).sum();
        if let Some(d) = &self.density {
            v += integrate_gap_tail(|g| (ln_phi(g) + d.ln_mass_du(g)).exp(), 0.0, &quad())?;
        }
        Ok(v)
    }

    /// `∫ φ/(1-t)^k dμ` from `ln φ`; unlike [`Self::integrate_ln`] the
    /// factor `(1-t)^{-k}` does not cancel against the density at large gaps.
    pub fn integrate_ln_tilted<F: Fn(Gap) -> f64>(&self, k: f64, ln_phi: F) -> Result<f64> {
        let mut v: f64 = self.atoms.iter().map(|a| a.w * (ln_phi(a.gap) + k * a.gap.u).exp()).sum();
        if let Some(d) = &self.density {
            v += integrate_gap_tail(|g| (ln_phi(g) + d.ln_tilted_mass_du(g, k)).exp(), 0.0, &quad())?;
        }
        Ok(v)
    }

    fn moment_uncached(&self, n: u64) -> Result<f64> {
        self.integrate(|g| pow_t(g, n))
    }

    /// `μ_n = ∫ t^n dμ`.
    pub fn moment(&self, n: u64) -> Result<f64> {
        if let Some(&v) = self.cache.read().expect("moment cache poisoned").get(&n) {
            return Ok(v);
        }
        let v = self.moment_uncached(n)?;
        self.cache.write().expect("moment cache poisoned").insert(n, v);
        Ok(v)
    }

    /// `μ_{n+k}`, the Hankel matrix entry.
    pub fn hankel_entry(&self, n: u64, k: u64) -> Result<f64> {
        self.moment(n + k)
    }

    /// `Σ w_i t_i^n φ(t_i) + ∫ t^n φ(t) p(t) dt`; a divergent integral is
    /// reported under `label`.
    pub fn weighted_moment<F: Fn(Gap) -> f64>(&self, n: u64, phi: F, label: &str) -> Result<f64> {
        self.integrate(|g| pow_t(g, n) * phi(g)).map_err(|e| match e {
            Error::Divergent(m) => Error::Divergent(format!("{label}: {m}")),
            other => other,
        })
    }

    fn tail_computed(&self, gap: Gap) -> Result<f64> {
        let mut v: f64 = self.atoms.iter().filter(|a| a.gap.u >= gap.u).map(|a| a.w).sum();
        if let Some(d) = &self.density {
            v += integrate_gap_tail(|g| d.mass_du(g), gap.u, &quad())?;
        }
        Ok(v)
    }

    /// `μ([t,1))` at the radius given by `gap`.
    pub fn tail_gap(&self, gap: Gap) -> Result<f64> {
        match &self.tail_closed_form {
            Some(f) => Ok(f(gap)),
            None => self.tail_computed(gap),
        }
    }

    /// `μ([t,1))` for `t ∈ [0,1)`.
    pub fn tail(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("tail at t = {t}, outside [0,1)")));
        }
        self.tail_gap(Gap::from_t(t))
    }

    /// `sup` over `grid` of `tail(t)·log^γ(e/(1-t))/(1-t)^s`.
    pub fn carleson_sup(&self, q: &CarlesonQuery) -> Result<LadderSup> {
        q.validate()?;
        let (gamma, s) = (q.gamma, q.s);
        self.tail_ladder(&q.grid, |g, tail| {
            if tail <= 0.0 {
                0.0
            } else {
                (tail.ln() + gamma * g.log_e_over_gap().ln() + s * g.u).exp()
            }
        })
    }

    /// Ladder of `quantity(t, μ([t,1)))` with its trend.
    pub fn tail_ladder<F: Fn(Gap, f64) -> f64>(&self, grid: &[Gap], quantity: F) -> Result<LadderSup> {
        let mut points = Vec::with_capacity(grid.len());
        for &g in grid {
            points.push((g.u, quantity(g, self.tail_gap(g)?)));
        }
        Ok(LadderSup::from_points(points))
    }

    /// `dτ = dμ/(1-t)^γ`.
    pub fn lemma25_transform(&self, gamma: f64) -> Result<RadialMeasure> {
        if !(gamma > 0.0) {
            return Err(Error::Precondition(format!("transform exponent must be positive, got {gamma}")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                gap: a.gap,
                w: a.w * (gamma * a.gap.u).exp(),
            })
            .collect();
        let density = self.density.as_ref().map(|d| match d {
            Density::PowerLog { s, gamma: lg } => Density::PowerLog { s: s - gamma, gamma: *lg },
            Density::Custom { name, ln_mass_du } => {
                let inner = ln_mass_du.clone();
                Density::Custom {
                    name: format!("{name}/(1-t)^{gamma}"),
                    ln_mass_du: Arc::new(move |g: Gap| inner(g) + gamma * g.u),
                }
            }
        });
        let label = format!("{}/(1-t)^{gamma}", self.label);
        RadialMeasure::new(atoms, density).map(|m| m.with_label(label))
    }

    /// CSV table with columns `n,moment`.
    pub fn write_moment_table<W: Write>(&self, ns: &[u64], w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "moment"])?;
        for &n in ns {
            wr.write_record([n.to_string(), format!("{:e}", self.moment(n)?)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonQuery {
    pub gamma: f64,
    pub s: f64,
    pub grid: Vec<Gap>,
}

impl CarlesonQuery {
    pub fn new(gamma: f64, s: f64) -> Self {
        CarlesonQuery {
            gamma,
            s,
            grid: dyadic_ladder(CARLESON_DEPTH),
        }
    }

    pub fn with_depth(gamma: f64, s: f64, depth: u32) -> Self {
        CarlesonQuery {
            gamma,
            s,
            grid: dyadic_ladder(depth),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return Err(Error::Precondition(format!("Carleson power must be positive, got {}", self.s)));
        }
        if self.grid.is_empty() || self.grid.windows(2).any(|p| !(p[1].u > p[0].u)) {
            return Err(Error::Precondition("Carleson grid must be nonempty and strictly increasing".into()));
        }
        Ok(())
    }
}

/// Supremum of a quantity over a ladder, where it was attained, and the
/// trend over the deepest half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSup {
    pub sup: f64,
    /// Scale value (`u` or `ln n`) at the supremum.
    pub attained_at: f64,
    pub trend: Trend,
    pub points: Vec<(f64, f64)>,
}

impl LadderSup {
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        let (mut sup, mut at) = (f64::NEG_INFINITY, f64::NAN);
        for &(x, q) in &points {
            if q > sup || q.is_nan() {
                sup = q;
                at = x;
            }
        }
        let trend = trend_test(&points);
        LadderSup {
            sup,
            attained_at: at,
            trend,
            points,
        }
    }

    pub fn verdict(&self) -> Verdict {
        self.trend.verdict
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma25Report {
    pub measure: String,
    pub beta: f64,
    pub gamma: f64,
    /// `τ = μ/(1-t)^γ` tested as a β-Carleson measure.
    pub transformed: LadderSup,
    /// `μ` tested as a (β+γ)-Carleson measure.
    pub original: LadderSup,
    pub agree: bool,
}

pub fn lemma25_equivalence_check(mu: &RadialMeasure, beta: f64, gamma: f64, depth: u32) -> Result<Lemma25Report> {
    let tau = mu.lemma25_transform(gamma)?;
    let transformed = tau.carleson_sup(&CarlesonQuery::with_depth(0.0, beta, depth))?;
    let original = mu.carleson_sup(&CarlesonQuery::with_depth(0.0, beta + gamma, depth))?;
    let agree = transformed.verdict() == original.verdict() && transformed.verdict() != Verdict::Inconclusive;
    Ok(Lemma25Report {
        measure: mu.label.clone(),
        beta,
        gamma,
        transformed,
        original,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tilted_integrals() {
        let leb = RadialMeasure::lebesgue();
        // ∫ (1-t)^{-1/2} dt = 2
        assert_relative_eq!(leb.integrate_ln_tilted(1.0, |g| -0.5 * g.u).unwrap(), 2.0, max_relative = 1e-10);
        // ∫ log(e/(1-t))/(1-t) dt diverges without losing precision on the way
        assert!(matches!(
            leb.integrate_ln_tilted(1.0, |g| g.log_e_over_gap().ln()),
            Err(Error::Divergent(_))
        ));
        let d = RadialMeasure::dirac(0.5).unwrap();
        assert_relative_eq!(d.integrate_ln_tilted(1.0, |_| 0.0).unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn moment_examples() {
        let leb = RadialMeasure::lebesgue();
        for n in [0u64, 1, 5, 100, 4096] {
            assert_relative_eq!(leb.moment(n).unwrap(), 1.0 / (n as f64 + 1.0), max_relative = 1e-12);
        }
        let d = RadialMeasure::dirac(0.5).unwrap();
        assert_relative_eq!(d.moment(10).unwrap(), 2f64.powi(-10), max_relative = 1e-14);
        let p1 = RadialMeasure::power_density(1.0).unwrap();
        for n in [0u64, 3, 1000] {
            let nf = n as f64;
            assert_relative_eq!(p1.moment(n).unwrap(), 1.0 / ((nf + 1.0) * (nf + 2.0)), max_relative = 1e-12);
        }
    }

    #[test]
    fn moment_cache_is_transparent() {
        let m = RadialMeasure::power_log_density(0.5, 1.0).unwrap();
        let a = m.moment(777).unwrap();
        let b = m.moment(777).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), m.moment_uncached(777).unwrap().to_bits());
    }

    #[test]
    fn tail_examples() {
        assert_relative_eq!(RadialMeasure::lebesgue().tail(0.75).unwrap(), 0.25, max_relative = 1e-14);
        let d = RadialMeasure::dirac(0.5).unwrap();
        assert_eq!(d.tail(0.6).unwrap(), 0.0);
        assert_eq!(d.tail(0.4).unwrap(), 1.0);
        assert_eq!(d.tail(0.5).unwrap(), 1.0);
        let p2 = RadialMeasure::power_density(2.0).unwrap();
        assert_relative_eq!(p2.tail(0.3).unwrap(), 0.7f64.powi(3) / 3.0, max_relative = 1e-13);
        // quadrature route agrees with the closed form
        assert_relative_eq!(p2.tail_computed(Gap::from_t(0.3)).unwrap(), 0.7f64.powi(3) / 3.0, max_relative = 1e-11);
        assert!(d.tail(1.0).is_err());
    }

    #[test]
    fn hankel_examples() {
        let leb = RadialMeasure::lebesgue();
        assert_relative_eq!(leb.hankel_entry(0, 0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(leb.hankel_entry(2, 3).unwrap(), 1.0 / 6.0, max_relative = 1e-13);
        assert_relative_eq!(RadialMeasure::dirac(0.5).unwrap().hankel_entry(1, 1).unwrap(), 0.25);
    }

    #[test]
    fn carleson_examples() {
        let leb = RadialMeasure::lebesgue();
        let r = leb.carleson_sup(&CarlesonQuery::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(r.sup, 1.0, max_relative = 1e-12);
        assert!(r.trend.slope.abs() < 1e-9);
        assert_eq!(r.verdict(), Verdict::Bounded);
        let r = leb.carleson_sup(&CarlesonQuery::new(0.0, 2.0)).unwrap();
        assert_eq!(r.verdict(), Verdict::Unbounded);
        let p2 = RadialMeasure::power_density(2.0).unwrap();
        let r = p2.carleson_sup(&CarlesonQuery::new(0.0, 3.0)).unwrap();
        assert_relative_eq!(r.sup, 1.0 / 3.0, max_relative = 1e-12);
        assert_eq!(r.verdict(), Verdict::Bounded);
    }

    #[test]
    fn transform_examples() {
        let p2 = RadialMeasure::power_density(2.0).unwrap();
        let tau = p2.lemma25_transform(1.0).unwrap();
        assert_relative_eq!(tau.tail(0.5).unwrap(), 0.125, max_relative = 1e-12);
        let d = RadialMeasure::dirac(0.5).unwrap().lemma25_transform(1.0).unwrap();
        assert_relative_eq!(d.mass(), 2.0, max_relative = 1e-14);
        assert!(matches!(RadialMeasure::lebesgue().lemma25_transform(1.0), Err(Error::Construction(_))));
    }

    #[test]
    fn lemma25_examples() {
        let rep = lemma25_equivalence_check(&RadialMeasure::power_density(2.0).unwrap(), 2.0, 1.0, 24).unwrap();
        assert!(rep.agree);
        assert_eq!(rep.original.verdict(), Verdict::Bounded);
        let rep = lemma25_equivalence_check(&RadialMeasure::power_density(0.5).unwrap(), 1.0, 1.0, 24).unwrap();
        assert!(rep.agree);
        assert_eq!(rep.original.verdict(), Verdict::Unbounded);
        let rep = lemma25_equivalence_check(&RadialMeasure::dirac(0.0).unwrap(), 3.0, 2.0, 24).unwrap();
        assert!(rep.agree);
    }

    #[test]
    fn weighted_moment_examples() {
        let leb = RadialMeasure::lebesgue();
        assert_relative_eq!(leb.weighted_moment(7, |_| 1.0, "one").unwrap(), leb.moment(7).unwrap(), max_relative = 1e-13);
        assert_relative_eq!(
            leb.weighted_moment(0, |g| g.log_e_over_gap(), "log").unwrap(),
            2.0,
            max_relative = 1e-12
        );
        let d = RadialMeasure::dirac(0.5).unwrap();
        let w_tilde = 0.5 * 3f64.ln();
        assert_relative_eq!(
            d.weighted_moment(1, |_| w_tilde + 1.0, "omega").unwrap(),
            0.5 * (w_tilde + 1.0),
            max_relative = 1e-14
        );
        let heavy = RadialMeasure::power_log_density(-1.0, -2.0).unwrap();
        let err = heavy.weighted_moment(0, |g| g.log_e_over_gap(), "criterion X").unwrap_err();
        assert!(matches!(err, Error::Divergent(ref m) if m.contains("criterion X")));
    }

    #[test]
    fn construction_rejects_infinite_mass() {
        assert!(RadialMeasure::power_density(-1.0).is_err());
        assert!(RadialMeasure::power_log_density(-1.0, -0.5).is_err());
        assert!(RadialMeasure::power_log_density(-1.0, -2.0).is_ok());
        assert!(RadialMeasure::atoms(&[(1.0, 1.0)]).is_err());
        let custom = RadialMeasure::new(
            Vec::new(),
            Some(Density::Custom {
                name: "1/(1-t)".into(),
                ln_mass_du: Arc::new(|_| 0.0),
            }),
        );
        assert!(custom.is_err());
    }

    #[test]
    fn closed_form_tail_is_verified() {
        let leb = RadialMeasure::lebesgue();
        assert!(leb.clone().with_tail_closed_form(Arc::new(|g: Gap| g.x())).is_ok());
        assert!(leb.with_tail_closed_form(Arc::new(|g: Gap| 1.01 * g.x())).is_err());
    }

    #[test]
    fn spec_json() {
        let j = r#"{"atoms":[[0.5,1.0]],"density":{"kind":"power_log","s":2.0,"gamma":1.0}}"#;
        let spec: MeasureSpec = serde_json::from_str(j).unwrap();
        let m = RadialMeasure::from_spec(&spec).unwrap();
        assert_eq!(m.atom_list().len(), 1);
        assert!(m.mass() > 1.0);
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"atomz":[]}"#).is_err());
    }

    #[test]
    fn moment_table_csv() {
        let mut buf = Vec::new();
        RadialMeasure::lebesgue().write_moment_table(&[0, 1, 3], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut rd = csv::Reader::from_reader(s.as_bytes());
        let rows: Vec<(u64, f64)> = rd.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].0, 3);
        assert_relative_eq!(rows[2].1, 0.25, max_relative = 1e-12);
    }
}
