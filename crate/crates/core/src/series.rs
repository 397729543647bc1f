//! Truncated Taylor series, Hadamard products, the smooth dyadic block
//! polynomials `V_n` and polynomial norms on the unit circle.

use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Gap;

/// Coefficients `a_0..a_N` of `f(z) = Σ a_k z^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaylorSeries {
    coeffs: Vec<f64>,
}

impl TaylorSeries {
    pub fn from_coefficients(coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        TaylorSeries { coeffs }
    }

    pub fn try_from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("coefficient a_{k} is not finite")));
        }
        Ok(Self::from_coefficients(coeffs))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_coefficients(vec![0.0; n + 1])
    }

    pub fn constant(c: f64) -> Self {
        Self::from_coefficients(vec![c])
    }

    pub fn monomial(k: usize, c: f64) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Self::from_coefficients(v)
    }

    /// `a_k = f(k)` for `k = 0..=n`.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::from_coefficients((0..=n).map(f).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Truncation order `N`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the last nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0.0)
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Value at the real radius described by `gap`.
    pub fn eval_gap(&self, gap: Gap) -> f64 {
        self.eval_real(gap.t())
    }

    pub fn derivative(&self) -> TaylorSeries {
        if self.coeffs.len() == 1 {
            return TaylorSeries::zero(0);
        }
        TaylorSeries::from_coefficients(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// `c + ∫_0^z f`.
    pub fn antiderivative(&self, c: f64) -> TaylorSeries {
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(c);
        v.extend(self.coeffs.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        TaylorSeries::from_coefficients(v)
    }

    pub fn hadamard(&self, other: &TaylorSeries) -> TaylorSeries {
        TaylorSeries::from_coefficients(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).collect())
    }

    pub fn truncate(&self, n: usize) -> TaylorSeries {
        let mut v: Vec<f64> = self.coeffs.iter().take(n + 1).copied().collect();
        v.resize(n + 1, 0.0);
        TaylorSeries::from_coefficients(v)
    }

    pub fn scale(&self, s: f64) -> TaylorSeries {
        TaylorSeries::from_coefficients(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Coefficientwise sum, padded to the longer truncation.
    pub fn add(&self, other: &TaylorSeries) -> TaylorSeries {
        let n = self.coeffs.len().max(other.coeffs.len());
        TaylorSeries::from_coefficients(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + other.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.coeffs).expect("finite coefficients serialise")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::try_from_coefficients(serde_json::from_str(s)?)
    }

    /// CSV with columns `index,coefficient`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "coefficient"])?;
        for (k, c) in self.coeffs.iter().enumerate() {
            wr.write_record([k.to_string(), format!("{c:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `index,coefficient` rows; missing indices are zero.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut v = Vec::new();
        for rec in rd.deserialize::<(usize, f64)>() {
            let (k, c) = rec?;
            if k >= v.len() {
                v.resize(k + 1, 0.0);
            }
            v[k] = c;
        }
        Self::try_from_coefficients(v)
    }
}

/// Smooth cutoff: 1 on `s <= 1`, 0 on `s >= 2`, decreasing in between.
pub fn psi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        // h(2-s)/(h(2-s)+h(s-1)) rewritten to avoid 0/0 near the ends
        1.0 / (1.0 + (1.0 / (2.0 - s) - 1.0 / (s - 1.0)).exp())
    }
}

/// `φ(s) = ψ(s/2) - ψ(s)`, supported on `[1, 4]`.
pub fn phi(s: f64) -> f64 {
    psi(0.5 * s) - psi(s)
}

/// `V_n(z) = Σ φ(k/2^{n-1}) z^k` for `n >= 1`, and `V_0 = 1 + z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnPolynomial {
    pub n: u32,
    /// Exponent of the first stored coefficient.
    pub offset: usize,
    pub coeffs: Vec<f64>,
}

impl VnPolynomial {
    pub fn new(n: u32) -> Self {
        if n == 0 {
            return VnPolynomial {
                n,
                offset: 0,
                coeffs: vec![1.0, 1.0],
            };
        }
        let lo = 1usize << (n - 1);
        let hi = (1usize << (n + 1)) - 1;
        let scale = lo as f64;
        let coeffs = (lo..=hi).map(|k| phi(k as f64 / scale)).collect();
        VnPolynomial { n, offset: lo, coeffs }
    }

    /// Highest exponent in the support.
    pub fn support_end(&self) -> usize {
        self.offset + self.coeffs.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        if k < self.offset {
            0.0
        } else {
            self.coeffs.get(k - self.offset).copied().unwrap_or(0.0)
        }
    }

    pub fn to_series(&self) -> TaylorSeries {
        let mut v = vec![0.0; self.support_end() + 1];
        v[self.offset..].copy_from_slice(&self.coeffs);
        TaylorSeries::from_coefficients(v)
    }

    /// Coefficients of `V_n ∗ f` on the support band (missing `a_k` are zero).
    pub fn hadamard_band(&self, f: &TaylorSeries) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * f.coeffs().get(self.offset + j).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn hadamard(&self, f: &TaylorSeries) -> TaylorSeries {
        let band = self.hadamard_band(f);
        let mut v = vec![0.0; self.support_end() + 1];
        v[self.offset..].copy_from_slice(&band);
        TaylorSeries::from_coefficients(v).truncate(f.truncation().min(self.support_end()))
    }
}

/// Default circle sampling density factor.
pub const SAMPLING_FACTOR: usize = 8;

/// Minimum sample count accepted for a polynomial of the given degree.
pub fn min_samples(degree: usize) -> usize {
    SAMPLING_FACTOR * (degree + 1)
}

/// `P(e^{2πij/M})` for `j = 0..M`.
pub fn circle_values(coeffs: &[f64], m: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    for (k, &c) in coeffs.iter().enumerate() {
        buf[k % m] += c;
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(m).process(&mut buf);
    buf
}

fn abs_on_circle(coeffs: &[f64], theta: f64) -> f64 {
    let z = Complex64::from_polar(1.0, theta);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleNorm {
    pub value: f64,
    pub samples: usize,
}

/// `max |P|` on the unit circle for the polynomial with coefficients
/// `coeffs`: sampled at `m` points, then polished by golden-section search
/// around the largest samples.
pub fn sup_norm_coeffs(coeffs: &[f64], m: usize) -> Result<CircleNorm> {
    let deg = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    if m < min_samples(deg) {
        return Err(Error::Precondition(format!(
            "sup norm needs at least {} samples for degree {deg}, got {m}",
            min_samples(deg)
        )));
    }
    if coeffs.iter().all(|&c| c >= 0.0) {
        // nonnegative coefficients peak at z = 1
        return Ok(CircleNorm {
            value: coeffs.iter().sum(),
            samples: m,
        });
    }
    let vals = circle_values(coeffs, m);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| vals[j].norm().total_cmp(&vals[i].norm()));
    let h = std::f64::consts::TAU / m as f64;
    let mut best = vals[order[0]].norm();
    for &j in order.iter().take(4) {
        let c = j as f64 * h;
        let (mut a, mut b) = (c - h, c + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (abs_on_circle(coeffs, x1), abs_on_circle(coeffs, x2));
        for _ in 0..60 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = abs_on_circle(coeffs, x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = abs_on_circle(coeffs, x2);
            }
        }
        best = best.max(f1).max(f2);
    }
    Ok(CircleNorm { value: best, samples: m })
}

pub fn sup_norm(p: &TaylorSeries, m: usize) -> Result<CircleNorm> {
    sup_norm_coeffs(p.coeffs(), m)
}

/// `‖P‖_p` on the circle for `p ∈ {1, 2}`; `p = 1` uses the trapezoid rule
/// at `8·(deg+1)` points.
pub fn hardy_norm_coeffs(coeffs: &[f64], p: u32) -> Result<CircleNorm> {
    match p {
        2 => Ok(CircleNorm {
            value: coeffs.iter().map(|c| c * c).sum::<f64>().sqrt(),
            samples: 0,
        }),
        1 => {
            let deg = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
            let m = min_samples(deg);
            let vals = circle_values(coeffs, m);
            Ok(CircleNorm {
                value: vals.iter().map(|v| v.norm()).sum::<f64>() / m as f64,
                samples: m,
            })
        }
        _ => Err(Error::Precondition(format!("hardy_norm supports p = 1 or 2, got {p}"))),
    }
}

pub fn hardy_norm(p_: &TaylorSeries, p: u32) -> Result<CircleNorm> {
    hardy_norm_coeffs(p_.coeffs(), p)
}

/// Largest coefficient defect of `Σ_{n<=depth} V_n ∗ f` against `f`,
/// over coefficients `0..=N`. Needs `2^depth >= N`.
pub fn partition_check(f: &TaylorSeries, depth: u32) -> Result<f64> {
    let n = f.truncation();
    if depth >= 63 || (1usize << depth) < n {
        return Err(Error::Precondition(format!(
            "partition depth {depth} does not cover truncation {n} (needs 2^depth >= N)"
        )));
    }
    let mut acc = vec![0.0; n + 1];
    for j in 0..=depth {
        let v = VnPolynomial::new(j);
        for (i, c) in v.hadamard_band(f).into_iter().enumerate() {
            let k = v.offset + i;
            if k <= n {
                acc[k] += c;
            }
        }
    }
    Ok(acc
        .iter()
        .zip(f.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Empirical constant of `‖V_n ∗ P‖_∞ <= C ‖P‖_∞` over the given polynomials.
pub fn block_multiplier_constant(n: u32, polys: &[TaylorSeries]) -> Result<f64> {
    let v = VnPolynomial::new(n);
    let mut c = 0.0f64;
    for p in polys {
        let band = v.hadamard_band(p);
        let top = band.iter().rposition(|&x| x != 0.0).unwrap_or(0);
        let lhs = sup_norm_coeffs(&band, min_samples(top))?.value;
        let rhs = sup_norm(p, min_samples(p.degree()))?.value;
        if rhs > 0.0 {
            c = c.max(lhs / rhs);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn evaluate_examples() {
        let f = TaylorSeries::from_coefficients(vec![1.0, 1.0]);
        assert_relative_eq!(f.evaluate(Complex64::new(0.5, 0.0)).re, 1.5);
        let g = TaylorSeries::from_fn(40, |_| 1.0);
        let expect = 2.0 - 2f64.powi(-40);
        assert_relative_eq!(g.evaluate(Complex64::new(0.5, 0.0)).re, expect, max_relative = 1e-15);
        let v1 = VnPolynomial::new(1);
        let sum: f64 = v1.coeffs.iter().sum();
        assert_relative_eq!(v1.to_series().eval_real(1.0), sum, max_relative = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(TaylorSeries::from_coefficients(vec![1.0, 1.0]).derivative().coeffs(), &[1.0]);
        assert_eq!(TaylorSeries::monomial(2, 1.0).derivative().coeffs(), &[0.0, 2.0]);
        assert_eq!(TaylorSeries::constant(5.0).derivative().coeffs(), &[0.0]);
    }

    #[test]
    fn hadamard_examples() {
        let g = TaylorSeries::from_coefficients(vec![0.3, -1.0, 2.0]);
        assert_eq!(TaylorSeries::from_fn(5, |_| 1.0).hadamard(&g), g);
        assert!(g.hadamard(&TaylorSeries::zero(2)).coeffs().iter().all(|&c| c == 0.0));
        let v2 = VnPolynomial::new(2).hadamard(&TaylorSeries::monomial(3, 1.0));
        assert_relative_eq!(v2.coeffs()[3], phi(1.5), max_relative = 1e-15);
        assert!(v2.coeffs()[3] > 0.0 && v2.coeffs()[3] < 1.0);
    }

    #[test]
    fn psi_shape() {
        assert_eq!(psi(0.5), 1.0);
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi(2.0), 0.0);
        assert_relative_eq!(psi(1.5), 0.5, max_relative = 1e-15);
        let mut prev = 1.0;
        for k in 1..990 {
            let v = psi(1.0 + k as f64 / 1000.0);
            assert!(v <= prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn vn_examples() {
        let v0 = VnPolynomial::new(0);
        assert_eq!(v0.to_series().coeffs(), &[1.0, 1.0]);
        let v2 = VnPolynomial::new(2);
        assert_eq!((v2.offset, v2.support_end()), (2, 7));
        assert_eq!(v2.coefficient(4), 1.0);
        assert_eq!(v2.coefficient(2), 0.0);
        assert!(v2.coefficient(3) > 0.0);
        for n in 0..12 {
            assert!(VnPolynomial::new(n).coeffs.iter().all(|&c| (0.0..=1.0).contains(&c)));
        }
    }

    #[test]
    fn norms_of_simple_polynomials() {
        let zk = TaylorSeries::monomial(5, 1.0);
        assert_relative_eq!(sup_norm(&zk, 48).unwrap().value, 1.0);
        assert_relative_eq!(hardy_norm(&zk, 2).unwrap().value, 1.0);
        assert_relative_eq!(hardy_norm(&zk, 1).unwrap().value, 1.0, max_relative = 1e-13);
        let p = TaylorSeries::from_coefficients(vec![1.0, 1.0]);
        assert_relative_eq!(sup_norm(&p, 16).unwrap().value, 2.0);
        assert_relative_eq!(hardy_norm(&p, 2).unwrap().value, 2f64.sqrt());
        // ‖1+z‖_1 = (1/2π)∫|2cos(θ/2)| = 4/π
        assert_relative_eq!(hardy_norm(&p, 1).unwrap().value, 4.0 / std::f64::consts::PI, max_relative = 1e-2);
        assert!(sup_norm(&zk, 47).is_err());
        assert!(hardy_norm(&p, 3).is_err());
    }

    #[test]
    fn signed_sup_norm_is_density_stable() {
        let p = TaylorSeries::from_coefficients(vec![0.3, -1.2, 0.7, 0.25, -0.9, 0.4]);
        let m = min_samples(5);
        let a = sup_norm(&p, m).unwrap().value;
        let b = sup_norm(&p, 2 * m).unwrap().value;
        assert!((a - b).abs() < 1e-6 * b);
        let brute = (0..200_000)
            .map(|j| abs_on_circle(p.coeffs(), std::f64::consts::TAU * j as f64 / 200_000.0))
            .fold(0.0, f64::max);
        assert!(a >= brute - 1e-9);
    }

    #[test]
    fn partition_examples() {
        let f = TaylorSeries::from_coefficients(vec![1.0, 1.0]);
        assert_eq!(partition_check(&f, 1).unwrap(), 0.0);
        let ones = TaylorSeries::from_fn(100, |_| 1.0);
        assert!(partition_check(&ones, 7).unwrap() < 1e-12);
        assert!(partition_check(&ones, 6).is_err());
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let f = TaylorSeries::from_coefficients(vec![0.5, -2.0, 0.0, 1e-300]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(TaylorSeries::read_csv(&buf[..]).unwrap(), f);
        assert_eq!(TaylorSeries::from_json(&f.to_json()).unwrap(), f);
        assert!(TaylorSeries::from_json("[1.0, \"x\"]").is_err());
    }
}
