//! The binomial-type factor `c_n = Γ(n+1+α)/(Γ(n+1)Γ(α+1))`, the Taylor
//! coefficients of `(1-z)^{-(α+1)}`.

use crate::error::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must exceed -1, got {alpha}")));
    }
    Ok(())
}

/// `c_n` by the recurrence `c_n = c_{n-1}(n+α)/n`, `c_0 = 1`.
pub fn gamma_coefficient(n: u64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut c = 1.0;
    for k in 1..=n {
        let k = k as f64;
        c *= (k + alpha) / k;
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaWeightTable {
    pub alpha: f64,
    pub c: Vec<f64>,
}

impl GammaWeightTable {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut c = Vec::with_capacity(n + 1);
        c.push(1.0);
        for k in 1..=n {
            let kf = k as f64;
            c.push(c[k - 1] * (kf + alpha) / kf);
        }
        Ok(GammaWeightTable { alpha, c })
    }

    pub fn get(&self, n: usize) -> f64 {
        self.c[n]
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn examples() {
        for n in [0u64, 1, 7, 1000] {
            assert_eq!(gamma_coefficient(n, 0.0).unwrap(), 1.0);
            assert_relative_eq!(gamma_coefficient(n, 1.0).unwrap(), n as f64 + 1.0, max_relative = 1e-13);
        }
        assert_relative_eq!(gamma_coefficient(2, 0.5).unwrap(), 1.875, max_relative = 1e-15);
        assert!(gamma_coefficient(3, -1.0).is_err());
    }

    #[test]
    fn table_matches_pointwise_recurrence() {
        let t = GammaWeightTable::new(64, 0.3).unwrap();
        assert_eq!(t.get(0), 1.0);
        for n in [1usize, 10, 64] {
            assert_relative_eq!(t.get(n), gamma_coefficient(n as u64, 0.3).unwrap(), max_relative = 1e-14);
        }
    }
}
