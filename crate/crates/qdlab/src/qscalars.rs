//! q-number arithmetic with a regular q → 1 limit.
//!
//! All deformed scalars are evaluated through the summed form
//! `[n]_q = Σ_{k=0}^{n−1} q^{n−1−2k}`, never the quotient
//! `(qⁿ−q⁻ⁿ)/(q−q⁻¹)`, so q = 1 is an ordinary point of every formula.

use num_rational::Rational64;

use crate::{Error, Result};

/// Deformation parameter.
///
/// `hbar_tag` records the purely formal ħ with `q = e^{πiħ}`; it is carried
/// for bookkeeping and never used numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam {
    q: f64,
    pub hbar_tag: f64,
}

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Config(format!("q must be a positive real, got {q}")));
        }
        Ok(QParam {
            q,
            hbar_tag: q.ln() / std::f64::consts::PI,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_classical(&self) -> bool {
        self.q == 1.0
    }

    /// The parameter `q^d` attached to a root of length-square `2d`.
    pub fn root_param(&self, d: i64) -> QParam {
        QParam {
            q: self.q.powi(d as i32),
            hbar_tag: self.hbar_tag * d as f64,
        }
    }

    /// `q^r` for a rational exponent.
    pub fn pow_rational(&self, r: Rational64) -> f64 {
        if self.q == 1.0 {
            return 1.0;
        }
        let exp = *r.numer() as f64 / *r.denom() as f64;
        self.q.powf(exp)
    }

    /// The balanced q-integer `[n]_q`, odd in `n`.
    pub fn q_integer(&self, n: i64) -> f64 {
        let m = n.unsigned_abs();
        let mut sum = 0.0;
        for k in 0..m {
            let e = (m - 1) as i64 - 2 * k as i64;
            sum += self.q.powi(e as i32);
        }
        if n < 0 {
            -sum
        } else {
            sum
        }
    }

    /// `[n]_q! = [1][2]…[n]`, with `[0]! = 1`.
    pub fn q_factorial(&self, n: u64) -> f64 {
        (1..=n).map(|k| self.q_integer(k as i64)).product()
    }

    /// Gaussian binomial `[n choose k]_q`.
    pub fn q_binomial(&self, n: u64, k: u64) -> f64 {
        assert!(k <= n);
        self.q_factorial(n) / (self.q_factorial(k) * self.q_factorial(n - k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_limit() {
        let qp = QParam::new(1.0).unwrap();
        assert_eq!(qp.q_integer(5), 5.0);
        assert_eq!(qp.q_factorial(4), 24.0);
        assert_eq!(qp.q_integer(0), 0.0);
    }

    #[test]
    fn deformed_values() {
        let qp = QParam::new(2.0).unwrap();
        // [3]_2 = 4 + 1 + 1/4
        assert!((qp.q_integer(3) - 5.25).abs() < 1e-15);
        // [1][2] = 1 * (2 + 1/2)
        assert!((qp.q_factorial(2) - 2.5).abs() < 1e-15);
        assert_eq!(qp.q_factorial(0), 1.0);
    }

    #[test]
    fn odd_in_n_and_q_inverse_symmetry() {
        for &q in &[0.3, 0.9, 1.0, 1.7, 4.0] {
            let qp = QParam::new(q).unwrap();
            let qinv = QParam::new(1.0 / q).unwrap();
            for n in -6..=6 {
                assert!((qp.q_integer(n) + qp.q_integer(-n)).abs() < 1e-12);
                assert!((qp.q_integer(n) - qinv.q_integer(n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn approach_to_classical_is_linear_in_q_minus_1() {
        // |[n]_q − n| ≲ C |q−1| n² near q = 1
        for &eps in &[1e-3, 1e-4, 1e-5] {
            let qp = QParam::new(1.0 + eps).unwrap();
            for n in 1..=8i64 {
                let err = (qp.q_integer(n) - n as f64).abs();
                assert!(err <= 1.1 * eps * (n * n) as f64, "n={n} eps={eps} err={err}");
            }
        }
    }

    #[test]
    fn rejects_bad_q() {
        assert!(QParam::new(0.0).is_err());
        assert!(QParam::new(-2.0).is_err());
        assert!(QParam::new(f64::NAN).is_err());
    }
}
