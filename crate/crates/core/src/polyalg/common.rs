//! Shared-root detection: numerical pairing of root sets backed by an exact
//! resultant.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use super::poly::{rational_to_f64, Rational, RationalPolynomial};
use super::roots::complex_roots;
use crate::error::{Error, Result};

/// Determinant of the Sylvester matrix of `p` and `q`.
pub fn resultant(p: &RationalPolynomial, q: &RationalPolynomial) -> Result<Rational> {
    let m = p.degree().ok_or(Error::ZeroPolynomial)?;
    let n = q.degree().ok_or(Error::ZeroPolynomial)?;
    if m == 0 && n == 0 {
        return Ok(Rational::one());
    }
    let size = m + n;
    let mut a = vec![vec![Rational::zero(); size]; size];
    // rows hold coefficients highest power first
    for row in 0..n {
        for k in 0..=m {
            a[row][row + k] = p.coeff(m - k);
        }
    }
    for row in 0..m {
        for k in 0..=n {
            a[n + row][row + k] = q.coeff(n - k);
        }
    }
    Ok(determinant(a))
}

fn determinant(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= &pv;
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pv;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

#[derive(Debug, Clone, Serialize)]
pub struct SharedRoot {
    pub left: [f64; 2],
    pub right: [f64; 2],
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommonRoots {
    /// Root pairs closer than the tolerance.
    pub shared: Vec<SharedRoot>,
    /// Exact resultant; nonzero certifies that there is no common divisor.
    #[serde(serialize_with = "ser_rational")]
    pub resultant: Rational,
    /// Degree of the exact monic gcd.
    pub gcd_degree: usize,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(rational_to_f64(r))
}

impl CommonRoots {
    pub fn coprime(&self) -> bool {
        self.shared.is_empty() && !self.resultant.is_zero()
    }
}

/// Pairs of roots of `p` and `q` within `tol` of each other, plus the exact
/// resultant and gcd degree as a secondary certificate.
pub fn common_roots(
    p: &RationalPolynomial,
    q: &RationalPolynomial,
    tol: f64,
) -> Result<CommonRoots> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let roots_of = |r: &RationalPolynomial| -> Result<Vec<Complex64>> {
        if r.degree() == Some(0) {
            Ok(Vec::new())
        } else {
            Ok(complex_roots(r)?.roots.iter().map(|x| x.value()).collect())
        }
    };
    let rp = roots_of(p)?;
    let rq = roots_of(q)?;
    let mut shared = Vec::new();
    for a in &rp {
        for b in &rq {
            let d = (a - b).norm();
            if d <= tol {
                shared.push(SharedRoot {
                    left: [a.re, a.im],
                    right: [b.re, b.im],
                    distance: d,
                });
            }
        }
    }
    let gcd_degree = p.gcd(q).degree().unwrap_or(0);
    Ok(CommonRoots {
        shared,
        resultant: resultant(p, q)?,
        gcd_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::poly::int;

    #[test]
    fn resultant_of_linear_factors() {
        // res(x - a, x - b) = a - b
        let p = RationalPolynomial::from_i64(&[-2, 1]);
        let q = RationalPolynomial::from_i64(&[-5, 1]);
        assert_eq!(resultant(&p, &q).unwrap(), int(-3));
    }

    #[test]
    fn shared_factor_gives_zero_resultant() {
        let f = RationalPolynomial::from_i64(&[-1, 1]);
        let p = &f * &RationalPolynomial::from_i64(&[1, 0, 1]);
        let q = &f * &RationalPolynomial::from_i64(&[3, 1]);
        let c = common_roots(&p, &q, 1e-8).unwrap();
        assert!(c.resultant.is_zero());
        assert_eq!(c.gcd_degree, 1);
        assert_eq!(c.shared.len(), 1);
        assert!(!c.coprime());
    }

    #[test]
    fn distinct_linear_factors() {
        let p = RationalPolynomial::from_i64(&[-1, 1]);
        let q = RationalPolynomial::from_i64(&[1, 1]);
        let c = common_roots(&p, &q, 1e-8).unwrap();
        assert!(c.shared.is_empty());
        assert!(c.coprime());
    }
}
