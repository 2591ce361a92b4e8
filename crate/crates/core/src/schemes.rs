//! Characteristic polynomials of the BDF, shifted BDF and weighted-and-shifted
//! BDF (WSBDF) methods, generated exactly for `q = 1..=7` and any rational
//! weight.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{int, rat, rational_to_f64, Rational, RationalPolynomial};

pub const MAX_STEPS: usize = 7;

fn check_q(q: usize) -> Result<()> {
    if (1..=MAX_STEPS).contains(&q) {
        Ok(())
    } else {
        Err(Error::StepCountOutOfRange(q))
    }
}

/// `zeta^(q-j) (zeta - 1)^j`
fn backward_term(q: usize, j: usize) -> RationalPolynomial {
    RationalPolynomial::from_i64(&[-1, 1])
        .pow(j as u32)
        .shift_up(q - j)
}

/// `a(zeta) = sum_{j=1}^{q} (1/j) zeta^(q-j) (zeta-1)^j`.
pub fn bdf_alpha(q: usize) -> Result<RationalPolynomial> {
    check_q(q)?;
    Ok((1..=q).fold(RationalPolynomial::zero(), |acc, j| {
        &acc + &backward_term(q, j).scale(&rat(1, j as i64))
    }))
}

/// Shifted BDF: `a(zeta) - sum_{j=2}^{q} 1/(j-1) zeta^(q-j) (zeta-1)^j`.
pub fn sbdf_alpha(q: usize) -> Result<RationalPolynomial> {
    let a = bdf_alpha(q)?;
    Ok((2..=q).fold(a, |acc, j| {
        &acc - &backward_term(q, j).scale(&rat(1, j as i64 - 1))
    }))
}

/// A `q`-step method given by its characteristic polynomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scheme {
    pub q: usize,
    #[serde(serialize_with = "ser_rational")]
    pub theta: Rational,
    pub alpha: RationalPolynomial,
    pub beta: RationalPolynomial,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// WSBDF scheme `alpha = theta a + (1 - theta) a~`,
/// `beta = theta zeta^q + (1 - theta) zeta^(q-1)`.
pub fn wsbdf(q: usize, theta: Rational) -> Result<Scheme> {
    let a = bdf_alpha(q)?;
    let shifted = sbdf_alpha(q)?;
    let rest = Rational::one() - &theta;
    let alpha = &a.scale(&theta) + &shifted.scale(&rest);
    let beta = &RationalPolynomial::monomial(q, theta.clone())
        + &RationalPolynomial::monomial(q - 1, rest);
    Ok(Scheme {
        q,
        theta,
        alpha,
        beta,
    })
}

/// Shorthand for integer weights.
pub fn wsbdf_int(q: usize, theta: i64) -> Result<Scheme> {
    wsbdf(q, int(theta))
}

impl Scheme {
    /// `alpha_0..alpha_q`, zero-padded to length `q + 1`.
    pub fn alpha_coeffs(&self) -> Vec<Rational> {
        (0..=self.q).map(|k| self.alpha.coeff(k)).collect()
    }

    pub fn beta_coeffs(&self) -> Vec<Rational> {
        (0..=self.q).map(|k| self.beta.coeff(k)).collect()
    }

    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha_coeffs().iter().map(rational_to_f64).collect()
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta_coeffs().iter().map(rational_to_f64).collect()
    }

    pub fn theta_f64(&self) -> f64 {
        rational_to_f64(&self.theta)
    }

    /// `sum_i i^l alpha_i - l (theta q^(l-1) + (1-theta)(q-1)^(l-1))`, exact.
    pub fn order_condition_residual(&self, ell: u32) -> Rational {
        let lhs = self
            .alpha_coeffs()
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (i, a)| {
                acc + a * Rational::from_integer(num_traits::pow(
                    num_bigint::BigInt::from(i),
                    ell as usize,
                ))
            });
        let rhs = if ell == 0 {
            Rational::zero()
        } else {
            let pw = |b: usize| {
                Rational::from_integer(num_traits::pow(
                    num_bigint::BigInt::from(b),
                    ell as usize - 1,
                ))
            };
            int(i64::from(ell))
                * (&self.theta * pw(self.q) + (Rational::one() - &self.theta) * pw(self.q - 1))
        };
        lhs - rhs
    }

    /// Residuals for `l = 0..=q`; all zero certifies order `q`.
    pub fn order_condition_residuals(&self) -> Vec<Rational> {
        (0..=self.q as u32)
            .map(|l| self.order_condition_residual(l))
            .collect()
    }

    /// Highest `p` with residuals vanishing for all `l <= p`.
    pub fn order(&self) -> usize {
        (0..=(self.q as u32 + 4))
            .take_while(|&l| self.order_condition_residual(l).is_zero())
            .count()
            .saturating_sub(1)
    }
}

/// Consistency defect `d^{n+q}` of the scheme for a smooth scalar function:
/// `(1/tau) [sum alpha_i u(t_{n+i}) - tau theta u'(t_{n+q}) - tau (1-theta) u'(t_{n+q-1})]`
/// with `t_m = m tau`.
pub fn consistency_defect<U, D>(s: &Scheme, u: U, du: D, tau: f64, n: usize) -> Result<f64>
where
    U: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let t = |m: usize| m as f64 * tau;
    let theta = s.theta_f64();
    let sum: f64 = s
        .alpha_f64()
        .iter()
        .enumerate()
        .map(|(i, a)| a * u(t(n + i)))
        .sum();
    let q = s.q;
    Ok((sum - tau * theta * du(t(n + q)) - tau * (1.0 - theta) * du(t(n + q - 1))) / tau)
}
