//! Multiplier certification: trigonometric positivity reduced to polynomials
//! in `x = cos(phi)` and certified by Sturm root isolation.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{
    chebyshev_t, complex_roots, int, is_nonnegative_on, is_positive_on, max_on_interval,
    min_on_interval, rational_from_f64, rational_to_f64, resultant, Rational, RationalPolynomial,
};
use crate::schemes::{wsbdf_int, Scheme};
use crate::stability::UNIT_CIRCLE_TOL;

/// Candidates are promoted to rationals with this denominator.
pub const PROMOTION_DENOMINATOR: u32 = 10_000;
/// Resolution of the dual-constant bisection.
pub const DUAL_RESOLUTION: f64 = 1e-6;
const MIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierCandidate {
    pub q: usize,
    pub mu: Vec<f64>,
}

impl MultiplierCandidate {
    pub fn new(q: usize, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                got: mu.len(),
            });
        }
        Ok(Self { q, mu })
    }

    /// The `(mu_1, .., mu_4, 0, 0, 0)` family used with the seven-step scheme.
    pub fn seven_step(m: [f64; 4]) -> Self {
        let mut mu = m.to_vec();
        mu.extend([0.0; 3]);
        Self { q: 7, mu }
    }

    pub fn mu_rationals(&self) -> Result<Vec<Rational>> {
        self.mu
            .iter()
            .map(|&x| rational_from_f64(x, PROMOTION_DENOMINATOR))
            .collect()
    }

    /// `mu(zeta) = zeta^q - mu_1 zeta^(q-1) - ... - mu_q`.
    pub fn mu_poly(&self) -> Result<RationalPolynomial> {
        let mut c = vec![Rational::zero(); self.q + 1];
        c[self.q] = Rational::one();
        for (j, m) in self.mu_rationals()?.into_iter().enumerate() {
            c[self.q - 1 - j] = -m;
        }
        Ok(RationalPolynomial::new(c))
    }
}

/// `R(x)` with `R(cos phi) = Re[rho(e^{i phi}) sigma(e^{-i phi})]`, exact.
pub fn symmetrized_real_part(
    rho: &RationalPolynomial,
    sigma: &RationalPolynomial,
) -> RationalPolynomial {
    let n = rho.coeffs().len().max(sigma.coeffs().len());
    // cosine series: sum_{j,k} rho_j sigma_k cos((j - k) phi)
    let mut series = vec![Rational::zero(); n.max(1)];
    for (j, r) in rho.coeffs().iter().enumerate() {
        for (k, s) in sigma.coeffs().iter().enumerate() {
            series[j.abs_diff(k)] += r * s;
        }
    }
    series
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(RationalPolynomial::zero(), |acc, (m, c)| {
            &acc + &chebyshev_t(m).scale(c)
        })
}

fn unit_interval() -> (Rational, Rational) {
    (int(-1), int(1))
}

fn strip_common_power(
    p: &RationalPolynomial,
    q: &RationalPolynomial,
) -> (usize, RationalPolynomial, RationalPolynomial) {
    let ell = p.trailing_zeros().min(q.trailing_zeros());
    (ell, p.shift_down(ell), q.shift_down(ell))
}

/// No common divisor apart from a power of `zeta`, by exact resultant.
pub fn coprime_up_to_zeta_power(p: &RationalPolynomial, q: &RationalPolynomial) -> Result<bool> {
    let (_, a, b) = strip_common_power(p, q);
    Ok(!resultant(&a, &b)?.is_zero())
}

/// `Re[rho sigma*] >= 0` on the unit circle, touching zeros allowed.
pub fn pair_nonnegative(rho: &RationalPolynomial, sigma: &RationalPolynomial) -> Result<bool> {
    let (lo, hi) = unit_interval();
    is_nonnegative_on(&symmetrized_real_part(rho, sigma), &lo, &hi)
}

/// First trigonometric inequality plus coprimality of `alpha` and `mu`.
pub fn check_condition_a(s: &Scheme, m: &MultiplierCandidate) -> Result<bool> {
    check_q(s, m)?;
    let mu = m.mu_poly()?;
    Ok(pair_nonnegative(&s.alpha, &mu)? && coprime_up_to_zeta_power(&s.alpha, &mu)?)
}

fn check_q(s: &Scheme, m: &MultiplierCandidate) -> Result<()> {
    if s.q != m.q {
        return Err(Error::DimensionMismatch {
            expected: s.q,
            got: m.q,
        });
    }
    Ok(())
}

/// `beta = zeta^ell delta`, `mu = zeta^ell kappa` with `ell` maximal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedPair {
    pub ell: usize,
    pub delta: RationalPolynomial,
    pub kappa: RationalPolynomial,
}

pub fn extract_shifted_pair(s: &Scheme, m: &MultiplierCandidate) -> Result<ShiftedPair> {
    check_q(s, m)?;
    let (ell, delta, kappa) = strip_common_power(&s.beta, &m.mu_poly()?);
    Ok(ShiftedPair { ell, delta, kappa })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionB {
    pub pass: bool,
    /// Minimum over `[-1, 1]` of `G = Re[delta kappa*]` in `x`.
    pub c_tilde_star: f64,
    pub argmin: f64,
    pub mu_roots_in_open_disk: bool,
    pub coprime_delta_kappa: bool,
    pub g: RationalPolynomial,
}

pub fn check_condition_b(s: &Scheme, m: &MultiplierCandidate) -> Result<ConditionB> {
    let pair = extract_shifted_pair(s, m)?;
    let g = symmetrized_real_part(&pair.delta, &pair.kappa);
    let (lo, hi) = unit_interval();
    let positive = is_positive_on(&g, &lo, &hi)?;
    let (argmin, c_tilde_star) = min_on_interval(&g, -1.0, 1.0, MIN_TOL)?;
    let mu_roots_in_open_disk = complex_roots(&m.mu_poly()?)?.max_modulus() < 1.0 - UNIT_CIRCLE_TOL;
    let coprime_delta_kappa = !resultant(&pair.delta, &pair.kappa)?.is_zero();
    Ok(ConditionB {
        pass: positive && mu_roots_in_open_disk && coprime_delta_kappa,
        c_tilde_star,
        argmin,
        mu_roots_in_open_disk,
        coprime_delta_kappa,
        g,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualCheck {
    pub pass: bool,
    /// Largest certified `c` with `Re[kappa delta*] >= c |delta|^2` on the
    /// circle; `None` when even `c = 0` fails.
    pub hat_c_star: Option<f64>,
    /// `max |delta(e^{i phi})|`.
    pub delta_sup: f64,
}

/// Dual inequality `Re kappa/delta >= c`, bisecting on `c` with exact
/// positivity certificates for `Re[kappa delta*] - c |delta|^2`.
pub fn check_dual(pair: &ShiftedPair) -> Result<DualCheck> {
    if pair.delta.degree().unwrap_or(0) >= 1 {
        let roots = complex_roots(&pair.delta)?;
        if let Some(r) = roots
            .roots
            .iter()
            .find(|r| (r.modulus() - 1.0).abs() <= UNIT_CIRCLE_TOL)
        {
            return Err(Error::UnimodularRoot(format!("{} + {}i", r.re, r.im)));
        }
    }
    let g = symmetrized_real_part(&pair.kappa, &pair.delta);
    let d = symmetrized_real_part(&pair.delta, &pair.delta);
    let delta_sup = max_on_interval(&d, -1.0, 1.0, MIN_TOL)?.1.max(0.0).sqrt();
    let (a, b) = unit_interval();
    let holds = |c: &Rational| is_nonnegative_on(&(&g - &d.scale(c)), &a, &b);

    if !holds(&Rational::zero())? {
        return Ok(DualCheck {
            pass: false,
            hat_c_star: None,
            delta_sup,
        });
    }
    // equality at x = 1 bounds the constant from above
    let one = int(1);
    let mut hi = g.eval(&one) / d.eval(&one);
    let mut lo = Rational::zero();
    if holds(&hi)? {
        lo = hi.clone();
    } else {
        let res = rational_from_f64(DUAL_RESOLUTION, 1_000_000_000)?;
        while &hi - &lo > res {
            let mid = (&lo + &hi) / int(2);
            if holds(&mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let c = rational_to_f64(&lo);
    Ok(DualCheck {
        pass: c > 0.0,
        hat_c_star: Some(c),
        delta_sup,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    #[serde(rename = "condA_pass")]
    pub cond_a_pass: bool,
    #[serde(rename = "condB_pass")]
    pub cond_b_pass: bool,
    pub c_tilde_star: f64,
    pub hat_c_star: Option<f64>,
    pub mu_roots_in_open_disk: bool,
    pub no_common_divisor_alpha_mu: bool,
    pub no_common_divisor_delta_kappa: bool,
    pub overall: bool,
    pub ell: usize,
    pub delta_sup: Option<f64>,
}

pub fn verify(s: &Scheme, m: &MultiplierCandidate) -> Result<VerificationReport> {
    check_q(s, m)?;
    let mu = m.mu_poly()?;
    let nonneg = pair_nonnegative(&s.alpha, &mu)?;
    let no_common_divisor_alpha_mu = coprime_up_to_zeta_power(&s.alpha, &mu)?;
    let b = check_condition_b(s, m)?;
    let pair = extract_shifted_pair(s, m)?;
    let dual = match check_dual(&pair) {
        Ok(d) => Some(d),
        Err(Error::UnimodularRoot(_)) => None,
        Err(e) => return Err(e),
    };
    let cond_a_pass = nonneg && no_common_divisor_alpha_mu;
    Ok(VerificationReport {
        cond_a_pass,
        cond_b_pass: b.pass,
        c_tilde_star: b.c_tilde_star,
        hat_c_star: dual.as_ref().and_then(|d| d.hat_c_star),
        mu_roots_in_open_disk: b.mu_roots_in_open_disk,
        no_common_divisor_alpha_mu,
        no_common_divisor_delta_kappa: b.coprime_delta_kappa,
        overall: cond_a_pass
            && b.pass
            && b.mu_roots_in_open_disk
            && b.coprime_delta_kappa
            && b.c_tilde_star > 0.0,
        ell: pair.ell,
        delta_sup: dual.map(|d| d.delta_sup),
    })
}

fn promote4(m: [f64; 4]) -> Result<[Rational; 4]> {
    let v: Vec<Rational> = m
        .iter()
        .map(|&x| rational_from_f64(x, PROMOTION_DENOMINATOR))
        .collect::<Result<_>>()?;
    Ok(v.try_into().expect("four entries"))
}

/// `P` and `g` for the seven-step scheme with weight 3 and the multiplier
/// family `(mu_1, .., mu_4, 0, 0, 0)`, assembled from their `mu`-linear forms.
///
/// `4 (1 - x) P(x) = Re[420 alpha mu*]` and `g(x) = Re[delta kappa*]`.
#[allow(non_snake_case)]
pub fn general_P_and_g(m: [f64; 4]) -> Result<(RationalPolynomial, RationalPolynomial)> {
    let mu = promote4(m)?;
    let p_terms: [&[i64]; 5] = [
        &[-454, 2584, -7020, 2990, 8184, -9904, 3200],
        &[-260, 2287, -257, -4492, 4952, -1600],
        &[-454, 2064, -2446, 2476, -800],
        &[260, -3195, 4385, -400],
        &[454, -1544, -3944, 6294],
    ];
    let g_terms: [&[i64]; 5] = [
        &[3, -2],
        &[2, -3],
        &[3, 2, -6],
        &[-2, 9, 4, -12],
        &[-3, -6, 24, 8, -24],
    ];
    let assemble = |terms: &[&[i64]; 5]| {
        let mut acc = RationalPolynomial::from_i64(terms[0]);
        for (t, c) in terms[1..].iter().zip(&mu) {
            acc = &acc + &RationalPolynomial::from_i64(t).scale(c);
        }
        acc
    };
    Ok((assemble(&p_terms), assemble(&g_terms)))
}

/// Box of per-coordinate bounds on `(mu_1, .., mu_4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBox {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub lower_inclusive: [bool; 4],
    pub upper_inclusive: [bool; 4],
}

impl SearchBox {
    /// Necessary bounds for a multiplier of the seven-step scheme with weight 3.
    pub fn necessary() -> Self {
        Self {
            lower: [1.5561, -2.2024, 0.5394, -0.6518],
            upper: [2.3133, -1.4259, 1.3955, -0.0504],
            lower_inclusive: [true, false, false, false],
            upper_inclusive: [false; 4],
        }
    }

    /// The necessary bounds on `mu_1, mu_2, mu_3` with `mu_4` pinned to zero.
    pub fn zero_mu4() -> Self {
        let mut b = Self::necessary();
        b.lower[3] = 0.0;
        b.upper[3] = 0.0;
        b.lower_inclusive[3] = true;
        b.upper_inclusive[3] = true;
        b
    }

    pub fn contains(&self, m: [f64; 4]) -> bool {
        (0..4).all(|i| {
            let above = if self.lower_inclusive[i] {
                m[i] >= self.lower[i]
            } else {
                m[i] > self.lower[i]
            };
            let below = if self.upper_inclusive[i] {
                m[i] <= self.upper[i]
            } else {
                m[i] < self.upper[i]
            };
            above && below
        })
    }

    /// Grid points `k * step` inside the box, lexicographic in `(mu_1, .., mu_4)`.
    pub fn grid(&self, step: f64) -> Result<Vec<[f64; 4]>> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let step_r = rational_from_f64(step, PROMOTION_DENOMINATOR)?;
        if step_r.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "grid step {step} below 1e-4"
            )));
        }
        let step = rational_to_f64(&step_r);
        let axis = |i: usize| -> Vec<f64> {
            let k0 = (self.lower[i] / step).floor() as i64 - 1;
            let k1 = (self.upper[i] / step).ceil() as i64 + 1;
            (k0..=k1)
                .map(|k| rational_to_f64(&(&step_r * int(k))))
                .filter(|&v| {
                    let mut probe = [0.0; 4];
                    probe[i] = v;
                    let mut b = *self;
                    // test this coordinate only
                    for j in (0..4).filter(|&j| j != i) {
                        b.lower[j] = f64::NEG_INFINITY;
                        b.upper[j] = f64::INFINITY;
                    }
                    b.contains(probe)
                })
                .collect()
        };
        let axes: Vec<Vec<f64>> = (0..4).map(axis).collect();
        let mut out = Vec::new();
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    for &d in &axes[3] {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn lemma_box_filter(m: [f64; 4]) -> bool {
    SearchBox::necessary().contains(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchHit {
    pub candidate: MultiplierCandidate,
    pub report: VerificationReport,
}

pub fn search_multipliers(grid_step: f64) -> Result<Vec<SearchHit>> {
    search_multipliers_in(&SearchBox::necessary(), grid_step)
}

/// Certifies every grid point of `bx` for the seven-step scheme with weight 3;
/// passing candidates sorted by `c_tilde_star`, largest first.
pub fn search_multipliers_in(bx: &SearchBox, grid_step: f64) -> Result<Vec<SearchHit>> {
    let s = wsbdf_int(7, 3)?;
    let points = bx.grid(grid_step)?;
    let results: Vec<Option<SearchHit>> = points
        .par_iter()
        .map(|&m| -> Result<Option<SearchHit>> {
            let cand = MultiplierCandidate::seven_step(m);
            // cheap rejection before the full report
            if !pair_nonnegative(&s.alpha, &cand.mu_poly()?)? {
                return Ok(None);
            }
            let report = verify(&s, &cand)?;
            Ok(report.overall.then_some(SearchHit {
                candidate: cand,
                report,
            }))
        })
        .collect::<Result<_>>()?;
    let mut hits: Vec<SearchHit> = results.into_iter().flatten().collect();
    hits.sort_by(|a, b| {
        b.report
            .c_tilde_star
            .total_cmp(&a.report.c_tilde_star)
            .then_with(|| {
                a.candidate
                    .mu
                    .iter()
                    .zip(&b.candidate.mu)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    Ok(hits)
}
