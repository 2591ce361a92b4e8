//! Exact real-root isolation with Sturm sequences.

use num_traits::Signed;
use serde::Serialize;

use super::poly::{rational_to_f64, Rational, RationalPolynomial};
use crate::error::{Error, Result};

/// An interval holding exactly one real root.
///
/// Either `lo == hi` (the root is the rational endpoint itself) or the root
/// lies strictly inside `(lo, hi)` and the polynomial is nonzero at both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatingInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl IsolatingInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        rational_to_f64(&self.lo) <= x && x <= rational_to_f64(&self.hi)
    }

    /// Bisects until the width is at most `width`. `p` must be the polynomial
    /// (or its square-free part) the interval was isolated for.
    pub fn refine(&self, p: &RationalPolynomial, width: &Rational) -> IsolatingInterval {
        let mut iv = self.clone();
        if iv.is_exact() {
            return iv;
        }
        let mut slo = p.sign_at(&iv.lo);
        while &iv.width() > width {
            let m = iv.midpoint();
            let sm = p.sign_at(&m);
            if sm == 0 {
                return IsolatingInterval {
                    lo: m.clone(),
                    hi: m,
                };
            }
            if sm == slo {
                iv.lo = m;
                slo = sm;
            } else {
                iv.hi = m;
            }
        }
        iv
    }
}

impl Serialize for IsolatingInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [rational_to_f64(&self.lo), rational_to_f64(&self.hi)].serialize(s)
    }
}

/// Canonical Sturm chain `p, p', -rem(p, p'), ...`.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<RationalPolynomial>,
}

impl SturmSequence {
    pub fn new(p: &RationalPolynomial) -> Self {
        let mut chain = vec![p.clone()];
        let mut next = p.derivative();
        while !next.is_zero() {
            let (_, r) = chain
                .last()
                .unwrap()
                .div_rem(&next)
                .expect("nonzero divisor");
            chain.push(next);
            // positive rescaling keeps signs and tames coefficient growth
            let r = -&r;
            next = match r.leading() {
                Some(l) => {
                    let scale = l.abs().recip();
                    r.scale(&scale)
                }
                None => r,
            };
        }
        Self { chain }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn sign_variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut prev = 0;
        for p in &self.chain {
            let s = p.sign_at(x);
            if s == 0 {
                continue;
            }
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
        count
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    /// The chain must come from a square-free polynomial.
    pub fn count_half_open(&self, a: &Rational, b: &Rational) -> usize {
        self.sign_variations(a)
            .saturating_sub(self.sign_variations(b))
    }
}

fn check_interval(lo: &Rational, hi: &Rational) -> Result<()> {
    if lo > hi {
        return Err(Error::InvalidInterval {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    Ok(())
}

/// Number of distinct real roots of `p` in the closed interval `[lo, hi]`.
pub fn count_real_roots(p: &RationalPolynomial, lo: &Rational, hi: &Rational) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    check_interval(lo, hi)?;
    let sqf = p.square_free();
    let seq = SturmSequence::new(&sqf);
    let at_lo = usize::from(sqf.sign_at(lo) == 0);
    Ok(at_lo + seq.count_half_open(lo, hi))
}

/// Isolates every distinct real root of `p` in `[lo, hi]`, sorted ascending.
pub fn real_roots_in_interval(
    p: &RationalPolynomial,
    lo: &Rational,
    hi: &Rational,
) -> Result<Vec<IsolatingInterval>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    check_interval(lo, hi)?;
    let sqf = p.square_free();
    let mut out = Vec::new();
    if sqf.sign_at(lo) == 0 {
        out.push(IsolatingInterval {
            lo: lo.clone(),
            hi: lo.clone(),
        });
    }
    if lo == hi || sqf.degree() == Some(0) {
        return Ok(out);
    }
    let seq = SturmSequence::new(&sqf);
    let n = seq.count_half_open(lo, hi);
    isolate(&sqf, &seq, lo.clone(), hi.clone(), n, &mut out);
    Ok(out)
}

fn isolate(
    p: &RationalPolynomial,
    seq: &SturmSequence,
    a: Rational,
    b: Rational,
    count: usize,
    out: &mut Vec<IsolatingInterval>,
) {
    if count == 0 {
        return;
    }
    let two = Rational::from_integer(2.into());
    if count == 1 {
        if p.sign_at(&b) == 0 {
            out.push(IsolatingInterval {
                lo: b.clone(),
                hi: b,
            });
            return;
        }
        if p.sign_at(&a) != 0 {
            out.push(IsolatingInterval { lo: a, hi: b });
            return;
        }
        // left end is itself a root (not counted here); shrink away from it
        let m = (&a + &b) / &two;
        if seq.count_half_open(&a, &m) == 1 {
            isolate(p, seq, a, m, 1, out);
        } else {
            isolate(p, seq, m, b, 1, out);
        }
        return;
    }
    let m = (&a + &b) / &two;
    let left = seq.count_half_open(&a, &m);
    isolate(p, seq, a, m.clone(), left, out);
    isolate(p, seq, m, b, count - left, out);
}

/// One sample per maximal root-free sub-interval of `[lo, hi]`.
fn gap_samples(roots: &[IsolatingInterval], lo: &Rational, hi: &Rational) -> Vec<Rational> {
    let two = Rational::from_integer(2.into());
    let mut samples = Vec::new();
    let mut left = lo.clone();
    let mut left_is_root = roots.first().is_some_and(|r| r.is_exact() && &r.lo == lo);
    for r in roots {
        if r.is_exact() && &r.lo == lo {
            continue;
        }
        if r.lo > left {
            samples.push((&left + &r.lo) / &two);
        } else if r.lo == left && !left_is_root {
            // shared non-root endpoint of two neighbouring open intervals
            samples.push(left.clone());
        }
        left = r.hi.clone();
        left_is_root = r.is_exact();
    }
    if &left < hi {
        samples.push((&left + hi) / &two);
    } else if !left_is_root {
        samples.push(left);
    }
    samples
}

/// Exact sign certificate of a polynomial over a closed interval.
#[derive(Debug, Clone)]
pub struct SignCertificate {
    pub roots: Vec<IsolatingInterval>,
    /// Sign of the polynomial on each root-free sub-interval, left to right.
    pub gap_signs: Vec<i32>,
}

impl SignCertificate {
    pub fn new(p: &RationalPolynomial, lo: &Rational, hi: &Rational) -> Result<Self> {
        check_interval(lo, hi)?;
        if p.is_zero() {
            return Ok(Self {
                roots: Vec::new(),
                gap_signs: vec![0],
            });
        }
        let roots = real_roots_in_interval(p, lo, hi)?;
        let gap_signs = gap_samples(&roots, lo, hi)
            .iter()
            .map(|x| p.sign_at(x))
            .collect();
        Ok(Self { roots, gap_signs })
    }

    /// `p >= 0` on the interval (isolated touching zeros allowed).
    pub fn nonnegative(&self) -> bool {
        self.gap_signs.iter().all(|&s| s >= 0)
    }

    /// `p > 0` everywhere on the closed interval.
    pub fn positive(&self) -> bool {
        self.roots.is_empty() && self.gap_signs.iter().all(|&s| s > 0)
    }
}

pub fn is_nonnegative_on(p: &RationalPolynomial, lo: &Rational, hi: &Rational) -> Result<bool> {
    Ok(SignCertificate::new(p, lo, hi)?.nonnegative())
}

pub fn is_positive_on(p: &RationalPolynomial, lo: &Rational, hi: &Rational) -> Result<bool> {
    Ok(SignCertificate::new(p, lo, hi)?.positive())
}

/// Global minimum of `p` over `[lo, hi]` as `(argmin, value)`.
///
/// Candidates are the endpoints and the isolated critical points, the latter
/// refined to width well below `tol` before evaluation.
pub fn min_on_interval(p: &RationalPolynomial, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let invalid = || Error::InvalidInterval {
        lo: lo.to_string(),
        hi: hi.to_string(),
    };
    let rlo = Rational::from_float(lo).ok_or_else(invalid)?;
    let rhi = Rational::from_float(hi).ok_or_else(invalid)?;
    check_interval(&rlo, &rhi)?;

    let mut candidates = vec![rlo.clone(), rhi.clone()];
    let dp = p.derivative();
    if !dp.is_zero() {
        let width = Rational::from_float(tol * 1e-3).ok_or_else(invalid)?;
        let sqf = dp.square_free();
        for iv in real_roots_in_interval(&dp, &rlo, &rhi)? {
            candidates.push(iv.refine(&sqf, &width).midpoint());
        }
    }
    let (x, v) = candidates
        .into_iter()
        .map(|x| {
            let v = p.eval(&x);
            (x, v)
        })
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("at least the endpoints");
    Ok((rational_to_f64(&x), rational_to_f64(&v)))
}

/// Largest value of `p` over `[lo, hi]`, `(argmax, value)`.
pub fn max_on_interval(p: &RationalPolynomial, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let (x, v) = min_on_interval(&-p, lo, hi, tol)?;
    Ok((x, -v))
}
