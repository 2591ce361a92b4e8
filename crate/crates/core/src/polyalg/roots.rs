//! Complex root finding: balanced companion-matrix eigenvalues polished with
//! Aberth–Ehrlich iterations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::poly::{eval_complex_coeffs, RationalPolynomial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootFinderOptions {
    /// Roots closer than this are merged into one root with higher multiplicity.
    pub cluster_radius: f64,
    /// Largest accepted relative backward residual `|p(z)| / sum |c_k| |z|^k`.
    pub residual_tol: f64,
    pub max_polish_iterations: usize,
}

impl Default for RootFinderOptions {
    fn default() -> Self {
        Self {
            cluster_radius: 1e-8,
            residual_tol: 1e-12,
            max_polish_iterations: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexRoot {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl ComplexRoot {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

/// All roots of a polynomial with multiplicity estimates.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexRootSet {
    pub roots: Vec<ComplexRoot>,
    /// Largest relative residual over the reported roots.
    pub residual_bound: f64,
}

impl ComplexRootSet {
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots
            .iter()
            .map(ComplexRoot::modulus)
            .fold(0.0, f64::max)
    }

    /// Every root repeated according to its multiplicity.
    pub fn values(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value(), r.multiplicity))
            .collect()
    }

    /// Coefficients (lowest first) of `lead * prod (z - root)`.
    pub fn expand(&self, lead: Complex64) -> Vec<Complex64> {
        let mut c = vec![lead];
        for r in self.values() {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        c
    }
}

pub(crate) fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let value = coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let az = z.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * az + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        value.norm() / scale
    }
}

fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Parlett–Reinsch balancing with radix-2 scalings.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / radix {
                cc *= radix;
                f *= radix;
            }
            while cc >= r * radix {
                cc /= radix;
                f /= radix;
            }
            let rr = r / f;
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn companion_eigenvalues(monic: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = monic.len() - 1;
    if n == 1 {
        return Some(vec![-monic[0]]);
    }
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    balance(&mut m);
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 10_000)?;
    schur.eigenvalues().map(|v| v.iter().copied().collect())
}

fn initial_circle(coeffs: &[Complex64]) -> Vec<Complex64> {
    // Cauchy-type radius guess, points offset from the real axis
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let radius = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| (c.norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, t)
        })
        .collect()
}

/// Aberth–Ehrlich sweeps; a correction is kept only if it lowers the residual.
fn polish(coeffs: &[Complex64], roots: &mut [Complex64], max_iter: usize) {
    let n = roots.len();
    let target = 4.0 * f64::EPSILON;
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let zi = roots[i];
            let before = relative_residual(coeffs, zi);
            if before <= target {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, zi);
            if dp.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = zi - roots[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() > 0.0 {
                ratio / denom
            } else {
                ratio
            };
            let candidate = zi - step;
            if candidate.is_finite() && relative_residual(coeffs, candidate) < before {
                roots[i] = candidate;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn cluster(raw: &[Complex64], radius: f64) -> Vec<ComplexRoot> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (raw[i] - raw[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += raw[i];
                g.2 += 1;
            }
            None => groups.push((r, raw[i], 1)),
        }
    }
    let mut roots: Vec<ComplexRoot> = groups
        .into_iter()
        .map(|(_, sum, m)| {
            let z = sum / m as f64;
            ComplexRoot {
                re: z.re,
                im: z.im,
                multiplicity: m,
            }
        })
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Roots of a polynomial with complex binary64 coefficients (lowest first).
/// The leading coefficient must be nonzero.
pub fn complex_roots_f64(coeffs: &[Complex64], opts: &RootFinderOptions) -> Result<ComplexRootSet> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::ConstantPolynomial);
    }
    if coeffs[n].norm() == 0.0 || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(
            "leading coefficient must be nonzero and all coefficients finite".into(),
        ));
    }
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zeros..];
    let mut raw = vec![Complex64::new(0.0, 0.0); zeros];
    if reduced.len() > 1 {
        let lead = reduced[reduced.len() - 1];
        let monic: Vec<Complex64> = reduced.iter().map(|c| c / lead).collect();
        let mut found = companion_eigenvalues(&monic)
            .filter(|v| v.iter().all(|z| z.is_finite()))
            .unwrap_or_else(|| initial_circle(reduced));
        polish(reduced, &mut found, opts.max_polish_iterations);
        if found
            .iter()
            .any(|&z| relative_residual(reduced, z) > opts.residual_tol)
        {
            // eigen step failed to reach tolerance: restart from a circle
            let mut retry = initial_circle(reduced);
            polish(reduced, &mut retry, 20 * opts.max_polish_iterations);
            let worst = |v: &[Complex64]| {
                v.iter()
                    .map(|&z| relative_residual(reduced, z))
                    .fold(0.0, f64::max)
            };
            if worst(&retry) < worst(&found) {
                found = retry;
            }
        }
        raw.extend(found);
    }
    let worst = raw
        .iter()
        .map(|&z| relative_residual(coeffs, z))
        .fold(0.0, f64::max);
    if !(worst <= opts.residual_tol) {
        return Err(Error::RootsNotConverged {
            iterations: opts.max_polish_iterations,
            residual: worst,
        });
    }
    let roots = cluster(&raw, opts.cluster_radius);
    let residual_bound = roots
        .iter()
        .map(|r| relative_residual(coeffs, r.value()))
        .fold(worst, f64::max);
    Ok(ComplexRootSet {
        roots,
        residual_bound,
    })
}

/// All complex roots of an exact polynomial of degree at least one.
pub fn complex_roots(p: &RationalPolynomial) -> Result<ComplexRootSet> {
    complex_roots_with(p, &RootFinderOptions::default())
}

pub fn complex_roots_with(
    p: &RationalPolynomial,
    opts: &RootFinderOptions,
) -> Result<ComplexRootSet> {
    match p.degree() {
        None => return Err(Error::ZeroPolynomial),
        Some(0) => return Err(Error::ConstantPolynomial),
        _ => {}
    }
    let coeffs: Vec<Complex64> = p
        .to_f64_coeffs()
        .into_iter()
        .map(|c| Complex64::new(c, 0.0))
        .collect();
    complex_roots_f64(&coeffs, opts)
}

/// Evaluates a real-coefficient polynomial at a complex point.
pub fn eval_complex(p: &RationalPolynomial, z: Complex64) -> Complex64 {
    eval_complex_coeffs(&p.to_f64_coeffs(), z)
}
