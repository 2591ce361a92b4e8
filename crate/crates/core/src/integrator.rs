//! Time stepping for `u' + Au = f` with a diagonal positive operator, and
//! empirical checks of the energy estimates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::{wsbdf_int, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalOperator {
    eigenvalues: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument(
                "operator needs at least one mode".into(),
            ));
        }
        if let Some(a) = eigenvalues.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue {a} is not positive"
            )));
        }
        Ok(Self { eigenvalues })
    }

    /// Allows zero eigenvalues. Only meant for exercising the scheme on
    /// `u' = f`; the norms built on `A^{-1/2}` are infinite there.
    pub fn degenerate(eigenvalues: Vec<f64>) -> Result<Self> {
        if let Some(a) = eigenvalues.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue {a} is negative"
            )));
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Modal coefficient vector as a function of time.
pub type ModeFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct LinearProblem {
    pub operator: DiagonalOperator,
    pub forcing: ModeFn,
    pub exact: Option<ModeFn>,
    pub horizon: f64,
}

impl std::fmt::Debug for LinearProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearProblem")
            .field("operator", &self.operator)
            .field("has_exact", &self.exact.is_some())
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl LinearProblem {
    pub fn new(
        operator: DiagonalOperator,
        forcing: ModeFn,
        exact: Option<ModeFn>,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            operator,
            forcing,
            exact,
            horizon,
        })
    }

    /// Homogeneous problem `u' + Au = 0`.
    pub fn homogeneous(operator: DiagonalOperator, horizon: f64) -> Result<Self> {
        let d = operator.dim();
        Self::new(operator, Arc::new(move |_| vec![0.0; d]), None, horizon)
    }

    pub fn dimension(&self) -> usize {
        self.operator.dim()
    }

    fn checked(&self, v: Vec<f64>) -> Result<Vec<f64>> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: v.len(),
            });
        }
        Ok(v)
    }

    pub fn forcing_at(&self, t: f64) -> Result<Vec<f64>> {
        self.checked((self.forcing)(t))
    }

    pub fn exact_at(&self, t: f64) -> Result<Vec<f64>> {
        let u = self.exact.as_ref().ok_or(Error::MissingExactSolution)?;
        self.checked(u(t))
    }
}

/// Problem file: per-mode polynomials in `t`, lowest coefficient first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialProblem {
    pub eigenvalues: Vec<f64>,
    pub forcing: Vec<Vec<f64>>,
    #[serde(default)]
    pub exact: Option<Vec<Vec<f64>>>,
    /// Starting vectors `u^0..u^{q-1}`, each a full mode vector.
    #[serde(default)]
    pub initial: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub horizon: Option<f64>,
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

fn poly_modes(table: Vec<Vec<f64>>) -> ModeFn {
    Arc::new(move |t| table.iter().map(|c| horner(c, t)).collect())
}

impl PolynomialProblem {
    pub fn into_problem(self, horizon: f64) -> Result<LinearProblem> {
        let d = self.eigenvalues.len();
        let check = |n: usize| {
            if n == d {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: d,
                    got: n,
                })
            }
        };
        check(self.forcing.len())?;
        if let Some(e) = &self.exact {
            check(e.len())?;
        }
        LinearProblem::new(
            DiagonalOperator::new(self.eigenvalues)?,
            poly_modes(self.forcing),
            self.exact.map(poly_modes),
            horizon,
        )
    }
}

/// `|v|`, `||v|| = |A^{1/2} v|` and `||v||_* = |A^{-1/2} v|`.
pub fn norms(op: &DiagonalOperator, v: &[f64]) -> Result<(f64, f64, f64)> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: v.len(),
        });
    }
    let (mut h, mut vn, mut dual) = (0.0, 0.0, 0.0);
    for (&a, &x) in op.eigenvalues.iter().zip(v) {
        h += x * x;
        vn += a * x * x;
        dual += x * x / a;
    }
    Ok((h.sqrt(), vn.sqrt(), dual.sqrt()))
}

struct Stepper {
    alpha: Vec<f64>,
    theta: f64,
    tau: f64,
}

impl Stepper {
    fn new(s: &Scheme, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {tau}"
            )));
        }
        Ok(Self {
            alpha: s.alpha_f64(),
            theta: s.theta_f64(),
            tau,
        })
    }

    /// Solves for `u^{n+q}` given `u^n..u^{n+q-1}` and the forcing at the two
    /// newest nodes.
    fn advance(
        &self,
        eig: &[f64],
        hist: &[&[f64]],
        f_new: &[f64],
        f_prev: &[f64],
    ) -> Result<Vec<f64>> {
        let q = self.alpha.len() - 1;
        let (th, tau) = (self.theta, self.tau);
        (0..eig.len())
            .map(|k| {
                let a = eig[k];
                let denom = self.alpha[q] + th * tau * a;
                if denom == 0.0 || !denom.is_finite() {
                    return Err(Error::SingularStep { mode: k });
                }
                let mut rhs = th * tau * f_new[k] + (1.0 - th) * tau * f_prev[k]
                    - (1.0 - th) * tau * a * hist[q - 1][k];
                for i in 0..q {
                    rhs -= self.alpha[i] * hist[i][k];
                }
                Ok(rhs / denom)
            })
            .collect()
    }
}

/// One step of the scheme: returns `u^{n+q}` from `history = [u^n, .., u^{n+q-1}]`
/// with nodes `t_m = m tau`.
pub fn step(
    s: &Scheme,
    p: &LinearProblem,
    tau: f64,
    history: &[Vec<f64>],
    n: usize,
) -> Result<Vec<f64>> {
    if history.len() != s.q {
        return Err(Error::DimensionMismatch {
            expected: s.q,
            got: history.len(),
        });
    }
    let st = Stepper::new(s, tau)?;
    let hist: Vec<&[f64]> = history.iter().map(|v| v.as_slice()).collect();
    for h in &hist {
        if h.len() != p.dimension() {
            return Err(Error::DimensionMismatch {
                expected: p.dimension(),
                got: h.len(),
            });
        }
    }
    let t = |m: usize| m as f64 * tau;
    let f_new = p.forcing_at(t(n + s.q))?;
    let f_prev = p.forcing_at(t(n + s.q - 1))?;
    st.advance(p.operator.eigenvalues(), &hist, &f_new, &f_prev)
}

#[derive(Debug, Clone)]
pub enum Seeding {
    /// `u^j = u(t_j)` for `j < q`; needs the exact solution.
    Exact,
    /// Caller-supplied `u^0..u^{q-1}`.
    Supplied(Vec<Vec<f64>>),
    /// `u^0` given, `u^1..u^{q-1}` by BDF methods of increasing order. This
    /// limits the global order to about two for long steps and is only meant
    /// for problems without a known solution.
    Bootstrap(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub tau: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub v_norms: Vec<f64>,
    /// `||f(t_n)||_*`
    pub dual_f_norms: Vec<f64>,
    /// `|f(t_n)|`
    pub f_h_norms: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds u^0")
    }
}

/// Number of steps `N` with `N tau = horizon` to within `1e-12` relative.
pub fn step_count(tau: f64, horizon: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let n = (horizon / tau).round();
    if n < 1.0 || (n * tau - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::StepDoesNotDivide { tau, horizon });
    }
    Ok(n as usize)
}

/// Runs the scheme on `[0, T]` with `tau = T / N`; node times are `n T / N`.
pub fn run(s: &Scheme, p: &LinearProblem, tau: f64, seeding: Seeding) -> Result<Trajectory> {
    let big_n = step_count(tau, p.horizon)?;
    let q = s.q;
    if big_n < q {
        return Err(Error::InvalidArgument(format!(
            "{big_n} steps cannot hold {q} starting values"
        )));
    }
    let times: Vec<f64> = (0..=big_n)
        .map(|n| n as f64 * p.horizon / big_n as f64)
        .collect();
    let forcing: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| p.forcing_at(t))
        .collect::<Result<_>>()?;
    let eig = p.operator.eigenvalues();

    let mut states: Vec<Vec<f64>> = match seeding {
        Seeding::Exact => times[..q]
            .iter()
            .map(|&t| p.exact_at(t))
            .collect::<Result<_>>()?,
        Seeding::Supplied(v) => {
            if v.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    got: v.len(),
                });
            }
            v.into_iter().map(|x| p.checked(x)).collect::<Result<_>>()?
        }
        Seeding::Bootstrap(u0) => {
            let mut v = vec![p.checked(u0)?];
            for j in 1..q {
                let lower = wsbdf_int(j, 1)?;
                let st = Stepper::new(&lower, tau)?;
                let hist: Vec<&[f64]> = v[v.len() - j..].iter().map(|x| x.as_slice()).collect();
                let next = st.advance(eig, &hist, &forcing[j], &forcing[j - 1])?;
                v.push(next);
            }
            v
        }
    };
    states.reserve(big_n + 1 - q);

    let st = Stepper::new(s, tau)?;
    for m in q..=big_n {
        let hist: Vec<&[f64]> = states[m - q..m].iter().map(|x| x.as_slice()).collect();
        let next = st.advance(eig, &hist, &forcing[m], &forcing[m - 1])?;
        states.push(next);
    }

    let mut h_norms = Vec::with_capacity(big_n + 1);
    let mut v_norms = Vec::with_capacity(big_n + 1);
    for u in &states {
        let (h, v, _) = norms(&p.operator, u)?;
        h_norms.push(h);
        v_norms.push(v);
    }
    let mut dual_f_norms = Vec::with_capacity(big_n + 1);
    let mut f_h_norms = Vec::with_capacity(big_n + 1);
    for f in &forcing {
        let (h, _, d) = norms(&p.operator, f)?;
        f_h_norms.push(h);
        dual_f_norms.push(d);
    }
    Ok(Trajectory {
        scheme: s.clone(),
        tau,
        times,
        states,
        eigenvalues: eig.to_vec(),
        h_norms,
        v_norms,
        dual_f_norms,
        f_h_norms,
    })
}

/// `(1/tau) sum_i alpha_i v^{m-q+i}` on the stored states.
pub fn dot_operator(s: &Scheme, traj: &Trajectory, m: usize) -> Result<Vec<f64>> {
    if m < s.q || m > traj.steps() {
        return Err(Error::InvalidArgument(format!(
            "index {m} outside {}..={}",
            s.q,
            traj.steps()
        )));
    }
    let alpha = s.alpha_f64();
    let dim = traj.states[0].len();
    Ok((0..dim)
        .map(|k| {
            alpha
                .iter()
                .enumerate()
                .map(|(i, a)| a * traj.states[m - s.q + i][k])
                .sum::<f64>()
                / traj.tau
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimate {
    /// `|u^n|^2 + tau ||u^n||^2` against the starting data and `tau sum ||f||_*^2`.
    Thm11,
    /// `||u^n||^2 + tau |u-dot^n|^2` against `sum ||u^j||^2` and `tau sum |f|^2`.
    Thm12,
    /// `||u^n||^2 + tau |(u^n - u^{n-1})/tau|^2`, with backward differences of
    /// the starting values added to the data.
    Cor13,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateCheck {
    /// First index `n` of the per-step vectors.
    pub first: usize,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratio_sup: f64,
}

fn sq_h(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Both sides of the selected estimate with unit constant, for `n = q..=N`.
pub fn verify_estimate(traj: &Trajectory, which: Estimate) -> Result<EstimateCheck> {
    let s = &traj.scheme;
    let q = s.q;
    let big_n = traj.steps();
    if big_n < q {
        return Err(Error::InvalidArgument(format!(
            "trajectory has {big_n} < {q} steps"
        )));
    }
    let tau = traj.tau;
    let sq = |x: f64| x * x;
    let backward = |n: usize| -> f64 {
        let d: Vec<f64> = traj.states[n]
            .iter()
            .zip(&traj.states[n - 1])
            .map(|(a, b)| (a - b) / tau)
            .collect();
        sq_h(&d)
    };
    let data: f64 = match which {
        Estimate::Thm11 => (0..q)
            .map(|j| sq(traj.h_norms[j]) + tau * sq(traj.v_norms[j]))
            .sum(),
        Estimate::Thm12 => (0..q).map(|j| sq(traj.v_norms[j])).sum(),
        Estimate::Cor13 => {
            (0..q).map(|j| sq(traj.v_norms[j])).sum::<f64>()
                + tau * (1..q).map(backward).sum::<f64>()
        }
    };
    let forcing_term = |l: usize| match which {
        Estimate::Thm11 => sq(traj.dual_f_norms[l]),
        _ => sq(traj.f_h_norms[l]),
    };
    let mut acc = tau * forcing_term(q - 1);
    let mut lhs = Vec::with_capacity(big_n + 1 - q);
    let mut rhs = Vec::with_capacity(big_n + 1 - q);
    for n in q..=big_n {
        acc += tau * forcing_term(n);
        rhs.push(data + acc);
        lhs.push(match which {
            Estimate::Thm11 => sq(traj.h_norms[n]) + tau * sq(traj.v_norms[n]),
            Estimate::Thm12 => sq(traj.v_norms[n]) + tau * sq_h(&dot_operator(s, traj, n)?),
            Estimate::Cor13 => sq(traj.v_norms[n]) + tau * backward(n),
        });
    }
    let ratio_sup = lhs
        .iter()
        .zip(&rhs)
        .map(|(&l, &r)| if l == 0.0 && r == 0.0 { 0.0 } else { l / r })
        .fold(0.0, f64::max);
    Ok(EstimateCheck {
        first: q,
        lhs,
        rhs,
        ratio_sup,
    })
}
