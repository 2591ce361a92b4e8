//! Root condition, stability regions, A(phi) angles and the difference
//! quotient kernel of a multistep scheme.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{complex_roots_f64, ComplexRootSet, RationalPolynomial, RootFinderOptions};
use crate::schemes::Scheme;

/// Default distance from the unit circle below which a root counts as unimodular.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;
/// Smallest scaled derivative magnitude for a unimodular root to count as simple.
pub const SIMPLE_ROOT_DERIVATIVE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct UnimodularRoot {
    pub re: f64,
    pub im: f64,
    pub simple: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootConditionReport {
    pub max_modulus: f64,
    pub unimodular_roots: Vec<UnimodularRoot>,
    pub pass: bool,
}

fn to_complex(c: &[f64]) -> Vec<Complex64> {
    c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn derivative_at(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| {
            acc * z + c * k as f64
        })
}

fn report_from_roots(coeffs: &[Complex64], set: &ComplexRootSet, tol: f64) -> RootConditionReport {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let max_modulus = set.max_modulus();
    let unimodular_roots: Vec<UnimodularRoot> = set
        .roots
        .iter()
        .filter(|r| (r.modulus() - 1.0).abs() <= tol)
        .map(|r| {
            let d = derivative_at(coeffs, r.value()).norm() / scale;
            UnimodularRoot {
                re: r.re,
                im: r.im,
                simple: r.multiplicity == 1 && d >= SIMPLE_ROOT_DERIVATIVE,
            }
        })
        .collect();
    let pass = max_modulus <= 1.0 + tol && unimodular_roots.iter().all(|r| r.simple);
    RootConditionReport {
        max_modulus,
        unimodular_roots,
        pass,
    }
}

/// Root condition for a complex binary64 polynomial (lowest coefficient first).
///
/// Leading coefficients that vanish to roundoff are dropped first and the
/// remaining roots are reported at the true degree. A dropped degree means a
/// root has escaped to infinity, so the report fails with infinite modulus.
pub fn root_condition_f64(coeffs: &[Complex64], tol: f64) -> Result<RootConditionReport> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let cutoff = 64.0 * f64::EPSILON * scale;
    let mut end = coeffs.len();
    while end > 1 && coeffs[end - 1].norm() <= cutoff {
        end -= 1;
    }
    let trimmed = &coeffs[..end];
    let mut report = if trimmed.len() == 1 {
        RootConditionReport {
            max_modulus: 0.0,
            unimodular_roots: Vec::new(),
            pass: true,
        }
    } else {
        let set = complex_roots_f64(trimmed, &RootFinderOptions::default())?;
        report_from_roots(trimmed, &set, tol)
    };
    if end < coeffs.len() {
        report.max_modulus = f64::INFINITY;
        report.pass = false;
    }
    Ok(report)
}

/// Root condition: all roots in the closed unit disk, unimodular ones simple.
pub fn root_condition(p: &RationalPolynomial, tol: f64) -> Result<RootConditionReport> {
    match p.degree() {
        None => Err(Error::ZeroPolynomial),
        Some(0) => Err(Error::ConstantPolynomial),
        _ => root_condition_f64(&to_complex(&p.to_f64_coeffs()), tol),
    }
}

/// Coefficients of `alpha - z beta` in binary64.
pub fn stability_polynomial(s: &Scheme, z: Complex64) -> Vec<Complex64> {
    s.alpha_f64()
        .iter()
        .zip(s.beta_f64())
        .map(|(&a, b)| Complex64::new(a, 0.0) - z * b)
        .collect()
}

/// Whether `z = lambda tau` lies in the stability region.
pub fn in_region(s: &Scheme, z: Complex64, tol: f64) -> Result<bool> {
    Ok(root_condition_f64(&stability_polynomial(s, z), tol)?.pass)
}

/// `max |root| - 1` for `alpha - z beta`; positive means unstable.
fn modulus_excess(s: &Scheme, z: Complex64) -> Result<f64> {
    Ok(root_condition_f64(&stability_polynomial(s, z), UNIT_CIRCLE_TOL)?.max_modulus - 1.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let w = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        if !(re_min < re_max && im_min < im_max)
            || ![re_min, re_max, im_min, im_max]
                .iter()
                .all(|v| v.is_finite())
        {
            return Err(Error::InvalidArgument(format!("empty window {w:?}")));
        }
        Ok(w)
    }
}

/// Membership raster of the stability region.
///
/// Point `(i, j)` sits at `re_min + i dx`, `im_min + j dy`; storage is row by
/// row in `j`, so iteration order is scanline order.
#[derive(Debug, Clone, Serialize)]
pub struct RegionGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub membership: Vec<bool>,
}

impl RegionGrid {
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        point_of(&self.window, self.nx, self.ny, i, j)
    }

    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.membership[j * self.nx + i]
    }

    pub fn count_inside(&self) -> usize {
        self.membership.iter().filter(|&&b| b).count()
    }

    /// Approximate area: inside count times the cell area.
    pub fn area(&self) -> f64 {
        let w = &self.window;
        let dx = (w.re_max - w.re_min) / (self.nx - 1) as f64;
        let dy = (w.im_max - w.im_min) / (self.ny - 1) as f64;
        self.count_inside() as f64 * dx * dy
    }

    /// Pointwise inclusion of `other`'s membership set in this one.
    pub fn contains(&self, other: &RegionGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self
                .membership
                .iter()
                .zip(&other.membership)
                .all(|(&a, &b)| a || !b)
    }

    /// `(re, im, inside)` in scanline order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).map(move |i| {
                let z = self.point(i, j);
                (z.re, z.im, self.inside(i, j))
            })
        })
    }
}

fn point_of(w: &Window, nx: usize, ny: usize, i: usize, j: usize) -> Complex64 {
    let re = w.re_min + (w.re_max - w.re_min) * i as f64 / (nx - 1) as f64;
    let im = w.im_min + (w.im_max - w.im_min) * j as f64 / (ny - 1) as f64;
    Complex64::new(re, im)
}

pub fn region_grid(s: &Scheme, window: Window, nx: usize, ny: usize) -> Result<RegionGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs nx, ny >= 2, got {nx}x{ny}"
        )));
    }
    let membership = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            in_region(
                s,
                point_of(&window, nx, ny, k % nx, k / nx),
                UNIT_CIRCLE_TOL,
            )
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(RegionGrid {
        window,
        nx,
        ny,
        membership,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocusPoint {
    pub phi: f64,
    pub re: f64,
    pub im: f64,
}

impl LocusPoint {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Boundary locus `z(phi) = alpha(e^{i phi}) / beta(e^{i phi})` on a uniform
/// grid of `[0, 2 pi)`; samples where `beta` vanishes are skipped.
pub fn boundary_locus(s: &Scheme, n: usize) -> Result<Vec<LocusPoint>> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 locus samples, got {n}"
        )));
    }
    let alpha = s.alpha.to_f64_coeffs();
    let beta = s.beta.to_f64_coeffs();
    let eval = |c: &[f64], z: Complex64| {
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x)
    };
    let pts: Vec<LocusPoint> = (0..n)
        .filter_map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / n as f64;
            let w = Complex64::from_polar(1.0, phi);
            let b = eval(&beta, w);
            if b.norm() < 1e-14 {
                return None;
            }
            let z = eval(&alpha, w) / b;
            Some(LocusPoint {
                phi,
                re: z.re,
                im: z.im,
            })
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidArgument(
            "every locus sample is a pole".into(),
        ));
    }
    Ok(pts)
}

/// Radii probed along each ray when estimating the A(phi) angle.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusLadder {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// Golden-section steps used to climb each local maximum of the root
    /// modulus between ladder points; zero disables refinement.
    pub refine_steps: usize,
}

impl Default for RadiusLadder {
    fn default() -> Self {
        Self {
            min: 1e-4,
            max: 1e7,
            points: 64,
            refine_steps: 40,
        }
    }
}

impl RadiusLadder {
    pub fn log_radii(&self) -> Vec<f64> {
        let (a, b) = (self.min.log10(), self.max.log10());
        (0..self.points)
            .map(|k| a + (b - a) * k as f64 / (self.points - 1) as f64)
            .collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.log_radii()
            .into_iter()
            .map(|x| 10f64.powf(x))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleResult {
    pub phi_degrees: f64,
    pub tolerance_degrees: f64,
    pub probe_radii: Vec<f64>,
}

/// True if the ray `arg z = 180 deg + offset_deg` stays inside the region.
fn ray_stable(s: &Scheme, offset_deg: f64, ladder: &RadiusLadder) -> Result<bool> {
    let dir = Complex64::from_polar(1.0, (180.0 + offset_deg).to_radians());
    let excess = |lr: f64| modulus_excess(s, dir * 10f64.powf(lr));
    let lr = ladder.log_radii();
    let mut values = Vec::with_capacity(lr.len());
    for &x in &lr {
        let z = dir * 10f64.powf(x);
        if !in_region(s, z, UNIT_CIRCLE_TOL)? {
            return Ok(false);
        }
        values.push(excess(x)?);
    }
    if ladder.refine_steps == 0 {
        return Ok(true);
    }
    // instability lobes narrower than the ladder spacing show up as local
    // maxima of the modulus; climb each one
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for i in 1..lr.len().saturating_sub(1) {
        if !(values[i] >= values[i - 1] && values[i] >= values[i + 1]) {
            continue;
        }
        let (mut a, mut b) = (lr[i - 1], lr[i + 1]);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = excess(c)?;
        let mut fd = excess(d)?;
        for _ in 0..ladder.refine_steps {
            if fc.max(fd) > UNIT_CIRCLE_TOL {
                return Ok(false);
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = excess(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = excess(d)?;
            }
        }
        if fc.max(fd) > UNIT_CIRCLE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both rays `180 deg +- psi`; the second is redundant by conjugate symmetry
/// and doubles as a check on the root finder.
fn sector_edge_stable(s: &Scheme, psi: f64, ladder: &RadiusLadder) -> Result<bool> {
    Ok(ray_stable(s, psi, ladder)? && ray_stable(s, -psi, ladder)?)
}

pub fn stability_angle(s: &Scheme, tol_deg: f64) -> Result<AngleResult> {
    stability_angle_with(s, tol_deg, &RadiusLadder::default())
}

/// Largest half-angle `psi` (degrees) such that the rays at `180 +- psi`
/// pass the root condition at every probed radius, found by bisection.
pub fn stability_angle_with(
    s: &Scheme,
    tol_deg: f64,
    ladder: &RadiusLadder,
) -> Result<AngleResult> {
    if !(tol_deg > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol_deg}"
        )));
    }
    if !root_condition(&s.alpha, UNIT_CIRCLE_TOL)?.pass {
        return Err(Error::NotZeroStable);
    }
    let result = |phi: f64| AngleResult {
        phi_degrees: phi,
        tolerance_degrees: tol_deg,
        probe_radii: ladder.radii(),
    };
    if sector_edge_stable(s, 90.0, ladder)? {
        return Ok(result(90.0));
    }
    if !sector_edge_stable(s, 0.0, ladder)? {
        return Ok(result(0.0));
    }
    let (mut lo, mut hi) = (0.0_f64, 90.0_f64);
    while hi - lo > tol_deg {
        let mid = 0.5 * (lo + hi);
        if sector_edge_stable(s, mid, ladder)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(result(lo))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelCoefficients {
    pub gamma: Vec<f64>,
    /// Largest root modulus of the reduced polynomial; `|gamma_n| <= c r^n`
    /// for any `r` above it.
    pub decay_ratio: f64,
    /// Coefficients of the reduced polynomial `alpha / (zeta - 1)`.
    pub reduced: Vec<f64>,
}

impl KernelCoefficients {
    /// `sum_{j=0}^{q-1} a~_{q-1-j} gamma_{n-j}` for `n = 1..len`; should vanish.
    pub fn recursion_residuals(&self) -> Vec<f64> {
        let d = self.reduced.len() - 1;
        (1..self.gamma.len())
            .map(|n| {
                (0..=d)
                    .filter(|&j| j <= n)
                    .map(|j| self.reduced[d - j] * self.gamma[n - j])
                    .sum()
            })
            .collect()
    }

    /// Geometric rate fitted to the block maxima of `|gamma_n|` over the second
    /// half of the sequence.
    pub fn fitted_decay(&self) -> Option<f64> {
        let n = self.gamma.len();
        let block = 10;
        let pts: Vec<(f64, f64)> = (n / 4..n)
            .step_by(block)
            .filter_map(|start| {
                let end = (start + block).min(n);
                let m = self.gamma[start..end]
                    .iter()
                    .map(|g| g.abs())
                    .fold(0.0, f64::max);
                (m > 0.0).then(|| ((start + end) as f64 / 2.0, m.ln()))
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some((sxy / sxx).exp())
    }
}

/// Taylor coefficients of `1 / (zeta^(q-1) a~(1/zeta))` where
/// `alpha(zeta) = (zeta - 1) a~(zeta)`, for indices `0..=n`.
pub fn gamma_kernel(s: &Scheme, n: usize) -> Result<KernelCoefficients> {
    let reduced = s.alpha.exact_div(&RationalPolynomial::from_i64(&[-1, 1]))?;
    let mut decay_ratio = 0.0;
    if reduced.degree().unwrap_or(0) >= 1 {
        let set = crate::polyalg::complex_roots(&reduced)?;
        decay_ratio = set.max_modulus();
        if decay_ratio >= 1.0 - UNIT_CIRCLE_TOL {
            return Err(Error::RootsOutsideDisk);
        }
    }
    let c = reduced.to_f64_coeffs();
    let d = c.len() - 1;
    let lead = c[d];
    let mut gamma = Vec::with_capacity(n + 1);
    gamma.push(1.0 / lead);
    for m in 1..=n {
        let acc: f64 = (1..=d.min(m)).map(|j| c[d - j] * gamma[m - j]).sum();
        gamma.push(-acc / lead);
    }
    Ok(KernelCoefficients {
        gamma,
        decay_ratio,
        reduced: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::wsbdf_int;

    #[test]
    fn backward_euler_root_condition() {
        let p = RationalPolynomial::from_i64(&[-1, 1]);
        let r = root_condition(&p, UNIT_CIRCLE_TOL).unwrap();
        assert!(r.pass);
        assert_eq!(r.unimodular_roots.len(), 1);
        assert!(r.unimodular_roots[0].simple);
    }

    #[test]
    fn double_unimodular_root_fails() {
        let p = RationalPolynomial::from_i64(&[1, -2, 1]);
        let r = root_condition(&p, UNIT_CIRCLE_TOL).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn constant_rejected() {
        assert!(matches!(
            root_condition(&RationalPolynomial::from_i64(&[2]), 1e-9),
            Err(Error::ConstantPolynomial)
        ));
    }

    #[test]
    fn leading_cancellation_reduces_degree() {
        // backward euler: alpha - z beta = (1 - z) zeta - 1, cancels at z = 1
        let s = wsbdf_int(1, 1).unwrap();
        let r = root_condition_f64(
            &stability_polynomial(&s, Complex64::new(1.0, 0.0)),
            UNIT_CIRCLE_TOL,
        )
        .unwrap();
        assert!(!r.pass);
        assert!(r.max_modulus.is_infinite());
        let q = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1e-20, 0.0),
        ];
        let r = root_condition_f64(&q, UNIT_CIRCLE_TOL).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn empty_window_rejected() {
        assert!(Window::new(1.0, 1.0, 0.0, 1.0).is_err());
        let s = wsbdf_int(1, 1).unwrap();
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(region_grid(&s, w, 1, 5).is_err());
    }

    #[test]
    fn locus_needs_enough_samples() {
        let s = wsbdf_int(2, 1).unwrap();
        assert!(boundary_locus(&s, 4).is_err());
    }

    #[test]
    fn angle_rejects_zero_unstable() {
        let s = wsbdf_int(7, 1).unwrap();
        assert!(matches!(
            stability_angle(&s, 0.1),
            Err(Error::NotZeroStable)
        ));
    }

    #[test]
    fn kernel_trivial_for_q1() {
        let s = wsbdf_int(1, 1).unwrap();
        let k = gamma_kernel(&s, 5).unwrap();
        assert_eq!(k.gamma, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn kernel_rejects_unstable_reduced_polynomial() {
        let s = wsbdf_int(7, 1).unwrap();
        assert!(gamma_kernel(&s, 10).is_err());
    }
}
