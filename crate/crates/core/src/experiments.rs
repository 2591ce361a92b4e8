//! Periodic heat equation in Fourier modes, convergence studies, angle
//! tables, and the CSV/JSON table format shared by the command line tool.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::integrator::{run, step_count, DiagonalOperator, LinearProblem, ModeFn, Seeding};
use crate::polyalg::Rational;
use crate::schemes::{wsbdf, Scheme};
use crate::stability::stability_angle;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `u_t - Delta u + u = f` on `(-1, 1)^2` with period 2, expanded in
/// `cos(pi kx x) cos(pi ky y)`.
#[derive(Clone)]
pub struct ModalHeatProblem {
    pub modes: Vec<(i64, i64)>,
    /// Squared L2 norms of the basis functions.
    pub normalizations: Vec<f64>,
    pub problem: LinearProblem,
}

impl std::fmt::Debug for ModalHeatProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModalHeatProblem")
            .field("modes", &self.modes)
            .field("normalizations", &self.normalizations)
            .field("problem", &self.problem)
            .finish()
    }
}

/// `pi^2 (kx^2 + ky^2) + 1`.
pub fn mode_eigenvalue(kx: i64, ky: i64) -> f64 {
    PI * PI * (kx * kx + ky * ky) as f64 + 1.0
}

/// `||cos(pi kx x) cos(pi ky y)||^2` over `(-1, 1)^2`.
pub fn mode_normalization(kx: i64, ky: i64) -> f64 {
    let one = |k: i64| if k == 0 { 2.0 } else { 1.0 };
    one(kx) * one(ky)
}

impl ModalHeatProblem {
    pub fn new(
        modes: Vec<(i64, i64)>,
        forcing: ModeFn,
        exact: Option<ModeFn>,
        horizon: f64,
    ) -> Result<Self> {
        let eig = modes.iter().map(|&(a, b)| mode_eigenvalue(a, b)).collect();
        let normalizations = modes
            .iter()
            .map(|&(a, b)| mode_normalization(a, b))
            .collect();
        Ok(Self {
            modes,
            normalizations,
            problem: LinearProblem::new(DiagonalOperator::new(eig)?, forcing, exact, horizon)?,
        })
    }

    /// L2 norm in physical space of the field with modal coefficients `v`.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.normalizations)
            .map(|(x, w)| w * x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn convergence_study(&self, s: &Scheme, taus: &[f64]) -> Result<ConvergenceReport> {
        let w = self.normalizations.clone();
        convergence_study_with(s, &self.problem, taus, move |d| {
            d.iter().zip(&w).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
        })
    }
}

/// Single-mode manufactured problem with `u = (t^8 + 1) cos(pi x) cos(pi y)`
/// on `[0, 1]`.
pub fn build_example61() -> LinearProblem {
    example61_with_spectators(&[]).problem
}

/// The manufactured mode plus homogeneous modes `(kx, ky)` starting from unit
/// amplitude and decaying as `exp(-a t)`.
pub fn example61_with_spectators(spectators: &[(i64, i64)]) -> ModalHeatProblem {
    let a = mode_eigenvalue(1, 1);
    let decay: Vec<f64> = spectators
        .iter()
        .map(|&(x, y)| mode_eigenvalue(x, y))
        .collect();
    let n = spectators.len();
    let forcing: ModeFn = Arc::new(move |t: f64| {
        let mut v = vec![8.0 * t.powi(7) + a * (t.powi(8) + 1.0)];
        v.extend(std::iter::repeat_n(0.0, n));
        v
    });
    let exact: ModeFn = Arc::new(move |t: f64| {
        let mut v = vec![t.powi(8) + 1.0];
        v.extend(decay.iter().map(|b| (-b * t).exp()));
        v
    });
    let mut modes = vec![(1, 1)];
    modes.extend_from_slice(spectators);
    ModalHeatProblem::new(modes, forcing, Some(exact), 1.0).expect("positive eigenvalues")
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    pub rates: Vec<f64>,
}

/// `ln(e_i / e_{i+1}) / ln(tau_i / tau_{i+1})`.
pub fn observed_rates(taus: &[f64], errors: &[f64]) -> Vec<f64> {
    taus.windows(2)
        .zip(errors.windows(2))
        .map(|(t, e)| (e[0] / e[1]).ln() / (t[0] / t[1]).ln())
        .collect()
}

/// Terminal errors in the coefficient l2 norm with exact starting values.
pub fn convergence_study(s: &Scheme, p: &LinearProblem, taus: &[f64]) -> Result<ConvergenceReport> {
    convergence_study_with(s, p, taus, |d| d.iter().map(|x| x * x).sum::<f64>().sqrt())
}

pub fn convergence_study_with<F>(
    s: &Scheme,
    p: &LinearProblem,
    taus: &[f64],
    norm: F,
) -> Result<ConvergenceReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if taus.is_empty() {
        return Err(Error::InvalidArgument("no step sizes given".into()));
    }
    if taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    for &tau in taus {
        step_count(tau, p.horizon)?;
    }
    let exact_end = p.exact_at(p.horizon)?;
    let errors = taus
        .par_iter()
        .map(|&tau| {
            let tr = run(s, p, tau, Seeding::Exact)?;
            let d: Vec<f64> = tr
                .last()
                .iter()
                .zip(&exact_end)
                .map(|(a, b)| a - b)
                .collect();
            Ok(norm(&d))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConvergenceReport {
        taus: taus.to_vec(),
        rates: observed_rates(taus, &errors),
        errors,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleTable {
    pub qs: Vec<usize>,
    pub thetas: Vec<String>,
    /// `entries[i][j]` for `qs[i]`, `thetas[j]`; `None` marks a scheme that is
    /// not zero-stable.
    pub entries: Vec<Vec<Option<f64>>>,
    pub tolerance_degrees: f64,
}

pub fn angle_table(thetas: &[Rational], qs: &[usize], tol_deg: f64) -> Result<AngleTable> {
    let cells: Vec<(usize, usize)> = (0..qs.len())
        .flat_map(|i| (0..thetas.len()).map(move |j| (i, j)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(i, j)| {
            let s = wsbdf(qs[i], thetas[j].clone())?;
            match stability_angle(&s, tol_deg) {
                Ok(r) => Ok(Some(r.phi_degrees)),
                Err(Error::NotZeroStable) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = values
        .chunks(thetas.len().max(1))
        .map(|c| c.to_vec())
        .collect();
    Ok(AngleTable {
        qs: qs.to_vec(),
        thetas: thetas.iter().map(|t| t.to_string()).collect(),
        entries,
        tolerance_degrees: tol_deg,
    })
}

/// Tabular output with `#` metadata, rendered as CSV or as a JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(cell_text).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: serde_json::Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = json!({
            "meta": meta,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            self.to_json()
        } else {
            self.to_csv()
        }
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Bool(b) => u8::from(*b).to_string(),
        other => other.to_string(),
    }
}

/// Convergence table: `tau, error, rate` with the rate empty on the first row.
pub fn convergence_table(s: &Scheme, tau_labels: &[String], report: &ConvergenceReport) -> Table {
    let mut t = Table::new(&["tau", "error", "rate"])
        .meta("scheme", format!("wsbdf q={}", s.q))
        .meta("theta", &s.theta)
        .meta("taus", tau_labels.join(" "))
        .meta("version", TOOL_VERSION);
    for (i, (label, e)) in tau_labels.iter().zip(&report.errors).enumerate() {
        let rate = if i == 0 {
            Value::Null
        } else {
            json!(report.rates[i - 1])
        };
        t.push(vec![json!(label), json!(e), rate]);
    }
    t
}

pub fn angle_table_output(table: &AngleTable) -> Table {
    let mut cols = vec!["q".to_string()];
    cols.extend(table.thetas.iter().map(|t| format!("theta={t}")));
    let col_refs: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
    let mut t = Table::new(&col_refs)
        .meta(
            "quantity",
            "A(phi) angle in degrees; unstable = not zero-stable",
        )
        .meta("tolerance_degrees", table.tolerance_degrees)
        .meta("version", TOOL_VERSION);
    for (q, row) in table.qs.iter().zip(&table.entries) {
        let mut r = vec![json!(q)];
        r.extend(row.iter().map(|e| match e {
            Some(v) => json!(v),
            None => json!("unstable"),
        }));
        t.push(r);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::wsbdf_int;

    #[test]
    fn manufactured_residual_vanishes() {
        let p = build_example61();
        let a = p.operator.eigenvalues()[0];
        assert!((a - (2.0 * PI * PI + 1.0)).abs() < 1e-14);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let y = p.exact_at(t).unwrap()[0];
            let dy = 8.0 * t.powi(7);
            assert!((dy + a * y - p.forcing_at(t).unwrap()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizations() {
        assert_eq!(mode_normalization(1, 1), 1.0);
        assert_eq!(mode_normalization(0, 3), 2.0);
        assert_eq!(mode_normalization(0, 0), 4.0);
    }

    #[test]
    fn rates_of_halved_errors() {
        assert_eq!(
            observed_rates(&[0.2, 0.1, 0.05], &[4.0, 2.0, 1.0]),
            vec![1.0, 1.0]
        );
    }

    #[test]
    fn study_rejects_non_dividing_tau() {
        let s = wsbdf_int(2, 1).unwrap();
        let p = build_example61();
        assert!(matches!(
            convergence_study(&s, &p, &[0.3]),
            Err(Error::StepDoesNotDivide { .. })
        ));
        assert!(convergence_study(&s, &p, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["a", "b"]).meta("k", "v");
        t.push(vec![json!(1.5), json!("x")]);
        assert_eq!(t.to_csv(), "# k=v\na,b\n1.5,x\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["rows"][0][0], json!(1.5));
        assert_eq!(v["meta"]["k"], json!("v"));
    }
}
