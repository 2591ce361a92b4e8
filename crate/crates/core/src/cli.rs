//! Command line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    angle_table, angle_table_output, build_example61, convergence_study, convergence_table, Table,
    TOOL_VERSION,
};
use crate::integrator::{run, PolynomialProblem, Seeding};
use crate::multipliers::{search_multipliers_in, verify, MultiplierCandidate, SearchBox};
use crate::polyalg::{parse_rational, rational_to_f64, Rational};
use crate::schemes::{wsbdf, Scheme};
use crate::stability::{boundary_locus, region_grid, stability_angle, Window};

#[derive(Parser, Debug)]
#[command(
    name = "wsbdf",
    version,
    about = "Weighted and shifted BDF schemes: coefficients, stability and convergence"
)]
struct Cli {
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SchemeArgs {
    /// Number of steps, 1 to 7.
    #[arg(long)]
    q: usize,
    /// Weight, as an integer, fraction (`200/7`) or decimal.
    #[arg(long, default_value = "3", value_parser = parse_rational_arg)]
    theta: Rational,
}

impl SchemeArgs {
    fn scheme(&self) -> Result<Scheme> {
        wsbdf(self.q, self.theta.clone())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact coefficients of alpha and beta.
    Coeffs(SchemeArgs),
    /// Stability region membership raster.
    Region {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// `re_min,re_max,im_min,im_max`
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-15.0, 25.0, -25.0, 25.0])]
        window: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        nx: usize,
        #[arg(long, default_value_t = 201)]
        ny: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary locus `alpha/beta` on the unit circle.
    Locus {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 720)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A(phi) stability angle in degrees.
    Angle {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long = "tol-deg", default_value_t = 0.01)]
        tol_deg: f64,
    },
    /// Certify a multiplier candidate.
    VerifyMultiplier {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// `mu_1,...,mu_q`
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        mu: Vec<f64>,
    },
    /// Grid search for multipliers of the seven-step scheme with weight 3.
    SearchMultipliers {
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Search only candidates with `mu_4 = 0`.
        #[arg(long)]
        zero_mu4: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a problem given as a JSON file.
    Solve {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_parser = parse_rational_arg)]
        tau: Rational,
        #[arg(long = "T", default_value = "1", value_parser = parse_rational_arg)]
        horizon: Rational,
        #[arg(long)]
        problem: PathBuf,
        /// Start from `u^0` with lower-order BDF steps.
        #[arg(long)]
        bootstrap: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence table for the manufactured heat problem.
    Converge {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_delimiter = ',', default_values = ["1/20", "1/40", "1/80", "1/160"])]
        taus: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of A(phi) angles, rows q and columns theta.
    AngleTable {
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5, 6, 7])]
        qs: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values = ["1", "3", "10", "100", "1000"])]
        thetas: Vec<String>,
        #[arg(long = "tol-deg", default_value_t = 0.01)]
        tol_deg: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn coeffs_table(s: &Scheme) -> Table {
    let lcm = s
        .alpha
        .common_denominator()
        .lcm(&s.beta.common_denominator());
    let mut t = Table::new(&["poly", "power", "num", "den", "scaled"])
        .meta("scheme", format!("wsbdf q={}", s.q))
        .meta("theta", &s.theta)
        .meta("common_denominator", &lcm)
        .meta("version", TOOL_VERSION);
    for (name, coeffs) in [("alpha", s.alpha_coeffs()), ("beta", s.beta_coeffs())] {
        for (k, c) in coeffs.iter().enumerate().rev() {
            let scaled = c * Rational::from_integer(lcm.clone());
            t.push(vec![
                json!(name),
                json!(k),
                json!(c.numer().to_string()),
                json!(c.denom().to_string()),
                json!(scaled.to_integer().to_string()),
            ]);
        }
    }
    t
}

fn parse_taus(labels: &[String]) -> Result<Vec<f64>> {
    labels
        .iter()
        .map(|l| {
            let r = parse_rational(l)?;
            if r <= Rational::zero() {
                return Err(Error::InvalidArgument(format!(
                    "step size {l} must be positive"
                )));
            }
            Ok(rational_to_f64(&r))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    let as_json = cli.json;
    match cli.command {
        Command::Coeffs(a) => emit(&None, &coeffs_table(&a.scheme()?).render(as_json)),
        Command::Region {
            scheme,
            window,
            nx,
            ny,
            out,
        } => {
            let s = scheme.scheme()?;
            if window.len() != 4 {
                return Err(Error::InvalidArgument(format!(
                    "window needs 4 values, got {}",
                    window.len()
                )));
            }
            let w = Window::new(window[0], window[1], window[2], window[3])?;
            let g = region_grid(&s, w, nx, ny)?;
            let mut t = Table::new(&["re", "im", "inside"])
                .meta("scheme", format!("wsbdf q={}", s.q))
                .meta("theta", &s.theta)
                .meta("grid", format!("{nx}x{ny}"))
                .meta("version", TOOL_VERSION);
            for (re, im, inside) in g.rows() {
                t.push(vec![json!(re), json!(im), json!(u8::from(inside))]);
            }
            emit(&out, &t.render(as_json))
        }
        Command::Locus { scheme, n, out } => {
            let s = scheme.scheme()?;
            let mut t = Table::new(&["phi", "re", "im"])
                .meta("scheme", format!("wsbdf q={}", s.q))
                .meta("theta", &s.theta)
                .meta("version", TOOL_VERSION);
            for p in boundary_locus(&s, n)? {
                t.push(vec![json!(p.phi), json!(p.re), json!(p.im)]);
            }
            emit(&out, &t.render(as_json))
        }
        Command::Angle { scheme, tol_deg } => {
            let r = stability_angle(&scheme.scheme()?, tol_deg)?;
            let text = if as_json {
                format!("{}\n", serde_json::to_string_pretty(&r)?)
            } else {
                format!("{}\n", r.phi_degrees)
            };
            emit(&None, &text)
        }
        Command::VerifyMultiplier { scheme, mu } => {
            let s = scheme.scheme()?;
            let m = MultiplierCandidate::new(s.q, mu)?;
            let r = verify(&s, &m)?;
            let text = if as_json {
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({"candidate": m, "report": r}))?
                )
            } else {
                let v = serde_json::to_value(&r)?;
                let mut t = Table::new(&["field", "value"])
                    .meta("scheme", format!("wsbdf q={}", s.q))
                    .meta("theta", &s.theta)
                    .meta("version", TOOL_VERSION);
                if let Some(obj) = v.as_object() {
                    for (k, val) in obj {
                        t.push(vec![json!(k), val.clone()]);
                    }
                }
                t.to_csv()
            };
            emit(&None, &text)
        }
        Command::SearchMultipliers {
            step,
            zero_mu4,
            out,
        } => {
            let bx = if zero_mu4 {
                SearchBox::zero_mu4()
            } else {
                SearchBox::necessary()
            };
            let hits = search_multipliers_in(&bx, step)?;
            let mut t = Table::new(&["mu1", "mu2", "mu3", "mu4", "c_tilde_star", "hat_c_star"])
                .meta("scheme", "wsbdf q=7")
                .meta("theta", 3)
                .meta("step", step)
                .meta("version", TOOL_VERSION);
            for h in hits {
                let mu = &h.candidate.mu;
                t.push(vec![
                    json!(mu[0]),
                    json!(mu[1]),
                    json!(mu[2]),
                    json!(mu[3]),
                    json!(h.report.c_tilde_star),
                    json!(h.report.hat_c_star),
                ]);
            }
            emit(&out, &t.render(as_json))
        }
        Command::Solve {
            scheme,
            tau,
            horizon,
            problem,
            bootstrap,
            out,
        } => {
            let s = scheme.scheme()?;
            let text = std::fs::read_to_string(&problem)?;
            let pp: PolynomialProblem = serde_json::from_str(&text)?;
            let initial = pp.initial.clone();
            let horizon_f = rational_to_f64(&horizon);
            if let Some(h) = pp.horizon {
                if (h - horizon_f).abs() > 1e-12 * h.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "problem file horizon {h} disagrees with --T {horizon}"
                    )));
                }
            }
            let p = pp.into_problem(horizon_f)?;
            let seeding = match (initial, bootstrap) {
                (Some(mut v), true) => Seeding::Bootstrap(v.swap_remove(0)),
                (Some(v), false) => Seeding::Supplied(v),
                (None, true) => Seeding::Bootstrap(p.exact_at(0.0)?),
                (None, false) => Seeding::Exact,
            };
            let tau_f = tau
                .to_f64()
                .ok_or_else(|| Error::InvalidArgument(format!("bad step size {tau}")))?;
            let tr = run(&s, &p, tau_f, seeding)?;
            let mut t = Table::new(&["n", "t", "h_norm", "v_norm"])
                .meta("scheme", format!("wsbdf q={}", s.q))
                .meta("theta", &s.theta)
                .meta("tau", &tau)
                .meta("version", TOOL_VERSION);
            for n in 0..=tr.steps() {
                t.push(vec![
                    json!(n),
                    json!(tr.times[n]),
                    json!(tr.h_norms[n]),
                    json!(tr.v_norms[n]),
                ]);
            }
            emit(&out, &t.render(as_json))
        }
        Command::Converge { scheme, taus, out } => {
            let s = scheme.scheme()?;
            let tv = parse_taus(&taus)?;
            let report = convergence_study(&s, &build_example61(), &tv)?;
            emit(&out, &convergence_table(&s, &taus, &report).render(as_json))
        }
        Command::AngleTable {
            qs,
            thetas,
            tol_deg,
            out,
        } => {
            let th: Vec<Rational> = thetas
                .iter()
                .map(|t| parse_rational(t))
                .collect::<Result<_>>()?;
            let table = angle_table(&th, &qs, tol_deg)?;
            emit(&out, &angle_table_output(&table).render(as_json))
        }
    }
}

/// Runs the tool on `argv` (program name first); returns the exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
