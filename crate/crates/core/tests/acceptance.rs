//! Acceptance suite. Each criterion prints one PASS/FAIL line with its runtime;
//! the process exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_traits::Zero;
use wsbdf::experiments::{build_example61, convergence_study};
use wsbdf::integrator::{run, verify_estimate, Estimate, Seeding};
use wsbdf::multipliers::*;
use wsbdf::polyalg::{count_real_roots, int, min_on_interval, rat, RationalPolynomial};
use wsbdf::schemes::{bdf_alpha, consistency_defect, sbdf_alpha, wsbdf_int};
use wsbdf::stability::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn matches_i64(p: &RationalPolynomial, want: &[i64]) -> bool {
    // coefficients of 420 p, highest power first
    let got: Vec<_> = p.scale(&int(420)).coeffs().iter().rev().cloned().collect();
    got == want.iter().map(|&w| int(w)).collect::<Vec<_>>()
}

fn coefficient_goldens() -> Outcome {
    let a = bdf_alpha(7).map_err(|e| e.to_string())?;
    let at = sbdf_alpha(7).map_err(|e| e.to_string())?;
    let s = wsbdf_int(7, 3).map_err(|e| e.to_string())?;
    ensure(
        matches_i64(&a, &[1089, -2940, 4410, -4900, 3675, -1764, 490, -60]),
        "420 a",
    )?;
    ensure(
        matches_i64(&at, &[60, 609, -1260, 1050, -700, 315, -84, 10]),
        "420 a~",
    )?;
    ensure(
        matches_i64(
            &s.alpha,
            &[3147, -10038, 15750, -16800, 12425, -5922, 1638, -200],
        ),
        "420 alpha",
    )?;
    Ok("420 a, 420 a~, 420 alpha exact".into())
}

fn order_conditions() -> Outcome {
    let s = wsbdf_int(7, 3).map_err(|e| e.to_string())?;
    let r = s.order_condition_residuals();
    ensure(
        r.len() == 8 && r.iter().all(Zero::is_zero),
        format!("residuals {r:?}"),
    )?;
    Ok("residuals l=0..7 all exactly zero".into())
}

fn zero_stability() -> Outcome {
    let tol = UNIT_CIRCLE_TOL;
    let bdf = root_condition(&wsbdf_int(7, 1).map_err(|e| e.to_string())?.alpha, tol)
        .map_err(|e| e.to_string())?;
    ensure(!bdf.pass, "BDF7 passes the root condition")?;
    let sbdf_scheme = wsbdf_int(7, 0).map_err(|e| e.to_string())?;
    let sbdf = root_condition(&sbdf_scheme.alpha, tol).map_err(|e| e.to_string())?;
    ensure(!sbdf.pass, "SBDF7 passes the root condition")?;
    let at = sbdf_alpha(7).map_err(|e| e.to_string())?;
    ensure(
        at == sbdf_scheme.alpha,
        "weight zero differs from the shifted scheme",
    )?;
    let sign = at.sign_at(&int(-13)) * at.sign_at(&int(-12));
    ensure(sign < 0, "a~(-13) a~(-12) is not negative")?;
    ensure(
        count_real_roots(&at, &int(-13), &int(-12)).map_err(|e| e.to_string())? == 1,
        "root count in [-13,-12]",
    )?;
    let w3 = root_condition(&wsbdf_int(7, 3).map_err(|e| e.to_string())?.alpha, tol)
        .map_err(|e| e.to_string())?;
    ensure(w3.pass, "weight 3 fails the root condition")?;
    Ok(format!(
        "BDF7 max|root|={:.6}, SBDF7 max|root|={:.6}, weight 3 max|root|={:.12}",
        bdf.max_modulus, sbdf.max_modulus, w3.max_modulus
    ))
}

fn multiplier_certificate() -> Outcome {
    let s = wsbdf_int(7, 3).map_err(|e| e.to_string())?;
    let m = MultiplierCandidate::seven_step([1.6, -1.6, 1.1, -0.3]);
    let mu = m.mu_poly().map_err(|e| e.to_string())?;
    let real6 = RationalPolynomial::from_i64(&[62, -1105, 24891, -104870, 173872, -124640, 32000]);
    // Re(420 alpha(w) mu(conj w)) = (1 - x) 4 P(x) with 10 P = Real6
    let lhs = symmetrized_real_part(&s.alpha.scale(&int(420)), &mu);
    ensure(
        lhs == (&RationalPolynomial::from_i64(&[1, -1]) * &real6).scale(&rat(2, 5)),
        "Real6 mismatch",
    )?;
    let pair = extract_shifted_pair(&s, &m).map_err(|e| e.to_string())?;
    let g = symmetrized_real_part(&pair.delta, &pair.kappa);
    let g_expected =
        RationalPolynomial::from_ratios(&[(1, 10), (17, 10), (68, 10), (-156, 10), (72, 10)]);
    ensure(g == g_expected, "g mismatch")?;
    let (x, min) = min_on_interval(&g, -1.0, 1.0, 1e-12).map_err(|e| e.to_string())?;
    ensure((min - 0.01379862357).abs() <= 1e-6, format!("min {min}"))?;
    ensure((x + 0.09331476).abs() <= 1e-6, format!("argmin {x}"))?;
    ensure(g.eval(&int(1)) == rat(1, 5), "g(1) != 1/5")?;
    let report = verify(&s, &m).map_err(|e| e.to_string())?;
    ensure(report.overall, "certification fails")?;
    ensure(
        report.c_tilde_star >= 0.01,
        format!("c~* {}", report.c_tilde_star),
    )?;
    Ok(format!(
        "min g = {min:.11} at {x:.8}, g(1) = 1/5, c~* = {:.11}",
        report.c_tilde_star
    ))
}

fn lemma_box() -> Outcome {
    let m = [1.6, -1.6, 1.1, -0.3];
    ensure(
        SearchBox::necessary().contains(m) && lemma_box_filter(m),
        "known multiplier outside the box",
    )?;
    let bx = SearchBox::zero_mu4();
    let n = bx.grid(0.1).map_err(|e| e.to_string())?.len();
    let hits = search_multipliers_in(&bx, 0.1).map_err(|e| e.to_string())?;
    ensure(n > 0, "empty grid")?;
    if let Some(h) = hits.first() {
        return Err(format!(
            "{} candidates with mu4 = 0 certified, first {:?}",
            hits.len(),
            h.candidate.mu
        ));
    }
    Ok(format!(
        "known multiplier inside; {n} grid candidates with mu4 = 0, none certified"
    ))
}

fn stability_angles() -> Outcome {
    let mut worst = 0.0f64;
    let cases: [(i64, &[f64]); 2] = [
        (1, &[86.03, 73.35, 51.84, 17.84]),
        (100, &[89.99, 85.93, 73.2, 51.63, 17.47]),
    ];
    let mut got = Vec::new();
    for (theta, want) in cases {
        let within = if theta == 1 { 0.1 } else { 0.15 };
        for (k, w) in want.iter().enumerate() {
            let q = k + 3;
            let s = wsbdf_int(q, theta).map_err(|e| e.to_string())?;
            let phi = stability_angle(&s, 0.02)
                .map_err(|e| e.to_string())?
                .phi_degrees;
            got.push(format!("{phi:.3}"));
            worst = worst.max((phi - w).abs());
            ensure(
                (phi - w).abs() <= within,
                format!("theta={theta} q={q}: {phi} vs {w}"),
            )?;
        }
    }
    Ok(format!(
        "angles [{}], worst deviation {worst:.3} deg",
        got.join(", ")
    ))
}

fn region_monotonicity() -> Outcome {
    let window = Window::new(-15.0, 25.0, -25.0, 25.0).map_err(|e| e.to_string())?;
    let grid = |theta| -> Result<RegionGrid, String> {
        region_grid(
            &wsbdf_int(7, theta).map_err(|e| e.to_string())?,
            window,
            201,
            201,
        )
        .map_err(|e| e.to_string())
    };
    let (g1, g3, g10) = (grid(1)?, grid(3)?, grid(10)?);
    ensure(g3.contains(&g1), "region(1) not inside region(3)")?;
    ensure(g10.contains(&g3), "region(3) not inside region(10)")?;
    Ok(format!(
        "inside counts {} <= {} <= {}",
        g1.count_inside(),
        g3.count_inside(),
        g10.count_inside()
    ))
}

fn convergence_table() -> Outcome {
    let taus = [1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0];
    let p = build_example61();
    let study = |theta| {
        convergence_study(&wsbdf_int(7, theta).map_err(|e| e.to_string())?, &p, &taus)
            .map_err(|e| e.to_string())
    };
    let (r3, r10, r1) = (study(3)?, study(10)?, study(1)?);
    let mut failures = Vec::new();
    for (got, want) in r3.errors.iter().zip([5.06e-7, 4.03e-9, 3.16e-11, 2.42e-13]) {
        if !(got / want <= 2.0 && want / got <= 2.0) {
            failures.push(format!("weight 3 error {got:.3e} vs {want:.3e}"));
        }
    }
    for (got, want) in r3.rates.iter().zip([6.97, 6.99, 7.03]) {
        if (got - want).abs() > 0.3 {
            failures.push(format!("weight 3 rate {got:.3} vs {want}"));
        }
    }
    for (got, want) in r10.rates.iter().zip([6.5694, 6.9215, 7.1477]) {
        if (got - want).abs() > 0.4 {
            failures.push(format!("weight 10 rate {got:.3} vs {want}"));
        }
    }
    if r1.errors[3] <= r1.errors[2] {
        failures.push(format!(
            "weight 1 error does not grow from 1/80 to 1/160 ({:.3e} -> {:.3e})",
            r1.errors[2], r1.errors[3]
        ));
    }
    let fmt = |v: &[f64], e: bool| {
        v.iter()
            .map(|x| {
                if e {
                    format!("{x:.2e}")
                } else {
                    format!("{x:.2}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let summary = format!(
        "w3 errors [{}] rates [{}]; w10 rates [{}]; w1 errors [{}]",
        fmt(&r3.errors, true),
        fmt(&r3.rates, false),
        fmt(&r10.rates, false),
        fmt(&r1.errors, true)
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn property_suites() -> Outcome {
    let s = wsbdf_int(7, 3).map_err(|e| e.to_string())?;
    let p = build_example61();
    let mut ratios = Vec::new();
    for n in [20.0, 40.0, 80.0, 160.0, 320.0] {
        let tr = run(&s, &p, 1.0 / n, Seeding::Exact).map_err(|e| e.to_string())?;
        ratios.push(
            verify_estimate(&tr, Estimate::Thm11)
                .map_err(|e| e.to_string())?
                .ratio_sup,
        );
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    ensure(hi <= 4.0 * lo, format!("ratio spread {ratios:?}"))?;
    let kernel = gamma_kernel(&s, 400).map_err(|e| e.to_string())?;
    let decay = kernel.fitted_decay().ok_or("no decay fit")?;
    ensure(decay < 1.0, format!("fitted decay {decay}"))?;
    let defect = |tau: f64| {
        let n = (1.5 / tau).round() as usize - s.q;
        consistency_defect(
            &s,
            |t| (t + 0.5).exp() * t.sin(),
            |t| (t + 0.5).exp() * (t.sin() + t.cos()),
            tau,
            n,
        )
        .map_err(|e| e.to_string())
    };
    let rate = (defect(0.1)? / defect(0.05)?).log2();
    ensure(
        (rate - 7.0).abs() <= 0.35,
        format!("defect exponent {rate}"),
    )?;
    Ok(format!(
        "ratio spread {:.3}, fitted decay {decay:.4}, defect exponent {rate:.3}",
        hi / lo
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "1 coefficient goldens",
            coefficient_goldens,
            Duration::from_secs(1),
        ),
        ("2 order conditions", order_conditions, Duration::MAX),
        ("3 zero-stability dichotomy", zero_stability, Duration::MAX),
        (
            "4 multiplier certificate",
            multiplier_certificate,
            Duration::MAX,
        ),
        (
            "5 search box and mu4 = 0",
            lemma_box,
            Duration::from_secs(300),
        ),
        (
            "6 stability angles",
            stability_angles,
            Duration::from_secs(120),
        ),
        (
            "7 region monotonicity",
            region_monotonicity,
            Duration::from_secs(120),
        ),
        (
            "8 convergence table",
            convergence_table,
            Duration::from_secs(10),
        ),
        ("9 property suites", property_suites, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("over budget {budget:?}; {msg}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!(
                "PASS criterion {name} ({:.2}s): {msg}",
                elapsed.as_secs_f64()
            ),
            Err(msg) => {
                failed += 1;
                println!(
                    "FAIL criterion {name} ({:.2}s): {msg}",
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
