use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsbdf::experiments::*;
use wsbdf::integrator::*;
use wsbdf::schemes::{consistency_defect, wsbdf_int};

fn smooth_scalar(a: f64) -> LinearProblem {
    // u = e^t, f = u' + a u
    LinearProblem::new(
        DiagonalOperator::new(vec![a]).unwrap(),
        Arc::new(move |t: f64| vec![(1.0 + a) * t.exp()]),
        Some(Arc::new(|t: f64| vec![t.exp()])),
        1.0,
    )
    .unwrap()
}

fn random_start(rng: &mut ChaCha8Rng, q: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..q)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

#[test]
fn polynomial_solutions_propagate_exactly() {
    let s = wsbdf_int(7, 3).unwrap();
    let coeffs = [0.3, -1.0, 0.5, 2.0, -0.25, 0.125, 1.0, 0.75];
    let u = move |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let du = move |t: f64| {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c)
    };
    let p = LinearProblem::new(
        DiagonalOperator::degenerate(vec![0.0]).unwrap(),
        Arc::new(move |t| vec![du(t)]),
        Some(Arc::new(move |t| vec![u(t)])),
        2.0,
    )
    .unwrap();
    let tr = run(&s, &p, 0.05, Seeding::Exact).unwrap();
    for (t, v) in tr.times.iter().zip(&tr.states) {
        let e = u(*t);
        assert!(
            (v[0] - e).abs() <= 1e-9 * e.abs().max(1.0),
            "t={t}: {} vs {e}",
            v[0]
        );
    }
}

fn observed_order(q: usize, theta: i64, taus: &[f64]) -> f64 {
    let s = wsbdf_int(q, theta).unwrap();
    let r = convergence_study(&s, &smooth_scalar(2.0), taus).unwrap();
    *r.rates.last().unwrap()
}

#[test]
fn observed_orders_match_step_count() {
    // ladders chosen to stay above the roundoff floor
    for q in 1..=5 {
        let taus = if q <= 4 {
            [1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0]
        } else {
            [1.0 / 10.0, 1.0 / 20.0, 1.0 / 40.0]
        };
        let rate = observed_order(q, 1, &taus);
        assert!((rate - q as f64).abs() <= 0.1 * q as f64, "q={q}: {rate}");
    }
    let rate = observed_order(7, 3, &[1.0 / 20.0, 1.0 / 40.0]);
    assert!((rate - 7.0).abs() <= 0.7, "{rate}");
}

#[test]
fn modes_are_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eig: Vec<f64> = (0..10).map(|_| rng.gen_range(0.1..500.0)).collect();
    let amp: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let start = random_start(&mut rng, 7, 10);
    let s = wsbdf_int(7, 3).unwrap();
    let a2 = amp.clone();
    let full = LinearProblem::new(
        DiagonalOperator::new(eig.clone()).unwrap(),
        Arc::new(move |t| a2.iter().map(|c| c * (t * 3.0).sin()).collect()),
        None,
        1.0,
    )
    .unwrap();
    let tr = run(&s, &full, 1.0 / 64.0, Seeding::Supplied(start.clone())).unwrap();
    for k in 0..10 {
        let c = amp[k];
        let p = LinearProblem::new(
            DiagonalOperator::new(vec![eig[k]]).unwrap(),
            Arc::new(move |t| vec![c * (t * 3.0).sin()]),
            None,
            1.0,
        )
        .unwrap();
        let single = run(
            &s,
            &p,
            1.0 / 64.0,
            Seeding::Supplied(start.iter().map(|v| vec![v[k]]).collect()),
        )
        .unwrap();
        for (a, b) in tr.states.iter().zip(&single.states) {
            assert_eq!(a[k].to_bits(), b[0].to_bits());
        }
    }
}

#[test]
fn homogeneous_runs_stay_bounded_for_weight_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = 2.0 * PI * PI + 1.0;
    let s = wsbdf_int(7, 3).unwrap();
    let start = random_start(&mut rng, 7, 1);
    let sups: Vec<f64> = [20.0, 40.0, 80.0, 160.0, 320.0]
        .iter()
        .map(|n| {
            let p =
                LinearProblem::homogeneous(DiagonalOperator::new(vec![a]).unwrap(), 1.0).unwrap();
            let tr = run(&s, &p, 1.0 / n, Seeding::Supplied(start.clone())).unwrap();
            tr.h_norms.iter().cloned().fold(0.0, f64::max)
        })
        .collect();
    let max = sups.iter().cloned().fold(0.0, f64::max);
    let init = start.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
    assert!(max <= 1e3 * init, "{sups:?}");
}

#[test]
fn parasitic_growth_without_weight() {
    // the classical seven-step method amplifies rough starting data at this step
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = 2.0 * PI * PI + 1.0;
    let start = random_start(&mut rng, 7, 1);
    let ratio = |theta: i64, n: f64| {
        let s = wsbdf_int(7, theta).unwrap();
        let p = LinearProblem::homogeneous(DiagonalOperator::new(vec![a]).unwrap(), 1.0).unwrap();
        let tr = run(&s, &p, 1.0 / n, Seeding::Supplied(start.clone())).unwrap();
        verify_estimate(&tr, Estimate::Thm11).unwrap().ratio_sup
    };
    let bdf = ratio(1, 160.0);
    let weighted = ratio(3, 160.0);
    assert!(bdf > 100.0 * weighted, "{bdf} vs {weighted}");
    assert!(bdf > 10.0 * ratio(1, 20.0));
}

#[test]
fn estimate_ratios_on_manufactured_problem() {
    let s = wsbdf_int(7, 3).unwrap();
    let p = build_example61();
    for e in [Estimate::Thm11, Estimate::Thm12, Estimate::Cor13] {
        let r: Vec<f64> = [20.0, 40.0, 80.0, 160.0]
            .iter()
            .map(|n| {
                let tr = run(&s, &p, 1.0 / n, Seeding::Exact).unwrap();
                verify_estimate(&tr, e).unwrap().ratio_sup
            })
            .collect();
        let (lo, hi) = r
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi < 2.0 * lo, "{e:?}: {r:?}");
    }
}

#[test]
fn dot_operator_on_samples() {
    let s = wsbdf_int(7, 3).unwrap();
    let sampled = |f: fn(f64) -> f64, tau: f64| -> Trajectory {
        let p = LinearProblem::homogeneous(DiagonalOperator::new(vec![1.0]).unwrap(), 1.0).unwrap();
        let mut tr = run(&s, &p, tau, Seeding::Supplied(vec![vec![0.0]; 7])).unwrap();
        tr.states = tr.times.iter().map(|&t| vec![f(t)]).collect();
        tr
    };
    let c = sampled(|_| 2.5, 0.05);
    assert!(dot_operator(&s, &c, 10).unwrap()[0].abs() < 1e-12);
    let lin = sampled(|t| t, 0.05);
    assert!((dot_operator(&s, &lin, 10).unwrap()[0] - 1.0).abs() < 1e-11);
    // defect of t^8 against 3u'(t_m) - 2u'(t_{m-1}) shrinks like tau^7
    let defect = |tau: f64| {
        let tr = sampled(|t| t.powi(8), tau);
        let m = tr.steps();
        let du = |t: f64| 8.0 * t.powi(7);
        (dot_operator(&s, &tr, m).unwrap()[0] - 3.0 * du(tr.times[m]) + 2.0 * du(tr.times[m - 1]))
            .abs()
    };
    let rate = (defect(0.1) / defect(0.05)).log2();
    assert!((rate - 7.0).abs() < 0.35, "{rate}");
}

#[test]
fn defect_richardson_exponent() {
    let s = wsbdf_int(7, 3).unwrap();
    // newest node pinned at t = 1.5
    let d = |tau: f64| {
        let n = (1.5 / tau).round() as usize - s.q;
        consistency_defect(
            &s,
            |t| (t + 0.5).exp() * t.sin(),
            |t| (t + 0.5).exp() * (t.sin() + t.cos()),
            tau,
            n,
        )
        .unwrap()
    };
    let rate = (d(0.1) / d(0.05)).log2();
    assert!((rate - 7.0).abs() <= 0.35, "{rate}");
}

#[test]
fn norms_satisfy_cauchy_schwarz() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let dim = rng.gen_range(1..8);
        let op =
            DiagonalOperator::new((0..dim).map(|_| rng.gen_range(0.01..100.0)).collect()).unwrap();
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let pairing: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let (_, vn, _) = norms(&op, &v).unwrap();
        let (_, _, wd) = norms(&op, &w).unwrap();
        assert!(pairing.abs() <= vn * wd * (1.0 + 1e-12));
    }
}

#[test]
fn spectator_modes_do_not_change_the_error() {
    let s = wsbdf_int(7, 3).unwrap();
    let single = build_example61();
    let multi = example61_with_spectators(&[(0, 1), (2, 3), (5, 0), (7, 7)]);
    for n in [20.0, 80.0] {
        let a = run(&s, &single, 1.0 / n, Seeding::Exact).unwrap();
        let b = run(&s, &multi.problem, 1.0 / n, Seeding::Exact).unwrap();
        assert!((a.last()[0] - b.last()[0]).abs() <= 1e-12);
        assert!(((a.last()[0] - 2.0).abs() - (b.last()[0] - 2.0).abs()).abs() <= 1e-12);
    }
}

#[test]
fn terminal_error_is_distance_from_two() {
    let s = wsbdf_int(7, 3).unwrap();
    let p = build_example61();
    let r = convergence_study(&s, &p, &[1.0 / 40.0]).unwrap();
    let tr = run(&s, &p, 1.0 / 40.0, Seeding::Exact).unwrap();
    assert_eq!(r.errors[0], (tr.last()[0] - 2.0).abs());
    let heat = example61_with_spectators(&[]);
    assert_eq!(
        heat.convergence_study(&s, &[1.0 / 40.0]).unwrap().errors,
        r.errors
    );
}

#[test]
fn weight_ten_rates() {
    let s = wsbdf_int(7, 10).unwrap();
    let r = convergence_study(
        &s,
        &build_example61(),
        &[1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0],
    )
    .unwrap();
    for (got, want) in r.rates.iter().zip([6.5694, 6.9215, 7.1477]) {
        assert!((got - want).abs() <= 0.4, "{got} vs {want}");
    }
}

#[test]
fn bootstrap_start_runs() {
    let s = wsbdf_int(7, 3).unwrap();
    let p = smooth_scalar(2.0);
    let tr = run(
        &s,
        &p,
        1.0 / 40.0,
        Seeding::Bootstrap(p.exact_at(0.0).unwrap()),
    )
    .unwrap();
    let err = (tr.last()[0] - p.exact_at(1.0).unwrap()[0]).abs();
    assert!(err < 1e-2 && err > 1e-12);
}
