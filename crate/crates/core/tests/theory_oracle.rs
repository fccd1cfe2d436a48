//! Independent oracles for the closed-form layer: the threshold is located
//! by bisection on phi_1 without using the closed form, and Monte Carlo
//! estimates cross-check the exact moment and cycle formulas.

use num::ToPrimitive;
use xcover::census::census;
use xcover::model::{generate, ModelParams};
use xcover::rng::mix;
use xcover::stats::mean_and_se;
use xcover::theory::{dstar, exact_cycle_expectation, phi1};

/// Root of phi_1(k, .) on [1, k] by bisection; phi_1 is strictly decreasing
/// in d with a sign change in that bracket.
fn dstar_by_bisection(k: u32) -> f64 {
    let (mut lo, mut hi) = (1.0f64, k as f64);
    assert!(phi1(k, lo) > 0.0 && phi1(k, hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi1(k, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn closed_form_threshold_matches_root_finding() {
    for k in 3..=50 {
        let closed = dstar(k).unwrap();
        let root = dstar_by_bisection(k);
        assert!(
            (closed - root).abs() < 1e-9,
            "k={k}: closed {closed} vs root {root}"
        );
    }
    assert!((dstar(3).unwrap() - 2.354756).abs() < 1e-6);
    assert!((dstar(4).unwrap() - 2.606281).abs() < 1e-6);
}

#[test]
fn exact_cycle_expectation_matches_monte_carlo() {
    // E[X_1] at (3,2,9) is 18/17; the sample mean over 2e4 instances must
    // land within 4 standard errors (wider than the acceptance run's 3 SE
    // because this test uses fewer trials).
    let p = ModelParams::new(3, 2, 9).unwrap();
    let exact = exact_cycle_expectation(&p, 1).unwrap().to_f64().unwrap();
    let xs: Vec<f64> = (0..20_000u64)
        .map(|t| {
            let f = generate(p, mix(0xABCD, t));
            census(&f, 1).unwrap().count(1) as f64
        })
        .collect();
    let (mean, se) = mean_and_se(&xs);
    assert!(
        (mean - exact).abs() < 4.0 * se,
        "mean {mean} vs exact {exact} (se {se})"
    );
}
