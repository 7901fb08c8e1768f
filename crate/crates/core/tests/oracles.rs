//! Expected values computed outside the implementation path: 50-digit reference values,
//! a series arcsine, brute-force rescans and a chi-square check of the sampler.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use grover_stopping::lab::trial_rng;
use grover_stopping::search::ScheduleNode;
use grover_stopping::*;

fn inst(n: u64, m: u64, k: u64) -> ProblemInstance {
    ProblemInstance::new(n, m, k).unwrap()
}

/// `arcsin x` by its Maclaurin series; only used for `x ≤ 0.1`.
fn asin_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..40 {
        let n = n as f64;
        term *= x2 * (2.0 * n - 1.0) * (2.0 * n - 1.0) / ((2.0 * n) * (2.0 * n + 1.0));
        sum += term;
    }
    sum
}

/// Nearest odd integer by enumeration of the two candidates around `x`.
fn nearest_odd_by_enumeration(x: f64) -> u64 {
    let below = (x.floor() as i64) | 1;
    let below = if below as f64 > x { below - 2 } else { below };
    let above = below + 2;
    let pick = if (x - below as f64) <= (above as f64 - x) { below } else { above };
    pick.max(1) as u64
}

// 50-digit reference values for N = 10^6, M = 1, K = 2.
const GAMMA_EXCESS_1_2: f64 = 0.414_213_798_075_634_36;
const P_TARGET_1_2: f64 = 0.603_553_047_149_700_82;
const S_TARGET_1_2: f64 = 6_283.184_259_981_738_6;
const FAIL_K_1_2: f64 = 0.736_306_714_223_340_99;
const FAIL_M_1_2: f64 = 3.395_175_180_331_220_1e-8;

#[test]
fn gamma_for_one_versus_two_matches_reference() {
    let a = angles_of::<f64>(&inst(1_000_000, 1, 2));
    let excess = a.gamma.unwrap() - 1.0;
    assert!((excess - GAMMA_EXCESS_1_2).abs() < 1e-13);

    let series = asin_series(2e-6f64.sqrt()) / asin_series(1e-3) - 1.0;
    assert!((excess - series).abs() < 1e-13);

    let app = check_applicability::<f64>(&inst(1_000_000, 1, 2));
    assert!(app.ordering_ok && app.size_condition_ok);
    assert!(!app.gamma_small_ok);
}

#[test]
fn construction_for_one_versus_two_matches_reference() {
    let rule = construct_rule::<f64>(&inst(1_000_000, 1, 2), RuleMode::BestEffort).unwrap();
    assert_eq!(rule.p, nearest_odd_by_enumeration(P_TARGET_1_2));
    assert_eq!(rule.s, nearest_odd_by_enumeration(S_TARGET_1_2));
    assert_eq!((rule.p, rule.s, rule.l), (1, 6283, 6283));

    let f = failure_probabilities(rule.l, &angles_of::<f64>(&inst(1_000_000, 1, 2)));
    assert!((f.fail_k - FAIL_K_1_2).abs() < 1e-9);
    assert!((f.fail_m - FAIL_M_1_2).abs() < 1e-12);

    // the advisory ε bound is 2√2(√2-1) > 1/4; clipped to 1/4 the threshold sin²(π/2) = 1 is trivially met
    let eps = check_applicability::<f64>(&inst(1_000_000, 1, 2)).epsilon_bound.unwrap().min(0.25);
    let t = error_threshold(eps);
    assert!(f.fail_k <= t && f.fail_m <= t);
}

#[test]
fn gamma_upper_bound_against_series_gamma() {
    for (n, m, k) in [(1000u64, 1u64, 2u64), (100, 4, 9), (1 << 20, 7, 8), (4096, 30, 45)] {
        let bound = gamma_upper_bound::<f64>(&inst(n, m, k)).unwrap();
        let g = asin_series((k as f64 / n as f64).sqrt()) / asin_series((m as f64 / n as f64).sqrt());
        assert!(g - 1.0 < bound, "({n},{m},{k})");
    }
}

#[test]
fn nearest_odd_agrees_with_enumeration() {
    for i in 0..20_000 {
        let x = i as f64 * 0.137;
        assert_eq!(nearest_odd(x), nearest_odd_by_enumeration(x), "x = {x}");
    }
}

#[test]
fn minimal_l_regression_for_one_versus_two() {
    let angles = angles_of::<f64>(&inst(1_000_000, 1, 2));
    let rep = minimal_odd_l(&angles, 0.25, 1_000_001, SearchMode::Relaxed);
    assert_eq!(rep.l, Some(2963));
    let constructive = construct_rule::<f64>(&inst(1_000_000, 1, 2), RuleMode::BestEffort).unwrap();
    assert!(rep.l.unwrap() <= constructive.l);
}

/// Second implementation of the Kronecker residual test, on the torus metric.
fn kronecker_rescan(xis: &[f64], etas: &[f64], eps: f64, horizon: u64) -> Option<u64> {
    (1..=horizon).step_by(2).find(|&l| {
        xis.iter().zip(etas).all(|(&xi, &eta)| {
            let d = (l as f64 * xi - eta).rem_euclid(1.0);
            d.min(1.0 - d) < eps
        })
    })
}

#[test]
fn kronecker_search_agrees_with_rescan() {
    let mut rng = trial_rng(404, 0);
    use rand::Rng;
    for _ in 0..200 {
        let xis = vec![rng.gen::<f64>() * 0.01, rng.gen::<f64>() * 0.01];
        let etas = vec![0.25, 0.0];
        let target = KroneckerTarget {
            xis: xis.clone(),
            etas: etas.clone(),
            epsilon: 0.05,
            parity: Parity::Odd,
        };
        let got = kronecker_search(&target, 20_001).unwrap().map(|h| h.l);
        assert_eq!(got, kronecker_rescan(&xis, &etas, 0.05, 20_001));
        if let Some(hit) = kronecker_search(&target, 20_001).unwrap() {
            assert!(hit.residuals.iter().all(|r| r.abs() < 0.05));
        }
    }
}

#[test]
fn measurement_matches_born_probabilities() {
    let n = 16;
    let marked = MarkedSet::new([1, 6, 11]);
    let state = simulate::<f64>(n, &marked, 1).unwrap();
    let probs: Vec<f64> = state.amplitudes().iter().map(|a| a * a).collect();
    let draws = 100_000u64;
    let mut counts = vec![0u64; n];
    let mut rng = trial_rng(77, 3);
    for _ in 0..draws {
        counts[measure(&state, &mut rng).unwrap()] += 1;
    }
    let mut chi2 = 0.0;
    for (c, p) in counts.iter().zip(&probs) {
        let expected = p * draws as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - expected).abs() <= 4.0 * sigma, "count {c} vs {expected}");
        chi2 += (*c as f64 - expected).powi(2) / expected;
    }
    // 15 degrees of freedom; 0.999 quantile is 37.70
    assert!(chi2 < 37.70, "chi2 = {chi2}");
}

fn depth_and_unresolved(tree: &ScheduleNode<f64>) -> (usize, usize) {
    (tree.depth(), tree.unresolved().len())
}

#[test]
fn four_way_schedule_has_log_depth() {
    let n = 1 << 12;
    let tree = multi_hypothesis_schedule(&[0u64, 16, 32, 64], n, 1.0 / 12.0, 100_001).unwrap();
    assert_eq!(tree.depth(), 2);
    assert_eq!(tree.low, vec![0, 16]);
    assert_eq!(tree.high, vec![32, 64]);
    for node in [&tree, &tree.children[0], &tree.children[1]] {
        if let Some(hit) = &node.hit {
            assert_eq!(hit.l % 2, 1);
        }
    }
}

#[test]
fn close_sizes_leave_the_root_unresolved() {
    // recorded by scanning: no odd l ≤ 2001 separates {100, 101} from {102} at ε = 0.05
    let tree = multi_hypothesis_schedule(&[100u64, 101, 102], 4096, 0.05, 2001).unwrap();
    assert_eq!(depth_and_unresolved(&tree), (2, 1));
    assert!(tree.hit.is_none());
    assert_eq!(tree.children[0].hit.as_ref().unwrap().l, 1323);
}

#[test]
fn single_rotation_reaches_marked_state() {
    // m = 1, θ = π/3: the marked state exactly
    let s = state_after(1, PI / 3.0);
    assert!((s.beta - 1.0).abs() < 1e-15);
}
