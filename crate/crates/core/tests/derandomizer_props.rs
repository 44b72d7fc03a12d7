//! Exhaustive and property-based checks of the greedy derandomizer: the
//! estimator really does bound the conditional failure fraction, candidate
//! averages never exceed the current value, and construction is
//! deterministic and sound wherever it is feasible.

use proptest::prelude::*;

use smallbias_core::derandomizer::{
    bias_at, choose_d, estimator_value, find_set, sigma_check, two_sided_ln_phi, EstimatorState,
    ParameterSet,
};
use smallbias_core::group::{CosTable, CyclicGroup};
use smallbias_core::set_file::{format_set, parse_set};
use smallbias_core::Error;

const SQRT02: f64 = 0.4472135954999579;

fn group(n: u64) -> CyclicGroup {
    CyclicGroup::new(n).unwrap()
}

/// Walks every prefix in {1..n−1}^{≤d}. At each interior node checks that
/// the average of Φ_{m+1} over candidates {1..n−1} is ≤ Φ_m, and returns
/// the number of completions whose finished set fails the two-sided bias
/// bound, checking failures/(n−1)^{d−m} ≤ Φ_m along the way.
fn walk_and_check(state: &EstimatorState, n: u64, d: usize, gamma: f64) -> (u64, u64) {
    let phi = state.phi();
    if state.m() == d {
        let c = state.ledger().sums();
        let max_bias = (1..n)
            .map(|j| (c[j as usize] / d as f64).abs())
            .fold(0.0f64, f64::max);
        let fails = u64::from(max_bias > gamma);
        assert!(
            fails as f64 <= phi + 1e-10,
            "finished prefix fails yet Φ_d = {phi} < 1"
        );
        return (fails, 1);
    }
    let mut child_phi_sum = 0.0;
    let mut fails = 0;
    let mut total = 0;
    for k in 1..n {
        let mut child = state.clone();
        child.extend(k).unwrap();
        child_phi_sum += child.phi();
        let (f, t) = walk_and_check(&child, n, d, gamma);
        fails += f;
        total += t;
    }
    let avg = child_phi_sum / (n - 1) as f64;
    assert!(
        avg <= phi + 1e-10,
        "n={n} m={} candidate-averaged Φ={avg} exceeds Φ_m={phi}",
        state.m()
    );
    let fraction = fails as f64 / total as f64;
    assert!(
        fraction <= phi + 1e-10,
        "n={n} m={} failure fraction {fraction} exceeds Φ_m={phi}",
        state.m()
    );
    (fails, total)
}

#[test]
fn estimator_bounds_failure_fraction_exhaustively() {
    for n in [3u64, 5, 7] {
        for d in 1..=4usize {
            for gamma in [0.3, 0.45, 0.6, 0.75] {
                let state = EstimatorState::new(group(n), d, gamma).unwrap();
                walk_and_check(&state, n, d, gamma);
            }
        }
    }
}

#[test]
fn average_over_all_residues_including_zero_never_increases_phi() {
    // the union-bound estimator also averages down when the identity
    // rotation (k = 0, cosine 1 at every frequency) is admitted as a
    // candidate; checked along full greedy trajectories
    for n in 3u64..=13 {
        let g = group(n);
        let gamma = SQRT02;
        let d = match choose_d(g, gamma) {
            Ok(d) => d as usize,
            Err(Error::NoFeasibleD { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let table = CosTable::new(g);
        let mut state = EstimatorState::new(g, d, gamma).unwrap();
        for _ in 0..d {
            let phi = state.phi();
            let mut sum = 0.0;
            for k in 0..n {
                let mut ledger = state.ledger().clone();
                ledger.extend(k, &table);
                sum += estimator_value(state.profile(), &ledger, gamma, d);
            }
            let avg = sum / n as f64;
            assert!(
                avg <= phi * (1.0 + 1e-12) + 1e-300,
                "n={n} m={}: avg {avg} > Φ {phi}",
                state.m()
            );
            smallbias_core::derandomizer::greedy_step(&mut state).unwrap();
        }
    }
}

#[test]
fn construction_is_deterministic_and_monotone() {
    let (set_a, report_a) = find_set(group(11), 45, SQRT02).unwrap();
    let (set_b, report_b) = find_set(group(11), 45, SQRT02).unwrap();
    assert_eq!(set_a.ks(), set_b.ks());
    // candidates k and k⁻¹ mod 11 tie exactly (frequency permutation), so
    // the chosen order is pinned by this implementation's fp evaluation
    assert_eq!(set_a.ks()[..5], [1, 2, 3, 5, 4]);
    assert_eq!(report_a.phi_trace.len(), 46);
    for w in report_a.phi_trace.windows(2) {
        assert!(
            w[1] <= w[0],
            "descent must be monotone: {} -> {}",
            w[0],
            w[1]
        );
    }
    assert!((report_a.phi_trace[0] - 0.6683086666185142).abs() < 1e-13);
    assert!((report_a.phi_trace[45] - 0.3666930519755024).abs() < 1e-13);
    assert!(report_a.phi_trace[45] < 1.0);
    assert!((report_a.max_bias - 0.1).abs() < 1e-12);
    assert_eq!(report_a.max_bias.to_bits(), report_b.max_bias.to_bits());
    let report = sigma_check(&set_a);
    assert!(report.pass);
}

#[test]
fn feasible_construction_is_always_sound() {
    for n in [3u64, 5, 7, 9, 11, 13] {
        for gamma in [0.55, 0.7, 0.85] {
            let g = group(n);
            let d = match choose_d(g, gamma) {
                Ok(d) => d,
                Err(Error::NoFeasibleD { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            if d > 2000 {
                continue;
            }
            let (set, report) = find_set(g, d as usize, gamma).unwrap();
            assert_eq!(set.d() as u64, d);
            assert!(report.phi_trace[d as usize] < 1.0);
            for w in report.phi_trace.windows(2) {
                assert!(w[1] <= w[0]);
            }
            let sigma = sigma_check(&set);
            assert!(sigma.pass, "n={n} γ={gamma} d={d}: bias {}", sigma.max_bias);
        }
    }
}

#[test]
fn initial_phi_closed_form_matches_log_domain_path() {
    // Φ_0 = e^{−tγd}·n·(ν₊^d + ν₋^d) with the candidate-averaged horizon norm
    for n in [3u64, 7, 11, 32] {
        for d in [1usize, 5, 45] {
            for gamma in [0.3, SQRT02, 0.8] {
                let g = group(n);
                let state = EstimatorState::new(g, d, gamma).unwrap();
                let p = state.profile();
                let closed = (-state.t() * gamma * d as f64).exp()
                    * n as f64
                    * (p.step_nu_plus().powi(d as i32) + p.step_nu_minus().powi(d as i32));
                let rel = (state.phi() - closed).abs() / closed;
                assert!(rel < 1e-12, "n={n} d={d} γ={gamma}: rel {rel}");
            }
        }
    }
}

fn arb_set() -> impl Strategy<Value = ParameterSet> {
    (2u64..40, 1usize..20, 1u32..u32::MAX).prop_flat_map(|(n, d, gbits)| {
        let gamma = f64::from(gbits) / f64::from(u32::MAX);
        prop::collection::vec(1..n, d)
            .prop_map(move |ks| ParameterSet::new(n, gamma.clamp(1e-9, 1.0 - 1e-9), ks).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn set_file_round_trip_is_identity(set in arb_set()) {
        let text = format_set(&set);
        let back = parse_set(&text).unwrap();
        prop_assert_eq!(back.n(), set.n());
        prop_assert_eq!(back.d(), set.d());
        prop_assert_eq!(back.gamma().to_bits(), set.gamma().to_bits());
        prop_assert_eq!(back.ks(), set.ks());
    }

    #[test]
    fn bias_is_even_in_frequency(set in arb_set()) {
        let table = CosTable::new(set.group());
        let n = set.n();
        for j in 1..n {
            let a = bias_at(&set, &table, j);
            let b = bias_at(&set, &table, n - j);
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!(a.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sigma_verdict_matches_reported_maximum(set in arb_set()) {
        let report = sigma_check(&set);
        prop_assert_eq!(report.pass, report.max_bias <= set.gamma());
        let table = CosTable::new(set.group());
        let direct = (1..set.n())
            .map(|j| bias_at(&set, &table, j).abs())
            .fold(0.0f64, f64::max);
        prop_assert!((report.max_bias - direct).abs() < 1e-15);
    }

    #[test]
    fn phi_is_finite_positive_for_any_prefix(
        n in 3u64..24,
        d in 1usize..12,
        gbits in 1u32..u32::MAX,
    ) {
        let gamma = (f64::from(gbits) / f64::from(u32::MAX)).clamp(1e-6, 1.0 - 1e-6);
        let g = group(n);
        let mut state = EstimatorState::new(g, d, gamma).unwrap();
        prop_assert!(state.phi().is_finite() && state.phi() > 0.0);
        for step in 0..d {
            state.extend(1 + (step as u64 * 3) % (n - 1)).unwrap();
            prop_assert!(state.ln_phi().is_finite());
            let direct = estimator_value(state.profile(), state.ledger(), gamma, d);
            let rel = (state.phi() - direct).abs() / direct.max(f64::MIN_POSITIVE);
            prop_assert!(rel < 1e-12);
        }
    }

    #[test]
    fn log_and_linear_estimators_agree(
        n in 3u64..16,
        d in 1usize..8,
    ) {
        let gamma = 0.5;
        let g = group(n);
        let state = EstimatorState::new(g, d, gamma).unwrap();
        let ln = two_sided_ln_phi(state.profile(), state.ledger(), gamma, d);
        prop_assert!((ln.exp() - state.phi()).abs() < 1e-14 * state.phi());
    }
}
