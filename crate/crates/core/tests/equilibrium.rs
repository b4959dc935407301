mod common;

use proptest::prelude::*;
use zlb_core::equilibrium::{
    cutoff_components, cutoff_ordering_check, enumerate_equilibria, lee_solution,
    regime_determinant, solve_candidate, verify_ih_rpe_equivalence, Concept, CutoffBranch,
    Degeneracy, Regime,
};
use zlb_core::model_core::{build_matrices, delta, nu};
use zlb_core::{MarkovShock, ModelParams};

const CONCEPTS: [Concept; 4] = [Concept::REE, Concept::RPE, Concept::BRE, Concept::BRRPE];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn enumeration_matches_sign_pattern_oracle((params, shock) in common::params_strategy(true)) {
        for concept in CONCEPTS {
            let got = enumerate_equilibria(concept, &params, &shock).unwrap();
            let want = common::brute_force(concept, &params, &shock);
            prop_assert_eq!(got.len(), want.len(), "{} {:?}", concept.label(), shock);
            for w in &want {
                let c = got.iter().find(|c| c.regime == w.regime).expect("regime missing from enumeration");
                prop_assert!(c.consistent);
                for j in 0..2 {
                    prop_assert!(close(c.outcome(j).x, w.x[j]) && close(c.outcome(j).pi, w.pi[j]));
                }
            }
        }
    }

    #[test]
    fn returned_solutions_satisfy_their_inequalities((params, shock) in common::params_strategy(true)) {
        for concept in CONCEPTS {
            for c in enumerate_equilibria(concept, &params, &shock).unwrap() {
                for j in 0..2 {
                    let pi = c.outcome(j).pi;
                    if c.regime.binds(j) {
                        prop_assert!(params.psi * pi <= -params.mu);
                        prop_assert_eq!(c.outcome(j).i, -params.mu);
                    } else {
                        prop_assert!(params.psi * pi > -params.mu);
                    }
                }
            }
        }
    }

    #[test]
    fn pz_never_exists_alone((params, shock) in common::params_strategy(true), eps1 in -0.2..0.0f64) {
        let shock = shock.with_eps1(eps1);
        for concept in CONCEPTS {
            let regimes: Vec<_> = enumerate_equilibria(concept, &params, &shock).unwrap().iter().map(|c| c.regime).collect();
            if regimes.contains(&Regime::PZ) {
                prop_assert!(regimes.contains(&Regime::PP) || regimes.contains(&Regime::ZP), "{:?}", regimes);
            }
        }
    }

    #[test]
    fn cutoff_is_the_existence_boundary((params, shock) in common::params_strategy(true)) {
        for concept in CONCEPTS {
            let rep = cutoff_components(concept, &params, &shock).unwrap();
            if rep.eps_bar.is_finite() {
                let step = 1e-7 * (1.0 + rep.eps_bar.abs());
                prop_assert!(common::exists(concept, &params, &shock, rep.eps_bar + step));
                prop_assert!(!common::exists(concept, &params, &shock, rep.eps_bar - step));
            } else {
                prop_assert_eq!(rep.eps_bar, f64::NEG_INFINITY);
                prop_assert!(common::exists(concept, &params, &shock, -1e6));
            }
        }
    }

    #[test]
    fn ordering_law((params, shock) in common::params_strategy(false)) {
        prop_assert!(cutoff_ordering_check(&params, &shock).unwrap());
    }

    #[test]
    fn negative_delta_gives_exactly_one_bre((params, shock) in common::params_strategy(true)) {
        prop_assume!(delta(&params) < 0.0);
        for eps1 in [0.0, -0.01, -0.1, -1.0, -1e3, -1e6] {
            let n = enumerate_equilibria(Concept::BRE, &params, &shock.with_eps1(eps1)).unwrap().len();
            prop_assert_eq!(n, 1, "eps1 {}", eps1);
        }
        prop_assert_eq!(cutoff_components(Concept::BRE, &params, &shock).unwrap().branch, CutoffBranch::MinusInfinityDelta);
    }

    #[test]
    fn absorbing_high_state_keeps_rpe((params, shock) in common::params_strategy(false)) {
        let shock = MarkovShock::new(-1e6, shock.eps2, shock.p, 1.0).unwrap();
        prop_assert!(!enumerate_equilibria(Concept::RPE, &params, &shock).unwrap().is_empty());
    }

    #[test]
    fn income_loading_exceeds_one((params, _) in common::params_strategy(false), pr in 0.001..=1.0f64) {
        prop_assert!(nu(&params, pr).unwrap() > 1.0);
    }

    #[test]
    fn structural_facts((params, shock) in common::params_strategy(true)) {
        let mats = build_matrices(&params, &shock);
        for r in 0..2 {
            prop_assert!((mats.k[(r, 0)] + mats.k[(r, 1)] - 1.0).abs() < 1e-15);
        }
        prop_assert!(delta(&params) <= params.lambda * params.sigma + 1e-15);
        let rational = build_matrices(&params.rational(), &shock);
        let shifted = rational.q + nalgebra::Matrix2::identity() * (params.lambda * params.sigma * params.psi);
        prop_assert!(shifted.determinant() > 0.0);
    }

    #[test]
    fn ih_fixed_point_holds((params, shock) in common::params_strategy(false)) {
        prop_assert!(verify_ih_rpe_equivalence(&params, &shock).unwrap());
    }
}

#[test]
fn degenerate_flag_only_on_singular_systems() {
    let mut rng = common::rng(11);
    for _ in 0..500 {
        let (params, shock) = common::draw(&mut rng, true);
        for concept in CONCEPTS {
            for regime in Regime::ALL {
                let c = solve_candidate(concept, regime, &params, &shock).unwrap();
                assert_eq!(c.degenerate, Degeneracy::None);
            }
        }
    }
}

#[test]
fn lee_without_persistence_is_the_static_solution() {
    // p itself must be positive; at p = 1e-9 the forward term is ~1e-18.
    let params = ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap();
    let shock = MarkovShock::new(-1.0, 0.0, 1e-9, 1.0).unwrap();
    let sol = lee_solution(&params, &shock).unwrap();
    assert_eq!(sol.regime, Regime::ZP);
    assert!((sol.y1.x - (params.sigma * params.mu + shock.eps1)).abs() < 1e-15);
    assert_eq!(sol.y2.pi, 0.0);
}

/// Fixed-point iteration on the lagged-information low state: the forecast
/// made a period earlier covers two transitions, and the outcome is the
/// temporary equilibrium under that forecast.
fn lee_by_iteration(params: &ModelParams, shock: &MarkovShock) -> (f64, f64) {
    let p2 = shock.p * shock.p;
    let (mut x, mut pi) = (0.0, 0.0);
    for _ in 0..100_000 {
        let y = zlb_core::learning::temp_equilibrium(p2 * x, p2 * pi, shock.eps1, params);
        if (y.x - x).abs() < 1e-15 && (y.pi - pi).abs() < 1e-15 {
            break;
        }
        (x, pi) = (y.x, y.pi);
    }
    (x, pi)
}

#[test]
fn lee_matches_scalar_iteration() {
    let params = ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap();
    for (p, eps1) in [(0.5, -0.02), (0.7, -0.05), (0.8, -0.3), (0.6, 0.01)] {
        let shock = MarkovShock::new(eps1, 0.0, p, 1.0).unwrap();
        let sol = lee_solution(&params, &shock).unwrap();
        assert!(sol.consistent);
        let (x, pi) = lee_by_iteration(&params, &shock);
        assert!(
            (sol.y1.x - x).abs() < 1e-10 && (sol.y1.pi - pi).abs() < 1e-10,
            "p {p}: {:?} vs {x} {pi}",
            sol.y1
        );
    }
}

#[test]
fn lee_exists_where_ree_does_not() {
    let params = ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap();
    let rational = params.rational();
    // p nu(p) > 1 > p^2 nu(p^2)
    let p = 0.9;
    assert!(p * nu(&rational, p).unwrap() > 1.0 && p * p * nu(&rational, p * p).unwrap() < 1.0);
    let shock = MarkovShock::new(-5.0, 0.0, p, 1.0).unwrap();
    assert!(enumerate_equilibria(Concept::REE, &params, &shock)
        .unwrap()
        .is_empty());
    assert!(lee_solution(&params, &shock).unwrap().consistent);
}

#[test]
fn determinant_sign_change_is_a_pole() {
    // Restricted-perceptions ZP on a persistent calibration has a pole in p
    // between 0.979 and 0.98.
    let params = ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap();
    let det = |p: f64| {
        let s = MarkovShock::new(-0.02, 0.01, p, 0.98).unwrap();
        regime_determinant(Concept::RPE, Regime::ZP, &params, &s).unwrap()
    };
    let (mut lo, mut hi) = (0.979, 0.98);
    assert!(det(lo) * det(hi) < 0.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if det(mid) * det(lo) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pi1 = |p: f64| {
        let s = MarkovShock::new(-0.02, 0.01, p, 0.98).unwrap();
        solve_candidate(Concept::RPE, Regime::ZP, &params, &s)
            .unwrap()
            .y1
            .pi
    };
    let (left, right) = (pi1(lo - 1e-9), pi1(hi + 1e-9));
    assert!(
        left.abs() > 1.0 && right.abs() > 1.0 && left * right < 0.0,
        "{left} {right}"
    );
}

#[test]
fn determinant_matches_direct_expansion() {
    let mut rng = common::rng(23);
    for _ in 0..200 {
        let (params, shock) = common::draw(&mut rng, true);
        for concept in CONCEPTS {
            let (m, mf, n) = if concept.forces_unit_discounts() {
                (1.0, 1.0, 1.0)
            } else {
                (params.m, params.mf, params.n)
            };
            let (p, q) = if concept.is_restricted() {
                let qbar = (1.0 - shock.p) / (2.0 - shock.p - shock.q);
                (1.0 - qbar, qbar)
            } else {
                (shock.p, shock.q)
            };
            let k = [[p, 1.0 - p], [1.0 - q, q]];
            let (b, ls) = (params.beta, params.lambda * params.sigma);
            for regime in Regime::ALL {
                // Entry (j, l) of (I - M K)(I - beta Mf K) - lambda sigma N K.
                let mut a = [[0.0; 2]; 2];
                for j in 0..2 {
                    for l in 0..2 {
                        let eye = |r: usize, c: usize| if r == c { 1.0 } else { 0.0 };
                        let mut v = 0.0;
                        for r in 0..2 {
                            v += (eye(j, r) - m * k[j][r]) * (eye(r, l) - b * mf * k[r][l]);
                        }
                        a[j][l] = v - ls * n * k[j][l];
                    }
                    if !regime.binds(j) {
                        a[j][j] += ls * params.psi;
                    }
                }
                let want = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                let got = regime_determinant(concept, regime, &params, &shock).unwrap();
                assert!(
                    (got - want).abs() < 1e-12 * (1.0 + want.abs()),
                    "{concept} {regime}"
                );
            }
        }
    }
}
