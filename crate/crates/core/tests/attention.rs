mod common;

use proptest::prelude::*;
use zlb_core::attention::{
    calvo_kappa, calvo_theta, derivative_quantities, firm_discount, optimal_attention,
    solve_endogenous_bre, state_outcomes, AttentionOutcome, AttentionParams, Attentions,
};
use zlb_core::equilibrium::{solve_candidate_with_discounts, Concept, Regime, StateDiscounts};
use zlb_core::{MarkovShock, ModelParams};

fn base() -> ModelParams {
    ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap()
}

fn shock(eps1: f64) -> MarkovShock {
    MarkovShock::new(eps1, 0.0, 0.9, 1.0).unwrap()
}

/// Low-state consumption as a function of the two household attentions.
fn consumption_low(m1: f64, m2: f64, x1: f64, x2: f64, b: f64, p: f64) -> f64 {
    (x1 + (1.0 - p) * b * m2 * x2 / (1.0 - b * m2)) / (1.0 - b * m1 * p)
}

/// Low-state reset price as a function of the firm attentions.
fn reset_price_low(
    mf1: f64,
    mf2: f64,
    out: &[AttentionOutcome; 2],
    b: f64,
    th: f64,
    p: f64,
) -> f64 {
    let bt = b * th;
    let d1 = 1.0 - p * bt * mf1;
    let d2 = 1.0 - bt * mf2;
    (1.0 - bt)
        * (out[0].mc / d1
            + (1.0 - p) * bt * mf2 / (d2 * d1) * out[1].mc
            + (p * bt * mf1 / (d1 * d1) + (1.0 - p) * p * bt * bt * mf1 * mf2 / (d1 * d1 * d2))
                * out[0].pi
            + (1.0 - p) * bt * mf2 / (d1 * d2 * d2) * out[1].pi)
}

fn reset_price_high(mf2: f64, out: &AttentionOutcome, b: f64, th: f64) -> f64 {
    let bt = b * th;
    (1.0 - bt) / (1.0 - bt * mf2) * out.mc
        + (1.0 - bt) * bt * mf2 / (1.0 - bt * mf2).powi(2) * out.pi
}

fn central(f: impl Fn(f64) -> f64, at: f64) -> f64 {
    let h = 1e-6;
    (f(at + h) - f(at - h)) / (2.0 * h)
}

fn outcome_strategy() -> impl Strategy<Value = [AttentionOutcome; 2]> {
    let one =
        (-0.1..0.1f64, -0.02..0.02f64, -0.05..0.05f64).prop_map(|(x, pi, r)| AttentionOutcome {
            x,
            pi,
            i: 0.0,
            r,
            mc: 2.0 * x,
        });
    (one.clone(), one).prop_map(|(a, b)| [a, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn household_sensitivities_by_finite_differences(out in outcome_strategy(), m2 in 0.7..0.99f64, eps1 in -0.1..0.0f64) {
        let params = base();
        let s = shock(eps1);
        let attn = AttentionParams::benchmark(&params).unwrap();
        let att = Attentions { m1: 0.8, m2, mf1: 0.8, mf2: 0.8 };
        let dq = derivative_quantities(Regime::ZZ, &out, &att, &params, &s, &attn);
        let (b, p) = (params.beta, s.p);
        let x1 = (1.0 - b) * out[0].x - b * (out[0].r - eps1);
        let x2 = (1.0 - b) * out[1].x - b * out[1].r;
        let d1 = central(|m| consumption_low(m, m2, x1, x2, b, p), attn.m_d1);
        prop_assert!((dq.e_c1 - d1 * d1).abs() <= 1e-6 * (d1 * d1) + 1e-14);
        let d2 = central(|m| x2 / (1.0 - b * m), attn.m_d2);
        prop_assert!((dq.e_c2.unwrap() - d2 * d2).abs() <= 1e-6 * (d2 * d2) + 1e-14);
    }

    #[test]
    fn firm_sensitivities_by_finite_differences(out in outcome_strategy(), mf2 in 0.7..0.99f64) {
        let params = base();
        let s = shock(-0.02);
        let attn = AttentionParams::benchmark(&params).unwrap();
        let att = Attentions { m1: 0.8, m2: 0.8, mf1: 0.8, mf2 };
        let dq = derivative_quantities(Regime::ZZ, &out, &att, &params, &s, &attn);
        let (b, th, p) = (params.beta, attn.theta, s.p);
        let d1 = central(|m| reset_price_low(m, mf2, &out, b, th, p), attn.m_df1);
        prop_assert!((dq.e_q1 - d1 * d1).abs() <= 1e-6 * (d1 * d1) + 1e-14, "{} vs {}", dq.e_q1, d1 * d1);
        let d2 = central(|m| reset_price_high(m, &out[1], b, th), attn.m_df2);
        prop_assert!((dq.e_q2.unwrap() - d2 * d2).abs() <= 1e-6 * (d2 * d2) + 1e-14);
    }

    #[test]
    fn calvo_relation_round_trips(kappa in 0.001..0.5f64, beta in 0.9..0.999f64) {
        let th = calvo_theta(kappa, beta).unwrap();
        prop_assert!(th > 0.0 && th < 1.0);
        prop_assert!((calvo_kappa(th, beta) - kappa).abs() < 1e-12);
    }

    #[test]
    fn firm_discount_is_increasing(a in 0.0..1.0f64, b in 0.0..1.0f64, th in 0.1..0.95f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(firm_discount(lo, th, 0.99) < firm_discount(hi, th, 0.99));
        prop_assert!(firm_discount(hi, th, 0.99) <= hi + 1e-15);
    }
}

#[test]
fn calvo_relation_at_the_benchmark_slope() {
    // theta solves lambda = (1 - beta theta)(1 - theta)/theta; quadratic oracle.
    let (l, b) = (0.02f64, 0.99f64);
    let (qa, qb, qc) = (b, -(1.0 + b + l), 1.0);
    let disc = qb * qb - 4.0 * qa * qc;
    let root = (-qb - disc.sqrt()) / (2.0 * qa);
    let th = calvo_theta(l, b).unwrap();
    assert!((th - root).abs() < 1e-12);
    assert!((th - 0.8722).abs() < 5e-5);
}

#[test]
fn high_state_attention_in_the_trap() {
    let params = base();
    let attn = AttentionParams::benchmark(&params).unwrap();
    let sol = solve_endogenous_bre(Regime::ZZ, &params, &shock(-0.05), &attn).unwrap();
    assert!(sol.converged);
    assert!((sol.m2 - 0.8977).abs() < 5e-4);
    assert!((sol.mf2 - 0.9808).abs() < 5e-4);
    assert!((sol.big_mf2 - 0.9677).abs() < 5e-4);
}

#[test]
fn converged_solutions_are_fixed_points() {
    let params = base();
    let attn = AttentionParams::benchmark(&params).unwrap();
    for eps1 in [-0.03, -0.01, -0.005, 0.0] {
        for regime in Regime::ALL {
            let s = shock(eps1);
            let sol = solve_endogenous_bre(regime, &params, &s, &attn).unwrap();
            if !sol.converged {
                continue;
            }
            let att = Attentions {
                m1: sol.m1,
                m2: sol.m2,
                mf1: sol.mf1,
                mf2: sol.mf2,
            };
            let beta = params.beta;
            let d = StateDiscounts {
                m: [sol.m1, sol.m2],
                mf: [
                    firm_discount(sol.mf1, attn.theta, beta),
                    firm_discount(sol.mf2, attn.theta, beta),
                ],
                n: [1.0, 1.0],
            };
            let cand =
                solve_candidate_with_discounts(Concept::BRE, regime, &params, &d, &s).unwrap();
            let out = state_outcomes(&cand, &params, &s, &attn);
            let next = optimal_attention(
                &derivative_quantities(regime, &out, &att, &params, &s, &attn),
                &attn,
            );
            let resid = [
                next.m1 - sol.m1,
                next.mf1 - sol.mf1,
                next.m2 - sol.m2,
                next.mf2 - sol.mf2,
            ]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(resid < 1e-10, "{regime} at {eps1}: {resid}");
            assert!((sol.big_mf1 - d.mf[0]).abs() < 1e-15 && sol.big_m1 == sol.m1);
        }
    }
}

#[test]
fn attention_rises_with_shock_size() {
    let params = base();
    let attn = AttentionParams::benchmark(&params).unwrap();
    let mut last = f64::NEG_INFINITY;
    for k in 0..=30 {
        let eps1 = -0.001 * k as f64;
        let sol = solve_endogenous_bre(Regime::PP, &params, &shock(eps1), &attn).unwrap();
        assert!(sol.converged);
        assert!(sol.m1 >= last - 1e-12, "m1 fell at {eps1}");
        last = sol.m1;
    }
}

#[test]
fn setting_is_checked() {
    let params = base();
    let attn = AttentionParams::benchmark(&params).unwrap();
    let persistent = MarkovShock::new(-0.02, 0.0, 0.9, 0.95).unwrap();
    assert!(solve_endogenous_bre(Regime::PP, &params, &persistent, &attn).is_err());
    let other_sigma = ModelParams::with_default_mu(0.99, 0.5, 0.02, 2.0).unwrap();
    assert!(solve_endogenous_bre(Regime::PP, &other_sigma, &shock(-0.02), &attn).is_err());
}
