//! Independent oracles and random draws shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zlb_core::equilibrium::{Concept, Regime};
use zlb_core::{MarkovShock, ModelParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trap_calibration() -> (ModelParams, MarkovShock) {
    (
        ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap(),
        MarkovShock::new(-0.04, 0.0, 0.85, 0.98).unwrap(),
    )
}

/// A valid draw with psi in (1, 3], q < 1 and eps2 >= 0. Discounts are drawn
/// below one only when `discounted` is set.
pub fn draw(rng: &mut ChaCha8Rng, discounted: bool) -> (ModelParams, MarkovShock) {
    let mut params = ModelParams::new(
        rng.random_range(0.9..0.995),
        rng.random_range(0.2..2.0),
        rng.random_range(0.005..0.1),
        1.0 + rng.random_range(0.01..=2.0),
        rng.random_range(0.002..0.03),
    )
    .unwrap();
    if discounted {
        params = params
            .with_discounts(
                rng.random_range(0.6..=1.0),
                rng.random_range(0.6..=1.0),
                rng.random_range(0.6..=1.0),
            )
            .unwrap();
    }
    let shock = MarkovShock::new(
        rng.random_range(-0.05..0.0),
        rng.random_range(0.0..0.02),
        rng.random_range(0.05..0.98),
        rng.random_range(0.05..0.995),
    )
    .unwrap();
    (params, shock)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleSolution {
    pub regime: Regime,
    pub x: [f64; 2],
    pub pi: [f64; 2],
}

/// Solves the four structural equations (two IS, two Phillips) in
/// (x1, x2, pi1, pi2) directly for each sign pattern of the policy rule and
/// keeps the patterns whose inequalities hold.
pub fn brute_force(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Vec<OracleSolution> {
    let (m, mf, n) = match concept {
        Concept::REE | Concept::RPE => (1.0, 1.0, 1.0),
        _ => (params.m, params.mf, params.n),
    };
    let (p, q) = match concept {
        Concept::RPE | Concept::BRRPE => {
            let qbar = if shock.q == 1.0 {
                1.0
            } else {
                (1.0 - shock.p) / (2.0 - shock.p - shock.q)
            };
            (1.0 - qbar, qbar)
        }
        _ => (shock.p, shock.q),
    };
    let k = [[p, 1.0 - p], [1.0 - q, q]];
    let eps = [shock.eps1, shock.eps2];
    let (b, s, l, psi, mu) = (
        params.beta,
        params.sigma,
        params.lambda,
        params.psi,
        params.mu,
    );
    let mut out = Vec::new();
    for pattern in 0..4u8 {
        let bind = [pattern & 1 == 1, pattern & 2 == 2];
        let mut a = Matrix4::<f64>::zeros();
        let mut r = Vector4::<f64>::zeros();
        for j in 0..2 {
            // x_j - M sum_k K_jk x_k - sigma N sum_k K_jk pi_k + sigma i_j = eps_j
            a[(j, j)] += 1.0;
            for c in 0..2 {
                a[(j, c)] -= m * k[j][c];
                a[(j, 2 + c)] -= s * n * k[j][c];
            }
            r[j] = eps[j];
            if bind[j] {
                r[j] += s * mu;
            } else {
                a[(j, 2 + j)] += s * psi;
            }
            // pi_j - lambda x_j - beta Mf sum_k K_jk pi_k = 0
            a[(2 + j, 2 + j)] += 1.0;
            a[(2 + j, j)] -= l;
            for c in 0..2 {
                a[(2 + j, 2 + c)] -= b * mf * k[j][c];
            }
        }
        let Some(y) = a.lu().solve(&r) else { continue };
        let pi = [y[2], y[3]];
        let ok = (0..2).all(|j| {
            if bind[j] {
                psi * pi[j] <= -mu
            } else {
                psi * pi[j] > -mu
            }
        });
        if ok {
            out.push(OracleSolution {
                regime: Regime::from_binding(bind[0], bind[1]),
                x: [y[0], y[1]],
                pi,
            });
        }
    }
    out
}

pub fn exists(concept: Concept, params: &ModelParams, shock: &MarkovShock, eps1: f64) -> bool {
    !brute_force(concept, params, &shock.with_eps1(eps1)).is_empty()
}

/// Lowest eps1 with a solution, found by bisection on the brute-force
/// oracle. Returns -inf when solutions exist down to -1e8.
pub fn bisection_boundary(concept: Concept, params: &ModelParams, shock: &MarkovShock) -> f64 {
    let mut hi = 1.0;
    assert!(
        exists(concept, params, shock, hi),
        "no solution even at eps1 = 1"
    );
    let mut lo = -1e-3;
    while exists(concept, params, shock, lo) {
        hi = lo;
        lo *= 2.0;
        if lo < -1e8 {
            return f64::NEG_INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exists(concept, params, shock, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Proptest counterpart of [`draw`].
pub fn params_strategy(
    discounted: bool,
) -> impl proptest::strategy::Strategy<Value = (ModelParams, MarkovShock)> {
    use proptest::prelude::*;
    let base = (
        0.9..0.995f64,
        0.2..2.0f64,
        0.005..0.1f64,
        1.01..=3.0f64,
        0.002..0.03f64,
    );
    let disc = if discounted {
        (0.6..=1.0f64, 0.6..=1.0f64, 0.6..=1.0f64).boxed()
    } else {
        Just((1.0, 1.0, 1.0)).boxed()
    };
    let shock = (-0.05..0.0f64, 0.0..0.02f64, 0.05..0.98f64, 0.05..0.995f64);
    (base, disc, shock).prop_map(|((b, s, l, psi, mu), (m, mf, n), (e1, e2, p, q))| {
        (
            ModelParams::new(b, s, l, psi, mu)
                .unwrap()
                .with_discounts(m, mf, n)
                .unwrap(),
            MarkovShock::new(e1, e2, p, q).unwrap(),
        )
    })
}
