//! Restricted-perceptions fixed point with a Gaussian AR(1) demand shock.
//!
//! Agents forecast inflation with a constant `a`. The implied unconditional
//! mean of inflation is `h(a)`, and a fixed point `h(a) = a` is an
//! equilibrium. The map has a single interior maximum of `h(a) - a`, so there
//! are either zero or two fixed points.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::ModelError;
use crate::model_core::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousShock {
    pub rho_c: f64,
    /// Innovation standard deviation.
    pub sigma_v: f64,
}

impl ContinuousShock {
    pub fn new(rho_c: f64, sigma_v: f64) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&rho_c) {
            return Err(ModelError::invalid("rho_c", rho_c, "must lie in [0, 1)"));
        }
        if !(sigma_v > 0.0 && sigma_v.is_finite()) {
            return Err(ModelError::invalid("sigma_v", sigma_v, "must be positive"));
        }
        Ok(ContinuousShock { rho_c, sigma_v })
    }

    /// Unconditional standard deviation of the shock.
    pub fn sigma_eps(&self) -> f64 {
        self.sigma_v / (1.0 - self.rho_c * self.rho_c).sqrt()
    }
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`norm_cdf`]. The library inverse is good to about 1e-11, so
/// a couple of Newton steps on the accurate cdf finish the job.
pub fn norm_quantile(prob: f64) -> f64 {
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * prob);
    for _ in 0..2 {
        let dens = norm_pdf(x);
        if !x.is_finite() || dens == 0.0 {
            break;
        }
        x -= (norm_cdf(x) - prob) / dens;
    }
    x
}

/// Standardised shock threshold below which the bound binds.
pub fn big_l(a: f64, params: &ModelParams, cs: &ContinuousShock) -> f64 {
    let (l, s, psi, mu) = (params.lambda, params.sigma, params.psi, params.mu);
    (-mu / psi - (1.0 + l * s) * a - l * s * mu) / (cs.sigma_eps() * l)
}

/// Inverse of [`big_l`].
pub fn big_l_inv(y: f64, params: &ModelParams, cs: &ContinuousShock) -> f64 {
    let (l, s, psi, mu) = (params.lambda, params.sigma, params.psi, params.mu);
    (-mu / psi - l * s * mu - cs.sigma_eps() * l * y) / (1.0 + l * s)
}

/// Unconditional mean of inflation when agents expect `a`.
pub fn h(a: f64, params: &ModelParams, cs: &ContinuousShock) -> f64 {
    let (l, s, psi, mu) = (params.lambda, params.sigma, params.psi, params.mu);
    let ls = l * s;
    let d = 1.0 + ls * psi;
    let big = big_l(a, params, cs);
    (1.0 + ls) / d * a + norm_cdf(big) * ((1.0 + ls) * ls * psi / d * a + ls * mu)
        - norm_pdf(big) * l * l * cs.sigma_eps() * s * psi / d
}

/// `h'(a) - 1`, strictly decreasing in `a`.
pub fn h_prime_minus_one(a: f64, params: &ModelParams, cs: &ContinuousShock) -> f64 {
    let (l, s, psi) = (params.lambda, params.sigma, params.psi);
    let ls = l * s;
    let d = 1.0 + ls * psi;
    ls * (1.0 - psi) / d + norm_cdf(big_l(a, params, cs)) * ls * psi * (1.0 + ls) / d
}

/// Maximiser of `h(a) - a`.
pub fn a_star(params: &ModelParams, cs: &ContinuousShock) -> Result<f64, ModelError> {
    params.require_taylor_principle()?;
    let prob = (params.psi - 1.0) / ((1.0 + params.a()) * params.psi);
    Ok(big_l_inv(norm_quantile(prob), params, cs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousRpeResult {
    pub a_star: f64,
    pub h_at_star_minus_star: f64,
    /// Empty, or the two roots in increasing order.
    pub fixed_points: Vec<f64>,
    /// Probability of a binding bound at each fixed point.
    pub regime_probabilities: Vec<f64>,
}

const MAX_DOUBLINGS: usize = 200;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= 1e-12 * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return mid;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Locates the zero or two restricted-perceptions fixed points.
pub fn find_rpe_continuous(
    params: &ModelParams,
    cs: &ContinuousShock,
) -> Result<ContinuousRpeResult, ModelError> {
    params.validate()?;
    let star = a_star(params, cs)?;
    let g = |a: f64| h(a, params, cs) - a;
    let top = g(star);
    let mut result = ContinuousRpeResult {
        a_star: star,
        h_at_star_minus_star: top,
        fixed_points: Vec::new(),
        regime_probabilities: Vec::new(),
    };
    if top < 0.0 {
        return Ok(result);
    }
    if top == 0.0 {
        // Tangency: a double root.
        result.fixed_points = vec![star, star];
    } else {
        let scale = star.abs().max(params.mu).max(1e-8);
        let mut roots = Vec::with_capacity(2);
        for dir in [-1.0, 1.0] {
            let mut step = scale;
            let mut doublings = 0;
            while g(star + dir * step) >= 0.0 {
                step *= 2.0;
                doublings += 1;
                if doublings > MAX_DOUBLINGS || !step.is_finite() {
                    return Err(ModelError::BracketFailure(MAX_DOUBLINGS));
                }
            }
            roots.push(bisect(star, star + dir * step, g));
        }
        result.fixed_points = roots;
    }
    result.regime_probabilities = result
        .fixed_points
        .iter()
        .map(|&a| norm_cdf(big_l(a, params, cs)))
        .collect();
    Ok(result)
}
