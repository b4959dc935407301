//! Parameters, the two-state demand shock and the structural matrices shared
//! by every solver in the crate.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Structural parameters of the IS curve, Phillips curve and policy rule,
/// together with the cognitive discounts on expectations.
///
/// With `m = mf = n = 1` the model is the textbook three-equation model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub psi: f64,
    /// Depth of the lower bound: the policy rate cannot fall below `-mu`.
    pub mu: f64,
    /// Demand-side discount on expected output.
    pub m: f64,
    /// Supply-side discount on expected inflation.
    pub mf: f64,
    /// Discount on expected inflation in the IS curve.
    pub n: f64,
}

impl ModelParams {
    /// Full-attention parameters. Fails on values outside the model's domain.
    pub fn new(beta: f64, sigma: f64, lambda: f64, psi: f64, mu: f64) -> Result<Self, ModelError> {
        let params = ModelParams {
            beta,
            sigma,
            lambda,
            psi,
            mu,
            m: 1.0,
            mf: 1.0,
            n: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as [`ModelParams::new`] with the lower bound at the steady-state
    /// net rate, `mu = -ln(beta)`.
    pub fn with_default_mu(
        beta: f64,
        sigma: f64,
        lambda: f64,
        psi: f64,
    ) -> Result<Self, ModelError> {
        Self::new(beta, sigma, lambda, psi, -beta.ln())
    }

    pub fn with_discounts(mut self, m: f64, mf: f64, n: f64) -> Result<Self, ModelError> {
        self.m = m;
        self.mf = mf;
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    /// The calibration used to illustrate the no-puzzle case (delta < 0).
    pub fn gabaix() -> Self {
        ModelParams {
            beta: 0.99,
            sigma: 0.2,
            lambda: 0.11,
            psi: 2.0,
            mu: -(0.99f64).ln(),
            m: 0.85,
            mf: 0.8,
            n: 1.0,
        }
    }

    /// The calibration with a mild demand discount only (delta > 0).
    pub fn mckay() -> Self {
        ModelParams {
            beta: 0.99,
            sigma: 0.375,
            lambda: 0.02,
            psi: 2.0,
            mu: -(0.99f64).ln(),
            m: 0.97,
            mf: 1.0,
            n: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let open = |name: &'static str, v: f64, lo: f64, hi: f64| {
            if v.is_finite() && v > lo && v < hi {
                Ok(())
            } else {
                Err(ModelError::invalid(
                    name,
                    v,
                    format!("must lie in ({lo}, {hi})"),
                ))
            }
        };
        open("beta", self.beta, 0.0, 1.0)?;
        open("sigma", self.sigma, 0.0, f64::INFINITY)?;
        open("lambda", self.lambda, 0.0, f64::INFINITY)?;
        open("mu", self.mu, 0.0, f64::INFINITY)?;
        if !self.psi.is_finite() || self.psi < 0.0 {
            return Err(ModelError::invalid(
                "psi",
                self.psi,
                "must be finite and non-negative",
            ));
        }
        for (name, v) in [("M", self.m), ("Mf", self.mf), ("N", self.n)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ModelError::invalid(name, v, "must lie in (0, 1]"));
            }
        }
        Ok(())
    }

    /// Solver entry points need the Taylor principle.
    pub fn require_taylor_principle(&self) -> Result<(), ModelError> {
        if self.psi > 1.0 {
            Ok(())
        } else {
            Err(ModelError::invalid(
                "psi",
                self.psi,
                "solvers require psi > 1",
            ))
        }
    }

    pub fn is_rational(&self) -> bool {
        self.m == 1.0 && self.mf == 1.0 && self.n == 1.0
    }

    /// Copy with all cognitive discounts set to one.
    pub fn rational(&self) -> Self {
        ModelParams {
            m: 1.0,
            mf: 1.0,
            n: 1.0,
            ..*self
        }
    }

    /// `a = lambda * sigma`, the composite slope that shows up everywhere.
    pub fn a(&self) -> f64 {
        self.lambda * self.sigma
    }
}

/// Two-state Markov demand shock. State 1 is the low state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovShock {
    pub eps1: f64,
    pub eps2: f64,
    /// Probability of staying in the low state.
    pub p: f64,
    /// Probability of staying in the high state.
    pub q: f64,
}

impl MarkovShock {
    pub fn new(eps1: f64, eps2: f64, p: f64, q: f64) -> Result<Self, ModelError> {
        let shock = MarkovShock { eps1, eps2, p, q };
        shock.validate()?;
        Ok(shock)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ModelError::invalid(name, v, "must lie in (0, 1]"));
            }
        }
        for (name, v) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !v.is_finite() {
                return Err(ModelError::invalid(name, v, "must be finite"));
            }
        }
        Ok(())
    }

    /// The existence results assume a non-negative high-state shock.
    pub fn require_nonnegative_eps2(&self) -> Result<(), ModelError> {
        if self.eps2 >= 0.0 {
            Ok(())
        } else {
            Err(ModelError::invalid(
                "eps2",
                self.eps2,
                "solvers require eps2 >= 0",
            ))
        }
    }

    pub fn rho(&self) -> f64 {
        self.p + self.q - 1.0
    }

    pub fn eps(&self) -> Vector2<f64> {
        Vector2::new(self.eps1, self.eps2)
    }

    pub fn with_eps1(&self, eps1: f64) -> Self {
        MarkovShock { eps1, ..*self }
    }

    pub fn transition(&self) -> Matrix2<f64> {
        transition_matrix(self.p, self.q)
    }
}

pub fn transition_matrix(p: f64, q: f64) -> Matrix2<f64> {
    Matrix2::new(p, 1.0 - p, 1.0 - q, q)
}

/// Unconditional probability of the high state.
pub fn ergodic_weight(shock: &MarkovShock) -> Result<f64, ModelError> {
    if shock.q == 1.0 {
        if shock.p == 1.0 {
            return Err(ModelError::DegenerateChain);
        }
        return Ok(1.0);
    }
    Ok((1.0 - shock.p) / (2.0 - shock.p - shock.q))
}

/// Income-effect loading `M + N*lambda*sigma / (1 - beta*Mf*pr)`.
pub fn nu(params: &ModelParams, pr: f64) -> Result<f64, ModelError> {
    let denom = 1.0 - params.beta * params.mf * pr;
    if denom.abs() < 1e-14 {
        return Err(ModelError::Singular("1 - beta*Mf*pr vanishes"));
    }
    Ok(params.m + params.n * params.lambda * params.sigma / denom)
}

/// `(M-1)(1-Mf*beta) + lambda*sigma*N`. Negative values rule out both the
/// coherence problem and the forward guidance puzzle.
pub fn delta(params: &ModelParams) -> f64 {
    (params.m - 1.0) * (1.0 - params.mf * params.beta) + params.lambda * params.sigma * params.n
}

/// State outcome for one shock realisation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateOutcome {
    pub x: f64,
    pub pi: f64,
    pub i: f64,
}

impl StateOutcome {
    pub fn nan() -> Self {
        StateOutcome {
            x: f64::NAN,
            pi: f64::NAN,
            i: f64::NAN,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructuralMatrices {
    pub k: Matrix2<f64>,
    pub q: Matrix2<f64>,
    /// Loading of (x, pi) on expectations (x^e, pi^e) when the bound is slack.
    pub a_p: Matrix2<f64>,
    /// Loading when the bound binds.
    pub a_z: Matrix2<f64>,
    lambda: f64,
    sigma: f64,
    psi: f64,
    mu: f64,
}

impl StructuralMatrices {
    pub fn b_p(&self, eps: f64) -> Vector2<f64> {
        slack_intercept(self.lambda, self.sigma, self.psi, eps)
    }

    pub fn b_z(&self, eps: f64) -> Vector2<f64> {
        binding_intercept(self.lambda, self.sigma, self.mu, eps)
    }
}

pub(crate) fn slack_intercept(lambda: f64, sigma: f64, psi: f64, eps: f64) -> Vector2<f64> {
    let d = 1.0 + lambda * sigma * psi;
    Vector2::new(eps / d, lambda * eps / d)
}

pub(crate) fn binding_intercept(lambda: f64, sigma: f64, mu: f64, eps: f64) -> Vector2<f64> {
    let e = eps + sigma * mu;
    Vector2::new(e, lambda * e)
}

/// Expectation loadings with cognitive discounts; they reduce to the
/// rational-expectations forms when `M = Mf = N = 1`.
pub fn loadings(params: &ModelParams) -> (Matrix2<f64>, Matrix2<f64>) {
    loadings_with(params, params.m, params.mf, params.n)
}

pub fn loadings_with(
    params: &ModelParams,
    m: f64,
    mf: f64,
    n: f64,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let (b, s, l, psi) = (params.beta, params.sigma, params.lambda, params.psi);
    let d = 1.0 + l * s * psi;
    let a_p = Matrix2::new(m, n * s - mf * b * s * psi, m * l, mf * b + n * l * s) / d;
    let a_z = Matrix2::new(m, n * s, m * l, mf * b + n * l * s);
    (a_p, a_z)
}

pub fn build_matrices(params: &ModelParams, shock: &MarkovShock) -> StructuralMatrices {
    let k = shock.transition();
    let c = params.m + params.mf * params.beta + params.lambda * params.sigma * params.n;
    let q = Matrix2::identity() - k * c + k * k * (params.beta * params.m * params.mf);
    let (a_p, a_z) = loadings(params);
    StructuralMatrices {
        k,
        q,
        a_p,
        a_z,
        lambda: params.lambda,
        sigma: params.sigma,
        psi: params.psi,
        mu: params.mu,
    }
}
