//! Forward guidance: the effect today of a rate cut announced for period T.
//!
//! Under cognitive discounting the economy at the announced date is
//! `Gamma = (-sigma i_bar, -lambda sigma i_bar)` and earlier periods follow
//! `Y_{t-1} = A Y_t` with `A = [[M, sigma N], [M lambda, Mf beta + lambda sigma N]]`.
//! The interim peg at zero needs no separate treatment; the backward
//! recursion already describes it.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::estability::eigenvalues_2x2;
use crate::model_core::{delta, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgConfig {
    /// Periods until the announced cut.
    pub t: usize,
    /// Announced rate, negative.
    pub i_bar: f64,
}

impl FgConfig {
    pub fn new(t: usize, i_bar: f64) -> Result<Self, ModelError> {
        if !(i_bar < 0.0) {
            return Err(ModelError::invalid(
                "i_bar",
                i_bar,
                "the announced rate must be negative",
            ));
        }
        Ok(FgConfig { t, i_bar })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgPath {
    /// `(x, pi)` for periods 0..=T.
    pub outcomes: Vec<(f64, f64)>,
    /// `(dx0/di_T, dpi0/di_T)`.
    pub impact_derivatives: (f64, f64),
}

pub fn a_brz(params: &ModelParams) -> Matrix2<f64> {
    let (b, s, l) = (params.beta, params.sigma, params.lambda);
    Matrix2::new(
        params.m,
        s * params.n,
        params.m * l,
        params.mf * b + l * s * params.n,
    )
}

fn gamma(params: &ModelParams, i_bar: f64) -> Vector2<f64> {
    Vector2::new(-params.sigma * i_bar, -params.lambda * params.sigma * i_bar)
}

/// Exact outcome path under cognitive discounting.
pub fn fg_path_bre(params: &ModelParams, cfg: &FgConfig) -> FgPath {
    let a = a_brz(params);
    let mut y = gamma(params, cfg.i_bar);
    let mut rev = Vec::with_capacity(cfg.t + 1);
    rev.push((y[0], y[1]));
    for _ in 0..cfg.t {
        y = a * y;
        rev.push((y[0], y[1]));
    }
    rev.reverse();
    FgPath {
        outcomes: rev,
        impact_derivatives: (y[0] / cfg.i_bar, y[1] / cfg.i_bar),
    }
}

/// Magnitudes past this switch to log tracking.
const LOG_SWITCH: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactPoint {
    pub t: usize,
    pub dx0_dit: f64,
    pub dpi0_dit: f64,
    /// `log10 |dpi0/di_T|`, finite even after the plain value overflows.
    pub log10_abs_dpi0: f64,
}

/// Impact derivatives for every horizon `0..=t_max` under cognitive
/// discounting. Large horizons keep a normalised vector and a separate log
/// scale, so the sign and log magnitude stay available when the plain
/// values overflow to infinity.
pub fn impact_series(params: &ModelParams, t_max: usize) -> Vec<ImpactPoint> {
    let a = a_brz(params);
    // Unit cut: Y0 / i_bar = A^T (-sigma, -lambda sigma).
    let mut v = Vector2::new(-params.sigma, -params.lambda * params.sigma);
    let mut log_scale = 0.0f64;
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            v = a * v;
        }
        let big = v.amax();
        if big > LOG_SWITCH {
            v /= big;
            log_scale += big.ln();
        }
        let scale = log_scale.exp();
        out.push(ImpactPoint {
            t,
            dx0_dit: v[0] * scale,
            dpi0_dit: v[1] * scale,
            log10_abs_dpi0: (v[1].abs().ln() + log_scale) / std::f64::consts::LN_10,
        });
    }
    out
}

/// True when the forward guidance puzzle is present, i.e. `delta >= 0`.
pub fn puzzle_predicate(params: &ModelParams) -> bool {
    delta(params) >= 0.0
}

pub fn spectral_radius(params: &ModelParams) -> f64 {
    eigenvalues_2x2(&a_brz(params))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FgLearningKind {
    /// Euler-equation learners with beliefs formed from past data.
    EulerLearning,
    /// Infinite-horizon learners who believe the announcement.
    IhCredible,
    /// Infinite-horizon learners who ignore the announcement.
    IhNotCredible,
}

impl FgLearningKind {
    pub fn label(self) -> &'static str {
        match self {
            FgLearningKind::EulerLearning => "euler-learning",
            FgLearningKind::IhCredible => "ih-credible",
            FgLearningKind::IhNotCredible => "ih-not-credible",
        }
    }
}

/// `(dx0/di_T, dpi0/di_T)` under adaptive learning.
pub fn fg_effect_learning(
    kind: FgLearningKind,
    params: &ModelParams,
    cfg: &FgConfig,
) -> (f64, f64) {
    match kind {
        FgLearningKind::EulerLearning | FgLearningKind::IhNotCredible => (0.0, 0.0),
        FgLearningKind::IhCredible => {
            let discount = params.beta.powi(cfg.t as i32);
            (
                -params.sigma * discount,
                -params.lambda * params.sigma * discount,
            )
        }
    }
}
