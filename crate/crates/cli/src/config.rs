//! The JSON run configuration. Unknown keys are rejected so that a typo in a
//! calibration cannot silently fall back to a default.

use serde::{Deserialize, Serialize};
use zlb_core::continuous::ContinuousShock;
use zlb_core::equilibrium::{Concept, Regime};
use zlb_core::learning::{BeliefKind, GainSchedule};
use zlb_core::{MarkovShock, ModelParams};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn default_psi() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beta: f64,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(default = "default_psi")]
    pub psi: f64,
    /// Defaults to `-ln(beta)`, recomputed per cell when beta is scanned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(rename = "M", default = "one")]
    pub m: f64,
    #[serde(rename = "Mf", default = "one")]
    pub mf: f64,
    #[serde(rename = "N", default = "one")]
    pub n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<Concept>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous: Option<ContinuousSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward_guidance: Option<FgSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attention: Option<AttentionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ih_check: Option<IhSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub variable: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousSection {
    pub rho_c: f64,
    pub sigma_v: f64,
    /// Also tabulate `h(a) - a` on this range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Axis>,
}

fn default_horizon() -> usize {
    200_000
}

fn default_lag() -> u8 {
    1
}

fn default_stride() -> usize {
    1
}

fn default_beliefs() -> BeliefKind {
    BeliefKind::MsvStateContingent
}

fn default_gain() -> GainSchedule {
    GainSchedule::Constant(1e-5)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_beliefs")]
    pub beliefs: BeliefKind,
    #[serde(default = "default_gain")]
    pub gain: GainSchedule,
    #[serde(default = "default_lag")]
    pub info_lag: u8,
    /// Defaults to 1000 times the larger of one and the restricted-perceptions
    /// mean inflation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_bound: Option<f64>,
    #[serde(default = "default_stride")]
    pub record_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<usize>,
    /// Starting value of the update counter, i.e. how many observations the
    /// initial beliefs are worth under the decreasing gain.
    #[serde(default = "one_u64")]
    pub initial_count: u64,
}

fn one_u64() -> u64 {
    1
}

fn default_t_max() -> usize {
    200
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgSection {
    #[serde(default = "default_t_max")]
    pub t_max: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttentionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<Regime>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_f: Option<f64>,
    /// Default attention used for all four choices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_default: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_labor: Option<f64>,
}

fn default_draws() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IhSection {
    #[serde(default = "default_draws")]
    pub draws: usize,
}

/// One parameter point, with every scannable quantity as a plain field.
#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub beta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub psi: f64,
    pub mu: Option<f64>,
    pub m: f64,
    pub mf: f64,
    pub n: f64,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub rho_c: Option<f64>,
    pub sigma_v: Option<f64>,
}

pub const MODEL_VARIABLES: [&str; 13] = [
    "beta", "sigma", "lambda", "psi", "mu", "M", "Mf", "N", "M=Mf", "eps1", "eps2", "p", "q",
];

impl Point {
    pub fn set(&mut self, name: &str, v: f64) -> Result<(), CliError> {
        match name {
            "beta" => self.beta = v,
            "sigma" => self.sigma = v,
            "lambda" => self.lambda = v,
            "psi" => self.psi = v,
            "mu" => self.mu = Some(v),
            "M" => self.m = v,
            "Mf" => self.mf = v,
            "N" => self.n = v,
            "M=Mf" => {
                self.m = v;
                self.mf = v;
            }
            "eps1" => self.eps1 = Some(v),
            "eps2" => self.eps2 = Some(v),
            "p" => self.p = Some(v),
            "q" => self.q = Some(v),
            "rho_c" => self.rho_c = Some(v),
            "sigma_v" => self.sigma_v = Some(v),
            other => {
                return Err(CliError::Config(format!(
                    "grid variable '{other}' is not recognised"
                )))
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let mu = self.mu.unwrap_or(-self.beta.ln());
        Ok(
            ModelParams::new(self.beta, self.sigma, self.lambda, self.psi, mu)?
                .with_discounts(self.m, self.mf, self.n)?,
        )
    }

    pub fn shock(&self) -> Result<MarkovShock, CliError> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| CliError::Config(format!("'{name}' is required for this command")))
        };
        Ok(MarkovShock::new(
            need("eps1", self.eps1)?,
            need("eps2", self.eps2)?,
            need("p", self.p)?,
            need("q", self.q)?,
        )?)
    }

    pub fn continuous_shock(&self) -> Result<ContinuousShock, CliError> {
        match (self.rho_c, self.sigma_v) {
            (Some(rho), Some(sv)) => Ok(ContinuousShock::new(rho, sv)?),
            _ => Err(CliError::Config(
                "a 'continuous' section with rho_c and sigma_v is required".into(),
            )),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn point(&self) -> Point {
        Point {
            beta: self.beta,
            sigma: self.sigma,
            lambda: self.lambda,
            psi: self.psi,
            mu: self.mu,
            m: self.m,
            mf: self.mf,
            n: self.n,
            eps1: self.eps1,
            eps2: self.eps2,
            p: self.p,
            q: self.q,
            rho_c: self.continuous.as_ref().map(|c| c.rho_c),
            sigma_v: self.continuous.as_ref().map(|c| c.sigma_v),
        }
    }

    /// Checks the grid: known variables, at least one step, and the expected
    /// number of axes.
    pub fn checked_grid(
        &self,
        allowed: &[&str],
        axes: std::ops::RangeInclusive<usize>,
    ) -> Result<&[Axis], CliError> {
        if !axes.contains(&self.grid.len()) {
            return Err(CliError::Config(format!(
                "this command needs {}..={} grid axes, found {}",
                axes.start(),
                axes.end(),
                self.grid.len()
            )));
        }
        for axis in &self.grid {
            if !allowed.contains(&axis.variable.as_str()) {
                return Err(CliError::Config(format!(
                    "grid variable '{}' is not allowed here",
                    axis.variable
                )));
            }
            if axis.steps == 0 {
                return Err(CliError::Config(format!(
                    "grid axis '{}' needs at least one step",
                    axis.variable
                )));
            }
            if axis.steps == 1 && axis.min != axis.max {
                return Err(CliError::Config(format!(
                    "grid axis '{}' has one step but min != max",
                    axis.variable
                )));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) {
                return Err(CliError::Config(format!(
                    "grid axis '{}' has non-finite bounds",
                    axis.variable
                )));
            }
        }
        Ok(&self.grid)
    }

    pub fn concepts_or(&self, default: &[Concept]) -> Vec<Concept> {
        self.concepts.clone().unwrap_or_else(|| default.to_vec())
    }
}
