//! Temporary equilibrium under given beliefs and recursive learning paths.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_candidate, Concept, Regime};
use crate::error::ModelError;
use crate::model_core::{
    binding_intercept, ergodic_weight, loadings, slack_intercept, MarkovShock, ModelParams,
    StateOutcome,
};

/// Market-clearing outcome for one period given the forecasts `(xe, pie)` of
/// next period's output gap and inflation. Discounts in `params` apply.
///
/// The slack branch is tried first and kept when `psi * pi > -mu`; otherwise
/// the bound binds. Because `1 + lambda sigma psi > 0` exactly one branch is
/// consistent.
pub fn temp_equilibrium(xe: f64, pie: f64, eps: f64, params: &ModelParams) -> StateOutcome {
    let (b, s, l, psi, mu) = (
        params.beta,
        params.sigma,
        params.lambda,
        params.psi,
        params.mu,
    );
    let (m, mf, n) = (params.m, params.mf, params.n);
    let x = (m * xe + (s * n - s * psi * mf * b) * pie + eps) / (1.0 + l * s * psi);
    let pi = l * x + mf * b * pie;
    if psi * pi > -mu {
        return StateOutcome { x, pi, i: psi * pi };
    }
    let x = m * xe + s * (mu + n * pie) + eps;
    StateOutcome {
        x,
        pi: l * x + mf * b * pie,
        i: -mu,
    }
}

/// Outcome when the forecast itself moves with the current outcome,
/// `forecast = f0 + w * Y`, as happens when beliefs are updated with
/// contemporaneous data. Returns `None` when neither branch is consistent.
/// If both are, the slack branch is returned.
pub fn temp_equilibrium_implicit(
    f0: (f64, f64),
    w: f64,
    eps: f64,
    params: &ModelParams,
) -> Option<StateOutcome> {
    let (l, s) = (params.lambda, params.sigma);
    let (a_p, a_z) = loadings(params);
    let f0 = Vector2::new(f0.0, f0.1);
    for binding in [false, true] {
        let (a, b) = if binding {
            (a_z, binding_intercept(l, s, params.mu, eps))
        } else {
            (a_p, slack_intercept(l, s, params.psi, eps))
        };
        let Some(inv) = (Matrix2::identity() - a * w).try_inverse() else {
            continue;
        };
        let y = inv * (a * f0 + b);
        let slack = params.psi * y[1] > -params.mu;
        if slack != binding {
            let i = if binding {
                -params.mu
            } else {
                params.psi * y[1]
            };
            return Some(StateOutcome {
                x: y[0],
                pi: y[1],
                i,
            });
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefKind {
    /// One forecast for all states: the running mean of outcomes.
    RpeMean,
    /// A forecast per shock state, mixed with the transition probabilities.
    MsvStateContingent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainSchedule {
    /// Gain `1/t`.
    Decreasing,
    Constant(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub kind: BeliefKind,
    /// `(xe, pie)` for mean beliefs, `(xe1, pie1, xe2, pie2)` for
    /// state-contingent beliefs.
    pub ye: Vec<f64>,
    /// Occupancy shares of the two states.
    pub nu: [f64; 2],
    /// Index of the next update; the decreasing gain uses `1/t`.
    pub t: u64,
    pub gain: GainSchedule,
    /// 1 when period-t forecasts use data up to t-1, 0 when they also use
    /// period-t data.
    pub info_lag: u8,
}

impl BeliefState {
    pub fn rpe_mean(xe: f64, pie: f64, gain: GainSchedule, info_lag: u8) -> Self {
        BeliefState {
            kind: BeliefKind::RpeMean,
            ye: vec![xe, pie],
            nu: [0.5, 0.5],
            t: 1,
            gain,
            info_lag,
        }
    }

    pub fn msv(
        y1: (f64, f64),
        y2: (f64, f64),
        nu: [f64; 2],
        gain: GainSchedule,
        info_lag: u8,
    ) -> Self {
        BeliefState {
            kind: BeliefKind::MsvStateContingent,
            ye: vec![y1.0, y1.1, y2.0, y2.1],
            nu,
            t: 1,
            gain,
            info_lag,
        }
    }

    /// Beliefs sitting at the stable restricted-perceptions solution: its
    /// unconditional mean for `RpeMean`, its two state values for the
    /// state-contingent kind, with occupancy shares at the ergodic weights.
    pub fn at_rpe(
        kind: BeliefKind,
        params: &ModelParams,
        shock: &MarkovShock,
        gain: GainSchedule,
        info_lag: u8,
    ) -> Result<Self, ModelError> {
        let (cand, _) = crate::estability::classify(Concept::RPE, params, shock)?;
        let qbar = ergodic_weight(shock)?;
        Ok(match kind {
            BeliefKind::RpeMean => {
                let (x, pi) = cand.mean(qbar);
                Self::rpe_mean(x, pi, gain, info_lag)
            }
            BeliefKind::MsvStateContingent => Self::msv(
                (cand.y1.x, cand.y1.pi),
                (cand.y2.x, cand.y2.pi),
                [1.0 - qbar, qbar],
                gain,
                info_lag,
            ),
        })
    }

    pub fn gain_value(&self) -> f64 {
        match self.gain {
            GainSchedule::Decreasing => 1.0 / self.t.max(1) as f64,
            GainSchedule::Constant(g) => g,
        }
    }

    fn state_belief(&self, j: usize) -> (f64, f64) {
        match self.kind {
            BeliefKind::RpeMean => (self.ye[0], self.ye[1]),
            BeliefKind::MsvStateContingent => (self.ye[2 * j], self.ye[2 * j + 1]),
        }
    }

    /// Forecast of next period's `(x, pi)` when the current state is `state`.
    pub fn forecast(&self, state: usize, shock: &MarkovShock) -> (f64, f64) {
        match self.kind {
            BeliefKind::RpeMean => (self.ye[0], self.ye[1]),
            BeliefKind::MsvStateContingent => {
                let k = shock.transition();
                let (a, b) = (self.state_belief(0), self.state_belief(1));
                (
                    k[(state, 0)] * a.0 + k[(state, 1)] * b.0,
                    k[(state, 0)] * a.1 + k[(state, 1)] * b.1,
                )
            }
        }
    }

    /// Largest absolute inflation belief.
    pub fn max_abs_pie(&self) -> f64 {
        self.ye
            .iter()
            .skip(1)
            .step_by(2)
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// The update weight on the observation from `state`, before the
    /// occupancy shares move.
    fn update_weight(&self, state: usize) -> Result<f64, ModelError> {
        let g = self.gain_value();
        match self.kind {
            BeliefKind::RpeMean => Ok(g),
            BeliefKind::MsvStateContingent => {
                if self.nu[state] <= 0.0 {
                    return Err(ModelError::CounterZero(state));
                }
                Ok(g / self.nu[state])
            }
        }
    }

    /// With contemporaneous information the forecast is affine in the
    /// current outcome: `f0 + w * Y`.
    fn implicit_forecast(
        &self,
        state: usize,
        shock: &MarkovShock,
    ) -> Result<((f64, f64), f64), ModelError> {
        let w = self.update_weight(state)?;
        match self.kind {
            BeliefKind::RpeMean => Ok(((self.ye[0] * (1.0 - w), self.ye[1] * (1.0 - w)), w)),
            BeliefKind::MsvStateContingent => {
                let k = shock.transition();
                let own = self.state_belief(state);
                let other = self.state_belief(1 - state);
                let (ks, ko) = (k[(state, state)], k[(state, 1 - state)]);
                Ok((
                    (
                        ks * (1.0 - w) * own.0 + ko * other.0,
                        ks * (1.0 - w) * own.1 + ko * other.1,
                    ),
                    ks * w,
                ))
            }
        }
    }
}

/// Updates beliefs with the outcome observed in `observed_state` and returns
/// them with the forecast made in `next_state`.
pub fn step_learning(
    state: &BeliefState,
    observed: &StateOutcome,
    observed_state: usize,
    next_state: usize,
    shock: &MarkovShock,
) -> Result<(BeliefState, (f64, f64)), ModelError> {
    if state.t == 0 {
        return Err(ModelError::invalid(
            "t",
            0.0,
            "belief updates start at t = 1",
        ));
    }
    let g = state.gain_value();
    let w = state.update_weight(observed_state)?;
    let mut next = state.clone();
    match state.kind {
        BeliefKind::RpeMean => {
            next.ye[0] += w * (observed.x - state.ye[0]);
            next.ye[1] += w * (observed.pi - state.ye[1]);
        }
        BeliefKind::MsvStateContingent => {
            let j = observed_state;
            next.ye[2 * j] += w * (observed.x - state.ye[2 * j]);
            next.ye[2 * j + 1] += w * (observed.pi - state.ye[2 * j + 1]);
            for (s, nu) in next.nu.iter_mut().enumerate() {
                let hit = if s == j { 1.0 } else { 0.0 };
                *nu += g * (hit - *nu);
            }
        }
    }
    next.t += 1;
    let forecast = next.forecast(next_state, shock);
    Ok((next, forecast))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: usize,
    pub seed: u64,
    /// Stop once any inflation belief exceeds this in absolute value.
    pub divergence_bound: f64,
    /// Keep every n-th period in the recorded path.
    pub record_every: usize,
    /// Starting state; drawn from the ergodic distribution when `None`.
    pub initial_state: Option<usize>,
}

impl SimConfig {
    pub fn new(horizon: usize, seed: u64, divergence_bound: f64) -> Self {
        SimConfig {
            horizon,
            seed,
            divergence_bound,
            record_every: 1,
            initial_state: None,
        }
    }
}

/// `10^3 * max(1, |mean inflation of the ZP restricted-perceptions solution|)`.
pub fn default_divergence_bound(params: &ModelParams, shock: &MarkovShock) -> f64 {
    let pi = ergodic_weight(shock)
        .ok()
        .and_then(|qbar| {
            solve_candidate(Concept::RPE, Regime::ZP, params, shock)
                .ok()
                .map(|c| c.mean(qbar).1)
        })
        .filter(|v| v.is_finite())
        .unwrap_or(0.0);
    1e3 * pi.abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPath {
    pub seed: u64,
    pub t_len: usize,
    pub record_every: usize,
    /// Period index of each recorded row.
    pub periods: Vec<usize>,
    /// Shock state (0 low, 1 high) of each recorded row.
    pub shocks: Vec<u8>,
    pub outcomes: Vec<StateOutcome>,
    /// Beliefs after the row's update.
    pub beliefs: Vec<Vec<f64>>,
    /// Beliefs at the end of the path.
    pub final_beliefs: BeliefState,
    /// First period whose inflation belief crossed the divergence bound.
    /// The path stops there.
    pub diverged_at: Option<usize>,
    /// Periods without a temporary equilibrium (contemporaneous information
    /// only). Their outcomes are NaN and beliefs are left unchanged.
    pub no_solution: Vec<usize>,
}

fn draw_next(rng: &mut ChaCha8Rng, state: usize, shock: &MarkovShock) -> usize {
    let stay = if state == 0 { shock.p } else { shock.q };
    let u: f64 = rng.random();
    if u < stay {
        state
    } else {
        1 - state
    }
}

/// Simulates a learning path: draw the shock, forecast, clear markets,
/// update beliefs, repeat. The shock path depends only on the seed.
pub fn simulate(
    params: &ModelParams,
    shock: &MarkovShock,
    init: &BeliefState,
    cfg: &SimConfig,
) -> Result<SimPath, ModelError> {
    params.validate()?;
    shock.validate()?;
    if init.info_lag > 1 {
        return Err(ModelError::invalid(
            "info_lag",
            init.info_lag as f64,
            "must be 0 or 1",
        ));
    }
    let stride = cfg.record_every.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = match cfg.initial_state {
        Some(s) if s < 2 => s,
        Some(s) => {
            return Err(ModelError::invalid(
                "initial_state",
                s as f64,
                "must be 0 or 1",
            ))
        }
        None => {
            let qbar = ergodic_weight(shock)?;
            let u: f64 = rng.random();
            usize::from(u >= 1.0 - qbar)
        }
    };
    let cap = cfg.horizon / stride + 1;
    let mut path = SimPath {
        seed: cfg.seed,
        t_len: cfg.horizon,
        record_every: stride,
        periods: Vec::with_capacity(cap),
        shocks: Vec::with_capacity(cap),
        outcomes: Vec::with_capacity(cap),
        beliefs: Vec::with_capacity(cap),
        final_beliefs: init.clone(),
        diverged_at: None,
        no_solution: Vec::new(),
    };
    let mut beliefs = init.clone();
    let eps = [shock.eps1, shock.eps2];
    for t in 0..cfg.horizon {
        let outcome = if beliefs.info_lag == 1 {
            let (xe, pie) = beliefs.forecast(state, shock);
            let y = temp_equilibrium(xe, pie, eps[state], params);
            beliefs = step_learning(&beliefs, &y, state, state, shock)?.0;
            y
        } else {
            let (f0, w) = beliefs.implicit_forecast(state, shock)?;
            match temp_equilibrium_implicit(f0, w, eps[state], params) {
                Some(y) => {
                    beliefs = step_learning(&beliefs, &y, state, state, shock)?.0;
                    y
                }
                None => {
                    path.no_solution.push(t);
                    StateOutcome::nan()
                }
            }
        };
        let diverged = !(beliefs.max_abs_pie() <= cfg.divergence_bound);
        if t % stride == 0 || diverged {
            path.periods.push(t);
            path.shocks.push(state as u8);
            path.outcomes.push(outcome);
            path.beliefs.push(beliefs.ye.clone());
        }
        if diverged {
            path.diverged_at = Some(t);
            break;
        }
        state = draw_next(&mut rng, state, shock);
    }
    path.final_beliefs = beliefs;
    Ok(path)
}
