//! Endogenous cognitive discounting with an absorbing high state.
//!
//! Households and firms choose how much attention `m` to pay to the future.
//! Attention is raised above its default only when the squared sensitivity
//! of their decision to `m` is large relative to the attention cost:
//! `m = max(m_default, 1 - xi^2 / E[(d decision / d m)^2])`. Household
//! attention is the IS-curve discount directly. Firm attention `mf` maps
//! into the Phillips-curve discount through the price-reset probability.
//!
//! The solver iterates on attention, solving the discounted model at each
//! step, until the choices reproduce themselves.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    solve_candidate_with_discounts, CandidateSolution, Concept, Regime, StateDiscounts,
};
use crate::error::ModelError;
use crate::model_core::{MarkovShock, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub xi_c: f64,
    pub xi_f: f64,
    pub m_d1: f64,
    pub m_d2: f64,
    pub m_df1: f64,
    pub m_df2: f64,
    /// Probability that a firm keeps its price.
    pub theta: f64,
    /// Inverse Frisch elasticity; marginal cost is `(phi + sigma) x`.
    pub phi_labor: f64,
}

impl AttentionParams {
    /// Costs of 0.01, defaults of 0.7 and `phi = 1`, with `theta` backed out
    /// of the Phillips slope given that marginal cost is `(phi + sigma) x`.
    pub fn benchmark(params: &ModelParams) -> Result<Self, ModelError> {
        let phi_labor = 1.0;
        let theta = calvo_theta(params.lambda / (phi_labor + params.sigma), params.beta)?;
        let attn = AttentionParams {
            xi_c: 0.01,
            xi_f: 0.01,
            m_d1: 0.7,
            m_d2: 0.7,
            m_df1: 0.7,
            m_df2: 0.7,
            theta,
            phi_labor,
        };
        attn.validate()?;
        Ok(attn)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("xi_c", self.xi_c), ("xi_f", self.xi_f)] {
            if !(v > 0.0) {
                return Err(ModelError::invalid(
                    name,
                    v,
                    "attention costs must be positive",
                ));
            }
        }
        for (name, v) in [
            ("m_d1", self.m_d1),
            ("m_d2", self.m_d2),
            ("m_df1", self.m_df1),
            ("m_df2", self.m_df2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::invalid(
                    name,
                    v,
                    "default attention must lie in [0, 1]",
                ));
            }
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(ModelError::invalid(
                "theta",
                self.theta,
                "must lie in (0, 1)",
            ));
        }
        if !(self.phi_labor >= 0.0) {
            return Err(ModelError::invalid(
                "phi_labor",
                self.phi_labor,
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Slope `(1 - beta theta)(1 - theta) / theta` of the Calvo pricing block.
pub fn calvo_kappa(theta: f64, beta: f64) -> f64 {
    (1.0 - beta * theta) * (1.0 - theta) / theta
}

/// Inverse of [`calvo_kappa`]: the root in (0, 1) of
/// `beta theta^2 - (1 + beta + kappa) theta + 1 = 0`.
pub fn calvo_theta(kappa: f64, beta: f64) -> Result<f64, ModelError> {
    if !(kappa > 0.0) {
        return Err(ModelError::invalid("kappa", kappa, "must be positive"));
    }
    let b = 1.0 + beta + kappa;
    let disc = b * b - 4.0 * beta;
    // Stable form of the smaller root.
    Ok(2.0 / (b + disc.sqrt()))
}

/// Phillips-curve discount implied by firm attention `mf`.
pub fn firm_discount(mf: f64, theta: f64, beta: f64) -> f64 {
    mf * (theta + (1.0 - theta) * (1.0 - beta * theta) / (1.0 - beta * theta * mf))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attentions {
    pub m1: f64,
    pub m2: f64,
    pub mf1: f64,
    pub mf2: f64,
}

impl Attentions {
    pub fn defaults(attn: &AttentionParams) -> Self {
        Attentions {
            m1: attn.m_d1,
            m2: attn.m_d2,
            mf1: attn.m_df1,
            mf2: attn.m_df2,
        }
    }

    pub fn full() -> Self {
        Attentions {
            m1: 1.0,
            m2: 1.0,
            mf1: 1.0,
            mf2: 1.0,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.mf1, self.mf2]
    }

    fn sup_distance(&self, other: &Attentions) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Regimes with a slack high state have zero high-state outcomes, so the
    /// high-state choice is undefined and copies the low-state choice.
    fn with_convention(mut self, regime: Regime) -> Self {
        if !regime.binds(1) {
            self.m2 = self.m1;
            self.mf2 = self.mf1;
        }
        self
    }
}

/// Outcomes of one state, including the real rate and marginal cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttentionOutcome {
    pub x: f64,
    pub pi: f64,
    pub i: f64,
    pub r: f64,
    pub mc: f64,
}

/// Expected squared sensitivities of consumption (`c`) and the reset price
/// (`q`) to attention. The high-state entries are `None` when undefined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeQuantities {
    pub e_c2: Option<f64>,
    pub e_c1: f64,
    pub e_q2: Option<f64>,
    pub e_q1: f64,
}

fn require_setting(params: &ModelParams, shock: &MarkovShock) -> Result<(), ModelError> {
    if params.sigma != 1.0 {
        return Err(ModelError::invalid(
            "sigma",
            params.sigma,
            "endogenous attention assumes sigma = 1",
        ));
    }
    if shock.q != 1.0 || shock.eps2 != 0.0 {
        return Err(ModelError::Unsupported(
            "endogenous attention needs q = 1 and eps2 = 0".into(),
        ));
    }
    Ok(())
}

/// Adds the real rate `i - E pi'` and marginal cost to a candidate's outcomes.
pub fn state_outcomes(
    cand: &CandidateSolution,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> [AttentionOutcome; 2] {
    let expected_pi = shock.transition() * cand.pi();
    [0, 1].map(|j| {
        let y = cand.outcome(j);
        AttentionOutcome {
            x: y.x,
            pi: y.pi,
            i: y.i,
            r: y.i - expected_pi[j],
            mc: (attn.phi_labor + params.sigma) * y.x,
        }
    })
}

/// Sensitivities at the given outcomes. `att` supplies the high-state
/// attention that the low-state household and firm take as given; the
/// sensitivities themselves are evaluated at the default attention levels.
pub fn derivative_quantities(
    regime: Regime,
    out: &[AttentionOutcome; 2],
    att: &Attentions,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> DerivativeQuantities {
    let b = params.beta;
    let p = shock.p;
    let th = attn.theta;
    let bt = b * th;
    let x1_term = (1.0 - b) * out[0].x - b * (out[0].r - shock.eps1);
    let x2_term = (1.0 - b) * out[1].x - b * out[1].r;

    let high_defined = regime.binds(1) && x2_term != 0.0;
    let (e_c2, e_q2) = if high_defined {
        let e_c2 = (b * x2_term).powi(2) / (1.0 - b * attn.m_d2).powi(4);
        let md = attn.m_df2;
        let dq2 = bt * (1.0 - bt) * (out[1].mc * (1.0 - bt * md) + out[1].pi * (1.0 + md * bt))
            / (1.0 - bt * md).powi(3);
        (Some(e_c2), Some(dq2 * dq2))
    } else {
        (None, None)
    };

    let m2 = att.m2;
    let e_c1 = (b * p).powi(2) * (x1_term * (1.0 - m2 * b) + m2 * (1.0 - p) * b * x2_term).powi(2)
        / ((1.0 - b * p * attn.m_d1).powi(4) * (1.0 - m2 * b).powi(2));

    let md = attn.m_df1;
    let u = p * bt;
    let d = 1.0 - u * md;
    let g = bt * att.mf2 / (1.0 - bt * att.mf2);
    let dq1 = (1.0 - bt)
        * (u / (d * d) * out[0].mc
            + (1.0 - p) * g * u / (d * d) * out[1].mc
            + (p * bt + (1.0 - p) * p * bt * g) * (1.0 + u * md) / d.powi(3) * out[0].pi
            + (1.0 - p) * g / (1.0 - bt * att.mf2) * u / (d * d) * out[1].pi);

    DerivativeQuantities {
        e_c2,
        e_c1,
        e_q2,
        e_q1: dq1 * dq1,
    }
}

fn optimal(default: f64, xi: f64, e: f64) -> f64 {
    if e > 0.0 {
        default.max(1.0 - xi * xi / e)
    } else {
        default
    }
}

/// Attention choices implied by the sensitivities; undefined high-state
/// choices copy the low-state ones.
pub fn optimal_attention(dq: &DerivativeQuantities, attn: &AttentionParams) -> Attentions {
    let m1 = optimal(attn.m_d1, attn.xi_c, dq.e_c1);
    let mf1 = optimal(attn.m_df1, attn.xi_f, dq.e_q1);
    Attentions {
        m1,
        m2: dq.e_c2.map_or(m1, |e| optimal(attn.m_d2, attn.xi_c, e)),
        mf1,
        mf2: dq.e_q2.map_or(mf1, |e| optimal(attn.m_df2, attn.xi_f, e)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionSolution {
    pub regime: Regime,
    pub m1: f64,
    pub m2: f64,
    pub mf1: f64,
    pub mf2: f64,
    pub big_m1: f64,
    pub big_m2: f64,
    pub big_mf1: f64,
    pub big_mf2: f64,
    pub outcomes: [AttentionOutcome; 2],
    /// Converged and regime-consistent.
    pub exists: bool,
    pub converged: bool,
    pub consistent: bool,
    pub iterations: usize,
    /// Sup-norm change of the final step.
    pub residual: f64,
    /// Sup-norm change of the last few steps, oldest first.
    pub trace: Vec<f64>,
}

pub const TOLERANCE: f64 = 1e-10;
const MAX_ITER: usize = 200_000;
const TRACE_LEN: usize = 8;

struct Evaluation {
    cand: CandidateSolution,
    outcomes: [AttentionOutcome; 2],
    next: Attentions,
}

fn evaluate(
    regime: Regime,
    att: &Attentions,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> Result<Evaluation, ModelError> {
    let (b, th) = (params.beta, attn.theta);
    let disc = StateDiscounts {
        m: [att.m1, att.m2],
        mf: [firm_discount(att.mf1, th, b), firm_discount(att.mf2, th, b)],
        n: [1.0, 1.0],
    };
    let cand = solve_candidate_with_discounts(Concept::BRE, regime, params, &disc, shock)?;
    let outcomes = state_outcomes(&cand, params, shock, attn);
    let dq = derivative_quantities(regime, &outcomes, att, params, shock, attn);
    let next = optimal_attention(&dq, attn).with_convention(regime);
    Ok(Evaluation {
        cand,
        outcomes,
        next,
    })
}

fn iterate(
    regime: Regime,
    init: Attentions,
    damping: f64,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> Result<(Attentions, Evaluation, usize, Vec<f64>), ModelError> {
    let mut att = init.with_convention(regime);
    let mut trace = Vec::with_capacity(TRACE_LEN);
    for it in 1..=MAX_ITER {
        let ev = evaluate(regime, &att, params, shock, attn)?;
        let change = ev.next.sup_distance(&att);
        if trace.len() == TRACE_LEN {
            trace.remove(0);
        }
        trace.push(change);
        if change < TOLERANCE || !change.is_finite() {
            return Ok((att, ev, it, trace));
        }
        att = Attentions {
            m1: damping * att.m1 + (1.0 - damping) * ev.next.m1,
            m2: damping * att.m2 + (1.0 - damping) * ev.next.m2,
            mf1: damping * att.mf1 + (1.0 - damping) * ev.next.mf1,
            mf2: damping * att.mf2 + (1.0 - damping) * ev.next.mf2,
        };
    }
    let ev = evaluate(regime, &att, params, shock, attn)?;
    Ok((att, ev, MAX_ITER, trace))
}

/// Endogenous-attention solution of one regime starting from `init`. Damped
/// iteration (factor 0.5) runs first, plain iteration is the fallback.
/// Non-convergence is reported through `converged`, `residual` and `trace`.
pub fn solve_endogenous_bre_from(
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
    init: Attentions,
) -> Result<AttentionSolution, ModelError> {
    params.validate()?;
    shock.validate()?;
    attn.validate()?;
    require_setting(params, shock)?;
    let mut run = iterate(regime, init, 0.5, params, shock, attn)?;
    if !(run.1.next.sup_distance(&run.0) < TOLERANCE) {
        let plain = iterate(regime, init, 0.0, params, shock, attn)?;
        if plain.1.next.sup_distance(&plain.0) < TOLERANCE {
            run = plain;
        }
    }
    let (att, ev, iterations, trace) = run;
    let residual = ev.next.sup_distance(&att);
    let converged = residual < TOLERANCE;
    let (b, th) = (params.beta, attn.theta);
    Ok(AttentionSolution {
        regime,
        m1: att.m1,
        m2: att.m2,
        mf1: att.mf1,
        mf2: att.mf2,
        big_m1: att.m1,
        big_m2: att.m2,
        big_mf1: firm_discount(att.mf1, th, b),
        big_mf2: firm_discount(att.mf2, th, b),
        outcomes: ev.outcomes,
        exists: converged && ev.cand.consistent,
        converged,
        consistent: ev.cand.consistent,
        iterations,
        residual,
        trace,
    })
}

/// Endogenous-attention solution starting from the default attention levels.
pub fn solve_endogenous_bre(
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> Result<AttentionSolution, ModelError> {
    solve_endogenous_bre_from(regime, params, shock, attn, Attentions::defaults(attn))
}

/// Solutions from the default and from full attention. Distinct fixed
/// points are all returned; identical ones are reported once.
pub fn solve_endogenous_bre_all(
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> Result<Vec<AttentionSolution>, ModelError> {
    let mut out: Vec<AttentionSolution> = Vec::with_capacity(2);
    for init in [Attentions::defaults(attn), Attentions::full()] {
        let sol = solve_endogenous_bre_from(regime, params, shock, attn, init)?;
        let duplicate = out.iter().any(|o| {
            o.converged
                && sol.converged
                && [
                    o.m1 - sol.m1,
                    o.m2 - sol.m2,
                    o.mf1 - sol.mf1,
                    o.mf2 - sol.mf2,
                ]
                .iter()
                .all(|d| d.abs() < 1e-8)
        });
        if !duplicate {
            out.push(sol);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionScanPoint {
    pub eps1: f64,
    pub regime: Regime,
    /// Some starting point reached an existing solution.
    pub exists: bool,
    /// All distinct solutions found at this point.
    pub solutions: Vec<AttentionSolution>,
}

impl AttentionScanPoint {
    /// The existing solution if there is one, else the first found.
    pub fn representative(&self) -> Option<&AttentionSolution> {
        self.solutions
            .iter()
            .find(|s| s.exists)
            .or(self.solutions.first())
    }
}

/// Existence of each regime at every grid value of the low-state shock.
pub fn attention_existence_scan(
    regimes: &[Regime],
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
    eps1_grid: &[f64],
) -> Result<Vec<AttentionScanPoint>, ModelError> {
    let mut out = Vec::with_capacity(regimes.len() * eps1_grid.len());
    for &eps1 in eps1_grid {
        let s = shock.with_eps1(eps1);
        for &regime in regimes {
            let solutions = solve_endogenous_bre_all(regime, params, &s, attn)?;
            out.push(AttentionScanPoint {
                eps1,
                regime,
                exists: solutions.iter().any(|x| x.exists),
                solutions,
            });
        }
    }
    Ok(out)
}

/// Whether any regime in the group has an endogenous-attention solution.
pub fn group_exists(
    regimes: &[Regime],
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
) -> Result<bool, ModelError> {
    for &regime in regimes {
        if solve_endogenous_bre_all(regime, params, shock, attn)?
            .iter()
            .any(|s| s.exists)
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Midpoints between adjacent grid values where existence of the group
/// switches. `points` must come from a scan over an increasing grid.
pub fn sign_changes(points: &[AttentionScanPoint], regimes: &[Regime]) -> Vec<f64> {
    let mut grid: Vec<(f64, bool)> = Vec::new();
    for p in points.iter().filter(|p| regimes.contains(&p.regime)) {
        match grid.last_mut() {
            Some(last) if last.0 == p.eps1 => last.1 |= p.exists,
            _ => grid.push((p.eps1, p.exists)),
        }
    }
    grid.windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| 0.5 * (w[0].0 + w[1].0))
        .collect()
}

/// Refines a switch of group existence between `lo` and `hi` by bisection.
pub fn refine_boundary(
    regimes: &[Regime],
    params: &ModelParams,
    shock: &MarkovShock,
    attn: &AttentionParams,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, ModelError> {
    let at_lo = group_exists(regimes, params, &shock.with_eps1(lo), attn)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if group_exists(regimes, params, &shock.with_eps1(mid), attn)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
