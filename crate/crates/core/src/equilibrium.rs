//! Candidate regime solutions, existence cutoffs and equilibrium enumeration.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model_core::{
    delta, ergodic_weight, nu, transition_matrix, MarkovShock, ModelParams, StateOutcome,
};

/// Which states have the lower bound binding. The first letter is the low
/// state, so `ZP` binds only when the low shock hits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    PP,
    ZP,
    PZ,
    ZZ,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::PP, Regime::ZP, Regime::PZ, Regime::ZZ];

    /// `state` is 0 for the low state and 1 for the high state.
    pub fn binds(self, state: usize) -> bool {
        matches!(
            (self, state),
            (Regime::ZP, 0) | (Regime::PZ, 1) | (Regime::ZZ, _)
        )
    }

    pub fn from_binding(low: bool, high: bool) -> Regime {
        match (low, high) {
            (false, false) => Regime::PP,
            (true, false) => Regime::ZP,
            (false, true) => Regime::PZ,
            (true, true) => Regime::ZZ,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::PP => "PP",
            Regime::ZP => "ZP",
            Regime::PZ => "PZ",
            Regime::ZZ => "ZZ",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PP" => Ok(Regime::PP),
            "ZP" => Ok(Regime::ZP),
            "PZ" => Ok(Regime::PZ),
            "ZZ" => Ok(Regime::ZZ),
            other => Err(format!("unknown regime '{other}'")),
        }
    }
}

/// Expectation concept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Concept {
    /// Rational expectations.
    REE,
    /// Restricted perceptions: agents forecast with the unconditional mean.
    RPE,
    /// Cognitively discounted model-consistent expectations.
    BRE,
    /// Restricted perceptions combined with cognitive discounting.
    BRRPE,
    /// Rational expectations formed with a one-period information lag.
    LEE,
}

impl Concept {
    pub const ALL: [Concept; 5] = [
        Concept::REE,
        Concept::RPE,
        Concept::BRE,
        Concept::BRRPE,
        Concept::LEE,
    ];

    pub fn is_restricted(self) -> bool {
        matches!(self, Concept::RPE | Concept::BRRPE)
    }

    /// Concepts that ignore the cognitive discounts.
    pub fn forces_unit_discounts(self) -> bool {
        matches!(self, Concept::REE | Concept::RPE | Concept::LEE)
    }

    pub fn label(self) -> &'static str {
        match self {
            Concept::REE => "REE",
            Concept::RPE => "RPE",
            Concept::BRE => "BRE",
            Concept::BRRPE => "BRRPE",
            Concept::LEE => "LEE",
        }
    }
}

impl std::fmt::Display for Concept {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Concept {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "REE" => Ok(Concept::REE),
            "RPE" => Ok(Concept::RPE),
            "BRE" => Ok(Concept::BRE),
            "BRRPE" => Ok(Concept::BRRPE),
            "LEE" => Ok(Concept::LEE),
            other => Err(format!("unknown concept '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degeneracy {
    None,
    /// The regime system is singular but consistent: a continuum of solutions.
    /// The stored outcomes are the minimum-norm member.
    Continuum,
    /// The regime system is singular and inconsistent.
    NonexistentSingular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSolution {
    pub regime: Regime,
    pub concept: Concept,
    pub y1: StateOutcome,
    pub y2: StateOutcome,
    /// The regime inequalities hold in both states.
    pub consistent: bool,
    pub degenerate: Degeneracy,
}

impl CandidateSolution {
    pub fn outcome(&self, state: usize) -> StateOutcome {
        if state == 0 {
            self.y1
        } else {
            self.y2
        }
    }

    pub fn pi(&self) -> Vector2<f64> {
        Vector2::new(self.y1.pi, self.y2.pi)
    }

    pub fn x(&self) -> Vector2<f64> {
        Vector2::new(self.y1.x, self.y2.x)
    }

    pub fn i(&self) -> Vector2<f64> {
        Vector2::new(self.y1.i, self.y2.i)
    }

    /// Unconditional mean of (x, pi) given the high-state weight `qbar`.
    pub fn mean(&self, qbar: f64) -> (f64, f64) {
        (
            (1.0 - qbar) * self.y1.x + qbar * self.y2.x,
            (1.0 - qbar) * self.y1.pi + qbar * self.y2.pi,
        )
    }
}

/// Transition probabilities the agents' forecasts effectively use.
///
/// Restricted-perceptions agents forecast with the unconditional mean, which
/// is the same as a chain whose rows both equal the ergodic distribution.
pub fn effective_chain(concept: Concept, shock: &MarkovShock) -> Result<(f64, f64), ModelError> {
    if concept.is_restricted() {
        let qbar = ergodic_weight(shock)?;
        Ok((1.0 - qbar, qbar))
    } else {
        Ok((shock.p, shock.q))
    }
}

pub fn effective_params(concept: Concept, params: &ModelParams) -> ModelParams {
    if concept.forces_unit_discounts() {
        params.rational()
    } else {
        *params
    }
}

/// Cognitive discounts that may differ across the two shock states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDiscounts {
    pub m: [f64; 2],
    pub mf: [f64; 2],
    pub n: [f64; 2],
}

impl StateDiscounts {
    pub fn uniform(params: &ModelParams) -> Self {
        StateDiscounts {
            m: [params.m; 2],
            mf: [params.mf; 2],
            n: [params.n; 2],
        }
    }
}

struct LinearSolution {
    x: Vector2<f64>,
    pi: Vector2<f64>,
    i: Vector2<f64>,
    degenerate: Degeneracy,
}

const SINGULAR_RTOL: f64 = 1e-12;

/// The regime's coefficient matrix on inflation, and the Phillips-curve
/// factor `I - beta D_Mf K` that maps inflation back to the output gap.
fn regime_matrix(
    params: &ModelParams,
    disc: &StateDiscounts,
    k: &Matrix2<f64>,
    regime: Regime,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let (b, s, l, psi) = (params.beta, params.sigma, params.lambda, params.psi);
    let eye = Matrix2::identity();
    let dm = Matrix2::from_diagonal(&Vector2::new(disc.m[0], disc.m[1]));
    let dmf = Matrix2::from_diagonal(&Vector2::new(disc.mf[0], disc.mf[1]));
    let dn = Matrix2::from_diagonal(&Vector2::new(disc.n[0], disc.n[1]));
    let phillips = eye - dmf * k * b;
    let mut a = (eye - dm * k) * phillips - dn * k * (l * s);
    for j in 0..2 {
        if !regime.binds(j) {
            a[(j, j)] += l * s * psi;
        }
    }
    (a, phillips)
}

/// Determinant of the regime's linear system. Candidate outcomes are
/// ratios with this denominator, so it changes sign where they have a pole.
pub fn regime_determinant(
    concept: Concept,
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<f64, ModelError> {
    validate_inputs(params, shock)?;
    if concept == Concept::LEE {
        return Err(ModelError::Unsupported(
            "LEE is not a two-state linear system".into(),
        ));
    }
    let eff = effective_params(concept, params);
    let (p, q) = effective_chain(concept, shock)?;
    let (a, _) = regime_matrix(
        &eff,
        &StateDiscounts::uniform(&eff),
        &transition_matrix(p, q),
        regime,
    );
    Ok(a.determinant())
}

/// Solves the regime's linear system for inflation. Substituting the
/// Phillips curve into the IS curve gives
/// `[(I - D_M K)(I - beta D_Mf K) - lambda sigma D_N K] pi + lambda sigma i = lambda eps`
/// with `i_j = psi pi_j` in slack states and `-mu` in binding ones.
fn solve_linear(
    params: &ModelParams,
    disc: &StateDiscounts,
    k: &Matrix2<f64>,
    eps: Vector2<f64>,
    regime: Regime,
) -> LinearSolution {
    let (l, s, psi, mu) = (params.lambda, params.sigma, params.psi, params.mu);
    let (a, phillips) = regime_matrix(params, disc, k, regime);
    let mut rhs = eps * l;
    for j in 0..2 {
        if regime.binds(j) {
            rhs[j] += l * s * mu;
        }
    }

    let det = a.determinant();
    let scale = a.norm_squared();
    let (pi, degenerate) = if det.abs() > SINGULAR_RTOL * scale {
        let pi = a
            .try_inverse()
            .map(|inv| inv * rhs)
            .unwrap_or_else(|| Vector2::repeat(f64::NAN));
        (pi, Degeneracy::None)
    } else {
        let svd = a.svd(true, true);
        let tol = SINGULAR_RTOL.sqrt() * scale.sqrt().max(1e-300);
        match svd.solve(&rhs, tol) {
            Ok(pi) if (a * pi - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()) => {
                (pi, Degeneracy::Continuum)
            }
            _ => (Vector2::repeat(f64::NAN), Degeneracy::NonexistentSingular),
        }
    };

    let x = phillips * pi / l;
    let i = Vector2::from_fn(|j, _| if regime.binds(j) { -mu } else { psi * pi[j] });
    LinearSolution {
        x,
        pi,
        i,
        degenerate,
    }
}

/// Slack is strict and binding is weak, so a tie belongs to the binding regime.
pub fn regime_holds(params: &ModelParams, binds: bool, pi: f64) -> bool {
    if binds {
        params.psi * pi <= -params.mu
    } else {
        params.psi * pi > -params.mu
    }
}

fn validate_inputs(params: &ModelParams, shock: &MarkovShock) -> Result<(), ModelError> {
    params.validate()?;
    params.require_taylor_principle()?;
    shock.validate()?;
    shock.require_nonnegative_eps2()
}

fn assemble(
    concept: Concept,
    regime: Regime,
    params: &ModelParams,
    sol: LinearSolution,
) -> CandidateSolution {
    let outcome = |j: usize| StateOutcome {
        x: sol.x[j],
        pi: sol.pi[j],
        i: sol.i[j],
    };
    let consistent = sol.degenerate != Degeneracy::NonexistentSingular
        && (0..2).all(|j| regime_holds(params, regime.binds(j), sol.pi[j]));
    CandidateSolution {
        regime,
        concept,
        y1: outcome(0),
        y2: outcome(1),
        consistent,
        degenerate: sol.degenerate,
    }
}

/// Solves one regime under one concept. Concepts with unit discounts ignore
/// `params.m`, `params.mf` and `params.n`.
pub fn solve_candidate(
    concept: Concept,
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<CandidateSolution, ModelError> {
    validate_inputs(params, shock)?;
    if concept == Concept::LEE {
        return lee_candidate(regime, params, shock);
    }
    let eff = effective_params(concept, params);
    solve_candidate_with_discounts(concept, regime, &eff, &StateDiscounts::uniform(&eff), shock)
}

/// Like [`solve_candidate`] but with discounts that vary by state, as the
/// endogenous attention fixed point needs. Only the `beta`, `sigma`,
/// `lambda`, `psi` and `mu` fields of `params` are read.
pub fn solve_candidate_with_discounts(
    concept: Concept,
    regime: Regime,
    params: &ModelParams,
    discounts: &StateDiscounts,
    shock: &MarkovShock,
) -> Result<CandidateSolution, ModelError> {
    if concept == Concept::LEE {
        return Err(ModelError::Unsupported(
            "state-dependent discounts are not defined for LEE".into(),
        ));
    }
    let (p, q) = effective_chain(concept, shock)?;
    let k = transition_matrix(p, q);
    let sol = solve_linear(params, discounts, &k, shock.eps(), regime);
    Ok(assemble(concept, regime, params, sol))
}

/// Every regime-consistent candidate, in PP, ZP, PZ, ZZ order. An empty list
/// means no equilibrium exists, more than one means it is not unique.
pub fn enumerate_equilibria(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<Vec<CandidateSolution>, ModelError> {
    let regimes: &[Regime] = if concept == Concept::LEE {
        &[Regime::PP, Regime::ZP]
    } else {
        &Regime::ALL
    };
    let mut out = Vec::new();
    for &regime in regimes {
        let cand = solve_candidate(concept, regime, params, shock)?;
        if cand.consistent {
            out.push(cand);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffBranch {
    Finite,
    /// An absorbing high state removes the lower limit.
    MinusInfinityQ1,
    /// The discounting condition `delta < 0` removes the lower limit.
    MinusInfinityDelta,
}

impl CutoffBranch {
    pub fn label(self) -> &'static str {
        match self {
            CutoffBranch::Finite => "finite",
            CutoffBranch::MinusInfinityQ1 => "minus-infinity-q1",
            CutoffBranch::MinusInfinityDelta => "minus-infinity-delta",
        }
    }
}

/// Existence cutoff for the low-state shock: an equilibrium exists for
/// `eps1 > eps_bar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub concept: Concept,
    pub eps_bar: f64,
    /// Above this value the PP solution exists.
    pub eps_pp: f64,
    /// Lower end of the ZP existence interval.
    pub eps_zp2: f64,
    pub delta: f64,
    pub branch: CutoffBranch,
}

/// `eps = num / ((q - 1) * rest)`, with the one-sided limit at `q = 1`.
fn limit_at_q1(num: f64, rest: f64, q: f64) -> f64 {
    if q < 1.0 {
        return num / ((q - 1.0) * rest);
    }
    if num == 0.0 {
        f64::INFINITY
    } else if num / rest > 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

fn ree_pp(params: &ModelParams, p: f64, q: f64, eps2: f64) -> f64 {
    let (b, l, psi, mu) = (params.beta, params.lambda, params.psi, params.mu);
    let a = params.a();
    let rho = p + q - 1.0;
    let num = a * a * mu * (psi - 1.0) * (rho - psi)
        + a * (l * eps2 * (p - 1.0) * psi + mu * (psi - 1.0) * (1.0 - rho) * (b * rho - 1.0))
        - l * eps2 * (p - 1.0) * psi * (b * rho - 1.0);
    let den = l * psi * (1.0 - (a + 1.0) * q + a * psi + b * (q - 1.0) * rho);
    num / den
}

fn ree_zp2(params: &ModelParams, p: f64, q: f64, eps2: f64) -> f64 {
    let (b, l, psi, mu) = (params.beta, params.lambda, params.psi, params.mu);
    let a = params.a();
    let rho = p + q - 1.0;
    let num = a * a * mu * (psi - 1.0) * rho - l * eps2 * (p - 1.0) * psi * (b * rho - 1.0)
        + a * (l * eps2 * p * psi + mu * (psi - 1.0) * (1.0 - rho) * (b * rho - 1.0));
    let rest = l * psi * (b * rho - a - 1.0);
    limit_at_q1(num, rest, q)
}

fn br_pp(params: &ModelParams, p: f64, q: f64, eps2: f64) -> f64 {
    let (b, l, psi, mu) = (params.beta, params.lambda, params.psi, params.mu);
    let (m, mf, n) = (params.m, params.mf, params.n);
    let a = params.a();
    let rho = p + q - 1.0;
    let eta1 = a * (psi - n) + (1.0 - m) * (1.0 - mf * b);
    let eta2 =
        a * (n + psi) - (p + q) * (a * n + b * mf) + m * rho * (b * mf * rho - 1.0) + b * mf + 1.0;
    let den = ((1.0 - m * rho) * (1.0 - mf * b * rho) + a * (psi - n * rho))
        * ((1.0 - m) * (1.0 - mf * b) + a * (psi - n));
    let eta3 = l * eps2 * (1.0 - p) * psi * (b * mf * (m * (p + q) - 1.0) - a * n - m) / den - mu;
    let num1 =
        l * (a * psi + b * m * mf * (q * (p + q) - rho) - m * q - q * (b * mf + a * n) + 1.0);
    eta1 * eta2 * eta3 / (psi * num1)
}

fn br_zp2(params: &ModelParams, p: f64, q: f64, eps2: f64) -> f64 {
    let (b, l, psi, mu) = (params.beta, params.lambda, params.psi, params.mu);
    let (m, mf, n) = (params.m, params.mf, params.n);
    let a = params.a();
    let rho = p + q - 1.0;
    let eta1 = a * (psi - n) + (1.0 - m) * (1.0 - mf * b);
    let chi = a * n - (p + q) * (a * n + b * mf) + m * rho * (b * mf * rho - 1.0) + b * mf + 1.0;
    let g = a * n - b * m * mf * (p + q) + m + b * mf;
    let f = a * n * p + b * mf * (m * (q - p * rho - 1.0) + p) + m * p - 1.0;
    // Put both terms over the common factor lambda (q - 1) g.
    let num = mu * eta1 * chi / psi - eps2 * l * f;
    limit_at_q1(num, l * g, q)
}

/// Analytic existence cutoffs for one concept. `shock.eps1` is ignored.
pub fn cutoff_components(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<CutoffReport, ModelError> {
    validate_inputs(params, shock)?;
    if concept == Concept::LEE {
        return Err(ModelError::Unsupported(
            "no analytic cutoff is defined for LEE".into(),
        ));
    }
    let eff = effective_params(concept, params);
    let (p, q) = effective_chain(concept, shock)?;
    let d = delta(&eff);
    let (eps_pp, eps_zp2) = match concept {
        Concept::REE | Concept::RPE => (
            ree_pp(&eff, p, q, shock.eps2),
            ree_zp2(&eff, p, q, shock.eps2),
        ),
        _ => (
            br_pp(&eff, p, q, shock.eps2),
            br_zp2(&eff, p, q, shock.eps2),
        ),
    };
    let report = |eps_bar, branch| CutoffReport {
        concept,
        eps_bar,
        eps_pp,
        eps_zp2,
        delta: d,
        branch,
    };
    let discounted = matches!(concept, Concept::BRE | Concept::BRRPE);
    if discounted && d < 0.0 {
        return Ok(report(f64::NEG_INFINITY, CutoffBranch::MinusInfinityDelta));
    }
    if concept.is_restricted() && q == 1.0 {
        return Ok(report(f64::NEG_INFINITY, CutoffBranch::MinusInfinityQ1));
    }
    let eps_bar = eps_pp.min(eps_zp2);
    if eps_bar == f64::NEG_INFINITY {
        Ok(report(eps_bar, CutoffBranch::MinusInfinityQ1))
    } else {
        Ok(report(eps_bar, CutoffBranch::Finite))
    }
}

/// Checks that the rational cutoff is at least the restricted-perceptions
/// cutoff exactly when the shock is positively autocorrelated.
pub fn cutoff_ordering_check(
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<bool, ModelError> {
    if shock.q >= 1.0 {
        return Err(ModelError::invalid(
            "q",
            shock.q,
            "the ordering check needs q < 1",
        ));
    }
    let ree = cutoff_components(Concept::REE, params, shock)?.eps_bar;
    let rpe = cutoff_components(Concept::RPE, params, shock)?.eps_bar;
    let sum = shock.p + shock.q;
    if (sum - 1.0).abs() < 1e-12 {
        return Ok((ree - rpe).abs() <= 1e-10 * (1.0 + rpe.abs()));
    }
    Ok((ree >= rpe) == (sum >= 1.0))
}

fn require_lee_shock(params: &ModelParams, shock: &MarkovShock) -> Result<(), ModelError> {
    if shock.q != 1.0 || shock.eps2 != 0.0 {
        return Err(ModelError::Unsupported(
            "LEE is defined only for q = 1 and eps2 = 0".into(),
        ));
    }
    if !params.is_rational() {
        return Err(ModelError::Unsupported(
            "LEE is defined only for M = Mf = N = 1".into(),
        ));
    }
    Ok(())
}

/// The lagged-information solution in the low state. Agents forecast two
/// periods ahead, so the persistence inside the loading becomes `p^2`; the
/// high state is absorbing with a zero shock and stays at zero.
fn lee_candidate(
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<CandidateSolution, ModelError> {
    require_lee_shock(params, shock)?;
    let (b, s, l, psi, mu) = (
        params.beta,
        params.sigma,
        params.lambda,
        params.psi,
        params.mu,
    );
    let p2 = shock.p * shock.p;
    let load = p2 * nu(params, p2)?;
    let pi_per_x = l / (1.0 - b * p2);
    let (x, i) = match regime {
        Regime::ZP => {
            let den = 1.0 - load;
            if den.abs() < 1e-14 {
                return Err(ModelError::Singular("p^2 nu(p^2) = 1"));
            }
            ((s * mu + shock.eps1) / den, -mu)
        }
        Regime::PP => {
            let x = shock.eps1 / (1.0 - load + s * psi * pi_per_x);
            (x, psi * pi_per_x * x)
        }
        other => {
            return Err(ModelError::Unsupported(format!(
                "LEE has no {other} solution"
            )));
        }
    };
    let pi = pi_per_x * x;
    Ok(CandidateSolution {
        regime,
        concept: Concept::LEE,
        y1: StateOutcome { x, pi, i },
        y2: StateOutcome::default(),
        consistent: regime_holds(params, regime.binds(0), pi),
        degenerate: Degeneracy::None,
    })
}

/// The lagged-expectations solution: the consistent candidate (PP first),
/// or the binding candidate flagged inconsistent when neither holds.
pub fn lee_solution(
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<CandidateSolution, ModelError> {
    validate_inputs(params, shock)?;
    let pp = lee_candidate(Regime::PP, params, shock)?;
    if pp.consistent {
        return Ok(pp);
    }
    lee_candidate(Regime::ZP, params, shock)
}

/// Residual of the infinite-horizon fixed point
/// `(I - (1 + lambda sigma) Kt) pi = -lambda sigma i + lambda eps`, where
/// both rows of `Kt` are the ergodic distribution.
pub fn ih_rpe_residual(
    params: &ModelParams,
    shock: &MarkovShock,
    cand: &CandidateSolution,
) -> Result<f64, ModelError> {
    let qbar = ergodic_weight(shock)?;
    let kt = transition_matrix(1.0 - qbar, qbar);
    let a = params.a();
    let lhs = (Matrix2::identity() - kt * (1.0 + a)) * cand.pi();
    let rhs = -cand.i() * a + shock.eps() * params.lambda;
    Ok((lhs - rhs).amax())
}

/// True when every restricted-perceptions equilibrium of the Euler-equation
/// model also solves the infinite-horizon fixed point to 1e-8.
pub fn verify_ih_rpe_equivalence(
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<bool, ModelError> {
    let rational = params.rational();
    for cand in enumerate_equilibria(Concept::RPE, &rational, shock)? {
        if ih_rpe_residual(&rational, shock, &cand)? > 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams::with_default_mu(0.99, 1.0, 0.02, 2.0).unwrap()
    }

    #[test]
    fn zero_shock_gives_zero_pp() {
        let s = MarkovShock::new(0.0, 0.0, 0.85, 0.98).unwrap();
        for concept in [Concept::REE, Concept::RPE, Concept::BRE, Concept::BRRPE] {
            let c = solve_candidate(concept, Regime::PP, &base(), &s).unwrap();
            assert!(c.consistent);
            assert_eq!(c.y1, StateOutcome::default());
            assert_eq!(c.y2, StateOutcome::default());
        }
    }

    #[test]
    fn rpe_binding_low_state_with_absorbing_high_state() {
        // The high state is absorbing, so beliefs equal the high-state outcome,
        // which is zero. The low state then reads x1 = sigma mu + eps1.
        let params = base();
        let s = MarkovShock::new(-0.5, 0.0, 0.9, 1.0).unwrap();
        let c = solve_candidate(Concept::RPE, Regime::ZP, &params, &s).unwrap();
        assert!(c.consistent);
        assert!((c.y1.x - (params.sigma * params.mu - 0.5)).abs() < 1e-14);
        assert_eq!(c.y2.x, 0.0);
    }

    #[test]
    fn regime_helpers() {
        assert!(Regime::ZP.binds(0) && !Regime::ZP.binds(1));
        assert!(Regime::PZ.binds(1) && !Regime::PZ.binds(0));
        for r in Regime::ALL {
            assert_eq!(Regime::from_binding(r.binds(0), r.binds(1)), r);
            assert_eq!(r.label().parse::<Regime>().unwrap(), r);
        }
        assert_eq!("br-rpe".parse::<Concept>().unwrap(), Concept::BRRPE);
    }

    #[test]
    fn tie_goes_to_binding() {
        let p = base();
        let pi = -p.mu / p.psi;
        assert!(regime_holds(&p, true, pi));
        assert!(!regime_holds(&p, false, pi));
    }

    #[test]
    fn lee_without_persistence_is_the_rpe_value() {
        let params = base();
        let s = MarkovShock::new(-0.05, 0.0, 1e-9, 1.0).unwrap();
        let c = lee_candidate(Regime::ZP, &params, &s).unwrap();
        assert!((c.y1.x - (params.sigma * params.mu - 0.05)).abs() < 1e-12);
    }

    #[test]
    fn solvers_reject_negative_high_shock() {
        let s = MarkovShock::new(-0.01, -0.01, 0.85, 0.98).unwrap();
        assert!(solve_candidate(Concept::REE, Regime::PP, &base(), &s).is_err());
    }

    #[test]
    fn singular_system_is_flagged() {
        // With p = 1 and delta = 0 the binding low-state row vanishes.
        let mut params = ModelParams::with_default_mu(0.99, 0.1, 0.02, 2.0).unwrap();
        params.mf = 0.8;
        params.m = 1.0 - params.a() / (1.0 - 0.8 * 0.99);
        assert!(delta(&params).abs() < 1e-15);
        let off = MarkovShock::new(-0.01, 0.0, 1.0, 0.5).unwrap();
        let c = solve_candidate(Concept::BRE, Regime::ZP, &params, &off).unwrap();
        assert_eq!(c.degenerate, Degeneracy::NonexistentSingular);
        assert!(!c.consistent);
        let edge = off.with_eps1(-params.sigma * params.mu);
        let c = solve_candidate(Concept::BRE, Regime::ZP, &params, &edge).unwrap();
        assert_eq!(c.degenerate, Degeneracy::Continuum);
    }
}
