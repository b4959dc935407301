//! Jacobians of the learning ODE and the E-stability selection criterion.

use nalgebra::{Complex, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    effective_params, enumerate_equilibria, CandidateSolution, Concept, Regime,
};
use crate::error::ModelError;
use crate::model_core::{ergodic_weight, loadings, MarkovShock, ModelParams};

/// Real parts must be below `-ESTABILITY_MARGIN` to count as stable.
pub const ESTABILITY_MARGIN: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EStabilityVerdict {
    pub regime: Regime,
    pub concept: Concept,
    /// Row-major Jacobian, 4x4 for state-contingent beliefs and 2x2 for
    /// mean beliefs.
    pub jacobian: Vec<Vec<f64>>,
    pub max_real_part: f64,
    pub estable: bool,
    /// The largest real part is within the margin of zero.
    pub boundary: bool,
}

fn regime_loading(
    regime: Regime,
    state: usize,
    a_p: &Matrix2<f64>,
    a_z: &Matrix2<f64>,
) -> Matrix2<f64> {
    if regime.binds(state) {
        *a_z
    } else {
        *a_p
    }
}

/// Jacobian for state-contingent beliefs using the discounts in `params`.
/// Row block `j` is `K_j1 A_j, K_j2 A_j` where `A_j` is the loading of the
/// regime in state `j`.
pub fn jacobian_msv(regime: Regime, params: &ModelParams, shock: &MarkovShock) -> Matrix4<f64> {
    let (a_p, a_z) = loadings(params);
    let k = shock.transition();
    let mut jac = Matrix4::zeros();
    for j in 0..2 {
        let a = regime_loading(regime, j, &a_p, &a_z);
        for c in 0..2 {
            jac.fixed_view_mut::<2, 2>(2 * j, 2 * c)
                .copy_from(&(a * k[(j, c)]));
        }
    }
    jac - Matrix4::identity()
}

/// Rational-expectations Jacobian; any discounts in `params` are ignored.
pub fn jacobian_ree(regime: Regime, params: &ModelParams, shock: &MarkovShock) -> Matrix4<f64> {
    jacobian_msv(regime, &params.rational(), shock)
}

/// Jacobian for mean beliefs: the ergodic mixture of the two state loadings
/// minus the identity. Uses the discounts in `params`, so pass rational
/// parameters for the plain restricted-perceptions case.
pub fn jacobian_rpe(regime: Regime, params: &ModelParams, qbar: f64) -> Matrix2<f64> {
    let (a_p, a_z) = loadings(params);
    regime_loading(regime, 0, &a_p, &a_z) * (1.0 - qbar)
        + regime_loading(regime, 1, &a_p, &a_z) * qbar
        - Matrix2::identity()
}

/// Closed-form eigenvalues of a real 2x2 matrix.
pub fn eigenvalues_2x2(m: &Matrix2<f64>) -> [Complex<f64>; 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [
            Complex::new(0.5 * tr + r, 0.0),
            Complex::new(0.5 * tr - r, 0.0),
        ]
    } else {
        let r = (-disc).sqrt();
        [Complex::new(0.5 * tr, r), Complex::new(0.5 * tr, -r)]
    }
}

/// Eigenvalues of a state-contingent Jacobian. When both states share a
/// loading the matrix is `K (x) A - I` and its spectrum is every product of
/// an eigenvalue of `K` (1 and `p + q - 1`) with one of `A`, shifted by one.
pub fn eigenvalues_msv(
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Vec<Complex<f64>> {
    if matches!(regime, Regime::PP | Regime::ZZ) {
        let (a_p, a_z) = loadings(params);
        let a = if regime == Regime::PP { a_p } else { a_z };
        let alphas = eigenvalues_2x2(&a);
        let mut out = Vec::with_capacity(4);
        for kappa in [1.0, shock.rho()] {
            for alpha in alphas {
                out.push(alpha * kappa - 1.0);
            }
        }
        out
    } else {
        general_eigenvalues(&jacobian_msv(regime, params, shock))
    }
}

pub fn general_eigenvalues(m: &Matrix4<f64>) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

fn max_real(eigs: &[Complex<f64>]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

fn rows<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<f64, R, C>>(
    m: &nalgebra::Matrix<f64, R, C, S>,
) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn make_verdict(
    concept: Concept,
    regime: Regime,
    jacobian: Vec<Vec<f64>>,
    max_real_part: f64,
) -> EStabilityVerdict {
    EStabilityVerdict {
        regime,
        concept,
        jacobian,
        max_real_part,
        estable: max_real_part < -ESTABILITY_MARGIN,
        boundary: max_real_part.abs() <= ESTABILITY_MARGIN,
    }
}

/// E-stability of one regime under one concept.
pub fn verdict(
    concept: Concept,
    regime: Regime,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<EStabilityVerdict, ModelError> {
    let eff = effective_params(concept, params);
    match concept {
        Concept::REE | Concept::BRE => {
            let jac = jacobian_msv(regime, &eff, shock);
            let eigs = eigenvalues_msv(regime, &eff, shock);
            Ok(make_verdict(concept, regime, rows(&jac), max_real(&eigs)))
        }
        Concept::RPE | Concept::BRRPE => {
            let qbar = ergodic_weight(shock)?;
            let jac = jacobian_rpe(regime, &eff, qbar);
            let eigs = eigenvalues_2x2(&jac);
            Ok(make_verdict(concept, regime, rows(&jac), max_real(&eigs)))
        }
        Concept::LEE => Err(ModelError::Unsupported(
            "E-stability is not defined for LEE".into(),
        )),
    }
}

/// Every consistent candidate paired with its E-stability verdict.
pub fn verdicts(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<Vec<(CandidateSolution, EStabilityVerdict)>, ModelError> {
    enumerate_equilibria(concept, params, shock)?
        .into_iter()
        .map(|cand| Ok((cand, verdict(concept, cand.regime, params, shock)?)))
        .collect()
}

/// The unique consistent and E-stable candidate. Fails with
/// [`ModelError::NoEStableEquilibrium`] when there is none and with
/// [`ModelError::MultipleEStable`] when the selection is ambiguous.
pub fn classify(
    concept: Concept,
    params: &ModelParams,
    shock: &MarkovShock,
) -> Result<(CandidateSolution, EStabilityVerdict), ModelError> {
    let mut stable: Vec<_> = verdicts(concept, params, shock)?
        .into_iter()
        .filter(|(_, v)| v.estable)
        .collect();
    match stable.len() {
        0 => Err(ModelError::NoEStableEquilibrium),
        1 => Ok(stable.remove(0)),
        n => Err(ModelError::MultipleEStable(n)),
    }
}
