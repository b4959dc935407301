mod common;

use nalgebra::{Complex, Matrix4};
use proptest::prelude::*;
use zlb_core::equilibrium::{enumerate_equilibria, Concept, Regime};
use zlb_core::estability::{
    eigenvalues_2x2, eigenvalues_msv, general_eigenvalues, jacobian_msv, jacobian_rpe, verdict,
    verdicts,
};
use zlb_core::model_core::ergodic_weight;

/// Characteristic polynomial coefficients `c_k` of `det(tI - A) = t^4 + c1 t^3 + ... + c4`
/// by the Faddeev-LeVerrier recursion.
fn char_poly(a: &Matrix4<f64>) -> [f64; 4] {
    let mut m = Matrix4::<f64>::identity();
    let mut c = [0.0; 4];
    for k in 1..=4 {
        let am = a * m;
        c[k - 1] = -am.trace() / k as f64;
        m = am + Matrix4::identity() * c[k - 1];
    }
    c
}

/// Elementary symmetric functions of the eigenvalues with alternating sign,
/// matching the polynomial coefficients.
fn coeffs_from_roots(roots: &[Complex<f64>]) -> [f64; 4] {
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        poly = next;
    }
    [poly[1].re, poly[2].re, poly[3].re, poly[4].re]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn general_solver_matches_characteristic_polynomial((params, shock) in common::params_strategy(true)) {
        for regime in Regime::ALL {
            let jac = jacobian_msv(regime, &params, &shock);
            let want = char_poly(&jac);
            let got = coeffs_from_roots(&general_eigenvalues(&jac));
            for k in 0..4 {
                prop_assert!((want[k] - got[k]).abs() < 1e-8 * (1.0 + want[k].abs()), "{:?} vs {:?}", want, got);
            }
        }
    }

    #[test]
    fn kronecker_shortcut_agrees((params, shock) in common::params_strategy(true)) {
        for regime in [Regime::PP, Regime::ZZ] {
            let jac = jacobian_msv(regime, &params, &shock);
            let want = char_poly(&jac);
            let got = coeffs_from_roots(&eigenvalues_msv(regime, &params, &shock));
            for k in 0..4 {
                prop_assert!((want[k] - got[k]).abs() < 1e-8 * (1.0 + want[k].abs()));
            }
        }
    }

    #[test]
    fn closed_form_2x2_roots((params, shock) in common::params_strategy(true)) {
        let qbar = ergodic_weight(&shock).unwrap();
        for regime in Regime::ALL {
            let j = jacobian_rpe(regime, &params, qbar);
            let eig = eigenvalues_2x2(&j);
            let sum = eig[0] + eig[1];
            let prod = eig[0] * eig[1];
            prop_assert!((sum.re - j.trace()).abs() < 1e-12 && sum.im.abs() < 1e-12);
            prop_assert!((prod.re - j.determinant()).abs() < 1e-12 && prod.im.abs() < 1e-12);
        }
    }
}

#[test]
fn unique_estable_rpe_is_pp_or_zp() {
    let mut rng = common::rng(71);
    let mut used = 0;
    while used < 200 {
        let (params, shock) = common::draw(&mut rng, false);
        let v = verdicts(Concept::RPE, &params, &shock).unwrap();
        if v.is_empty() {
            continue;
        }
        used += 1;
        let stable: Vec<_> = v
            .iter()
            .filter(|(_, v)| v.estable)
            .map(|(c, _)| c.regime)
            .collect();
        assert_eq!(stable.len(), 1, "{params:?} {shock:?}");
        assert!(matches!(stable[0], Regime::PP | Regime::ZP));
    }
}

#[test]
fn at_most_one_estable_ree_never_pz_or_zz() {
    let mut rng = common::rng(72);
    let mut used = 0;
    while used < 200 {
        let (params, shock) = common::draw(&mut rng, false);
        if enumerate_equilibria(Concept::REE, &params, &shock)
            .unwrap()
            .is_empty()
        {
            continue;
        }
        used += 1;
        let stable: Vec<_> = verdicts(Concept::REE, &params, &shock)
            .unwrap()
            .into_iter()
            .filter(|(_, v)| v.estable)
            .map(|(c, _)| c.regime)
            .collect();
        assert!(stable.len() <= 1, "{stable:?}");
        assert!(stable.iter().all(|r| matches!(r, Regime::PP | Regime::ZP)));
        // The binding loading has a root above one, so ZZ is unstable even
        // where it does not exist.
        assert!(
            !verdict(Concept::REE, Regime::ZZ, &params, &shock)
                .unwrap()
                .estable
        );
    }
}

#[test]
fn lee_has_no_estability_verdict() {
    let (params, shock) = common::trap_calibration();
    assert!(verdict(Concept::LEE, Regime::PP, &params, &shock).is_err());
}
