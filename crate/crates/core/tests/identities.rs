//! Discrete divergence identities on random monotone stencils.

mod common;

use common::{dam, stencil, table, Stencil, NODE};
use mswe::diagnostics::{delta_eps, identity_defect, law_terms, ConservationLawId, LawKind};
use mswe::params::SchemeKind;
use mswe::topography::BottomSpec;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn defect(st: &Stencil, id: ConservationLawId, bottom: &BottomSpec, scheme: SchemeKind) -> f64 {
    identity_defect(id, &st.window, &st.mesh, &st.params, bottom, scheme, NODE).unwrap().abs()
}

fn both(kind: LawKind) -> [ConservationLawId; 2] {
    [ConservationLawId::lagrangian(kind), ConservationLawId::mass_lagrangian(kind)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn flat_bottom_laws(st in stencil(5.0)) {
        let flat = BottomSpec::Flat(0.0);
        for kind in [LawKind::Mass, LawKind::Energy, LawKind::Momentum, LawKind::CenterOfMass] {
            for id in both(kind) {
                let d = defect(&st, id, &flat, SchemeKind::Conservative);
                prop_assert!(d <= TOL, "{id}: {d:e}");
            }
        }
    }

    #[test]
    fn energy_over_general_bottoms(st in stencil(20.0)) {
        for bottom in [BottomSpec::Inclined { c1: 0.3, c2: 1.0 }, dam(), table()] {
            for id in both(LawKind::Energy).into_iter().chain(both(LawKind::Mass)) {
                let d = defect(&st, id, &bottom, SchemeKind::Conservative);
                prop_assert!(d <= TOL, "{id} over {}: {d:e}", bottom.name());
            }
        }
    }

    #[test]
    fn parabolic_plus_laws(st in stencil(2.0)) {
        for kind in [LawKind::Energy, LawKind::ExpPlus, LawKind::ExpMinus] {
            for id in both(kind) {
                let d = defect(&st, id, &BottomSpec::ParabolicPlus, SchemeKind::ConservativeParabolicPlus);
                prop_assert!(d <= TOL, "{id}: {d:e}");
            }
        }
    }

    #[test]
    fn parabolic_minus_laws(st in stencil(2.0)) {
        for kind in [LawKind::Energy, LawKind::Cos, LawKind::Sin] {
            for id in both(kind) {
                let d = defect(&st, id, &BottomSpec::ParabolicMinus, SchemeKind::ConservativeParabolicMinus);
                prop_assert!(d <= TOL, "{id}: {d:e}");
            }
        }
    }

    /// The rational flux keeps mass, momentum and centre of mass; its energy
    /// divergence differs from the multiplied residual by exactly delta_eps.
    #[test]
    fn naive_scheme_laws_and_energy_defect(st in stencil(5.0)) {
        let flat = BottomSpec::Flat(0.0);
        for kind in [LawKind::Mass, LawKind::Momentum, LawKind::CenterOfMass] {
            let id = ConservationLawId::lagrangian(kind);
            let d = defect(&st, id, &flat, SchemeKind::Naive);
            prop_assert!(d <= TOL, "{id}: {d:e}");
        }
        let t = law_terms(ConservationLawId::lagrangian(LawKind::Energy), &st.window, &st.mesh, &st.params, &flat, SchemeKind::Naive, NODE).unwrap();
        let (tau, h) = (st.mesh.tau, st.mesh.h);
        let gap = t.divergence(tau, h) - t.multiplier * t.equation;
        let de = delta_eps(&st.window, &st.mesh, &st.params, NODE).unwrap();
        let scale = t.scale(tau, h).max(de.abs());
        prop_assert!((gap - de).abs() <= TOL * scale, "gap {gap:e} vs delta_eps {de:e}");
    }
}

#[test]
fn laws_are_rejected_where_they_do_not_hold() {
    let flat = BottomSpec::Flat(0.0);
    assert!(ConservationLawId::lagrangian(LawKind::Momentum).check(&dam()).is_err());
    assert!(ConservationLawId::lagrangian(LawKind::ExpPlus).check(&flat).is_err());
    assert!(ConservationLawId::lagrangian(LawKind::Cos).check(&BottomSpec::ParabolicPlus).is_err());
    assert!(ConservationLawId::mass_lagrangian(LawKind::Energy).check(&table()).is_ok());
}
