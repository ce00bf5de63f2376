//! Random-stencil check of the discrete divergence identities
//! `multiplier * residual = D_{-tau} T^t + D_{-s} T^s`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{conservative_kind_for, identity_defect, ConservationLawId, LawKind};
use crate::error::Result;
use crate::mesh::MeshSpec;
use crate::par;
use crate::params::{PhysicalParams, SchemeKind};
use crate::state::StateWindow;
use crate::topography::{BottomSpec, TabulatedProfile};

/// Nodes per random stencil; the law is evaluated at [`NODE`].
pub const STENCIL_NODES: usize = 6;
pub const NODE: usize = 2;

/// One random monotone 3-layer window with its mesh and parameters.
#[derive(Debug, Clone)]
pub struct RandomStencil {
    pub window: StateWindow,
    pub mesh: MeshSpec,
    pub params: PhysicalParams,
}

/// Draws a stencil. About a third of the cells get `x_hat_s` within 1e-6 of
/// `x_check_s` so the series branch of the log term is exercised too.
pub fn random_stencil(rng: &mut impl Rng, centre: f64) -> RandomStencil {
    let tau = rng.gen_range(0.002..0.1);
    let h = rng.gen_range(0.01..0.5);
    let n_curr = rng.gen_range(1..200);
    let mesh = MeshSpec::new(tau, h, STENCIL_NODES).expect("valid mesh");
    let gamma1 = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..20.0) };

    let slopes =
        |rng: &mut dyn rand::RngCore| -> Vec<f64> { (0..STENCIL_NODES - 1).map(|_| rng.gen_range(0.2..5.0)).collect() };
    let check = slopes(rng);
    let curr = slopes(rng);
    let hat: Vec<f64> = check
        .iter()
        .map(|&c| if rng.gen_bool(0.35) { c * (1.0 + rng.gen_range(-1e-6..1e-6)) } else { rng.gen_range(0.2..5.0) })
        .collect();
    let start = centre + rng.gen_range(-1.0..1.0);
    let mut layer = |xs: &[f64]| {
        let mut x = vec![start + rng.gen_range(-3.0 * tau..3.0 * tau)];
        for s in xs {
            let last = *x.last().unwrap();
            x.push(last + s * h);
        }
        x
    };
    let (a, b, c) = (layer(&check), layer(&curr), layer(&hat));
    RandomStencil {
        window: StateWindow::new(a, b, c, n_curr).expect("monotone layers"),
        mesh,
        params: PhysicalParams::new(gamma1).expect("finite gamma1"),
    }
}

/// Bottoms that carry each law, with a typical position scale.
fn cases() -> Vec<(ConservationLawId, BottomSpec, f64)> {
    let table = TabulatedProfile::new(
        (0..=40).map(|i| i as f64).collect(),
        (0..=40).map(|i| (0.3 * i as f64).sin() + 0.01 * (i * i) as f64).collect(),
    )
    .expect("valid table");
    let mut v = Vec::new();
    for coords in [ConservationLawId::lagrangian, ConservationLawId::mass_lagrangian] {
        v.push((coords(LawKind::Mass), BottomSpec::Flat(0.0), 5.0));
        v.push((coords(LawKind::Mass), BottomSpec::DamBreakParabola { d1: 10.0, length: 100.0 }, 40.0));
        v.push((coords(LawKind::Energy), BottomSpec::Flat(0.0), 5.0));
        v.push((coords(LawKind::Energy), BottomSpec::Inclined { c1: 0.3, c2: 1.0 }, 5.0));
        v.push((coords(LawKind::Energy), BottomSpec::DamBreakParabola { d1: 10.0, length: 100.0 }, 40.0));
        v.push((coords(LawKind::Energy), BottomSpec::ParabolicPlus, 2.0));
        v.push((coords(LawKind::Energy), BottomSpec::ParabolicMinus, 2.0));
        v.push((coords(LawKind::Energy), BottomSpec::Tabulated(table.clone()), 20.0));
        v.push((coords(LawKind::Momentum), BottomSpec::Flat(0.0), 5.0));
        v.push((coords(LawKind::CenterOfMass), BottomSpec::Flat(0.0), 5.0));
        v.push((coords(LawKind::ExpPlus), BottomSpec::ParabolicPlus, 2.0));
        v.push((coords(LawKind::ExpMinus), BottomSpec::ParabolicPlus, 2.0));
        v.push((coords(LawKind::Cos), BottomSpec::ParabolicMinus, 2.0));
        v.push((coords(LawKind::Sin), BottomSpec::ParabolicMinus, 2.0));
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCase {
    pub law: String,
    pub bottom: &'static str,
    pub samples: usize,
    pub max_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub cases: Vec<IdentityCase>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.max_defect <= self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.cases.iter().fold(0.0, |a, c| a.max(c.max_defect))
    }

    /// Laws covered, Lagrangian and mass-Lagrangian labels.
    pub fn laws(&self) -> Vec<String> {
        let mut l: Vec<String> = self.cases.iter().map(|c| c.law.clone()).collect();
        l.dedup();
        l
    }
}

/// Checks every law on `samples` random stencils per (law, bottom) case.
pub fn identity_suite(samples: usize, seed: u64, tolerance: f64) -> Result<IdentityReport> {
    let jobs: Vec<(usize, (ConservationLawId, BottomSpec, f64))> = cases().into_iter().enumerate().collect();
    let cases = par::map_jobs(&jobs, |(k, (id, bottom, centre))| -> Result<IdentityCase> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (*k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let scheme: SchemeKind = conservative_kind_for(bottom);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let st = random_stencil(&mut rng, *centre);
            let d = identity_defect(*id, &st.window, &st.mesh, &st.params, bottom, scheme, NODE)?;
            worst = worst.max(if d.is_finite() { d.abs() } else { f64::INFINITY });
        }
        Ok(IdentityCase { law: id.label(), bottom: bottom.name(), samples, max_defect: worst })
    });
    Ok(IdentityReport { tolerance, cases: cases.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_monotone_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (s, t) = (random_stencil(&mut a, 1.0), random_stencil(&mut b, 1.0));
            assert!(s.window.check_monotone().is_ok());
            assert_eq!(s.window.x_next, t.window.x_next);
        }
    }

    #[test]
    fn small_suite_passes() {
        let r = identity_suite(50, 11, 1e-12).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.laws().len(), 16);
    }
}
