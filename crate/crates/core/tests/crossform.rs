//! The two-layer mass-Lagrangian scheme and the inclined frame, both checked
//! against trajectories of the three-layer scheme.

mod common;

use common::{inclined_gap, ml_defect, smooth_run, state_equation_gap};
use mswe::app::Simulation;
use mswe::init::ProblemSpec;
use mswe::params::{PhysicalParams, SchemeKind};
use mswe::solver::SolverConfig;
use mswe::topography::BottomSpec;

#[test]
fn two_layer_scheme_holds_on_dam_break_trajectory() {
    let spec = ProblemSpec::dam_break(10.0).unwrap();
    let params = spec.params.clone();
    let mut sim = Simulation::new(spec, SchemeKind::Conservative, 0.01, 0.1, SolverConfig::default()).unwrap();
    let bottom = sim.bottom().clone();
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let (w, _) = sim.advance().unwrap();
        worst = worst.max(ml_defect(&w, &sim.mesh, &params, &bottom));
    }
    assert!(worst <= 1e-9, "worst scaled residual {worst:e}");
}

#[test]
fn two_layer_scheme_holds_on_smooth_trajectory() {
    let params = PhysicalParams::new(3.0).unwrap();
    let mut worst: f64 = 0.0;
    smooth_run(SchemeKind::Conservative, 3.0, 0.01, 0.1, 0.5, |w, mesh| {
        worst = worst.max(ml_defect(w, mesh, &params, &BottomSpec::Flat(0.0)));
    });
    assert!(worst <= 1e-9, "worst scaled residual {worst:e}");
}

#[test]
fn flux_q_tends_to_the_state_equation() {
    let gaps: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&t| state_equation_gap(t)).collect();
    for pair in gaps.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!((0.8..=1.3).contains(&order), "order {order:.3} from {gaps:?}");
    }
}

#[test]
fn inclined_frame_matches_mapped_flat_run() {
    // positions are O(100) here, so compare against their size
    let (gap, scale) = inclined_gap(100);
    assert!(gap / scale <= 1e-12, "worst node-wise gap {gap:e}, relative {:e}", gap / scale);
}
