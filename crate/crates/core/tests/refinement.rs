//! Convergence and error-scaling checks on a smooth flat-bottom problem.

mod common;

use common::{bump, level_gaps, max_delta_eps, table};
use mswe::mesh::MeshSpec;
use mswe::params::{InitialVelocity, PhysicalParams, SchemeKind};
use mswe::solver::{bootstrap_second_layer, SolverConfig, Stepper};
use mswe::state::StateWindow;
use mswe::topography::BottomSpec;

#[test]
fn self_convergence_is_second_order() {
    let gaps = level_gaps(&[(0.02, 0.1), (0.01, 0.05), (0.005, 0.025)]);
    let order = (gaps[0] / gaps[1]).log2();
    assert!(order >= 1.8, "observed order {order:.3} from gaps {gaps:?}");
}

#[test]
fn naive_defect_is_quadratic_in_tau() {
    let ratio = max_delta_eps(1.0, 0.01, 0.1) / max_delta_eps(1.0, 0.005, 0.1);
    assert!((ratio - 4.0).abs() <= 0.8, "halving tau: ratio {ratio:.3}");
}

#[test]
fn naive_defect_is_linear_in_gamma1() {
    // small gamma1: the flow itself barely depends on it
    let ratio = max_delta_eps(0.02, 0.01, 0.1) / max_delta_eps(0.01, 0.01, 0.1);
    assert!((ratio - 2.0).abs() <= 0.1, "doubling gamma1: ratio {ratio:.3}");
}

/// Bootstrap layer vs a fine-step reference at `t = tau`.
fn bootstrap_error(tau: f64) -> f64 {
    let h = 0.1;
    let m_count = 201;
    let params = PhysicalParams::new(1.0).unwrap();
    let bottom = BottomSpec::Flat(0.0);
    let u0 = InitialVelocity::profile(|s| 0.3 * (-(s - 10.0) * (s - 10.0)).exp());
    let x0: Vec<f64> = (0..m_count).map(|m| bump(m as f64 * h)).collect();
    let coarse = MeshSpec::new(tau, h, m_count).unwrap();
    let x1 = bootstrap_second_layer(&x0, &u0, &coarse, &params, &bottom, SchemeKind::Conservative, Default::default())
        .unwrap();

    let sub = 64;
    let fine = MeshSpec::new(tau / sub as f64, h, m_count).unwrap();
    let f1 = bootstrap_second_layer(&x0, &u0, &fine, &params, &bottom, SchemeKind::Conservative, Default::default())
        .unwrap();
    let mut stepper =
        Stepper::new(fine, params.clone(), bottom, SchemeKind::Conservative, SolverConfig::default()).unwrap();
    let mut w = StateWindow::new(x0.clone(), x0, f1, 0).unwrap();
    for _ in 1..sub {
        w = stepper.advance(&w).unwrap().0;
    }
    (2..m_count - 2).map(|m| (x1[m] - w.x_next[m]).abs()).fold(0.0, f64::max)
}

#[test]
fn bootstrap_is_locally_third_order() {
    let (a, b) = (bootstrap_error(0.04), bootstrap_error(0.02));
    let order = (a / b).log2();
    // local O(tau^3) keeps the global error at O(tau^2)
    assert!(order >= 2.7, "local order {order:.3} ({a:e}, {b:e})");
}

#[test]
fn discrete_sources_approach_the_slope() {
    let cases = [
        (BottomSpec::DamBreakParabola { d1: 10.0, length: 100.0 }, 37.0),
        (BottomSpec::ParabolicPlus, 0.7),
        (BottomSpec::ParabolicMinus, 0.7),
        (table(), 12.5),
    ];
    for (bottom, x) in cases {
        let err = |tau: f64| {
            let (u, a) = (0.8, 0.6);
            let s = bottom
                .discrete_source(x - u * tau + 0.5 * a * tau * tau, x, x + u * tau + 0.5 * a * tau * tau, tau)
                .unwrap();
            (s - bottom.derivative(x).unwrap()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() <= 0.4, "{}: ratio {ratio:.3}", bottom.name());
    }
}
