#![allow(dead_code)]

use proptest::prelude::*;

use mswe::diagnostics::delta_eps_field;
use mswe::kernels::{residual_mass_lagrangian, MassLagrangianLayer};
use mswe::mesh::MeshSpec;
use mswe::params::{PhysicalParams, SchemeKind};
use mswe::state::StateWindow;
use mswe::topography::{BottomSpec, TabulatedProfile};

pub const NODES: usize = 6;
pub const NODE: usize = 2;

#[derive(Debug, Clone)]
pub struct Stencil {
    pub window: StateWindow,
    pub mesh: MeshSpec,
    pub params: PhysicalParams,
}

fn layer(start: f64, slopes: &[f64], h: f64) -> Vec<f64> {
    let mut x = vec![start];
    for s in slopes {
        x.push(x.last().unwrap() + s * h);
    }
    x
}

/// Random monotone 3-layer stencil around `centre`. Cells flagged in the
/// `hat` list get `x_hat_s` within 1e-6 of `x_check_s` (series branch).
pub fn stencil(centre: f64) -> impl Strategy<Value = Stencil> {
    let slopes = || prop::collection::vec(0.2f64..5.0, NODES - 1);
    (
        0.002f64..0.1,
        0.01f64..0.5,
        prop_oneof![1 => Just(0.0), 9 => 0.0f64..20.0],
        1usize..200,
        slopes(),
        slopes(),
        prop::collection::vec((any::<bool>(), 0.2f64..5.0, -1e-6f64..1e-6), NODES - 1),
        -1.0f64..1.0,
        prop::array::uniform3(-3.0f64..3.0),
    )
        .prop_map(move |(tau, h, gamma1, n, check, curr, hat, start, shift)| {
            let hat: Vec<f64> = check
                .iter()
                .zip(&hat)
                .map(|(&c, &(near, far, eps))| if near { c * (1.0 + eps) } else { far })
                .collect();
            let x0 = centre + start;
            let window = StateWindow::new(
                layer(x0 + shift[0] * tau, &check, h),
                layer(x0 + shift[1] * tau, &curr, h),
                layer(x0 + shift[2] * tau, &hat, h),
                n,
            )
            .unwrap();
            Stencil {
                window,
                mesh: MeshSpec::new(tau, h, NODES).unwrap(),
                params: PhysicalParams::new(gamma1).unwrap(),
            }
        })
}

/// Layers `n-1, n, n+1` of `f(t, s)` on `mesh`.
pub fn window_from(f: impl Fn(f64, f64) -> f64, mesh: &MeshSpec, n: usize) -> StateWindow {
    let layer = |k: usize| (0..mesh.m_count).map(|m| f(mesh.t(k), mesh.s(m))).collect::<Vec<_>>();
    StateWindow::new(layer(n - 1), layer(n), layer(n + 1), n).unwrap()
}

pub fn table() -> BottomSpec {
    BottomSpec::Tabulated(
        TabulatedProfile::new(
            (0..=40).map(|i| i as f64).collect(),
            (0..=40).map(|i| (0.3 * i as f64).sin() + 0.01 * (i * i) as f64).collect(),
        )
        .unwrap(),
    )
}

pub fn dam() -> BottomSpec {
    BottomSpec::DamBreakParabola { d1: 10.0, length: 100.0 }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Smooth density bump on `s in [0, 20]`, flat bottom, at rest.
pub fn bump(s: f64) -> f64 {
    s + 0.1 * (-(s - 10.0) * (s - 10.0)).exp()
}

/// Steps the bump to `t_end`; `visit` sees every window. Returns the last layer.
pub fn smooth_run(
    scheme: SchemeKind,
    gamma1: f64,
    tau: f64,
    h: f64,
    t_end: f64,
    mut visit: impl FnMut(&StateWindow, &MeshSpec),
) -> Vec<f64> {
    use mswe::params::InitialVelocity;
    use mswe::solver::{bootstrap_second_layer, SolverConfig, Stepper};
    let m_count = (20.0 / h).round() as usize + 1;
    let mesh = MeshSpec::new(tau, h, m_count).unwrap();
    let params = PhysicalParams::new(gamma1).unwrap();
    let bottom = BottomSpec::Flat(0.0);
    let x0: Vec<f64> = (0..m_count).map(|m| bump(mesh.s(m))).collect();
    let x1 = bootstrap_second_layer(&x0, &InitialVelocity::Rest, &mesh, &params, &bottom, scheme, Default::default())
        .unwrap();
    let mut stepper = Stepper::new(mesh, params, bottom, scheme, SolverConfig::default()).unwrap();
    let steps = (t_end / tau).round() as usize;
    let mut w = StateWindow::new(x0.clone(), x0, x1, 0).unwrap();
    for _ in 1..steps {
        let (next, _) = stepper.advance(&w).unwrap();
        visit(&next, &mesh);
        w = next;
    }
    w.x_next
}

/// Largest |delta eps| over all interior nodes and steps of a naive run to t = 1.
pub fn max_delta_eps(gamma1: f64, tau: f64, h: f64) -> f64 {
    let params = PhysicalParams::new(gamma1).unwrap();
    let mut worst: f64 = 0.0;
    smooth_run(SchemeKind::Naive, gamma1, tau, h, 1.0, |w, mesh| {
        worst = worst.max(max_abs(&delta_eps_field(w, mesh, &params, 2..mesh.m_count - 2).unwrap()));
    });
    worst
}

/// Max difference between runs at consecutive (tau, h) levels, on the coarse nodes.
pub fn level_gaps(levels: &[(f64, f64)]) -> Vec<f64> {
    let runs: Vec<Vec<f64>> =
        levels.iter().map(|&(t, h)| smooth_run(SchemeKind::Conservative, 1.0, t, h, 1.0, |_, _| {})).collect();
    let coarse = runs[0].len();
    (0..runs.len() - 1)
        .map(|k| {
            let r = 1 << k;
            (0..coarse).map(|i| (runs[k][i * r] - runs[k + 1][i * 2 * r]).abs()).fold(0.0, f64::max)
        })
        .collect()
}

/// Worst scaled two-layer residual over a window's interior nodes.
pub fn ml_defect(w: &StateWindow, mesh: &MeshSpec, params: &PhysicalParams, bottom: &BottomSpec) -> f64 {
    let (tau, h) = (mesh.tau, mesh.h);
    let prev = MassLagrangianLayer::from_positions(&w.x_prev, &w.x_curr, tau, h).unwrap();
    let curr = MassLagrangianLayer::from_positions(&w.x_curr, &w.x_next, tau, h).unwrap();
    let mut worst: f64 = 0.0;
    for m in 2..mesh.m_count - 2 {
        let r = residual_mass_lagrangian(&prev, &curr, mesh, params, bottom, m).unwrap();
        let u = curr.u[m].abs() + prev.u[m].abs() + curr.u[m + 1].abs() + prev.u[m + 1].abs();
        let x = curr.x[m].abs() + prev.x[m].abs() + curr.x[m + 1].abs();
        let vol = 1.0 / curr.rho[m] + 1.0 / prev.rho[m];
        let src = bottom.derivative(curr.x[m]).unwrap().abs();
        let pairs = [
            (r.r_mass, vol / tau + u / h),
            (r.r_momentum, u / tau + (r.q.abs() + r.q_minus.abs()) / h + src),
            (r.r_link1, x / tau + u),
            (r.r_link2, x / h + 2.0 / prev.rho[m]),
            (r.r_link3, vol + 1.0 / prev.p[m].sqrt() + 1.0 / curr.p[m].sqrt()),
        ];
        for (v, s) in pairs {
            worst = worst.max(v.abs() / s);
        }
    }
    worst
}

/// max |Q - (rho^2/2 + gamma1 rho)| over a smooth run with given tau.
pub fn state_equation_gap(tau: f64) -> f64 {
    let g = 2.0;
    let params = PhysicalParams::new(g).unwrap();
    let mut worst: f64 = 0.0;
    smooth_run(SchemeKind::Conservative, g, tau, 0.1, 0.5, |w, mesh| {
        let prev = MassLagrangianLayer::from_positions(&w.x_prev, &w.x_curr, tau, mesh.h).unwrap();
        let curr = MassLagrangianLayer::from_positions(&w.x_curr, &w.x_next, tau, mesh.h).unwrap();
        for m in 2..mesh.m_count - 2 {
            let r = residual_mass_lagrangian(&prev, &curr, mesh, &params, &BottomSpec::Flat(0.0), m).unwrap();
            let rho = curr.rho[m];
            worst = worst.max((r.q - (0.5 * rho * rho + g * rho)).abs());
        }
    });
    worst
}

/// Column collapse stepped in the inclined frame with ballistic ends, against
/// the flat-frame run moved by the incline map. Returns the worst node-wise
/// gap and max |x| over `steps` steps.
pub fn inclined_gap(steps: usize) -> (f64, f64) {
    use mswe::app::Simulation;
    use mswe::init::ProblemSpec;
    use mswe::solver::{BoundaryCondition, SolverConfig, Stepper};
    use mswe::topography::incline_to_flat;
    let c1 = 0.1;
    let (tau, h) = (0.01, 0.1);
    let spec = ProblemSpec::column_collapse(10.0, c1, 0.0).unwrap();
    let cfg = SolverConfig { bc: BoundaryCondition::Ballistic, ..SolverConfig::default() };
    let mut flat = Simulation::new(spec.clone(), SchemeKind::Conservative, tau, h, cfg).unwrap();
    assert!(flat.bottom().is_flat());

    let (x0, x1) = flat.layers();
    let z0 = x0.to_vec();
    let z1: Vec<f64> = x1.iter().map(|&x| incline_to_flat(x, tau, 2.0 * tau, c1)).collect();
    let mut inclined = Stepper::new(
        flat.mesh,
        spec.params.clone(),
        BottomSpec::Inclined { c1, c2: 0.0 },
        SchemeKind::Conservative,
        cfg,
    )
    .unwrap();
    let mut w = StateWindow::new(z0.clone(), z0, z1, 0).unwrap();

    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for _ in 1..steps {
        let (fw, _) = flat.advance().unwrap();
        w = inclined.advance(&w).unwrap().0;
        let n = fw.n_curr + 1;
        let (t, t_hat) = (n as f64 * tau, (n + 1) as f64 * tau);
        for (x, z) in fw.x_next.iter().zip(&w.x_next) {
            worst = worst.max((incline_to_flat(*x, t, t_hat, c1) - z).abs());
            scale = scale.max(z.abs());
        }
    }
    (worst, scale)
}
