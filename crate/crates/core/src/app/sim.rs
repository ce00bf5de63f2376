//! Run driver holding the last two layers.

use crate::diagnostics::total_energy_with_bottom;
use crate::error::{Error, Result};
use crate::init::{build_mass_coordinates, mesh_for, ProblemSpec};
use crate::mesh::MeshSpec;
use crate::params::SchemeKind;
use crate::solver::{bootstrap_second_layer, SolverConfig, StepStats, Stepper};
use crate::state::StateWindow;
use crate::topography::{incline_to_flat, BottomSpec};

#[derive(Debug, Clone)]
pub struct Simulation {
    pub spec: ProblemSpec,
    pub mesh: MeshSpec,
    pub scheme: SchemeKind,
    stepper: Stepper,
    x_prev: Vec<f64>,
    x_curr: Vec<f64>,
    /// Time index of `x_curr`.
    n: usize,
}

impl Simulation {
    /// Equal-mass initial layer plus the Taylor second layer, solved over
    /// `spec.solver_bottom()`.
    pub fn new(spec: ProblemSpec, scheme: SchemeKind, tau: f64, h: f64, cfg: SolverConfig) -> Result<Self> {
        let mesh = mesh_for(&spec, tau, h)?;
        let bottom = spec.solver_bottom();
        let x0 = build_mass_coordinates(&spec, &mesh)?;
        let x1 = bootstrap_second_layer(&x0, &spec.params.u0, &mesh, &spec.params, &bottom, scheme, cfg.bc)?;
        Self::from_layers(spec, bottom, scheme, mesh, cfg, x0, x1, 0)
    }

    /// Start from given layers `n0` and `n0 + 1` over an explicit bottom.
    #[allow(clippy::too_many_arguments)]
    pub fn from_layers(
        spec: ProblemSpec,
        bottom: BottomSpec,
        scheme: SchemeKind,
        mesh: MeshSpec,
        cfg: SolverConfig,
        x0: Vec<f64>,
        x1: Vec<f64>,
        n0: usize,
    ) -> Result<Self> {
        let stepper = Stepper::new(mesh, spec.params.clone(), bottom, scheme, cfg)?;
        if x0.len() != mesh.m_count || x1.len() != mesh.m_count {
            return Err(Error::InvalidMesh("initial layers do not match the mesh".into()));
        }
        Ok(Self { spec, mesh, scheme, stepper, x_prev: x0, x_curr: x1, n: n0 + 1 })
    }

    pub fn bottom(&self) -> &BottomSpec {
        &self.stepper.bottom
    }

    /// Time index of the newest layer.
    pub fn newest(&self) -> usize {
        self.n
    }

    /// Layers `newest - 1` and `newest`.
    pub fn layers(&self) -> (&[f64], &[f64]) {
        (&self.x_prev, &self.x_curr)
    }

    /// Computes layer `newest + 1`; returns the full window centred on the
    /// previous newest layer.
    pub fn advance(&mut self) -> Result<(StateWindow, StepStats)> {
        let (next, stats) = self.stepper.step(&self.x_prev, &self.x_curr, self.n)?;
        let prev = std::mem::replace(&mut self.x_prev, std::mem::take(&mut self.x_curr));
        self.x_curr = next.clone();
        let w = StateWindow::new(prev, self.x_prev.clone(), next, self.n)?;
        self.n += 1;
        Ok((w, stats))
    }

    /// Total energy of the pair `(newest - 1, newest)`, bottom included.
    pub fn energy(&self) -> Result<f64> {
        total_energy_with_bottom(&self.x_prev, &self.x_curr, &self.mesh, &self.spec.params, self.bottom())
    }

    /// Positions of layer `n` in the frame of the physical bed: the flat-frame
    /// layer moved by the incline map, if the problem has one.
    pub fn physical_positions(&self, x: &[f64], n: usize) -> Vec<f64> {
        match self.spec.incline() {
            Some(c1) if self.bottom().is_flat() => {
                let (t, t_hat) = (self.mesh.t(n), self.mesh.t(n + 1));
                x.iter().map(|&v| incline_to_flat(v, t, t_hat, c1)).collect()
            }
            _ => x.to_vec(),
        }
    }
}
