//! Implicit time stepping.
//!
//! One step solves the scheme for the top layer `x_hat` at nodes
//! `2..=M-3` by the iteration
//!
//! ```text
//! x_hat + tau^2 D_{-s}(1/(2 a b)) = 2x - x_check + tau^2 (S - V - gamma1 D_{-s} G)
//! ```
//!
//! where the pressure is split as `(a_- b_- - a_+ b_+) / (2 a_- a_+ b_- b_+)`
//! with the denominator frozen at the previous iterate. That leaves a
//! tridiagonal system per iteration, solved with the Thomas algorithm. The
//! `gamma1` term `G` is lagged by default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{gamma_log_term_da, log_term};
use crate::mesh::{slope, MeshSpec};
use crate::par;
use crate::params::{InitialVelocity, PhysicalParams, SchemeKind};
use crate::state::{check_monotone, StateWindow};
use crate::topography::BottomSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Nodes 0, 1, M-2, M-1 continue their straight-line trajectories.
    #[default]
    Pinned,
    /// Boundary nodes feel the bottom source only: `x_hat = 2x - x_check + tau^2 S(x)`.
    Ballistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogTermTreatment {
    /// Evaluate the log term on the previous iterate.
    Lagged,
    /// Also put its derivative into the tridiagonal matrix.
    #[default]
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Artificial-viscosity coefficient; `None` disables it.
    pub viscosity: Option<f64>,
    pub bc: BoundaryCondition,
    pub log_term: LogTermTreatment,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            rel_tol: 1e-12,
            viscosity: None,
            bc: BoundaryCondition::Pinned,
            log_term: LogTermTreatment::Linearized,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if let Some(c) = self.viscosity {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("viscosity must be non-negative, got {c}")));
            }
        }
        Ok(())
    }
}

/// Solves `A y = rhs` for tridiagonal `A` with sub-diagonal `lower`
/// (`lower[i] = A[i+1][i]`), `diag` and super-diagonal `upper`.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || (n > 0 && (lower.len() != n - 1 || upper.len() != n - 1)) {
        return Err(Error::InvalidMesh(format!(
            "band lengths {}/{}/{} do not fit a {n}x{n} system with {} right-hand sides",
            lower.len(),
            diag.len(),
            upper.len(),
            rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    thomas_in_place(lower, diag, upper, rhs, &mut c, &mut y)?;
    Ok(y)
}

fn thomas_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    c: &mut [f64],
    y: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let pivot = |p: f64, i: usize| {
        if p == 0.0 || !p.is_finite() {
            Err(Error::Singular(format!("zero pivot in tridiagonal solve at row {i}")))
        } else {
            Ok(p)
        }
    };
    let mut p = pivot(diag[0], 0)?;
    if n > 1 {
        c[0] = upper[0] / p;
    }
    y[0] = rhs[0] / p;
    for i in 1..n {
        p = pivot(diag[i] - lower[i - 1] * c[i - 1], i)?;
        if i + 1 < n {
            c[i] = upper[i] / p;
        }
        y[i] = (rhs[i] - lower[i - 1] * y[i - 1]) / p;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    Ok(())
}

/// `D_{-s} q` at node `m` with `q = coeff h^2 rho u_s^2` on compressed cells
/// (`u_s < 0`), using `u = (x - x_check)/tau` and `rho = 1/x_s` of the middle
/// layer.
pub fn artificial_viscosity(window: &StateWindow, mesh: &MeshSpec, m: usize, coeff: f64) -> Result<f64> {
    mesh.check_interior(m)?;
    if coeff == 0.0 {
        return Ok(0.0);
    }
    Ok(viscosity_at(&window.x_prev, &window.x_curr, mesh, m, coeff))
}

#[inline]
fn viscosity_q(x_prev: &[f64], x: &[f64], mesh: &MeshSpec, cell: usize, coeff: f64) -> f64 {
    let (tau, h) = (mesh.tau, mesh.h);
    let u0 = (x[cell] - x_prev[cell]) / tau;
    let u1 = (x[cell + 1] - x_prev[cell + 1]) / tau;
    let us = (u1 - u0) / h;
    if us < 0.0 {
        let rho = 1.0 / slope(x, cell, h);
        coeff * h * h * rho * us * us
    } else {
        0.0
    }
}

#[inline]
fn viscosity_at(x_prev: &[f64], x: &[f64], mesh: &MeshSpec, m: usize, coeff: f64) -> f64 {
    (viscosity_q(x_prev, x, mesh, m, coeff) - viscosity_q(x_prev, x, mesh, m - 1, coeff)) / mesh.h
}

/// Iteration record of one step.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StepStats {
    pub iterations: usize,
    /// Relative max-norm change of the last iterate.
    pub last_change: f64,
    /// Whether the change decreased at every iteration.
    pub monotone: bool,
}

/// Time stepper owning its scratch buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub mesh: MeshSpec,
    pub params: PhysicalParams,
    pub bottom: BottomSpec,
    pub scheme: SchemeKind,
    pub cfg: SolverConfig,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    solution: Vec<f64>,
}

impl Stepper {
    pub fn new(
        mesh: MeshSpec,
        params: PhysicalParams,
        bottom: BottomSpec,
        scheme: SchemeKind,
        cfg: SolverConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if scheme == SchemeKind::MassLagrangianTwoLayer {
            return Err(Error::Config(
                "the mass-Lagrangian form is evaluated from three-layer runs, not stepped".into(),
            ));
        }
        scheme.check_bottom(&bottom)?;
        if mesh.m_count < 5 {
            return Err(Error::InvalidMesh(format!("stepping needs at least 5 nodes, got {}", mesh.m_count)));
        }
        let n = mesh.m_count - 4;
        Ok(Self {
            mesh,
            params,
            bottom,
            scheme,
            cfg,
            lower: vec![0.0; n - 1],
            diag: vec![0.0; n],
            upper: vec![0.0; n - 1],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
            solution: vec![0.0; n],
        })
    }

    /// Next layer from `(x_prev, x_curr)`, starting the iteration at
    /// `2 x - x_check`.
    pub fn step(&mut self, x_prev: &[f64], x_curr: &[f64], n_curr: usize) -> Result<(Vec<f64>, StepStats)> {
        let guess: Vec<f64> = x_prev.iter().zip(x_curr).map(|(p, c)| c + (c - p)).collect();
        self.step_from(x_prev, x_curr, n_curr, guess)
    }

    /// As [`Stepper::step`] with an explicit first iterate. Boundary entries
    /// of `guess` are overwritten.
    pub fn step_from(
        &mut self,
        x_prev: &[f64],
        x_curr: &[f64],
        n_curr: usize,
        mut guess: Vec<f64>,
    ) -> Result<(Vec<f64>, StepStats)> {
        let mm = self.mesh.m_count;
        if x_prev.len() != mm || x_curr.len() != mm || guess.len() != mm {
            return Err(Error::InvalidMesh(format!("layers must have {mm} nodes")));
        }
        check_monotone(x_prev, n_curr.saturating_sub(1))?;
        check_monotone(x_curr, n_curr)?;

        let (tau, h, gamma1) = (self.mesh.tau, self.mesh.h, self.params.gamma1);
        let tau2 = tau * tau;
        let explicit_source = self.bottom.has_explicit_source();

        for m in [0, 1, mm - 2, mm - 1] {
            let v = x_curr[m] - x_prev[m];
            guess[m] = match self.cfg.bc {
                BoundaryCondition::Pinned => x_curr[m] + v,
                BoundaryCondition::Ballistic => {
                    let s = if explicit_source {
                        self.bottom.discrete_source(x_prev[m], x_curr[m], x_curr[m], tau)?
                    } else {
                        self.bottom.derivative(x_curr[m])?
                    };
                    x_curr[m] + (v + tau2 * s)
                }
            };
        }

        // Parts of the right-hand side that do not change between iterations.
        let naive_gamma: Vec<f64> = if !self.scheme.has_log_flux() && gamma1 != 0.0 {
            (0..mm - 1).map(|c| gamma1 / slope(x_curr, c, h)).collect()
        } else {
            Vec::new()
        };
        let visc: Vec<f64> = match self.cfg.viscosity {
            Some(c) if c > 0.0 => par::map_range(2..mm - 2, |m| viscosity_at(x_prev, x_curr, &self.mesh, m, c)),
            _ => vec![0.0; mm - 4],
        };
        let explicit: Vec<f64> = if explicit_source {
            par::map_range(2..mm - 2, |m| {
                self.bottom.discrete_source(x_prev[m], x_curr[m], x_curr[m], tau).expect("explicit source")
            })
        } else {
            Vec::new()
        };

        let linearized =
            self.scheme.has_log_flux() && gamma1 != 0.0 && self.cfg.log_term == LogTermTreatment::Linearized;
        let mut stats = StepStats { monotone: true, ..Default::default() };
        let mut prev_change = f64::INFINITY;

        for iter in 1..=self.cfg.max_iters {
            // Per-cell data from the current iterate: (a, b, G, J)
            let cells: Vec<[f64; 4]> = par::map_range(1..mm - 2, |c| {
                let a = slope(&guess, c, h);
                let b = slope(x_prev, c, h);
                let (g, j) = if self.scheme.has_log_flux() && gamma1 != 0.0 && a > 0.0 {
                    let g = gamma1 * log_term(a, b);
                    let j = if linearized { gamma1 * gamma_log_term_da(a, b) } else { 0.0 };
                    (g, j)
                } else if gamma1 != 0.0 && !self.scheme.has_log_flux() {
                    (naive_gamma[c], 0.0)
                } else {
                    (0.0, 0.0)
                };
                [a, b, g, j]
            });
            if let Some(c) = cells.iter().position(|v| !(v[0] > 0.0)) {
                return Err(Error::Monotonicity { layer: n_curr + 1, node: c + 1, gap: cells[c][0] * h });
            }

            let sources: Vec<f64> = if explicit_source {
                Vec::new()
            } else {
                (2..mm - 2)
                    .map(|m| self.bottom.discrete_source(x_prev[m], x_curr[m], guess[m], tau))
                    .collect::<Result<_>>()?
            };

            // Correction form: A delta = -tau^2 R(guess). The acceleration is
            // built from differences of neighbouring layers, so positions are
            // only rounded once per iteration.
            let n = mm - 4;
            for i in 0..n {
                let m = i + 2;
                let [am, bm, gm, jm] = cells[m - 2];
                let [ap, bp, gp, jp] = cells[m - 1];
                let k = tau2 / (2.0 * h * h * am * ap * bm * bp);
                let cj = tau2 / (h * h);
                if i > 0 {
                    self.lower[i - 1] = -k * bm + cj * jm;
                }
                if i + 1 < n {
                    self.upper[i] = -k * bp + cj * jp;
                }
                self.diag[i] = 1.0 + k * (bm + bp) - cj * (jm + jp);
                let s = if explicit_source { explicit[i] } else { sources[i] };
                let flux = (0.5 / (ap * bp) + gp) - (0.5 / (am * bm) + gm);
                self.rhs[i] = (x_curr[m] - x_prev[m]) - (guess[m] - x_curr[m]) + tau2 * (s - visc[i]) - tau2 * flux / h;
            }
            thomas_in_place(&self.lower, &self.diag, &self.upper, &self.rhs, &mut self.scratch, &mut self.solution)?;

            let mut dmax: f64 = 0.0;
            let mut xmax: f64 = 0.0;
            for (i, &d) in self.solution.iter().enumerate() {
                let v = guess[i + 2] + d;
                dmax = dmax.max((v - guess[i + 2]).abs());
                xmax = xmax.max(v.abs());
                guess[i + 2] = v;
            }
            let change = if xmax > 0.0 { dmax / xmax } else { dmax };
            if !change.is_finite() {
                return Err(Error::NonConvergence { step: n_curr + 1, iters: iter, change });
            }
            stats.iterations = iter;
            stats.last_change = change;
            if change > prev_change {
                stats.monotone = false;
            }
            prev_change = change;
            if change < self.cfg.rel_tol {
                check_monotone(&guess, n_curr + 1)?;
                return Ok((guess, stats));
            }
        }
        Err(Error::NonConvergence { step: n_curr + 1, iters: self.cfg.max_iters, change: stats.last_change })
    }

    /// Advance `window` by one layer.
    pub fn advance(&mut self, window: &StateWindow) -> Result<(StateWindow, StepStats)> {
        let (next, stats) = self.step(&window.x_curr, &window.x_next, window.n_curr + 1)?;
        Ok((window.advanced(next)?, stats))
    }
}

/// One implicit step; see [`Stepper`].
#[allow(clippy::too_many_arguments)]
pub fn step(
    x_prev: &[f64],
    x_curr: &[f64],
    n_curr: usize,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepStats)> {
    Stepper::new(*mesh, params.clone(), bottom.clone(), scheme, *cfg)?.step(x_prev, x_curr, n_curr)
}

/// Second layer `x1 = x0 + tau u0 + tau^2/2 a0` with `a0` the continuous
/// acceleration on `x0`. The four boundary nodes get the acceleration their
/// boundary rule gives them later: none when pinned, the bottom slope when
/// ballistic.
pub fn bootstrap_second_layer(
    x0: &[f64],
    u0: &InitialVelocity,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    bc: BoundaryCondition,
) -> Result<Vec<f64>> {
    scheme.check_bottom(bottom)?;
    if x0.len() != mesh.m_count {
        return Err(Error::InvalidMesh(format!("layer must have {} nodes", mesh.m_count)));
    }
    check_monotone(x0, 0)?;
    let (tau, h, g) = (mesh.tau, mesh.h, params.gamma1);
    let p = |c: usize| {
        let s = slope(x0, c, h);
        0.5 / (s * s) + g / s
    };
    let last = mesh.m_count - 1;
    let accel = |m: usize| -> Result<f64> {
        if m <= 1 || m + 1 >= last {
            return match bc {
                BoundaryCondition::Pinned => Ok(0.0),
                BoundaryCondition::Ballistic => bottom.derivative(x0[m]),
            };
        }
        Ok(-(p(m) - p(m - 1)) / h + bottom.derivative(x0[m])?)
    };
    let x1: Vec<f64> =
        par::map_range(0..mesh.m_count, |m| accel(m).map(|a| x0[m] + tau * u0.at(mesh.s(m)) + 0.5 * tau * tau * a))
            .into_iter()
            .collect::<Result<_>>()?;
    check_monotone(&x1, 1)?;
    Ok(x1)
}
