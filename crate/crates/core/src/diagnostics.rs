//! Discrete conservation laws and energy diagnostics.
//!
//! Each law is a pair of densities `T^t` (on the layer pair `n, n+1`) and
//! fluxes `T^s` (on cell `m`) with
//! `multiplier * residual = D_{-tau} T^t + D_{-s} T^s`
//! for every window, solution or not. The `f`-laws (momentum, centre of mass
//! and the parabolic exponential/trigonometric laws) share one form:
//! `T^t = f x_t - x f_t`, `T^s = f P`, valid whenever the source is `c x`
//! and `f_hat + f_check = (2 + c tau^2) f`.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{assemble, flux_q, log_term, MassLagrangianLayer};
use crate::mesh::{diff_ops, slope, stencil_unchecked, MeshSpec, StencilValues};
use crate::par;
use crate::params::{PhysicalParams, SchemeKind};
use crate::solver::StepStats;
use crate::state::StateWindow;
use crate::topography::BottomSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Mass,
    Energy,
    Momentum,
    CenterOfMass,
    ExpPlus,
    ExpMinus,
    Cos,
    Sin,
}

impl LawKind {
    pub const ALL: [LawKind; 8] = [
        LawKind::Mass,
        LawKind::Energy,
        LawKind::Momentum,
        LawKind::CenterOfMass,
        LawKind::ExpPlus,
        LawKind::ExpMinus,
        LawKind::Cos,
        LawKind::Sin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LawKind::Mass => "mass",
            LawKind::Energy => "energy",
            LawKind::Momentum => "momentum",
            LawKind::CenterOfMass => "center_of_mass",
            LawKind::ExpPlus => "exp_plus",
            LawKind::ExpMinus => "exp_minus",
            LawKind::Cos => "cos",
            LawKind::Sin => "sin",
        }
    }

    /// Time multiplier `f(t)` of the `f`-laws.
    fn time_factor(&self, t: f64) -> Option<f64> {
        match self {
            LawKind::Momentum => Some(1.0),
            LawKind::CenterOfMass => Some(t),
            LawKind::ExpPlus => Some(t.exp()),
            LawKind::ExpMinus => Some((-t).exp()),
            LawKind::Cos => Some(t.cos()),
            LawKind::Sin => Some(t.sin()),
            LawKind::Mass | LawKind::Energy => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    #[default]
    Lagrangian,
    MassLagrangian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConservationLawId {
    pub kind: LawKind,
    pub coords: Coordinates,
}

impl ConservationLawId {
    pub fn lagrangian(kind: LawKind) -> Self {
        Self { kind, coords: Coordinates::Lagrangian }
    }

    pub fn mass_lagrangian(kind: LawKind) -> Self {
        Self { kind, coords: Coordinates::MassLagrangian }
    }

    pub fn label(&self) -> String {
        match self.coords {
            Coordinates::Lagrangian => self.kind.name().to_string(),
            Coordinates::MassLagrangian => format!("{}_ml", self.kind.name()),
        }
    }

    /// Rejects laws the bottom does not carry.
    pub fn check(&self, bottom: &BottomSpec) -> Result<()> {
        let ok = match self.kind {
            LawKind::Mass | LawKind::Energy => true,
            LawKind::Momentum | LawKind::CenterOfMass => bottom.is_flat(),
            LawKind::ExpPlus | LawKind::ExpMinus => matches!(bottom, BottomSpec::ParabolicPlus),
            LawKind::Cos | LawKind::Sin => matches!(bottom, BottomSpec::ParabolicMinus),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("the {} law does not hold over a {} bottom", self.kind.name(), bottom.name())))
        }
    }
}

impl fmt::Display for ConservationLawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Lagrangian laws carried by `bottom`, in catalogue order.
pub fn applicable_laws(bottom: &BottomSpec) -> Vec<ConservationLawId> {
    LawKind::ALL.iter().map(|&k| ConservationLawId::lagrangian(k)).filter(|id| id.check(bottom).is_ok()).collect()
}

/// The energy-conserving scheme kind matching a bottom.
pub fn conservative_kind_for(bottom: &BottomSpec) -> SchemeKind {
    match bottom {
        BottomSpec::ParabolicPlus => SchemeKind::ConservativeParabolicPlus,
        BottomSpec::ParabolicMinus => SchemeKind::ConservativeParabolicMinus,
        _ => SchemeKind::Conservative,
    }
}

/// Densities, fluxes and multiplier of one law at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LawTerms {
    /// `T^t` on layers `(n, n+1)`.
    pub tt: f64,
    /// `T^t` on layers `(n-1, n)`.
    pub tt_prev: f64,
    /// `T^s` on cell m.
    pub ts: f64,
    /// `T^s` on cell m - 1.
    pub ts_minus: f64,
    /// Multiplier applied to the scheme equation (0 for mass, which is an identity).
    pub multiplier: f64,
    /// Residual of the scheme equation the multiplier acts on.
    pub equation: f64,
}

impl LawTerms {
    pub fn divergence(&self, tau: f64, h: f64) -> f64 {
        (self.tt - self.tt_prev) / tau + (self.ts - self.ts_minus) / h
    }

    /// Magnitude the divergence is measured against.
    pub fn scale(&self, tau: f64, h: f64) -> f64 {
        (self.tt.abs() / tau).max(self.tt_prev.abs() / tau).max(self.ts.abs() / h).max(self.ts_minus.abs() / h)
    }

    /// `D_{-tau} T^t + D_{-s} T^s` divided by [`LawTerms::scale`].
    pub fn scaled_divergence(&self, tau: f64, h: f64) -> f64 {
        scaled(self.divergence(tau, h), self.scale(tau, h))
    }

    /// Scaled defect of `multiplier * equation = divergence`.
    pub fn identity_defect(&self, tau: f64, h: f64) -> f64 {
        let lhs = self.multiplier * self.equation;
        let scale = self.scale(tau, h).max(lhs.abs());
        scaled(lhs - self.divergence(tau, h), scale)
    }
}

#[inline]
fn scaled(v: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        v / scale
    } else {
        v
    }
}

#[inline]
fn scheme_flux(a: f64, b: f64, c: f64, gamma1: f64, log_flux: bool) -> f64 {
    let g = if gamma1 == 0.0 {
        0.0
    } else if log_flux {
        gamma1 * log_term(a, b)
    } else {
        gamma1 / c
    };
    0.5 / (a * b) + g
}

/// Energy density on one layer pair: `x_t^2/2 + 1/(4 x_s) + 1/(4 x_hat_s)
/// - (gamma1/2) ln(x_s x_hat_s) - H^h(x, x_hat)`.
#[inline]
fn energy_density(x_t: f64, xs: f64, xs_hat: f64, potential: f64, gamma1: f64) -> f64 {
    let mut e = 0.5 * x_t * x_t + 0.25 / xs + 0.25 / xs_hat - potential;
    if gamma1 != 0.0 {
        e -= 0.5 * gamma1 * (xs * xs_hat).ln();
    }
    e
}

fn lagrangian_terms(
    kind: LawKind,
    v: &StencilValues,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    t_n: f64,
) -> Result<LawTerms> {
    let (tau, h, g) = (mesh.tau, mesh.h, params.gamma1);
    let log_flux = scheme.has_log_flux();
    let p = scheme_flux(v.xs.hat, v.xs.check, v.xs.curr, g, log_flux);
    let p_minus = scheme_flux(v.xs_minus.hat, v.xs_minus.check, v.xs_minus.curr, g, log_flux);
    let equation = || -> Result<f64> {
        let s = bottom.discrete_source(v.x_check, v.x, v.x_hat, tau)?;
        Ok(assemble(v, h, g, log_flux, s).residual)
    };
    Ok(match kind {
        LawKind::Mass => LawTerms {
            tt: v.xs.hat,
            tt_prev: v.xs.curr,
            ts: -v.x_t_plus,
            ts_minus: -v.x_t,
            multiplier: 0.0,
            equation: 0.0,
        },
        LawKind::Energy => {
            let lam = 0.5 * (v.x_t + v.x_t_check);
            let lam_plus = 0.5 * (v.x_t_plus + v.x_t_check_plus);
            LawTerms {
                tt: energy_density(v.x_t, v.xs.curr, v.xs.hat, bottom.potential_pair(v.x, v.x_hat, tau)?, g),
                tt_prev: energy_density(
                    v.x_t_check,
                    v.xs.check,
                    v.xs.curr,
                    bottom.potential_pair(v.x_check, v.x, tau)?,
                    g,
                ),
                ts: lam_plus * p,
                ts_minus: lam * p_minus,
                multiplier: lam,
                equation: equation()?,
            }
        }
        _ => {
            let f = |t: f64| kind.time_factor(t).expect("f-law");
            let (f_prev, f_n, f_next) = (f(t_n - tau), f(t_n), f(t_n + tau));
            LawTerms {
                tt: f_n * v.x_t - v.x * (f_next - f_n) / tau,
                tt_prev: f_prev * v.x_t_check - v.x_check * (f_n - f_prev) / tau,
                ts: f_n * p,
                ts_minus: f_n * p_minus,
                multiplier: f_n,
                equation: equation()?,
            }
        }
    })
}

fn check_law(id: ConservationLawId, bottom: &BottomSpec, scheme: SchemeKind) -> Result<()> {
    id.check(bottom)?;
    if scheme == SchemeKind::MassLagrangianTwoLayer {
        return Err(Error::Config(
            "pass the three-layer scheme the trajectory came from; mass-Lagrangian laws are selected by the law id"
                .into(),
        ));
    }
    scheme.check_bottom(bottom)
}

/// Terms of law `id` at node `m` of `window`. `scheme` selects the flux `P`
/// used in `T^s` (logarithmic or rational).
pub fn law_terms(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    m: usize,
) -> Result<LawTerms> {
    check_law(id, bottom, scheme)?;
    let v = diff_ops(window, mesh, m)?;
    law_terms_at(id, window, &v, mesh, params, bottom, scheme, m)
}

#[allow(clippy::too_many_arguments)]
fn law_terms_at(
    id: ConservationLawId,
    window: &StateWindow,
    v: &StencilValues,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    m: usize,
) -> Result<LawTerms> {
    for s in [v.xs.check, v.xs.curr, v.xs.hat, v.xs_minus.check, v.xs_minus.curr, v.xs_minus.hat] {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("non-positive slope near node {m}")));
        }
    }
    let t_n = mesh.t(window.n_curr);
    match id.coords {
        Coordinates::Lagrangian => lagrangian_terms(id.kind, v, mesh, params, bottom, scheme, t_n),
        Coordinates::MassLagrangian => {
            if !scheme.has_log_flux() {
                return Err(Error::Config("mass-Lagrangian laws use the logarithmic flux".into()));
            }
            let range = m - 1..m + 2;
            let cut = |x: &[f64]| x[range.clone()].to_vec();
            let prev =
                MassLagrangianLayer::from_positions(&cut(&window.x_prev), &cut(&window.x_curr), mesh.tau, mesh.h)?;
            let curr =
                MassLagrangianLayer::from_positions(&cut(&window.x_curr), &cut(&window.x_next), mesh.tau, mesh.h)?;
            mass_lagrangian_terms(id.kind, &prev, &curr, mesh, params, bottom, t_n, 1)
        }
    }
}

/// Terms of a law in mass-Lagrangian variables at node `m` of the layers
/// `prev` (n-1) and `curr` (n); `t_n` is the time of layer n. The identities
/// hold on fields satisfying the closure relations.
#[allow(clippy::too_many_arguments)]
pub fn mass_lagrangian_terms(
    kind: LawKind,
    prev: &MassLagrangianLayer,
    curr: &MassLagrangianLayer,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    t_n: f64,
    m: usize,
) -> Result<LawTerms> {
    let (tau, h, g) = (mesh.tau, mesh.h, params.gamma1);
    if m == 0 || m + 1 >= curr.len() || prev.len() != curr.len() {
        return Err(Error::Index { index: m, lo: 1, hi: curr.len().saturating_sub(2) });
    }
    let q = flux_q(curr.rho[m], prev.rho[m], curr.p[m], prev.p[m], g)?;
    let q_minus = flux_q(curr.rho[m - 1], prev.rho[m - 1], curr.p[m - 1], prev.p[m - 1], g)?;
    let x_hat = curr.x[m] + tau * curr.u[m];
    let momentum = || -> Result<f64> {
        let s = bottom.discrete_source(prev.x[m], curr.x[m], x_hat, tau)?;
        Ok((curr.u[m] - prev.u[m]) / tau + (q - q_minus) / h - s)
    };
    let ubar = |k: usize| 0.5 * (curr.u[k] + prev.u[k]);
    Ok(match kind {
        LawKind::Mass => LawTerms {
            tt: 1.0 / curr.rho[m],
            tt_prev: 1.0 / prev.rho[m],
            ts: -ubar(m + 1),
            ts_minus: -ubar(m),
            multiplier: 0.0,
            equation: 0.0,
        },
        LawKind::Energy => {
            let density = |l: &MassLagrangianLayer, x_next: f64| -> Result<f64> {
                let (rho, p, u) = (l.rho[m], l.p[m], l.u[m]);
                let sp = p.sqrt();
                let mut e = 0.5 * u * u + p / (2.0 * (2.0 * sp - rho)) - bottom.potential_pair(l.x[m], x_next, tau)?;
                if g != 0.0 {
                    e -= 0.5 * g * (2.0 / (rho * sp) - 1.0 / p).ln();
                }
                Ok(e)
            };
            LawTerms {
                tt: density(curr, x_hat)?,
                tt_prev: density(prev, curr.x[m])?,
                ts: ubar(m + 1) * q,
                ts_minus: ubar(m) * q_minus,
                multiplier: ubar(m),
                equation: momentum()?,
            }
        }
        _ => {
            let f = |t: f64| kind.time_factor(t).expect("f-law");
            let (f_prev, f_n, f_next) = (f(t_n - tau), f(t_n), f(t_n + tau));
            LawTerms {
                tt: f_n * curr.u[m] - curr.x[m] * (f_next - f_n) / tau,
                tt_prev: f_prev * prev.u[m] - prev.x[m] * (f_n - f_prev) / tau,
                ts: f_n * q,
                ts_minus: f_n * q_minus,
                multiplier: f_n,
                equation: momentum()?,
            }
        }
    })
}

/// Scaled `D_{-tau} T^t + D_{-s} T^s` of law `id` at node `m`.
pub fn cl_residual(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    m: usize,
) -> Result<f64> {
    Ok(law_terms(id, window, mesh, params, bottom, scheme, m)?.scaled_divergence(mesh.tau, mesh.h))
}

/// Scaled defect of `multiplier * scheme residual = divergence` at node `m`.
pub fn identity_defect(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    m: usize,
) -> Result<f64> {
    Ok(law_terms(id, window, mesh, params, bottom, scheme, m)?.identity_defect(mesh.tau, mesh.h))
}

/// Scaled law residuals over `nodes`, using the compiled-in backend.
#[allow(clippy::too_many_arguments)]
pub fn cl_residual_field(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    nodes: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    field_with(id, window, mesh, params, bottom, scheme, nodes, true)
}

/// [`cl_residual_field`] on one thread.
#[allow(clippy::too_many_arguments)]
pub fn cl_residual_field_seq(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    nodes: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    field_with(id, window, mesh, params, bottom, scheme, nodes, false)
}

#[allow(clippy::too_many_arguments)]
fn field_with(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    nodes: std::ops::Range<usize>,
    parallel: bool,
) -> Result<Vec<f64>> {
    check_law(id, bottom, scheme)?;
    if window.len() != mesh.m_count {
        return Err(Error::InvalidMesh("window does not match the mesh".into()));
    }
    if nodes.start == 0 || nodes.end >= mesh.m_count {
        return Err(Error::Index { index: nodes.start.min(nodes.end), lo: 1, hi: mesh.m_count - 2 });
    }
    let eval = |m: usize| {
        let v = stencil_unchecked(window, mesh, m);
        law_terms_at(id, window, &v, mesh, params, bottom, scheme, m).map(|t| t.scaled_divergence(mesh.tau, mesh.h))
    };
    let out = if parallel { par::map_range(nodes, eval) } else { par::map_range_seq(nodes, eval) };
    out.into_iter().collect()
}

/// Summed law over a node range: `h sum div = h sum D_{-tau} T^t + boundary flux`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalBalance {
    /// `h * sum(D_{-tau} T^t + D_{-s} T^s)`
    pub total: f64,
    /// `h * sum(D_{-tau} T^t)`
    pub storage: f64,
    /// `T^s(last) - T^s(first - 1)`
    pub boundary_flux: f64,
}

impl GlobalBalance {
    /// `total - storage - boundary_flux`, zero up to rounding.
    pub fn defect(&self) -> f64 {
        self.total - self.storage - self.boundary_flux
    }
}

#[allow(clippy::too_many_arguments)]
pub fn global_balance(
    id: ConservationLawId,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    scheme: SchemeKind,
    nodes: std::ops::Range<usize>,
) -> Result<GlobalBalance> {
    if nodes.is_empty() {
        return Ok(GlobalBalance { total: 0.0, storage: 0.0, boundary_flux: 0.0 });
    }
    let terms: Vec<LawTerms> =
        nodes.clone().map(|m| law_terms(id, window, mesh, params, bottom, scheme, m)).collect::<Result<_>>()?;
    let (tau, h) = (mesh.tau, mesh.h);
    let total = h * terms.iter().map(|t| t.divergence(tau, h)).sum::<f64>();
    let storage = h * terms.iter().map(|t| (t.tt - t.tt_prev) / tau).sum::<f64>();
    let boundary_flux = terms[terms.len() - 1].ts - terms[0].ts_minus;
    Ok(GlobalBalance { total, storage, boundary_flux })
}

/// Energy defect of the rational-flux scheme at node `m`:
/// `gamma1 { L x_ss/(x_s x_s-) + D_{-s}((x_t+ + x_t_check+)/(2 x_s)) - D_{-tau} ln(x_s x_hat_s)/2 }`
/// with `L = (x_t + x_t_check)/2`.
pub fn delta_eps(window: &StateWindow, mesh: &MeshSpec, params: &PhysicalParams, m: usize) -> Result<f64> {
    let v = diff_ops(window, mesh, m)?;
    for s in [v.xs.check, v.xs.curr, v.xs.hat, v.xs_minus.curr] {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("non-positive slope near node {m}")));
        }
    }
    Ok(delta_eps_at(&v, mesh, params.gamma1))
}

#[inline]
fn delta_eps_at(v: &StencilValues, mesh: &MeshSpec, gamma1: f64) -> f64 {
    if gamma1 == 0.0 {
        return 0.0;
    }
    let (tau, h) = (mesh.tau, mesh.h);
    let lam = 0.5 * (v.x_t + v.x_t_check);
    let xss = (v.xs.curr - v.xs_minus.curr) / h;
    let term1 = lam * xss / (v.xs.curr * v.xs_minus.curr);
    let term2 =
        ((v.x_t_plus + v.x_t_check_plus) / (2.0 * v.xs.curr) - (v.x_t + v.x_t_check) / (2.0 * v.xs_minus.curr)) / h;
    let term3 = 0.5 * (v.xs.hat / v.xs.check).ln() / tau;
    gamma1 * (term1 + term2 - term3)
}

pub fn delta_eps_field(
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    nodes: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    if nodes.start == 0 || nodes.end >= mesh.m_count || window.len() != mesh.m_count {
        return Err(Error::Index { index: nodes.start, lo: 1, hi: mesh.m_count - 2 });
    }
    Ok(par::map_range(nodes, |m| delta_eps_at(&stencil_unchecked(window, mesh, m), mesh, params.gamma1)))
}

/// `(h/2) sum_i [ ((x1_i - x0_i)/tau)^2 + h/(x0_{i+1} - x0_i) - 2 gamma1 ln((x0_{i+1} - x0_i)/h) ]`
/// over `i = 0..M-2`.
pub fn total_energy(x0: &[f64], x1: &[f64], mesh: &MeshSpec, params: &PhysicalParams) -> Result<f64> {
    if x0.len() != mesh.m_count || x1.len() != mesh.m_count {
        return Err(Error::InvalidMesh(format!("layers must have {} nodes", mesh.m_count)));
    }
    let (tau, h, g) = (mesh.tau, mesh.h, params.gamma1);
    let mut sum = 0.0;
    for i in 0..mesh.m_count - 1 {
        let dx = x0[i + 1] - x0[i];
        if !(dx > 0.0) {
            return Err(Error::Domain(format!("non-positive cell width at {i}")));
        }
        let u = (x1[i] - x0[i]) / tau;
        sum += u * u + h / dx;
        if g != 0.0 {
            sum -= 2.0 * g * (dx / h).ln();
        }
    }
    Ok(0.5 * h * sum)
}

/// [`total_energy`] minus the bottom potential `h sum_i H^h(x0_i, x1_i)`.
pub fn total_energy_with_bottom(
    x0: &[f64],
    x1: &[f64],
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
) -> Result<f64> {
    let base = total_energy(x0, x1, mesh, params)?;
    let mut pot = 0.0;
    for i in 0..mesh.m_count - 1 {
        pot += bottom.potential_pair(x0[i], x1[i], mesh.tau)?;
    }
    Ok(base - mesh.h * pot)
}

/// `|H_n - H_0| / |H_0|`.
pub fn relative_energy_error(h_n: f64, h_0: f64) -> Result<f64> {
    if h_0 == 0.0 || !h_0.is_finite() {
        return Err(Error::Domain("relative energy error is undefined for H_0 = 0".into()));
    }
    Ok((h_n - h_0).abs() / h_0.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerianSample {
    pub x: f64,
    pub u: f64,
    pub rho: f64,
}

/// Eulerian sample at node `m` of the middle layer: position, forward
/// velocity and the depth of cell `m`.
pub fn to_eulerian(window: &StateWindow, mesh: &MeshSpec, m: usize) -> Result<EulerianSample> {
    if m + 1 >= mesh.m_count || window.len() != mesh.m_count {
        return Err(Error::Index { index: m, lo: 0, hi: mesh.m_count - 2 });
    }
    let s = slope(&window.x_curr, m, mesh.h);
    if !(s > 0.0) {
        return Err(Error::Domain(format!("non-positive slope at cell {m}")));
    }
    Ok(EulerianSample { x: window.x_curr[m], u: (window.x_next[m] - window.x_curr[m]) / mesh.tau, rho: 1.0 / s })
}

/// Lagrangian `(T^t, T^s)` to Eulerian `(rho T^t, rho u T^t + T^s)`.
pub fn convert_flux(tt: f64, ts: f64, rho: f64, u: f64) -> (f64, f64) {
    (rho * tt, rho * u * tt + ts)
}

/// Per-step diagnostics of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub step: usize,
    pub t: f64,
    /// Scaled law residuals at the enforced nodes, one field per law.
    pub laws: Vec<(ConservationLawId, Vec<f64>)>,
    pub delta_eps: Option<Vec<f64>>,
    pub h_total: f64,
    pub e_r: f64,
    pub stats: StepStats,
    /// First node of the law fields.
    pub first_node: usize,
}

/// Decomposition used for the energy defect, recorded in report metadata.
pub const DELTA_EPS_FORM: &str =
    "gamma1*{L*x_ss/(x_s*x_s-) + D-s((x_t+ + xc_t+)/(2 x_s)) - D-t(ln(x_s*xh_s))/2}, L=(x_t+xc_t)/2";

impl DiagnosticsReport {
    pub fn max_abs(&self, kind: LawKind) -> Option<f64> {
        self.laws.iter().find(|(id, _)| id.kind == kind).map(|(_, v)| v.iter().fold(0.0f64, |a, b| a.max(b.abs())))
    }

    /// One row per node per law: `step,t,law,m,value`.
    pub fn write_csv(&self, out: &mut impl Write, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "step,t,law,m,value")?;
        }
        for (id, field) in &self.laws {
            for (i, v) in field.iter().enumerate() {
                writeln!(out, "{},{},{},{},{:e}", self.step, self.t, id, self.first_node + i, v)?;
            }
        }
        if let Some(d) = &self.delta_eps {
            for (i, v) in d.iter().enumerate() {
                writeln!(out, "{},{},delta_eps,{},{:e}", self.step, self.t, self.first_node + i, v)?;
            }
        }
        Ok(())
    }

    /// Totals only, as a JSON object.
    pub fn summary_json(&self) -> serde_json::Value {
        let maxima: serde_json::Map<String, serde_json::Value> =
            self.laws.iter().map(|(id, v)| (id.label(), v.iter().fold(0.0f64, |a, b| a.max(b.abs())).into())).collect();
        serde_json::json!({
            "step": self.step,
            "t": self.t,
            "h_total": self.h_total,
            "e_r": self.e_r,
            "max_abs_law_residual": maxima,
            "max_abs_delta_eps": self.delta_eps.as_ref().map(|d| d.iter().fold(0.0f64, |a, b| a.max(b.abs()))),
            "iterations": self.stats.iterations,
            "last_change": self.stats.last_change,
        })
    }
}
