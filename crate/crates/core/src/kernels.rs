//! Residual evaluators for the three-layer schemes and the two-layer
//! mass-Lagrangian form.
//!
//! Every three-layer residual has the shape
//! `x_tt + D_{-s}(P) - S` with `P = 1/(2 x_hat_s x_check_s) + gamma1 G`, where
//! `G` is the logarithmic term `L(x_hat_s, x_check_s)` for the conservative
//! kinds and `1 / x_s` for the naive one.

use crate::error::{Error, Result};
use crate::mesh::{diff_ops, stencil_unchecked, MeshSpec, StencilValues};
use crate::par;
use crate::params::{PhysicalParams, SchemeKind};
use crate::state::StateWindow;
use crate::topography::{cos_factor, cosh_factor, BottomSpec};

/// Relative band `|a/b - 1| < THETA` where the logarithmic terms switch to
/// their truncated series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

const SERIES_TERMS: usize = 8;

/// Individual flux contributions at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxTerms {
    /// `1 / (2 x_hat_s x_check_s)` on cell m.
    pub pressure: f64,
    /// Same on cell m - 1.
    pub pressure_minus: f64,
    /// `gamma1 G` on cell m.
    pub gamma: f64,
    pub gamma_minus: f64,
    /// Discrete `(H')^h` subtracted from the acceleration.
    pub source: f64,
}

impl FluxTerms {
    /// Total flux `P` on cell m.
    pub fn total(&self) -> f64 {
        self.pressure + self.gamma
    }

    pub fn total_minus(&self) -> f64 {
        self.pressure_minus + self.gamma_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelResult {
    pub residual: f64,
    pub flux_terms: FluxTerms,
}

/// `L(a, b) = ln(a/b) / (a - b)`, with `L(a, a) = 1/a`.
pub fn gamma_log_term(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("log term needs positive slopes, got ({a}, {b})")));
    }
    Ok(log_term(a, b))
}

#[inline]
pub(crate) fn log_term(a: f64, b: f64) -> f64 {
    let diff = a - b;
    let d = diff / b;
    if d.abs() < SERIES_THRESHOLD {
        // (1/b) sum_k (-d)^k / (k + 1), Horner from the top
        let mut acc = 0.0;
        for k in (0..SERIES_TERMS).rev() {
            acc = 1.0 / (k as f64 + 1.0) - d * acc;
        }
        acc / b
    } else {
        d.ln_1p() / diff
    }
}

/// `dL/da`, used by the linearized solver.
pub fn gamma_log_term_da(a: f64, b: f64) -> f64 {
    let diff = a - b;
    let d = diff / b;
    if d.abs() < SERIES_THRESHOLD {
        // (1/b^2) sum_{k>=1} k (-1)^k d^(k-1) / (k + 1)
        let mut acc = 0.0;
        for k in (1..=SERIES_TERMS).rev() {
            let c = k as f64 / (k as f64 + 1.0);
            let c = if k % 2 == 1 { -c } else { c };
            acc = c + d * acc;
        }
        acc / (b * b)
    } else {
        (1.0 / a - d.ln_1p() / diff) / diff
    }
}

#[inline]
fn check_slopes(v: &StencilValues, log_flux: bool) -> Result<()> {
    let mut slopes = [v.xs.check, v.xs.hat, v.xs_minus.check, v.xs_minus.hat, 1.0, 1.0];
    if !log_flux {
        slopes[4] = v.xs.curr;
        slopes[5] = v.xs_minus.curr;
    }
    if slopes.iter().all(|&s| s > 0.0 && s.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-positive slope near x = {}; layers are not monotone", v.x)))
    }
}

/// Shared residual assembly. `source` is already evaluated.
#[inline]
pub(crate) fn assemble(v: &StencilValues, h: f64, gamma1: f64, log_flux: bool, source: f64) -> KernelResult {
    let pressure = 0.5 / (v.xs.hat * v.xs.check);
    let pressure_minus = 0.5 / (v.xs_minus.hat * v.xs_minus.check);
    let (gamma, gamma_minus) = if gamma1 == 0.0 {
        (0.0, 0.0)
    } else if log_flux {
        (gamma1 * log_term(v.xs.hat, v.xs.check), gamma1 * log_term(v.xs_minus.hat, v.xs_minus.check))
    } else {
        (gamma1 / v.xs.curr, gamma1 / v.xs_minus.curr)
    };
    let flux = (pressure + gamma - pressure_minus - gamma_minus) / h;
    KernelResult {
        residual: v.x_tt + flux - source,
        flux_terms: FluxTerms { pressure, pressure_minus, gamma, gamma_minus, source },
    }
}

fn three_layer(
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    m: usize,
    log_flux: bool,
) -> Result<KernelResult> {
    let v = diff_ops(window, mesh, m)?;
    check_slopes(&v, log_flux)?;
    let source = bottom.discrete_source(v.x_check, v.x, v.x_hat, mesh.tau)?;
    Ok(assemble(&v, mesh.h, params.gamma1, log_flux, source))
}

/// Residual of the energy-conserving scheme with the logarithmic flux.
pub fn residual_conservative(
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    m: usize,
) -> Result<KernelResult> {
    SchemeKind::Conservative.check_bottom(bottom)?;
    three_layer(window, mesh, params, bottom, m, true)
}

/// Residual of the scheme with the rational `gamma1 / x_s` flux.
pub fn residual_naive(
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    m: usize,
) -> Result<KernelResult> {
    SchemeKind::Naive.check_bottom(bottom)?;
    three_layer(window, mesh, params, bottom, m, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParabolicSign {
    /// `H = x^2/2`, cosh-corrected source.
    Plus,
    /// `H = -x^2/2`, cos-corrected source.
    Minus,
}

/// Residual over `H = +-x^2/2` with the source `k x` taken on the middle layer.
pub fn residual_parabolic(
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    sign: ParabolicSign,
    m: usize,
) -> Result<KernelResult> {
    let v = diff_ops(window, mesh, m)?;
    check_slopes(&v, true)?;
    let k = match sign {
        ParabolicSign::Plus => cosh_factor(1.0, mesh.tau),
        ParabolicSign::Minus => cos_factor(mesh.tau),
    };
    Ok(assemble(&v, mesh.h, params.gamma1, true, k * v.x))
}

/// Residual of `scheme` at node `m`.
pub fn residual(
    scheme: SchemeKind,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    m: usize,
) -> Result<KernelResult> {
    match scheme {
        SchemeKind::Conservative => residual_conservative(window, mesh, params, bottom, m),
        SchemeKind::Naive => residual_naive(window, mesh, params, bottom, m),
        SchemeKind::ConservativeParabolicPlus | SchemeKind::ConservativeParabolicMinus => {
            scheme.check_bottom(bottom)?;
            let sign = if scheme == SchemeKind::ConservativeParabolicPlus {
                ParabolicSign::Plus
            } else {
                ParabolicSign::Minus
            };
            residual_parabolic(window, mesh, params, sign, m)
        }
        SchemeKind::MassLagrangianTwoLayer => {
            Err(Error::Config("the mass-Lagrangian form has its own residual, see residual_mass_lagrangian".into()))
        }
    }
}

fn residual_at(
    scheme: SchemeKind,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    m: usize,
) -> Result<f64> {
    let v = stencil_unchecked(window, mesh, m);
    check_slopes(&v, scheme.has_log_flux())?;
    let source = bottom.discrete_source(v.x_check, v.x, v.x_hat, mesh.tau)?;
    Ok(assemble(&v, mesh.h, params.gamma1, scheme.has_log_flux(), source).residual)
}

fn field_checks(scheme: SchemeKind, window: &StateWindow, mesh: &MeshSpec, bottom: &BottomSpec) -> Result<()> {
    if scheme == SchemeKind::MassLagrangianTwoLayer {
        return Err(Error::Config("no three-layer residual for the mass-Lagrangian form".into()));
    }
    scheme.check_bottom(bottom)?;
    if window.len() != mesh.m_count {
        return Err(Error::InvalidMesh(format!("window has {} nodes, mesh expects {}", window.len(), mesh.m_count)));
    }
    Ok(())
}

/// Residuals at all interior nodes `1..M-1`, using the compiled-in backend.
pub fn residual_field(
    scheme: SchemeKind,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
) -> Result<Vec<f64>> {
    field_checks(scheme, window, mesh, bottom)?;
    par::map_range(mesh.interior(), |m| residual_at(scheme, window, mesh, params, bottom, m)).into_iter().collect()
}

/// [`residual_field`] forced onto a single thread.
pub fn residual_field_seq(
    scheme: SchemeKind,
    window: &StateWindow,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
) -> Result<Vec<f64>> {
    field_checks(scheme, window, mesh, bottom)?;
    par::map_range_seq(mesh.interior(), |m| residual_at(scheme, window, mesh, params, bottom, m)).into_iter().collect()
}

/// Two-layer flux `Q(rho, rho_check, p, p_check)`.
///
/// With `a = 2/rho - 1/sqrt(p)` and `b = 1/sqrt(p_check)` this is
/// `1/(2 B) + gamma1 ln(a/b) rho rho_check / (2 (rho_check - rho))`, where
/// `B = 4/(rho rho_check) - (2/sqrt(p)) (1/rho + 1/rho_check) + 1/p`.
/// Close to `rho = rho_check` the log factor becomes `gamma1 L(a, b)`.
pub fn flux_q(rho: f64, rho_check: f64, p: f64, p_check: f64, gamma1: f64) -> Result<f64> {
    for (name, v) in [("rho", rho), ("rho_check", rho_check), ("p", p), ("p_check", p_check)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("flux Q needs positive {name}, got {v}")));
        }
    }
    let isp = 1.0 / p.sqrt();
    let bracket = 4.0 / (rho * rho_check) - 2.0 * isp * (1.0 / rho + 1.0 / rho_check) + 1.0 / p;
    if !(bracket.abs() > 0.0) {
        return Err(Error::Singular(format!("flux Q bracket vanishes at rho = {rho}, rho_check = {rho_check}")));
    }
    let first = 0.5 / bracket;
    if gamma1 == 0.0 {
        return Ok(first);
    }
    let a = 2.0 / rho - isp;
    let b = 1.0 / p_check.sqrt();
    if !(a > 0.0) {
        return Err(Error::Domain(format!("flux Q log argument is not positive: {}", a / b)));
    }
    let log_part = if (rho / rho_check - 1.0).abs() < SERIES_THRESHOLD {
        log_term(a, b)
    } else {
        (a / b).ln() * rho * rho_check / (2.0 * (rho_check - rho))
    };
    Ok(first + gamma1 * log_part)
}

/// Fields of the two-layer scheme on one time layer: nodal `x`, `u` and
/// cell-centred `rho`, `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassLagrangianLayer {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
}

impl MassLagrangianLayer {
    /// Closure of a three-layer trajectory: `u = (x_next - x)/tau`,
    /// `rho = 2 / (x_s + x_next_s)`, `p = 1 / x_s^2`.
    pub fn from_positions(x: &[f64], x_next: &[f64], tau: f64, h: f64) -> Result<Self> {
        if x.len() != x_next.len() || x.len() < 2 {
            return Err(Error::InvalidMesh("layer lengths differ or are too short".into()));
        }
        crate::state::check_monotone(x, 0)?;
        crate::state::check_monotone(x_next, 1)?;
        let u = crate::state::velocity(x, x_next, tau);
        let (rho, p) = x
            .windows(2)
            .zip(x_next.windows(2))
            .map(|(c, n)| {
                let s = (c[1] - c[0]) / h;
                let sn = (n[1] - n[0]) / h;
                (2.0 / (s + sn), 1.0 / (s * s))
            })
            .unzip();
        Ok(Self { x: x.to_vec(), u, rho, p })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MassLagrangianResiduals {
    pub r_mass: f64,
    pub r_momentum: f64,
    pub r_link1: f64,
    pub r_link2: f64,
    pub r_link3: f64,
    /// `Q` on cells m - 1 and m.
    pub q_minus: f64,
    pub q: f64,
}

/// Residuals of the two-layer scheme between `prev` (layer n-1) and `curr`
/// (layer n) at interior node `m`. Cell quantities use cell m.
pub fn residual_mass_lagrangian(
    prev: &MassLagrangianLayer,
    curr: &MassLagrangianLayer,
    mesh: &MeshSpec,
    params: &PhysicalParams,
    bottom: &BottomSpec,
    m: usize,
) -> Result<MassLagrangianResiduals> {
    mesh.check_interior(m)?;
    for layer in [prev, curr] {
        if layer.len() != mesh.m_count
            || layer.u.len() != mesh.m_count
            || layer.rho.len() + 1 != mesh.m_count
            || layer.p.len() + 1 != mesh.m_count
        {
            return Err(Error::InvalidMesh("mass-Lagrangian layer does not match the mesh".into()));
        }
    }
    let (tau, h, g) = (mesh.tau, mesh.h, params.gamma1);
    let q = flux_q(curr.rho[m], prev.rho[m], curr.p[m], prev.p[m], g)?;
    let q_minus = flux_q(curr.rho[m - 1], prev.rho[m - 1], curr.p[m - 1], prev.p[m - 1], g)?;

    let x_hat = curr.x[m] + tau * curr.u[m];
    let source = bottom.discrete_source(prev.x[m], curr.x[m], x_hat, tau)?;

    let r_mass = (1.0 / curr.rho[m] - 1.0 / prev.rho[m]) / tau
        - ((curr.u[m + 1] + prev.u[m + 1]) - (curr.u[m] + prev.u[m])) / (2.0 * h);
    let r_momentum = (curr.u[m] - prev.u[m]) / tau + (q - q_minus) / h - source;
    let r_link1 = (curr.x[m] - prev.x[m]) / tau - prev.u[m];
    let r_link2 = (prev.x[m + 1] - prev.x[m]) / h + (curr.x[m + 1] - curr.x[m]) / h - 2.0 / prev.rho[m];
    let r_link3 = 1.0 / prev.p[m].sqrt() + 1.0 / curr.p[m].sqrt() - 2.0 / prev.rho[m];
    Ok(MassLagrangianResiduals { r_mass, r_momentum, r_link1, r_link2, r_link3, q_minus, q })
}
