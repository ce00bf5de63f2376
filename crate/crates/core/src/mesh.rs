//! Uniform orthogonal space-time lattice and the difference quotients every
//! kernel is built from.
//!
//! Node `(n, m)` sits at `(t0 + n*tau, s0 + m*h)`. Forward quotients carry no
//! mark (`x_t`, `x_s`), backward ones are written with a `check` suffix in
//! time and a `minus` suffix in space.

use crate::error::{Error, Result};
use crate::state::StateWindow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub tau: f64,
    pub h: f64,
    pub m_count: usize,
    pub s0: f64,
    pub t0: f64,
}

impl MeshSpec {
    pub fn new(tau: f64, h: f64, m_count: usize) -> Result<Self> {
        Self::with_origin(tau, h, m_count, 0.0, 0.0)
    }

    pub fn with_origin(tau: f64, h: f64, m_count: usize, s0: f64, t0: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidMesh(format!("time step must be positive, got {tau}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidMesh(format!("mass step must be positive, got {h}")));
        }
        if m_count < 3 {
            return Err(Error::InvalidMesh(format!("need at least 3 nodes, got {m_count}")));
        }
        if !(s0.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidMesh("origin must be finite".into()));
        }
        Ok(Self { tau, h, m_count, s0, t0 })
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.tau
    }

    #[inline]
    pub fn s(&self, m: usize) -> f64 {
        self.s0 + m as f64 * self.h
    }

    /// Interior nodes carrying a full 3x3 stencil.
    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.m_count - 1
    }

    pub fn check_interior(&self, m: usize) -> Result<()> {
        if m == 0 || m + 1 >= self.m_count {
            return Err(Error::Index { index: m, lo: 1, hi: self.m_count - 2 });
        }
        Ok(())
    }

    /// Same lattice scaled by `lambda` in t, s (used by the scaling symmetry).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::with_origin(self.tau * lambda, self.h * lambda, self.m_count, self.s0 * lambda, self.t0 * lambda)
    }
}

/// Forward slope `(x[m+1] - x[m]) / h`.
#[inline]
pub fn slope(x: &[f64], m: usize, h: f64) -> f64 {
    (x[m + 1] - x[m]) / h
}

/// Forward slopes on the three layers of a window at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSlopes {
    pub check: f64,
    pub curr: f64,
    pub hat: f64,
}

/// All difference quotients of the 9-point stencil centred at `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilValues {
    pub x: f64,
    pub x_hat: f64,
    pub x_check: f64,
    /// `(x_hat - x) / tau`
    pub x_t: f64,
    /// `(x - x_check) / tau`
    pub x_t_check: f64,
    /// `(x_hat - 2x + x_check) / tau^2`
    pub x_tt: f64,
    /// `x_t` at node `m + 1`
    pub x_t_plus: f64,
    /// `x_t_check` at node `m + 1`
    pub x_t_check_plus: f64,
    /// Slopes of cell `m` (nodes m, m+1).
    pub xs: LayerSlopes,
    /// Slopes of cell `m - 1` (nodes m-1, m).
    pub xs_minus: LayerSlopes,
}

/// Difference quotients at interior node `m` of `window`.
pub fn diff_ops(window: &StateWindow, mesh: &MeshSpec, m: usize) -> Result<StencilValues> {
    mesh.check_interior(m)?;
    if window.len() != mesh.m_count {
        return Err(Error::InvalidMesh(format!("window has {} nodes, mesh expects {}", window.len(), mesh.m_count)));
    }
    Ok(stencil_unchecked(window, mesh, m))
}

/// [`diff_ops`] without range checks; callers iterate over `mesh.interior()`.
#[inline]
pub(crate) fn stencil_unchecked(window: &StateWindow, mesh: &MeshSpec, m: usize) -> StencilValues {
    let (xp, xc, xn) = (&window.x_prev, &window.x_curr, &window.x_next);
    let (tau, h) = (mesh.tau, mesh.h);
    StencilValues {
        x: xc[m],
        x_hat: xn[m],
        x_check: xp[m],
        x_t: (xn[m] - xc[m]) / tau,
        x_t_check: (xc[m] - xp[m]) / tau,
        x_tt: (xn[m] - 2.0 * xc[m] + xp[m]) / (tau * tau),
        x_t_plus: (xn[m + 1] - xc[m + 1]) / tau,
        x_t_check_plus: (xc[m + 1] - xp[m + 1]) / tau,
        xs: LayerSlopes { check: slope(xp, m, h), curr: slope(xc, m, h), hat: slope(xn, m, h) },
        xs_minus: LayerSlopes { check: slope(xp, m - 1, h), curr: slope(xc, m - 1, h), hat: slope(xn, m - 1, h) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_rejects_bad_steps() {
        assert!(MeshSpec::new(0.0, 0.1, 10).is_err());
        assert!(MeshSpec::new(0.1, -1.0, 10).is_err());
        assert!(MeshSpec::new(0.1, 0.1, 2).is_err());
        assert!(MeshSpec::new(f64::NAN, 0.1, 5).is_err());
        let mesh = MeshSpec::with_origin(0.01, 0.1, 5, 2.0, 1.0).unwrap();
        assert!((mesh.t(3) - 1.03).abs() < 1e-15);
        assert!((mesh.s(4) - 2.4).abs() < 1e-15);
    }

    #[test]
    fn static_state_quotients() {
        let layer = vec![0.0, 1.0, 2.0];
        let w = StateWindow::new(layer.clone(), layer.clone(), layer, 1).unwrap();
        let mesh = MeshSpec::new(0.1, 1.0, 3).unwrap();
        let v = diff_ops(&w, &mesh, 1).unwrap();
        assert_eq!(v.x_t, 0.0);
        assert_eq!(v.x_t_check, 0.0);
        assert_eq!(v.x_tt, 0.0);
        for s in [v.xs, v.xs_minus] {
            assert_eq!((s.check, s.curr, s.hat), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn linear_motion_quotients() {
        let (xp, xc, xn): ([f64; 2], [f64; 2], [f64; 2]) = ([0.0, 1.0], [0.0, 1.1], [0.0, 1.2]);
        let tau = 0.1;
        let h = 1.0;
        assert_eq!(slope(&xp, 0, h), 1.0 / h);
        assert!(((xn[1] - xc[1]) / tau - 1.0).abs() < 1e-12);
        assert!(((xc[1] - xp[1]) / tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_boundary_nodes() {
        let layer = vec![0.0, 1.0, 2.0, 3.0];
        let w = StateWindow::new(layer.clone(), layer.clone(), layer, 1).unwrap();
        let mesh = MeshSpec::new(0.1, 1.0, 4).unwrap();
        assert!(matches!(diff_ops(&w, &mesh, 0), Err(Error::Index { .. })));
        assert!(matches!(diff_ops(&w, &mesh, 3), Err(Error::Index { .. })));
        assert!(diff_ops(&w, &mesh, 2).is_ok());
    }
}
