//! Initial data: free-surface profiles, the cumulative mass
//! `A(x) = int_0^x rho0`, and equal-mass particle positions `x0[m] = A^{-1}(m h)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::MeshSpec;
use crate::par;
use crate::params::{InitialVelocity, PhysicalParams};
use crate::topography::{BottomSpec, TabulatedProfile};

/// Slope of the bottom used by the column-collapse preset when none is given.
pub const DEFAULT_INCLINE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Sigmoid step over `DamBreakParabola`; depth `eta - H`.
    DamBreakParabolic,
    /// Smoothed column on a uniform layer; depth `eta`, measured from the
    /// inclined bed and computed in the flat frame.
    ColumnCollapseInclined,
    /// Sigmoid step over any bottom, or a tabulated depth.
    Custom,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub length: f64,
    pub eta_l: f64,
    pub eta_r: f64,
    pub sigma: f64,
    pub dl: f64,
    pub bottom: BottomSpec,
    pub params: PhysicalParams,
    /// Tabulated initial depth for `Custom` problems.
    pub depth_table: Option<TabulatedProfile>,
}

impl ProblemSpec {
    /// Dam break over the parabolic bottom `d1 = 10`, `L = 100`.
    pub fn dam_break(gamma1: f64) -> Result<Self> {
        Ok(Self {
            kind: ProblemKind::DamBreakParabolic,
            length: 100.0,
            eta_l: 2.0,
            eta_r: 0.5,
            sigma: 20.0,
            dl: 0.0,
            bottom: BottomSpec::DamBreakParabola { d1: 10.0, length: 100.0 },
            params: PhysicalParams::new(gamma1)?,
            depth_table: None,
        })
    }

    /// Column of half-width `dl = 2` collapsing on a bed of slope `c1`.
    pub fn column_collapse(gamma1: f64, c1: f64, u0: f64) -> Result<Self> {
        Ok(Self {
            kind: ProblemKind::ColumnCollapseInclined,
            length: 100.0,
            eta_l: 2.0,
            eta_r: 0.5,
            sigma: 20.0,
            dl: 2.0,
            bottom: BottomSpec::Inclined { c1, c2: 0.0 },
            params: PhysicalParams::new(gamma1)?.with_velocity(InitialVelocity::Constant(u0)),
            depth_table: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("domain length must be positive, got {}", self.length)));
        }
        if self.depth_table.is_some() {
            return Ok(());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.kind == ProblemKind::DamBreakParabolic && !(self.eta_l > self.eta_r) {
            return Err(Error::Config("dam break needs eta_l > eta_r".into()));
        }
        if self.kind == ProblemKind::ColumnCollapseInclined
            && !matches!(self.bottom, BottomSpec::Inclined { .. } | BottomSpec::Flat(_))
        {
            return Err(Error::Config("column collapse needs an inclined or flat bottom".into()));
        }
        if !(self.dl >= 0.0) {
            return Err(Error::Config("dl must be non-negative".into()));
        }
        Ok(())
    }

    /// Bottom the scheme is solved over: the flat frame for the column collapse.
    pub fn solver_bottom(&self) -> BottomSpec {
        match (self.kind, &self.bottom) {
            (ProblemKind::ColumnCollapseInclined, _) => BottomSpec::Flat(0.0),
            (_, b) => b.clone(),
        }
    }

    /// Bed slope to map flat-frame results back to, if any.
    pub fn incline(&self) -> Option<f64> {
        match (self.kind, &self.bottom) {
            (ProblemKind::ColumnCollapseInclined, BottomSpec::Inclined { c1, .. }) => Some(*c1),
            _ => None,
        }
    }
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + z.exp())
}

/// Free-surface elevation `eta(xi)`.
pub fn surface(spec: &ProblemSpec, xi: f64) -> f64 {
    let (l2, d) = (0.5 * spec.length, spec.eta_l - spec.eta_r);
    match spec.kind {
        ProblemKind::ColumnCollapseInclined => {
            spec.eta_l - d * logistic(spec.sigma * (xi - l2 + spec.dl)) + d * logistic(spec.sigma * (xi - l2 - spec.dl))
        }
        _ => spec.eta_l - d * logistic(spec.sigma * (xi - l2)),
    }
}

/// Initial depth `rho0(xi)`.
pub fn initial_depth(spec: &ProblemSpec, xi: f64) -> Result<f64> {
    if !(xi >= 0.0 && xi <= spec.length) {
        return Err(Error::Range { x: xi, lo: 0.0, hi: spec.length });
    }
    let depth = match (&spec.depth_table, spec.kind) {
        (Some(t), _) => t.value(xi)?,
        (None, ProblemKind::ColumnCollapseInclined) => surface(spec, xi),
        (None, _) => surface(spec, xi) - spec.bottom.h_value(xi)?,
    };
    if !(depth > 0.0) {
        return Err(Error::Config(format!("initial depth {depth} is not positive at xi = {xi}")));
    }
    Ok(depth)
}

pub fn initial_velocity(spec: &ProblemSpec, s: f64) -> f64 {
    spec.params.u0.at(s)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb, fm) = (f(a)?, f(b)?, f(0.5 * (a + b))?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Cumulative mass on a panel grid, with exact evaluation in between.
#[derive(Debug, Clone)]
pub struct MassTable<'a> {
    spec: &'a ProblemSpec,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    tol: f64,
}

const PANEL_WIDTH: f64 = 0.5;

impl<'a> MassTable<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let n = (spec.length / PANEL_WIDTH).ceil().max(1.0) as usize;
        let edges: Vec<f64> = (0..=n).map(|i| spec.length * i as f64 / n as f64).collect();
        let f = |x: f64| initial_depth(spec, x);
        // rough total for the tolerance, then the panels
        let rough: f64 = adaptive_simpson(&f, 0.0, spec.length, 1e-6)?.abs().max(1e-300);
        let tol = 1e-12 * rough / n as f64;
        let pieces: Vec<Result<f64>> =
            par::map_jobs(&edges.windows(2).collect::<Vec<_>>(), |w| adaptive_simpson(&f, w[0], w[1], tol));
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for p in pieces {
            acc += p?;
            cumulative.push(acc);
        }
        Ok(Self { spec, edges, cumulative, tol })
    }

    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    fn panel_of(&self, x: f64) -> usize {
        self.edges.partition_point(|&e| e <= x).clamp(1, self.edges.len() - 1) - 1
    }

    /// `A(x)`.
    pub fn mass_at(&self, x: f64) -> Result<f64> {
        let i = self.panel_of(x);
        let f = |y: f64| initial_depth(self.spec, y);
        Ok(self.cumulative[i] + adaptive_simpson(&f, self.edges[i], x, self.tol)?)
    }

    /// `A^{-1}(target)`: panel bisection, then safeguarded Newton.
    pub fn invert(&self, target: f64) -> Result<f64> {
        let total = self.total();
        if !(target >= 0.0 && target <= total * (1.0 + 1e-14)) {
            return Err(Error::Domain(format!("mass {target} outside [0, {total}]")));
        }
        let i = self.cumulative.partition_point(|&c| c <= target).clamp(1, self.edges.len() - 1) - 1;
        let (mut lo, mut hi) = (self.edges[i], self.edges[i + 1]);
        let (c0, c1) = (self.cumulative[i], self.cumulative[i + 1]);
        let mut x = lo + (hi - lo) * ((target - c0) / (c1 - c0)).clamp(0.0, 1.0);
        for _ in 0..100 {
            let g = self.mass_at(x)? - target;
            if g.abs() <= 1e-13 * total.max(1.0) {
                return Ok(x);
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - g / initial_depth(self.spec, x)?;
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                return Ok(x);
            }
        }
        Ok(x)
    }
}

/// Total mass `A(L)`.
pub fn total_mass(spec: &ProblemSpec) -> Result<f64> {
    Ok(MassTable::new(spec)?.total())
}

/// Mesh with step `h` covering the mass range: `M = floor(A(L)/h) + 1`.
pub fn mesh_for(spec: &ProblemSpec, tau: f64, h: f64) -> Result<MeshSpec> {
    let total = total_mass(spec)?;
    if !(h > 0.0) {
        return Err(Error::InvalidMesh(format!("mass step must be positive, got {h}")));
    }
    let m_count = (total / h * (1.0 + 1e-14)).floor() as usize + 1;
    MeshSpec::new(tau, h, m_count)
}

/// Equal-mass initial positions `x0[m] = A^{-1}(s0 + m h)`.
pub fn build_mass_coordinates(spec: &ProblemSpec, mesh: &MeshSpec) -> Result<Vec<f64>> {
    let table = MassTable::new(spec)?;
    let top = mesh.s(mesh.m_count - 1);
    if mesh.s0 < 0.0 || top > table.total() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("mass range [{}, {top}] exceeds the total mass {}", mesh.s0, table.total())));
    }
    let total = table.total();
    let x0: Vec<f64> =
        par::map_range(0..mesh.m_count, |m| table.invert(mesh.s(m).min(total))).into_iter().collect::<Result<_>>()?;
    crate::state::check_monotone(&x0, 0)?;
    Ok(x0)
}
