//! TOML run configuration.
//!
//! ```toml
//! scheme = "conservative"
//!
//! [problem]
//! kind = "dam_break_parabolic"
//! gamma1 = 10.0
//!
//! [mesh]
//! tau = 0.01
//! h = 0.1
//! t_end = 1.0
//!
//! [solver]
//! rel_tol = 1e-12
//!
//! [[outputs]]
//! path = "dam_break.csv"
//! times = [0.2, 1.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{ProblemKind, ProblemSpec, DEFAULT_INCLINE};
use crate::params::{InitialVelocity, SchemeKind};
use crate::solver::SolverConfig;
use crate::topography::{BottomSpec, TabulatedProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    #[serde(default = "default_gamma1")]
    pub gamma1: f64,
    /// Constant initial velocity.
    #[serde(default)]
    pub u0: f64,
    pub length: Option<f64>,
    pub eta_l: Option<f64>,
    pub eta_r: Option<f64>,
    pub sigma: Option<f64>,
    pub dl: Option<f64>,
    /// Bed slope for the column collapse.
    pub c1: Option<f64>,
    /// Overrides the preset bottom.
    pub bottom: Option<BottomSpec>,
    /// Two-column `x H` file for a tabulated bottom.
    pub bottom_file: Option<PathBuf>,
    /// Two-column `x depth` file for a tabulated initial depth.
    pub depth_file: Option<PathBuf>,
}

fn default_gamma1() -> f64 {
    10.0
}

impl ProblemConfig {
    pub fn preset(kind: ProblemKind) -> Self {
        Self {
            kind,
            gamma1: default_gamma1(),
            u0: 0.0,
            length: None,
            eta_l: None,
            eta_r: None,
            sigma: None,
            dl: None,
            c1: None,
            bottom: None,
            bottom_file: None,
            depth_file: None,
        }
    }

    /// Problem spec with relative paths resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<ProblemSpec> {
        let mut spec = match self.kind {
            ProblemKind::DamBreakParabolic => ProblemSpec::dam_break(self.gamma1)?,
            ProblemKind::ColumnCollapseInclined => {
                ProblemSpec::column_collapse(self.gamma1, self.c1.unwrap_or(DEFAULT_INCLINE), self.u0)?
            }
            ProblemKind::Custom => {
                let mut s = ProblemSpec::dam_break(self.gamma1)?;
                s.kind = ProblemKind::Custom;
                s.bottom = BottomSpec::Flat(0.0);
                s
            }
        };
        if self.c1.is_some() && self.kind != ProblemKind::ColumnCollapseInclined {
            return Err(Error::Config("c1 only applies to column_collapse_inclined".into()));
        }
        spec.params = spec.params.with_velocity(InitialVelocity::Constant(self.u0));
        if let Some(v) = self.length {
            spec.length = v;
            if let BottomSpec::DamBreakParabola { length, .. } = &mut spec.bottom {
                *length = v;
            }
        }
        for (slot, v) in [
            (&mut spec.eta_l, self.eta_l),
            (&mut spec.eta_r, self.eta_r),
            (&mut spec.sigma, self.sigma),
            (&mut spec.dl, self.dl),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        match (&self.bottom, &self.bottom_file) {
            (Some(_), Some(_)) => return Err(Error::Config("give either bottom or bottom_file, not both".into())),
            (Some(b), None) => spec.bottom = b.clone(),
            (None, Some(p)) => spec.bottom = BottomSpec::Tabulated(TabulatedProfile::load(&base.join(p))?),
            (None, None) => {}
        }
        if let Some(p) = &self.depth_file {
            if self.kind != ProblemKind::Custom {
                return Err(Error::Config("depth_file needs kind = \"custom\"".into()));
            }
            spec.depth_table = Some(TabulatedProfile::load(&base.join(p))?);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub tau: f64,
    pub h: f64,
    pub t_end: f64,
}

impl MeshConfig {
    /// Number of steps to reach `t_end`; it must be a multiple of `tau`.
    pub fn steps(&self) -> Result<usize> {
        time_index(self.t_end, self.tau)
    }
}

/// Snapshot file: rows for every `stride`-th node at each of `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    pub times: Vec<f64>,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub gamma1: Vec<f64>,
    #[serde(default = "default_sweep_time")]
    pub t_end: f64,
    pub path: Option<PathBuf>,
}

fn default_sweep_time() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeKind,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: Vec<OutputConfig>,
    /// Per-step energy and residual maxima.
    pub series: Option<PathBuf>,
    /// Where the last computed layers go if a step fails.
    pub failure_dump: Option<PathBuf>,
    pub sweep: Option<SweepConfig>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_scheme() -> SchemeKind {
    SchemeKind::Conservative
}

impl RunConfig {
    /// Paper parameters for the dam break, `h = 0.1`, `tau = 0.01`, to `t = 1`.
    pub fn dam_break() -> Self {
        Self::preset(ProblemKind::DamBreakParabolic, 1.0)
    }

    /// Paper parameters for the column collapse to `t = 5`.
    pub fn column_collapse() -> Self {
        Self::preset(ProblemKind::ColumnCollapseInclined, 5.0)
    }

    fn preset(kind: ProblemKind, t_end: f64) -> Self {
        Self {
            problem: ProblemConfig::preset(kind),
            scheme: SchemeKind::Conservative,
            mesh: MeshConfig { tau: 0.01, h: 0.1, t_end },
            solver: SolverConfig::default(),
            outputs: Vec::new(),
            series: None,
            failure_dump: None,
            sweep: None,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// Checks everything that can be checked before stepping.
    pub fn validate(&self) -> Result<ProblemSpec> {
        let steps = self.mesh.steps()?;
        if steps == 0 {
            return Err(Error::Config("t_end must be positive".into()));
        }
        self.solver.validate()?;
        for out in &self.outputs {
            if out.stride == 0 {
                return Err(Error::Config("output stride must be at least 1".into()));
            }
            for &t in &out.times {
                let n = time_index(t, self.mesh.tau)?;
                if n > steps {
                    return Err(Error::Config(format!("output time {t} is past t_end = {}", self.mesh.t_end)));
                }
            }
        }
        if let Some(sw) = &self.sweep {
            time_index(sw.t_end, self.mesh.tau)?;
            if let Some(g) = sw.gamma1.iter().find(|g| !g.is_finite()) {
                return Err(Error::Config(format!("sweep value {g} is not finite")));
            }
        }
        let spec = self.problem.build(&self.base_dir)?;
        self.scheme.check_bottom(&spec.solver_bottom())?;
        if self.scheme == SchemeKind::MassLagrangianTwoLayer {
            return Err(Error::Config("the mass Lagrangian form is diagnostics only".into()));
        }
        Ok(spec)
    }
}

/// `t / tau` as an integer, if `t` is a non-negative multiple of `tau`.
pub fn time_index(t: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let k = t / tau;
    if !(t >= 0.0 && k.is_finite()) || (k - k.round()).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::Config(format!("time {t} is not a non-negative multiple of tau = {tau}")));
    }
    Ok(k.round() as usize)
}
