use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topography::BottomSpec;

/// Initial velocity as a function of the mass coordinate.
#[derive(Clone, Default)]
pub enum InitialVelocity {
    #[default]
    Rest,
    Constant(f64),
    Profile(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl InitialVelocity {
    pub fn profile(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InitialVelocity::Profile(Arc::new(f))
    }

    pub fn at(&self, s: f64) -> f64 {
        match self {
            InitialVelocity::Rest => 0.0,
            InitialVelocity::Constant(u) => *u,
            InitialVelocity::Profile(f) => f(s),
        }
    }
}

impl fmt::Debug for InitialVelocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialVelocity::Rest => write!(f, "Rest"),
            InitialVelocity::Constant(u) => write!(f, "Constant({u})"),
            InitialVelocity::Profile(_) => write!(f, "Profile(..)"),
        }
    }
}

/// Normalised physical parameters. `gamma1 = 0` gives the classical
/// shallow water equations.
#[derive(Debug, Clone, Default)]
pub struct PhysicalParams {
    pub gamma1: f64,
    pub u0: InitialVelocity,
}

impl PhysicalParams {
    pub fn new(gamma1: f64) -> Result<Self> {
        if !gamma1.is_finite() {
            return Err(Error::Config(format!("gamma1 must be finite, got {gamma1}")));
        }
        Ok(Self { gamma1, u0: InitialVelocity::Rest })
    }

    pub fn with_velocity(mut self, u0: InitialVelocity) -> Self {
        self.u0 = u0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Log-flux scheme with the discrete energy law, any bottom.
    Conservative,
    /// Rational `gamma1 / x_s` flux; no discrete energy law.
    Naive,
    /// Conservative scheme over `H = x^2/2` with the cosh-corrected source.
    ConservativeParabolicPlus,
    /// Conservative scheme over `H = -x^2/2` with the cos-corrected source.
    ConservativeParabolicMinus,
    /// Two-layer form in mass Lagrangian variables (diagnostics only).
    MassLagrangianTwoLayer,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Conservative => "conservative",
            SchemeKind::Naive => "naive",
            SchemeKind::ConservativeParabolicPlus => "conservative_parabolic_plus",
            SchemeKind::ConservativeParabolicMinus => "conservative_parabolic_minus",
            SchemeKind::MassLagrangianTwoLayer => "mass_lagrangian_two_layer",
        }
    }

    /// Whether the gamma1 flux is the logarithmic (energy-preserving) one.
    pub fn has_log_flux(&self) -> bool {
        !matches!(self, SchemeKind::Naive)
    }

    pub fn check_bottom(&self, bottom: &BottomSpec) -> Result<()> {
        let ok = match self {
            SchemeKind::ConservativeParabolicPlus => matches!(bottom, BottomSpec::ParabolicPlus),
            SchemeKind::ConservativeParabolicMinus => matches!(bottom, BottomSpec::ParabolicMinus),
            _ => !matches!(bottom, BottomSpec::ParabolicPlus | BottomSpec::ParabolicMinus),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("scheme {} cannot be used with bottom {}", self.name(), bottom.name())))
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_profiles() {
        assert_eq!(InitialVelocity::Rest.at(3.0), 0.0);
        assert_eq!(InitialVelocity::Constant(-1.0).at(3.0), -1.0);
        assert_eq!(InitialVelocity::profile(f64::sin).at(0.0), 0.0);
    }

    #[test]
    fn parabolic_schemes_need_matching_bottom() {
        use SchemeKind::*;
        assert!(ConservativeParabolicPlus.check_bottom(&BottomSpec::ParabolicPlus).is_ok());
        assert!(ConservativeParabolicPlus.check_bottom(&BottomSpec::ParabolicMinus).is_err());
        assert!(ConservativeParabolicMinus.check_bottom(&BottomSpec::Flat(0.0)).is_err());
        assert!(Conservative.check_bottom(&BottomSpec::ParabolicPlus).is_err());
        assert!(Naive.check_bottom(&BottomSpec::Flat(1.0)).is_ok());
        assert!(PhysicalParams::new(f64::INFINITY).is_err());
    }
}
