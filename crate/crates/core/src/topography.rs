//! Bottom profiles and their discrete counterparts.
//!
//! Kernels subtract a discrete source `(H')^h` from the acceleration. For the
//! parabolic profiles the source is taken on the middle layer with the
//! cosh/cos-corrected factor; the matching potential on a layer pair
//! `(x, x_hat)` is the product form `(k/2) (x - c)(x_hat - c)`, which is what
//! makes the extra discrete conservation laws exact. Other profiles use
//! pointwise samples `H(x)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SchemeKind;

/// Continuous piecewise-cubic Hermite profile through `(x, H)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Samples", into = "Samples")]
pub struct TabulatedProfile {
    xs: Vec<f64>,
    hs: Vec<f64>,
    slopes: Vec<f64>,
}

/// Serialized form: the samples only, slopes are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct Samples {
    x: Vec<f64>,
    h: Vec<f64>,
}

impl TryFrom<Samples> for TabulatedProfile {
    type Error = Error;
    fn try_from(s: Samples) -> Result<Self> {
        Self::new(s.x, s.h)
    }
}

impl From<TabulatedProfile> for Samples {
    fn from(t: TabulatedProfile) -> Self {
        Samples { x: t.xs, h: t.hs }
    }
}

impl TabulatedProfile {
    pub fn new(xs: Vec<f64>, hs: Vec<f64>) -> Result<Self> {
        if xs.len() != hs.len() || xs.len() < 2 {
            return Err(Error::Config("tabulated profile needs at least two (x, H) pairs of equal length".into()));
        }
        if xs.iter().chain(&hs).any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated profile has non-finite entries".into()));
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("tabulated x must be strictly increasing (row {})", i + 1)));
        }
        let n = xs.len();
        let secant = |i: usize| (hs[i + 1] - hs[i]) / (xs[i + 1] - xs[i]);
        let slopes = (0..n)
            .map(|i| match i {
                0 => secant(0),
                i if i == n - 1 => secant(n - 2),
                // derivative of the parabola through three neighbours
                i => {
                    let (dl, dr) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                    (secant(i - 1) * dr + secant(i) * dl) / (dl + dr)
                }
            })
            .collect();
        Ok(Self { xs, hs, slopes })
    }

    /// Two-column text file `x H`, whitespace or comma separated, `#` comments.
    pub fn load(path: &Path) -> Result<Self> {
        let (xs, hs) = read_two_columns(path)?;
        Self::new(xs, hs)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn locate(&self, x: f64) -> Result<(usize, f64, f64)> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::Range { x, lo, hi });
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(self.xs.len() - 2),
        };
        let dx = self.xs[i + 1] - self.xs[i];
        Ok((i, (x - self.xs[i]) / dx, dx))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let (i, t, dx) = self.locate(x)?;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.hs[i] + h10 * dx * self.slopes[i] + h01 * self.hs[i + 1] + h11 * dx * self.slopes[i + 1])
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let (i, t, dx) = self.locate(x)?;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        Ok((d00 * self.hs[i] + d01 * self.hs[i + 1]) / dx + d10 * self.slopes[i] + d11 * self.slopes[i + 1])
    }
}

pub(crate) fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parse =
            |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)));
        if cols.len() != 2 {
            return Err(Error::Config(format!(
                "{}:{}: expected two columns, found {}",
                path.display(),
                lineno + 1,
                cols.len()
            )));
        }
        a.push(parse(cols[0])?);
        b.push(parse(cols[1])?);
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum BottomSpec {
    /// `H = c`
    Flat(f64),
    /// `H = c1 x + c2`
    Inclined {
        c1: f64,
        c2: f64,
    },
    /// `H = x^2 / 2`
    ParabolicPlus,
    /// `H = -x^2 / 2`
    ParabolicMinus,
    /// `H = d1 ((2/L)^2 (x - L/2)^2 - 1)`
    DamBreakParabola {
        d1: f64,
        length: f64,
    },
    Tabulated(TabulatedProfile),
}

/// `2 (cosh(k tau) - 1) / tau^2`, evaluated without cancellation.
pub fn cosh_factor(k: f64, tau: f64) -> f64 {
    let s = (0.5 * k * tau).sinh();
    4.0 * s * s / (tau * tau)
}

/// `2 (cos(tau) - 1) / tau^2`, evaluated without cancellation.
pub fn cos_factor(tau: f64) -> f64 {
    let s = (0.5 * tau).sin();
    -4.0 * s * s / (tau * tau)
}

impl BottomSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BottomSpec::Flat(_) => "flat",
            BottomSpec::Inclined { .. } => "inclined",
            BottomSpec::ParabolicPlus => "parabolic_plus",
            BottomSpec::ParabolicMinus => "parabolic_minus",
            BottomSpec::DamBreakParabola { .. } => "dam_break_parabola",
            BottomSpec::Tabulated(_) => "tabulated",
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, BottomSpec::Flat(_))
    }

    /// `H(x)`.
    pub fn h_value(&self, x: f64) -> Result<f64> {
        Ok(match self {
            BottomSpec::Flat(c) => *c,
            BottomSpec::Inclined { c1, c2 } => c1 * x + c2,
            BottomSpec::ParabolicPlus => 0.5 * x * x,
            BottomSpec::ParabolicMinus => -0.5 * x * x,
            BottomSpec::DamBreakParabola { d1, length } => {
                let y = 2.0 * (x - 0.5 * length) / length;
                d1 * (y * y - 1.0)
            }
            BottomSpec::Tabulated(t) => t.value(x)?,
        })
    }

    /// `H'(x)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(match self {
            BottomSpec::Flat(_) => 0.0,
            BottomSpec::Inclined { c1, .. } => *c1,
            BottomSpec::ParabolicPlus => x,
            BottomSpec::ParabolicMinus => -x,
            BottomSpec::DamBreakParabola { d1, length } => 8.0 * d1 / (length * length) * (x - 0.5 * length),
            BottomSpec::Tabulated(t) => t.derivative(x)?,
        })
    }

    /// Middle-layer product form `k (x - centre)`, if the profile has one:
    /// returns `(k, centre)`.
    fn product_form(&self, tau: f64) -> Option<(f64, f64)> {
        match self {
            BottomSpec::ParabolicPlus => Some((cosh_factor(1.0, tau), 0.0)),
            BottomSpec::ParabolicMinus => Some((cos_factor(tau), 0.0)),
            BottomSpec::DamBreakParabola { d1, length } => {
                let beta = 8.0 * d1 / (length * length);
                let k = if beta >= 0.0 {
                    cosh_factor(beta.sqrt(), tau)
                } else {
                    // a hump instead of a bowl: the cos correction applies
                    cos_factor((-beta).sqrt() * tau) * (-beta)
                };
                Some((k, 0.5 * length))
            }
            _ => None,
        }
    }

    /// Whether the discrete source is a function of the middle layer only.
    pub fn has_explicit_source(&self) -> bool {
        !matches!(self, BottomSpec::Tabulated(_))
    }

    /// Discrete `(H')^h` at a middle-layer position.
    ///
    /// Tabulated profiles have no middle-layer form; use
    /// [`BottomSpec::discrete_source`] for them.
    pub fn source_term(&self, scheme: SchemeKind, x: f64, tau: f64) -> Result<f64> {
        scheme.check_bottom(self)?;
        self.explicit_source(x, tau).ok_or_else(|| {
            Error::Config("tabulated bottoms use the divided-difference source, not a middle-layer one".into())
        })
    }

    fn explicit_source(&self, x: f64, tau: f64) -> Option<f64> {
        match self {
            BottomSpec::Flat(_) => Some(0.0),
            BottomSpec::Inclined { c1, .. } => Some(*c1),
            BottomSpec::Tabulated(_) => None,
            _ => self.product_form(tau).map(|(k, c)| k * (x - c)),
        }
    }

    /// Source used by the kernels at one node. For tabulated bottoms this is
    /// `(H(x_hat) - H(x_check)) / (x_hat - x_check)`, i.e.
    /// `D_{-tau}(H + H_hat) / (x_t + x_t_check)`; other bottoms use the
    /// middle-layer form. Scheme compatibility is not checked here.
    pub fn discrete_source(&self, x_check: f64, x: f64, x_hat: f64, tau: f64) -> Result<f64> {
        if let Some(s) = self.explicit_source(x, tau) {
            return Ok(s);
        }
        let BottomSpec::Tabulated(t) = self else { unreachable!() };
        let dx = x_hat - x_check;
        let scale = (x_hat - x).abs() + (x - x_check).abs();
        if dx == 0.0 || dx.abs() <= 1e-14 * scale {
            return Err(Error::Singular(format!("x_t + x_t_check vanishes at x = {x} with a non-constant bottom")));
        }
        Ok((t.value(x_hat)? - t.value(x_check)?) / dx)
    }

    /// Discrete potential `H^h` attached to the layer pair `(x, x_hat)`; its
    /// backward time difference times `-1` balances the source under the
    /// energy multiplier.
    pub fn potential_pair(&self, x: f64, x_hat: f64, tau: f64) -> Result<f64> {
        match self.product_form(tau) {
            Some((k, c)) => {
                let offset = match self {
                    BottomSpec::DamBreakParabola { d1, .. } => -d1,
                    _ => 0.0,
                };
                Ok(0.5 * k * (x - c) * (x_hat - c) + offset)
            }
            None => Ok(0.5 * (self.h_value(x)? + self.h_value(x_hat)?)),
        }
    }

    /// Extra conservation laws the discrete scheme carries over this bottom.
    pub fn supports_momentum(&self) -> bool {
        self.is_flat()
    }
}

/// Position in the inclined-bottom frame for a flat-frame position `x` on
/// the layer at `t` (`t_hat = t + tau`): `z = x + (c1/2) t t_hat`.
#[inline]
pub fn incline_to_flat(x: f64, t: f64, t_hat: f64, c1: f64) -> f64 {
    x + 0.5 * c1 * t * t_hat
}

/// Inverse of [`incline_to_flat`]: flat-frame position from `z`.
#[inline]
pub fn incline_to_flat_inverse(z: f64, t: f64, t_hat: f64, c1: f64) -> f64 {
    z - 0.5 * c1 * t * t_hat
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAM: BottomSpec = BottomSpec::DamBreakParabola { d1: 10.0, length: 100.0 };

    #[test]
    fn heights() {
        assert_eq!(BottomSpec::Flat(0.0).h_value(5.0).unwrap(), 0.0);
        assert!((DAM.h_value(50.0).unwrap() + 10.0).abs() < 1e-14);
        assert!(DAM.h_value(0.0).unwrap().abs() < 1e-14);
        assert_eq!(BottomSpec::Inclined { c1: 2.0, c2: 1.0 }.h_value(3.0).unwrap(), 7.0);
    }

    #[test]
    fn corrected_sources() {
        use SchemeKind::*;
        assert_eq!(BottomSpec::Flat(3.0).source_term(Conservative, 1.0, 0.01).unwrap(), 0.0);
        // 2(cosh(sqrt(0.008) * 0.01) - 1) / 1e-4 = 0.008 (1 + 0.008e-4 / 12 + ...)
        let k = cosh_factor(0.008f64.sqrt(), 0.01);
        assert!((k - 0.008).abs() < 1e-8);
        let s = DAM.source_term(Conservative, 60.0, 0.01).unwrap();
        assert!((s - 0.08).abs() < 1e-7);
        // 2(cos 0.01 - 1) / 1e-4 = -(1 - 1e-4/12 + 1e-8/360 - ...)
        let m = BottomSpec::ParabolicMinus.source_term(ConservativeParabolicMinus, 1.0, 0.01).unwrap();
        assert!((m + 0.999_991_666_694_444_4).abs() < 1e-12);
        assert!(BottomSpec::ParabolicPlus.source_term(Conservative, 1.0, 0.01).is_err());
    }

    #[test]
    fn corrected_sources_converge_at_second_order() {
        let bottoms = [
            (BottomSpec::ParabolicPlus, SchemeKind::ConservativeParabolicPlus),
            (BottomSpec::ParabolicMinus, SchemeKind::ConservativeParabolicMinus),
            (DAM, SchemeKind::Naive),
        ];
        for (b, kind) in bottoms {
            let x = 71.3;
            let err = |tau: f64| (b.source_term(kind, x, tau).unwrap() - b.derivative(x).unwrap()).abs();
            let (e1, e2) = (err(0.04), err(0.02));
            let order = (e1 / e2).log2();
            assert!((order - 2.0).abs() < 0.05, "{} order {order}", b.name());
        }
    }

    #[test]
    fn incline_map_round_trip() {
        assert_eq!(incline_to_flat(1.3, 0.7, 0.71, 0.0), 1.3);
        assert_eq!(incline_to_flat(1.0, 0.0, 0.01, 2.0), 1.0);
        for &(x, t, c1) in &[(1.0, 0.3, 2.0), (-4.5, 2.0, -0.7), (100.0, 4.99, 0.1)] {
            let z = incline_to_flat(x, t, t + 0.01, c1);
            assert!((incline_to_flat_inverse(z, t, t + 0.01, c1) - x).abs() < 1e-13);
        }
    }

    #[test]
    fn tabulated_profile() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let hs: Vec<f64> = xs.iter().map(|x| 0.1 * x * x).collect();
        let t = TabulatedProfile::new(xs, hs).unwrap();
        // exact at nodes, close in between, continuous derivative
        assert!((t.value(3.0).unwrap() - 0.9).abs() < 1e-14);
        assert!((t.value(3.25).unwrap() - 0.1 * 3.25 * 3.25).abs() < 1e-3);
        assert!((t.derivative(3.0 - 1e-9).unwrap() - t.derivative(3.0 + 1e-9).unwrap()).abs() < 1e-6);
        assert!(matches!(t.value(10.5), Err(Error::Range { .. })));
        assert!(TabulatedProfile::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn tabulated_source_rejects_stationary_node() {
        let t = BottomSpec::Tabulated(TabulatedProfile::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap());
        let r = t.discrete_source(0.5, 0.5, 0.5, 0.01);
        assert!(matches!(r, Err(Error::Singular(_))));
        let ok = t.discrete_source(0.4, 0.5, 0.6, 0.01).unwrap();
        let expect = (t.h_value(0.6).unwrap() - t.h_value(0.4).unwrap()) / 0.2;
        assert!((ok - expect).abs() < 1e-14);
    }

    #[test]
    fn load_two_column_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bed.txt");
        std::fs::write(&p, "# x H\n0 1\n1, 2\n\n2 1.5 # tail\n").unwrap();
        let t = TabulatedProfile::load(&p).unwrap();
        assert_eq!(t.range(), (0.0, 2.0));
        std::fs::write(&p, "0 1 2\n").unwrap();
        assert!(TabulatedProfile::load(&p).is_err());
    }
}
