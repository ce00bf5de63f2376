use crate::error::{Error, Result};

/// Three consecutive time layers of particle positions.
///
/// Positions are the only primary unknowns; velocity and depth are always
/// derived (`u = x_t`, `rho[m] = h / (x[m+1] - x[m])`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateWindow {
    pub x_prev: Vec<f64>,
    pub x_curr: Vec<f64>,
    pub x_next: Vec<f64>,
    /// Time index of the middle layer.
    pub n_curr: usize,
}

impl StateWindow {
    pub fn new(x_prev: Vec<f64>, x_curr: Vec<f64>, x_next: Vec<f64>, n_curr: usize) -> Result<Self> {
        if x_prev.len() != x_curr.len() || x_curr.len() != x_next.len() {
            return Err(Error::InvalidMesh(format!(
                "layer lengths differ: {} / {} / {}",
                x_prev.len(),
                x_curr.len(),
                x_next.len()
            )));
        }
        Ok(Self { x_prev, x_curr, x_next, n_curr })
    }

    pub fn len(&self) -> usize {
        self.x_curr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_curr.is_empty()
    }

    /// Reports the first non-increasing pair on any layer.
    pub fn check_monotone(&self) -> Result<()> {
        let n = self.n_curr;
        check_monotone(&self.x_prev, n.saturating_sub(1))?;
        check_monotone(&self.x_curr, n)?;
        check_monotone(&self.x_next, n + 1)
    }

    /// Slide forward one layer: `(x_curr, x_next, new)`.
    pub fn advanced(&self, new_layer: Vec<f64>) -> Result<Self> {
        Self::new(self.x_curr.clone(), self.x_next.clone(), new_layer, self.n_curr + 1)
    }

    /// Apply `f(layer_offset, x)` to every position; offset is -1, 0, +1.
    pub fn map_positions(&self, f: impl Fn(i32, f64) -> f64) -> Self {
        Self {
            x_prev: self.x_prev.iter().map(|&x| f(-1, x)).collect(),
            x_curr: self.x_curr.iter().map(|&x| f(0, x)).collect(),
            x_next: self.x_next.iter().map(|&x| f(1, x)).collect(),
            n_curr: self.n_curr,
        }
    }
}

pub fn check_monotone(x: &[f64], layer: usize) -> Result<()> {
    for (m, pair) in x.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if !(gap > 0.0) {
            return Err(Error::Monotonicity { layer, node: m, gap });
        }
    }
    Ok(())
}

/// Depth on each cell of a layer, `h / (x[m+1] - x[m])`.
pub fn depth(x: &[f64], h: f64) -> Vec<f64> {
    x.windows(2).map(|p| h / (p[1] - p[0])).collect()
}

/// Forward-difference velocity `(x_next - x) / tau` per node.
pub fn velocity(x: &[f64], x_next: &[f64], tau: f64) -> Vec<f64> {
    x.iter().zip(x_next).map(|(a, b)| (b - a) / tau).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotonicity_reports_location() {
        let w = StateWindow::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.9], vec![0.0, 1.0, 2.0], 4).unwrap();
        match w.check_monotone() {
            Err(Error::Monotonicity { layer, node, .. }) => {
                assert_eq!((layer, node), (4, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn derived_fields() {
        let x = [0.0, 0.5, 1.0];
        assert_eq!(depth(&x, 1.0), vec![2.0, 2.0]);
        assert_eq!(velocity(&x, &[0.1, 0.6, 1.1], 0.1).len(), 3);
        assert!(StateWindow::new(vec![0.0], vec![0.0, 1.0], vec![0.0], 0).is_err());
    }
}
