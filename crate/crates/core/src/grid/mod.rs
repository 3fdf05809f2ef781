//! Smooth nonuniform grids.
//!
//! A grid with `N` steps is the image `t_n = Phi(n / N)` of a uniform grid
//! under a strictly increasing deformation map `Phi: [0, 1] -> [0, 1]`. Step
//! sizes, ratios and increments are always taken from the realized times;
//! the midpoint model `phi(tau_{n+1/2}) / N` is available separately through
//! [`model_steps`].

mod controller;
mod map;

use alloc::vec;
use alloc::vec::Vec;

pub use controller::{controller_grid, ControllerConfig};
pub use map::{regularity, Deformation, FnMap, GridMap, Regularity};

use crate::error::{Error, Result};

/// A realized grid `0 = t_0 < t_1 < ... < t_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    t: Vec<f64>,
    h: Vec<f64>,
    r: Vec<f64>,
    v: Vec<f64>,
}

impl Grid {
    /// `t_n = Phi(n / N)` with the end points pinned to 0 and 1.
    pub fn from_map<M: Deformation + ?Sized>(map: &M, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::GridTooShort { n, min: 1 });
        }
        let inv = 1.0 / n as f64;
        let mut t: Vec<f64> = (0..=n).map(|i| map.map(i as f64 * inv)).collect();
        t[0] = 0.0;
        t[n] = 1.0;
        Self::from_normalized_times(t)
    }

    /// Any strictly increasing sequence of times, rescaled affinely onto `[0, 1]`.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::GridTooShort { n: 0, min: 1 });
        }
        let n = times.len() - 1;
        let t0 = times[0];
        let span = times[n] - t0;
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::NonMonotoneGrid {
                index: 0,
                step: span,
            });
        }
        let mut t: Vec<f64> = times.iter().map(|&x| (x - t0) / span).collect();
        t[0] = 0.0;
        t[n] = 1.0;
        Self::from_normalized_times(t)
    }

    /// Grid from a step sequence, rescaled to total length 1.
    ///
    /// Steps are kept as given (up to the common scale) rather than
    /// recomputed from cumulative times, which keeps tiny steps accurate.
    pub fn from_steps(steps: &[f64]) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::GridTooShort { n: 0, min: 1 });
        }
        if let Some(index) = steps.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::NonMonotoneGrid {
                index,
                step: steps[index],
            });
        }
        let total: f64 = steps.iter().sum();
        let h: Vec<f64> = steps.iter().map(|s| s / total).collect();
        if let Some(index) = h.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::NonMonotoneGrid {
                index,
                step: h[index],
            });
        }
        let n = h.len();
        let mut t = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        t.push(0.0);
        for s in &h[..n - 1] {
            acc += s;
            t.push(acc);
        }
        t.push(1.0);
        let (r, v) = ratios_of(&h);
        Ok(Self { t, h, r, v })
    }

    /// Constant steps `1/N`; every ratio is exactly 1.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_steps(&vec![1.0; n])
    }

    /// Grid with every step ratio equal to `ratio` (a geometric step sequence).
    pub fn geometric(ratio: f64, n: usize) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::InvalidArgument(
                "geometric ratio must be positive and finite",
            ));
        }
        if n == 0 {
            return Err(Error::GridTooShort { n, min: 1 });
        }
        // Largest step scaled to 1 so nothing overflows.
        let ln_r = num_traits::Float::ln(ratio);
        let top = if ratio >= 1.0 { (n - 1) as f64 } else { 0.0 };
        let steps: Vec<f64> = (0..n)
            .map(|i| num_traits::Float::exp((i as f64 - top) * ln_r))
            .collect();
        let mut grid = Self::from_steps(&steps)?;
        // The ratios are known exactly; do not let the normalization perturb them.
        for (r, v) in grid.r.iter_mut().zip(grid.v.iter_mut()) {
            *r = ratio;
            *v = ratio - 1.0;
        }
        Ok(grid)
    }

    fn from_normalized_times(t: Vec<f64>) -> Result<Self> {
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(index) = h.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::NonMonotoneGrid {
                index,
                step: h[index],
            });
        }
        let (r, v) = ratios_of(&h);
        Ok(Self { t, h, r, v })
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// `t_0..t_N`.
    pub fn times(&self) -> &[f64] {
        &self.t
    }

    /// `h_n = t_{n+1} - t_n`, `n = 0..N-1`.
    pub fn steps(&self) -> &[f64] {
        &self.h
    }

    /// `r[n] = h_{n+1} / h_n`, `n = 0..N-2`.
    pub fn ratios(&self) -> &[f64] {
        &self.r
    }

    /// `v[n] = r[n] - 1`, computed as `(h_{n+1} - h_n) / h_n`.
    pub fn increments(&self) -> &[f64] {
        &self.v
    }

    /// `||V||_inf = max |v_n|`.
    pub fn max_abs_increment(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |r_n / r_{n-1} - 1|`, evaluated as `h_{n+1} h_{n-1} / h_n^2 - 1`.
    pub fn ratio_of_ratios_deviation(&self) -> f64 {
        self.h
            .windows(3)
            .map(|w| (w[2] * w[0] / (w[1] * w[1]) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn ratios_of(h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let r = h.windows(2).map(|w| w[1] / w[0]).collect();
    let v = h.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    (r, v)
}

/// `build_grid(map, N)`: see [`Grid::from_map`].
pub fn build_grid<M: Deformation + ?Sized>(map: &M, n: usize) -> Result<Grid> {
    Grid::from_map(map, n)
}

/// Midpoint step model `phi(tau_{n+1/2}) / N`.
pub fn model_steps<M: Deformation + ?Sized>(map: &M, n: usize) -> Vec<f64> {
    let inv = 1.0 / n as f64;
    (0..n)
        .map(|i| map.density((i as f64 + 0.5) * inv) * inv)
        .collect()
}

/// A one-parameter family of grids indexed by the step count.
pub trait GridFamily {
    fn grid(&self, n: usize) -> Result<Grid>;
}

impl GridFamily for GridMap {
    fn grid(&self, n: usize) -> Result<Grid> {
        if *self == GridMap::Identity {
            return Grid::uniform(n);
        }
        Grid::from_map(self, n)
    }
}

/// Grids with a constant step ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometric {
    pub ratio: f64,
}

impl GridFamily for Geometric {
    fn grid(&self, n: usize) -> Result<Grid> {
        Grid::geometric(self.ratio, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_grid() {
        let g = Grid::uniform(4).unwrap();
        assert_eq!(g.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.ratios().iter().all(|&r| r == 1.0));
        assert!(g.increments().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exp_ramp_is_geometric() {
        let c = 2.0;
        let g = Grid::from_map(&GridMap::ExpRamp { c }, 100).unwrap();
        let expected = (c / 100.0f64).exp();
        for &r in g.ratios() {
            assert!((r - expected).abs() < 1e-10, "{r}");
        }
        for &v in g.increments() {
            assert!((v - 0.02).abs() < 1.0 / (100.0f64 * 100.0) * 4.0);
        }
    }

    #[test]
    fn non_monotone_map_is_rejected() {
        let map = FnMap::new(|tau: f64| tau * tau * 2.0 - tau, |tau: f64| 4.0 * tau - 1.0);
        assert!(matches!(
            Grid::from_map(&map, 10),
            Err(Error::NonMonotoneGrid { .. })
        ));
    }

    #[test]
    fn geometric_grid_keeps_tiny_steps() {
        let g = Grid::geometric(0.5, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert!(g.steps()[199] > 0.0);
        assert!((g.steps()[199] / g.steps()[198] - 0.5).abs() < 1e-14);
        assert!(g.ratios().iter().all(|&r| r == 0.5));
        assert_eq!(g.times()[200], 1.0);
    }

    #[test]
    fn model_steps_track_realized_steps() {
        let map = GridMap::ExpRamp { c: 1.0 };
        let g = Grid::from_map(&map, 200).unwrap();
        let m = model_steps(&map, 200);
        for (a, b) in g.steps().iter().zip(&m) {
            assert!((a - b).abs() / a < 1e-4);
        }
    }

    #[test]
    fn empty_inputs() {
        assert!(Grid::uniform(0).is_err());
        assert!(Grid::from_steps(&[]).is_err());
        assert!(Grid::from_steps(&[1.0, 0.0]).is_err());
        assert!(Grid::from_times(&[0.0]).is_err());
        assert!(Grid::geometric(-1.0, 3).is_err());
    }
}
