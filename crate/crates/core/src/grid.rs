use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Uniform sampling of a closed time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        let g = TimeGrid {
            t_min,
            t_max,
            n_points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be at least 2, got {}",
                self.n_points
            )));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite()) || self.t_max <= self.t_min {
            return Err(Error::InvalidGrid(format!(
                "need finite t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    /// Lag grid `[0, (n-1) dt]` with the same spacing, used for kernels.
    pub fn lags(dt: f64, n_points: usize) -> Result<Self> {
        TimeGrid::new(0.0, dt * (n_points as f64 - 1.0), n_points)
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points as f64 - 1.0)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_min + self.dt() * i as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }

    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> Vec<C64> {
        (0..self.n_points).map(|i| f(self.time(i))).collect()
    }

    /// Trapezoid weights (`dt/2` at the ends, `dt` inside).
    pub fn trapz_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.n_points];
        w[0] = 0.5 * dt;
        w[self.n_points - 1] = 0.5 * dt;
        w
    }

    pub fn trapz(&self, y: &[C64]) -> C64 {
        assert_eq!(y.len(), self.n_points);
        let dt = self.dt();
        let inner: C64 = y.iter().sum();
        (inner - 0.5 * (y[0] + y[self.n_points - 1])) * dt
    }

    pub fn trapz_real(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.n_points);
        let inner: f64 = y.iter().sum();
        (inner - 0.5 * (y[0] + y[self.n_points - 1])) * self.dt()
    }

    /// `<f, g> = int conj(f) g dt` by the trapezoid rule.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        assert_eq!(f.len(), self.n_points);
        assert_eq!(g.len(), self.n_points);
        let n = self.n_points;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += f[i].conj() * g[i];
        }
        acc -= 0.5 * (f[0].conj() * g[0] + f[n - 1].conj() * g[n - 1]);
        acc * self.dt()
    }

    pub fn same_spacing(&self, dt: f64) -> bool {
        (self.dt() - dt).abs() <= 1e-12 * dt.abs().max(self.dt().abs())
    }

    pub fn check_same(&self, other: &TimeGrid) -> Result<()> {
        let tol = 1e-12 * self.dt();
        if self.n_points != other.n_points
            || (self.t_min - other.t_min).abs() > tol
            || (self.t_max - other.t_max).abs() > tol
        {
            return Err(Error::GridMismatch(format!(
                "[{}, {}]x{} vs [{}, {}]x{}",
                self.t_min, self.t_max, self.n_points, other.t_min, other.t_max, other.n_points
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_endpoints() {
        let g = TimeGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.dt(), 0.5);
        assert_eq!(g.times(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn trapz_integrates_linear_exactly() {
        let g = TimeGrid::new(0.0, 2.0, 11).unwrap();
        let y = g.sample(|t| C64::new(3.0 * t + 1.0, 0.0));
        assert!((g.trapz(&y).re - 8.0).abs() < 1e-12);
    }
}
