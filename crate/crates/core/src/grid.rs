//! Uniform periodic grids, sampled fields and analytic initial profiles.
//!
//! The domain is the centered box `[-L/2, L/2)^dim`, sampled at cell centers.
//! Two-dimensional values are stored row-major: `values[i * n + j]` holds the
//! sample at `(x_i, x_j)`, so axis 0 indexes rows.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest supported number of points per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    extent: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, extent: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= {MIN_POINTS}, got {n}"
            )));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "extent must be finite and positive, got {extent}"
            )));
        }
        Ok(Grid { dim, n, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Side length `L` of the periodic box.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Volume of one cell, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of cells, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell-center coordinate along one axis. Exactly odd under `i -> n-1-i`.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - self.n as f64 / 2.0) * self.spacing()
    }

    /// Signed FFT index of position `j` in transform order: `0..=n/2` then `-n/2+1..0`.
    pub fn frequency_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumber `k_j = 2 pi j / L` at transform position `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.frequency_index(j) as f64 / self.extent
    }

    /// All wavenumbers along one axis, in transform order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Per-axis indices of flat cell index `idx`.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    /// Cell-center position of flat cell index `idx` (unused axes are zero).
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.unflatten(idx);
        match self.dim {
            1 => [self.coordinate(i), 0.0],
            _ => [self.coordinate(i), self.coordinate(j)],
        }
    }

    /// Flat indices of every cell touching the box boundary.
    pub fn edge_cells(&self) -> Vec<usize> {
        let n = self.n;
        match self.dim {
            1 => vec![0, n - 1],
            _ => (0..self.len())
                .filter(|&idx| {
                    let [i, j] = self.unflatten(idx);
                    i == 0 || j == 0 || i == n - 1 || j == n - 1
                })
                .collect(),
        }
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field values must be finite".into()));
        }
        Ok(Field { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x)` at every cell center; `x` has `dim` entries.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|idx| f(&grid.position(idx)[..dim]))
            .collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `a * self + b * other` on the same grid.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument(
                "fields live on different grids".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Field::new(self.grid, values)
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Largest edge-cell magnitude relative to the largest magnitude overall.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self
            .grid
            .edge_cells()
            .into_iter()
            .fold(0.0f64, |a, idx| a.max(self.values[idx].abs()));
        edge / peak
    }
}

/// Centered Gaussian of mass `mass` and standard deviation `sigma`.
pub fn gaussian(grid: &Grid, mass: f64, sigma: f64) -> Result<Field> {
    gaussian_at(grid, mass, sigma, &[0.0, 0.0][..grid.dim()])
}

/// Gaussian of mass `mass` centered at `center`.
///
/// `sigma` must not exceed `L/16`, which keeps the profile at the box edge
/// below `exp(-32)` of its peak.
pub fn gaussian_at(grid: &Grid, mass: f64, sigma: f64, center: &[f64]) -> Result<Field> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mass must be positive, got {mass}"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let limit = grid.extent() / 16.0;
    if sigma > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} too wide for box of side {} (limit L/16 = {limit})",
            grid.extent()
        )));
    }
    if center.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            actual: center.len(),
        });
    }
    let dim = grid.dim() as f64;
    let norm = mass * (2.0 * PI * sigma * sigma).powf(-dim / 2.0);
    let two_var = 2.0 * sigma * sigma;
    Field::from_fn(*grid, |x| {
        let r2: f64 = x
            .iter()
            .zip(center)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum();
        norm * (-r2 / two_var).exp()
    })
}
