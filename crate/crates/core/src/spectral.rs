//! Discrete Fourier transforms with the continuum-normalized convention
//! `u_hat_j = h^dim * sum_x u(x) exp(-i k_j . x)`, with `x` measured from the
//! first cell. With this scaling the discrete Parseval identity reads
//! `h^dim * sum |u|^2 = L^-dim * sum |u_hat|^2`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Highest derivative order accepted by [`spectral_derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 8;

// Row counts at or above this run row transforms on the rayon pool.
const PARALLEL_ROWS: usize = 256;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transform_rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    if data.len() / n >= PARALLEL_ROWS {
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    } else {
        let mut scratch = vec![Complex64::default(); scratch_len];
        for row in data.chunks_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + BLOCK).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Unnormalized in-place DFT over every axis of `grid`.
pub(crate) fn dft_in_place(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    debug_assert_eq!(data.len(), grid.len());
    let n = grid.n();
    let fft = plan(n, inverse);
    transform_rows(data, n, &fft);
    if grid.dim() == 2 {
        transpose_square(data, n);
        transform_rows(data, n, &fft);
        transpose_square(data, n);
    }
}

/// Complex buffer holding the continuum-normalized transform of real samples.
pub(crate) fn forward_values(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let scale = grid.cell_volume();
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_in_place(grid, &mut data, false);
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Real part of the inverse of a continuum-normalized spectrum. Consumes `data`.
pub(crate) fn inverse_values(grid: &Grid, mut data: Vec<Complex64>) -> Vec<f64> {
    dft_in_place(grid, &mut data, true);
    let scale = 1.0 / grid.extent().powi(grid.dim() as i32);
    data.into_iter().map(|c| c.re * scale).collect()
}

/// Flat index of the wavevector `-k` for flat index `idx`.
fn mirror_index(grid: &Grid, idx: usize) -> usize {
    let n = grid.n();
    let [i, j] = grid.unflatten(idx);
    match grid.dim() {
        1 => (n - i) % n,
        _ => ((n - i) % n) * n + (n - j) % n,
    }
}

/// Transforms of two real sample sets from one complex transform of
/// `a + i b`.
pub(crate) fn forward_pair(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let scale = 0.5 * grid.cell_volume();
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    dft_in_place(grid, &mut z, false);
    let mut fa = Vec::with_capacity(z.len());
    let mut fb = Vec::with_capacity(z.len());
    for (idx, &zk) in z.iter().enumerate() {
        let zm = z[mirror_index(grid, idx)].conj();
        fa.push((zk + zm) * scale);
        // (zk - zm) / (2i)
        let d = zk - zm;
        fb.push(Complex64::new(d.im, -d.re) * scale);
    }
    (fa, fb)
}

/// Inverses of two Hermitian spectra from one complex transform of
/// `a + i b`.
pub(crate) fn inverse_pair(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x + Complex64::new(-y.im, y.re))
        .collect();
    dft_in_place(grid, &mut z, true);
    let scale = 1.0 / grid.extent().powi(grid.dim() as i32);
    z.into_iter().map(|c| (c.re * scale, c.im * scale)).unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "spectrum has {} coefficients, grid needs {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Per-axis wavenumber vector of flat coefficient index `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.grid.unflatten(idx);
        match self.grid.dim() {
            1 => [self.grid.wavenumber(i), 0.0],
            _ => [self.grid.wavenumber(i), self.grid.wavenumber(j)],
        }
    }

    /// Squared magnitude of the wavevector at flat index `idx`.
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let [a, b] = self.wavevector(idx);
        a * a + b * b
    }
}

pub fn forward(field: &Field) -> Spectrum {
    Spectrum {
        grid: *field.grid(),
        coeffs: forward_values(field.grid(), field.values()),
    }
}

/// Real part of the inverse transform.
pub fn inverse(spectrum: &Spectrum) -> Field {
    let values = inverse_values(&spectrum.grid, spectrum.coeffs.clone());
    Field::from_vec_unchecked(spectrum.grid, values)
}

/// Spectral evaluation of `d^i1/dx1^i1 d^i2/dx2^i2 u`.
///
/// The Nyquist mode of every axis differentiated an odd number of times is
/// zeroed.
pub fn spectral_derivative(field: &Field, multiindex: &[usize]) -> Result<Field> {
    let grid = *field.grid();
    if multiindex.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            actual: multiindex.len(),
        });
    }
    let order: usize = multiindex.iter().sum();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    if order == 0 {
        return Ok(field.clone());
    }
    let mut data = forward_values(&grid, field.values());
    for (idx, c) in data.iter_mut().enumerate() {
        let axes = grid.unflatten(idx);
        let mut factor = Complex64::new(1.0, 0.0);
        for (axis, &power) in multiindex.iter().enumerate() {
            if power == 0 {
                continue;
            }
            let j = axes[axis];
            if power % 2 == 1 && grid.is_nyquist(j) {
                factor = Complex64::new(0.0, 0.0);
                break;
            }
            factor *= Complex64::new(0.0, grid.wavenumber(j)).powu(power as u32);
        }
        *c *= factor;
    }
    Ok(Field::from_vec_unchecked(grid, inverse_values(&grid, data)))
}
