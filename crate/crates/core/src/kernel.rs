//! Nonlocal velocity `grad K * u` for the pointy potential `K(x) = -|x|`, and
//! Riesz potentials `|x|^-lambda * u`.
//!
//! Kernel gradients are taken as zero at the origin. In 2D the kernel is
//! sampled at minimum-image displacements on the torus; a displacement of
//! exactly half the box along an axis has no sign, so the corresponding
//! gradient component is zero there too.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::spectral::{forward_values, inverse_values};

/// Largest grid accepted by the O(n^2) direct-quadrature routines.
pub const DIRECT_CELL_LIMIT: usize = 4096;

/// Samples of the velocity `grad K * u`, one vector per spatial component.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VelocityField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    /// Largest component magnitude anywhere on the grid.
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    pub(crate) fn from_parts(grid: Grid, components: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        VelocityField { grid, components }
    }

    pub(crate) fn component_mut(&mut self, axis: usize) -> &mut Vec<f64> {
        &mut self.components[axis]
    }

    pub fn zeros(grid: Grid) -> Self {
        VelocityField {
            grid,
            components: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }
}

fn require_dim(field: &Field, dim: usize) -> Result<()> {
    if field.grid().dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: field.grid().dim(),
        });
    }
    Ok(())
}

/// Left partial sums `h * (u_0 + ... + u_i)` and right partial sums
/// `h * (u_i + ... + u_{n-1})`, each accumulated from its own end so the pair
/// is exactly mirrored for mirrored data.
pub(crate) fn partial_masses_into(u: &[f64], h: f64, left: &mut Vec<f64>, right: &mut Vec<f64>) {
    let n = u.len();
    left.resize(n, 0.0);
    right.resize(n, 0.0);
    let mut acc = 0.0;
    for (l, &x) in left.iter_mut().zip(u) {
        acc += x;
        *l = acc * h;
    }
    acc = 0.0;
    for (r, &x) in right.iter_mut().zip(u).rev() {
        acc += x;
        *r = acc * h;
    }
}

/// Cell-center velocity `right[i + 1] - left[i - 1]` from partial masses.
pub(crate) fn cell_velocity_into(left: &[f64], right: &[f64], v: &mut Vec<f64>) {
    let n = left.len();
    v.resize(n, 0.0);
    for (i, vi) in v.iter_mut().enumerate() {
        let l = if i > 0 { left[i - 1] } else { 0.0 };
        let r = if i + 1 < n { right[i + 1] } else { 0.0 };
        *vi = r - l;
    }
}

/// Exact line velocity `(K' * u)(x) = M - 2 F(x)` at cell centers, with `F`
/// the cumulative mass evaluated at the cell midpoint.
///
/// Evaluated as (mass to the right) minus (mass to the left), which equals
/// `M - 2F` and keeps `v` exactly odd for even data.
pub fn velocity_1d(field: &Field) -> Result<VelocityField> {
    require_dim(field, 1)?;
    let (mut left, mut right, mut v) = (Vec::new(), Vec::new(), Vec::new());
    partial_masses_into(
        field.values(),
        field.grid().spacing(),
        &mut left,
        &mut right,
    );
    cell_velocity_into(&left, &right, &mut v);
    Ok(VelocityField {
        grid: *field.grid(),
        components: vec![v],
    })
}

/// Signed minimum-image offset of wrapped index difference `d`, or `None`
/// at exactly half the box.
fn signed_offset(d: usize, n: usize) -> Option<i64> {
    let half = n / 2;
    match d.cmp(&half) {
        std::cmp::Ordering::Less => Some(d as i64),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(d as i64 - n as i64),
    }
}

/// `grad K(x) = -x/|x|` at the displacement with wrapped per-axis index
/// offsets `offs`; zero at the origin, and zero for any axis at half-box.
fn pointy_gradient(grid: &Grid, offs: [usize; 2]) -> [f64; 2] {
    let n = grid.n();
    let h = grid.spacing();
    let mut x = [0.0; 2];
    let mut defined = [true; 2];
    for axis in 0..grid.dim() {
        match signed_offset(offs[axis], n) {
            Some(s) => x[axis] = s as f64 * h,
            None => {
                x[axis] = grid.extent() / 2.0;
                defined[axis] = false;
            }
        }
    }
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r == 0.0 {
        return [0.0; 2];
    }
    let mut g = [0.0; 2];
    for axis in 0..grid.dim() {
        if defined[axis] {
            g[axis] = -x[axis] / r;
        }
    }
    g
}

/// Which velocity kernel the 2D solver convolves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `grad K` for `K(x) = -|x|`.
    Pointy,
    /// `(-sgn(x1) / L, 0)`: the 1D line kernel averaged over `x2`. Used to
    /// compare 2D runs on `x2`-independent data against the 1D solver.
    Line,
}

/// Precomputed transforms of the sampled velocity kernel.
#[derive(Debug, Clone)]
pub struct VelocityKernel {
    grid: Grid,
    spectra: Vec<Vec<Complex64>>,
}

impl VelocityKernel {
    pub fn new(grid: &Grid, kind: KernelKind) -> Self {
        let dim = grid.dim();
        let mut samples = vec![vec![0.0; grid.len()]; dim];
        for idx in 0..grid.len() {
            let offs = grid.unflatten(idx);
            let g = match kind {
                KernelKind::Pointy => pointy_gradient(grid, offs),
                KernelKind::Line => {
                    let s = match signed_offset(offs[0], grid.n()) {
                        Some(s) => -(s.signum() as f64) / grid.extent(),
                        None => 0.0,
                    };
                    [s, 0.0]
                }
            };
            for (comp, gv) in samples.iter_mut().zip(g) {
                comp[idx] = gv;
            }
        }
        let spectra = samples.iter().map(|s| forward_values(grid, s)).collect();
        VelocityKernel {
            grid: *grid,
            spectra,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Transforms of each velocity component given the transform of `u`.
    pub(crate) fn apply_spectral(&self, u_hat: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.spectra
            .iter()
            .map(|g| g.iter().zip(u_hat).map(|(a, b)| a * b).collect())
            .collect()
    }

    /// Velocity field of `u` by FFT convolution.
    pub fn velocity(&self, field: &Field) -> Result<VelocityField> {
        if field.grid() != &self.grid {
            return Err(Error::InvalidArgument(
                "field grid does not match kernel grid".into(),
            ));
        }
        let u_hat = forward_values(&self.grid, field.values());
        let components = self
            .apply_spectral(&u_hat)
            .into_iter()
            .map(|c| inverse_values(&self.grid, c))
            .collect();
        Ok(VelocityField {
            grid: self.grid,
            components,
        })
    }
}

/// Periodized FFT convolution of `u` with the sampled `grad K` on a 2D grid.
pub fn velocity_2d_spectral(field: &Field) -> Result<VelocityField> {
    require_dim(field, 2)?;
    VelocityKernel::new(field.grid(), KernelKind::Pointy).velocity(field)
}

/// Direct O(cells^2) periodized quadrature of `grad K * u`, sharing only the
/// origin and half-box conventions with the spectral path.
pub fn velocity_direct_oracle(field: &Field) -> Result<VelocityField> {
    let grid = *field.grid();
    let cells = grid.len();
    if cells > DIRECT_CELL_LIMIT {
        return Err(Error::GridTooLarge {
            cells,
            limit: DIRECT_CELL_LIMIT,
        });
    }
    let n = grid.n();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let u = field.values();
    let mut comps = vec![vec![0.0; cells]; dim];
    for x in 0..cells {
        let xi = grid.unflatten(x);
        let mut acc = [0.0; 2];
        for (y, &uy) in u.iter().enumerate() {
            if uy == 0.0 {
                continue;
            }
            let yi = grid.unflatten(y);
            let offs = [(xi[0] + n - yi[0]) % n, (xi[1] + n - yi[1]) % n];
            let g = pointy_gradient(&grid, offs);
            acc[0] += g[0] * uy;
            acc[1] += g[1] * uy;
        }
        for (comp, a) in comps.iter_mut().zip(acc) {
            comp[x] = a * vol;
        }
    }
    Ok(VelocityField {
        grid,
        components: comps,
    })
}

fn check_lambda(dim: usize, lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < dim as f64) {
        return Err(Error::InvalidArgument(format!(
            "Riesz exponent must lie in (0, {dim}), got {lambda}"
        )));
    }
    Ok(())
}

/// Cell average of `|x|^-lambda` over the origin cell `[-h/2, h/2]^dim`.
///
/// In 1D this is `(h/2)^-lambda / (1 - lambda)`. In 2D the square splits into
/// eight triangles, leaving `int_0^{pi/4} sec^{2-lambda}` for Simpson's rule.
pub fn riesz_origin_average(grid: &Grid, lambda: f64) -> Result<f64> {
    check_lambda(grid.dim(), lambda)?;
    let a = grid.spacing() / 2.0;
    if grid.dim() == 1 {
        return Ok(a.powf(-lambda) / (1.0 - lambda));
    }
    const PANELS: usize = 512;
    let step = FRAC_PI_4 / PANELS as f64;
    let f = |theta: f64| theta.cos().powf(lambda - 2.0);
    let mut sum = f(0.0) + f(FRAC_PI_4);
    for k in 1..PANELS {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(k as f64 * step);
    }
    let angular = sum * step / 3.0;
    let integral = 8.0 / (2.0 - lambda) * a.powf(2.0 - lambda) * angular;
    Ok(integral / (4.0 * a * a))
}

/// Sampled Riesz kernel `|x|^-lambda` at minimum-image offsets, indexed like a
/// field; the origin cell holds [`riesz_origin_average`].
pub fn riesz_kernel_samples(grid: &Grid, lambda: f64) -> Result<Vec<f64>> {
    let origin = riesz_origin_average(grid, lambda)?;
    let n = grid.n();
    let h = grid.spacing();
    let dist = |d: usize| -> f64 {
        match signed_offset(d, n) {
            Some(s) => s as f64 * h,
            None => grid.extent() / 2.0,
        }
    };
    Ok((0..grid.len())
        .map(|idx| {
            let [i, j] = grid.unflatten(idx);
            let (x, y) = (dist(i), if grid.dim() == 2 { dist(j) } else { 0.0 });
            let r = (x * x + y * y).sqrt();
            if r == 0.0 {
                origin
            } else {
                r.powf(-lambda)
            }
        })
        .collect())
}

/// Periodized FFT convolution `|x|^-lambda * u`.
pub fn riesz_convolve(field: &Field, lambda: f64) -> Result<Field> {
    let grid = *field.grid();
    let kernel = riesz_kernel_samples(&grid, lambda)?;
    let k_hat = forward_values(&grid, &kernel);
    let u_hat = forward_values(&grid, field.values());
    let prod = k_hat.iter().zip(&u_hat).map(|(a, b)| a * b).collect();
    Field::new(grid, inverse_values(&grid, prod))
}
