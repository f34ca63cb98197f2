//! Planar scheme: Heun's method on the advective term evaluated
//! pseudo-spectrally, with exact integrating-factor diffusion.
//!
//! The state is kept as a 2/3-truncated spectrum. The advective term of the
//! zero mode vanishes identically, so the mass coefficient is only ever
//! multiplied by `exp(0) = 1`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::{Field, Grid};
use crate::kernel::{KernelKind, VelocityField, VelocityKernel};
use crate::spectral::{forward_pair, forward_values, inverse_pair, inverse_values};

#[derive(Debug, Clone)]
pub(crate) struct Spectral2d {
    grid: Grid,
    kernel: Arc<VelocityKernel>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    keep: Vec<bool>,
    u_hat: Vec<Complex64>,
    decay: Option<(f64, f64, Vec<f64>)>,
}

struct Stage {
    u: Vec<f64>,
    v: Vec<Vec<f64>>,
}

impl Spectral2d {
    pub fn new(field: &Field, kind: KernelKind) -> Self {
        let grid = *field.grid();
        let n = grid.n();
        let cutoff = (n / 3) as i64;
        let mut kx = Vec::with_capacity(grid.len());
        let mut ky = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let [i, j] = grid.unflatten(idx);
            kx.push(grid.wavenumber(i));
            ky.push(grid.wavenumber(j));
            keep.push(
                grid.frequency_index(i).abs() <= cutoff && grid.frequency_index(j).abs() <= cutoff,
            );
        }
        let mut u_hat = forward_values(&grid, field.values());
        for (c, &k) in u_hat.iter_mut().zip(&keep) {
            if !k {
                *c = Complex64::default();
            }
        }
        Spectral2d {
            grid,
            kernel: Arc::new(VelocityKernel::new(&grid, kind)),
            kx,
            ky,
            keep,
            u_hat,
            decay: None,
        }
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.u_hat[0]
    }

    fn stage(&self, u_hat: &[Complex64]) -> Stage {
        let mut vel = self.kernel.apply_spectral(u_hat).into_iter();
        let (v1_hat, v2_hat) = (
            vel.next().expect("x velocity"),
            vel.next().expect("y velocity"),
        );
        let (u, v1) = inverse_pair(&self.grid, u_hat, &v1_hat);
        let v2 = inverse_values(&self.grid, v2_hat);
        Stage { u, v: vec![v1, v2] }
    }

    /// Transform of `-div(u v)`, truncated.
    fn advective(&self, u: &[f64], v: &[Vec<f64>]) -> Vec<Complex64> {
        let prod =
            |axis: usize| -> Vec<f64> { u.iter().zip(&v[axis]).map(|(a, b)| a * b).collect() };
        let (fx, fy) = forward_pair(&self.grid, &prod(0), &prod(1));
        (0..self.grid.len())
            .map(|idx| {
                if idx == 0 || !self.keep[idx] {
                    return Complex64::default();
                }
                let div = fx[idx] * self.kx[idx] + fy[idx] * self.ky[idx];
                // -i k . F
                Complex64::new(div.im, -div.re)
            })
            .collect()
    }

    fn decay_factors(&mut self, eps: f64, dt: f64) -> &[f64] {
        let stale = !matches!(&self.decay, Some((e, d, _)) if *e == eps && *d == dt);
        if stale {
            let e = self
                .kx
                .iter()
                .zip(&self.ky)
                .map(|(a, b)| (-eps * (a * a + b * b) * dt).exp())
                .collect();
            self.decay = Some((eps, dt, e));
        }
        &self.decay.as_ref().expect("decay factors just computed").2
    }

    /// Advances by `dt` given the physical field and velocity of the current
    /// spectrum; returns those of the new spectrum.
    pub fn advance(
        &mut self,
        field: &Field,
        velocity: &VelocityField,
        eps: f64,
        dt: f64,
    ) -> (Field, VelocityField) {
        let n0 = self.advective(field.values(), velocity.components());
        let e = self.decay_factors(eps, dt).to_vec();
        let predictor: Vec<Complex64> = self
            .u_hat
            .iter()
            .zip(&n0)
            .zip(&e)
            .map(|((u, a), f)| (u + a * dt) * *f)
            .collect();
        let mid = self.stage(&predictor);
        let n1 = self.advective(&mid.u, &mid.v);
        let half = 0.5 * dt;
        for idx in 0..self.u_hat.len() {
            self.u_hat[idx] = if self.keep[idx] {
                (self.u_hat[idx] + n0[idx] * half) * e[idx] + n1[idx] * half
            } else {
                Complex64::default()
            };
        }
        self.current()
    }

    /// Physical field and velocity of the current spectrum.
    pub fn current(&self) -> (Field, VelocityField) {
        let Stage { u, v } = self.stage(&self.u_hat);
        (
            Field::from_vec_unchecked(self.grid, u),
            VelocityField::from_parts(self.grid, v),
        )
    }
}
