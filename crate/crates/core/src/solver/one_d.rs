//! Line scheme: explicit donor-cell advection with the exact prefix-sum
//! velocity, then backward-Euler diffusion on the periodic lattice.

use crate::kernel::{cell_velocity_into, partial_masses_into};

/// Values below this fraction of the peak are set to zero after each step.
/// Exponentially small tails otherwise decay into subnormal numbers, whose
/// arithmetic is very slow.
pub(crate) const FLUSH_FRACTION: f64 = 1e-200;

/// Sweep intermediates smaller than this are set to zero, for the same
/// reason: the recurrences decay geometrically away from the data.
const SWEEP_FLUSH: f64 = 1e-280;

#[inline]
fn flushed(x: f64) -> f64 {
    if x.abs() < SWEEP_FLUSH {
        0.0
    } else {
        x
    }
}

/// Factorization of the periodic system `(1 + 2r) x_i - r x_{i-1} - r x_{i+1}`
/// for Sherman-Morrison: Thomas coefficients of the corner-modified
/// tridiagonal part and the solution for the corner vector.
#[derive(Debug, Clone, Default)]
struct Factor {
    r: f64,
    n: usize,
    cp: Vec<f64>,
    inv_m: Vec<f64>,
    z: Vec<f64>,
    corner: Vec<f64>,
    denom: f64,
}

impl Factor {
    fn off(&self) -> f64 {
        -self.r
    }

    fn gamma(&self) -> f64 {
        -(1.0 + 2.0 * self.r)
    }

    fn build(&mut self, r: f64, n: usize) {
        if self.n == n && self.r == r {
            return;
        }
        let off = -r;
        let diag = 1.0 + 2.0 * r;
        let gamma = -diag;
        let first = diag - gamma;
        let last = diag - off * off / gamma;
        self.r = r;
        self.n = n;
        self.cp.resize(n, 0.0);
        self.inv_m.resize(n, 0.0);
        self.inv_m[0] = 1.0 / first;
        self.cp[0] = off * self.inv_m[0];
        let mut i = 1;
        while i + 1 < n {
            let im = 1.0 / (diag - off * self.cp[i - 1]);
            self.inv_m[i] = im;
            self.cp[i] = off * im;
            if (im - self.inv_m[i - 1]).abs() <= 4.0 * f64::EPSILON * im {
                // the recurrence has reached its fixed point to rounding
                let c = self.cp[i];
                self.inv_m[i + 1..n - 1].fill(im);
                self.cp[i + 1..n - 1].fill(c);
                i = n - 1;
                break;
            }
            i += 1;
        }
        let im = 1.0 / (last - off * self.cp[i - 1]);
        self.inv_m[n - 1] = im;
        self.cp[n - 1] = off * im;
        let mut corner = std::mem::take(&mut self.corner);
        corner.clear();
        corner.resize(n, 0.0);
        corner[0] = gamma;
        corner[n - 1] = off;
        let mut z = std::mem::take(&mut self.z);
        self.thomas(&corner, &mut z);
        self.corner = corner;
        self.denom = 1.0 + z[0] + off * z[n - 1] / gamma;
        self.z = z;
    }

    fn thomas(&self, rhs: &[f64], x: &mut Vec<f64>) {
        let n = rhs.len();
        let off = self.off();
        x.resize(n, 0.0);
        x[0] = rhs[0] * self.inv_m[0];
        for i in 1..n {
            x[i] = flushed((rhs[i] - off * x[i - 1]) * self.inv_m[i]);
        }
        for i in (0..n - 1).rev() {
            x[i] = flushed(x[i] - self.cp[i] * x[i + 1]);
        }
    }

    /// Solves the periodic system for `rhs` into `x`.
    fn solve(&self, rhs: &[f64], x: &mut Vec<f64>) {
        self.thomas(rhs, x);
        let n = rhs.len();
        let (off, gamma) = (self.off(), self.gamma());
        let fact = (x[0] + off * x[n - 1] / gamma) / self.denom;
        for (xi, zi) in x.iter_mut().zip(&self.z) {
            *xi -= fact * zi;
        }
    }
}

/// Scratch buffers for the line scheme, reused across steps.
#[derive(Debug, Clone, Default)]
pub(crate) struct LineStepper {
    left: Vec<f64>,
    right: Vec<f64>,
    star: Vec<f64>,
    factor: Factor,
}

impl LineStepper {
    /// Donor-cell update `u - dt/h (F_{i+1/2} - F_{i-1/2})` into `star`. The
    /// two faces on the box edge carry no flux. Face `i + 1/2` has velocity
    /// `right[i + 1] - left[i]`.
    fn advect(&mut self, u: &[f64], h: f64, dt: f64) {
        let n = u.len();
        partial_masses_into(u, h, &mut self.left, &mut self.right);
        self.star.resize(n, 0.0);
        let c = dt / h;
        let mut flux_left = 0.0;
        for i in 0..n {
            let flux_right = if i + 1 < n {
                let v = self.right[i + 1] - self.left[i];
                if v > 0.0 {
                    v * u[i]
                } else {
                    v * u[i + 1]
                }
            } else {
                0.0
            };
            self.star[i] = u[i] - c * (flux_right - flux_left);
            flux_left = flux_right;
        }
    }

    /// One IMEX step of `u_t + (u v)_x = eps u_xx` with the velocity frozen
    /// at the start of the step. Writes the new solution to `out` and its
    /// cell-center velocity to `v`.
    pub(crate) fn advance(
        &mut self,
        u: &[f64],
        h: f64,
        eps: f64,
        dt: f64,
        out: &mut Vec<f64>,
        v: &mut Vec<f64>,
    ) {
        self.advect(u, h, dt);
        let r = eps * dt / (h * h);
        if r == 0.0 {
            out.clear();
            out.extend_from_slice(&self.star);
        } else {
            self.factor.build(r, u.len());
            self.factor.solve(&self.star, out);
        }
        let floor = FLUSH_FRACTION * out.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for x in out.iter_mut() {
            if x.abs() < floor {
                *x = 0.0;
            }
        }
        partial_masses_into(out, h, &mut self.left, &mut self.right);
        cell_velocity_into(&self.left, &self.right, v);
    }
}

/// Solves `(1 + 2r) x_i - r x_{i-1} - r x_{i+1} = rhs_i` with periodic
/// wrap-around.
#[cfg(test)]
pub(crate) fn periodic_implicit_diffusion(rhs: &[f64], r: f64) -> Vec<f64> {
    let mut f = Factor::default();
    f.build(r, rhs.len());
    let mut x = Vec::new();
    f.solve(rhs, &mut x);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_solve_satisfies_system() {
        let n = 37;
        let r = 3.7;
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 + 0.5).collect();
        let x = periodic_implicit_diffusion(&rhs, r);
        for i in 0..n {
            let lhs = (1.0 + 2.0 * r) * x[i] - r * x[(i + n - 1) % n] - r * x[(i + 1) % n];
            assert!((lhs - rhs[i]).abs() < 1e-12 * rhs[i].abs().max(1.0));
        }
        let s0: f64 = rhs.iter().sum();
        let s1: f64 = x.iter().sum();
        assert!((s0 - s1).abs() < 1e-12 * s0);
        assert!(x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn advection_of_constant_conserves_mass() {
        let n = 64;
        let h = 0.25;
        let u = vec![1.0 / 16.0; n];
        let mut s = LineStepper::default();
        s.advect(&u, h, 0.1);
        let before: f64 = u.iter().sum::<f64>() * h;
        let after: f64 = s.star.iter().sum::<f64>() * h;
        assert!((before - after).abs() < 1e-13);
        assert!(s.star.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn refactors_only_on_new_ratio() {
        let mut f = Factor::default();
        f.build(0.5, 16);
        let z = f.z.clone();
        f.build(0.5, 16);
        assert_eq!(f.z, z);
        f.build(0.25, 16);
        assert_ne!(f.z, z);
    }
}
