//! Exponent algebra and empirical ratio checks for the Gagliardo-Nirenberg
//! and Hardy-Littlewood-Sobolev inequalities.
//!
//! Constants are never asserted. A ratio check only reports the empirical
//! ratio `LHS / RHS`, whose stability under dilation is what the exponent
//! relations guarantee.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{gaussian, Field, Grid};
use crate::kernel::riesz_convolve;
use crate::norms::{lp_norm, wmp_seminorm};
use crate::spectral::forward;

/// `|1/r|` below this is treated as `r = infinity`.
const INV_R_ZERO: f64 = 1e-12;

/// Spectral tail allowed in the outer half of the wavenumber range.
pub const RESOLUTION_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GnParams {
    pub dim: usize,
    pub m: usize,
    pub beta: usize,
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    /// `1/r`, exactly zero when `r` is infinite.
    pub inv_r: f64,
    pub r: f64,
}

impl GnParams {
    /// `beta - theta (m - N/p) + (1 - theta) N/q - N/r`; zero when the
    /// defining relation holds.
    pub fn residual(&self) -> f64 {
        let n = self.dim as f64;
        self.beta as f64 - self.theta * (self.m as f64 - n / self.p)
            + (1.0 - self.theta) * n / self.q
            - n * self.inv_r
    }
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 1.0 {
        return Err(Error::Inadmissible(format!(
            "{name} must lie in [1, inf], got {v}"
        )));
    }
    Ok(())
}

/// Solves `N/r = beta - theta (m - N/p) + (1 - theta) N/q` for `r`.
pub fn gn_solve(dim: usize, m: usize, beta: usize, p: f64, q: f64, theta: f64) -> Result<GnParams> {
    if dim == 0 {
        return Err(Error::Inadmissible("dimension must be positive".into()));
    }
    if m <= beta {
        return Err(Error::Inadmissible(format!(
            "need m > beta, got m = {m}, beta = {beta}"
        )));
    }
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let lower = beta as f64 / m as f64;
    if !(theta >= lower && theta < 1.0) {
        return Err(Error::Inadmissible(format!(
            "theta = {theta} outside [{lower}, 1)"
        )));
    }
    let n = dim as f64;
    let mut inv_r = (beta as f64 - theta * (m as f64 - n / p) + (1.0 - theta) * n / q) / n;
    if inv_r.abs() < INV_R_ZERO {
        inv_r = 0.0;
    }
    if inv_r < 0.0 {
        return Err(Error::Inadmissible(format!(
            "relation gives negative 1/r = {inv_r}"
        )));
    }
    if inv_r > 1.0 {
        return Err(Error::Inadmissible(format!(
            "relation gives r = {} < 1",
            inv_r.recip()
        )));
    }
    let r = if inv_r == 0.0 {
        f64::INFINITY
    } else {
        inv_r.recip()
    };
    let gap = m as f64 - n / p;
    if beta == 0 && r.is_infinite() && q.is_infinite() && gap >= 0.0 && gap.fract() == 0.0 {
        return Err(Error::Inadmissible(
            "excluded endpoint: beta = 0, r = q = inf, m - N/p a nonnegative integer".into(),
        ));
    }
    Ok(GnParams {
        dim,
        m,
        beta,
        p,
        q,
        theta,
        inv_r,
        r,
    })
}

/// Fails if the outer half of the spectrum carries more than
/// [`RESOLUTION_TAIL`] of the peak coefficient.
pub fn check_resolved(field: &Field) -> Result<()> {
    let spec = forward(field);
    let grid = field.grid();
    let quarter = (grid.n() / 4) as i64;
    let mut peak = 0.0f64;
    let mut tail = 0.0f64;
    for (idx, c) in spec.coeffs().iter().enumerate() {
        let [i, j] = grid.unflatten(idx);
        let outer = grid.frequency_index(i).abs() > quarter
            || (grid.dim() == 2 && grid.frequency_index(j).abs() > quarter);
        let a = c.norm();
        peak = peak.max(a);
        if outer {
            tail = tail.max(a);
        }
    }
    if peak == 0.0 {
        return Err(Error::Degenerate("zero field".into()));
    }
    if tail > RESOLUTION_TAIL * peak {
        return Err(Error::InvalidArgument(format!(
            "field under-resolved: spectral tail {:.3e} of peak",
            tail / peak
        )));
    }
    Ok(())
}

/// `|v|_{W^{beta,r}} / (|v|_{W^{m,p}}^theta |v|_q^(1-theta))`.
pub fn gn_ratio(field: &Field, params: &GnParams) -> Result<f64> {
    if field.grid().dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            actual: field.grid().dim(),
        });
    }
    check_resolved(field)?;
    let lhs = wmp_seminorm(field, params.beta, params.r)?;
    let top = wmp_seminorm(field, params.m, params.p)?;
    let low = lp_norm(field, params.q)?;
    if top == 0.0 || low == 0.0 {
        return Err(Error::Degenerate("vanishing right-hand side norm".into()));
    }
    Ok(lhs / (top.powf(params.theta) * low.powf(1.0 - params.theta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HlsParams {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
}

impl HlsParams {
    /// `1/p + lambda/N - 1/q - 1`.
    pub fn residual(&self) -> f64 {
        1.0 / self.p + self.lambda / self.dim as f64 - 1.0 / self.q - 1.0
    }
}

/// Solves `1/p + lambda/N = 1/q + 1` for `q`.
pub fn hls_solve(dim: usize, p: f64, lambda: f64) -> Result<HlsParams> {
    if dim == 0 {
        return Err(Error::Inadmissible("dimension must be positive".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Inadmissible(format!(
            "p must lie in (1, inf), got {p}"
        )));
    }
    let n = dim as f64;
    if !(lambda > 0.0 && lambda < n) {
        return Err(Error::Inadmissible(format!(
            "lambda must lie in (0, {dim}), got {lambda}"
        )));
    }
    let inv_q = 1.0 / p + lambda / n - 1.0;
    if !(inv_q > 0.0 && inv_q < 1.0) {
        return Err(Error::Inadmissible(format!(
            "relation gives 1/q = {inv_q}, outside (0, 1)"
        )));
    }
    Ok(HlsParams {
        dim,
        p,
        q: inv_q.recip(),
        lambda,
    })
}

/// `| |x|^-lambda * v |_q / |v|_p`.
pub fn hls_ratio(field: &Field, params: &HlsParams) -> Result<f64> {
    if field.grid().dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            actual: field.grid().dim(),
        });
    }
    check_resolved(field)?;
    let den = lp_norm(field, params.p)?;
    if den == 0.0 {
        return Err(Error::Degenerate("zero field".into()));
    }
    Ok(lp_norm(&riesz_convolve(field, params.lambda)?, params.q)? / den)
}

/// Positive sum of a few Gaussian bumps with random centers, widths and
/// weights; well resolved on the grids used by [`check_inequality`].
pub fn random_bump_field(grid: &Grid, rng: &mut impl Rng) -> Result<Field> {
    let dim = grid.dim();
    let spread = grid.extent() / 16.0;
    let bumps: Vec<([f64; 2], f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let c = [
                rng.random_range(-spread..spread),
                rng.random_range(-spread..spread),
            ];
            (c, rng.random_range(0.3..0.8), rng.random_range(0.2..1.0))
        })
        .collect();
    Field::from_fn(*grid, |x| {
        bumps
            .iter()
            .map(|(c, s, w)| {
                let r2: f64 = (0..dim).map(|a| (x[a] - c[a]).powi(2)).sum();
                w * (-r2 / (2.0 * s * s)).exp()
            })
            .sum()
    })
}

/// Which inequality a suite row checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum InequalityParams {
    GagliardoNirenberg(GnParams),
    HardyLittlewoodSobolev(HlsParams),
}

impl InequalityParams {
    pub fn dim(&self) -> usize {
        match self {
            InequalityParams::GagliardoNirenberg(p) => p.dim,
            InequalityParams::HardyLittlewoodSobolev(p) => p.dim,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            InequalityParams::GagliardoNirenberg(p) => p.residual(),
            InequalityParams::HardyLittlewoodSobolev(p) => p.residual(),
        }
    }

    pub fn ratio(&self, field: &Field) -> Result<f64> {
        match self {
            InequalityParams::GagliardoNirenberg(p) => gn_ratio(field, p),
            InequalityParams::HardyLittlewoodSobolev(p) => hls_ratio(field, p),
        }
    }

    /// Allowed relative spread of the ratio over a dilation family.
    pub fn dilation_tolerance(&self) -> f64 {
        match self {
            InequalityParams::GagliardoNirenberg(_) => 0.02,
            InequalityParams::HardyLittlewoodSobolev(_) => 0.03,
        }
    }
}

/// Empirical ratio statistics for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub params: InequalityParams,
    pub relation_residual: f64,
    pub dilation_min: f64,
    pub dilation_max: f64,
    /// `max/min - 1` over the dilation family.
    pub dilation_drift: f64,
    pub dilation_tolerance: f64,
    pub ensemble_size: usize,
    pub ensemble_max: f64,
    pub pass: bool,
}

/// Grid each suite dimension runs on.
pub fn suite_grid(dim: usize) -> Result<Grid> {
    match dim {
        1 => Grid::new(1, 4096, 64.0),
        _ => Grid::new(2, 1024, 32.0),
    }
}

/// Gaussian widths of the dilation family.
pub const DILATION_SIGMAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

/// Dilation-family and random-ensemble statistics of one inequality.
pub fn check_inequality(
    params: InequalityParams,
    ensemble_size: usize,
    seed: u64,
) -> Result<InequalityReport> {
    let grid = suite_grid(params.dim())?;
    let ratios = DILATION_SIGMAS
        .iter()
        .map(|&s| params.ratio(&gaussian(&grid, 1.0, s)?))
        .collect::<Result<Vec<_>>>()?;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ensemble_max = 0.0f64;
    for _ in 0..ensemble_size {
        let f = random_bump_field(&grid, &mut rng)?;
        ensemble_max = ensemble_max.max(params.ratio(&f)?);
    }
    let residual = params.residual();
    let drift = hi / lo - 1.0;
    let tol = params.dilation_tolerance();
    Ok(InequalityReport {
        params,
        relation_residual: residual,
        dilation_min: lo,
        dilation_max: hi,
        dilation_drift: drift,
        dilation_tolerance: tol,
        ensemble_size,
        ensemble_max,
        pass: residual.abs() <= 1e-12 && drift <= tol && ensemble_max.is_finite() && lo > 0.0,
    })
}

/// The exponent combinations the upper and lower Sobolev estimates rely on.
pub fn standard_parameters() -> Result<Vec<InequalityParams>> {
    use InequalityParams::{GagliardoNirenberg as Gn, HardyLittlewoodSobolev as Hls};
    Ok(vec![
        // |v|_2 <= C |v'|_2^(1/3) |v|_1^(2/3)
        Gn(gn_solve(1, 1, 0, 2.0, 1.0, 1.0 / 3.0)?),
        // |v|_2 <= C |v|_{H^2}^(1/5) |v|_1^(4/5)
        Gn(gn_solve(1, 2, 0, 2.0, 1.0, 0.2)?),
        // |v|_{W^{1,inf}} <= C |v|_1^(1/5) |v|_{H^2}^(4/5)
        Gn(gn_solve(1, 2, 1, 2.0, 1.0, 0.8)?),
        // |v|_2 <= C |v|_{H^1}^(1/2) |v|_1^(1/2) in the plane
        Gn(gn_solve(2, 1, 0, 2.0, 1.0, 0.5)?),
        Hls(hls_solve(1, 4.0 / 3.0, 0.5)?),
        Hls(hls_solve(2, 4.0 / 3.0, 1.0)?),
    ])
}
