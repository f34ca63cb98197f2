//! Time integration.
//!
//! On the line the velocity is exact and the scheme is a first-order IMEX
//! splitting: donor-cell advection with the velocity frozen over the step,
//! followed by backward-Euler diffusion. In the plane the advective term is
//! evaluated pseudo-spectrally with 2/3 truncation, stepped with Heun's method
//! and an exact integrating factor for diffusion.
//!
//! Neither scheme limits the step through diffusion; only the CFL bound
//! `dt <= h / max|v|` applies.

mod one_d;
mod two_d;

use num_complex::Complex64;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::kernel::{velocity_1d, KernelKind, VelocityField};
use crate::norms::{mass, ObservableKey, ObservableSeries};

use one_d::LineStepper;
use two_d::Spectral2d;

/// Velocities below this are treated as zero when sizing steps.
const TINY_VELOCITY: f64 = 1e-300;

/// Relative slack on the CFL bound before a step is rejected.
const STEP_SLACK: f64 = 1e-12;

/// Current solution, time, diffusivity and the velocity of the current
/// solution.
#[derive(Debug, Clone)]
pub struct SolverState {
    field: Field,
    t: f64,
    eps: f64,
    velocity: VelocityField,
    steps: u64,
    spectral: Option<Spectral2d>,
    line: LineStepper,
    scratch: Vec<f64>,
    velocity_scratch: Vec<f64>,
    positivity_tol: f64,
}

impl SolverState {
    /// Starts at `t = 0` with the pointy kernel.
    pub fn new(field: Field, eps: f64) -> Result<Self> {
        Self::with_kernel(field, eps, KernelKind::Pointy)
    }

    /// Starts at `t = 0`. The kernel choice only matters in 2D.
    pub fn with_kernel(field: Field, eps: f64, kind: KernelKind) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be > 0, got {eps}"
            )));
        }
        let (field, velocity, spectral) = match field.grid().dim() {
            1 => {
                let v = velocity_1d(&field)?;
                (field, v, None)
            }
            _ => {
                let s = Spectral2d::new(&field, kind);
                let (f, v) = s.current();
                (f, v, Some(s))
            }
        };
        Ok(SolverState {
            field,
            t: 0.0,
            eps,
            velocity,
            steps: 0,
            spectral,
            line: LineStepper::default(),
            scratch: Vec::new(),
            velocity_scratch: Vec::new(),
            positivity_tol: 1e-3,
        })
    }

    /// Relative negativity tolerated in 2D before a step fails.
    pub fn set_positivity_tol(&mut self, tol: f64) {
        self.positivity_tol = tol;
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn velocity(&self) -> &VelocityField {
        &self.velocity
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Mean-mode coefficient of the 2D spectral state; `None` in 1D.
    pub fn zero_mode(&self) -> Option<Complex64> {
        self.spectral.as_ref().map(Spectral2d::zero_mode)
    }

    /// Conserved mass: the zero mode in 2D, the quadrature sum in 1D.
    pub fn mass(&self) -> f64 {
        match self.zero_mode() {
            Some(c) => c.re,
            None => mass(&self.field),
        }
    }

    fn step_limit(&self) -> f64 {
        self.field.grid().spacing() / self.velocity.max_abs().max(TINY_VELOCITY)
    }

    /// Advances by `dt` in place.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let limit = self.step_limit();
        if !(dt.is_finite() && dt >= 0.0) || dt > limit * (1.0 + STEP_SLACK) {
            return Err(Error::StepTooLarge { dt, limit });
        }
        if dt == 0.0 {
            return Ok(());
        }
        let t = self.t + dt;
        match &mut self.spectral {
            None => {
                let grid = *self.field.grid();
                let mut u = std::mem::take(&mut self.scratch);
                let mut v = std::mem::take(&mut self.velocity_scratch);
                self.line.advance(
                    self.field.values(),
                    grid.spacing(),
                    self.eps,
                    dt,
                    &mut u,
                    &mut v,
                );
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(t));
                }
                let old = std::mem::replace(&mut self.field, Field::from_vec_unchecked(grid, u));
                self.scratch = old.into_values();
                std::mem::swap(self.velocity.component_mut(0), &mut v);
                self.velocity_scratch = v;
            }
            Some(s) => {
                let (f, v) = s.advance(&self.field, &self.velocity, self.eps, dt);
                if f.values().iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(t));
                }
                let (min, max) = (f.min(), f.max());
                if min < -self.positivity_tol * max {
                    return Err(Error::Positivity { t, min, max });
                }
                self.field = f;
                self.velocity = v;
            }
        }
        self.t = t;
        self.steps += 1;
        Ok(())
    }
}

/// `cfl * h / max|v|`, capped at `cap`.
pub fn stable_dt(state: &SolverState, cfl: f64, cap: f64) -> f64 {
    (cfl * state.step_limit()).min(cap)
}

/// One line step from `state`.
pub fn step_1d(state: &SolverState, dt: f64) -> Result<SolverState> {
    if state.field.grid().dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: state.field.grid().dim(),
        });
    }
    let mut next = state.clone();
    next.advance(dt)?;
    Ok(next)
}

/// One planar step from `state`.
pub fn step_2d(state: &SolverState, dt: f64) -> Result<SolverState> {
    if state.field.grid().dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: state.field.grid().dim(),
        });
    }
    let mut next = state.clone();
    next.advance(dt)?;
    Ok(next)
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: ObservableSeries,
    pub state: SolverState,
    /// Largest relative deviation of the conserved mass over the samples.
    pub mass_drift: f64,
}

fn check_boundary(field: &Field, t: f64, tol: f64) -> Result<()> {
    let edge = field.edge_ratio();
    if edge > tol {
        return Err(Error::BoundaryMass {
            t,
            edge,
            limit: tol,
        });
    }
    Ok(())
}

/// Integrates to `T_star`, recording observables at `sample_count` uniform
/// times after `t = 0`. Steps are shortened so that every sample time is hit
/// exactly.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let t_star = config.resolved_t_star()?;
    let u0 = config.initial_field()?;
    let mut state = SolverState::new(u0, config.eps)?;
    state.set_positivity_tol(config.positivity_tol);
    let spec = config.observable_spec();
    let mut series = ObservableSeries::new(spec.clone());
    let m0 = state.mass();
    let mut drift = 0.0f64;

    check_boundary(state.field(), 0.0, config.boundary_tol)?;
    series.push(spec.measure(0.0, state.field())?)?;
    if t_star == 0.0 {
        return Ok(RunOutput {
            series,
            state,
            mass_drift: 0.0,
        });
    }

    let samples = config.sample_count;
    let cap = t_star / samples as f64;
    for k in 1..=samples {
        let target = t_star * k as f64 / samples as f64;
        while state.t < target {
            let dt = stable_dt(&state, config.cfl, cap);
            let remaining = target - state.t;
            // Absorb a sliver that would otherwise become a tiny extra step.
            let dt = if remaining <= dt * (1.0 + 1e-9) {
                remaining
            } else {
                dt
            };
            state.advance(dt)?;
            if remaining == dt {
                state.t = target;
            }
        }
        drift = drift.max(((state.mass() - m0) / m0).abs());
        check_boundary(state.field(), state.t, config.boundary_tol)?;
        series.push(spec.measure(state.t, state.field())?)?;
        log::debug!(
            "t = {:.6} steps = {} max u = {:.6e}",
            state.t,
            state.steps,
            state.field.max()
        );
    }
    Ok(RunOutput {
        series,
        state,
        mass_drift: drift,
    })
}

/// Trapezoid integral of one observable over the series' time window.
pub fn time_integral(series: &ObservableSeries, key: ObservableKey) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    series.time_integral(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian, Grid};

    fn line_state(n: usize, eps: f64) -> SolverState {
        let grid = Grid::new(1, n, 16.0).unwrap();
        SolverState::new(gaussian(&grid, 1.0, 0.5).unwrap(), eps).unwrap()
    }

    #[test]
    fn zero_velocity_uses_cap() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let state = SolverState::new(Field::zeros(grid), 0.1).unwrap();
        assert_eq!(stable_dt(&state, 0.5, 0.01), 0.01);
    }

    #[test]
    fn dt_is_cfl_over_mass() {
        // The far-field line velocity is +-M.
        let state = line_state(1024, 0.05);
        let h = 16.0 / 1024.0;
        let dt = stable_dt(&state, 0.5, f64::INFINITY);
        assert!((dt - 0.5 * h / state.velocity().max_abs()).abs() < 1e-15);
        assert!((state.velocity().max_abs() - 1.0).abs() < 1e-3);
        let fine = line_state(2048, 0.05);
        let ratio = dt / stable_dt(&fine, 0.5, f64::INFINITY);
        assert!((ratio - 2.0).abs() < 1e-3);
    }

    #[test]
    fn oversize_step_is_rejected() {
        let state = line_state(256, 0.05);
        let limit = state.step_limit();
        assert!(matches!(
            step_1d(&state, 1.5 * limit),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(matches!(
            step_2d(&state, 0.1 * limit),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn line_step_conserves_mass_and_sign() {
        let mut state = line_state(512, 0.01);
        let m0 = state.mass();
        for _ in 0..200 {
            let dt = stable_dt(&state, 0.9, 1.0);
            state.advance(dt).unwrap();
            assert!(((state.mass() - m0) / m0).abs() < 1e-13);
            assert!(state.field().min() >= -1e-14 * state.field().max());
        }
        assert_eq!(state.steps(), 200);
    }

    #[test]
    fn zero_final_time_gives_one_record() {
        let cfg = RunConfig {
            t_star: Some(0.0),
            n: 256,
            ..RunConfig::default()
        };
        let out = run(&cfg).unwrap();
        assert_eq!(out.series.len(), 1);
        assert_eq!(out.state.time(), 0.0);
    }

    #[test]
    fn samples_land_on_uniform_times() {
        let cfg = RunConfig {
            t_star: Some(0.5),
            n: 256,
            sample_count: 10,
            ..RunConfig::default()
        };
        let out = run(&cfg).unwrap();
        let t = out.series.times();
        assert_eq!(t.len(), 11);
        for (k, tk) in t.iter().enumerate() {
            assert_eq!(*tk, 0.5 * k as f64 / 10.0);
        }
        assert!(out.mass_drift < 1e-10);
    }

    #[test]
    fn small_box_trips_boundary_monitor() {
        let cfg = RunConfig {
            extent: 8.0,
            sigma: 0.5,
            n: 256,
            eps: 0.5,
            t_star: Some(1.0),
            sample_count: 4,
            ..RunConfig::default()
        };
        assert!(matches!(run(&cfg), Err(Error::BoundaryMass { .. })));
    }

    #[test]
    fn integral_of_constant() {
        let spec = crate::norms::ObservableSpec {
            p_list: vec![],
            m_max: 0,
            wmp: vec![],
        };
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let f = gaussian(&grid, 2.0, 0.5).unwrap();
        let mut s = ObservableSeries::new(spec.clone());
        for k in 0..5 {
            s.push(spec.measure(0.25 * k as f64, &f).unwrap()).unwrap();
        }
        let m = mass(&f);
        assert!((time_integral(&s, ObservableKey::Mass).unwrap() - m).abs() < 1e-15);
    }
}
