//! Simulation and scaling diagnostics for the aggregation-diffusion equation
//!
//! ```text
//! u_t - eps Lap u + div(u grad(K * u)) = 0,    K(x) = -|x|,
//! ```
//!
//! on a periodic box in one or two dimensions, together with the norm
//! engine, epsilon sweeps with log-log exponent fits, and exponent algebra
//! for the Gagliardo-Nirenberg and Hardy-Littlewood-Sobolev inequalities.

pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod inequalities;
pub mod io;
pub mod kernel;
pub mod norms;
pub mod solver;
pub mod spectral;
pub mod svg;

pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use grid::{gaussian, Field, Grid};
pub use norms::{ObservableKey, ObservableSeries, ObservableSpec};
pub use solver::{run, RunOutput, SolverState};
