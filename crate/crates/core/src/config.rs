//! Run configuration, read from plain `key=value` files.
//!
//! Recognized keys and defaults:
//!
//! | key            | default         | meaning                                        |
//! |----------------|-----------------|------------------------------------------------|
//! | `dim`          | 1               | spatial dimension, 1 or 2                      |
//! | `n`            | 1024            | points per axis, power of two >= 8             |
//! | `L`            | 16              | side of the periodic box `[-L/2, L/2)^dim`     |
//! | `eps`          | 0.05            | diffusivity, > 0                               |
//! | `T_star`       | `4 I0 / M^2`    | final time; `I0` is the first moment of `u0`   |
//! | `cfl`          | 0.5             | Courant number in (0, 1]                       |
//! | `sample_count` | 256             | observable samples after `t = 0`               |
//! | `m_max`        | 4               | highest Sobolev order recorded                 |
//! | `p_list`       | `1,2,3,4,inf`   | Lebesgue exponents recorded                    |
//! | `wmp`          | (empty)         | extra `m:p` pairs for the multiindex seminorm  |
//! | `profile`      | `gaussian`      | initial profile                                |
//! | `M`            | 1               | initial mass                                   |
//! | `sigma`        | 0.5             | Gaussian width, at most `L/16`                 |
//! | `center`       | origin          | comma-separated center coordinates             |
//! | `boundary_tol` | 1e-12           | edge value limit relative to `max u`           |
//! | `positivity_tol` | 1e-3          | 2D abort when `min u < -tol * max u`           |
//!
//! Blank lines and text after `#` are ignored. Unknown keys are errors.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{gaussian_at, Field, Grid};
use crate::norms::{first_moment, parse_exponent, ObservableSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub extent: f64,
    pub eps: f64,
    pub t_star: Option<f64>,
    pub cfl: f64,
    pub sample_count: usize,
    pub m_max: usize,
    pub p_list: Vec<f64>,
    pub wmp: Vec<(usize, f64)>,
    pub profile: Profile,
    pub mass: f64,
    pub sigma: f64,
    pub center: Option<Vec<f64>>,
    pub boundary_tol: f64,
    pub positivity_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            n: 1024,
            extent: 16.0,
            eps: 0.05,
            t_star: None,
            cfl: 0.5,
            sample_count: 256,
            m_max: 4,
            p_list: vec![1.0, 2.0, 3.0, 4.0, f64::INFINITY],
            wmp: Vec::new(),
            profile: Profile::Gaussian,
            mass: 1.0,
            sigma: 0.5,
            center: None,
            boundary_tol: 1e-12,
            positivity_tol: 1e-3,
        }
    }
}

pub const KEYS: [&str; 16] = [
    "dim",
    "n",
    "L",
    "eps",
    "T_star",
    "cfl",
    "sample_count",
    "m_max",
    "p_list",
    "wmp",
    "profile",
    "M",
    "sigma",
    "center",
    "boundary_tol",
    "positivity_tol",
];

fn value_err(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| value_err(key, format!("expected a number, got `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| {
        value_err(
            key,
            format!("expected a non-negative integer, got `{value}`"),
        )
    })
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|s| item(s.trim()).ok_or_else(|| value_err(key, format!("bad list entry `{s}`"))))
        .collect()
}

fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

impl RunConfig {
    /// Sets one key from its textual value. Range checks happen in
    /// [`RunConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dim" => self.dim = parse_usize(key, value)?,
            "n" => self.n = parse_usize(key, value)?,
            "L" => self.extent = parse_f64(key, value)?,
            "eps" => self.eps = parse_f64(key, value)?,
            "T_star" => {
                self.t_star = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "cfl" => self.cfl = parse_f64(key, value)?,
            "sample_count" => self.sample_count = parse_usize(key, value)?,
            "m_max" => self.m_max = parse_usize(key, value)?,
            "p_list" => self.p_list = parse_list(key, value, parse_exponent)?,
            "wmp" => {
                self.wmp = parse_list(key, value, |s| {
                    let (m, p) = s.split_once(':')?;
                    Some((m.trim().parse().ok()?, parse_exponent(p)?))
                })?
            }
            "profile" => {
                self.profile = match value {
                    "gaussian" => Profile::Gaussian,
                    other => return Err(value_err(key, format!("unknown profile `{other}`"))),
                }
            }
            "M" => self.mass = parse_f64(key, value)?,
            "sigma" => self.sigma = parse_f64(key, value)?,
            "center" => {
                self.center = Some(parse_list(key, value, |s| s.parse::<f64>().ok())?);
            }
            "boundary_tol" => self.boundary_tol = parse_f64(key, value)?,
            "positivity_tol" => self.positivity_tol = parse_f64(key, value)?,
            other => return Err(value_err(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(value_err(
                "dim",
                format!("unsupported dimension {}; must be 1 or 2", self.dim),
            ));
        }
        if self.n < crate::grid::MIN_POINTS || !self.n.is_power_of_two() {
            return Err(value_err("n", "must be a power of two >= 8"));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(value_err("L", "must be finite and > 0"));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(value_err("eps", "must be finite and > 0"));
        }
        if let Some(t) = self.t_star {
            if !(t.is_finite() && t >= 0.0) {
                return Err(value_err("T_star", "must be finite and >= 0"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(value_err("cfl", "must lie in (0, 1]"));
        }
        if self.sample_count == 0 {
            return Err(value_err("sample_count", "must be >= 1"));
        }
        if self.m_max > crate::spectral::MAX_DERIVATIVE_ORDER {
            return Err(value_err(
                "m_max",
                format!("must be <= {}", crate::spectral::MAX_DERIVATIVE_ORDER),
            ));
        }
        if self
            .wmp
            .iter()
            .any(|&(m, _)| m > crate::spectral::MAX_DERIVATIVE_ORDER)
        {
            return Err(value_err("wmp", "derivative order too large"));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(value_err("M", "must be finite and > 0"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(value_err("sigma", "must be finite and > 0"));
        }
        if self.sigma > self.extent / 16.0 * (1.0 + 1e-12) {
            return Err(value_err("sigma", "must not exceed L/16"));
        }
        if let Some(c) = &self.center {
            if c.len() != self.dim {
                return Err(value_err(
                    "center",
                    format!("needs {} coordinates", self.dim),
                ));
            }
        }
        if self.boundary_tol.is_nan() || self.boundary_tol <= 0.0 {
            return Err(value_err("boundary_tol", "must be > 0"));
        }
        if self.positivity_tol.is_nan() || self.positivity_tol <= 0.0 {
            return Err(value_err("positivity_tol", "must be > 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n, self.extent)
    }

    pub fn initial_field(&self) -> Result<Field> {
        let grid = self.grid()?;
        let origin = vec![0.0; self.dim];
        let center = self.center.as_deref().unwrap_or(&origin);
        match self.profile {
            Profile::Gaussian => gaussian_at(&grid, self.mass, self.sigma, center),
        }
    }

    /// Final time: the configured value, else `4 I0 / M^2`.
    pub fn resolved_t_star(&self) -> Result<f64> {
        match self.t_star {
            Some(t) => Ok(t),
            None => Ok(4.0 * first_moment(&self.initial_field()?) / (self.mass * self.mass)),
        }
    }

    pub fn observable_spec(&self) -> ObservableSpec {
        ObservableSpec {
            p_list: self.p_list.clone(),
            m_max: self.m_max,
            wmp: self.wmp.clone(),
        }
    }

    /// Serializes every key, so that parsing the output reproduces `self`.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim={}", self.dim);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "L={:?}", self.extent);
        let _ = writeln!(s, "eps={:?}", self.eps);
        match self.t_star {
            Some(t) => {
                let _ = writeln!(s, "T_star={t:?}");
            }
            None => {
                let _ = writeln!(s, "T_star=auto");
            }
        }
        let _ = writeln!(s, "cfl={:?}", self.cfl);
        let _ = writeln!(s, "sample_count={}", self.sample_count);
        let _ = writeln!(s, "m_max={}", self.m_max);
        let ps: Vec<String> = self.p_list.iter().map(|&p| fmt_exp(p)).collect();
        let _ = writeln!(s, "p_list={}", ps.join(","));
        let ws: Vec<String> = self
            .wmp
            .iter()
            .map(|&(m, p)| format!("{m}:{}", fmt_exp(p)))
            .collect();
        let _ = writeln!(s, "wmp={}", ws.join(","));
        let _ = writeln!(s, "profile=gaussian");
        let _ = writeln!(s, "M={:?}", self.mass);
        let _ = writeln!(s, "sigma={:?}", self.sigma);
        if let Some(c) = &self.center {
            let cs: Vec<String> = c.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(s, "center={}", cs.join(","));
        }
        let _ = writeln!(s, "boundary_tol={:?}", self.boundary_tol);
        let _ = writeln!(s, "positivity_tol={:?}", self.positivity_tol);
        s
    }
}

/// Parses `key=value` text; `origin` only labels error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |message: String| Error::Config {
            path: origin.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected key=value, got `{line}`")))?;
        cfg.set(key.trim(), value).map_err(|e| at(e.to_string()))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}
