//! Observables: mass, first moment, Lebesgue norms, homogeneous Sobolev
//! seminorms and the time-averaged length scale.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::spectral::{forward, spectral_derivative, Spectrum, MAX_DERIVATIVE_ORDER};

/// Minimum number of records [`length_scale`] accepts.
pub const MIN_LENGTH_SCALE_SAMPLES: usize = 16;

pub fn mass(field: &Field) -> f64 {
    field.values().iter().sum::<f64>() * field.grid().cell_volume()
}

/// `int |x| u(x) dx` over the box.
pub fn first_moment(field: &Field) -> f64 {
    let grid = field.grid();
    let dim = grid.dim();
    field
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &u)| {
            let x = grid.position(idx);
            let r = x[..dim].iter().map(|c| c * c).sum::<f64>().sqrt();
            r * u
        })
        .sum::<f64>()
        * grid.cell_volume()
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Lebesgue exponent must be >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `(h^dim sum |u|^p)^(1/p)`; `p = f64::INFINITY` gives the discrete max.
pub fn lp_norm(field: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_norm_values(
        field.values(),
        field.grid().cell_volume(),
        p,
    ))
}

pub(crate) fn lp_norm_values(values: &[f64], vol: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |a, v| a.max(v.abs()));
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum::<f64>() * vol;
    }
    if p == 2.0 {
        return (values.iter().map(|v| v * v).sum::<f64>() * vol).sqrt();
    }
    // scale by the max to keep large p from overflowing
    let peak = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / peak).powf(p)).sum();
    peak * (s * vol).powf(1.0 / p)
}

/// Spectral `H^m` seminorms for every `m` in `0..=m_max`, from one transform.
pub fn sobolev_seminorms_from(spectrum: &Spectrum, m_max: usize) -> Vec<f64> {
    let grid = spectrum.grid();
    let scale = grid.extent().powi(grid.dim() as i32).recip();
    let mut sums = vec![0.0; m_max + 1];
    for (idx, c) in spectrum.coeffs().iter().enumerate() {
        let k2 = spectrum.wavenumber_sq(idx);
        let mut w = c.norm_sqr();
        for s in sums.iter_mut() {
            *s += w;
            w *= k2;
        }
    }
    sums.into_iter().map(|s| (s * scale).sqrt()).collect()
}

pub fn sobolev_seminorms(field: &Field, m_max: usize) -> Vec<f64> {
    sobolev_seminorms_from(&forward(field), m_max)
}

/// `(L^-dim sum_j |k_j|^(2m) |u_hat_j|^2)^(1/2)`.
pub fn sobolev_seminorm(field: &Field, m: usize) -> f64 {
    sobolev_seminorms(field, m)[m]
}

/// All multiindices of total order `m` in `dim` dimensions.
pub fn multiindices(dim: usize, m: usize) -> Vec<Vec<usize>> {
    match dim {
        1 => vec![vec![m]],
        _ => (0..=m).map(|i| vec![i, m - i]).collect(),
    }
}

/// `sum_{|i| = m} ||d_i u||_p`, the seminorm with unweighted multiindex sum.
pub fn wmp_seminorm(field: &Field, m: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if m > MAX_DERIVATIVE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {m} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    if m == 0 {
        return lp_norm(field, p);
    }
    let mut total = 0.0;
    for alpha in multiindices(field.grid().dim(), m) {
        total += lp_norm(&spectral_derivative(field, &alpha)?, p)?;
    }
    Ok(total)
}

/// An observable tracked over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservableKey {
    Mass,
    FirstMoment,
    Lp(f64),
    Hm(usize),
    Wmp(usize, f64),
}

fn fmt_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

pub(crate) fn parse_exponent(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") {
        return Some(f64::INFINITY);
    }
    s.parse::<f64>().ok().filter(|p| *p >= 1.0)
}

impl fmt::Display for ObservableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableKey::Mass => write!(f, "mass"),
            ObservableKey::FirstMoment => write!(f, "moment1"),
            ObservableKey::Lp(p) => write!(f, "Lp_{}", fmt_exponent(*p)),
            ObservableKey::Hm(m) => write!(f, "Hm_{m}"),
            ObservableKey::Wmp(m, p) => write!(f, "Wmp_{m}_{}", fmt_exponent(*p)),
        }
    }
}

impl FromStr for ObservableKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown observable `{s}`"));
        match s {
            "mass" => return Ok(ObservableKey::Mass),
            "moment1" => return Ok(ObservableKey::FirstMoment),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("Lp_") {
            return parse_exponent(p).map(ObservableKey::Lp).ok_or_else(bad);
        }
        if let Some(m) = s.strip_prefix("Hm_") {
            return m.parse().map(ObservableKey::Hm).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("Wmp_") {
            let (m, p) = rest.split_once('_').ok_or_else(bad)?;
            let m = m.parse().map_err(|_| bad())?;
            let p = parse_exponent(p).ok_or_else(bad)?;
            return Ok(ObservableKey::Wmp(m, p));
        }
        Err(bad())
    }
}

/// Which norms a series records.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    pub p_list: Vec<f64>,
    pub m_max: usize,
    pub wmp: Vec<(usize, f64)>,
}

impl ObservableSpec {
    /// Column keys after `t`, in CSV order.
    pub fn keys(&self) -> Vec<ObservableKey> {
        let mut keys = vec![ObservableKey::Mass, ObservableKey::FirstMoment];
        keys.extend(self.p_list.iter().map(|&p| ObservableKey::Lp(p)));
        keys.extend((0..=self.m_max).map(ObservableKey::Hm));
        keys.extend(self.wmp.iter().map(|&(m, p)| ObservableKey::Wmp(m, p)));
        keys
    }

    pub fn measure(&self, t: f64, field: &Field) -> Result<ObservableRecord> {
        let vol = field.grid().cell_volume();
        let lp = self
            .p_list
            .iter()
            .map(|&p| lp_norm_values(field.values(), vol, p))
            .collect();
        let wmp = self
            .wmp
            .iter()
            .map(|&(m, p)| wmp_seminorm(field, m, p))
            .collect::<Result<_>>()?;
        Ok(ObservableRecord {
            t,
            mass: mass(field),
            first_moment: first_moment(field),
            lp,
            hm: sobolev_seminorms(field, self.m_max),
            wmp,
        })
    }
}

/// Observables at one instant. `lp`, `hm` and `wmp` follow the owning
/// series' [`ObservableSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub mass: f64,
    pub first_moment: f64,
    pub lp: Vec<f64>,
    pub hm: Vec<f64>,
    pub wmp: Vec<f64>,
}

impl ObservableRecord {
    /// Values in [`ObservableSpec::keys`] order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.mass, self.first_moment];
        v.extend(&self.lp);
        v.extend(&self.hm);
        v.extend(&self.wmp);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    spec: ObservableSpec,
    records: Vec<ObservableRecord>,
}

impl ObservableSeries {
    pub fn new(spec: ObservableSpec) -> Self {
        ObservableSeries {
            spec,
            records: Vec::new(),
        }
    }

    pub fn spec(&self) -> &ObservableSpec {
        &self.spec
    }

    pub fn records(&self) -> &[ObservableRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: ObservableRecord) -> Result<()> {
        if record.lp.len() != self.spec.p_list.len()
            || record.hm.len() != self.spec.m_max + 1
            || record.wmp.len() != self.spec.wmp.len()
        {
            return Err(Error::InvalidArgument(
                "record layout does not match series".into(),
            ));
        }
        if let Some(last) = self.records.last() {
            if record.t < last.t {
                return Err(Error::InvalidArgument(format!(
                    "record time {} precedes {}",
                    record.t, last.t
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Time trace of one observable.
    pub fn column(&self, key: ObservableKey) -> Result<Vec<f64>> {
        let pos = self
            .spec
            .keys()
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::InvalidArgument(format!("series does not record {key}")))?;
        Ok(self.records.iter().map(|r| r.values()[pos]).collect())
    }

    pub fn sup(&self, key: ObservableKey) -> Result<f64> {
        Ok(self
            .column(key)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Trapezoid integral of one observable over the recorded times.
    pub fn time_integral(&self, key: ObservableKey) -> Result<f64> {
        Ok(trapezoid(&self.times(), &self.column(key)?))
    }

    /// Time average over the recorded window; the single value for a
    /// one-record series.
    pub fn time_average(&self, key: ObservableKey) -> Result<f64> {
        let (first, last) = match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => return Err(Error::InvalidArgument("empty series".into())),
        };
        if last > first {
            Ok(self.time_integral(key)? / (last - first))
        } else {
            Ok(self.column(key)?[0])
        }
    }
}

pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// `<|u|_{H^m}> / <|u|_{H^(m+1)}>` with time averages over the series.
pub fn length_scale(series: &ObservableSeries, m: usize) -> Result<f64> {
    if series.len() < MIN_LENGTH_SCALE_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "length scale needs at least {MIN_LENGTH_SCALE_SAMPLES} records, series has {}",
            series.len()
        )));
    }
    let num = series.time_average(ObservableKey::Hm(m))?;
    let den = series.time_average(ObservableKey::Hm(m + 1))?;
    if den <= 0.0 {
        return Err(Error::Degenerate("vanishing higher seminorm".into()));
    }
    Ok(num / den)
}
