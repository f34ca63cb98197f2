//! Epsilon sweeps and log-log exponent fits.
//!
//! Every run in a sweep starts from the same initial profile and integrates
//! to the same final time, resolved once from the base configuration. Grid
//! size follows a [`ResolutionRule`] tying the spacing to `eps`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::norms::{length_scale, ObservableKey};
use crate::solver::run;

/// Fewest sweep points accepted.
pub const MIN_SWEEP_POINTS: usize = 6;
/// Smallest span of a sweep, in decades of `eps`, indexed by dimension. The
/// planar grid cap bounds the smallest resolvable `eps` near `1e-2`, so
/// planar sweeps may span a single decade.
pub fn min_sweep_decades(dim: usize) -> f64 {
    if dim == 1 {
        1.5
    } else {
        1.0
    }
}
/// Fewest points a fit accepts.
pub const MIN_FIT_POINTS: usize = 4;
/// Limit on `max / min` of a compensated quantity.
pub const RATIO_THRESHOLD: f64 = 3.0;

/// Picks the smallest power-of-two `n` with `L / n <= eps / cells_per_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionRule {
    pub cells_per_eps: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl ResolutionRule {
    pub const LINE_MAX: usize = 1 << 18;
    pub const PLANE_MAX: usize = 1024;

    /// `h <= eps / 4` with the memory cap for `dim`.
    pub fn standard(dim: usize) -> Self {
        ResolutionRule {
            cells_per_eps: 4.0,
            n_min: crate::grid::MIN_POINTS,
            n_max: if dim == 1 {
                Self::LINE_MAX
            } else {
                Self::PLANE_MAX
            },
        }
    }

    pub fn points(&self, extent: f64, eps: f64) -> Result<usize> {
        let need = (self.cells_per_eps * extent / eps).ceil();
        let n = if need <= self.n_min as f64 {
            self.n_min
        } else if need > self.n_max as f64 {
            usize::MAX
        } else {
            (need as usize).next_power_of_two().max(self.n_min)
        };
        if n > self.n_max {
            return Err(Error::GridTooLarge {
                cells: need as usize,
                limit: self.n_max,
            });
        }
        Ok(n)
    }
}

/// `count` points geometrically spaced from `max` down to `min`.
pub fn geometric_eps(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < eps_min <= eps_max and count >= 2, got [{min}, {max}] x {count}"
        )));
    }
    let ratio = (min / max).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|k| match k {
            0 => max,
            k if k + 1 == count => min,
            k => max * (ratio * k as f64).exp(),
        })
        .collect())
}

/// Rejects lists with too few points or too narrow a span.
pub fn check_eps_list(eps: &[f64], dim: usize) -> Result<()> {
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidArgument(
            "eps values must be finite and > 0".into(),
        ));
    }
    if eps.len() < MIN_SWEEP_POINTS {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least {MIN_SWEEP_POINTS} eps values, got {}",
            eps.len()
        )));
    }
    let lo = eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps.iter().cloned().fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    let need = min_sweep_decades(dim);
    if decades < need - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "sweep spans {decades:.3} decades, need {need}"
        )));
    }
    Ok(())
}

/// Per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub n: usize,
    pub steps: u64,
    pub mass_drift: f64,
    /// `int_0^T |u|_{H^m} dt` for `m = 0..=m_max`.
    pub hm_integral: Vec<f64>,
    /// `sup_t |u|_{H^m}` for `m = 0..=m_max`.
    pub hm_sup: Vec<f64>,
    /// `|u_0|_{H^m}` for `m = 0..=m_max`.
    pub hm_initial: Vec<f64>,
    /// `int_0^T |u|_{L^p} dt` for each `p` in the sweep's list.
    pub lp_integral: Vec<f64>,
    /// `<H^m> / <H^(m+1)>` for `m = 0..m_max`.
    pub length_scale: Vec<f64>,
    /// Wall-clock seconds; not part of the CSV.
    #[serde(skip)]
    pub runtime: f64,
    /// Reason the run aborted, if it did.
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub dim: usize,
    pub t_star: f64,
    pub m_max: usize,
    pub p_list: Vec<f64>,
    /// Sorted by `eps`, largest first.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.failed()).collect()
    }

    pub fn ensure_complete(&self) -> Result<()> {
        let failed = self.failed_rows();
        if let Some(r) = failed.first() {
            return Err(Error::IncompleteSweep(format!(
                "{} of {} runs failed; first at eps = {}: {}",
                failed.len(),
                self.rows.len(),
                r.eps,
                r.failure.as_deref().unwrap_or("")
            )));
        }
        if self.rows.is_empty() {
            return Err(Error::IncompleteSweep("no rows".into()));
        }
        Ok(())
    }

    /// `(eps, value)` pairs for one column of per-row data.
    pub fn pairs(&self, column: impl Fn(&SweepRow) -> Option<f64>) -> Result<Vec<(f64, f64)>> {
        self.ensure_complete()?;
        self.rows
            .iter()
            .map(|r| {
                column(r).map(|v| (r.eps, v)).ok_or_else(|| {
                    Error::InvalidArgument("sweep lacks the requested column".into())
                })
            })
            .collect()
    }

    fn lp_index(&self, p: f64) -> Option<usize> {
        self.p_list.iter().position(|&q| q == p)
    }
}

fn run_row(base: &RunConfig, t_star: f64, eps: f64, rule: &ResolutionRule) -> SweepRow {
    let start = Instant::now();
    let spec = base.observable_spec();
    let mut row = SweepRow {
        eps,
        n: 0,
        steps: 0,
        mass_drift: 0.0,
        hm_integral: Vec::new(),
        hm_sup: Vec::new(),
        hm_initial: Vec::new(),
        lp_integral: Vec::new(),
        length_scale: Vec::new(),
        runtime: 0.0,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let n = rule.points(base.extent, eps)?;
        row.n = n;
        let cfg = RunConfig {
            n,
            eps,
            t_star: Some(t_star),
            ..base.clone()
        };
        let out = run(&cfg)?;
        let series = &out.series;
        row.steps = out.state.steps();
        row.mass_drift = out.mass_drift;
        for m in 0..=spec.m_max {
            let key = ObservableKey::Hm(m);
            row.hm_integral.push(series.time_integral(key)?);
            row.hm_sup.push(series.sup(key)?);
            row.hm_initial.push(series.column(key)?[0]);
        }
        for &p in &spec.p_list {
            row.lp_integral
                .push(series.time_integral(ObservableKey::Lp(p))?);
        }
        for m in 0..spec.m_max {
            row.length_scale.push(length_scale(series, m)?);
        }
        Ok(())
    })();
    if let Err(e) = result {
        log::warn!("run at eps = {eps} failed: {e}");
        row.failure = Some(e.to_string());
    }
    row.runtime = start.elapsed().as_secs_f64();
    log::info!(
        "eps = {eps:.6e} n = {} steps = {} in {:.1}s",
        row.n,
        row.steps,
        row.runtime
    );
    row
}

/// Runs `base` once per `eps` on up to `workers` threads. Failed runs are
/// kept as marked rows; see [`SweepResult::ensure_complete`].
pub fn sweep(
    base: &RunConfig,
    eps_list: &[f64],
    rule: &ResolutionRule,
    workers: usize,
) -> Result<SweepResult> {
    check_eps_list(eps_list, base.dim)?;
    base.validate()?;
    let t_star = base.resolved_t_star()?;
    if t_star <= 0.0 {
        return Err(Error::InvalidArgument("sweep needs T_star > 0".into()));
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        eps.par_iter()
            .map(|&e| run_row(base, t_star, e, rule))
            .collect::<Vec<_>>()
    });
    Ok(SweepResult {
        dim: base.dim,
        t_star,
        m_max: base.m_max,
        p_list: base.p_list.clone(),
        rows,
    })
}

/// Least-squares line through `(ln eps, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<Fit> {
    if pairs.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least {MIN_FIT_POINTS} points, got {}",
            pairs.len()
        )));
    }
    if let Some(&(e, v)) = pairs
        .iter()
        .find(|(e, v)| !(*e > 0.0 && *v > 0.0 && e.is_finite() && v.is_finite()))
    {
        return Err(Error::InvalidArgument(format!(
            "log-log fit needs positive data, got ({e}, {v})"
        )));
    }
    let k = pairs.len() as f64;
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all eps values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(Fit {
        slope,
        intercept,
        r2,
    })
}

/// Outcome of one scaling check, with every threshold it was judged by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub observable: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub theory_slope: f64,
    /// Allowed `|slope - theory_slope|`; absent for ratio-only checks.
    pub tolerance: Option<f64>,
    pub min_r2: Option<f64>,
    /// `max / min` of the compensated quantity, for ratio checks.
    pub ratio: Option<f64>,
    pub ratio_threshold: Option<f64>,
    pub pass: bool,
}

impl FitReport {
    fn from_fit(
        observable: String,
        fit: Fit,
        theory_slope: f64,
        tolerance: Option<f64>,
        min_r2: Option<f64>,
    ) -> Self {
        let pass = tolerance.is_none_or(|t| (fit.slope - theory_slope).abs() <= t)
            && min_r2.is_none_or(|r| fit.r2 >= r);
        FitReport {
            observable,
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
            theory_slope,
            tolerance,
            min_r2,
            ratio: None,
            ratio_threshold: None,
            pass,
        }
    }
}

/// Slope tolerance for the time-integrated `H^m` seminorm.
pub fn sobolev_tolerance(dim: usize, m: usize) -> f64 {
    match (dim, m) {
        (1, 0) => 0.10,
        (1, 1) => 0.15,
        (1, _) => 0.25,
        _ => 0.15,
    }
}

/// Smallest `R^2` accepted for Sobolev fits.
pub fn sobolev_min_r2(dim: usize) -> f64 {
    if dim == 1 {
        0.98
    } else {
        0.95
    }
}

pub const LP_TOLERANCE: f64 = 0.12;
pub const LENGTH_SCALE_TOLERANCE: f64 = 0.15;

/// `-(2m + N)/2`.
pub fn sobolev_theory_slope(dim: usize, m: usize) -> f64 {
    -((2 * m + dim) as f64) / 2.0
}

/// `-N (1 - 1/p)`.
pub fn lp_theory_slope(dim: usize, p: f64) -> f64 {
    -(dim as f64) * (1.0 - 1.0 / p)
}

fn hm_column(
    sweep: &SweepResult,
    m: usize,
    pick: fn(&SweepRow) -> &Vec<f64>,
) -> Result<Vec<(f64, f64)>> {
    if m > sweep.m_max {
        return Err(Error::InvalidArgument(format!(
            "sweep records m <= {}, asked for {m}",
            sweep.m_max
        )));
    }
    sweep.pairs(|r| pick(r).get(m).copied())
}

fn ratio(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Slope of `int_0^T |u|_{H^m} dt` against `-(2m + N)/2`.
pub fn sobolev_scaling_check(sweep: &SweepResult, m: usize) -> Result<FitReport> {
    let pairs = hm_column(sweep, m, |r| &r.hm_integral)?;
    Ok(FitReport::from_fit(
        format!("int_Hm_{m}"),
        fit_exponent(&pairs)?,
        sobolev_theory_slope(sweep.dim, m),
        Some(sobolev_tolerance(sweep.dim, m)),
        Some(sobolev_min_r2(sweep.dim)),
    ))
}

/// Stability of `q = sup_t |u|_{H^m} eps^((N+2m)/2)`. Also requires the
/// supremum to exceed the initial seminorm at the smallest `eps`, so that the
/// bound is attained through its `eps` term.
pub fn envelope_check(sweep: &SweepResult, m: usize) -> Result<FitReport> {
    let pairs = hm_column(sweep, m, |r| &r.hm_sup)?;
    let theory = sobolev_theory_slope(sweep.dim, m);
    let (lo, hi) = ratio(pairs.iter().map(|&(e, v)| v * e.powf(-theory)));
    let smallest = sweep
        .rows
        .last()
        .ok_or_else(|| Error::IncompleteSweep("no rows".into()))?;
    let concentrated = smallest.hm_sup[m] > smallest.hm_initial[m];
    let mut report = FitReport::from_fit(
        format!("sup_Hm_{m}"),
        fit_exponent(&pairs)?,
        theory,
        None,
        None,
    );
    let r = hi / lo;
    report.ratio = Some(r);
    report.ratio_threshold = Some(RATIO_THRESHOLD);
    report.pass = lo > 0.0 && r <= RATIO_THRESHOLD && concentrated;
    Ok(report)
}

/// Stability of `r = int_0^T |u|_{H^m} dt eps^((2m+N)/2)`, bounded below by
/// a positive constant.
pub fn lower_check(sweep: &SweepResult, m: usize) -> Result<FitReport> {
    let pairs = hm_column(sweep, m, |r| &r.hm_integral)?;
    let theory = sobolev_theory_slope(sweep.dim, m);
    let (lo, hi) = ratio(pairs.iter().map(|&(e, v)| v * e.powf(-theory)));
    let mut report = FitReport::from_fit(
        format!("lower_Hm_{m}"),
        fit_exponent(&pairs)?,
        theory,
        None,
        None,
    );
    let r = hi / lo;
    report.ratio = Some(r);
    report.ratio_threshold = Some(RATIO_THRESHOLD);
    report.pass = lo > 0.0 && r <= RATIO_THRESHOLD;
    Ok(report)
}

/// Slope of `int_0^T |u|_{L^p} dt` against `-N (1 - 1/p)`.
pub fn lp_scaling_check(sweep: &SweepResult, p: f64) -> Result<FitReport> {
    let idx = sweep
        .lp_index(p)
        .ok_or_else(|| Error::InvalidArgument(format!("sweep does not record p = {p}")))?;
    if p.is_infinite() {
        return Err(Error::InvalidArgument(
            "scaling check needs finite p".into(),
        ));
    }
    let pairs = sweep.pairs(|r| r.lp_integral.get(idx).copied())?;
    Ok(FitReport::from_fit(
        format!("int_Lp_{p}"),
        fit_exponent(&pairs)?,
        lp_theory_slope(sweep.dim, p),
        Some(LP_TOLERANCE),
        None,
    ))
}

/// Slope of `<H^m> / <H^(m+1)>` against `+1`.
pub fn length_scale_check(sweep: &SweepResult, m: usize) -> Result<FitReport> {
    if m >= sweep.m_max {
        return Err(Error::InvalidArgument(format!(
            "length scale needs m < m_max = {}",
            sweep.m_max
        )));
    }
    let pairs = sweep.pairs(|r| r.length_scale.get(m).copied())?;
    Ok(FitReport::from_fit(
        format!("length_{m}"),
        fit_exponent(&pairs)?,
        1.0,
        Some(LENGTH_SCALE_TOLERANCE),
        None,
    ))
}

/// Whether `int_0^T |u|_{H^m} dt` grows as `eps` falls, allowing a single
/// inversion between the two largest `eps`.
pub fn monotone_in_eps(sweep: &SweepResult, m: usize) -> Result<bool> {
    let pairs = hm_column(sweep, m, |r| &r.hm_integral)?;
    // rows run from largest to smallest eps
    Ok(pairs
        .windows(2)
        .enumerate()
        .all(|(i, w)| i == 0 || w[1].1 >= w[0].1))
}

/// The checks applicable to a sweep: Sobolev slopes, envelope and lower
/// bound for `m <= 2`, Lebesgue slopes for finite `p`, and the `m = 0`
/// length scale.
pub fn standard_checks(sweep: &SweepResult) -> Result<Vec<FitReport>> {
    sweep.ensure_complete()?;
    let mut out = Vec::new();
    let top = sweep.m_max.min(2);
    for m in 0..=top {
        out.push(sobolev_scaling_check(sweep, m)?);
    }
    for &p in sweep.p_list.iter().filter(|p| p.is_finite()) {
        out.push(lp_scaling_check(sweep, p)?);
    }
    if sweep.m_max >= 1 {
        out.push(length_scale_check(sweep, 0)?);
    }
    for m in 0..=top {
        out.push(envelope_check(sweep, m)?);
    }
    for m in 0..=top {
        out.push(lower_check(sweep, m)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(dim: usize, extra: f64) -> SweepResult {
        let eps = geometric_eps(1e-3, 0.1, 8).unwrap();
        let rows = eps
            .iter()
            .map(|&e| {
                let hm: Vec<f64> = (0..=2)
                    .map(|m| e.powf(sobolev_theory_slope(dim, m) - extra))
                    .collect();
                SweepRow {
                    eps: e,
                    n: 64,
                    steps: 1,
                    mass_drift: 0.0,
                    hm_integral: hm.clone(),
                    hm_sup: hm,
                    hm_initial: vec![1e-9; 3],
                    lp_integral: vec![1.0, e.powf(lp_theory_slope(dim, 2.0))],
                    length_scale: vec![e, e],
                    runtime: 0.0,
                    failure: None,
                }
            })
            .collect();
        SweepResult {
            dim,
            t_star: 1.0,
            m_max: 2,
            p_list: vec![1.0, 2.0],
            rows,
        }
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        let pairs: Vec<(f64, f64)> = [0.01, 0.02, 0.05, 0.1, 0.3]
            .iter()
            .map(|&e: &f64| (e, 1.0 / e))
            .collect();
        let f = fit_exponent(&pairs).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let pairs: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(e, _)| (e, 7.0 * e.powf(-0.5)))
            .collect();
        let f = fit_exponent(&pairs).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let mut pairs = vec![(0.1, 1.0), (0.2, 2.0), (0.3, 3.0), (0.4, 4.0)];
        assert!(fit_exponent(&pairs[..3]).is_err());
        pairs[2].1 = 0.0;
        assert!(fit_exponent(&pairs).is_err());
    }

    #[test]
    fn resolution_rule_picks_powers_of_two() {
        let r = ResolutionRule::standard(1);
        assert_eq!(r.points(16.0, 0.1).unwrap(), 1024);
        assert_eq!(r.points(16.0, 1.25e-3).unwrap(), 65536);
        assert!(r.points(16.0, 1e-4).is_err());
        let ns: Vec<usize> = geometric_eps(0.0125, 0.1, 10)
            .unwrap()
            .iter()
            .map(|&e| r.points(16.0, e).unwrap())
            .collect();
        assert!(ns.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(ResolutionRule::standard(2).points(4.8, 0.02).unwrap(), 1024);
    }

    #[test]
    fn geometric_list_hits_endpoints() {
        let e = geometric_eps(0.0125, 0.1, 10).unwrap();
        assert_eq!(e.len(), 10);
        assert_eq!(e[0], 0.1);
        assert_eq!(e[9], 0.0125);
        assert!((e[1] - 0.1 * (0.125f64).powf(1.0 / 9.0)).abs() < 1e-15);
        assert!(check_eps_list(&e, 1).is_err());
        assert!(check_eps_list(&geometric_eps(0.02, 0.2, 6).unwrap(), 2).is_ok());
        assert!(check_eps_list(&geometric_eps(1e-3, 0.1, 6).unwrap(), 1).is_ok());
        assert!(check_eps_list(&geometric_eps(1e-3, 0.1, 5).unwrap(), 1).is_err());
    }

    #[test]
    fn synthetic_exact_rows_pass() {
        let s = synthetic(1, 0.0);
        for r in standard_checks(&s).unwrap() {
            assert!(r.pass, "{r:?}");
            if let Some(q) = r.ratio {
                assert!((q - 1.0).abs() < 1e-9);
            }
        }
        assert!(monotone_in_eps(&s, 1).unwrap());
    }

    #[test]
    fn envelope_fails_for_steeper_growth() {
        let s = synthetic(1, 0.5);
        let r = envelope_check(&s, 1).unwrap();
        // two decades at sqrt(10) per decade
        assert!((r.ratio.unwrap() - 10.0).abs() < 1e-9);
        assert!(!r.pass);
        assert!(!lower_check(&s, 0).unwrap().pass);
    }

    #[test]
    fn failed_row_blocks_checks() {
        let mut s = synthetic(1, 0.0);
        s.rows[3].failure = Some("boundary".into());
        assert!(matches!(
            sobolev_scaling_check(&s, 0),
            Err(Error::IncompleteSweep(_))
        ));
    }
}
