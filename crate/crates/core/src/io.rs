//! CSV, JSON and binary persistence.
//!
//! Floats are written in `{:.16e}` form, 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{FitReport, SweepResult, SweepRow};
use crate::grid::{Field, Grid};
use crate::norms::{
    parse_exponent, ObservableKey, ObservableRecord, ObservableSeries, ObservableSpec,
};

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!("bad number `{s}`"),
    })
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

/// Column names of a series CSV: `t` followed by [`ObservableSpec::keys`].
pub fn series_header(spec: &ObservableSpec) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain(spec.keys().iter().map(ToString::to_string))
        .collect()
}

pub fn write_series_csv(series: &ObservableSeries, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(series_header(series.spec()))?;
    for r in series.records() {
        let row = std::iter::once(r.t).chain(r.values()).map(fmt_f64);
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a series CSV; the header determines the observable layout.
pub fn read_series_csv(path: &Path) -> Result<ObservableSeries> {
    let mut r = reader(path)?;
    let header = r.headers()?.clone();
    if header.get(0) != Some("t") {
        return Err(format_err(path, "first column must be `t`"));
    }
    let keys = header
        .iter()
        .skip(1)
        .map(|h| h.parse::<ObservableKey>())
        .collect::<Result<Vec<_>>>()?;
    let mut spec = ObservableSpec {
        p_list: Vec::new(),
        m_max: 0,
        wmp: Vec::new(),
    };
    let mut hm_count = 0;
    for k in &keys {
        match *k {
            ObservableKey::Lp(p) => spec.p_list.push(p),
            ObservableKey::Hm(_) => hm_count += 1,
            ObservableKey::Wmp(m, p) => spec.wmp.push((m, p)),
            _ => {}
        }
    }
    if hm_count == 0 {
        return Err(format_err(path, "no Hm columns"));
    }
    spec.m_max = hm_count - 1;
    let expected = series_header(&spec);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(format_err(path, "columns are not in canonical order"));
    }
    let np = spec.p_list.len();
    let nh = hm_count;
    let mut series = ObservableSeries::new(spec);
    for rec in r.records() {
        let rec = rec?;
        let v = rec
            .iter()
            .map(|s| parse_f64(path, s))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != header.len() {
            return Err(format_err(path, "ragged row"));
        }
        series.push(ObservableRecord {
            t: v[0],
            mass: v[1],
            first_moment: v[2],
            lp: v[3..3 + np].to_vec(),
            hm: v[3 + np..3 + np + nh].to_vec(),
            wmp: v[3 + np + nh..].to_vec(),
        })?;
    }
    Ok(series)
}

fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

/// Column names of a sweep CSV.
pub fn sweep_header(sweep: &SweepResult) -> Vec<String> {
    let mut h: Vec<String> = ["dim", "t_star", "eps", "n", "steps", "mass_drift"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for m in 0..=sweep.m_max {
        h.push(format!("int_Hm_{m}"));
    }
    for m in 0..=sweep.m_max {
        h.push(format!("sup_Hm_{m}"));
    }
    for m in 0..=sweep.m_max {
        h.push(format!("init_Hm_{m}"));
    }
    for &p in &sweep.p_list {
        h.push(format!("int_Lp_{}", fmt_exp(p)));
    }
    for m in 0..sweep.m_max {
        h.push(format!("length_{m}"));
    }
    h.push("status".into());
    h
}

/// One row per `eps`, largest first. Failed rows have empty numeric cells
/// and the failure message as status. Run time is left out so that
/// identical sweeps give identical files.
pub fn write_sweep_csv(sweep: &SweepResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let header = sweep_header(sweep);
    w.write_record(&header)?;
    let width = header.len() - 7;
    for r in &sweep.rows {
        let mut rec = vec![
            sweep.dim.to_string(),
            fmt_f64(sweep.t_star),
            fmt_f64(r.eps),
            r.n.to_string(),
            r.steps.to_string(),
            fmt_f64(r.mass_drift),
        ];
        match &r.failure {
            None => {
                rec.extend(
                    r.hm_integral
                        .iter()
                        .chain(&r.hm_sup)
                        .chain(&r.hm_initial)
                        .chain(&r.lp_integral)
                        .chain(&r.length_scale)
                        .map(|&v| fmt_f64(v)),
                );
                rec.push("ok".into());
            }
            Some(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), width));
                rec.push(format!("failed: {msg}"));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a sweep CSV written by [`write_sweep_csv`].
pub fn read_sweep_csv(path: &Path) -> Result<SweepResult> {
    let mut r = reader(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let hm = header.iter().filter(|h| h.starts_with("int_Hm_")).count();
    if hm == 0 {
        return Err(format_err(path, "no int_Hm columns"));
    }
    let p_list = header
        .iter()
        .filter_map(|h| h.strip_prefix("int_Lp_"))
        .map(|p| parse_exponent(p).ok_or_else(|| format_err(path, format!("bad exponent `{p}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut sweep = SweepResult {
        dim: 0,
        t_star: 0.0,
        m_max: hm - 1,
        p_list,
        rows: Vec::new(),
    };
    if header != sweep_header(&sweep) {
        return Err(format_err(path, "columns are not in canonical order"));
    }
    let m = sweep.m_max + 1;
    let np = sweep.p_list.len();
    for rec in r.records() {
        let rec = rec?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        sweep.dim = cell(0).parse().map_err(|_| format_err(path, "bad dim"))?;
        sweep.t_star = parse_f64(path, cell(1))?;
        let status = cell(header.len() - 1);
        let mut row = SweepRow {
            eps: parse_f64(path, cell(2))?,
            n: cell(3).parse().map_err(|_| format_err(path, "bad n"))?,
            steps: cell(4).parse().map_err(|_| format_err(path, "bad steps"))?,
            mass_drift: parse_f64(path, cell(5))?,
            hm_integral: Vec::new(),
            hm_sup: Vec::new(),
            hm_initial: Vec::new(),
            lp_integral: Vec::new(),
            length_scale: Vec::new(),
            runtime: 0.0,
            failure: None,
        };
        if let Some(msg) = status.strip_prefix("failed: ") {
            row.failure = Some(msg.to_string());
        } else if status == "ok" {
            let v = (6..header.len() - 1)
                .map(|i| parse_f64(path, cell(i)))
                .collect::<Result<Vec<_>>>()?;
            row.hm_integral = v[..m].to_vec();
            row.hm_sup = v[m..2 * m].to_vec();
            row.hm_initial = v[2 * m..3 * m].to_vec();
            row.lp_integral = v[3 * m..3 * m + np].to_vec();
            row.length_scale = v[3 * m + np..].to_vec();
        } else {
            return Err(format_err(path, format!("bad status `{status}`")));
        }
        sweep.rows.push(row);
    }
    if sweep.rows.is_empty() {
        return Err(format_err(path, "sweep has no rows"));
    }
    Ok(sweep)
}

pub fn write_reports_json(reports: &[FitReport], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, reports)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_reports_json(path: &Path) -> Result<Vec<FitReport>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

/// Binary snapshot: `dim` and `n` as little-endian `u64`, then `L`, `t` and
/// `eps` as little-endian `f64`, then the `n^dim` values.
pub fn write_snapshot(field: &Field, t: f64, eps: f64, path: &Path) -> Result<()> {
    let g = field.grid();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |b: &[u8]| w.write_all(b).map_err(|e| Error::io(path, e));
    put(&(g.dim() as u64).to_le_bytes())?;
    put(&(g.n() as u64).to_le_bytes())?;
    put(&g.extent().to_le_bytes())?;
    put(&t.to_le_bytes())?;
    put(&eps.to_le_bytes())?;
    for v in field.values() {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A snapshot read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub t: f64,
    pub eps: f64,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 40 || bytes.len() % 8 != 0 {
        return Err(format_err(path, "truncated snapshot"));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8-byte word") };
    let dim = u64::from_le_bytes(word(0)) as usize;
    let n = u64::from_le_bytes(word(1)) as usize;
    let extent = f64::from_le_bytes(word(2));
    let t = f64::from_le_bytes(word(3));
    let eps = f64::from_le_bytes(word(4));
    let grid = Grid::new(dim, n, extent)?;
    if bytes.len() / 8 - 5 != grid.len() {
        return Err(format_err(
            path,
            format!(
                "expected {} values, found {}",
                grid.len(),
                bytes.len() / 8 - 5
            ),
        ));
    }
    let values = (0..grid.len())
        .map(|i| f64::from_le_bytes(word(5 + i)))
        .collect();
    Ok(Snapshot {
        field: Field::new(grid, values)?,
        t,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gaussian;

    #[test]
    fn float_format_roundtrips() {
        for v in [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-7, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = std::env::temp_dir().join(format!("aggdiff-snap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.bin");
        let g = Grid::new(2, 16, 4.0).unwrap();
        let u = gaussian(&g, 1.0, 0.25).unwrap();
        write_snapshot(&u, 0.5, 0.01, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 8 * (5 + 256));
        let s = read_snapshot(&path).unwrap();
        assert_eq!(s.field, u);
        assert_eq!((s.t, s.eps), (0.5, 0.01));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
