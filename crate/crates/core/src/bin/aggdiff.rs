use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use aggdiff::experiments::{self, geometric_eps, FitReport, ResolutionRule, SweepResult};
use aggdiff::inequalities::{check_inequality, standard_parameters};
use aggdiff::{io, parse_config, run, svg, ObservableKey};

const ENSEMBLE_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(
    name = "aggdiff",
    version,
    about = "Aggregation-diffusion simulator and scaling checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its observable series.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an eps sweep and fit the scaling exponents.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        #[arg(long)]
        eps_count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refit an existing sweep CSV.
    Report {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exponent relations and ratio stability of the interpolation
    /// inequalities.
    CheckInequalities {
        #[arg(long)]
        out: PathBuf,
        /// Random fields per inequality.
        #[arg(long, default_value_t = 1000)]
        ensemble: usize,
    },
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn workers() -> Result<usize> {
    match std::env::var("AGGDIFF_WORKERS") {
        Ok(v) => {
            let n: usize = v.parse().with_context(|| {
                format!("AGGDIFF_WORKERS must be a positive integer, got `{v}`")
            })?;
            if n == 0 {
                bail!("AGGDIFF_WORKERS must be positive");
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn report_and_figures(sweep: &SweepResult, out: &Path) -> Result<bool> {
    let reports = experiments::standard_checks(sweep)?;
    io::write_reports_json(&reports, &out.join("fits.json"))?;
    for r in &reports {
        if let Some(pairs) = figure_pairs(sweep, r) {
            svg::emit_loglog_svg(r, &pairs, &out.join(format!("{}.svg", r.observable)))?;
        }
        println!(
            "{} {:<14} slope {:+.4} theory {:+.4} R2 {:.4}{}",
            if r.pass { "PASS" } else { "FAIL" },
            r.observable,
            r.slope,
            r.theory_slope,
            r.r2,
            r.ratio.map_or(String::new(), |q| format!(" ratio {q:.3}"))
        );
    }
    Ok(reports.iter().all(|r| r.pass))
}

type Column = Box<dyn Fn(&experiments::SweepRow) -> Option<f64>>;

fn figure_pairs(sweep: &SweepResult, r: &FitReport) -> Option<Vec<(f64, f64)>> {
    let (kind, idx) = r.observable.rsplit_once('_')?;
    let col: Column = match kind {
        "int_Hm" | "lower_Hm" => {
            let m: usize = idx.parse().ok()?;
            Box::new(move |row| row.hm_integral.get(m).copied())
        }
        "sup_Hm" => {
            let m: usize = idx.parse().ok()?;
            Box::new(move |row| row.hm_sup.get(m).copied())
        }
        "length" => {
            let m: usize = idx.parse().ok()?;
            Box::new(move |row| row.length_scale.get(m).copied())
        }
        "int_Lp" => {
            let p: f64 = idx.parse().ok()?;
            let i = sweep.p_list.iter().position(|&q| q == p)?;
            Box::new(move |row| row.lp_integral.get(i).copied())
        }
        _ => return None,
    };
    sweep.pairs(col).ok()
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = parse_config(&config)?;
            prepare_out(&out)?;
            let result = run(&cfg)?;
            io::write_series_csv(&result.series, &out.join("series.csv"))?;
            io::write_snapshot(
                result.state.field(),
                result.state.time(),
                result.state.eps(),
                &out.join("final.bin"),
            )?;
            std::fs::write(out.join("config.txt"), cfg.to_kv_string())
                .context("writing config.txt")?;
            let m = result.series.column(ObservableKey::Mass)?;
            println!(
                "t = {} steps = {} mass drift = {:.3e} samples = {}",
                result.state.time(),
                result.state.steps(),
                result.mass_drift,
                m.len()
            );
            Ok(true)
        }
        Command::Sweep {
            config,
            eps_min,
            eps_max,
            eps_count,
            out,
        } => {
            let cfg = parse_config(&config)?;
            let eps = geometric_eps(eps_min, eps_max, eps_count)?;
            experiments::check_eps_list(&eps, cfg.dim)?;
            let workers = workers()?;
            prepare_out(&out)?;
            let rule = ResolutionRule::standard(cfg.dim);
            let sweep = experiments::sweep(&cfg, &eps, &rule, workers)?;
            io::write_sweep_csv(&sweep, &out.join("sweep.csv"))?;
            if let Err(e) = sweep.ensure_complete() {
                eprintln!("{e}");
                return Ok(false);
            }
            report_and_figures(&sweep, &out)
        }
        Command::Report { sweep, out } => {
            let data = io::read_sweep_csv(&sweep)?;
            prepare_out(&out)?;
            if let Err(e) = data.ensure_complete() {
                eprintln!("{e}");
                return Ok(false);
            }
            report_and_figures(&data, &out)
        }
        Command::CheckInequalities { out, ensemble } => {
            prepare_out(&out)?;
            let mut reports = Vec::new();
            for (i, params) in standard_parameters()?.into_iter().enumerate() {
                let r = check_inequality(params, ensemble, ENSEMBLE_SEED + i as u64)?;
                println!(
                    "{} {:?} residual {:.1e} dilation drift {:.4} (tol {})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.params,
                    r.relation_residual,
                    r.dilation_drift,
                    r.dilation_tolerance
                );
                reports.push(r);
            }
            let path = out.join("inequalities.json");
            let text = serde_json::to_string_pretty(&reports)?;
            std::fs::write(&path, text + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(reports.iter().all(|r| r.pass))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // clap exits with 2 on usage errors, which is reserved for failed checks
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
