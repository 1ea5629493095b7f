//! Command-line front end: filter design checks, transient prediction,
//! experiment runs and comparison sweeps.

mod config;
mod manifest;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use daglms_core::adaptive::DagCoefficients;
use daglms_core::analysis::{sensitivity_step_response, SensitivityModel};
use daglms_core::design;
use daglms_core::experiments::run_scenario;
use daglms_core::metrics::fmt_f64;
use daglms_core::{Error, MetricSeries, Result};

use config::SweepFile;
use manifest::{load_config_or_manifest, RunManifest};
use output::{atomic_write, ComparisonRow};

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "daglms",
    version,
    about = "Variable step-size LMS adaptation with dynamic adaptation-gain filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a gain filter: SPR/PR verdicts, steady-state gain, log-gain
    /// integral; optionally emit Bode and admissibility-contour data.
    Design(DesignArgs),
    /// Predict the adaptation transient of the linearized loop.
    Transient(TransientArgs),
    /// Run one experiment from a config file (or re-run a manifest).
    Run(RunArgs),
    /// Compare several (algorithm, filter) settings on one scenario.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DagArgs {
    /// First numerator coefficient.
    #[arg(long, default_value_t = 0.0)]
    c1: f64,
    /// Second numerator coefficient.
    #[arg(long, default_value_t = 0.0)]
    c2: f64,
    /// First denominator coefficient.
    #[arg(long, default_value_t = 0.0)]
    d1p: f64,
    /// TOML file with `c = [...]` and `d_prime = [...]` for higher orders
    /// (overrides --c1/--c2/--d1p).
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

impl DagArgs {
    fn resolve(&self) -> Result<DagCoefficients> {
        if let Some(path) = &self.coeffs {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let section: config::DagSection = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            DagCoefficients::new(section.c, section.d_prime)
        } else {
            DagCoefficients::arima2(self.c1, self.c2, self.d1p)
        }
    }
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    dag: DagArgs,
    /// Frequency-grid size for sweeps.
    #[arg(long, default_value_t = design::DEFAULT_GRID)]
    grid_size: usize,
    /// Write Bode data (omega_rad, mag_db, phase_deg, real_part) here.
    #[arg(long)]
    bode: Option<PathBuf>,
    /// Write admissibility contours (c1, c2, boundary_id) here, traced for
    /// the --d1p value.
    #[arg(long)]
    contour: Option<PathBuf>,
    /// Contour resolution (points per boundary branch).
    #[arg(long, default_value_t = 81)]
    contour_resolution: usize,
}

#[derive(Args)]
struct TransientArgs {
    #[command(flatten)]
    dag: DagArgs,
    /// Linearized loop gain.
    #[arg(long)]
    g: f64,
    /// Samples to simulate.
    #[arg(long, default_value_t = 4000)]
    horizon: usize,
    /// Overlay a measured run: a metrics CSV with a d_squared column. The
    /// output then carries (t, wtilde, predicted_wtilde).
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Write the trajectory here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a line chart of the trajectory here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML), or a manifest from a previous run.
    config: PathBuf,
    /// Output directory (default: $DAGLMS_OUT_DIR or the working
    /// directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write a line chart of the headline metric here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep file (TOML): a [base] scenario plus [[entries]].
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for running entries concurrently (0 = one per core).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
}

fn main() -> ExitCode {
    // die quietly when the read end of a pipe goes away, like any
    // well-behaved filter
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Design(args) => cmd_design(args),
        Command::Transient(args) => cmd_transient(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) | Error::Ingestion(_) | Error::Domain(_) => {
                    ExitCode::from(EXIT_CONFIG)
                }
                Error::Divergence { .. } => ExitCode::from(EXIT_DIVERGENCE),
                Error::Numeric(_) => ExitCode::FAILURE,
            }
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("DAGLMS_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_design(args: DesignArgs) -> Result<()> {
    let dag = args.dag.resolve()?;
    println!(
        "filter: C = 1 {} | D' = 1 {}",
        dag.c()
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:+} q^-{}", c, i + 1))
            .collect::<Vec<_>>()
            .join(" "),
        dag.d_prime()
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{:+} q^-{}", -d, i + 1))
            .collect::<Vec<_>>()
            .join(" "),
    );
    let verdict = design::spr_sweep_oracle(&dag, args.grid_size);
    match verdict.criterion_verdict {
        Some(v) => println!("spr (closed form):      {}", yesno(v)),
        None => println!("spr (closed form):      n/a (beyond second-order shape)"),
    }
    println!(
        "spr (frequency sweep):  {}   min Re = {:.6e} at omega = {:.4}",
        yesno(verdict.sweep_verdict),
        verdict.min_real_part,
        verdict.argmin_omega
    );
    println!(
        "operator pr:            {}",
        yesno(design::paa_pr_check(&dag, args.grid_size))
    );
    match design::steady_state_gain(&dag) {
        Ok(ssg) => println!("steady-state gain:      {ssg:.6}"),
        Err(e) => println!("steady-state gain:      undefined ({e})"),
    }
    match design::log_gain_integral(&dag, args.grid_size.max(16_384)) {
        Ok(integral) => println!("log-gain integral:      {integral:.3e}"),
        Err(_) => println!("log-gain integral:      undefined (roots on or outside the circle)"),
    }
    if let Some(path) = &args.bode {
        let resp = design::bode(&dag, args.grid_size);
        atomic_write(path, output::bode_csv(&resp).as_bytes())?;
        println!("bode data -> {}", path.display());
    }
    if let Some(path) = &args.contour {
        let d1p = dag.d_prime().first().copied().unwrap_or(0.0);
        let points = design::contour_trace(d1p, args.contour_resolution)?;
        atomic_write(path, output::contour_csv(&points).as_bytes())?;
        println!("contours (d1' = {d1p}) -> {}", path.display());
    }
    Ok(())
}

fn yesno(v: bool) -> &'static str {
    if v {
        "yes"
    } else {
        "no"
    }
}

/// Pull the d_squared column out of a metrics CSV, normalized to a unit
/// starting error.
fn measured_wtilde(path: &std::path::Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    let col = header
        .split(',')
        .position(|h| h == "d_squared")
        .ok_or_else(|| Error::Config(format!("{}: no d_squared column", path.display())))?;
    let mut d2 = Vec::new();
    for line in lines {
        let field = line.split(',').nth(col).unwrap_or("");
        if field.is_empty() {
            return Err(Error::Config(format!(
                "{}: run carries no parametric distance",
                path.display()
            )));
        }
        d2.push(
            field
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        );
    }
    let d0 = d2.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    Ok(d2.iter().map(|d| (d / d0).sqrt()).collect())
}

fn cmd_transient(args: TransientArgs) -> Result<()> {
    let dag = args.dag.resolve()?;
    let model = SensitivityModel::new(args.g, dag)?;
    let measured = args.compare.as_deref().map(measured_wtilde).transpose()?;
    let horizon = measured.as_ref().map(|m| m.len()).unwrap_or(args.horizon);
    let report = sensitivity_step_response(&model, horizon);
    if !report.stable {
        println!("closed loop: UNSTABLE (settling undefined)");
    } else {
        match report.settling_time {
            Some(t) => println!("settling time: {t} samples (0.1% band)"),
            None => println!("settling time: beyond horizon {horizon}"),
        }
        if let Some(s) = report.predicted_speedup {
            println!("predicted speedup vs plain loop: {s:.2}x");
        }
    }
    if let Some(path) = &args.out {
        let mut csv = String::new();
        match &measured {
            Some(m) => {
                csv.push_str("t,wtilde,predicted_wtilde\n");
                for (t, (w, p)) in m.iter().zip(&report.step_response).enumerate() {
                    csv.push_str(&format!("{t},{},{}\n", fmt_f64(*w), fmt_f64(*p)));
                }
            }
            None => {
                csv.push_str("t,wtilde\n");
                for (t, w) in report.step_response.iter().enumerate() {
                    csv.push_str(&format!("{t},{}\n", fmt_f64(*w)));
                }
            }
        }
        atomic_write(path, csv.as_bytes())?;
        println!("trajectory -> {}", path.display());
    }
    if let Some(path) = &args.svg {
        let mut series = vec![svg::Series {
            label: "predicted",
            values: &report.step_response,
            color: "#1965b0",
        }];
        if let Some(m) = &measured {
            series.push(svg::Series {
                label: "measured",
                values: m,
                color: "#dc050c",
            });
        }
        let chart = svg::line_chart(
            "adaptation transient (linearized loop)",
            "parameter error",
            &series,
        );
        atomic_write(path, chart.as_bytes())?;
        println!("chart -> {}", path.display());
    }
    Ok(())
}

fn headline_series(series: &MetricSeries) -> (&'static str, &[f64]) {
    if !series.attenuation_db.is_empty() {
        ("attenuation_db", &series.attenuation_db)
    } else if !series.d_squared.is_empty() {
        ("d_squared", &series.d_squared)
    } else {
        ("mse_db", &series.mse_db)
    }
}

fn print_summary(series: &MetricSeries) {
    let s = &series.summary;
    if let Some(t) = s.convergence_time {
        println!("convergence time (-40 dB): {t} samples");
    }
    if let Some(v) = s.sum_mse {
        println!("sum of squared errors (first 3200): {v:.6}");
    }
    if let Some(v) = s.j_d_final {
        println!("J_D: {v:.6}");
    }
    if let Some(v) = s.j_eps_final {
        println!("J_eps: {v:.6}");
    }
    if let Some(v) = s.terminal_d_squared {
        println!("terminal parametric distance^2: {v:.6e}");
    }
    if let Some(v) = s.terminal_attenuation_db {
        println!("terminal attenuation: {v:.2} dB");
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let (mut file, manifest_seed) = load_config_or_manifest(&text)?;
    if let Some(seed) = args.seed.or(manifest_seed) {
        file.rng_seed = Some(seed);
    }
    let cfg = file.resolve()?;
    let dir = out_dir(args.out_dir);

    let started = Instant::now();
    let series = run_scenario(&cfg)?;
    let elapsed = started.elapsed();

    let metrics_path = dir.join("metrics.csv");
    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    atomic_write(&metrics_path, &buf)?;

    let mut manifest = RunManifest::new(file, cfg.rng_seed);
    manifest.wall_clock_seconds = elapsed.as_secs_f64();
    manifest.outputs.push("metrics.csv".into());
    atomic_write(
        dir.join("manifest.toml").as_path(),
        manifest.to_toml().as_bytes(),
    )?;

    println!(
        "{}: {} samples x {} run(s) in {elapsed:.2?}",
        cfg.scenario.name(),
        cfg.horizon,
        cfg.monte_carlo_runs
    );
    print_summary(&series);
    println!("metrics -> {}", metrics_path.display());

    if let Some(path) = &args.svg {
        let (label, values) = headline_series(&series);
        let chart = svg::line_chart(
            cfg.scenario.name(),
            label,
            &[svg::Series {
                label,
                values,
                color: "#1965b0",
            }],
        );
        atomic_write(path, chart.as_bytes())?;
        println!("chart -> {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let mut sweep = SweepFile::parse(&text)?;
    if let Some(seed) = args.seed {
        sweep.base.rng_seed = Some(seed);
    }
    if sweep.entries.is_empty() {
        return Err(Error::Config("sweep has no entries".into()));
    }
    let dir = out_dir(args.out_dir);

    let run_entry = |entry: &config::SweepEntry| -> Result<(String, MetricSeries)> {
        let cfg = sweep.resolve_entry(entry)?;
        let series = run_scenario(&cfg)?;
        Ok((entry.label.clone(), series))
    };
    let results: Vec<(String, MetricSeries)> = if args.parallel == 1 {
        sweep.entries.iter().map(run_entry).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.parallel)
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            sweep
                .entries
                .par_iter()
                .map(run_entry)
                .collect::<Result<_>>()
        })?
    };

    let mut rows = Vec::new();
    for (label, series) in &results {
        let csv_path = dir.join(format!("{label}.csv"));
        let mut buf = Vec::new();
        series.write_csv(&mut buf)?;
        atomic_write(&csv_path, &buf)?;
        let s = &series.summary;
        rows.push(ComparisonRow {
            label: label.clone(),
            convergence_time: s.convergence_time,
            sum_mse: s.sum_mse,
            j_d: s.j_d_final,
            j_eps: s.j_eps_final,
            terminal_attenuation_db: s.terminal_attenuation_db,
        });
    }
    atomic_write(
        dir.join("comparison.csv").as_path(),
        output::comparison_csv(&rows).as_bytes(),
    )?;
    print!("{}", output::comparison_table(&rows));
    println!("comparison -> {}", dir.join("comparison.csv").display());
    Ok(())
}
