use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;
use ncsq::beam_splitter::BeamSplitterConfig;
use ncsq::model::DeformedOscillator;
use ncsq::state::{build, converge_truncation, normalize, Family, StateSpec, DEFAULT_TAIL_TOL};
use ncsq::sweep::{
    evaluate, parse_grid, run_figure, run_sweep, write_rows, write_sidecar, FigurePreset, Levels, Metadata,
    OutputFormat, Param, SweepConfig, SweepRow, AUTO_MAX, AUTO_START, WORKERS_ENV,
};
use ncsq::{Error, Result};
use num_complex::Complex64;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNCONVERGED: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

/// Deformed-oscillator coherent and squeezed states and their beam-splitter entanglement.
#[derive(Parser)]
#[command(name = "ncsq", version)]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one normalized input state and print it as JSON.
    State {
        #[command(flatten)]
        state: StateArgs,
        /// Write to this file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Entropy of one input state after the beam splitter.
    Entropy {
        #[command(flatten)]
        state: StateArgs,
        /// Use the raw Fock state |K> as input instead of a state family.
        #[arg(long, value_name = "K", conflicts_with_all = ["family", "alpha", "alpha_im", "zeta", "zeta_im", "tau"])]
        fock: Option<usize>,
        #[command(flatten)]
        splitter: SplitterArgs,
        /// Also report the von Neumann entropy in bits.
        #[arg(long)]
        von_neumann: bool,
        #[arg(long, default_value = "json")]
        format: OutputFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a grid of parameter points.
    Sweep(SweepArgs),
    /// Regenerate the data behind a figure preset.
    Figure {
        /// One of fig1a, fig1b, fig2a, fig2b, fig3.
        name: FigurePreset,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads (default: $NCSQ_WORKERS, else one per core).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in fixed-point and cross-check suite.
    Selftest,
}

#[derive(Args)]
struct StateArgs {
    /// nc-coherent, nc-squeezed, ho-coherent or ho-squeezed.
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_im: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    zeta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    zeta_im: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Fock truncation N, or "auto" to double until the tail is below --tail-tol.
    #[arg(long, default_value = "auto")]
    levels: Levels,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
}

impl StateArgs {
    fn spec(&self) -> Result<StateSpec> {
        let family = self.family.ok_or_else(|| Error::InvalidParameter("--family is required".into()))?;
        StateSpec::new(
            family,
            Complex64::new(self.alpha, self.alpha_im),
            Complex64::new(self.zeta, self.zeta_im),
            DeformedOscillator::new(self.tau)?,
        )
    }
}

#[derive(Args)]
struct SplitterArgs {
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with SweepConfig fields; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    /// Comma-separated values or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    alpha_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau_grid: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    zeta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    zeta_im: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long)]
    levels: Option<Levels>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    von_neumann: bool,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: $NCSQ_WORKERS, else one per core).
    #[arg(long)]
    workers: Option<usize>,
}

impl SweepArgs {
    fn resolve(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_file(path)?,
            None => {
                let family =
                    self.family.ok_or_else(|| Error::InvalidParameter("--family or --config is required".into()))?;
                let Some(alpha) = &self.alpha_grid else {
                    return Err(Error::InvalidParameter("--alpha-grid or --config is required".into()));
                };
                SweepConfig::new(family, parse_grid(alpha)?, vec![0.0])
            }
        };
        if let Some(f) = self.family {
            cfg.family = f;
        }
        if let Some(g) = &self.alpha_grid {
            cfg.alpha_grid = parse_grid(g)?.into_iter().map(Param::real).collect();
        }
        if let Some(g) = &self.tau_grid {
            cfg.tau_grid = parse_grid(g)?;
        }
        if self.zeta.is_some() || self.zeta_im.is_some() {
            cfg.zeta = Param(Complex64::new(self.zeta.unwrap_or(cfg.zeta.0.re), self.zeta_im.unwrap_or(cfg.zeta.0.im)));
        }
        if let Some(x) = self.theta {
            cfg.theta = x;
        }
        if let Some(x) = self.phi {
            cfg.phi = x;
        }
        if let Some(x) = self.levels {
            cfg.levels = x;
        }
        if let Some(x) = self.tail_tol {
            cfg.tail_tol = x;
        }
        if let Some(x) = self.format {
            cfg.output_format = x;
        }
        if self.output.is_some() {
            cfg.output_path = self.output.clone();
        }
        cfg.von_neumann |= self.von_neumann;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn workers(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_state(args: &StateArgs, output: Option<&Path>) -> Result<bool> {
    let spec = args.spec()?;
    let (state, converged) = match args.levels {
        Levels::Fixed(n) => {
            let s = build(&spec, n)?;
            let ok = s.tail_mass() < args.tail_tol;
            (s, ok)
        }
        Levels::Auto => {
            let c = converge_truncation(&spec, args.tail_tol, AUTO_START.max(spec.min_levels()), AUTO_MAX)?;
            (c.state, c.converged)
        }
    };
    let mut out = open_output(output)?;
    writeln!(out, "{}", state.to_json()?)?;
    out.flush()?;
    Ok(converged)
}

fn cmd_entropy(
    args: &StateArgs,
    fock: Option<usize>,
    splitter: &SplitterArgs,
    von_neumann: bool,
    format: OutputFormat,
    output: Option<&Path>,
) -> Result<bool> {
    let bs = BeamSplitterConfig::new(splitter.theta, splitter.phi);
    let row = match fock {
        Some(k) => {
            let levels = match args.levels {
                Levels::Fixed(n) => n.max(k),
                Levels::Auto => k,
            };
            let mut raw = vec![Complex64::new(0.0, 0.0); levels + 1];
            raw[k] = Complex64::new(1.0, 0.0);
            let result = ncsq::entanglement::output_entropy(&normalize(&raw)?, &bs, true, von_neumann)?;
            SweepRow {
                alpha: Complex64::default(),
                tau: 0.0,
                zeta: Complex64::default(),
                theta: bs.theta(),
                phi: bs.phi(),
                result,
            }
        }
        None => {
            let spec = args.spec()?;
            let result = evaluate(&spec, args.levels, args.tail_tol, &bs, von_neumann)?;
            SweepRow {
                alpha: spec.alpha,
                tau: spec.effective_model().tau(),
                zeta: spec.zeta,
                theta: bs.theta(),
                phi: bs.phi(),
                result,
            }
        }
    };
    let mut out = open_output(output)?;
    write_rows(&mut out, &[row], format, von_neumann)?;
    out.flush()?;
    Ok(row.result.converged)
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let cfg = args.resolve()?;
    let rows = run_sweep(&cfg, workers(args.workers)?)?;
    let unconverged = rows.iter().filter(|r| !r.result.converged).count();
    let mut out = open_output(cfg.output_path.as_deref())?;
    write_rows(&mut out, &rows, cfg.output_format, cfg.von_neumann)?;
    out.flush()?;
    if let Some(path) = &cfg.output_path {
        write_sidecar(path, &Metadata::new(std::slice::from_ref(&cfg), None, rows.len(), unconverged))?;
    }
    report_unconverged(unconverged, rows.len());
    Ok(unconverged == 0)
}

fn cmd_figure(
    preset: FigurePreset,
    format: OutputFormat,
    output: Option<&Path>,
    flag_workers: Option<usize>,
) -> Result<bool> {
    let data = run_figure(preset, workers(flag_workers)?)?;
    let mut out = open_output(output)?;
    data.write(&mut out, format)?;
    out.flush()?;
    let unconverged = data.unconverged();
    if let Some(path) = output {
        let mut configs = preset.configs();
        for cfg in &mut configs {
            cfg.output_path = Some(path.to_path_buf());
            cfg.output_format = format;
        }
        write_sidecar(path, &Metadata::new(&configs, Some(preset), data.len(), unconverged))?;
    }
    report_unconverged(unconverged, data.len());
    Ok(unconverged == 0)
}

fn report_unconverged(unconverged: usize, total: usize) {
    if unconverged > 0 {
        eprintln!("warning: {unconverged} of {total} points did not reach the tail tolerance (converged=false)");
    }
}

fn cmd_selftest() -> Result<bool> {
    let checks = ncsq::selftest::run()?;
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        println!("{} {} ({:.3e} <= {:.0e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    Ok(all)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Json(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::Degenerate(_) | Error::ZeroVector | Error::NoConvergence { .. } => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = matches!(cli.command, Command::Sweep(_) | Command::Figure { .. } | Command::Selftest);
    let base = if quiet { LevelFilter::Error } else { LevelFilter::Warn };
    let level = match cli.verbose {
        0 => base,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let outcome = match &cli.command {
        Command::State { state, output } => cmd_state(state, output.as_deref()),
        Command::Entropy { state, fock, splitter, von_neumann, format, output } => {
            cmd_entropy(state, *fock, splitter, *von_neumann, *format, output.as_deref())
        }
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figure { name, format, output, workers } => cmd_figure(*name, *format, output.as_deref(), *workers),
        Command::Selftest => cmd_selftest(),
    };
    let failed = if matches!(cli.command, Command::Selftest) { EXIT_NUMERIC } else { EXIT_UNCONVERGED };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(failed),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
