//! Parameter sweeps and the figure presets.
//!
//! A [`SweepConfig`] describes the Cartesian product `alpha_grid x tau_grid`
//! at fixed `zeta` and splitter settings. Points are evaluated in parallel
//! and written in grid order (alpha outer, tau inner), so identical configs
//! give identical bytes.

use std::f64::consts::FRAC_PI_2;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::beam_splitter::BeamSplitterConfig;
use crate::entanglement::{output_entropy, EntropyResult};
use crate::error::{Error, Result};
use crate::model::DeformedOscillator;
use crate::state::{build, converge_truncation, Family, StateSpec, DEFAULT_TAIL_TOL, MIN_NC_LEVELS};

/// First truncation tried in `auto` mode.
pub const AUTO_START: usize = 10;
/// Largest truncation `auto` mode will try before giving up.
pub const AUTO_MAX: usize = 320;

pub const CSV_HEADER: &str = "alpha,tau,zeta_re,zeta_im,theta,levels,linear_entropy,purity,converged,tail_mass";
pub const OVERLAY_HEADER: &str =
    "alpha,s_nc,s_ho,tau,zeta_re,zeta_im,theta,levels,converged_nc,converged_ho,tail_mass_nc,tail_mass_ho";

/// Environment variable read for the worker count when no flag is given.
pub const WORKERS_ENV: &str = "NCSQ_WORKERS";

/// A complex parameter written either as a number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Param(pub Complex64);

impl Param {
    pub fn real(x: f64) -> Self {
        Param(Complex64::new(x, 0.0))
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d) {
            Ok(Repr::Real(x)) => Ok(Param::real(x)),
            Ok(Repr::Pair([re, im])) => Ok(Param(Complex64::new(re, im))),
            Err(_) => Err(de::Error::custom("expected a number or a [re, im] pair")),
        }
    }
}

/// Fock truncation: a fixed level count or automatic doubling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Levels {
    Fixed(usize),
    #[default]
    Auto,
}

impl fmt::Display for Levels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Levels::Fixed(n) => write!(f, "{n}"),
            Levels::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for Levels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Levels::Auto);
        }
        s.parse()
            .map(Levels::Fixed)
            .map_err(|_| Error::invalid(format!("levels must be a positive integer or \"auto\", got {s:?}")))
    }
}

impl Serialize for Levels {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Levels::Fixed(n) => s.serialize_u64(*n as u64),
            Levels::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Levels {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Word(String),
        }
        match Repr::deserialize(d) {
            Ok(Repr::Count(n)) => Ok(Levels::Fixed(n)),
            Ok(Repr::Word(w)) => w.parse().map_err(de::Error::custom),
            Err(_) => Err(de::Error::custom("expected a positive integer or \"auto\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" | "jsonl" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!("output format must be csv or json, got {s:?}"))),
        }
    }
}

fn default_theta() -> f64 {
    FRAC_PI_2
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

fn default_tau_grid() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: Family,
    pub alpha_grid: Vec<Param>,
    #[serde(default)]
    pub zeta: Param,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub levels: Levels,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
    /// Also compute the von Neumann entropy of every point.
    #[serde(default)]
    pub von_neumann: bool,
}

impl SweepConfig {
    /// Config with every optional field at its default.
    pub fn new(family: Family, alpha_grid: Vec<f64>, tau_grid: Vec<f64>) -> Self {
        SweepConfig {
            family,
            alpha_grid: alpha_grid.into_iter().map(Param::real).collect(),
            zeta: Param::default(),
            tau_grid,
            theta: default_theta(),
            phi: 0.0,
            levels: Levels::Auto,
            tail_tol: DEFAULT_TAIL_TOL,
            output_path: None,
            output_format: OutputFormat::Csv,
            von_neumann: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() {
            return Err(Error::invalid("alpha_grid must not be empty"));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::invalid("tau_grid must not be empty"));
        }
        if let Levels::Fixed(n) = self.levels {
            if n < MIN_NC_LEVELS {
                return Err(Error::invalid(format!("levels must be >= {MIN_NC_LEVELS}, got {n}")));
            }
        }
        if !(self.tail_tol.is_finite() && self.tail_tol > 0.0) {
            return Err(Error::invalid(format!("tail_tol must be positive, got {}", self.tail_tol)));
        }
        if !(self.theta.is_finite() && self.phi.is_finite()) {
            return Err(Error::invalid("theta and phi must be finite"));
        }
        if self.output_format == OutputFormat::Csv && self.alpha_grid.iter().any(|a| a.0.im != 0.0) {
            return Err(Error::invalid(
                "complex alpha values need --format json; the CSV schema has a real alpha column",
            ));
        }
        for &tau in &self.tau_grid {
            DeformedOscillator::new(tau)?;
        }
        // catches family/zeta mismatches once, before any work starts
        self.spec(self.alpha_grid[0].0, self.tau_grid[0])?;
        Ok(())
    }

    fn spec(&self, alpha: Complex64, tau: f64) -> Result<StateSpec> {
        StateSpec::new(self.family, alpha, self.zeta.0, DeformedOscillator::new(tau)?)
    }

    /// Grid points in output order.
    pub fn points(&self) -> Vec<(Complex64, f64)> {
        self.alpha_grid.iter().flat_map(|a| self.tau_grid.iter().map(move |&t| (a.0, t))).collect()
    }

    pub fn splitter(&self) -> BeamSplitterConfig {
        BeamSplitterConfig::new(self.theta, self.phi)
    }
}

/// One evaluated grid point, with every parameter resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: Complex64,
    /// Deformation actually used (always 0 for the `ho_*` families).
    pub tau: f64,
    pub zeta: Complex64,
    pub theta: f64,
    pub phi: f64,
    pub result: EntropyResult,
}

/// Evaluate a single state at the given truncation policy.
pub fn evaluate(
    spec: &StateSpec,
    levels: Levels,
    tail_tol: f64,
    bs: &BeamSplitterConfig,
    with_von_neumann: bool,
) -> Result<EntropyResult> {
    let (state, converged) = match levels {
        Levels::Fixed(n) => {
            let state = build(spec, n)?;
            let ok = state.tail_mass() < tail_tol;
            (state, ok)
        }
        Levels::Auto => {
            let start = AUTO_START.max(spec.min_levels());
            let c = converge_truncation(spec, tail_tol, start, AUTO_MAX)?;
            (c.state, c.converged)
        }
    };
    output_entropy(&state, bs, converged, with_von_neumann)
}

fn evaluate_point(cfg: &SweepConfig, alpha: Complex64, tau: f64) -> Result<SweepRow> {
    let spec = cfg.spec(alpha, tau)?;
    let bs = cfg.splitter();
    let result = evaluate(&spec, cfg.levels, cfg.tail_tol, &bs, cfg.von_neumann)?;
    Ok(SweepRow { alpha, tau: spec.effective_model().tau(), zeta: spec.zeta, theta: cfg.theta, phi: cfg.phi, result })
}

/// Run `f` on a pool with `workers` threads, or on the global pool.
fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(0) => Err(Error::invalid("worker count must be >= 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Evaluate every grid point. Unconverged points are kept with
/// `converged = false`; any other failure aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let points = cfg.points();
    let rows: Vec<Result<SweepRow>> =
        with_pool(workers, || points.par_iter().map(|&(a, t)| evaluate_point(cfg, a, t)).collect())?;
    rows.into_iter().collect()
}

/// Shortest decimal that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

impl SweepRow {
    pub fn csv_line(&self, with_von_neumann: bool) -> String {
        let r = &self.result;
        let mut line = [
            fmt_f64(self.alpha.re),
            fmt_f64(self.tau),
            fmt_f64(self.zeta.re),
            fmt_f64(self.zeta.im),
            fmt_f64(self.theta),
            r.truncation.to_string(),
            fmt_f64(r.linear_entropy),
            fmt_f64(r.purity),
            r.converged.to_string(),
            fmt_f64(r.tail_mass),
        ]
        .join(",");
        if with_von_neumann {
            let _ = write!(line, ",{}", r.von_neumann.map(fmt_f64).unwrap_or_default());
        }
        line
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let r = &self.result;
        serde_json::json!({
            "alpha_re": json_f64(self.alpha.re),
            "alpha_im": json_f64(self.alpha.im),
            "zeta_re": json_f64(self.zeta.re),
            "zeta_im": json_f64(self.zeta.im),
            "tau": json_f64(self.tau),
            "theta": json_f64(self.theta),
            "levels": r.truncation,
            "linear_entropy": json_f64(r.linear_entropy),
            "purity": json_f64(r.purity),
            "von_neumann": r.von_neumann.map(json_f64),
            "converged": r.converged,
            "tail_mass": json_f64(r.tail_mass),
        })
    }
}

/// Write rows as CSV (with header) or JSON lines.
pub fn write_rows(out: &mut impl Write, rows: &[SweepRow], format: OutputFormat, with_von_neumann: bool) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let extra = if with_von_neumann { ",von_neumann" } else { "" };
            writeln!(out, "{CSV_HEADER}{extra}")?;
            for row in rows {
                writeln!(out, "{}", row.csv_line(with_von_neumann))?;
            }
        }
        OutputFormat::Json => {
            for row in rows {
                writeln!(out, "{}", row.to_json_value())?;
            }
        }
    }
    Ok(())
}

/// `start + (stop - start) * i / intervals` for `i = 0..=intervals`.
pub fn linear_grid(start: f64, stop: f64, intervals: usize) -> Vec<f64> {
    if intervals == 0 {
        return vec![start];
    }
    (0..=intervals).map(|i| start + (stop - start) * i as f64 / intervals as f64).collect()
}

/// Parse `"0,0.5,1"` or `"start:stop:step"` into a grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::invalid(format!("bad grid value {s:?} in {text:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 || stop < start {
                return Err(Error::invalid(format!("range {text:?} needs start <= stop and step > 0")));
            }
            let intervals = ((stop - start) / step).round();
            if ((stop - start) - intervals * step).abs() > 1e-9 * step.max(stop - start) {
                return Err(Error::invalid(format!("step in {text:?} does not divide the range")));
            }
            Ok(linear_grid(start, stop, intervals as usize))
        }
        [list] => list.split(',').map(number).collect(),
        _ => Err(Error::invalid(format!("grid {text:?} must be a comma list or start:stop:step"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigurePreset {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 5] =
        [FigurePreset::Fig1a, FigurePreset::Fig1b, FigurePreset::Fig2a, FigurePreset::Fig2b, FigurePreset::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig1a => "fig1a",
            FigurePreset::Fig1b => "fig1b",
            FigurePreset::Fig2a => "fig2a",
            FigurePreset::Fig2b => "fig2b",
            FigurePreset::Fig3 => "fig3",
        }
    }

    pub fn is_overlay(self) -> bool {
        matches!(self, FigurePreset::Fig2a | FigurePreset::Fig2b)
    }

    /// The resolved sweeps behind this figure. Overlay figures return the
    /// deformed sweep first and its undeformed counterpart second.
    pub fn configs(self) -> Vec<SweepConfig> {
        let fixed = |family, alpha, tau, zeta: f64, levels| SweepConfig {
            zeta: Param::real(zeta),
            levels: Levels::Fixed(levels),
            ..SweepConfig::new(family, alpha, tau)
        };
        match self {
            FigurePreset::Fig1a => {
                vec![fixed(Family::NcCoherent, linear_grid(0.0, 3.0, 60), vec![0.0, 0.1, 0.2, 0.3, 0.5], 0.0, 20)]
            }
            FigurePreset::Fig1b => {
                vec![fixed(Family::NcCoherent, linear_grid(0.0, 3.0, 30), linear_grid(0.0, 1.0, 20), 0.0, 20)]
            }
            FigurePreset::Fig2a | FigurePreset::Fig2b => {
                let zeta = if self == FigurePreset::Fig2a { 0.75 } else { 0.25 };
                let alpha = linear_grid(0.0, 3.0, 60);
                vec![
                    fixed(Family::NcSqueezed, alpha.clone(), vec![0.5], zeta, 40),
                    fixed(Family::HoSqueezed, alpha, vec![0.0], zeta, 40),
                ]
            }
            FigurePreset::Fig3 => {
                vec![fixed(Family::NcSqueezed, linear_grid(0.0, 3.0, 30), linear_grid(0.0, 1.0, 20), 0.5, 10)]
            }
        }
    }
}

impl fmt::Display for FigurePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigurePreset::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            Error::invalid(format!("unknown figure {s:?}; expected one of fig1a, fig1b, fig2a, fig2b, fig3"))
        })
    }
}

/// Deformed and undeformed entropy at the same alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayRow {
    pub nc: SweepRow,
    pub ho: SweepRow,
}

impl OverlayRow {
    pub fn csv_line(&self) -> String {
        let (nc, ho) = (&self.nc, &self.ho);
        [
            fmt_f64(nc.alpha.re),
            fmt_f64(nc.result.linear_entropy),
            fmt_f64(ho.result.linear_entropy),
            fmt_f64(nc.tau),
            fmt_f64(nc.zeta.re),
            fmt_f64(nc.zeta.im),
            fmt_f64(nc.theta),
            nc.result.truncation.to_string(),
            nc.result.converged.to_string(),
            ho.result.converged.to_string(),
            fmt_f64(nc.result.tail_mass),
            fmt_f64(ho.result.tail_mass),
        ]
        .join(",")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let (nc, ho) = (&self.nc, &self.ho);
        serde_json::json!({
            "alpha": json_f64(nc.alpha.re),
            "s_nc": json_f64(nc.result.linear_entropy),
            "s_ho": json_f64(ho.result.linear_entropy),
            "tau": json_f64(nc.tau),
            "zeta_re": json_f64(nc.zeta.re),
            "zeta_im": json_f64(nc.zeta.im),
            "theta": json_f64(nc.theta),
            "levels": nc.result.truncation,
            "converged_nc": nc.result.converged,
            "converged_ho": ho.result.converged,
            "tail_mass_nc": json_f64(nc.result.tail_mass),
            "tail_mass_ho": json_f64(ho.result.tail_mass),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureData {
    Surface(Vec<SweepRow>),
    Overlay(Vec<OverlayRow>),
}

impl FigureData {
    pub fn unconverged(&self) -> usize {
        match self {
            FigureData::Surface(rows) => rows.iter().filter(|r| !r.result.converged).count(),
            FigureData::Overlay(rows) => {
                rows.iter().filter(|r| !(r.nc.result.converged && r.ho.result.converged)).count()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FigureData::Surface(rows) => rows.len(),
            FigureData::Overlay(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write(&self, out: &mut impl Write, format: OutputFormat) -> Result<()> {
        match self {
            FigureData::Surface(rows) => write_rows(out, rows, format, false),
            FigureData::Overlay(rows) => {
                if format == OutputFormat::Csv {
                    writeln!(out, "{OVERLAY_HEADER}")?;
                }
                for row in rows {
                    match format {
                        OutputFormat::Csv => writeln!(out, "{}", row.csv_line())?,
                        OutputFormat::Json => writeln!(out, "{}", row.to_json_value())?,
                    }
                }
                Ok(())
            }
        }
    }
}

pub fn run_figure(preset: FigurePreset, workers: Option<usize>) -> Result<FigureData> {
    let mut sweeps = preset.configs().into_iter().map(|cfg| run_sweep(&cfg, workers)).collect::<Result<Vec<_>>>()?;
    if preset.is_overlay() {
        let ho = sweeps.pop().unwrap_or_default();
        let nc = sweeps.pop().unwrap_or_default();
        Ok(FigureData::Overlay(nc.into_iter().zip(ho).map(|(nc, ho)| OverlayRow { nc, ho }).collect()))
    } else {
        Ok(FigureData::Surface(sweeps.into_iter().flatten().collect()))
    }
}

/// Contents of the `<output>.meta.json` sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<FigurePreset>,
    pub configs: &'a [SweepConfig],
    pub columns: Vec<&'static str>,
    pub rows: usize,
    pub unconverged: usize,
    pub auto_levels: (usize, usize),
}

impl<'a> Metadata<'a> {
    pub fn new(configs: &'a [SweepConfig], figure: Option<FigurePreset>, rows: usize, unconverged: usize) -> Self {
        let header = if figure.is_some_and(FigurePreset::is_overlay) { OVERLAY_HEADER } else { CSV_HEADER };
        Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            figure,
            configs,
            columns: header.split(',').collect(),
            rows,
            unconverged,
            auto_levels: (AUTO_START, AUTO_MAX),
        }
    }
}

/// `results.csv` -> `results.csv.meta.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_sidecar(output: &Path, meta: &Metadata<'_>) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(sidecar_path(output), text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_accept_numbers_and_pairs() {
        let p: Vec<Param> = serde_json::from_str("[1.5, [0.5, -2]]").unwrap();
        assert_eq!(p, vec![Param::real(1.5), Param(Complex64::new(0.5, -2.0))]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1.5,[0.5,-2.0]]");
        assert!(serde_json::from_str::<Param>("\"x\"").is_err());
    }

    #[test]
    fn levels_parse() {
        assert_eq!("auto".parse::<Levels>().unwrap(), Levels::Auto);
        assert_eq!("20".parse::<Levels>().unwrap(), Levels::Fixed(20));
        assert!("-3".parse::<Levels>().is_err());
        assert_eq!(serde_json::from_str::<Levels>("\"auto\"").unwrap(), Levels::Auto);
        assert_eq!(serde_json::from_str::<Levels>("12").unwrap(), Levels::Fixed(12));
    }

    #[test]
    fn config_defaults_from_json() {
        let cfg = SweepConfig::from_json(r#"{"family": "nc_coherent", "alpha_grid": [0, 1]}"#).unwrap();
        assert_eq!(cfg.theta, FRAC_PI_2);
        assert_eq!(cfg.phi, 0.0);
        assert_eq!(cfg.levels, Levels::Auto);
        assert_eq!(cfg.tail_tol, 1e-8);
        assert_eq!(cfg.tau_grid, vec![0.0]);
        assert!(SweepConfig::from_json(r#"{"family": "nc_coherent", "alpha_grid": [0], "bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        let ok = SweepConfig::new(Family::NcCoherent, vec![0.0], vec![0.0]);
        assert!(ok.validate().is_ok());
        assert!(SweepConfig { alpha_grid: vec![], ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { tau_grid: vec![], ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { levels: Levels::Fixed(7), ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { zeta: Param::real(0.5), ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { tau_grid: vec![-0.1], ..ok.clone() }.validate().is_err());
        let complex = SweepConfig { alpha_grid: vec![Param(Complex64::new(1.0, 1.0))], ..ok.clone() };
        assert!(complex.validate().is_err());
        assert!(SweepConfig { output_format: OutputFormat::Json, ..complex }.validate().is_ok());
    }

    #[test]
    fn grid_order_is_alpha_major() {
        let cfg = SweepConfig {
            levels: Levels::Fixed(20),
            ..SweepConfig::new(Family::NcCoherent, vec![0.0, 0.5, 1.0], vec![0.0, 0.5])
        };
        let rows = run_sweep(&cfg, Some(3)).unwrap();
        let got: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha.re, r.tau)).collect();
        assert_eq!(got, vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5), (1.0, 0.0), (1.0, 0.5)]);
        assert!(rows.iter().all(|r| r.result.truncation == 20));
    }

    #[test]
    fn unconverged_points_are_kept() {
        let cfg = SweepConfig {
            levels: Levels::Fixed(8),
            tail_tol: 1e-12,
            ..SweepConfig::new(Family::NcCoherent, vec![0.0, 3.0], vec![0.5])
        };
        let rows = run_sweep(&cfg, None).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].result.converged);
        assert!(!rows[1].result.converged);
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(1e-20), "1e-20");
        let cfg =
            SweepConfig { levels: Levels::Fixed(8), ..SweepConfig::new(Family::NcCoherent, vec![0.0], vec![0.0]) };
        let mut buf = Vec::new();
        write_rows(&mut buf, &run_sweep(&cfg, None).unwrap(), OutputFormat::Csv, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "0.0,0.0,0.0,0.0,1.5707963267948966,8,0.0,1.0,true,0.0");
    }

    #[test]
    fn linear_grid_prints_cleanly() {
        let g = linear_grid(0.0, 3.0, 60);
        assert_eq!(g.len(), 61);
        assert_eq!(fmt_f64(g[1]), "0.05");
        assert_eq!(fmt_f64(g[7]), "0.35");
        assert_eq!(g[60], 3.0);
        assert_eq!(linear_grid(0.0, 1.0, 20)[3], 0.15);
    }

    #[test]
    fn presets_match_level_counts() {
        let levels = |p: FigurePreset| p.configs().iter().map(|c| c.levels).collect::<Vec<_>>();
        assert_eq!(levels(FigurePreset::Fig1a), vec![Levels::Fixed(20)]);
        assert_eq!(levels(FigurePreset::Fig1b), vec![Levels::Fixed(20)]);
        assert_eq!(levels(FigurePreset::Fig2a), vec![Levels::Fixed(40); 2]);
        assert_eq!(levels(FigurePreset::Fig3), vec![Levels::Fixed(10)]);
        let fig3 = &FigurePreset::Fig3.configs()[0];
        assert_eq!(fig3.zeta, Param::real(0.5));
        assert_eq!(fig3.points().len(), 31 * 21);
        for p in FigurePreset::ALL {
            for cfg in p.configs() {
                assert_eq!(cfg.phi, 0.0);
                assert_eq!(cfg.theta, FRAC_PI_2);
                cfg.validate().unwrap();
            }
            assert_eq!(p.name().parse::<FigurePreset>().unwrap(), p);
        }
        assert!("fig4".parse::<FigurePreset>().is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("-1:1:1").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("0:3:0.05").unwrap(), linear_grid(0.0, 3.0, 60));
        assert!(parse_grid("0:1:0.3").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/fig3.csv")), PathBuf::from("out/fig3.csv.meta.json"));
    }
}
