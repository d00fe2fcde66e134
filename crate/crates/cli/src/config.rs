//! Command-line and configuration-file parsing.
//!
//! Every flag has a counterpart in the TOML configuration file: the model
//! flags live in a `[model]` table, command-specific flags in a table named
//! after the command, and `output`/`format` at the top level. Unknown keys
//! are rejected and flags given on the command line win over the file.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};

use crate::error::{CliError, CliResult};

/// Atomic frequency ω_a/κ of the running example.
pub const DEFAULT_OMEGA_A: f64 = 10.0;
/// Thermal occupation of the cavity at ω_a in the running example.
pub const DEFAULT_N_A: f64 = 1e3;
pub const DEFAULT_QMAX: i32 = thermosqueeze::modulation::DEFAULT_QMAX;
/// Environment variable bounding the number of scan worker threads.
pub const THREADS_ENV: &str = "THERMOSQUEEZE_THREADS";

/// A real number written as a decimal, a fraction (`2/3`), a product
/// (`2*pi*1e9`) or with a factor of π (`pi/2`, `2pi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Number(pub f64);

fn parse_atom(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("invalid number '{s}'");
    if let Some(head) = s.strip_suffix("pi") {
        return match head.trim() {
            "" | "+" => Ok(PI),
            "-" => Ok(-PI),
            h => h.parse::<f64>().map(|k| k * PI).map_err(|_| bad()),
        };
    }
    s.parse::<f64>().map_err(|_| bad())
}

fn parse_product(s: &str) -> Result<f64, String> {
    s.split('*').map(parse_atom).product()
}

/// Parses the [`Number`] syntax.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let d = parse_product(b)?;
            if d == 0.0 {
                return Err(format!("division by zero in '{s}'"));
            }
            parse_product(a)? / d
        }
        None => parse_product(s)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not a finite number"))
    }
}

impl FromStr for Number {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_number(s).map(Number)
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Number(v as f64)),
            Raw::Float(v) => Ok(Number(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Output layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated table after `#` comment lines.
    Csv,
    /// `key = value` lines after `#` comment lines.
    Keyvalue,
}

#[derive(Debug, Parser)]
#[command(
    name = "thermosqueeze",
    version,
    about = "Effective squeezed-reservoir coefficients of a modulated two-level atom",
    long_about = "Effective squeezed-reservoir coefficients of a modulated two-level atom.\n\n\
        Units: frequencies in units of the cavity linewidth kappa, rates in units of gamma_c; \
        the rydberg and estimate commands use SI units."
)]
pub struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write results to this file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Master-equation coefficients and squeezing report for one parameter set.
    Coeffs(ModelArgs),
    /// Coefficient report over a one-dimensional parameter grid.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Reservoir response gamma_T and Delta_T on a frequency grid.
    Response {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: ResponseArgs,
    },
    /// Bloch-vector evolution and dipole correlation function.
    Dynamics {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opts: DynamicsArgs,
    },
    /// Fluorescence spectrum of the undriven atom.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opts: SpectrumArgs,
    },
    /// Resonance-fluorescence triplet of the strongly driven atom.
    Resfluor {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opts: ResfluorArgs,
    },
    /// Hydrogenic dipole element between circular Rydberg levels (SI / atomic units).
    Rydberg(RydbergArgs),
    /// Experimental rate estimates and validity checks (SI units).
    Estimate(EstimateArgs),
    /// Plot-ready data files for the figures.
    Figures(FiguresArgs),
}

/// Lets values missing on the command line fall back to the file.
pub trait Overlay {
    fn overlay(self, file: &Self) -> Self;
}

macro_rules! overlay {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl Overlay for $t {
            fn overlay(mut self, file: &Self) -> Self {
                $(
                    if self.$f.is_none() {
                        self.$f = file.$f.clone();
                    }
                )*
                self
            }
        }
    };
}

/// Modulation, reservoir and truncation parameters shared by the
/// coefficient-based commands.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelArgs {
    /// Modulation strength z (2z must be an integer).
    #[arg(long)]
    pub z: Option<Number>,
    /// Modulation frequency ratio m (2/m must be an integer), e.g. 2 or 2/3.
    #[arg(long)]
    pub m: Option<Number>,
    /// Atomic transition frequency over kappa [default: 10].
    #[arg(long)]
    pub omega_a: Option<Number>,
    /// Thermal occupation of the cavity at omega_a [default: 1000].
    #[arg(long)]
    pub n_a: Option<Number>,
    /// Sideband truncation |q| <= qmax [default: 20].
    #[arg(long)]
    pub qmax: Option<i32>,
    /// Finite evolution time (units of 1/kappa); omit for the long-time limit.
    #[arg(long)]
    pub time: Option<Number>,
    /// Two-column CSV (omega, G0) replacing the Lorentzian cavity.
    #[arg(long, value_name = "FILE")]
    pub reservoir_file: Option<PathBuf>,
    /// Reservoir temperature (units of kappa, hbar = k_B = 1) for a
    /// tabulated reservoir; by default its occupation is n_a at all frequencies.
    #[arg(long)]
    pub temperature: Option<Number>,
    /// Sample every k-th node of a tabulated reservoir [default: about 2000 samples].
    #[arg(long)]
    pub table_stride: Option<usize>,
    /// Two-column CSV (t, delta) of one period replacing the sinusoidal modulation.
    #[arg(long, value_name = "FILE")]
    pub delta_file: Option<PathBuf>,
    /// Quadrature points for the Fourier analysis of a tabulated modulation [default: 4096].
    #[arg(long)]
    pub quad_points: Option<usize>,
}

overlay!(ModelArgs { z, m, omega_a, n_a, qmax, time, reservoir_file, temperature, table_stride, delta_file, quad_points });

/// Scan variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum ScanVar {
    #[value(name = "z")]
    #[serde(rename = "z")]
    Z,
    #[value(name = "m")]
    #[serde(rename = "m")]
    M,
    #[value(name = "n_a")]
    #[serde(rename = "n_a")]
    NA,
    #[value(name = "omega_a")]
    #[serde(rename = "omega_a")]
    OmegaA,
    /// Relative drive phase of the resonance-fluorescence widths.
    #[value(name = "phi")]
    #[serde(rename = "phi")]
    Phi,
}

impl ScanVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanVar::Z => "z",
            ScanVar::M => "m",
            ScanVar::NA => "n_a",
            ScanVar::OmegaA => "omega_a",
            ScanVar::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanArgs {
    /// Variable to scan.
    #[arg(long, value_enum)]
    pub var: Option<ScanVar>,
    /// Comma-separated grid values, e.g. "2,1,2/3".
    #[arg(long, conflicts_with = "range")]
    pub values: Option<String>,
    /// Inclusive grid "start:stop:step", e.g. "0.5:9.5:0.5".
    #[arg(long)]
    pub range: Option<String>,
    /// Worker threads (also settable through THERMOSQUEEZE_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
}

overlay!(ScanArgs { var, values, range, threads });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResponseArgs {
    /// Lower end of the frequency grid [default: -2 omega_a].
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<Number>,
    /// Upper end of the frequency grid [default: 2 omega_a].
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<Number>,
    /// Number of grid points [default: 801].
    #[arg(long)]
    pub points: Option<usize>,
}

overlay!(ResponseArgs { from, to, points });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsArgs {
    /// Final time [default: 5/gamma_x].
    #[arg(long)]
    pub t_max: Option<Number>,
    /// Number of time samples [default: 201].
    #[arg(long)]
    pub points: Option<usize>,
    /// Initial Bloch vector "sx,sy,sz" [default: "0,0,1", the excited state].
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<String>,
}

overlay!(DynamicsArgs { t_max, points, s0 });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumArgs {
    /// Half-width of the detuning grid [default: 10 gamma_y].
    #[arg(long)]
    pub span: Option<Number>,
    /// Number of grid points [default: 801].
    #[arg(long)]
    pub points: Option<usize>,
}

overlay!(SpectrumArgs { span, points });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResfluorArgs {
    /// Rabi frequency of the drive [default: 20 gamma_y].
    #[arg(long)]
    pub rabi: Option<Number>,
    /// Relative phase between drive and squeezing, e.g. "pi/2" [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<Number>,
    /// Half-width of the detuning grid [default: 2 rabi].
    #[arg(long)]
    pub span: Option<Number>,
    /// Number of grid points [default: 801].
    #[arg(long)]
    pub points: Option<usize>,
}

overlay!(ResfluorArgs { rabi, phi, span, points });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RydbergArgs {
    /// Principal quantum number of the upper circular level [default: 51].
    #[arg(long)]
    pub n: Option<u32>,
}

overlay!(RydbergArgs { n });

/// Which experimental estimate to make.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    /// Room-temperature Rydberg atom in a microwave cavity.
    Thermal,
    /// Zero-temperature superconducting qubit in a circuit-QED cavity.
    Circuit,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub mode: Option<EstimateMode>,
    /// Dipole element in e·a0 [thermal: from the Rydberg n, circuit: 1e4].
    #[arg(long, allow_hyphen_values = true)]
    pub dipole: Option<Number>,
    /// Rydberg level used for the dipole in thermal mode [default: 51].
    #[arg(long)]
    pub n: Option<u32>,
    /// Angular transition frequency, rad/s [thermal: 2*pi*1e9, circuit: 2*pi*2e9].
    #[arg(long)]
    pub omega: Option<Number>,
    /// Cavity linewidth, 1/s [thermal: 2e5, circuit: omega/2e5].
    #[arg(long)]
    pub kappa: Option<Number>,
    /// Temperature in kelvin for thermal mode [default: 300].
    #[arg(long)]
    pub temperature: Option<Number>,
}

overlay!(EstimateArgs { mode, dipole, n, omega, kappa, temperature });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiguresArgs {
    /// Comma-separated figure ids (fig1, fig2a, ..., fig4b) or "all" [default: all].
    #[arg(long)]
    pub which: Option<String>,
    /// Directory receiving one <id>.csv per figure [default: .].
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

overlay!(FiguresArgs { which, out_dir });

/// Contents of a configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub model: ModelArgs,
    pub scan: ScanArgs,
    pub response: ResponseArgs,
    pub dynamics: DynamicsArgs,
    pub spectrum: SpectrumArgs,
    pub resfluor: ResfluorArgs,
    pub rydberg: RydbergArgs,
    pub estimate: EstimateArgs,
    pub figures: FiguresArgs,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Where the reservoir response comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ReservoirSource {
    Lorentzian,
    Tabulated {
        path: PathBuf,
        temperature: Option<f64>,
        stride: Option<usize>,
    },
}

/// Where the modulation comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulationSource {
    Sinusoidal,
    Tabulated(PathBuf),
}

/// Fully resolved model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub z: f64,
    pub m: f64,
    pub omega_a: f64,
    pub n_a: f64,
    pub qmax: i32,
    pub time: Option<f64>,
    pub reservoir: ReservoirSource,
    pub modulation: ModulationSource,
    pub quad_points: usize,
}

impl Default for ModelSpec {
    /// The running example: z = 1, m = 2, ω_a = 10κ, n_a = 10³, qmax = 20.
    fn default() -> Self {
        Self {
            z: 1.0,
            m: 2.0,
            omega_a: DEFAULT_OMEGA_A,
            n_a: DEFAULT_N_A,
            qmax: DEFAULT_QMAX,
            time: None,
            reservoir: ReservoirSource::Lorentzian,
            modulation: ModulationSource::Sinusoidal,
            quad_points: thermosqueeze::modulation::DEFAULT_QUAD_POINTS,
        }
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg()))
    }
}

impl ModelSpec {
    pub fn resolve(a: &ModelArgs) -> CliResult<Self> {
        let d = Self::default();
        let num = |v: Option<Number>, default: f64| v.map_or(default, |n| n.0);
        let spec = Self {
            z: num(a.z, d.z),
            m: num(a.m, d.m),
            omega_a: num(a.omega_a, d.omega_a),
            n_a: num(a.n_a, d.n_a),
            qmax: a.qmax.unwrap_or(d.qmax),
            time: a.time.map(|t| t.0),
            reservoir: match &a.reservoir_file {
                None => ReservoirSource::Lorentzian,
                Some(p) => ReservoirSource::Tabulated {
                    path: p.clone(),
                    temperature: a.temperature.map(|t| t.0),
                    stride: a.table_stride,
                },
            },
            modulation: match &a.delta_file {
                None => ModulationSource::Sinusoidal,
                Some(p) => ModulationSource::Tabulated(p.clone()),
            },
            quad_points: a.quad_points.unwrap_or(d.quad_points),
        };
        spec.validate()?;
        require(a.temperature.is_none() || a.reservoir_file.is_some(), || {
            "--temperature applies only to a tabulated reservoir (--reservoir-file)".into()
        })?;
        require(a.table_stride.is_none() || a.reservoir_file.is_some(), || {
            "--table-stride applies only to a tabulated reservoir (--reservoir-file)".into()
        })?;
        Ok(spec)
    }

    /// Range checks on the parameters themselves; whether they admit a
    /// squeezing term is a domain question answered at evaluation.
    pub fn validate(&self) -> CliResult<()> {
        require(self.z >= 0.0, || format!("z must be >= 0, got {}", self.z))?;
        require(self.m > 0.0, || format!("m must be > 0, got {}", self.m))?;
        require(self.omega_a > 0.0, || format!("omega_a must be > 0, got {}", self.omega_a))?;
        require(self.n_a >= 0.0, || format!("n_a must be >= 0, got {}", self.n_a))?;
        require(self.qmax >= 1, || format!("qmax must be >= 1, got {}", self.qmax))?;
        if let Some(t) = self.time {
            require(t > 0.0, || format!("time must be > 0, got {t}"))?;
        }
        require(self.quad_points >= 16, || {
            format!("quad_points must be >= 16, got {}", self.quad_points)
        })?;
        if let ReservoirSource::Tabulated {
            temperature, stride, ..
        } = &self.reservoir
        {
            if let Some(t) = temperature {
                require(*t >= 0.0, || format!("temperature must be >= 0, got {t}"))?;
            }
            require(stride.map_or(true, |s| s >= 1), || "table_stride must be >= 1".into())?;
        }
        Ok(())
    }

    /// Parameter lines for output headers, in a fixed order.
    pub fn params(&self) -> Vec<(String, String)> {
        use thermosqueeze::report::fmt_float;
        let mut out = vec![
            ("z".to_string(), fmt_float(self.z)),
            ("m".to_string(), fmt_float(self.m)),
            ("omega_a".to_string(), fmt_float(self.omega_a)),
            ("n_a".to_string(), fmt_float(self.n_a)),
            ("qmax".to_string(), self.qmax.to_string()),
            (
                "time".to_string(),
                self.time.map_or_else(|| "long-time limit".to_string(), fmt_float),
            ),
        ];
        match &self.reservoir {
            ReservoirSource::Lorentzian => out.push(("reservoir".into(), "lorentzian".into())),
            ReservoirSource::Tabulated {
                path,
                temperature,
                stride,
            } => {
                out.push(("reservoir".into(), format!("table {}", path.display())));
                out.push((
                    "occupation".into(),
                    temperature.map_or_else(|| "n_a".into(), |t| format!("planck T = {}", fmt_float(t))),
                ));
                out.push((
                    "table_stride".into(),
                    stride.map_or_else(|| "auto".into(), |s| s.to_string()),
                ));
            }
        }
        match &self.modulation {
            ModulationSource::Sinusoidal => out.push(("modulation".into(), "sinusoidal".into())),
            ModulationSource::Tabulated(p) => {
                out.push(("modulation".into(), format!("table {}", p.display())));
                out.push(("quad_points".into(), self.quad_points.to_string()));
            }
        }
        out
    }
}

/// Resolved scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub var: ScanVar,
    pub values: Vec<f64>,
    /// Worker bound; `None` lets the thread pool decide.
    pub threads: Option<usize>,
}

/// Grid values from a comma list.
pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_number(p).map_err(CliError::Usage))
        .collect()
}

/// Grid values from "start:stop:step", stop included when it is hit to
/// within a millionth of a step.
pub fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("range must be start:stop:step, got '{s}'")));
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| parse_number(p).map_err(CliError::Usage))
        .collect::<CliResult<_>>()?;
    let (start, stop, step) = (v[0], v[1], v[2]);
    require(step > 0.0, || format!("range step must be > 0, got {step}"))?;
    require(stop >= start, || format!("range stop {stop} is below start {start}"))?;
    let count = ((stop - start) / step + 1e-6).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

impl ScanSpec {
    pub fn resolve(a: &ScanArgs, env_threads: Option<String>) -> CliResult<Self> {
        let var = a.var.ok_or_else(|| CliError::usage("scan needs --var"))?;
        let values = match (&a.values, &a.range) {
            (Some(v), None) => parse_values(v)?,
            (None, Some(r)) => parse_range(r)?,
            (Some(_), Some(_)) => return Err(CliError::usage("give either --values or --range, not both")),
            (None, None) => return Err(CliError::usage("scan needs --values or --range")),
        };
        require(!values.is_empty(), || "scan grid is empty".into())?;
        let env = match env_threads {
            Some(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got '{s}'")))?,
            ),
            None => None,
        };
        let threads = a.threads.or(env);
        require(threads != Some(0), || "thread count must be >= 1".into())?;
        Ok(Self { var, values, threads })
    }
}

/// A uniform grid request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: usize,
}

pub const DEFAULT_POINTS: usize = 801;

fn check_points(points: usize) -> CliResult<usize> {
    require(points >= 2, || format!("points must be >= 2, got {points}"))?;
    Ok(points)
}

impl GridSpec {
    pub fn resolve(a: &ResponseArgs) -> CliResult<Self> {
        let g = Self {
            from: a.from.map(|v| v.0),
            to: a.to.map(|v| v.0),
            points: check_points(a.points.unwrap_or(DEFAULT_POINTS))?,
        };
        if let (Some(lo), Some(hi)) = (g.from, g.to) {
            require(hi > lo, || format!("grid needs to > from, got [{lo}, {hi}]"))?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsSpec {
    pub t_max: Option<f64>,
    pub points: usize,
    pub s0: [f64; 3],
}

impl DynamicsSpec {
    pub fn resolve(a: &DynamicsArgs) -> CliResult<Self> {
        let s0 = match &a.s0 {
            None => [0.0, 0.0, 1.0],
            Some(s) => {
                let v = parse_values(s)?;
                require(v.len() == 3, || format!("s0 needs three components, got '{s}'"))?;
                [v[0], v[1], v[2]]
            }
        };
        let t_max = a.t_max.map(|t| t.0);
        if let Some(t) = t_max {
            require(t > 0.0, || format!("t_max must be > 0, got {t}"))?;
        }
        Ok(Self {
            t_max,
            points: check_points(a.points.unwrap_or(201))?,
            s0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    pub span: Option<f64>,
    pub points: usize,
}

impl SpectrumSpec {
    pub fn resolve(a: &SpectrumArgs) -> CliResult<Self> {
        let span = a.span.map(|s| s.0);
        if let Some(s) = span {
            require(s > 0.0, || format!("span must be > 0, got {s}"))?;
        }
        Ok(Self {
            span,
            points: check_points(a.points.unwrap_or(DEFAULT_POINTS))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResfluorSpec {
    pub rabi: Option<f64>,
    pub phi: f64,
    pub span: Option<f64>,
    pub points: usize,
}

impl ResfluorSpec {
    pub fn resolve(a: &ResfluorArgs) -> CliResult<Self> {
        let rabi = a.rabi.map(|r| r.0);
        if let Some(r) = rabi {
            require(r > 0.0, || format!("rabi must be > 0, got {r}"))?;
        }
        let span = a.span.map(|s| s.0);
        if let Some(s) = span {
            require(s > 0.0, || format!("span must be > 0, got {s}"))?;
        }
        Ok(Self {
            rabi,
            phi: a.phi.map_or(0.0, |p| p.0),
            span,
            points: check_points(a.points.unwrap_or(DEFAULT_POINTS))?,
        })
    }
}

pub const DEFAULT_RYDBERG_N: u32 = 51;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSpec {
    pub mode: EstimateMode,
    /// Explicit dipole; otherwise taken from `n` (thermal) or 1e4 e·a0 (circuit).
    pub dipole: Option<f64>,
    pub n: u32,
    pub omega: f64,
    pub kappa: f64,
    pub temperature: f64,
}

impl EstimateSpec {
    pub fn resolve(a: &EstimateArgs) -> CliResult<Self> {
        let mode = a.mode.unwrap_or(EstimateMode::Thermal);
        let omega_default = match mode {
            EstimateMode::Thermal => 2.0 * PI * 1e9,
            EstimateMode::Circuit => 2.0 * PI * 2e9,
        };
        let omega = a.omega.map_or(omega_default, |v| v.0);
        let kappa = a.kappa.map_or(
            match mode {
                EstimateMode::Thermal => 2e5,
                EstimateMode::Circuit => omega / 2e5,
            },
            |v| v.0,
        );
        let temperature = a.temperature.map_or(300.0, |v| v.0);
        require(omega > 0.0, || format!("omega must be > 0, got {omega}"))?;
        require(kappa > 0.0, || format!("kappa must be > 0, got {kappa}"))?;
        require(temperature >= 0.0, || format!("temperature must be >= 0, got {temperature}"))?;
        require(mode == EstimateMode::Thermal || a.temperature.is_none(), || {
            "circuit mode is at zero temperature; --temperature applies to thermal mode".into()
        })?;
        Ok(Self {
            mode,
            dipole: a.dipole.map(|d| d.0),
            n: a.n.unwrap_or(DEFAULT_RYDBERG_N),
            omega,
            kappa,
            temperature,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiguresSpec {
    /// Requested ids, validated when the figures are produced.
    pub which: Vec<String>,
    pub out_dir: PathBuf,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Coeffs(ModelSpec),
    Scan(ModelSpec, ScanSpec),
    Response(ModelSpec, GridSpec),
    Dynamics(ModelSpec, DynamicsSpec),
    Spectrum(ModelSpec, SpectrumSpec),
    Resfluor(ModelSpec, ResfluorSpec),
    Rydberg { n: u32 },
    Estimate(EstimateSpec),
    Figures(FiguresSpec),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Coeffs(_) => "coeffs",
            Job::Scan(..) => "scan",
            Job::Response(..) => "response",
            Job::Dynamics(..) => "dynamics",
            Job::Spectrum(..) => "spectrum",
            Job::Resfluor(..) => "resfluor",
            Job::Rydberg { .. } => "rydberg",
            Job::Estimate(_) => "estimate",
            Job::Figures(_) => "figures",
        }
    }

    /// Whether results can be written as key-value text.
    fn has_keyvalue(&self) -> bool {
        matches!(self, Job::Coeffs(_) | Job::Rydberg { .. } | Job::Estimate(_))
    }
}

/// Everything needed to run one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub job: Job,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Merges parsed flags with the configuration file they name, if any.
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Self::merge(cli, &file, std::env::var(THREADS_ENV).ok())
    }

    /// Flags win over `file`; `env_threads` sits between the two for the
    /// scan thread count.
    pub fn merge(cli: Cli, file: &FileConfig, env_threads: Option<String>) -> CliResult<Self> {
        let model = |m: ModelArgs| ModelSpec::resolve(&m.overlay(&file.model));
        let job = match cli.command {
            Command::Coeffs(m) => Job::Coeffs(model(m)?),
            Command::Scan { model: m, scan } => {
                let mut s = scan.overlay(&ScanArgs {
                    threads: None,
                    ..file.scan.clone()
                });
                // the environment overrides the file but not the flag
                if s.threads.is_none() && env_threads.is_none() {
                    s.threads = file.scan.threads;
                }
                Job::Scan(model(m)?, ScanSpec::resolve(&s, env_threads)?)
            }
            Command::Response { model: m, grid } => {
                Job::Response(model(m)?, GridSpec::resolve(&grid.overlay(&file.response))?)
            }
            Command::Dynamics { model: m, opts } => {
                Job::Dynamics(model(m)?, DynamicsSpec::resolve(&opts.overlay(&file.dynamics))?)
            }
            Command::Spectrum { model: m, opts } => {
                Job::Spectrum(model(m)?, SpectrumSpec::resolve(&opts.overlay(&file.spectrum))?)
            }
            Command::Resfluor { model: m, opts } => {
                Job::Resfluor(model(m)?, ResfluorSpec::resolve(&opts.overlay(&file.resfluor))?)
            }
            Command::Rydberg(a) => {
                let a = a.overlay(&file.rydberg);
                Job::Rydberg {
                    n: a.n.unwrap_or(DEFAULT_RYDBERG_N),
                }
            }
            Command::Estimate(a) => Job::Estimate(EstimateSpec::resolve(&a.overlay(&file.estimate))?),
            Command::Figures(a) => {
                let a = a.overlay(&file.figures);
                Job::Figures(FiguresSpec {
                    which: a
                        .which
                        .as_deref()
                        .unwrap_or("all")
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                    out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from(".")),
                })
            }
        };
        if let Job::Figures(f) = &job {
            require(!f.which.is_empty(), || "no figure ids given".into())?;
        }
        let format = cli.format.or(file.format).unwrap_or(if job.has_keyvalue() {
            Format::Keyvalue
        } else {
            Format::Csv
        });
        require(format == Format::Csv || job.has_keyvalue(), || {
            format!("{} writes tables; only --format csv is available", job.name())
        })?;
        Ok(Self {
            job,
            output: cli.output.or_else(|| file.output.clone()),
            format,
        })
    }
}

/// Parses command-line arguments (program name first) and the
/// configuration file they name.
pub fn parse_config<I, T>(args: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    RunConfig::from_cli(cli)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str], file: &str, env: Option<&str>) -> CliResult<RunConfig> {
        let mut full = vec!["thermosqueeze"];
        full.extend_from_slice(args);
        let cli = Cli::try_parse_from(full).map_err(|e| CliError::Usage(e.to_string()))?;
        RunConfig::merge(cli, &FileConfig::parse(file)?, env.map(String::from))
    }

    #[test]
    fn numbers_accept_fractions_and_pi() {
        assert_eq!(parse_number("2/3").unwrap(), 2.0 / 3.0);
        assert_eq!(parse_number("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_number("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_number("-pi").unwrap(), -PI);
        assert_eq!(parse_number("2*pi*1e9").unwrap(), 2.0 * PI * 1e9);
        assert_eq!(parse_number(" 1e3 ").unwrap(), 1e3);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
        assert!(parse_number("inf").is_err());
    }

    #[test]
    fn defaults_are_the_running_example() {
        let c = parse(&["coeffs", "--z", "1", "--m", "2"], "", None).unwrap();
        assert_eq!(c.job, Job::Coeffs(ModelSpec::default()));
        assert_eq!(c.format, Format::Keyvalue);
        assert_eq!(c.output, None);
    }

    #[test]
    fn nonpositive_m_is_a_usage_error() {
        let e = parse(&["coeffs", "--m", "0"], "", None).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert_eq!(parse(&["coeffs", "--z", "-1"], "", None).unwrap_err().exit_code(), 1);
        assert_eq!(parse(&["coeffs", "--bogus", "1"], "", None).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn flags_override_the_file() {
        let file = "[model]\nz = 3\nm = \"2/3\"\nn_a = 0\n";
        let c = parse(&["coeffs", "--z", "1"], file, None).unwrap();
        let Job::Coeffs(m) = c.job else { panic!() };
        assert_eq!(m.z, 1.0);
        assert_eq!(m.m, 2.0 / 3.0);
        assert_eq!(m.n_a, 0.0);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        for bad in ["[model]\nzz = 1\n", "colour = 1\n", "[scan]\nvar = \"q\"\n"] {
            let e = parse(&["coeffs"], bad, None).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{bad}");
        }
    }

    #[test]
    fn scan_grids() {
        let c = parse(&["scan", "--var", "z", "--range", "0.5:9.5:0.5"], "", None).unwrap();
        let Job::Scan(_, s) = c.job else { panic!() };
        assert_eq!(s.values.len(), 19);
        assert_eq!(s.values[18], 9.5);
        assert_eq!(c.format, Format::Csv);
        let c = parse(&["scan", "--var", "m", "--values", "2,1,2/3"], "", None).unwrap();
        let Job::Scan(_, s) = c.job else { panic!() };
        assert_eq!(s.var, ScanVar::M);
        assert_eq!(s.values, vec![2.0, 1.0, 2.0 / 3.0]);
        assert!(parse(&["scan", "--var", "z", "--values", ""], "", None).is_err());
        assert!(parse(&["scan", "--var", "z", "--range", "1:0:1"], "", None).is_err());
        assert!(parse(&["scan", "--values", "1"], "", None).is_err());
    }

    #[test]
    fn thread_precedence_is_flag_env_file() {
        let file = "[scan]\nthreads = 3\n";
        let t = |args: &[&str], env| {
            let mut a = vec!["scan", "--var", "z", "--values", "1"];
            a.extend_from_slice(args);
            match parse(&a, file, env).unwrap().job {
                Job::Scan(_, s) => s.threads,
                _ => unreachable!(),
            }
        };
        assert_eq!(t(&[], None), Some(3));
        assert_eq!(t(&[], Some("2")), Some(2));
        assert_eq!(t(&["--threads", "5"], Some("2")), Some(5));
        assert!(parse(&["scan", "--var", "z", "--values", "1"], "", Some("x")).is_err());
    }

    #[test]
    fn keyvalue_only_for_report_commands() {
        assert!(parse(&["--format", "keyvalue", "spectrum"], "", None).is_err());
        let c = parse(&["rydberg"], "format = \"csv\"\n", None).unwrap();
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.job, Job::Rydberg { n: 51 });
    }

    #[test]
    fn estimate_defaults_follow_mode() {
        let c = parse(&["estimate", "--mode", "circuit"], "", None).unwrap();
        let Job::Estimate(e) = c.job else { panic!() };
        assert_eq!(e.omega, 2.0 * PI * 2e9);
        assert_eq!(e.kappa, e.omega / 2e5);
        assert!(parse(&["estimate", "--mode", "circuit", "--temperature", "1"], "", None).is_err());
    }

    #[test]
    fn figure_ids_are_split() {
        let c = parse(&["figures", "--which", "fig1, fig3a"], "", None).unwrap();
        let Job::Figures(f) = c.job else { panic!() };
        assert_eq!(f.which, vec!["fig1", "fig3a"]);
    }
}
