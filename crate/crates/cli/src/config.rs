//! Flag and JSON-file configuration, merged into a [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use serde::Deserialize;
use thermoq_core::optimize::{log_space, SweepGrid};
use thermoq_core::MeterState;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "thermoq", version, about = "Temperature sensitivity of a sensor qubit and its meter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Sensor population and QFI over temperature and time
    Sensor(RunArgs),
    /// Full, sensor and meter QFI side by side
    Compare(RunArgs),
    /// Meter QFI over the temperature-time plane
    MeterMap(RunArgs),
    /// Optimal temperature and peak meter QFI versus drive and time
    Tmax(RunArgs),
    /// Distance of the optimal meter preparation from the equal superposition
    Optimize(RunArgs),
    /// Peak meter QFI versus meter dimension
    Scaling(RunArgs),
    /// Slowest Liouvillian eigenvalues versus drive strength
    Spectrum(RunArgs),
}

impl Command {
    pub fn split(self) -> (Subcommand, RunArgs) {
        match self {
            Command::Sensor(a) => (Subcommand::Sensor, a),
            Command::Compare(a) => (Subcommand::Compare, a),
            Command::MeterMap(a) => (Subcommand::MeterMap, a),
            Command::Tmax(a) => (Subcommand::Tmax, a),
            Command::Optimize(a) => (Subcommand::Optimize, a),
            Command::Scaling(a) => (Subcommand::Scaling, a),
            Command::Spectrum(a) => (Subcommand::Spectrum, a),
        }
    }
}

/// Axis syntax: `0.1,0.2,0.5`, `lin:lo:hi:num` or `log:lo:hi:num`.
/// Times also accept `inf`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Temperatures k_B T / ħω
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    /// Times in units of 1/γ
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Meter drive strengths Ω in units of γ
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Meter dimensions
    #[arg(long)]
    pub n: Option<String>,
    /// Initial meter state: equal, optimize or comma-separated amplitudes
    #[arg(long)]
    pub psi0: Option<String>,
    /// Bath coupling γ
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sensor frequency ω
    #[arg(long)]
    pub sensor_omega: Option<f64>,
    /// JSON file with the same field names as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a line plot next to the CSV
    #[arg(long)]
    pub svg: bool,
    /// Seed for multi-start optimization
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Psi0Value {
    Text(String),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tau: Option<AxisValue>,
    pub t: Option<AxisValue>,
    pub omega: Option<AxisValue>,
    pub n: Option<AxisValue>,
    pub psi0: Option<Psi0Value>,
    pub gamma: Option<f64>,
    pub sensor_omega: Option<f64>,
    pub out: Option<PathBuf>,
    pub svg: Option<bool>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Sensor,
    Compare,
    MeterMap,
    Tmax,
    Optimize,
    Scaling,
    Spectrum,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Sensor => "sensor",
            Subcommand::Compare => "compare",
            Subcommand::MeterMap => "meter-map",
            Subcommand::Tmax => "tmax",
            Subcommand::Optimize => "optimize",
            Subcommand::Scaling => "scaling",
            Subcommand::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Psi0 {
    Equal,
    Optimize,
    Amplitudes(Vec<f64>),
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub gamma: f64,
    pub sensor_omega: f64,
    pub psi0: Psi0,
    /// `times` may end in `+∞` for the sensor command.
    pub grid: SweepGrid,
    pub output_path: Option<PathBuf>,
    pub emit_svg: bool,
    pub seed: u64,
}

/// Times of the meter-map slices.
pub const MAP_SLICES: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

fn default_taus(num: usize) -> Vec<f64> {
    log_space(0.05, 1.0, num)
}

struct Defaults {
    taus: Vec<f64>,
    times: Vec<f64>,
    omegas: Vec<f64>,
    ns: Vec<usize>,
}

fn defaults(cmd: Subcommand) -> Defaults {
    let (taus, times, omegas, ns) = match cmd {
        Subcommand::Sensor => (default_taus(200), vec![1.0, 2.6, 20.0, f64::INFINITY], vec![2.0], vec![2]),
        Subcommand::Compare => (default_taus(100), vec![1.0, 2.6, 20.0], vec![2.0], vec![2]),
        Subcommand::MeterMap => (default_taus(100), log_space(1.0, 1e6, 49), vec![2.0], vec![2]),
        Subcommand::Tmax => (
            default_taus(2),
            log_space(1.0, 1e4, 17),
            vec![0.25, 0.5, 1.0, 2.0, 4.0],
            vec![2],
        ),
        Subcommand::Optimize => (default_taus(24), vec![1.0, 10.0, 100.0, 1000.0], vec![2.0], vec![2]),
        Subcommand::Scaling => (default_taus(2), vec![10.0], vec![2.0], (2..=12).collect()),
        Subcommand::Spectrum => (vec![0.2], vec![], (0..=40).map(|k| 0.1 * k as f64).collect(), vec![2]),
    };
    Defaults { taus, times, omegas, ns }
}

fn parse_number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        _ => {}
    }
    s.parse::<f64>()
        .map_err(|_| CliError::Config(format!("not a number: {s:?}")))
}

/// Parses one axis in the flag syntax.
pub fn parse_axis(name: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 1 {
        return spec.split(',').map(parse_number).collect();
    }
    let bad = || CliError::Config(format!("{name}: expected lin:lo:hi:num or log:lo:hi:num, got {spec:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let lo = parse_number(parts[1])?;
    let hi = parse_number(parts[2])?;
    let num: usize = parts[3].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(CliError::Config(format!("{name}: range must be finite with lo ≤ hi")));
    }
    match parts[0].trim() {
        "lin" => Ok(match num {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..num)
                .map(|i| if i == num - 1 { hi } else { lo + (hi - lo) * i as f64 / (num - 1) as f64 })
                .collect(),
        }),
        "log" => {
            if lo <= 0.0 {
                return Err(CliError::Config(format!("{name}: log range needs lo > 0")));
            }
            Ok(log_space(lo, hi, num))
        }
        _ => Err(bad()),
    }
}

fn axis_from_file(name: &str, v: &AxisValue) -> Result<Vec<f64>, CliError> {
    match v {
        AxisValue::Number(x) => Ok(vec![*x]),
        AxisValue::List(xs) => Ok(xs.clone()),
        AxisValue::Text(s) => parse_axis(name, s),
    }
}

fn to_dimensions(xs: &[f64]) -> Result<Vec<usize>, CliError> {
    xs.iter()
        .map(|&x| {
            if x.fract() == 0.0 && (2.0..=64.0).contains(&x) {
                Ok(x as usize)
            } else {
                Err(CliError::Config(format!("meter dimension must be an integer in 2..=64, got {x}")))
            }
        })
        .collect()
}

fn parse_psi0(s: &str) -> Result<Psi0, CliError> {
    match s.trim() {
        "equal" => Ok(Psi0::Equal),
        "optimize" => Ok(Psi0::Optimize),
        other => Ok(Psi0::Amplitudes(other.split(',').map(parse_number).collect::<Result<_, _>>()?)),
    }
}

fn axis(
    name: &str,
    flag: &Option<String>,
    file: &Option<AxisValue>,
    default: Vec<f64>,
) -> Result<Vec<f64>, CliError> {
    match (flag, file) {
        (Some(s), _) => parse_axis(name, s),
        (None, Some(v)) => axis_from_file(name, v),
        (None, None) => Ok(default),
    }
}

fn increasing(name: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Config(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn positive_param(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

/// Merges flags over the optional config file and fills per-command defaults.
pub fn resolve(cmd: Subcommand, args: &RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let d = defaults(cmd);
    let taus = axis("tau", &args.tau, &file.tau, d.taus)?;
    let mut times = axis("t", &args.t, &file.t, d.times)?;
    let omegas = axis("omega", &args.omega, &file.omega, d.omegas)?;
    let ns = match (&args.n, &file.n) {
        (None, None) => d.ns,
        _ => to_dimensions(&axis("n", &args.n, &file.n, Vec::new())?)?,
    };
    let psi0 = match (&args.psi0, &file.psi0) {
        (Some(s), _) => parse_psi0(s)?,
        (None, Some(Psi0Value::Text(s))) => parse_psi0(s)?,
        (None, Some(Psi0Value::List(xs))) => Psi0::Amplitudes(xs.clone()),
        (None, None) => Psi0::Equal,
    };
    let gamma = positive_param("gamma", args.gamma.or(file.gamma).unwrap_or(1.0))?;
    let sensor_omega = positive_param("sensor_omega", args.sensor_omega.or(file.sensor_omega).unwrap_or(1.0))?;
    let output_path = args.out.clone().or(file.out);
    let emit_svg = args.svg || file.svg.unwrap_or(false);
    let seed = args.seed.or(file.seed).unwrap_or(0);

    if cmd == Subcommand::MeterMap {
        times = merge_slices(&times);
    }

    // validation
    if taus.is_empty() {
        return Err(CliError::Config("empty temperature grid".into()));
    }
    if cmd != Subcommand::Spectrum && times.is_empty() {
        return Err(CliError::Config("empty time grid".into()));
    }
    if omegas.is_empty() {
        return Err(CliError::Config("empty drive-strength grid".into()));
    }
    if ns.is_empty() {
        return Err(CliError::Config("empty meter-dimension grid".into()));
    }
    let finite_times: Vec<f64> = match cmd {
        Subcommand::Sensor => {
            let k = times.iter().position(|t| t.is_infinite() && *t > 0.0).unwrap_or(times.len());
            if k + 1 < times.len() {
                return Err(CliError::Config("t = inf must be the last time".into()));
            }
            times[..k].to_vec()
        }
        _ => times.clone(),
    };
    let grid = SweepGrid {
        taus: taus.clone(),
        times: finite_times,
        omegas: omegas.clone(),
        ns: ns.clone(),
    };
    grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
    increasing("t", &times)?;

    let single = |name: &str, len: usize| {
        if len == 1 {
            Ok(())
        } else {
            Err(CliError::Config(format!("{} takes a single {name}", cmd.name())))
        }
    };
    match cmd {
        Subcommand::Sensor => {}
        Subcommand::Compare | Subcommand::MeterMap | Subcommand::Optimize => {
            single("n", ns.len())?;
            single("omega", omegas.len())?;
        }
        Subcommand::Tmax => {
            single("n", ns.len())?;
            if taus.len() < 2 {
                return Err(CliError::Config("tmax needs a temperature range (at least two values)".into()));
            }
        }
        Subcommand::Scaling => {
            single("omega", omegas.len())?;
            if taus.len() < 2 {
                return Err(CliError::Config("scaling needs a temperature range (at least two values)".into()));
            }
        }
        Subcommand::Spectrum => {
            single("n", ns.len())?;
            single("tau", taus.len())?;
        }
    }
    if let Psi0::Amplitudes(c) = &psi0 {
        if ns.len() != 1 || c.len() != ns[0] {
            return Err(CliError::Config(format!(
                "psi0 has {} amplitudes but the meter dimension is {:?}",
                c.len(),
                ns
            )));
        }
        MeterState::new(c.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    }
    if emit_svg && output_path.is_none() {
        return Err(CliError::Config("--svg needs --out".into()));
    }

    Ok(RunConfig {
        subcommand: cmd,
        gamma,
        sensor_omega,
        psi0,
        grid: SweepGrid { taus, times, omegas, ns },
        output_path,
        emit_svg,
        seed,
    })
}

/// Adds the slice times to a time axis, replacing near-duplicates by the
/// exact slice value.
fn merge_slices(times: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = times
        .iter()
        .copied()
        .filter(|t| !MAP_SLICES.iter().any(|s| ((t - s) / s).abs() < 1e-9))
        .collect();
    out.extend_from_slice(&MAP_SLICES);
    out.sort_by(f64::total_cmp);
    out
}
