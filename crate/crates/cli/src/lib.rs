//! Command-line front end: config files, flag overrides, exit codes.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use fdtc::channel::{AntennaConfig, InterfererModel};
use fdtc::experiment::{ExperimentKind, ExperimentSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fdtc", version = fdtc::experiment::VERSION, about = "Full-duplex MIMO ad hoc network outage and capacity experiments")]
pub struct Args {
    /// op_vs_antennas, tc_vs_antennas, strategy_comparison, fd_vs_hd_snr,
    /// single_point or validate
    pub experiment: String,
    /// Flat `key = value` file; `#` starts a comment
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    /// Subtract the receiver noise term inside Ω
    #[arg(long)]
    pub include_noise: bool,
    /// Use the half-duplex outage curve of order l with weight 1/l
    #[arg(long)]
    pub hd_literal_gamma_order: bool,
}

/// `key = value` pairs in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "line {}: expected `key = value`, got `{}`",
                i + 1,
                raw.trim()
            )
        })?;
        let key = key.trim();
        if key.is_empty() {
            bail!("line {}: missing key", i + 1);
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow!("`{key}`: cannot parse `{value}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("`{key}`: expected a boolean, got `{value}`"),
    }
}

/// Comma-separated numbers, `lo..hi` integer ranges (inclusive) and
/// `start:stop:step` grids, freely mixed.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: i64 = parse(key, lo.trim())?;
            let hi: i64 = parse(key, hi.trim().trim_start_matches('='))?;
            out.extend((lo..=hi).map(|v| v as f64));
        } else if item.contains(':') {
            let parts: Vec<f64> = item
                .split(':')
                .map(|p| parse::<f64>(key, p.trim()))
                .collect::<Result<_>>()?;
            let [start, stop, step] = parts[..] else {
                bail!("`{key}`: expected start:stop:step, got `{item}`");
            };
            if !(step > 0.0) {
                bail!("`{key}`: step must be positive in `{item}`");
            }
            let count = ((stop - start) / step + 1e-9).floor();
            if count < 0.0 {
                bail!("`{key}`: empty grid `{item}`");
            }
            out.extend((0..=count as usize).map(|i| start + i as f64 * step));
        } else {
            out.push(parse(key, item)?);
        }
    }
    Ok(out)
}

/// Applies config entries to the experiment defaults.
pub fn apply_config(spec: &mut ExperimentSpec, entries: &[(String, String)]) -> Result<()> {
    let mut tx: Option<usize> = None;
    let mut rx: Option<usize> = None;
    let mut total: Option<usize> = None;
    for (key, value) in entries {
        let (k, v) = (key.as_str(), value.as_str());
        let b = &mut spec.base;
        match k {
            "N_t" | "tx" => tx = Some(parse(k, v)?),
            "N_r" | "rx" => rx = Some(parse(k, v)?),
            "N" => total = Some(parse(k, v)?),
            "L" => b.pair_distance = parse(k, v)?,
            "P" => b.power = parse(k, v)?,
            "snr_db" => b.power = 10f64.powf(parse::<f64>(k, v)? / 10.0),
            "alpha" => b.alpha = parse(k, v)?,
            "beta" => b.beta = parse(k, v)?,
            "epsilon" => b.epsilon = parse(k, v)?,
            "sigma2_si" => b.sigma2_si = parse(k, v)?,
            "lambda" => b.lambda = parse(k, v)?,
            "mean_pairs" => b.mean_pairs = parse(k, v)?,
            "strategy" => b.strategy = v.parse().map_err(|e: String| anyhow!(e))?,
            "interferer_model" => {
                b.interferer_model = match v.to_ascii_lowercase().as_str() {
                    "effective" => InterfererModel::Effective,
                    "explicit" => InterfererModel::Explicit,
                    _ => bail!("`{k}`: expected effective or explicit, got `{v}`"),
                }
            }
            "seed" => spec.seed = parse(k, v)?,
            "trials" => spec.trials = parse(k, v)?,
            "format" => spec.format = v.parse().map_err(|e: String| anyhow!(e))?,
            "include_noise" => spec.options.include_noise = parse_bool(k, v)?,
            "hd_literal_gamma_order" => spec.options.hd_literal_order = parse_bool(k, v)?,
            "sweep" => spec.sweep = parse_list(k, v)?,
            "sigma2_series" => spec.sigma2_series = parse_list(k, v)?,
            "exact_samples" => spec.exact_samples = parse(k, v)?,
            "lambda_lo" => spec.search.lambda_lo = parse(k, v)?,
            "max_doublings" => spec.search.max_doublings = parse(k, v)?,
            "bisection_steps" => spec.search.bisection_steps = parse(k, v)?,
            "fixed_rx" => spec.fixed_rx = parse(k, v)?,
            "simulate_tc" => spec.simulate_tc = parse_bool(k, v)?,
            "solver_max_iterations" => spec.options.solver.max_iterations = parse(k, v)?,
            "solver_tolerance" => spec.options.solver.abs_tolerance = parse(k, v)?,
            "solver_min_density" => spec.options.solver.min_density = parse(k, v)?,
            "trial_dump" => spec.trial_dump = Some(v.to_string()),
            "realization_dump" => spec.realization_dump = Some(v.to_string()),
            "out" => {}
            _ => bail!("unknown config key `{k}`"),
        }
    }
    let config = match (tx, rx, total) {
        (None, None, None) => return Ok(()),
        (Some(t), Some(r), None) => AntennaConfig::new(t, r),
        (None, Some(r), Some(n)) => AntennaConfig::with_total(n, r),
        (Some(t), None, Some(n)) if n > t => AntennaConfig::with_total(n, n - t),
        (Some(t), Some(r), Some(n)) if n == t + r => AntennaConfig::new(t, r),
        _ => bail!("antenna keys must give two of N, N_t, N_r consistently"),
    };
    spec.base.config = config.map_err(|e| anyhow!(e))?;
    Ok(())
}

/// Output path from the config file, if any.
pub fn config_out(entries: &[(String, String)]) -> Option<PathBuf> {
    entries
        .iter()
        .rev()
        .find(|(k, _)| k == "out")
        .map(|(_, v)| PathBuf::from(v))
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub spec: ExperimentSpec,
    pub out: Option<PathBuf>,
}

/// Config file first, flags on top.
pub fn resolve(args: &Args) -> Result<Invocation> {
    let kind: ExperimentKind = args.experiment.parse().map_err(|e: String| anyhow!(e))?;
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let entries = parse_config(&text)?;
    let mut spec = ExperimentSpec::new(kind);
    apply_config(&mut spec, &entries)?;
    let mut out = config_out(&entries);
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(format) = &args.format {
        spec.format = format.parse().map_err(|e: String| anyhow!(e))?;
    }
    if args.include_noise {
        spec.options.include_noise = true;
    }
    if args.hd_literal_gamma_order {
        spec.options.hd_literal_order = true;
    }
    if args.out.is_some() {
        out = args.out.clone();
    }
    Ok(Invocation { spec, out })
}

/// Runs an invocation and returns the process exit code.
pub fn execute(inv: &Invocation) -> Result<i32> {
    let report = fdtc::experiment::run_experiment(&inv.spec)?;
    let mut buf = Vec::new();
    report.write(inv.spec.format, &mut buf)?;
    match &inv.out {
        Some(path) => {
            std::fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(if report.validation_failed {
        EXIT_VALIDATION
    } else if inv.spec.kind == ExperimentKind::SinglePoint && report.solver_failed {
        EXIT_SOLVER
    } else {
        EXIT_OK
    })
}
