//! Experiment sweeps and their tabular output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::beamforming::{cancellable_pairs, Strategy};
use crate::bounds::{
    h_pow_moment, moment_psi_power_oracle, op_lb, op_lb_exact, select_psi_moment, tc_upper_bound,
    AnalyticChain, BoundOptions, BoundsError, PsiMoment,
};
use crate::channel::{draw_cn, AntennaConfig};
use crate::geometry::sample_network;
use crate::numerics::{bisection_density, newton_density, regularized_gamma_pair, OutageCurve};
use crate::simulator::{
    dump_trials, estimate_outage, simulated_tc, trial_rng, SimulationError, SystemParams, TcSearch,
};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    OpVsAntennas,
    TcVsAntennas,
    StrategyComparison,
    FdVsHdSnr,
    SinglePoint,
    Validate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::OpVsAntennas,
        ExperimentKind::TcVsAntennas,
        ExperimentKind::StrategyComparison,
        ExperimentKind::FdVsHdSnr,
        ExperimentKind::SinglePoint,
        ExperimentKind::Validate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::OpVsAntennas => "op_vs_antennas",
            ExperimentKind::TcVsAntennas => "tc_vs_antennas",
            ExperimentKind::StrategyComparison => "strategy_comparison",
            ExperimentKind::FdVsHdSnr => "fd_vs_hd_snr",
            ExperimentKind::SinglePoint => "single_point",
            ExperimentKind::Validate => "validate",
        }
    }

    fn is_sweep(&self) -> bool {
        matches!(
            self,
            ExperimentKind::OpVsAntennas
                | ExperimentKind::TcVsAntennas
                | ExperimentKind::StrategyComparison
                | ExperimentKind::FdVsHdSnr
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

/// Antenna splits evaluated for a total antenna count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// `N_t = ⌈N/2⌉`, `N_r = ⌊N/2⌋`.
    Balanced,
    /// `N_r = max(1, ⌊N/4⌋)`, the rest transmit.
    TransmitHeavy,
}

impl Split {
    pub fn name(&self) -> &'static str {
        match self {
            Split::Balanced => "balanced",
            Split::TransmitHeavy => "transmit-heavy",
        }
    }

    pub fn config(&self, total: usize) -> std::result::Result<AntennaConfig, String> {
        let rx = match self {
            Split::Balanced => total / 2,
            Split::TransmitHeavy => (total / 4).max(1),
        };
        AntennaConfig::with_total(total, rx).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Total antennas for the antenna sweeps, SNR in dB for `fd_vs_hd_snr`.
    pub sweep: Vec<f64>,
    /// SI error variances, one series each in `fd_vs_hd_snr`.
    pub sigma2_series: Vec<f64>,
    pub base: SystemParams,
    pub trials: u64,
    pub seed: u64,
    pub options: BoundOptions,
    /// Samples for the Monte-Carlo outage bound.
    pub exact_samples: u64,
    pub search: TcSearch,
    /// Receive antennas held fixed in `strategy_comparison`.
    pub fixed_rx: usize,
    /// Also run the simulated capacity search where it is optional.
    pub simulate_tc: bool,
    pub format: OutputFormat,
    pub trial_dump: Option<String>,
    pub realization_dump: Option<String>,
}

fn range(lo: usize, hi: usize) -> Vec<f64> {
    (lo..=hi).map(|n| n as f64).collect()
}

impl ExperimentSpec {
    /// Defaults for each experiment.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut spec = Self {
            kind,
            sweep: Vec::new(),
            sigma2_series: vec![0.1],
            base: SystemParams::default(),
            trials: 20_000,
            seed: 1,
            options: BoundOptions::default(),
            exact_samples: 20_000,
            search: TcSearch::default(),
            fixed_rx: 5,
            simulate_tc: false,
            format: OutputFormat::Csv,
            trial_dump: None,
            realization_dump: None,
        };
        match kind {
            ExperimentKind::OpVsAntennas | ExperimentKind::TcVsAntennas => {
                spec.sweep = range(8, 16);
            }
            ExperimentKind::StrategyComparison => {
                spec.sweep = range(6, 20);
            }
            ExperimentKind::FdVsHdSnr => {
                spec.sweep = (0..=60).map(|i| i as f64 * 0.5).collect();
                spec.sigma2_series = vec![0.1, 0.5];
                spec.base.config = AntennaConfig::new(7, 3).expect("valid");
                spec.base.beta = 3.0;
                spec.options.include_noise = true;
            }
            ExperimentKind::SinglePoint => {
                spec.base.config = AntennaConfig::new(4, 4).expect("valid");
            }
            ExperimentKind::Validate => {}
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        if self.kind.is_sweep() && self.sweep.is_empty() {
            return bad(format!("{} needs a non-empty sweep", self.kind));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if matches!(
            self.kind,
            ExperimentKind::OpVsAntennas
                | ExperimentKind::TcVsAntennas
                | ExperimentKind::StrategyComparison
        ) {
            for &n in &self.sweep {
                if n.fract() != 0.0 || n < 2.0 {
                    return bad(format!("antenna totals must be integers >= 2, got {n}"));
                }
            }
        }
        if self.kind == ExperimentKind::StrategyComparison {
            if self.fixed_rx < 1 {
                return bad("fixed receive antennas must be positive".into());
            }
            if let Some(&n) = self.sweep.iter().find(|&&n| n as usize <= self.fixed_rx) {
                return bad(format!(
                    "N={n} leaves no transmit antenna with N_r={}",
                    self.fixed_rx
                ));
            }
        }
        if self.kind == ExperimentKind::FdVsHdSnr {
            if self.sigma2_series.is_empty() {
                return bad("fd_vs_hd_snr needs at least one SI error variance".into());
            }
            if self.sweep.iter().any(|s| !s.is_finite()) {
                return bad("SNR values must be finite".into());
            }
        }
        if self.kind != ExperimentKind::Validate {
            self.base.validate().map_err(ExperimentError::from)?;
        }
        self.options
            .solver
            .validate()
            .map_err(|e| ExperimentError::Spec(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn float(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trials: u64,
    pub table: Table,
    /// Some validation check failed.
    pub validation_failed: bool,
    /// Some bound did not converge.
    pub solver_failed: bool,
}

impl ExperimentReport {
    pub fn provenance(&self) -> String {
        format!(
            "fdtc {} seed={} trials={} version={}",
            self.kind, self.seed, self.trials, VERSION
        )
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: &mut W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# {}", self.provenance())?;
        writeln!(out, "{}", self.table.columns.join(","))?;
        for row in &self.table.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: &mut W) -> Result<()> {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, Value> = self
                    .table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(map)
            })
            .collect();
        let doc = json!({
            "provenance": {
                "experiment": self.kind.name(),
                "seed": self.seed,
                "trials": self.trials,
                "version": VERSION,
            },
            "columns": self.table.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(())
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut report = ExperimentReport {
        kind: spec.kind,
        seed: spec.seed,
        trials: spec.trials,
        table: Table::new(&[]),
        validation_failed: false,
        solver_failed: false,
    };
    match spec.kind {
        ExperimentKind::OpVsAntennas => op_vs_antennas(spec, &mut report),
        ExperimentKind::TcVsAntennas => tc_vs_antennas(spec, &mut report),
        ExperimentKind::StrategyComparison => strategy_comparison(spec, &mut report),
        ExperimentKind::FdVsHdSnr => fd_vs_hd_snr(spec, &mut report),
        ExperimentKind::SinglePoint => single_point(spec, &mut report)?,
        ExperimentKind::Validate => validate_suite(spec, &mut report),
    }
    Ok(report)
}

fn status<T, E: fmt::Display>(r: &std::result::Result<T, E>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {}", e.to_string().replace(',', ";")),
    }
}

fn nan_on_err<E>(r: &std::result::Result<f64, E>) -> f64 {
    r.as_ref().copied().unwrap_or(f64::NAN)
}

fn antenna_points(
    spec: &ExperimentSpec,
) -> Vec<(usize, Split, std::result::Result<AntennaConfig, String>)> {
    let mut points = Vec::new();
    for &n in &spec.sweep {
        let total = n as usize;
        for split in [Split::Balanced, Split::TransmitHeavy] {
            points.push((total, split, split.config(total)));
        }
    }
    points
}

fn op_vs_antennas(spec: &ExperimentSpec, report: &mut ExperimentReport) {
    let mut table = Table::new(&[
        "N",
        "N_t",
        "N_r",
        "split",
        "op_sim",
        "op_sim_stderr",
        "op_lb_approx",
        "op_lb_exact",
        "status",
    ]);
    for (total, split, config) in antenna_points(spec) {
        let Ok(config) = config else {
            let msg = config.unwrap_err();
            table.push(vec![
                total.into(),
                Cell::Int(0),
                Cell::Int(0),
                split.name().into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                format!("error: {msg}").into(),
            ]);
            continue;
        };
        let params = SystemParams {
            config,
            ..spec.base
        };
        let sim = estimate_outage(&params, spec.trials, spec.seed);
        let approx = op_lb(&params, &spec.options);
        let exact = op_lb_exact(&params, &spec.options, spec.exact_samples, spec.seed);
        let state = [status(&sim), status(&approx), status(&exact)]
            .into_iter()
            .find(|s| s != "ok")
            .unwrap_or_else(|| "ok".into());
        table.push(vec![
            total.into(),
            config.tx.into(),
            config.rx.into(),
            split.name().into(),
            sim.as_ref().map(|e| e.p_hat).unwrap_or(f64::NAN).into(),
            sim.as_ref().map(|e| e.std_err).unwrap_or(f64::NAN).into(),
            nan_on_err(&approx).into(),
            nan_on_err(&exact).into(),
            state.into(),
        ]);
    }
    report.table = table;
}

fn tc_vs_antennas(spec: &ExperimentSpec, report: &mut ExperimentReport) {
    let mut table = Table::new(&[
        "N",
        "N_t",
        "N_r",
        "split",
        "tc_sim",
        "tc_ub",
        "lambda_sim",
        "lambda_ub",
        "zero_tc_sim",
        "zero_tc_ub",
        "status",
    ]);
    let search = TcSearch {
        trials: spec.trials,
        ..spec.search
    };
    for (total, split, config) in antenna_points(spec) {
        let Ok(config) = config else {
            let msg = config.unwrap_err();
            table.push(vec![
                total.into(),
                Cell::Int(0),
                Cell::Int(0),
                split.name().into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                false.into(),
                false.into(),
                format!("error: {msg}").into(),
            ]);
            continue;
        };
        let params = SystemParams {
            config,
            ..spec.base
        };
        let sim = simulated_tc(&params, &search, spec.seed);
        let ub = tc_upper_bound(&params, &spec.options);
        if matches!(&ub, Ok(r) if !r.converged) {
            report.solver_failed = true;
        }
        let mut state = [status(&sim), status(&ub)]
            .into_iter()
            .find(|s| s != "ok")
            .unwrap_or_else(|| "ok".into());
        if matches!(&ub, Ok(r) if !r.converged) {
            state = "solver_failed".into();
        }
        table.push(vec![
            total.into(),
            config.tx.into(),
            config.rx.into(),
            split.name().into(),
            sim.as_ref().map(|t| t.capacity).unwrap_or(f64::NAN).into(),
            ub.as_ref().map(|r| r.tc_ub).unwrap_or(f64::NAN).into(),
            sim.as_ref().map(|t| t.lambda).unwrap_or(f64::NAN).into(),
            ub.as_ref()
                .map(|r| r.lambda_solved)
                .unwrap_or(f64::NAN)
                .into(),
            sim.as_ref().map(|t| t.zero_tc).unwrap_or(false).into(),
            ub.as_ref().map(|r| r.zero_tc).unwrap_or(false).into(),
            state.into(),
        ]);
    }
    report.table = table;
}

fn strategy_comparison(spec: &ExperimentSpec, report: &mut ExperimentReport) {
    let mut table = Table::new(&[
        "N",
        "N_t",
        "N_r",
        "strategy",
        "tc_ub",
        "zero_tc_ub",
        "tc_sim",
        "zero_tc_sim",
        "status",
    ]);
    let search = TcSearch {
        trials: spec.trials,
        ..spec.search
    };
    for &n in &spec.sweep {
        let total = n as usize;
        let config = AntennaConfig::with_total(total, spec.fixed_rx).expect("validated sweep");
        for strategy in Strategy::FULL_DUPLEX {
            let params = SystemParams {
                config,
                strategy,
                ..spec.base
            };
            let ub = tc_upper_bound(&params, &spec.options);
            let sim = spec
                .simulate_tc
                .then(|| simulated_tc(&params, &search, spec.seed));
            let mut state = status(&ub);
            if let Some(Err(e)) = &sim {
                state = format!("error: {}", e.to_string().replace(',', ";"));
            }
            if matches!(&ub, Ok(r) if !r.converged) {
                report.solver_failed = true;
                state = "solver_failed".into();
            }
            let (tc_sim, zero_sim) = match &sim {
                Some(Ok(t)) => (t.capacity, Cell::Bool(t.zero_tc)),
                Some(Err(_)) => (f64::NAN, Cell::Bool(false)),
                None => (f64::NAN, Cell::Text(String::new())),
            };
            table.push(vec![
                total.into(),
                config.tx.into(),
                config.rx.into(),
                strategy.name().into(),
                ub.as_ref().map(|r| r.tc_ub).unwrap_or(f64::NAN).into(),
                ub.as_ref().map(|r| r.zero_tc).unwrap_or(false).into(),
                tc_sim.into(),
                zero_sim,
                state.into(),
            ]);
        }
    }
    report.table = table;
}

fn fd_vs_hd_snr(spec: &ExperimentSpec, report: &mut ExperimentReport) {
    let mut table = Table::new(&[
        "snr_db",
        "tc_ub_fd",
        "tc_ub_hd",
        "sigma2_si",
        "zero_tc_fd",
        "zero_tc_hd",
        "status",
    ]);
    let fd_strategy = if spec.base.strategy.is_full_duplex() {
        spec.base.strategy
    } else {
        Strategy::ProposedFd
    };
    for &sigma2_si in &spec.sigma2_series {
        for &snr_db in &spec.sweep {
            let power = 10f64.powf(snr_db / 10.0);
            let fd = SystemParams {
                power,
                sigma2_si,
                strategy: fd_strategy,
                ..spec.base
            };
            let hd = SystemParams {
                strategy: Strategy::HalfDuplex,
                ..fd
            };
            let rf = tc_upper_bound(&fd, &spec.options);
            let rh = tc_upper_bound(&hd, &spec.options);
            let mut state = [status(&rf), status(&rh)]
                .into_iter()
                .find(|s| s != "ok")
                .unwrap_or_else(|| "ok".into());
            if matches!(&rf, Ok(r) if !r.converged) || matches!(&rh, Ok(r) if !r.converged) {
                report.solver_failed = true;
                state = "solver_failed".into();
            }
            table.push(vec![
                snr_db.into(),
                rf.as_ref().map(|r| r.tc_ub).unwrap_or(f64::NAN).into(),
                rh.as_ref().map(|r| r.tc_ub).unwrap_or(f64::NAN).into(),
                sigma2_si.into(),
                rf.as_ref().map(|r| r.zero_tc).unwrap_or(false).into(),
                rh.as_ref().map(|r| r.zero_tc).unwrap_or(false).into(),
                state.into(),
            ]);
        }
    }
    report.table = table;
}

fn single_point(spec: &ExperimentSpec, report: &mut ExperimentReport) -> Result<()> {
    let params = spec.base;
    let chain = AnalyticChain::for_params(&params, &spec.options)?;
    let result = chain.evaluate(&spec.options.solver);
    let op_at_lambda = chain.op_lb(params.lambda)?;
    report.solver_failed = !result.converged;
    let mut table = Table::new(&[
        "N",
        "N_t",
        "N_r",
        "strategy",
        "lambda",
        "omega",
        "op_lb_approx",
        "order",
        "lambda_solved",
        "op_lb_at_lambda",
        "tc_ub",
        "converged",
        "convexity_warning",
        "zero_tc",
        "status",
    ]);
    table.push(vec![
        params.config.total.into(),
        params.config.tx.into(),
        params.config.rx.into(),
        params.strategy.name().into(),
        params.lambda.into(),
        result.omega.into(),
        op_at_lambda.into(),
        (result.order as usize).into(),
        result.lambda_solved.into(),
        result.op_lb_at_lambda.into(),
        result.tc_ub.into(),
        result.converged.into(),
        result.convexity_warning.into(),
        result.zero_tc.into(),
        if result.converged {
            "ok"
        } else {
            "solver_failed"
        }
        .into(),
    ]);
    report.table = table;
    if let Some(path) = &spec.trial_dump {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        dump_trials(&params, spec.trials, spec.seed, &mut file)?;
        file.flush()?;
    }
    if let Some(path) = &spec.realization_dump {
        let deployment = params.deployment()?;
        let realization = sample_network(&deployment, &mut trial_rng(spec.seed, 0));
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut file, &realization.dump(spec.seed, &deployment))?;
        writeln!(file)?;
        file.flush()?;
    }
    Ok(())
}

/// One line of the validation suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Empirical distance of the `n`-th nearest interferer over `samples`
/// independent deployments.
pub fn nearest_distance_samples(
    params: &SystemParams,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let deployment = params.deployment()?;
    Ok((0..samples)
        .map(|t| {
            sample_network(&deployment, &mut trial_rng(seed, t))
                .nth_nearest_distance(n)
                .unwrap_or(f64::INFINITY)
        })
        .collect())
}

/// The oracle suite: moment oracles, root-finder cross-check and the
/// nearest-neighbour distance law.
pub fn validation_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, reference: f64, tolerance: f64, relative: bool| {
        let err = if relative {
            ((value - reference) / reference).abs()
        } else {
            (value - reference).abs()
        };
        checks.push(Check {
            name: name.to_string(),
            value,
            reference,
            tolerance,
            passed: err <= tolerance,
        });
    };

    match moment_psi_power_oracle(4.0, 1_000_000, seed) {
        Ok(est) => {
            let selected = select_psi_moment(est, 4.0);
            push(
                "psi_moment_alpha4",
                est,
                crate::bounds::psi_pow_moment(4.0),
                0.01,
                true,
            );
            push(
                "psi_moment_selects_direct",
                f64::from(u8::from(selected == Some(PsiMoment::Direct))),
                1.0,
                0.0,
                false,
            );
        }
        Err(_) => push("psi_moment_alpha4", f64::NAN, 1.0, 0.01, true),
    }

    let hd_moment =
        crate::bounds::sample_mean_chunks(1_000_000, seed ^ 0x5eed, |rng| draw_cn(rng).norm());
    push("hd_moment_alpha4", hd_moment, h_pow_moment(4.0), 0.01, true);

    let curve = OutageCurve::nearest_neighbor(2).expect("valid order");
    let solver = crate::numerics::SolverConfig::default();
    match (
        newton_density(&curve, 1.0, 0.1, &solver),
        bisection_density(&curve, 1.0, 0.1, &solver),
    ) {
        (Ok(newton), Ok(bisect)) => {
            push(
                "newton_vs_bisection",
                newton.lambda,
                bisect.lambda,
                1e-8,
                false,
            );
            push(
                "newton_residual",
                curve.evaluate(newton.lambda, 1.0).unwrap_or(f64::NAN),
                0.1,
                1e-8,
                false,
            );
        }
        _ => push("newton_vs_bisection", f64::NAN, 0.0, 1e-8, false),
    }

    let params = SystemParams::default();
    for n in 1..=3usize {
        let name = format!("nearest_distance_ks_n{n}");
        match nearest_distance_samples(&params, n, 10_000, seed.wrapping_add(n as u64)) {
            Ok(mut samples) => {
                let lambda = params.lambda;
                let ks = ks_statistic(&mut samples, |r| {
                    if r.is_infinite() {
                        1.0
                    } else {
                        regularized_gamma_pair(n as f64, lambda * std::f64::consts::PI * r * r)
                            .map(|p| p.0)
                            .unwrap_or(f64::NAN)
                    }
                });
                push(&name, ks, 0.0, 0.02, false);
            }
            Err(_) => push(&name, f64::NAN, 0.0, 0.02, false),
        }
    }

    let config = AntennaConfig::new(7, 3).expect("valid");
    let allowed = cancellable_pairs(Strategy::ProposedFd, &config).map(|n| n as f64);
    push(
        "cancellable_pairs_7x3",
        allowed.unwrap_or(f64::NAN),
        1.0,
        0.0,
        false,
    );
    checks
}

fn validate_suite(spec: &ExperimentSpec, report: &mut ExperimentReport) {
    let checks = validation_checks(spec.seed);
    let mut table = Table::new(&["check", "value", "reference", "tolerance", "passed"]);
    for c in &checks {
        table.push(vec![
            c.name.clone().into(),
            c.value.into(),
            c.reference.into(),
            c.tolerance.into(),
            c.passed.into(),
        ]);
    }
    report.validation_failed = checks.iter().any(|c| !c.passed);
    report.table = table;
}
