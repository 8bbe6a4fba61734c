//! Monte-Carlo engine: per-trial SINR at the typical receiver, outage
//! estimation and empirical inversion for transmission capacity.
//!
//! Trial `t` of a run with seed `s` always uses the ChaCha stream `t` of key
//! `s`, so results do not depend on thread scheduling. Runs at different
//! densities, thresholds or SI error variances share those streams: for a
//! fixed expected pair count the sampled distances scale as `1/√λ` and the
//! SI error as `σ`, which makes estimated outage exactly monotone in all three.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::beamforming::{build, cancellable_pairs, BeamformerSet, BeamformingError, Strategy};
use crate::channel::{
    draw_channel_set, draw_cn_vector, AntennaConfig, CVector, ChannelError, ChannelSet,
    InterfererModel,
};
use crate::geometry::{sample_network, DeploymentParams, GeometryError, NetworkRealization};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
    #[error("no density up to {lambda_hi} exceeds the target outage (last estimate {outage})")]
    Bracket { lambda_hi: f64, outage: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimulationError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub config: AntennaConfig,
    /// Link distance `L`.
    pub pair_distance: f64,
    /// Transmit power `P` (linear); noise has unit variance.
    pub power: f64,
    pub alpha: f64,
    /// SINR threshold β (linear). Half duplex uses `(1 + β)² − 1` so that both
    /// modes target the same rate.
    pub beta: f64,
    pub epsilon: f64,
    pub sigma2_si: f64,
    pub lambda: f64,
    pub strategy: Strategy,
    /// Expected number of interfering pairs in the simulation window.
    pub mean_pairs: f64,
    pub interferer_model: InterfererModel,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            config: AntennaConfig::new(7, 3).expect("valid default"),
            pair_distance: 1.0,
            power: 1.0,
            alpha: 4.0,
            beta: 1.0,
            epsilon: 0.1,
            sigma2_si: 0.1,
            lambda: 0.1,
            strategy: Strategy::ProposedFd,
            mean_pairs: 200.0,
            interferer_model: InterfererModel::Effective,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimulationError::Params(msg));
        let c = &self.config;
        if c.tx < 1 || c.rx < 1 || c.total != c.tx + c.rx {
            return bad(format!(
                "antenna split N={} N_t={} N_r={}",
                c.total, c.tx, c.rx
            ));
        }
        if !(self.pair_distance > 0.0) || !self.pair_distance.is_finite() {
            return bad(format!(
                "link distance must be positive, got {}",
                self.pair_distance
            ));
        }
        if !(self.power > 0.0) {
            return bad(format!(
                "transmit power must be positive, got {}",
                self.power
            ));
        }
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return bad(format!(
                "path-loss exponent must exceed 2, got {}",
                self.alpha
            ));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad(format!(
                "SINR threshold must be positive, got {}",
                self.beta
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!(
                "target outage must lie in (0, 1), got {}",
                self.epsilon
            ));
        }
        if !(self.sigma2_si >= 0.0) || !self.sigma2_si.is_finite() {
            return bad(format!(
                "SI error variance must be non-negative, got {}",
                self.sigma2_si
            ));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("density must be non-negative, got {}", self.lambda));
        }
        if !(self.mean_pairs > 0.0) || !self.mean_pairs.is_finite() {
            return bad(format!(
                "expected pair count must be positive, got {}",
                self.mean_pairs
            ));
        }
        cancellable_pairs(self.strategy, &self.config)?;
        Ok(())
    }

    /// Target rate `R = log₂(1 + β)`.
    pub fn rate(&self) -> f64 {
        (1.0 + self.beta).log2()
    }

    /// Threshold the typical receiver's SINR is compared against.
    pub fn sinr_threshold(&self) -> f64 {
        if self.strategy.is_full_duplex() {
            self.beta
        } else {
            hd_threshold(self.rate())
        }
    }

    /// Transmission capacity at density λ: `λ(1 − ε)R`, doubled in half
    /// duplex where each pair alternates directions.
    pub fn capacity(&self, lambda: f64) -> f64 {
        let links = if self.strategy.is_full_duplex() {
            1.0
        } else {
            2.0
        };
        links * lambda * (1.0 - self.epsilon) * self.rate()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn deployment(&self) -> Result<DeploymentParams> {
        Ok(DeploymentParams::with_mean_pairs(
            self.lambda,
            self.mean_pairs,
            self.pair_distance,
        )?)
    }
}

/// Half-duplex threshold `2^{2R} − 1` for rate `R`.
pub fn hd_threshold(rate: f64) -> f64 {
    (2.0 * rate).exp2() - 1.0
}

/// Powers at the output of the typical receive filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinrComponents {
    pub desired: f64,
    /// Uncancelled interferers only.
    pub interference: f64,
    pub residual_si: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub sinr: f64,
    pub outage: bool,
    pub components: SinrComponents,
    /// Power left over from the zero-forced interferers.
    pub cancelled_interference: f64,
    pub interferers: usize,
    pub cancelled: usize,
    pub degenerate: bool,
}

fn received(z: &CVector, g: &CVector) -> f64 {
    z.dotc(g).norm_sqr()
}

/// Assembles the SINR of one trial from its geometry, channels, beams and
/// receiver noise vector `v`.
pub fn trial_sinr(
    params: &SystemParams,
    realization: &NetworkRealization,
    channels: &ChannelSet,
    beams: &BeamformerSet,
    noise: &CVector,
) -> TrialOutcome {
    let z = &beams.z_typical_rx;
    let desired_signal = &channels.desired * &beams.w_partner_tx;
    let desired = params.pair_distance.powf(-params.alpha) * received(z, &desired_signal);

    let mut cancelled_flags = vec![false; realization.pair_count()];
    for &k in &beams.cancelled {
        cancelled_flags[k] = true;
    }
    let mut interference = 0.0;
    let mut cancelled_interference = 0.0;
    for k in 1..realization.pair_count() {
        let gain = realization.distance(k).powf(-params.alpha);
        let power: f64 = beams.interferer(k).vectors().map(|g| received(z, g)).sum();
        if cancelled_flags[k] {
            cancelled_interference += gain * power;
        } else {
            interference += gain * power;
        }
    }

    let residual_si = if params.strategy.is_full_duplex() {
        received(z, &(&channels.si.error * &beams.w_typical_tx))
    } else {
        0.0
    };
    let noise_power = received(z, noise) / params.power;

    let denominator = interference + residual_si + noise_power;
    let sinr = if denominator > 0.0 {
        desired / denominator
    } else {
        f64::INFINITY
    };
    TrialOutcome {
        sinr,
        outage: sinr < params.sinr_threshold(),
        components: SinrComponents {
            desired,
            interference,
            residual_si,
            noise: noise_power,
        },
        cancelled_interference,
        interferers: realization.interferer_count(),
        cancelled: beams.cancelled.len(),
        degenerate: beams.degenerate,
    }
}

/// Random stream of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws a fresh network, channels and beams and evaluates the SINR.
/// Draw order: geometry, channels, receiver noise.
pub fn run_trial(params: &SystemParams, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let realization = sample_network(&params.deployment()?, rng);
    let layout = params
        .strategy
        .channel_layout(&params.config, params.interferer_model);
    let channels = draw_channel_set(
        &params.config,
        params.sigma2_si,
        realization.interferer_count(),
        &layout,
        rng,
    )?;
    // Sparse networks may hold fewer interferers than there are receive DoFs.
    let budget = cancellable_pairs(params.strategy, &params.config)?;
    let nearest = realization.nearest_pairs(budget.min(realization.interferer_count()))?;
    let beams = build(params.strategy, &channels, nearest, &params.config)?;
    let noise = draw_cn_vector(params.config.rx, rng);
    Ok(trial_sinr(params, &realization, &channels, &beams, &noise))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    /// `√(p̂(1 − p̂)/trials)`.
    pub std_err: f64,
    pub trials: u64,
    pub outages: u64,
    pub degenerate: u64,
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(SimulationError::Params("need at least one trial".into()));
    }
    Ok(())
}

/// Outage fraction over independent trials.
pub fn estimate_outage(params: &SystemParams, trials: u64, seed: u64) -> Result<OutageEstimate> {
    params.validate()?;
    check_trials(trials)?;
    let (outages, degenerate) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let o = run_trial(params, &mut trial_rng(seed, t))?;
            Ok::<_, SimulationError>((u64::from(o.outage), u64::from(o.degenerate)))
        })
        .try_reduce(|| (0u64, 0u64), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let p_hat = outages as f64 / trials as f64;
    Ok(OutageEstimate {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        trials,
        outages,
        degenerate,
    })
}

/// Runs `trials` trials and writes one JSON object per line, in trial order.
pub fn dump_trials<W: Write>(
    params: &SystemParams,
    trials: u64,
    seed: u64,
    out: &mut W,
) -> Result<()> {
    params.validate()?;
    check_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(params, &mut trial_rng(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    for (t, o) in outcomes.iter().enumerate() {
        #[derive(Serialize)]
        struct Line<'a> {
            trial: usize,
            #[serde(flatten)]
            outcome: &'a TrialOutcome,
        }
        serde_json::to_writer(
            &mut *out,
            &Line {
                trial: t,
                outcome: o,
            },
        )?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Empirical density search for the simulated capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcSearch {
    pub trials: u64,
    pub lambda_lo: f64,
    /// Upper end of the bracket is `λ_lo · 2^max_doublings` at most.
    pub max_doublings: u32,
    pub bisection_steps: u32,
}

impl Default for TcSearch {
    fn default() -> Self {
        Self {
            trials: 20_000,
            lambda_lo: 1e-4,
            max_doublings: 20,
            bisection_steps: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TcEstimate {
    pub capacity: f64,
    /// Largest probed density whose estimated outage met the target.
    pub lambda: f64,
    pub outage_at_lambda: f64,
    /// The target is missed already at `λ_lo`.
    pub zero_tc: bool,
    /// Every `(λ, p̂)` pair evaluated, in probe order.
    pub probes: Vec<(f64, f64)>,
}

/// Bisection on the estimated outage curve for `q(λ) = ε`.
pub fn simulated_tc(params: &SystemParams, search: &TcSearch, seed: u64) -> Result<TcEstimate> {
    params.validate()?;
    if !(search.lambda_lo > 0.0) {
        return Err(SimulationError::Params(format!(
            "lower density must be positive, got {}",
            search.lambda_lo
        )));
    }
    let mut probes = Vec::new();
    let mut probe = |lambda: f64| -> Result<f64> {
        let p = estimate_outage(&params.with_lambda(lambda), search.trials, seed)?.p_hat;
        probes.push((lambda, p));
        Ok(p)
    };
    let eps = params.epsilon;

    let mut lo = search.lambda_lo;
    let mut q_lo = probe(lo)?;
    if q_lo > eps {
        return Ok(TcEstimate {
            capacity: 0.0,
            lambda: 0.0,
            outage_at_lambda: q_lo,
            zero_tc: true,
            probes,
        });
    }
    let mut hi = lo;
    let mut doublings = 0;
    loop {
        hi *= 2.0;
        doublings += 1;
        let q = probe(hi)?;
        if q > eps {
            break;
        }
        lo = hi;
        q_lo = q;
        if doublings >= search.max_doublings {
            return Err(SimulationError::Bracket {
                lambda_hi: hi,
                outage: q,
            });
        }
    }
    for _ in 0..search.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let q = probe(mid)?;
        if q > eps {
            hi = mid;
        } else {
            lo = mid;
            q_lo = q;
        }
    }
    Ok(TcEstimate {
        capacity: params.capacity(lo),
        lambda: lo,
        outage_at_lambda: q_lo,
        zero_tc: false,
        probes,
    })
}
