//! Closed-form outage lower bound and transmission-capacity upper bound for
//! full and half duplex, plus the Monte-Carlo pieces used to cross-check them.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::beamforming::{cancellable_pairs, transmit_beam, BeamformingError, Strategy};
use crate::channel::{draw_cn, draw_rayleigh, AntennaConfig, ChannelError};
use crate::numerics::{
    gamma_fn, regularized_gamma_pair, solve_density, NumericsError, OutageCurve, SolveMethod,
    SolverConfig,
};
use crate::simulator::{hd_threshold, trial_rng, SimulationError, SystemParams};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Params(#[from] SimulationError),
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("{0} needs at least {1} samples")]
    TooFewSamples(&'static str, u64),
    #[error("{0} is not a {1} strategy")]
    WrongMode(Strategy, &'static str),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// `E{ψ^{2/α}}` for `ψ ~ Γ(2, 1)`, i.e. `Γ(2 + 2/α)`.
pub fn psi_pow_moment(alpha: f64) -> f64 {
    gamma_fn(2.0 + 2.0 / alpha).expect("positive argument")
}

/// The halved constant `Γ(2 + 2/α)/2`, the competing reading of the moment.
pub fn psi_pow_moment_halved(alpha: f64) -> f64 {
    0.5 * psi_pow_moment(alpha)
}

/// `E{|h|^{4/α}}` for `h ~ CN(0, 1)`, i.e. `Γ(1 + 2/α)`.
pub fn h_pow_moment(alpha: f64) -> f64 {
    gamma_fn(1.0 + 2.0 / alpha).expect("positive argument")
}

pub const MIN_ORACLE_SAMPLES: u64 = 100_000;

/// Monte-Carlo estimate of `E{ψ^{2/α}}` with `ψ = |x|² + |y|²`,
/// `x, y ~ CN(0, 1)`.
pub fn moment_psi_power_oracle(alpha: f64, samples: u64, seed: u64) -> Result<f64> {
    if samples < MIN_ORACLE_SAMPLES {
        return Err(BoundsError::TooFewSamples(
            "moment oracle",
            MIN_ORACLE_SAMPLES,
        ));
    }
    let exponent = if alpha.is_infinite() {
        0.0
    } else {
        2.0 / alpha
    };
    let sum: f64 = sample_mean_chunks(samples, seed, |rng| {
        let psi = draw_cn(rng).norm_sqr() + draw_cn(rng).norm_sqr();
        psi.powf(exponent)
    });
    Ok(sum)
}

/// Mean of `f` over `samples` draws, accumulated per fixed-size chunk so the
/// sum does not depend on thread scheduling.
pub(crate) fn sample_mean_chunks<F>(samples: u64, seed: u64, f: F) -> f64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    const CHUNK: u64 = 4_096;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, c);
            let n = CHUNK.min(samples - c * CHUNK);
            (0..n).map(|_| f(&mut rng)).sum::<f64>()
        })
        .collect();
    partial.iter().sum::<f64>() / samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiMoment {
    Direct,
    Halved,
}

/// Which closed form a Monte-Carlo estimate supports: `Some` only when it is
/// within 1% of exactly one candidate.
pub fn select_psi_moment(estimate: f64, alpha: f64) -> Option<PsiMoment> {
    let near = |c: f64| ((estimate - c) / c).abs() <= 0.01;
    match (
        near(psi_pow_moment(alpha)),
        near(psi_pow_moment_halved(alpha)),
    ) {
        (true, false) => Some(PsiMoment::Direct),
        (false, true) => Some(PsiMoment::Halved),
        _ => None,
    }
}

/// Moments feeding the analytic chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentTable {
    /// `E|h′|² = σ²`.
    pub e_residual_si: f64,
    /// `E ψ = 2`.
    pub e_psi: f64,
    /// `E ψ^{2/α} = Γ(2 + 2/α)`.
    pub e_psi_pow: f64,
    /// Upper bound on `E γ`.
    pub e_gamma_ub: f64,
    /// `E |h|^{4/α} = Γ(1 + 2/α)`.
    pub e_h_pow_hd: f64,
}

impl MomentTable {
    pub fn for_strategy(
        strategy: Strategy,
        config: &AntennaConfig,
        alpha: f64,
        sigma2_si: f64,
    ) -> Self {
        let (tx, rx) = (config.tx as f64, config.rx as f64);
        let e_gamma_ub = if strategy.nulls_si_at_transmitter(config) {
            rx * (tx - rx)
        } else if strategy == Strategy::PartialZfOnlyFd {
            // no transmit shaping: γ = ‖H e₁‖², a sum of N_r unit exponentials
            rx
        } else {
            tx * rx
        };
        Self {
            e_residual_si: sigma2_si,
            e_psi: 2.0,
            e_psi_pow: psi_pow_moment(alpha),
            e_gamma_ub,
            e_h_pow_hd: h_pow_moment(alpha),
        }
    }

    pub fn from_params(params: &SystemParams) -> Self {
        Self::for_strategy(
            params.strategy,
            &params.config,
            params.alpha,
            params.sigma2_si,
        )
    }
}

/// Radius of the dominating-interferer region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominatingRadius {
    Finite(f64),
    /// Outage regardless of where interferers sit.
    Infinite,
}

/// One draw of the quantities entering the dominating radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub gamma: f64,
    /// Interference power of one pair (one node in half duplex).
    pub psi: f64,
    pub residual_si: f64,
    /// `|v|²` before division by the transmit power.
    pub noise: f64,
}

/// `R_d = [βψ / (L^{−α}γ − β(|h′|² + |v|²/P))]^{1/α}` at threshold `beta`.
pub fn dominating_radius(
    sample: &LinkSample,
    beta: f64,
    pair_distance: f64,
    alpha: f64,
    power: f64,
) -> DominatingRadius {
    let denom = pair_distance.powf(-alpha) * sample.gamma
        - beta * (sample.residual_si + sample.noise / power);
    if denom > 0.0 {
        DominatingRadius::Finite((beta * sample.psi / denom).powf(1.0 / alpha))
    } else {
        DominatingRadius::Infinite
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Omega {
    Value(f64),
    /// The mean desired power cannot beat the interference-free loss term.
    ZeroTc,
}

/// Full-duplex Ω. With `include_noise` the subtracted loss is
/// `β(σ² + 1/P)` (unit-norm receive filter), otherwise `βσ²`.
pub fn compute_omega(params: &SystemParams, moments: &MomentTable, include_noise: bool) -> Omega {
    let noise = if include_noise {
        1.0 / params.power
    } else {
        0.0
    };
    omega_from(
        params.beta,
        moments.e_psi_pow,
        moments.e_gamma_ub,
        moments.e_residual_si + noise,
        params.pair_distance,
        params.alpha,
    )
}

/// `β^{2/α} m (Eγ/L^α − β·loss)^{−2/α}`.
pub fn omega_from(
    beta: f64,
    m: f64,
    e_gamma: f64,
    loss: f64,
    pair_distance: f64,
    alpha: f64,
) -> Omega {
    let margin = e_gamma / pair_distance.powf(alpha) - beta * loss;
    if !(margin > 0.0) {
        return Omega::ZeroTc;
    }
    let p = 2.0 / alpha;
    Omega::Value(beta.powf(p) * m * margin.powf(-p))
}

/// Options shared by the analytic bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundOptions {
    pub include_noise: bool,
    /// Half-duplex outage curve as printed, `γ(l, ·)/Γ(l + 1)`, instead of
    /// the nearest-neighbour order `l + 1`.
    pub hd_literal_order: bool,
    pub solver: SolverConfig,
}

/// Everything the bound needs once the mode-specific choices are made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticChain {
    pub threshold: f64,
    /// Moment of the per-pair interference power raised to `2/α`.
    pub interference_moment: f64,
    pub e_gamma: f64,
    /// Loss subtracted from the mean desired power, before multiplying by the
    /// threshold.
    pub loss: f64,
    pub curve: OutageCurve,
    /// Links served per unit density: 1 in full duplex, 2 in half duplex.
    pub links: f64,
    pub pair_distance: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub rate: f64,
}

impl AnalyticChain {
    pub fn full_duplex(params: &SystemParams, opts: &BoundOptions) -> Result<Self> {
        params.validate()?;
        if !params.strategy.is_full_duplex() {
            return Err(BoundsError::WrongMode(params.strategy, "full-duplex"));
        }
        let moments = MomentTable::from_params(params);
        let pairs = cancellable_pairs(params.strategy, &params.config)? as u32;
        let noise = if opts.include_noise {
            1.0 / params.power
        } else {
            0.0
        };
        Ok(Self {
            threshold: params.beta,
            interference_moment: moments.e_psi_pow,
            e_gamma: moments.e_gamma_ub,
            loss: moments.e_residual_si + noise,
            curve: OutageCurve::nearest_neighbor(pairs + 1)?,
            links: 1.0,
            pair_distance: params.pair_distance,
            alpha: params.alpha,
            epsilon: params.epsilon,
            rate: params.rate(),
        })
    }

    pub fn half_duplex(params: &SystemParams, opts: &BoundOptions) -> Result<Self> {
        params.validate()?;
        if params.strategy.is_full_duplex() {
            return Err(BoundsError::WrongMode(params.strategy, "half-duplex"));
        }
        let moments = MomentTable::from_params(params);
        let nodes = cancellable_pairs(params.strategy, &params.config)? as u32;
        let rate = params.rate();
        let threshold = hd_threshold(rate);
        let curve = if opts.hd_literal_order {
            OutageCurve::hd_literal(nodes)?
        } else {
            OutageCurve::nearest_neighbor(nodes + 1)?
        };
        Ok(Self {
            threshold,
            interference_moment: moments.e_h_pow_hd,
            e_gamma: moments.e_gamma_ub,
            loss: if opts.include_noise {
                1.0 / params.power
            } else {
                0.0
            },
            curve,
            links: 2.0,
            pair_distance: params.pair_distance,
            alpha: params.alpha,
            epsilon: params.epsilon,
            rate,
        })
    }

    pub fn for_params(params: &SystemParams, opts: &BoundOptions) -> Result<Self> {
        if params.strategy.is_full_duplex() {
            Self::full_duplex(params, opts)
        } else {
            Self::half_duplex(params, opts)
        }
    }

    pub fn omega(&self) -> Omega {
        omega_from(
            self.threshold,
            self.interference_moment,
            self.e_gamma,
            self.loss,
            self.pair_distance,
            self.alpha,
        )
    }

    /// Solves the outage curve for ε and converts the density to capacity.
    pub fn evaluate(&self, solver: &SolverConfig) -> BoundResult {
        let order = self.curve.order() as u32;
        let omega = match self.omega() {
            Omega::ZeroTc => {
                return BoundResult {
                    omega: f64::INFINITY,
                    lambda_solved: 0.0,
                    op_lb_at_lambda: 0.0,
                    tc_ub: 0.0,
                    converged: true,
                    convexity_warning: false,
                    zero_tc: true,
                    order,
                    iterations: 0,
                    method: None,
                }
            }
            Omega::Value(w) => w,
        };
        match solve_density(&self.curve, omega, self.epsilon, solver) {
            Ok(sol) => BoundResult {
                omega,
                lambda_solved: sol.lambda,
                op_lb_at_lambda: self.curve.evaluate(sol.lambda, omega).unwrap_or(f64::NAN),
                tc_ub: self.links * sol.lambda * (1.0 - self.epsilon) * self.rate,
                converged: sol.residual <= solver.abs_tolerance,
                convexity_warning: sol.convexity_warning,
                zero_tc: false,
                order,
                iterations: sol.iterations,
                method: Some(sol.method),
            },
            Err(_) => BoundResult {
                omega,
                lambda_solved: f64::NAN,
                op_lb_at_lambda: f64::NAN,
                tc_ub: 0.0,
                converged: false,
                convexity_warning: false,
                zero_tc: false,
                order,
                iterations: 0,
                method: None,
            },
        }
    }

    /// Outage lower bound at density λ under this chain.
    pub fn op_lb(&self, lambda: f64) -> Result<f64> {
        match self.omega() {
            Omega::ZeroTc => Ok(1.0),
            Omega::Value(w) if w == 0.0 => Ok(0.0),
            Omega::Value(w) => Ok(self.curve.evaluate(lambda, w)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub omega: f64,
    pub lambda_solved: f64,
    pub op_lb_at_lambda: f64,
    pub tc_ub: f64,
    pub converged: bool,
    pub convexity_warning: bool,
    pub zero_tc: bool,
    /// Order of the incomplete-gamma outage curve.
    pub order: u32,
    pub iterations: usize,
    #[serde(skip)]
    pub method: Option<SolveMethod>,
}

pub fn tc_upper_bound_fd(params: &SystemParams, opts: &BoundOptions) -> Result<BoundResult> {
    Ok(AnalyticChain::full_duplex(params, opts)?.evaluate(&opts.solver))
}

pub fn tc_upper_bound_hd(params: &SystemParams, opts: &BoundOptions) -> Result<BoundResult> {
    Ok(AnalyticChain::half_duplex(params, opts)?.evaluate(&opts.solver))
}

pub fn tc_upper_bound(params: &SystemParams, opts: &BoundOptions) -> Result<BoundResult> {
    Ok(AnalyticChain::for_params(params, opts)?.evaluate(&opts.solver))
}

/// Jensen-approximated outage lower bound at `params.lambda`.
pub fn op_lb(params: &SystemParams, opts: &BoundOptions) -> Result<f64> {
    AnalyticChain::for_params(params, opts)?.op_lb(params.lambda)
}

/// Capacity `λ(1 − ε)R` for a solved density (full duplex).
pub fn tc_from_lambda(lambda: f64, epsilon: f64, rate: f64) -> f64 {
    lambda * (1.0 - epsilon) * rate
}

/// Draws the strategy's effective gain γ from fresh channels.
pub fn draw_gamma<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<f64> {
    let c = &params.config;
    let h = draw_rayleigh(c.rx, c.tx, rng);
    let si = params
        .strategy
        .nulls_si_at_transmitter(c)
        .then(|| draw_rayleigh(c.rx, c.tx, rng));
    Ok(transmit_beam(params.strategy, c, &h, si.as_ref())?.gain)
}

/// Outage lower bound averaged over the dominating radius instead of using
/// the mean-value approximation: `E{γ(n, λπR_d²)/Γ(n)}` with `R_d` infinite
/// counting as certain outage. The noise term follows `include_noise`.
pub fn op_lb_exact(
    params: &SystemParams,
    opts: &BoundOptions,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    let chain = AnalyticChain::for_params(params, opts)?;
    if samples == 0 {
        return Err(BoundsError::TooFewSamples("exact outage bound", 1));
    }
    let fd = params.strategy.is_full_duplex();
    let sigma = params.sigma2_si.sqrt();
    let order = chain.curve.order();
    let weight = chain.curve.weight();
    let lambda = params.lambda;
    // the sampler cannot fail once the chain validated the parameters
    draw_gamma(params, &mut trial_rng(seed, 0))?;
    let mean = sample_mean_chunks(samples, seed, |rng| {
        let gamma = draw_gamma(params, rng).expect("validated parameters");
        let psi: f64 = if fd {
            rng.sample::<f64, _>(Exp1) + rng.sample::<f64, _>(Exp1)
        } else {
            rng.sample(Exp1)
        };
        let residual_si = if fd {
            (sigma * draw_cn(rng)).norm_sqr()
        } else {
            0.0
        };
        let noise: f64 = Exp1.sample(rng);
        let sample = LinkSample {
            gamma,
            psi,
            residual_si,
            noise: if opts.include_noise { noise } else { 0.0 },
        };
        match dominating_radius(
            &sample,
            chain.threshold,
            params.pair_distance,
            params.alpha,
            params.power,
        ) {
            DominatingRadius::Infinite => 1.0,
            DominatingRadius::Finite(r) => {
                if lambda == 0.0 {
                    0.0
                } else {
                    weight
                        * regularized_gamma_pair(order, lambda * std::f64::consts::PI * r * r)
                            .expect("valid arguments")
                            .0
                }
            }
        }
    });
    Ok(mean.clamp(0.0, 1.0))
}
