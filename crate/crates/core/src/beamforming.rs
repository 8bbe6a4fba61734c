//! Transmit and receive beamformers for the proposed full-duplex design, the
//! three full-duplex baselines, and half duplex.
//!
//! Every transmitter shapes its beam from its own channels only. The typical
//! receiver then zero-forces a set of interference directions (its own
//! estimated SI and/or the nearest interferers) and normalizes its filter so
//! that `zᴴ u = 1` for the desired receive direction `u`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    dominant_singular_triple, null_space, AntennaConfig, CMatrix, CVector, ChannelError,
    ChannelLayout, ChannelSet, InterfererLink, InterfererModel, C64,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamformingError {
    #[error("{strategy} cannot run with N_t={tx}, N_r={rx}: {reason}")]
    Capability {
        strategy: Strategy,
        tx: usize,
        rx: usize,
        reason: &'static str,
    },
    #[error("{0}")]
    RankDeficient(&'static str),
    #[error("{requested} interferers passed for cancellation, at most {allowed} allowed")]
    TooManyCancelled { requested: usize, allowed: usize },
    #[error("{0} is not a baseline strategy")]
    NotBaseline(Strategy),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

pub type Result<T> = std::result::Result<T, BeamformingError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// SI nulled at the transmitter when `N_t > N_r`, otherwise SVD plus
    /// receive-side SI and partial ZF.
    ProposedFd,
    /// Dominant-eigenmode transmission, receiver cancels SI only.
    SvdOnlyFd,
    /// Dominant-eigenmode transmission, receiver cancels SI and the nearest
    /// pairs.
    SvdPartialZfFd,
    /// No transmit shaping, receiver cancels SI and the nearest pairs.
    PartialZfOnlyFd,
    HalfDuplex,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::ProposedFd,
        Strategy::SvdOnlyFd,
        Strategy::SvdPartialZfFd,
        Strategy::PartialZfOnlyFd,
        Strategy::HalfDuplex,
    ];

    pub const FULL_DUPLEX: [Strategy; 4] = [
        Strategy::ProposedFd,
        Strategy::SvdOnlyFd,
        Strategy::SvdPartialZfFd,
        Strategy::PartialZfOnlyFd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::ProposedFd => "proposed-fd",
            Strategy::SvdOnlyFd => "svd-only-fd",
            Strategy::SvdPartialZfFd => "svd-partial-zf-fd",
            Strategy::PartialZfOnlyFd => "partial-zf-only-fd",
            Strategy::HalfDuplex => "half-duplex",
        }
    }

    pub fn is_full_duplex(&self) -> bool {
        *self != Strategy::HalfDuplex
    }

    /// Transmit beams live in the null space of the node's own SI estimate.
    pub fn nulls_si_at_transmitter(&self, config: &AntennaConfig) -> bool {
        *self == Strategy::ProposedFd && config.transmit_heavy()
    }

    /// The receive filter spends one DoF on the node's own estimated SI.
    pub fn cancels_si_at_receiver(&self, config: &AntennaConfig) -> bool {
        self.is_full_duplex() && !self.nulls_si_at_transmitter(config)
    }

    pub fn channel_layout(&self, config: &AntennaConfig, model: InterfererModel) -> ChannelLayout {
        ChannelLayout {
            nodes_per_pair: if self.is_full_duplex() { 2 } else { 1 },
            interferer_si: self.nulls_si_at_transmitter(config),
            model,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key)
            .or(match key.as_str() {
                "proposed" => Some(Strategy::ProposedFd),
                "svd" | "svd-only" => Some(Strategy::SvdOnlyFd),
                "svd-partial-zf" | "svd-pzf" => Some(Strategy::SvdPartialZfFd),
                "partial-zf" | "pzf" | "partial-zf-only" => Some(Strategy::PartialZfOnlyFd),
                "hd" => Some(Strategy::HalfDuplex),
                _ => None,
            })
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// Number of interferers the typical receiver zero-forces: pairs (`l/2`) in
/// full duplex, individual nodes in half duplex.
pub fn cancellable_pairs(strategy: Strategy, config: &AntennaConfig) -> Result<usize> {
    let rx = config.rx;
    let needs_si_dof = |reason| {
        if rx < 2 {
            Err(BeamformingError::Capability {
                strategy,
                tx: config.tx,
                rx,
                reason,
            })
        } else {
            Ok(())
        }
    };
    match strategy {
        Strategy::ProposedFd if config.transmit_heavy() => Ok((rx - 1) / 2),
        Strategy::ProposedFd | Strategy::SvdPartialZfFd | Strategy::PartialZfOnlyFd => {
            needs_si_dof("SI cancellation at the receiver needs N_r >= 2")?;
            Ok((rx - 2) / 2)
        }
        Strategy::SvdOnlyFd => {
            needs_si_dof("SI cancellation at the receiver needs N_r >= 2")?;
            Ok(0)
        }
        Strategy::HalfDuplex => Ok(rx - 1),
    }
}

/// A shaped transmit beam and what it delivers at the intended receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitBeam {
    /// Unit-norm transmit vector.
    pub w: CVector,
    /// `|Hw|²`, the largest eigenvalue of the effective channel Gram matrix
    /// for the SVD-based beams.
    pub gain: f64,
    /// Unit receive direction `Hw / |Hw|`.
    pub direction: CVector,
}

fn unit(n: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Builds a node's transmit beam from its forward channel (`N_r × N_t`) and,
/// for SI nulling, its own SI estimate.
pub fn transmit_beam(
    strategy: Strategy,
    config: &AntennaConfig,
    forward: &CMatrix,
    si_estimate: Option<&CMatrix>,
) -> Result<TransmitBeam> {
    if strategy.nulls_si_at_transmitter(config) {
        let si = si_estimate.ok_or(BeamformingError::RankDeficient(
            "SI-nulling transmit beam needs the node's SI estimate",
        ))?;
        let basis = null_space(si);
        if basis.ncols() == 0 {
            return Err(BeamformingError::RankDeficient(
                "estimated SI channel has no null space",
            ));
        }
        let projected = forward * &basis;
        let t = dominant_singular_triple(&projected)?;
        return Ok(TransmitBeam {
            w: &basis * &t.v,
            gain: t.sigma * t.sigma,
            direction: t.u,
        });
    }
    if strategy == Strategy::PartialZfOnlyFd {
        let w = unit(config.tx, 0);
        let g = forward * &w;
        let norm = g.norm();
        if norm == 0.0 {
            return Err(ChannelError::Degenerate.into());
        }
        return Ok(TransmitBeam {
            w,
            gain: norm * norm,
            direction: g / C64::from(norm),
        });
    }
    let t = dominant_singular_triple(forward)?;
    Ok(TransmitBeam {
        w: t.v,
        gain: t.sigma * t.sigma,
        direction: t.u,
    })
}

/// Receive filter `z` with `zᴴ c = 0` for every constraint `c` and
/// `zᴴ u = 1` for the desired direction `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveFilter {
    pub z: CVector,
    /// Dimension of the receive null space the filter was chosen from.
    pub null_dim: usize,
    /// `|sᴴu|` for the unit-norm null-space vector `s`.
    pub alignment: f64,
    /// Set when `|sᴴu| < 1e-10`.
    pub degenerate: bool,
}

pub const ALIGNMENT_TOLERANCE: f64 = 1e-10;

/// Among all zero-forcing filters, picks the one maximizing desired gain:
/// `s` is the projection of `u` onto the null space of the constraints.
pub fn receive_filter(direction: &CVector, constraints: &[CVector]) -> Result<ReceiveFilter> {
    let rx = direction.len();
    let basis = if constraints.is_empty() {
        CMatrix::identity(rx, rx)
    } else {
        let rows = CMatrix::from_fn(constraints.len(), rx, |r, c| constraints[r][c].conj());
        null_space(&rows)
    };
    if basis.ncols() == 0 {
        return Err(BeamformingError::RankDeficient(
            "receive null space is empty",
        ));
    }
    let projection = &basis * (basis.adjoint() * direction);
    let alignment = projection.norm();
    if alignment > 0.0 {
        // s = p/|p| gives sᴴu = |p|, so z = s / conj(sᴴu) = p / |p|².
        let z = projection / C64::from(alignment * alignment);
        Ok(ReceiveFilter {
            z,
            null_dim: basis.ncols(),
            alignment,
            degenerate: alignment < ALIGNMENT_TOLERANCE,
        })
    } else {
        // u is orthogonal to every valid filter; keep a ZF filter and flag.
        Ok(ReceiveFilter {
            z: basis.column(0).into_owned(),
            null_dim: basis.ncols(),
            alignment,
            degenerate: true,
        })
    }
}

/// `|zᴴc|² / (|z|² |c|²)`.
pub fn relative_leakage(z: &CVector, c: &CVector) -> f64 {
    let denom = z.norm_squared() * c.norm_squared();
    if denom == 0.0 {
        0.0
    } else {
        z.dotc(c).norm_sqr() / denom
    }
}

/// Beams of one interfering pair as seen from the typical receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfererBeams {
    /// Transmit vectors; absent under the effective interferer model.
    pub w_a: Option<CVector>,
    pub w_b: Option<CVector>,
    /// Effective interference vectors `H_{i,a_k} w_{a_k}` and `H_{i,b_k} w_{b_k}`.
    pub g_a: CVector,
    pub g_b: Option<CVector>,
}

impl InterfererBeams {
    pub fn vectors(&self) -> impl Iterator<Item = &CVector> {
        std::iter::once(&self.g_a).chain(self.g_b.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub strategy: Strategy,
    /// `w_i`, the typical node's own transmit beam (source of its SI).
    pub w_typical_tx: CVector,
    /// `w_j`, the partner's beam towards the typical receiver.
    pub w_partner_tx: CVector,
    /// Entry `k − 1` belongs to interfering pair `k`.
    pub interferers: Vec<InterfererBeams>,
    pub z_typical_rx: CVector,
    /// Unit receive direction of the desired signal (`u₁` or `ũ₁`).
    pub desired_direction: CVector,
    /// Zero-forced interferers (pairs in full duplex, nodes in half duplex).
    pub cancelled: Vec<usize>,
    /// Effective desired gain γ.
    pub gamma: f64,
    /// `Ĥ_i w_i` when the receive filter cancels the estimated SI.
    pub si_constraint: Option<CVector>,
    pub null_dim: usize,
    pub degenerate: bool,
}

impl BeamformerSet {
    pub fn cancelled_pair_count(&self) -> usize {
        self.cancelled.len()
    }

    pub fn interferer(&self, pair: usize) -> &InterfererBeams {
        &self.interferers[pair - 1]
    }

    /// All vectors the receive filter was asked to null.
    pub fn constraints(&self) -> Vec<CVector> {
        let mut out: Vec<CVector> = self.si_constraint.iter().cloned().collect();
        for &k in &self.cancelled {
            out.extend(self.interferer(k).vectors().cloned());
        }
        out
    }
}

fn effective_vector(
    strategy: Strategy,
    config: &AntennaConfig,
    link: &InterfererLink,
) -> Result<(Option<CVector>, CVector)> {
    match link {
        InterfererLink::Effective { vector } => Ok((None, vector.clone())),
        InterfererLink::Explicit { to_typical, csi } => {
            let beam = transmit_beam(strategy, config, &csi.forward, csi.si_estimate.as_ref())?;
            let g = to_typical * &beam.w;
            Ok((Some(beam.w), g))
        }
    }
}

fn build_set(
    strategy: Strategy,
    channels: &ChannelSet,
    nearest: &[usize],
    config: &AntennaConfig,
) -> Result<BeamformerSet> {
    let allowed = cancellable_pairs(strategy, config)?;
    if nearest.len() > allowed {
        return Err(BeamformingError::TooManyCancelled {
            requested: nearest.len(),
            allowed,
        });
    }
    let partner = transmit_beam(
        strategy,
        config,
        &channels.desired,
        Some(&channels.partner_si_estimate),
    )?;
    let own = transmit_beam(
        strategy,
        config,
        &channels.reverse,
        Some(&channels.si.estimated),
    )?;

    let interferers = channels
        .interferers
        .iter()
        .map(|ic| {
            let (w_a, g_a) = effective_vector(strategy, config, &ic.a)?;
            let (w_b, g_b) = match (&ic.b, strategy.is_full_duplex()) {
                (Some(link), true) => {
                    let (w, g) = effective_vector(strategy, config, link)?;
                    (w, Some(g))
                }
                _ => (None, None),
            };
            Ok(InterfererBeams { w_a, w_b, g_a, g_b })
        })
        .collect::<Result<Vec<_>>>()?;

    let si_constraint = strategy
        .cancels_si_at_receiver(config)
        .then(|| &channels.si.estimated * &own.w);
    let mut constraints: Vec<CVector> = si_constraint.iter().cloned().collect();
    for &k in nearest {
        constraints.extend(interferers[k - 1].vectors().cloned());
    }
    let filter = receive_filter(&partner.direction, &constraints)?;

    Ok(BeamformerSet {
        strategy,
        w_typical_tx: own.w,
        w_partner_tx: partner.w,
        interferers,
        z_typical_rx: filter.z,
        desired_direction: partner.direction,
        cancelled: nearest.to_vec(),
        gamma: partner.gain,
        si_constraint,
        null_dim: filter.null_dim,
        degenerate: filter.degenerate,
    })
}

/// The proposed design: SI nulled by the transmit beam when `N_t > N_r`,
/// otherwise dominant-eigenmode beams with SI cancelled at the receiver.
pub fn build_proposed_fd(
    channels: &ChannelSet,
    nearest: &[usize],
    config: &AntennaConfig,
) -> Result<BeamformerSet> {
    build_set(Strategy::ProposedFd, channels, nearest, config)
}

/// One of the three full-duplex baselines.
pub fn build_baseline(
    strategy: Strategy,
    channels: &ChannelSet,
    nearest: &[usize],
    config: &AntennaConfig,
) -> Result<BeamformerSet> {
    match strategy {
        Strategy::SvdOnlyFd | Strategy::SvdPartialZfFd | Strategy::PartialZfOnlyFd => {
            build_set(strategy, channels, nearest, config)
        }
        other => Err(BeamformingError::NotBaseline(other)),
    }
}

/// Half duplex: dominant-eigenmode transmit beams, receiver zero-forces the
/// nearest individual transmitters.
pub fn build_hd(
    channels: &ChannelSet,
    nearest_nodes: &[usize],
    config: &AntennaConfig,
) -> Result<BeamformerSet> {
    build_set(Strategy::HalfDuplex, channels, nearest_nodes, config)
}

pub fn build(
    strategy: Strategy,
    channels: &ChannelSet,
    nearest: &[usize],
    config: &AntennaConfig,
) -> Result<BeamformerSet> {
    build_set(strategy, channels, nearest, config)
}
