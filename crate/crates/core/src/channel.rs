//! Rayleigh channel draws and the small complex linear-algebra kernels used
//! by the beamformers.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid antenna configuration: {0}")]
    Antennas(String),
    #[error("SI error variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("dominant singular triple of a zero matrix is undefined")]
    Degenerate,
}

/// Antenna split of every node: `total = tx + rx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub total: usize,
    pub tx: usize,
    pub rx: usize,
}

impl AntennaConfig {
    pub fn new(tx: usize, rx: usize) -> Result<Self, ChannelError> {
        if tx == 0 || rx == 0 {
            return Err(ChannelError::Antennas(format!(
                "need at least one transmit and one receive antenna (N_t={tx}, N_r={rx})"
            )));
        }
        Ok(Self {
            total: tx + rx,
            tx,
            rx,
        })
    }

    /// `N` total antennas of which `rx` receive.
    pub fn with_total(total: usize, rx: usize) -> Result<Self, ChannelError> {
        if rx >= total {
            return Err(ChannelError::Antennas(format!(
                "N_r={rx} leaves no transmit antenna out of N={total}"
            )));
        }
        Self::new(total - rx, rx)
    }

    /// More transmit than receive antennas: SI can be nulled at the transmitter.
    pub fn transmit_heavy(&self) -> bool {
        self.tx > self.rx
    }
}

/// One CN(0, 1) sample.
pub fn draw_cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. CN(0, 1) entries, filled column-major.
pub fn draw_rayleigh<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| draw_cn(rng))
}

pub fn draw_cn_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| draw_cn(rng))
}

/// Estimated self-interference channel, its estimation error, and the actual
/// channel `actual = estimated + error`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiChannel {
    pub estimated: CMatrix,
    pub error: CMatrix,
    pub actual: CMatrix,
}

/// Draws `Ĥ` with CN(0, 1) entries and an independent error with CN(0, σ²)
/// entries. The error is a scaled unit draw, so for a fixed stream it grows
/// monotonically with σ².
pub fn draw_si_channel<R: Rng + ?Sized>(
    config: &AntennaConfig,
    sigma2_si: f64,
    rng: &mut R,
) -> Result<SiChannel, ChannelError> {
    if !(sigma2_si >= 0.0) {
        return Err(ChannelError::NegativeVariance(sigma2_si));
    }
    let estimated = draw_rayleigh(config.rx, config.tx, rng);
    let error = draw_rayleigh(config.rx, config.tx, rng) * C64::from(sigma2_si.sqrt());
    let actual = &estimated + &error;
    Ok(SiChannel {
        estimated,
        error,
        actual,
    })
}

/// Relative singular-value threshold below which a direction counts as null.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Singular values sorted descending together with the full right singular
/// basis (`n × n`, columns).
fn full_right_svd(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (m, n) = a.shape();
    // Zero-padding to a square matrix makes the SVD return a complete
    // right basis; the extra singular values are exactly zero.
    let square = if m < n {
        let mut padded = CMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m, n)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = square.svd_unordered(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .total_cmp(&svd.singular_values[i])
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let basis = CMatrix::from_fn(n, order.len(), |r, c| v_t[(order[c], r)].conj());
    (values, basis)
}

/// Numerical rank: singular values above `max(m, n) · σ_max · 1e-12`.
pub fn numerical_rank(a: &CMatrix) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let tol = a.nrows().max(a.ncols()) as f64 * max * RANK_TOLERANCE;
    sv.iter().filter(|&&s| s > tol && s > 0.0).count()
}

/// Orthonormal basis (`n × d`) of the null space of an `m × n` matrix.
///
/// `d = 0` yields a matrix with no columns.
pub fn null_space(a: &CMatrix) -> CMatrix {
    let (m, n) = a.shape();
    if m == 0 {
        return CMatrix::identity(n, n);
    }
    let (values, basis) = full_right_svd(a);
    let max = values.first().copied().unwrap_or(0.0);
    let tol = m.max(n) as f64 * max * RANK_TOLERANCE;
    let rank = values.iter().filter(|&&s| s > tol && s > 0.0).count();
    basis.columns(rank, n - rank).into_owned()
}

/// Largest singular value with its left and right singular vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    pub sigma: f64,
    pub u: CVector,
    pub v: CVector,
}

/// Rotates `v` so that its first non-negligible component is real positive
/// and applies the same rotation to `u`, keeping `A v = σ u`.
fn normalize_phase(u: &mut CVector, v: &mut CVector) {
    let scale = v.norm();
    if let Some(lead) = v.iter().find(|c| c.norm() > 1e-12 * scale).copied() {
        let rot = lead.conj() / lead.norm();
        *v *= rot;
        *u *= rot;
    }
}

/// `(σ₁, u₁, v₁)` with `A v₁ = σ₁ u₁`; the first nonzero entry of `v₁` is real
/// positive.
pub fn dominant_singular_triple(a: &CMatrix) -> Result<SingularTriple, ChannelError> {
    if a.is_empty() || a.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(ChannelError::Degenerate);
    }
    let svd = a.clone().svd_unordered(true, true);
    let (best, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty spectrum");
    let mut u = svd
        .u
        .expect("left singular vectors requested")
        .column(best)
        .into_owned();
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut v = v_t.row(best).adjoint();
    normalize_phase(&mut u, &mut v);
    Ok(SingularTriple { sigma, u, v })
}

/// Squared Frobenius norm.
pub fn frobenius_sqr(a: &CMatrix) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}

/// How interferers are represented in a trial.
///
/// `Explicit` draws every interferer's channel to the typical receiver and
/// the channels it uses to shape its own beam. `Effective` draws the
/// product `H_{i,k} w_k` directly: with `w_k` a unit vector independent of
/// the i.i.d. CN(0, 1) matrix `H_{i,k}`, that product is exactly CN(0, I).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterfererModel {
    Explicit,
    #[default]
    Effective,
}

/// Which channels a trial needs, derived from the beamforming strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelLayout {
    /// Transmitting nodes per interfering pair: two in full duplex, one in
    /// half duplex.
    pub nodes_per_pair: usize,
    /// Whether interferers need their own SI estimate to shape their beam.
    pub interferer_si: bool,
    pub model: InterfererModel,
}

/// Channels a node uses to shape its own transmit beam.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterCsi {
    /// Channel from this node to its partner (`N_r × N_t`).
    pub forward: CMatrix,
    pub si_estimate: Option<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterfererLink {
    Explicit {
        /// Channel from the interferer to the typical receiver.
        to_typical: CMatrix,
        csi: TransmitterCsi,
    },
    Effective {
        /// `H_{i,k} w_k` as seen by the typical receiver.
        vector: CVector,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfererChannels {
    pub a: InterfererLink,
    /// Absent in half duplex, where only the `a` node transmits.
    pub b: Option<InterfererLink>,
}

/// All channels of one trial. The typical pair is `(i, j)` with `i` the
/// receiver at the disk centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `H_{i,j}`: partner to typical receiver.
    pub desired: CMatrix,
    /// `H_{j,i}`: typical node to partner, shapes the typical node's beam.
    pub reverse: CMatrix,
    /// Self-interference at the typical node.
    pub si: SiChannel,
    pub partner_si_estimate: CMatrix,
    pub sigma2_si: f64,
    /// Entry `k − 1` belongs to interfering pair `k`.
    pub interferers: Vec<InterfererChannels>,
}

impl ChannelSet {
    pub fn interferer(&self, pair: usize) -> &InterfererChannels {
        &self.interferers[pair - 1]
    }
}

fn draw_link<R: Rng + ?Sized>(
    config: &AntennaConfig,
    layout: &ChannelLayout,
    rng: &mut R,
) -> InterfererLink {
    match layout.model {
        InterfererModel::Effective => InterfererLink::Effective {
            vector: draw_cn_vector(config.rx, rng),
        },
        InterfererModel::Explicit => {
            let to_typical = draw_rayleigh(config.rx, config.tx, rng);
            let forward = draw_rayleigh(config.rx, config.tx, rng);
            let si_estimate = layout
                .interferer_si
                .then(|| draw_rayleigh(config.rx, config.tx, rng));
            InterfererLink::Explicit {
                to_typical,
                csi: TransmitterCsi {
                    forward,
                    si_estimate,
                },
            }
        }
    }
}

/// Draws the channels of one trial with `interferers` interfering pairs.
pub fn draw_channel_set<R: Rng + ?Sized>(
    config: &AntennaConfig,
    sigma2_si: f64,
    interferers: usize,
    layout: &ChannelLayout,
    rng: &mut R,
) -> Result<ChannelSet, ChannelError> {
    let desired = draw_rayleigh(config.rx, config.tx, rng);
    let reverse = draw_rayleigh(config.rx, config.tx, rng);
    let si = draw_si_channel(config, sigma2_si, rng)?;
    let partner_si_estimate = draw_rayleigh(config.rx, config.tx, rng);
    let interferers = (0..interferers)
        .map(|_| {
            let a = draw_link(config, layout, rng);
            let b = (layout.nodes_per_pair > 1).then(|| draw_link(config, layout, rng));
            InterfererChannels { a, b }
        })
        .collect();
    Ok(ChannelSet {
        desired,
        reverse,
        si,
        partner_si_estimate,
        sigma2_si,
        interferers,
    })
}
