//! Poisson deployments of transceiver pairs on a disk.
//!
//! The typical pair sits at index 0 with its receiving node at the disk
//! centre. Interfering pair `k` is assigned the single distance
//! `r_k = |a_k − a_0|` for both of its nodes.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid deployment: {0}")]
    Params(String),
    #[error("requested {requested} nearest pairs but only {available} interferers exist")]
    Range { requested: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentParams {
    /// Pair density per unit area.
    pub lambda: f64,
    /// Infinite only for an empty network.
    pub disk_radius: f64,
    pub pair_distance: f64,
}

impl DeploymentParams {
    /// Accepts a radius, an expected pair count, or both when they agree
    /// (`λπR² = mean_pairs`).
    pub fn new(
        lambda: f64,
        disk_radius: Option<f64>,
        mean_pairs: Option<f64>,
        pair_distance: f64,
    ) -> Result<Self, GeometryError> {
        let bad = |msg: String| Err(GeometryError::Params(msg));
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return bad(format!(
                "density must be finite and non-negative, got {lambda}"
            ));
        }
        if !(pair_distance > 0.0) || !pair_distance.is_finite() {
            return bad(format!(
                "pair distance must be positive, got {pair_distance}"
            ));
        }
        let radius = match (disk_radius, mean_pairs) {
            (None, None) => return bad("need a disk radius or an expected pair count".into()),
            (Some(r), _) if !(r > 0.0) || !r.is_finite() => {
                return bad(format!("disk radius must be positive, got {r}"))
            }
            (_, Some(m)) if !(m > 0.0) || !m.is_finite() => {
                return bad(format!("expected pair count must be positive, got {m}"))
            }
            (Some(r), None) => r,
            (None, Some(m)) => {
                if lambda == 0.0 {
                    f64::INFINITY
                } else {
                    (m / (lambda * PI)).sqrt()
                }
            }
            (Some(r), Some(m)) => {
                let implied = lambda * PI * r * r;
                if ((implied - m) / m).abs() > 1e-9 {
                    return bad(format!(
                        "radius {r} at density {lambda} implies {implied} pairs, not {m}"
                    ));
                }
                r
            }
        };
        Ok(Self {
            lambda,
            disk_radius: radius,
            pair_distance,
        })
    }

    pub fn with_radius(
        lambda: f64,
        disk_radius: f64,
        pair_distance: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(lambda, Some(disk_radius), None, pair_distance)
    }

    pub fn with_mean_pairs(
        lambda: f64,
        mean_pairs: f64,
        pair_distance: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(lambda, None, Some(mean_pairs), pair_distance)
    }

    /// Expected number of interfering pairs, `λπR²`.
    pub fn expected_pairs(&self) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            self.lambda * PI * self.disk_radius * self.disk_radius
        }
    }
}

/// One sampled deployment. Index 0 is the typical pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    a: Vec<Point>,
    b: Vec<Point>,
    distances: Vec<f64>,
    order: Vec<usize>,
}

impl NetworkRealization {
    /// Builds a realization from explicit node positions; `a[0]` is the
    /// typical receiver.
    pub fn from_pairs(a: Vec<Point>, b: Vec<Point>) -> Result<Self, GeometryError> {
        if a.is_empty() || a.len() != b.len() {
            return Err(GeometryError::Params(format!(
                "need matching non-empty position lists, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        let origin = a[0];
        let distances = a
            .iter()
            .map(|p| (p[0] - origin[0]).hypot(p[1] - origin[1]))
            .collect::<Vec<_>>();
        let mut order: Vec<usize> = (1..a.len()).collect();
        order.sort_by(|&i, &j| distances[i].total_cmp(&distances[j]).then(i.cmp(&j)));
        Ok(Self {
            a,
            b,
            distances,
            order,
        })
    }

    /// Pair count `M`, typical pair included.
    pub fn pair_count(&self) -> usize {
        self.a.len()
    }

    pub fn interferer_count(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a_positions(&self) -> &[Point] {
        &self.a
    }

    pub fn b_positions(&self) -> &[Point] {
        &self.b
    }

    /// `r_k` for pair `k` (zero for the typical pair).
    pub fn distance(&self, k: usize) -> f64 {
        self.distances[k]
    }

    /// Interferer indices in ascending distance, ties by lower index.
    pub fn sorted_interferers(&self) -> &[usize] {
        &self.order
    }

    /// Indices of the `count` nearest interfering pairs.
    pub fn nearest_pairs(&self, count: usize) -> Result<&[usize], GeometryError> {
        if count > self.order.len() {
            return Err(GeometryError::Range {
                requested: count,
                available: self.order.len(),
            });
        }
        Ok(&self.order[..count])
    }

    /// Distance of the `n`-th nearest interferer (1-based).
    pub fn nth_nearest_distance(&self, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.order.get(i))
            .map(|&k| self.distances[k])
    }

    pub fn dump(&self, seed: u64, params: &DeploymentParams) -> RealizationDump {
        RealizationDump {
            seed,
            lambda: params.lambda,
            disk_radius: params.disk_radius,
            pair_distance: params.pair_distance,
            pairs: (0..self.pair_count())
                .map(|k| PairDump {
                    ax: self.a[k][0],
                    ay: self.a[k][1],
                    bx: self.b[k][0],
                    by: self.b[k][1],
                    r: self.distances[k],
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDump {
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
    pub r: f64,
}

/// JSON realization dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationDump {
    pub seed: u64,
    pub lambda: f64,
    pub disk_radius: f64,
    #[serde(rename = "L")]
    pub pair_distance: f64,
    pub pairs: Vec<PairDump>,
}

fn partner_of<R: Rng + ?Sized>(a: Point, pair_distance: f64, rng: &mut R) -> Point {
    let phi = 2.0 * PI * rng.random::<f64>();
    [
        a[0] + pair_distance * phi.cos(),
        a[1] + pair_distance * phi.sin(),
    ]
}

/// Samples a Poisson number of interfering pairs uniformly on the disk plus
/// the typical pair at the centre.
///
/// Positions are drawn in polar form from uniforms, so for a fixed stream
/// every distance scales as `1/√λ` when the expected pair count is held
/// fixed.
pub fn sample_network<R: Rng + ?Sized>(
    params: &DeploymentParams,
    rng: &mut R,
) -> NetworkRealization {
    let mean = params.expected_pairs();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .expect("positive finite mean")
            .sample(rng) as usize
    } else {
        0
    };
    let mut a = Vec::with_capacity(count + 1);
    let mut b = Vec::with_capacity(count + 1);
    let origin = [0.0, 0.0];
    a.push(origin);
    b.push(partner_of(origin, params.pair_distance, rng));
    for _ in 0..count {
        let radius = params.disk_radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let p = [radius * theta.cos(), radius * theta.sin()];
        a.push(p);
        b.push(partner_of(p, params.pair_distance, rng));
    }
    NetworkRealization::from_pairs(a, b).expect("non-empty matching lists")
}
