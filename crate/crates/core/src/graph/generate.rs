use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Graph, Position};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Random geometric graph with Gaussian-kernel weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceGraphConfig {
    pub n: usize,
    /// Side length of the square the nodes are sampled from.
    pub box_side: f64,
    /// Connection radius.
    pub threshold: f64,
    /// Kernel scale; `None` means `threshold^2`.
    #[serde(default)]
    pub sigma2: Option<f64>,
    pub seed: u64,
}

impl DistanceGraphConfig {
    pub fn new(n: usize, box_side: f64, threshold: f64, seed: u64) -> Self {
        DistanceGraphConfig {
            n,
            box_side,
            threshold,
            sigma2: None,
            seed,
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2.unwrap_or(self.threshold * self.threshold)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("distance graph needs n >= 2"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.box_side) {
            return Err(Error::config("box_side must be positive"));
        }
        if !positive(self.threshold) {
            return Err(Error::config("threshold must be positive"));
        }
        if !positive(self.sigma2()) {
            return Err(Error::config("sigma2 must be positive"));
        }
        Ok(())
    }
}

/// Barabasi-Albert preferential attachment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleFreeConfig {
    pub n: usize,
    /// Edges added per arriving node; also the size of the seed clique.
    pub m: usize,
    pub seed: u64,
}

impl ScaleFreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m >= self.n {
            return Err(Error::config(format!(
                "scale-free graph needs 1 <= m < n (m = {}, n = {})",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

/// Kernel weight `exp(-d^2 / sigma2)` when `d <= threshold`, else 0.
pub fn kernel_weight(distance: f64, threshold: f64, sigma2: f64) -> f64 {
    if distance <= threshold {
        (-distance * distance / sigma2).exp()
    } else {
        0.0
    }
}

/// Gaussian-kernel graph over `n` nodes with pairwise distances from `dist`.
pub fn kernel_graph<T: Real>(
    n: usize,
    threshold: f64,
    sigma2: f64,
    dist: impl Fn(usize, usize) -> f64,
) -> Graph<T> {
    let mut weights = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let w = T::of(kernel_weight(dist(i, j), threshold, sigma2));
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
    }
    Graph::from_dense_unchecked(n, weights)
}

/// Planar Gaussian-kernel graph over fixed positions.
pub fn planar_kernel_graph<T: Real>(
    points: &[(f64, f64)],
    threshold: f64,
    sigma2: f64,
) -> Graph<T> {
    let g = kernel_graph(points.len(), threshold, sigma2, |i, j| {
        let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
        (dx * dx + dy * dy).sqrt()
    });
    let positions = points.iter().map(|&(x, y)| Position::Planar { x, y }).collect();
    g.with_positions(positions).expect("one position per node")
}

pub fn build_distance_graph<T: Real>(cfg: &DistanceGraphConfig) -> Result<Graph<T>> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let points: Vec<(f64, f64)> = (0..cfg.n)
        .map(|_| {
            let x = rng.random::<f64>() * cfg.box_side;
            let y = rng.random::<f64>() * cfg.box_side;
            (x, y)
        })
        .collect();
    Ok(planar_kernel_graph(&points, cfg.threshold, cfg.sigma2()))
}

pub fn build_scale_free_graph<T: Real>(cfg: &ScaleFreeConfig) -> Result<Graph<T>> {
    cfg.validate()?;
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = rng::seeded(cfg.seed);
    let mut edges: Vec<(usize, usize, T)> = Vec::with_capacity(m * n);
    // each edge contributes both endpoints, so uniform draws are degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in i + 1..m {
            edges.push((i, j, T::one()));
            endpoints.extend([i, j]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in m..n {
        targets.clear();
        if endpoints.is_empty() {
            targets.extend(0..m);
        } else {
            while targets.len() < m {
                let u = endpoints[rng.random_range(0..endpoints.len())];
                if !targets.contains(&u) {
                    targets.push(u);
                }
            }
        }
        for &u in &targets {
            edges.push((u, v, T::one()));
            endpoints.extend([u, v]);
        }
    }
    Graph::from_edges(n, &edges)
}
