//! Exact-spectrum graph wavelet transform on the spatio-temporal strong
//! product of a graph with a path over time steps.

use serde::{Deserialize, Serialize};

use super::eigendecompose;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;
use crate::signal::SignalSeries;

/// Band-pass wavelet kernel. Every variant satisfies `g(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SgwtKernel {
    /// `g(x) = (x e^{1-x})^order`, peak value 1 at `x = 1`.
    MexicanHat { order: u32 },
}

impl Default for SgwtKernel {
    fn default() -> Self {
        SgwtKernel::MexicanHat { order: 1 }
    }
}

impl SgwtKernel {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SgwtKernel::MexicanHat { order } => (x * (1.0 - x).exp()).powi(order as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgwtConfig {
    /// Explicit scales. When absent, `scale_count` scales are log-spaced
    /// between `1 / lambda_max` and `20 / lambda_max` of the product graph.
    pub scales: Option<Vec<f64>>,
    pub scale_count: usize,
    pub kernel: SgwtKernel,
    /// Number of trailing time steps forming the temporal path graph;
    /// `None` uses every step of the input.
    pub temporal_graph_len: Option<usize>,
    /// Largest product graph (nodes) that will be eigendecomposed.
    pub max_product_nodes: usize,
}

impl Default for SgwtConfig {
    fn default() -> Self {
        SgwtConfig {
            scales: None,
            scale_count: 4,
            kernel: SgwtKernel::default(),
            temporal_graph_len: None,
            max_product_nodes: 4000,
        }
    }
}

impl SgwtConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.scales {
            Some(s) if s.is_empty() || s.iter().any(|&v| !(v > 0.0 && v.is_finite())) => {
                Err(Error::config("SGWT scales must be positive"))
            }
            None if self.scale_count == 0 => Err(Error::config("SGWT needs at least one scale")),
            _ => Ok(()),
        }
    }

    fn resolve_scales(&self, lambda_max: f64) -> Vec<f64> {
        if let Some(s) = &self.scales {
            return s.clone();
        }
        let lmax = if lambda_max > 0.0 { lambda_max } else { 1.0 };
        let (lo, hi) = ((1.0 / lmax).ln(), (20.0 / lmax).ln());
        let k = self.scale_count;
        (0..k)
            .map(|j| {
                let frac = if k == 1 { 0.0 } else { j as f64 / (k - 1) as f64 };
                (lo + frac * (hi - lo)).exp()
            })
            .collect()
    }
}

/// Strong product `G ⊠ P_steps`. Node `(v, t)` has index `t * n + v`.
/// Spatial and diagonal edges carry the spatial weight, temporal edges 1.
pub fn strong_product_with_path<T: Real>(g: &Graph<T>, steps: usize) -> Graph<T> {
    let n = g.node_count();
    let total = n * steps;
    let mut w = vec![T::zero(); total * total];
    let mut set = |a: usize, b: usize, v: T| {
        w[a * total + b] = v;
        w[b * total + a] = v;
    };
    for t in 0..steps {
        for (i, j, wij) in g.edges() {
            set(t * n + i, t * n + j, wij);
            if t + 1 < steps {
                set(t * n + i, (t + 1) * n + j, wij);
                set(t * n + j, (t + 1) * n + i, wij);
            }
        }
        if t + 1 < steps {
            for v in 0..n {
                set(t * n + v, (t + 1) * n + v, T::one());
            }
        }
    }
    Graph::from_dense_unchecked(total, w)
}

/// Wavelet coefficients `W(s, (v, t))` for each scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SgwtCoefficients<T> {
    nodes: usize,
    steps: usize,
    time_axis: Vec<f64>,
    scales: Vec<f64>,
    /// `[scale][t * nodes + v]`
    values: Vec<Vec<T>>,
}

impl<T: Real> SgwtCoefficients<T> {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time_axis(&self) -> &[f64] {
        &self.time_axis
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn get(&self, scale: usize, node: usize, step: usize) -> T {
        self.values[scale][step * self.nodes + node]
    }

    /// Sum over scales of `|W(s, (v, t))|`.
    pub fn aggregate(&self, node: usize, step: usize) -> T {
        self.values.iter().map(|s| s[step * self.nodes + node].abs()).sum()
    }

    /// `(node, step, scale index, value)` in scale-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
        self.values.iter().enumerate().flat_map(move |(k, vals)| {
            vals.iter()
                .enumerate()
                .map(move |(idx, &v)| (idx % self.nodes, idx / self.nodes, k, v))
        })
    }
}

pub fn sgwt_coefficients<T: Real>(
    g: &Graph<T>,
    series: &SignalSeries<T>,
    cfg: &SgwtConfig,
) -> Result<SgwtCoefficients<T>> {
    cfg.validate()?;
    let n = g.node_count();
    if series.nodes() != n {
        return Err(Error::dims(n, series.nodes()));
    }
    let steps = cfg.temporal_graph_len.unwrap_or(series.steps()).min(series.steps());
    if steps < 2 {
        return Err(Error::Window("SGWT needs at least two time steps".into()));
    }
    let total = n * steps;
    if total > cfg.max_product_nodes {
        return Err(Error::Capacity {
            what: "SGWT product graph",
            needed: total,
            limit: cfg.max_product_nodes,
        });
    }
    let window = series.columns(series.steps() - steps, series.steps())?;
    let product = strong_product_with_path(g, steps);
    let spec = eigendecompose(&product.laplacian())?;
    let coeffs = spec.forward(window.as_time_major());
    let scales = cfg.resolve_scales(spec.max_eigenvalue().as_f64());
    let values = scales
        .iter()
        .map(|&s| {
            let filtered: Vec<T> = coeffs
                .iter()
                .zip(spec.eigenvalues())
                .map(|(&c, &lambda)| c * T::of(cfg.kernel.eval(s * lambda.max(T::zero()).as_f64())))
                .collect();
            spec.inverse(&filtered)
        })
        .collect();
    Ok(SgwtCoefficients {
        nodes: n,
        steps,
        time_axis: window.time_axis().to_vec(),
        scales,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatioTemporalNode {
    pub node: usize,
    /// Column within the coefficient window.
    pub step: usize,
    pub time: f64,
    pub score: f64,
}

/// The `s_total` spatio-temporal nodes with the largest aggregate magnitude,
/// descending; ties go to the lower product index.
pub fn sgwt_top_nodes<T: Real>(coeffs: &SgwtCoefficients<T>, s_total: usize) -> Vec<SpatioTemporalNode> {
    let total = coeffs.nodes * coeffs.steps;
    let mut idx: Vec<(usize, T)> = (0..total)
        .map(|p| (p, coeffs.aggregate(p % coeffs.nodes, p / coeffs.nodes)))
        .collect();
    idx.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite coefficients").then(a.0.cmp(&b.0)));
    idx.into_iter()
        .take(s_total.min(total))
        .map(|(p, score)| {
            let (node, step) = (p % coeffs.nodes, p / coeffs.nodes);
            SpatioTemporalNode {
                node,
                step,
                time: coeffs.time_axis[step],
                score: score.as_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    fn cycle4() -> Graph<f64> {
        Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap()
    }

    fn path5() -> Graph<f64> {
        Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap()
    }

    #[test]
    fn kernel_is_band_pass() {
        let k = SgwtKernel::default();
        assert_eq!(k.eval(0.0), 0.0);
        assert!((k.eval(1.0) - 1.0).abs() < 1e-15);
        assert!(k.eval(0.5) < 1.0 && k.eval(3.0) < 1.0);
    }

    #[test]
    fn strong_product_structure() {
        let p = strong_product_with_path(&cycle4(), 2);
        assert_eq!(p.node_count(), 8);
        // 4 spatial edges per layer, 4 temporal, 8 diagonal
        assert_eq!(p.edge_count(), 4 * 2 + 4 + 8);
        assert_eq!(p.weight(0, 4), 1.0);
        assert_eq!(p.weight(0, 5), 1.0);
        assert_eq!(p.weight(0, 6), 0.0);
    }

    #[test]
    fn constant_signal_has_zero_coefficients() {
        let x = SignalSeries::from_frames(5, &[vec![2.0; 5], vec![2.0; 5], vec![2.0; 5]]).unwrap();
        let c = sgwt_coefficients(&path5(), &x, &SgwtConfig::default()).unwrap();
        assert!(c.entries().all(|(_, _, _, v)| v.abs() < 1e-9));
        let zero = SignalSeries::from_frames(5, &[vec![0.0; 5], vec![0.0; 5]]).unwrap();
        let c = sgwt_coefficients(&path5(), &zero, &SgwtConfig::default()).unwrap();
        assert!(c.entries().all(|(_, _, _, v)| v == 0.0));
    }

    #[test]
    fn delta_is_localised_at_smallest_scale() {
        let mut frames = vec![vec![0.0; 5]; 3];
        frames[1][2] = 1.0;
        let x = SignalSeries::from_frames(5, &frames).unwrap();
        let c = sgwt_coefficients(&path5(), &x, &SgwtConfig::default()).unwrap();
        let smallest = (0..c.scales().len())
            .min_by(|&a, &b| c.scales()[a].partial_cmp(&c.scales()[b]).unwrap())
            .unwrap();
        let mut best = (0, 0, -1.0);
        for t in 0..3 {
            for v in 0..5 {
                let m = c.get(smallest, v, t).abs();
                if m > best.2 {
                    best = (v, t, m);
                }
            }
        }
        assert!(best.0.abs_diff(2) <= 1 && best.1.abs_diff(1) <= 1, "peak at {:?}", best);
    }

    #[test]
    fn matches_hand_assembled_spectral_sum() {
        // brute force: dense Jacobi eigendecomposition of the 8-node product
        // Laplacian, then the explicit triple sum
        let g = cycle4();
        let p = strong_product_with_path(&g, 2);
        let l = p.laplacian();
        let n = 8;
        let mut a: Vec<f64> = l.as_slice().to_vec();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        for _ in 0..100 {
            for pi in 0..n {
                for qi in pi + 1..n {
                    let apq = a[pi * n + qi];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[qi * n + qi] - a[pi * n + pi]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..n {
                        let akp = a[k * n + pi];
                        let akq = a[k * n + qi];
                        a[k * n + pi] = cs * akp - sn * akq;
                        a[k * n + qi] = sn * akp + cs * akq;
                    }
                    for k in 0..n {
                        let apk = a[pi * n + k];
                        let aqk = a[qi * n + k];
                        a[pi * n + k] = cs * apk - sn * aqk;
                        a[qi * n + k] = sn * apk + cs * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + pi];
                        let vkq = v[k * n + qi];
                        v[k * n + pi] = cs * vkp - sn * vkq;
                        v[k * n + qi] = sn * vkp + cs * vkq;
                    }
                }
            }
        }
        let lambdas: Vec<f64> = (0..n).map(|k| a[k * n + k]).collect();
        let mut r = rng::seeded(12);
        let frames: Vec<Vec<f64>> = (0..2).map(|_| (0..4).map(|_| r.random::<f64>()).collect()).collect();
        let x = SignalSeries::from_frames(4, &frames).unwrap();
        let flat = x.as_time_major();
        let cfg = SgwtConfig { scales: Some(vec![0.7]), ..SgwtConfig::default() };
        let got = sgwt_coefficients(&g, &x, &cfg).unwrap();
        let kernel = SgwtKernel::default();
        for vtx in 0..n {
            let mut expect = 0.0;
            for k in 0..n {
                let xt: f64 = (0..n).map(|i| v[i * n + k] * flat[i]).sum();
                expect += kernel.eval(0.7 * lambdas[k].max(0.0)) * xt * v[vtx * n + k];
            }
            let (node, step) = (vtx % 4, vtx / 4);
            assert!((got.get(0, node, step) - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn linearity_and_capacity() {
        let g = path5();
        let mut r = rng::seeded(5);
        let mut rand_series = || {
            let frames: Vec<Vec<f64>> = (0..3).map(|_| (0..5).map(|_| r.random::<f64>() - 0.5).collect()).collect();
            SignalSeries::from_frames(5, &frames).unwrap()
        };
        let (a, b) = (rand_series(), rand_series());
        let sum = SignalSeries::from_frames(
            5,
            &(0..3).map(|c| a.frame(c).iter().zip(b.frame(c)).map(|(p, q)| p + q).collect()).collect::<Vec<Vec<f64>>>(),
        )
        .unwrap();
        let cfg = SgwtConfig::default();
        let (ca, cb, cs) = (
            sgwt_coefficients(&g, &a, &cfg).unwrap(),
            sgwt_coefficients(&g, &b, &cfg).unwrap(),
            sgwt_coefficients(&g, &sum, &cfg).unwrap(),
        );
        for ((x, y), z) in ca.entries().zip(cb.entries()).zip(cs.entries()) {
            assert!((x.3 + y.3 - z.3).abs() < 1e-9);
        }
        let small = SgwtConfig { max_product_nodes: 10, ..cfg.clone() };
        assert!(matches!(sgwt_coefficients(&g, &a, &small), Err(Error::Capacity { .. })));
        let one = a.columns(0, 1).unwrap();
        assert!(matches!(sgwt_coefficients(&g, &one, &cfg), Err(Error::Window(_))));
    }

    #[test]
    fn top_nodes_bounds() {
        let mut frames = vec![vec![0.0; 5]; 2];
        frames[1][0] = 1.0;
        let x = SignalSeries::from_frames(5, &frames).unwrap();
        let c = sgwt_coefficients(&path5(), &x, &SgwtConfig::default()).unwrap();
        assert!(sgwt_top_nodes(&c, 0).is_empty());
        let all = sgwt_top_nodes(&c, 10);
        assert_eq!(all.len(), 10);
        let mut seen: Vec<(usize, usize)> = all.iter().map(|s| (s.node, s.step)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 10);
        assert!(all.windows(2).all(|w| w[0].score >= w[1].score));
        assert_eq!(sgwt_top_nodes(&c, 99).len(), 10);
    }
}
