//! Weighted undirected graphs: the spatial domain of every signal.

mod centrality;
mod generate;

pub use centrality::{betweenness_centrality, closeness_centrality};
pub use generate::{
    build_distance_graph, build_scale_free_graph, kernel_graph, kernel_weight, planar_kernel_graph,
    DistanceGraphConfig, ScaleFreeConfig,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Node placement: planar coordinates or geographic degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Position {
    Planar { x: f64, y: f64 },
    Geographic { lat: f64, lon: f64 },
}

impl Position {
    /// `(x, y)` pair for plotting; geographic positions map to `(lon, lat)`.
    pub fn plot_xy(&self) -> (f64, f64) {
        match *self {
            Position::Planar { x, y } => (x, y),
            Position::Geographic { lat, lon } => (lon, lat),
        }
    }
}

/// Symmetric, zero-diagonal, non-negative weighted adjacency over `n` nodes.
///
/// Stored densely (row-major) together with sorted neighbor lists of the
/// positive entries. Values are immutable; edits return new graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    weights: Vec<T>,
    neighbors: Vec<Vec<(usize, T)>>,
    positions: Option<Vec<Position>>,
    labels: Option<Vec<String>>,
}

impl<T: Real> Graph<T> {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_dense_unchecked(n, vec![T::zero(); n * n])
    }

    /// Build from a dense row-major weight matrix, validating symmetry,
    /// zero diagonal and non-negativity. Symmetry is checked exactly.
    pub fn from_dense(n: usize, weights: Vec<T>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::dims(n * n, weights.len()));
        }
        for i in 0..n {
            if weights[i * n + i] != T::zero() {
                return Err(Error::argument(format!("non-zero diagonal weight at node {i}")));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() || w < T::zero() {
                    return Err(Error::argument(format!("invalid weight {w} at ({i}, {j})")));
                }
                if w != weights[j * n + i] {
                    return Err(Error::argument(format!("asymmetric weight at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_dense_unchecked(n, weights))
    }

    /// Build from undirected edges `(a, b, w)`. Duplicate edges are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        let mut weights = vec![T::zero(); n * n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::argument(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::argument(format!("self loop at node {a}")));
            }
            if !w.is_finite() || w < T::zero() {
                return Err(Error::argument(format!("invalid weight {w} on edge ({a}, {b})")));
            }
            if weights[a * n + b] != T::zero() {
                return Err(Error::argument(format!("duplicate edge ({a}, {b})")));
            }
            weights[a * n + b] = w;
            weights[b * n + a] = w;
        }
        Ok(Self::from_dense_unchecked(n, weights))
    }

    pub(crate) fn from_dense_unchecked(n: usize, weights: Vec<T>) -> Self {
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let w = weights[i * n + j];
                        (w > T::zero()).then_some((j, w))
                    })
                    .collect()
            })
            .collect();
        Graph {
            n,
            weights,
            neighbors,
            positions: None,
            labels: None,
        }
    }

    pub fn with_positions(mut self, positions: Vec<Position>) -> Result<Self> {
        if positions.len() != self.n {
            return Err(Error::dims(self.n, positions.len()));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::dims(self.n, labels.len()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.n + j]
    }

    /// Dense row-major weight matrix.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Neighbors of `i` with positive weight, ascending by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.neighbors[i]
    }

    pub fn positions(&self) -> Option<&[Position]> {
        self.positions.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Undirected edges `(i, j, w)` with `i < j`, ordered by `(i, j)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(i, nbrs)| {
            nbrs.iter()
                .filter(move |(j, _)| *j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree_of(&self, i: usize) -> T {
        self.neighbors[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn degrees(&self) -> DegreeVector<T> {
        degrees(self)
    }

    pub fn laplacian(&self) -> Laplacian<T> {
        laplacian(self)
    }

    /// Whether every node can reach every other node.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// Copy of this graph with every edge incident to `nodes` removed.
    pub fn isolate_nodes(&self, nodes: &[usize]) -> Result<Self> {
        isolate_nodes(self, nodes)
    }
}

/// Weighted degrees `d[i] = sum_j W[i][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeVector<T>(pub Vec<T>);

impl<T: Real> DegreeVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.0[i] == T::zero()
    }
}

/// Combinatorial Laplacian `L = D - W`, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Real> Laplacian<T> {
    /// Wrap an arbitrary square matrix. Symmetry is checked later by
    /// [`crate::spectral::eigendecompose`].
    pub fn from_matrix(n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::dims(n * n, values.len()));
        }
        Ok(Laplacian { n, values })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.values.chunks(self.n.max(1)).map(|row| row.iter().copied().sum()).collect()
    }

    /// `L x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::dims(self.n, x.len()));
        }
        Ok(self
            .values
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Quadratic form `x^T L x`.
    pub fn quadratic_form(&self, x: &[T]) -> Result<T> {
        let lx = self.apply(x)?;
        Ok(lx.iter().zip(x).map(|(&a, &b)| a * b).sum())
    }
}

pub fn degrees<T: Real>(g: &Graph<T>) -> DegreeVector<T> {
    DegreeVector((0..g.n).map(|i| g.degree_of(i)).collect())
}

pub fn laplacian<T: Real>(g: &Graph<T>) -> Laplacian<T> {
    let n = g.n;
    let mut values: Vec<T> = g.weights.iter().map(|&w| -w).collect();
    for i in 0..n {
        values[i * n + i] = g.degree_of(i);
    }
    Laplacian { n, values }
}

pub fn isolate_nodes<T: Real>(g: &Graph<T>, nodes: &[usize]) -> Result<Graph<T>> {
    let n = g.n;
    if let Some(&bad) = nodes.iter().find(|&&v| v >= n) {
        return Err(Error::argument(format!("node {bad} out of range for {n} nodes")));
    }
    let mut weights = g.weights.clone();
    for &v in nodes {
        for j in 0..n {
            weights[v * n + j] = T::zero();
            weights[j * n + v] = T::zero();
        }
    }
    let mut out = Graph::from_dense_unchecked(n, weights);
    out.positions = g.positions.clone();
    out.labels = g.labels.clone();
    Ok(out)
}
