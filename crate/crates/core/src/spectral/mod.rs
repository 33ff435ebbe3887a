//! Laplacian eigenbasis, graph Fourier transform and spectral filters.

mod sgwt;

pub use sgwt::{
    sgwt_coefficients, sgwt_top_nodes, strong_product_with_path, SgwtCoefficients, SgwtConfig,
    SgwtKernel, SpatioTemporalNode,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::scalar::Real;
use crate::signal::SignalSeries;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    n: usize,
    eigenvalues: Vec<T>,
    /// Row-major `U`; column `k` is eigenvector `u_k`.
    eigenvectors: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `U[i][k]`: component `i` of eigenvector `k`.
    pub fn u(&self, i: usize, k: usize) -> T {
        self.eigenvectors[i * self.n + k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<T> {
        (0..self.n).map(|i| self.u(i, k)).collect()
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// `U diag(lambda) U^T`, dense row-major.
    pub fn reconstruct(&self) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| self.u(i, k) * self.eigenvalues[k] * self.u(j, k)).sum();
            }
        }
        out
    }

    /// `U^T x`.
    pub fn forward(&self, x: &[T]) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == T::zero() {
                continue;
            }
            let row = &self.eigenvectors[i * n..(i + 1) * n];
            for (o, &u) in out.iter_mut().zip(row) {
                *o += u * xi;
            }
        }
        out
    }

    /// `U c`.
    pub fn inverse(&self, coeffs: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.eigenvectors[i * n..(i + 1) * n];
                row.iter().zip(coeffs).map(|(&u, &c)| u * c).sum()
            })
            .collect()
    }
}

pub fn eigendecompose<T: Real>(l: &Laplacian<T>) -> Result<Spectrum<T>> {
    let n = l.order();
    let a = l.as_slice();
    let scale = a.iter().fold(T::one(), |m, &v| m.max(v.abs()));
    let tol = T::epsilon() * T::of(64.0) * scale;
    for i in 0..n {
        for j in i + 1..n {
            if (a[i * n + j] - a[j * n + i]).abs() > tol {
                return Err(Error::argument(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let (values, vectors) = T::symmetric_eigen(a, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| values[p].partial_cmp(&values[q]).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = vec![T::zero(); n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[i * n + new_k] = vectors[i * n + old_k];
        }
    }
    Ok(Spectrum {
        n,
        eigenvalues,
        eigenvectors,
    })
}

/// Graph Fourier transform `U^T x`.
pub fn gft<T: Real>(spec: &Spectrum<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != spec.n {
        return Err(Error::dims(spec.n, x.len()));
    }
    Ok(spec.forward(x))
}

pub fn inverse_gft<T: Real>(spec: &Spectrum<T>, coeffs: &[T]) -> Result<Vec<T>> {
    if coeffs.len() != spec.n {
        return Err(Error::dims(spec.n, coeffs.len()));
    }
    Ok(spec.inverse(coeffs))
}

/// `U diag(response) U^T X`, applied frame by frame.
pub fn spectral_filter<T: Real>(
    spec: &Spectrum<T>,
    series: &SignalSeries<T>,
    response: &[T],
) -> Result<SignalSeries<T>> {
    if series.nodes() != spec.n {
        return Err(Error::dims(spec.n, series.nodes()));
    }
    if response.len() != spec.n {
        return Err(Error::dims(spec.n, response.len()));
    }
    let mut out = SignalSeries::new(spec.n);
    for (c, frame) in series.frames().enumerate() {
        let mut coeffs = spec.forward(frame);
        for (x, &h) in coeffs.iter_mut().zip(response) {
            *x *= h;
        }
        out.push_frame(series.time_axis()[c], &spec.inverse(&coeffs))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpfConfig {
    /// Share of the highest graph frequencies kept, in `(0, 1]`.
    pub fraction: f64,
}

impl Default for HpfConfig {
    fn default() -> Self {
        HpfConfig { fraction: 0.25 }
    }
}

impl HpfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::config(format!("HPF fraction {} outside (0, 1]", self.fraction)));
        }
        Ok(())
    }

    /// Number of kept frequencies: `ceil(fraction * n)`.
    pub fn kept(&self, n: usize) -> usize {
        let raw = (self.fraction * n as f64 - 1e-9).ceil();
        (raw.max(1.0) as usize).min(n)
    }

    /// Binary response selecting the top `kept(n)` eigenvalues by rank.
    pub fn mask<T: Real>(&self, n: usize) -> Vec<T> {
        let keep = self.kept(n);
        (0..n).map(|k| if k >= n - keep { T::one() } else { T::zero() }).collect()
    }
}

/// Graph high-pass filter `U diag(h) U^T X`.
pub fn graph_hpf<T: Real>(
    spec: &Spectrum<T>,
    series: &SignalSeries<T>,
    cfg: &HpfConfig,
) -> Result<SignalSeries<T>> {
    cfg.validate()?;
    spectral_filter(spec, series, &cfg.mask(spec.n))
}
