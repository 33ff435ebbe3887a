//! Variation of graph signals over the graph and over time.
//!
//! For a frame `x`, local variation at node `i` is
//! `LV(i) = sum_{j in N(i)} (x(i) - x(j))^2 w_ij`, and total variation is the
//! sum of `LV` over nodes. Because each edge is visited from both endpoints,
//! `TV = 2 x^T L x`.
//!
//! Temporal local variation blends the signed one-step change with `LV`:
//! `TLV(i,t) = a * sign(dx) * dx^2 + (1 - a) * LV(i,t)` with `dx = x_t(i) - x_{t-1}(i)`.
//! The normalized form divides each term by its maximum over the window so
//! values land in `[-1, 2]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;
use crate::signal::SignalSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "tv")]
    TemporalVariation,
    #[serde(rename = "lv")]
    LocalVariation,
    #[serde(rename = "tlv")]
    Tlv,
    #[serde(rename = "tlv_n")]
    TlvNormalized,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::TemporalVariation => "tv",
            Metric::LocalVariation => "lv",
            Metric::Tlv => "tlv",
            Metric::TlvNormalized => "tlv_n",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Metric::TemporalVariation, Metric::LocalVariation, Metric::Tlv, Metric::TlvNormalized]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

/// Per-node, per-step variation values over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationField<T> {
    pub metric: Metric,
    /// Blend weight for the TLV metrics.
    pub alpha: Option<f64>,
    values: SignalSeries<T>,
}

impl<T: Real> VariationField<T> {
    pub fn nodes(&self) -> usize {
        self.values.nodes()
    }

    pub fn steps(&self) -> usize {
        self.values.steps()
    }

    pub fn get(&self, node: usize, col: usize) -> T {
        self.values.get(node, col)
    }

    pub fn column(&self, col: usize) -> &[T] {
        self.values.frame(col)
    }

    pub fn last_column(&self) -> &[T] {
        self.values.frame(self.steps() - 1)
    }

    pub fn time_axis(&self) -> &[f64] {
        self.values.time_axis()
    }

    pub fn as_series(&self) -> &SignalSeries<T> {
        &self.values
    }

    pub fn max(&self) -> T {
        self.values.as_time_major().iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }
}

/// `-1`, `0` or `+1`; exact zero maps to 0 and there is no epsilon snapping.
pub fn sign_phi<T: Real>(delta: T) -> T {
    if delta > T::zero() {
        T::one()
    } else if delta < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

fn check_frame<T: Real>(g: &Graph<T>, x: &[T]) -> Result<()> {
    if x.len() != g.node_count() {
        return Err(Error::dims(g.node_count(), x.len()));
    }
    Ok(())
}

pub fn local_variation<T: Real>(g: &Graph<T>, x: &[T]) -> Result<Vec<T>> {
    check_frame(g, x)?;
    Ok((0..x.len())
        .map(|i| {
            g.neighbors(i)
                .iter()
                .map(|&(j, w)| {
                    let d = x[i] - x[j];
                    d * d * w
                })
                .sum()
        })
        .collect())
}

pub fn total_variation<T: Real>(g: &Graph<T>, x: &[T]) -> Result<T> {
    Ok(local_variation(g, x)?.into_iter().sum())
}

fn series_check<T: Real>(g: &Graph<T>, series: &SignalSeries<T>) -> Result<()> {
    if series.nodes() != g.node_count() {
        return Err(Error::dims(g.node_count(), series.nodes()));
    }
    Ok(())
}

fn field<T: Real>(metric: Metric, alpha: Option<f64>, like: &SignalSeries<T>, frames: Vec<Vec<T>>) -> VariationField<T> {
    let values = SignalSeries::from_frames(like.nodes(), &frames)
        .and_then(|s| s.with_time_axis(like.time_axis().to_vec()))
        .expect("frames shaped like the input series");
    VariationField { metric, alpha, values }
}

/// `LV(i, t)` for every column.
pub fn local_variation_series<T: Real>(g: &Graph<T>, series: &SignalSeries<T>) -> Result<VariationField<T>> {
    series_check(g, series)?;
    let frames = series.frames().map(|x| local_variation(g, x)).collect::<Result<Vec<_>>>()?;
    Ok(field(Metric::LocalVariation, None, series, frames))
}

/// Squared one-step change; the first column is 0.
pub fn temporal_variation<T: Real>(series: &SignalSeries<T>) -> VariationField<T> {
    let n = series.nodes();
    let frames = (0..series.steps())
        .map(|c| {
            if c == 0 {
                vec![T::zero(); n]
            } else {
                let (prev, cur) = (series.frame(c - 1), series.frame(c));
                cur.iter().zip(prev).map(|(&a, &b)| (a - b) * (a - b)).collect()
            }
        })
        .collect();
    field(Metric::TemporalVariation, None, series, frames)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::argument(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// Signed temporal term `sign(dx) dx^2` and `LV`, per column.
fn temporal_and_local<T: Real>(g: &Graph<T>, series: &SignalSeries<T>) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>)> {
    series_check(g, series)?;
    let n = series.nodes();
    let mut signed = Vec::with_capacity(series.steps());
    let mut local = Vec::with_capacity(series.steps());
    for c in 0..series.steps() {
        let cur = series.frame(c);
        signed.push(if c == 0 {
            vec![T::zero(); n]
        } else {
            cur.iter()
                .zip(series.frame(c - 1))
                .map(|(&a, &b)| {
                    let d = a - b;
                    sign_phi(d) * d * d
                })
                .collect()
        });
        local.push(local_variation(g, cur)?);
    }
    Ok((signed, local))
}

/// Unnormalized TLV over every column of `series`.
pub fn tlv<T: Real>(g: &Graph<T>, series: &SignalSeries<T>, alpha: f64) -> Result<VariationField<T>> {
    check_alpha(alpha)?;
    let (signed, local) = temporal_and_local(g, series)?;
    let (a, b) = (T::of(alpha), T::of(1.0 - alpha));
    let frames = signed
        .iter()
        .zip(&local)
        .map(|(s, l)| s.iter().zip(l).map(|(&s, &l)| a * s + b * l).collect())
        .collect();
    Ok(field(Metric::Tlv, Some(alpha), series, frames))
}

/// TLV with each term scaled by its maximum over the whole window (all nodes,
/// all steps). A zero maximum makes that term 0.
pub fn tlv_normalized<T: Real>(g: &Graph<T>, window: &SignalSeries<T>, alpha: f64) -> Result<VariationField<T>> {
    check_alpha(alpha)?;
    if window.steps() < 2 {
        return Err(Error::Window("normalized TLV needs a window of at least 2 steps".into()));
    }
    let (signed, local) = temporal_and_local(g, window)?;
    let max_of = |m: &[Vec<T>]| m.iter().flatten().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let (tv_max, lv_max) = (max_of(&signed), max_of(&local));
    let scaled = |v: T, max: T| if max > T::zero() { v / max } else { T::zero() };
    let (a, b) = (T::of(alpha), T::of(1.0 - alpha));
    let frames = signed
        .iter()
        .zip(&local)
        .map(|(s, l)| {
            s.iter()
                .zip(l)
                .map(|(&s, &l)| a * scaled(s, tv_max) + b * scaled(l, lv_max))
                .collect()
        })
        .collect();
    Ok(field(Metric::TlvNormalized, Some(alpha), window, frames))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_nodes() -> Graph<f64> {
        Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn path3() -> Graph<f64> {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&path3(), &[2.0; 3]).unwrap(), 0.0);
        assert_eq!(total_variation(&two_nodes(), &[0.0, 1.0]).unwrap(), 2.0);
        let g = two_nodes();
        let q = g.laplacian().quadratic_form(&[0.0, 1.0]).unwrap();
        assert_eq!(total_variation(&g, &[0.0, 1.0]).unwrap(), 2.0 * q);
        assert!(matches!(total_variation(&g, &[0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn local_variation_examples() {
        assert_eq!(local_variation(&path3(), &[1.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(local_variation(&path3(), &[0.0, 1.0, 3.0]).unwrap(), vec![1.0, 5.0, 4.0]);
    }

    #[test]
    fn temporal_variation_examples() {
        let s = SignalSeries::from_rows(&[vec![0.0, 2.0, 1.0]]).unwrap();
        assert_eq!(temporal_variation(&s).as_series().row(0), vec![0.0, 4.0, 1.0]);
        let c = SignalSeries::from_rows(&[vec![3.0; 4], vec![1.0; 4]]).unwrap();
        let tv = temporal_variation(&c);
        assert!(tv.as_series().as_time_major().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_phi(0.0f64), 0.0);
        assert_eq!(sign_phi(3.2f64), 1.0);
        assert_eq!(sign_phi(-1e-300f64), -1.0);
        assert_eq!(sign_phi(-0.0f64), 0.0);
    }

    #[test]
    fn tlv_hand_example() {
        let x = SignalSeries::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let f = tlv(&two_nodes(), &x, 0.5).unwrap();
        assert_eq!(f.get(0, 1), 1.0);
        assert_eq!(f.get(1, 1), 0.5);
        assert_eq!(f.metric, Metric::Tlv);
    }

    #[test]
    fn tlv_alpha_limits() {
        let x = SignalSeries::from_rows(&[vec![0.0, 1.0, 0.5], vec![0.2, 0.1, 0.9], vec![0.0, 0.4, 0.4]]).unwrap();
        let g = path3();
        let lv = local_variation_series(&g, &x).unwrap();
        assert_eq!(tlv(&g, &x, 0.0).unwrap().as_series(), lv.as_series());
        let t1 = tlv(&g, &x, 1.0).unwrap();
        let tv = temporal_variation(&x);
        for c in 0..3 {
            for i in 0..3 {
                let d = if c == 0 { 0.0 } else { x.get(i, c) - x.get(i, c - 1) };
                assert_eq!(t1.get(i, c), sign_phi(d) * tv.get(i, c));
            }
        }
        assert!(tlv(&g, &x, 1.5).is_err());
    }

    #[test]
    fn normalized_constant_window_is_zero() {
        let x = SignalSeries::from_rows(&[vec![0.3; 5], vec![0.3; 5]]).unwrap();
        let f = tlv_normalized(&two_nodes(), &x, 0.6).unwrap();
        assert!(f.as_series().as_time_major().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_single_changing_node() {
        // node 0 rises 0 -> 1, nodes 1 and 2 stay put; only edge (0,1) differs
        // spatially in the last column
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let x = SignalSeries::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let alpha = 0.7;
        let f = tlv_normalized(&g, &x, alpha).unwrap();
        // LV at t = 2: node 0 -> 1, node 1 -> 1, node 2 -> 0; max 1, node 0 share 1
        assert!((f.get(0, 1) - (alpha + (1.0 - alpha) * 1.0)).abs() < 1e-15);
        assert!((f.get(1, 1) - (1.0 - alpha)).abs() < 1e-15);
        assert_eq!(f.get(2, 1), 0.0);
        assert!(tlv_normalized(&g, &x.columns(0, 1).unwrap(), alpha).is_err());
    }

    #[test]
    fn normalized_range_with_falling_signal() {
        let x = SignalSeries::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let f = tlv_normalized(&two_nodes(), &x, 1.0).unwrap();
        assert_eq!(f.get(0, 1), -1.0);
        assert!(f.as_series().as_time_major().iter().all(|&v| (-1.0..=2.0).contains(&v)));
    }

    #[test]
    fn works_in_single_precision() {
        let g: Graph<f32> = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(local_variation(&g, &[0.0f32, 1.0, 3.0]).unwrap(), vec![1.0, 5.0, 4.0]);
    }
}
