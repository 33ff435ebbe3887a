//! Temporally evolving graph signals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `N x T` signal matrix `X`, `X[i][t]` the value at node `i`, step `t`.
///
/// Stored time-major so a single frame `x_t` is a contiguous slice. Steps are
/// addressed with 0-based column indices; `time_axis[c]` holds the timestamp
/// of column `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries<T> {
    nodes: usize,
    values: Vec<T>,
    time_axis: Vec<f64>,
}

impl<T: Real> SignalSeries<T> {
    /// Empty series over `nodes` nodes, to be filled with [`push_frame`](Self::push_frame).
    pub fn new(nodes: usize) -> Self {
        SignalSeries {
            nodes,
            values: Vec::new(),
            time_axis: Vec::new(),
        }
    }

    /// From frames `x_1..x_T` with time stamps `1..=T`.
    pub fn from_frames(nodes: usize, frames: &[Vec<T>]) -> Result<Self> {
        let mut s = Self::new(nodes);
        for (k, f) in frames.iter().enumerate() {
            s.push_frame((k + 1) as f64, f)?;
        }
        Ok(s)
    }

    /// From node-major rows `X[i]`, each of length `T`, time stamps `1..=T`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let nodes = rows.len();
        let steps = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != steps) {
            return Err(Error::dims(steps, bad.len()));
        }
        let mut values = Vec::with_capacity(nodes * steps);
        for t in 0..steps {
            values.extend(rows.iter().map(|r| r[t]));
        }
        Ok(SignalSeries {
            nodes,
            values,
            time_axis: (1..=steps).map(|t| t as f64).collect(),
        })
    }

    pub fn with_time_axis(mut self, time_axis: Vec<f64>) -> Result<Self> {
        if time_axis.len() != self.steps() {
            return Err(Error::dims(self.steps(), time_axis.len()));
        }
        if time_axis.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::argument("time axis must be strictly increasing"));
        }
        self.time_axis = time_axis;
        Ok(self)
    }

    pub fn push_frame(&mut self, time: f64, frame: &[T]) -> Result<()> {
        if frame.len() != self.nodes {
            return Err(Error::dims(self.nodes, frame.len()));
        }
        if let Some(&last) = self.time_axis.last() {
            if !(time > last) {
                return Err(Error::argument(format!("time {time} not after {last}")));
            }
        }
        self.values.extend_from_slice(frame);
        self.time_axis.push(time);
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn steps(&self) -> usize {
        self.time_axis.len()
    }

    pub fn time_axis(&self) -> &[f64] {
        &self.time_axis
    }

    pub fn get(&self, node: usize, col: usize) -> T {
        self.values[col * self.nodes + node]
    }

    pub fn frame(&self, col: usize) -> &[T] {
        &self.values[col * self.nodes..(col + 1) * self.nodes]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.values.chunks(self.nodes.max(1)).take(self.steps())
    }

    /// Node-major row `X[i][..]`.
    pub fn row(&self, node: usize) -> Vec<T> {
        (0..self.steps()).map(|c| self.get(node, c)).collect()
    }

    /// Columns `start..end` as a new series, keeping their time stamps.
    pub fn columns(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.steps() {
            return Err(Error::Window(format!(
                "columns {start}..{end} outside series of {} steps",
                self.steps()
            )));
        }
        Ok(SignalSeries {
            nodes: self.nodes,
            values: self.values[start * self.nodes..end * self.nodes].to_vec(),
            time_axis: self.time_axis[start..end].to_vec(),
        })
    }

    /// The `r` columns ending at 1-based step `t`, i.e. `X(:, t-r+1 : t)`.
    pub fn window(&self, t: usize, r: usize) -> Result<Self> {
        if r == 0 || t < r || t > self.steps() {
            return Err(Error::Window(format!(
                "window of length {r} ending at step {t} not available (series has {} steps)",
                self.steps()
            )));
        }
        self.columns(t - r, t)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        SignalSeries {
            nodes: self.nodes,
            values: self.values.iter().map(|&v| f(v)).collect(),
            time_axis: self.time_axis.clone(),
        }
    }

    /// Sums over sliding windows of `width` columns advanced by `slide`
    /// columns; each output column is stamped with its window's last time.
    pub fn sliding_sums(&self, width: usize, slide: usize) -> Result<Self> {
        if width == 0 || slide == 0 || width > self.steps() {
            return Err(Error::Window(format!(
                "sliding window width {width}, slide {slide} invalid for {} steps",
                self.steps()
            )));
        }
        let mut out = Self::new(self.nodes);
        let mut start = 0;
        while start + width <= self.steps() {
            let frame: Vec<T> = (0..self.nodes)
                .map(|i| (start..start + width).map(|c| self.get(i, c)).sum())
                .collect();
            out.push_frame(self.time_axis[start + width - 1], &frame)?;
            start += slide;
        }
        Ok(out)
    }

    pub fn as_time_major(&self) -> &[T] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_frames_agree() {
        let s = SignalSeries::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(s.nodes(), 2);
        assert_eq!(s.steps(), 3);
        assert_eq!(s.frame(1), &[2.0, 5.0]);
        assert_eq!(s.row(1), vec![4.0, 5.0, 6.0]);
        assert_eq!(s.time_axis(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn window_bounds() {
        let s = SignalSeries::from_rows(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let w = s.window(3, 2).unwrap();
        assert_eq!(w.row(0), vec![2.0, 3.0]);
        assert_eq!(w.time_axis(), &[2.0, 3.0]);
        assert!(matches!(s.window(1, 2), Err(Error::Window(_))));
        assert!(s.window(5, 2).is_err());
    }

    #[test]
    fn time_axis_must_increase() {
        let mut s = SignalSeries::<f64>::new(1);
        s.push_frame(1.0, &[0.0]).unwrap();
        assert!(s.push_frame(1.0, &[0.0]).is_err());
        assert!(s.push_frame(2.0, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn sliding_sums_biweekly() {
        let rows = vec![(1..=28).map(|v| v as f64).collect::<Vec<_>>()];
        let s = SignalSeries::from_rows(&rows).unwrap();
        let b = s.sliding_sums(14, 7).unwrap();
        assert_eq!(b.steps(), 3);
        assert_eq!(b.get(0, 0), (1..=14).sum::<i32>() as f64);
        assert_eq!(b.time_axis(), &[14.0, 21.0, 28.0]);
    }
}
