//! Online identification of influential nodes, staged isolation control and
//! the Monte Carlo alpha sweep.

mod compare;
mod control;
mod sweep;

pub use compare::{compare_sgwt_tlv, SgwtComparison};
pub use control::{
    apply_control, control_from_checkpoint, prepare_trial, staged_control, ControlOutcome, InterventionPlan,
    PreparedTrial, Stage, StageRecord, StagedScenario,
};
pub use sweep::{alpha_sweep, default_alpha_grid, trial_seed, MethodCurve, SweepConfig, SweepResult, TrialSummary};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{betweenness_centrality, closeness_centrality, Graph};
use crate::scalar::Real;
use crate::signal::SignalSeries;
use crate::spectral::{sgwt_coefficients, HpfConfig, SgwtConfig, Spectrum};
use crate::variation::{local_variation, tlv, tlv_normalized};

/// Node scoring rule used by [`identify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Raw infection at the current step.
    Max,
    /// Magnitude of the graph high-pass filtered signal.
    Hpf,
    /// Local variation of the current frame.
    Lv,
    /// Temporal local variation over the window.
    Tlv,
    /// Summed wavelet magnitudes on the space-time product graph.
    Sgwt,
    /// Betweenness centrality of the current graph.
    Bc,
    /// Closeness centrality of the current graph.
    Cc,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Max,
        Strategy::Hpf,
        Strategy::Lv,
        Strategy::Tlv,
        Strategy::Sgwt,
        Strategy::Bc,
        Strategy::Cc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Max => "max",
            Strategy::Hpf => "hpf",
            Strategy::Lv => "lv",
            Strategy::Tlv => "tlv",
            Strategy::Sgwt => "sgwt",
            Strategy::Bc => "bc",
            Strategy::Cc => "cc",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    /// Whether the Laplacian eigenbasis of the current graph is needed.
    pub fn needs_spectrum(&self) -> bool {
        matches!(self, Strategy::Hpf)
    }

    fn is_temporal(&self) -> bool {
        matches!(self, Strategy::Tlv | Strategy::Sgwt)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentifyConfig {
    pub strategy: Strategy,
    /// Window length in steps.
    pub r: usize,
    /// Percentage of nodes reported, in `(0, 100]`.
    pub p: f64,
    pub alpha: f64,
    /// Use the window-normalized TLV.
    pub normalized: bool,
    pub hpf: HpfConfig,
    pub sgwt: SgwtConfig,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        IdentifyConfig {
            strategy: Strategy::Tlv,
            r: 10,
            p: 5.0,
            alpha: 0.5,
            normalized: true,
            hpf: HpfConfig::default(),
            sgwt: SgwtConfig::default(),
        }
    }
}

impl IdentifyConfig {
    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        IdentifyConfig { strategy, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || (self.strategy.is_temporal() && self.r < 2) {
            return Err(Error::config(format!("window r = {} too short for {}", self.r, self.strategy)));
        }
        if !(self.p > 0.0 && self.p <= 100.0) {
            return Err(Error::config(format!("top percentage {} outside (0, 100]", self.p)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        self.hpf.validate()?;
        self.sgwt.validate()
    }
}

/// Number of reported nodes, `ceil(p N / 100)` capped at `N`.
pub fn top_count(p: f64, n: usize) -> usize {
    let raw = (p * n as f64 / 100.0 - 1e-9).ceil();
    (raw.max(0.0) as usize).min(n)
}

/// Top nodes at one step, in descending score order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluentialSet<T> {
    /// 1-based step.
    pub time: usize,
    pub nodes: Vec<usize>,
    pub scores: Vec<T>,
    pub strategy: Strategy,
}

impl<T> InfluentialSet<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.contains(&node)
    }
}

/// All node indices ordered by descending score, ties to the lower index.
pub fn rank_nodes<T: Real>(scores: &[T]) -> Result<Vec<usize>> {
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::argument("node scores contain NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// Per-node scores of `cfg.strategy` at 1-based step `t`, using the window
/// of the `r` steps ending at `t`.
pub fn node_scores<T: Real>(
    g: &Graph<T>,
    x: &SignalSeries<T>,
    t: usize,
    cfg: &IdentifyConfig,
    spec: Option<&Spectrum<T>>,
) -> Result<Vec<T>> {
    cfg.validate()?;
    let n = g.node_count();
    if x.nodes() != n {
        return Err(Error::dims(n, x.nodes()));
    }
    let window = x.window(t, cfg.r)?;
    let last = window.frame(window.steps() - 1);
    match cfg.strategy {
        Strategy::Max => Ok(last.to_vec()),
        Strategy::Hpf => {
            let spec = spec.ok_or_else(|| Error::argument("HPF strategy needs the graph spectrum"))?;
            if spec.order() != n {
                return Err(Error::dims(n, spec.order()));
            }
            let mut coeffs = spec.forward(last);
            for (c, h) in coeffs.iter_mut().zip(cfg.hpf.mask::<T>(n)) {
                *c *= h;
            }
            Ok(spec.inverse(&coeffs).into_iter().map(|v| v.abs()).collect())
        }
        Strategy::Lv => local_variation(g, last),
        Strategy::Tlv => {
            let field = if cfg.normalized {
                tlv_normalized(g, &window, cfg.alpha)?
            } else {
                tlv(g, &window, cfg.alpha)?
            };
            Ok(field.last_column().to_vec())
        }
        Strategy::Sgwt => {
            let coeffs = sgwt_coefficients(g, &window, &cfg.sgwt)?;
            let step = coeffs.steps() - 1;
            Ok((0..n).map(|v| coeffs.aggregate(v, step)).collect())
        }
        Strategy::Bc => Ok(betweenness_centrality(g)),
        Strategy::Cc => Ok(closeness_centrality(g)),
    }
}

/// Influential nodes at 1-based step `t`: the top `ceil(p N / 100)` nodes by
/// the configured strategy.
pub fn identify<T: Real>(
    g: &Graph<T>,
    x: &SignalSeries<T>,
    t: usize,
    cfg: &IdentifyConfig,
    spec: Option<&Spectrum<T>>,
) -> Result<InfluentialSet<T>> {
    let scores = node_scores(g, x, t, cfg, spec)?;
    let m = top_count(cfg.p, g.node_count());
    let nodes: Vec<usize> = rank_nodes(&scores)?.into_iter().take(m).collect();
    Ok(InfluentialSet {
        time: t,
        scores: nodes.iter().map(|&v| scores[v]).collect(),
        nodes,
        strategy: cfg.strategy,
    })
}

/// [`identify`] at every step from `r` to the end of the series.
pub fn identify_online<T: Real>(
    g: &Graph<T>,
    x: &SignalSeries<T>,
    cfg: &IdentifyConfig,
    spec: Option<&Spectrum<T>>,
) -> Result<Vec<InfluentialSet<T>>> {
    (cfg.r..=x.steps()).map(|t| identify(g, x, t, cfg, spec)).collect()
}

/// Earliest 1-based step of maximal total infection.
pub fn peak_time<T: Real>(series: &SignalSeries<T>) -> Result<usize> {
    if series.steps() == 0 {
        return Err(Error::argument("peak of an empty series"));
    }
    let totals = cumulative_infection(series);
    let mut best = 0;
    for (k, &v) in totals.iter().enumerate() {
        if v > totals[best] {
            best = k;
        }
    }
    Ok(best + 1)
}

/// Total infection over all nodes at each step.
pub fn cumulative_infection<T: Real>(series: &SignalSeries<T>) -> Vec<T> {
    series.frames().map(|f| f.iter().copied().sum()).collect()
}

/// Running time-sum of [`cumulative_infection`]; its last entry is the
/// infection burden used to compare control strategies.
pub fn accumulated_infection<T: Real>(series: &SignalSeries<T>) -> Vec<T> {
    let mut acc = T::zero();
    cumulative_infection(series)
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}
