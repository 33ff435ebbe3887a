//! Initial conditions and transmission-rate schedules for the experiments.

use serde::{Deserialize, Serialize};

use super::{EpidemicState, SirParams};
use crate::error::{Error, Result};
use crate::graph::{build_scale_free_graph, Graph, ScaleFreeConfig};
use crate::rng;
use crate::scalar::Real;

/// From `time` on, the listed nodes transmit at rate `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEvent<T> {
    pub time: f64,
    pub nodes: Vec<usize>,
    pub beta: T,
}

impl<T: Real> BetaEvent<T> {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !self.time.is_finite() {
            return Err(Error::config("event time must be finite"));
        }
        if let Some(v) = self.nodes.iter().find(|&&v| v >= n) {
            return Err(Error::config(format!("event node {v} out of range for {n} nodes")));
        }
        if !(self.beta >= T::zero()) {
            return Err(Error::config("event beta must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioKind {
    /// One random source node.
    SinglePerturbation,
    /// One random source whose `beta` is raised at `time`.
    DoublePerturbation { time: f64, beta: f64 },
    /// `sources` random sources; at each of `event_times`, `nodes_per_event`
    /// fresh nodes (never previously chosen) get rate `beta`.
    MultipleInfections {
        sources: usize,
        event_times: Vec<f64>,
        nodes_per_event: usize,
        beta: f64,
    },
    /// At each of `event_times`, `ceil(fraction * N)` random nodes get rate `beta`.
    SuperSpreader {
        event_times: Vec<f64>,
        fraction: f64,
        beta: f64,
    },
    /// Explicit events; sources come from [`ScenarioSpec::sources`].
    Custom { events: Vec<BetaEvent<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Infection fraction placed on each source at `t = 1`.
    pub initial_fraction: f64,
    /// Recorded steps.
    pub horizon: usize,
    /// Explicit sources, overriding random choice.
    pub sources: Option<Vec<usize>>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::new(ScenarioKind::SinglePerturbation, 1000)
    }
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, horizon: usize) -> Self {
        ScenarioSpec {
            kind,
            initial_fraction: 0.002,
            horizon,
            sources: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_fraction > 0.0 && self.initial_fraction <= 1.0) {
            return Err(Error::config("initial fraction must lie in (0, 1]"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be at least 1"));
        }
        let horizon = self.horizon as f64;
        let in_horizon = |t: f64| t.is_finite() && (1.0..=horizon).contains(&t);
        let times: Vec<f64> = match &self.kind {
            ScenarioKind::SinglePerturbation => vec![],
            ScenarioKind::DoublePerturbation { time, beta } => {
                if *beta < 0.0 {
                    return Err(Error::config("perturbed beta must be non-negative"));
                }
                vec![*time]
            }
            ScenarioKind::MultipleInfections { sources, event_times, beta, .. } => {
                if *sources == 0 || *beta < 0.0 {
                    return Err(Error::config("multiple infections need sources > 0 and beta >= 0"));
                }
                event_times.clone()
            }
            ScenarioKind::SuperSpreader { event_times, fraction, beta } => {
                if !(*fraction > 0.0 && *fraction <= 1.0) || *beta < 0.0 {
                    return Err(Error::config("super-spreader fraction must lie in (0, 1]"));
                }
                event_times.clone()
            }
            ScenarioKind::Custom { events } => events.iter().map(|e| e.time).collect(),
        };
        if let Some(t) = times.into_iter().find(|&t| !in_horizon(t)) {
            return Err(Error::config(format!("event time {t} outside [1, {}]", self.horizon)));
        }
        Ok(())
    }

    fn source_count(&self) -> usize {
        match &self.kind {
            ScenarioKind::MultipleInfections { sources, .. } => *sources,
            _ => 1,
        }
    }
}

/// Concrete initial state and schedule drawn from a [`ScenarioSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub init: EpidemicState<T>,
    pub schedule: Vec<BetaEvent<T>>,
    pub sources: Vec<usize>,
}

pub fn make_scenario<T: Real>(spec: &ScenarioSpec, g: &Graph<T>, seed: u64) -> Result<Scenario<T>> {
    spec.validate()?;
    let n = g.node_count();
    let mut rng = rng::seeded(seed);
    let not_enough = || Error::config(format!("not enough distinct nodes in a graph of {n}"));
    let sources = match &spec.sources {
        Some(s) => {
            if let Some(v) = s.iter().find(|&&v| v >= n) {
                return Err(Error::config(format!("source {v} out of range")));
            }
            s.clone()
        }
        None => rng::sample_distinct(&mut rng, n, spec.source_count(), &[]).ok_or_else(not_enough)?,
    };
    let init = EpidemicState::seeded(n, &sources, T::of(spec.initial_fraction));
    let schedule = match &spec.kind {
        ScenarioKind::SinglePerturbation => vec![],
        ScenarioKind::DoublePerturbation { time, beta } => vec![BetaEvent {
            time: *time,
            nodes: sources.clone(),
            beta: T::of(*beta),
        }],
        ScenarioKind::MultipleInfections { event_times, nodes_per_event, beta, .. } => {
            let mut used = sources.clone();
            let mut events = Vec::with_capacity(event_times.len());
            for &time in event_times {
                let nodes = rng::sample_distinct(&mut rng, n, *nodes_per_event, &used).ok_or_else(not_enough)?;
                used.extend_from_slice(&nodes);
                events.push(BetaEvent { time, nodes, beta: T::of(*beta) });
            }
            events
        }
        ScenarioKind::SuperSpreader { event_times, fraction, beta } => {
            let count = ((fraction * n as f64) - 1e-9).ceil() as usize;
            event_times
                .iter()
                .map(|&time| {
                    let nodes = rng::sample_distinct(&mut rng, n, count, &[]).ok_or_else(not_enough)?;
                    Ok(BetaEvent { time, nodes, beta: T::of(*beta) })
                })
                .collect::<Result<_>>()?
        }
        ScenarioKind::Custom { events } => events
            .iter()
            .map(|e| BetaEvent { time: e.time, nodes: e.nodes.clone(), beta: T::of(e.beta) })
            .collect(),
    };
    for ev in &schedule {
        ev.validate(n)?;
    }
    Ok(Scenario { init, schedule, sources })
}

/// Node count of the synthetic airport-like network.
pub const AIRPORT_NODES: usize = 1292;

/// Seeded scale-free stand-in for a global airport network; node 0 is
/// labelled `MEX` and serves as the outbreak origin.
pub fn airport_like_network<T: Real>(seed: u64) -> Result<Graph<T>> {
    let g = build_scale_free_graph(&ScaleFreeConfig { n: AIRPORT_NODES, m: 3, seed })?;
    let labels = (0..AIRPORT_NODES)
        .map(|i| if i == 0 { "MEX".to_string() } else { format!("AP{i:04}") })
        .collect();
    g.with_labels(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperSpreaderConfig {
    pub event_times: Vec<f64>,
    pub fraction: f64,
    pub beta: f64,
}

impl Default for SuperSpreaderConfig {
    fn default() -> Self {
        SuperSpreaderConfig {
            event_times: vec![],
            fraction: 0.02,
            beta: 0.8,
        }
    }
}

/// Hybrid H1N1 setup. `beta` and `gamma` are configuration placeholders,
/// not measured disease parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct H1n1Config {
    pub kappa: f64,
    pub beta: f64,
    pub gamma: f64,
    pub initial_fraction: f64,
    pub horizon: usize,
    /// Source node; defaults to the node labelled `MEX`, else node 0.
    pub source: Option<usize>,
    pub super_spreader: Option<SuperSpreaderConfig>,
}

impl Default for H1n1Config {
    fn default() -> Self {
        H1n1Config {
            kappa: 0.0028,
            beta: 0.4,
            gamma: 0.25,
            initial_fraction: 0.002,
            horizon: 365,
            source: None,
            super_spreader: None,
        }
    }
}

pub fn h1n1_config<T: Real>(g: &Graph<T>, cfg: &H1n1Config) -> Result<(SirParams<T>, ScenarioSpec)> {
    let n = g.node_count();
    let source = match cfg.source {
        Some(s) if s < n => s,
        Some(s) => return Err(Error::config(format!("H1N1 source {s} out of range"))),
        None => g
            .labels()
            .and_then(|l| l.iter().position(|x| x == "MEX"))
            .unwrap_or(0),
    };
    let params = SirParams::uniform(n, T::of(cfg.beta), T::of(cfg.gamma), T::of(cfg.kappa));
    params.validate(n)?;
    let kind = match &cfg.super_spreader {
        Some(ss) => ScenarioKind::SuperSpreader {
            event_times: ss.event_times.clone(),
            fraction: ss.fraction,
            beta: ss.beta,
        },
        None => ScenarioKind::SinglePerturbation,
    };
    let spec = ScenarioSpec {
        kind,
        initial_fraction: cfg.initial_fraction,
        horizon: cfg.horizon,
        sources: Some(vec![source]),
    };
    spec.validate()?;
    Ok((params, spec))
}
