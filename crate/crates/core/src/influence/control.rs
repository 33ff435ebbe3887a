use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{cumulative_infection, identify, peak_time, top_count, IdentifyConfig, InfluentialSet, Strategy};
use crate::epidemic::{
    make_scenario, IntegratorConfig, Scenario, ScenarioKind, ScenarioSpec, Simulation, SirParams,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;
use crate::signal::SignalSeries;
use crate::spectral::eigendecompose;

/// One intervention: identification at `time + t_c`, isolating `p` percent
/// of the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    /// Trigger step `T_n` (1-based).
    pub time: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionPlan {
    pub stages: Vec<Stage>,
    /// Lag in steps between trigger and action.
    pub t_c: usize,
}

impl InterventionPlan {
    pub fn empty() -> Self {
        InterventionPlan { stages: Vec::new(), t_c: 0 }
    }

    /// Stages at `T_n = max(floor(f_n * peak), r)`.
    pub fn from_peak(peak: usize, fractions: &[f64], percents: &[f64], t_c: usize, r: usize) -> Result<Self> {
        if fractions.len() != percents.len() {
            return Err(Error::config("stage fractions and percentages differ in length"));
        }
        let stages = fractions
            .iter()
            .zip(percents)
            .map(|(&f, &p)| Stage {
                time: ((f * peak as f64).floor() as usize).max(r),
                p,
            })
            .collect();
        let plan = InterventionPlan { stages, t_c };
        plan.check_stages()?;
        Ok(plan)
    }

    fn check_stages(&self) -> Result<()> {
        for w in self.stages.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::config(format!(
                    "stage times must increase strictly (got {} then {})",
                    w[0].time, w[1].time
                )));
            }
        }
        if let Some(s) = self.stages.iter().find(|s| !(s.p > 0.0 && s.p <= 100.0)) {
            return Err(Error::config(format!("stage percentage {} outside (0, 100]", s.p)));
        }
        if self.stages.iter().any(|s| s.time == 0) {
            return Err(Error::config("stage times are 1-based"));
        }
        Ok(())
    }

    pub fn validate(&self, horizon: usize, r: usize) -> Result<()> {
        self.check_stages()?;
        for a in self.action_times() {
            if a < r {
                return Err(Error::config(format!("action at step {a} precedes a full window of {r}")));
            }
            if a > horizon {
                return Err(Error::config(format!("action at step {a} beyond horizon {horizon}")));
            }
        }
        Ok(())
    }

    /// Steps at which isolation takes place, `T_n + t_c`.
    pub fn action_times(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.time + self.t_c).collect()
    }
}

/// Identify at `t_c` on `g` and isolate the identified nodes.
pub fn apply_control<T: Real>(
    g: &Graph<T>,
    x: &SignalSeries<T>,
    t_c: usize,
    cfg: &IdentifyConfig,
    spec: Option<&crate::spectral::Spectrum<T>>,
) -> Result<(Graph<T>, InfluentialSet<T>)> {
    if top_count(cfg.p, g.node_count()) == 0 {
        let none = InfluentialSet { time: t_c, nodes: vec![], scores: vec![], strategy: cfg.strategy };
        return Ok((g.clone(), none));
    }
    let set = identify(g, x, t_c, cfg, spec)?;
    let controlled = g.isolate_nodes(&set.nodes)?;
    Ok((controlled, set))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord<T> {
    /// 1-based stage number.
    pub stage: usize,
    pub trigger: usize,
    pub action_time: usize,
    pub p: f64,
    pub set: InfluentialSet<T>,
    /// Identified nodes that an earlier stage had already isolated.
    pub repeated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutcome<T> {
    pub plan: InterventionPlan,
    pub strategy: Strategy,
    pub controlled_series: SignalSeries<T>,
    /// Graph in force after each stage.
    pub control_graphs: Vec<Graph<T>>,
    pub stages: Vec<StageRecord<T>>,
    /// All isolated nodes, ascending.
    pub isolated: Vec<usize>,
    /// Total infection per step.
    pub cumulative_curve: Vec<T>,
    /// Sum of `cumulative_curve` over the horizon.
    pub final_cumulative: T,
}

impl<T: Real> ControlOutcome<T> {
    /// Running time-sum of `cumulative_curve`.
    pub fn accumulated_curve(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.cumulative_curve
            .iter()
            .map(|v| {
                acc += v.as_f64();
                acc
            })
            .collect()
    }
}

fn in_stage(stage: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Stage { stage, source: Box::new(e) }
}

/// Continue `sim` under the staged plan. `sim` may be a checkpoint taken at
/// or before the first action step, so an uncontrolled prefix can be shared
/// across strategies. Errors carry the number of interventions applied when
/// they occurred.
pub fn control_from_checkpoint<T: Real>(
    mut sim: Simulation<T>,
    g: &Graph<T>,
    plan: &InterventionPlan,
    cfg: &IdentifyConfig,
    horizon: usize,
) -> Result<ControlOutcome<T>> {
    plan.validate(horizon, cfg.r)?;
    if !plan.stages.is_empty() {
        cfg.validate()?;
    }
    let actions = plan.action_times();
    if let Some(&first) = actions.first() {
        if sim.recorded_steps() > first {
            return Err(Error::argument(format!(
                "checkpoint at step {} is past the first action at step {first}",
                sim.recorded_steps()
            )));
        }
    }
    let mut current = g.clone();
    let mut isolated = BTreeSet::new();
    let mut control_graphs = Vec::with_capacity(plan.stages.len());
    let mut stages = Vec::with_capacity(plan.stages.len());
    for (k, (stage, &action)) in plan.stages.iter().zip(&actions).enumerate() {
        sim.run_to_step(action).map_err(in_stage(k))?;
        let stage_cfg = IdentifyConfig { p: stage.p, ..cfg.clone() };
        let spec = if cfg.strategy.needs_spectrum() {
            Some(eigendecompose(&current.laplacian()).map_err(in_stage(k + 1))?)
        } else {
            None
        };
        let (next, set) =
            apply_control(&current, sim.infection(), action, &stage_cfg, spec.as_ref()).map_err(in_stage(k + 1))?;
        let repeated = set.nodes.iter().filter(|v| isolated.contains(*v)).count();
        isolated.extend(set.nodes.iter().copied());
        sim.set_graph(&next)?;
        control_graphs.push(next.clone());
        current = next;
        stages.push(StageRecord {
            stage: k + 1,
            trigger: stage.time,
            action_time: action,
            p: stage.p,
            set,
            repeated,
        });
    }
    sim.run_to_step(horizon).map_err(in_stage(plan.stages.len()))?;
    let controlled_series = sim.into_record(0).series;
    let cumulative_curve = cumulative_infection(&controlled_series);
    let final_cumulative = cumulative_curve.iter().copied().sum();
    Ok(ControlOutcome {
        plan: plan.clone(),
        strategy: cfg.strategy,
        controlled_series,
        control_graphs,
        stages,
        isolated: isolated.into_iter().collect(),
        cumulative_curve,
        final_cumulative,
    })
}

/// Simulate `scenario` for `horizon` steps, isolating influential nodes at
/// each stage of `plan`. Isolation is cumulative across stages.
pub fn staged_control<T: Real>(
    g: &Graph<T>,
    params: &SirParams<T>,
    scenario: &Scenario<T>,
    horizon: usize,
    plan: &InterventionPlan,
    cfg: &IdentifyConfig,
    integrator: &IntegratorConfig,
) -> Result<ControlOutcome<T>> {
    let sim = Simulation::new(g, params, &scenario.init, &scenario.schedule, integrator, false)?;
    control_from_checkpoint(sim, g, plan, cfg, horizon)
}

/// Template for the multiple-infection control experiment: random sources at
/// `t = 1`, and at each stage trigger a batch of fresh nodes whose
/// transmission rate rises to `event_beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StagedScenario {
    pub sources: usize,
    pub initial_fraction: f64,
    pub nodes_per_event: usize,
    pub event_beta: f64,
    /// Stage triggers as fractions of the uncontrolled peak step.
    pub stage_fractions: Vec<f64>,
    pub stage_percents: Vec<f64>,
    pub t_c: usize,
    pub horizon: usize,
}

impl Default for StagedScenario {
    fn default() -> Self {
        StagedScenario {
            sources: 5,
            initial_fraction: 0.002,
            nodes_per_event: 5,
            event_beta: 0.6,
            stage_fractions: vec![0.3, 0.6, 0.9],
            stage_percents: vec![5.0, 10.0, 15.0],
            t_c: 10,
            horizon: 1000,
        }
    }
}

impl StagedScenario {
    fn spec(&self, event_times: Vec<f64>) -> ScenarioSpec {
        ScenarioSpec {
            kind: ScenarioKind::MultipleInfections {
                sources: self.sources,
                event_times,
                nodes_per_event: self.nodes_per_event,
                beta: self.event_beta,
            },
            initial_fraction: self.initial_fraction,
            horizon: self.horizon,
            sources: None,
        }
    }
}

/// A fully drawn control experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTrial<T> {
    pub spec: ScenarioSpec,
    pub scenario: Scenario<T>,
    pub plan: InterventionPlan,
    /// Peak step of the run without events or control.
    pub peak: usize,
}

/// Draw sources, locate the uncontrolled peak `T` from a run without the
/// stage events, then place events and interventions at `T_n`.
pub fn prepare_trial<T: Real>(
    g: &Graph<T>,
    params: &SirParams<T>,
    template: &StagedScenario,
    r: usize,
    integrator: &IntegratorConfig,
    seed: u64,
) -> Result<PreparedTrial<T>> {
    let base = make_scenario(&template.spec(vec![]), g, seed)?;
    let mut sim = Simulation::new(g, params, &base.init, &[], integrator, false)?;
    sim.run_to_step(template.horizon)?;
    let peak = peak_time(sim.infection())?;
    let plan = InterventionPlan::from_peak(peak, &template.stage_fractions, &template.stage_percents, template.t_c, r)?;
    plan.validate(template.horizon, r)?;
    let event_times = plan.stages.iter().map(|s| sim.grid_time(s.time)).collect();
    let spec = template.spec(event_times);
    let scenario = make_scenario(&spec, g, seed)?;
    debug_assert_eq!(scenario.sources, base.sources);
    Ok(PreparedTrial { spec, scenario, plan, peak })
}
