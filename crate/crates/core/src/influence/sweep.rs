use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::control::{control_from_checkpoint, prepare_trial, InterventionPlan, StagedScenario};
use super::{IdentifyConfig, Strategy};
use crate::epidemic::{IntegratorConfig, Simulation, SirParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::scalar::Real;

/// `{0:0.02:0.3} ∪ {0.4:0.1:0.9} ∪ {0.9:0.02:1}`, ascending and deduplicated.
pub fn default_alpha_grid() -> Vec<f64> {
    let range = |start: f64, step: f64, end: f64| {
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(move |k| ((start + k as f64 * step) * 1e6).round() / 1e6)
    };
    let mut grid: Vec<f64> = range(0.0, 0.02, 0.3)
        .chain(range(0.4, 0.1, 0.9))
        .chain(range(0.9, 0.02, 1.0))
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub trials: usize,
    pub alphas: Vec<f64>,
    /// Baselines compared against TLV.
    pub methods: Vec<Strategy>,
    /// Window, normalization and filter settings shared by all strategies.
    pub identify: IdentifyConfig,
    pub scenario: StagedScenario,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            trials: 50,
            alphas: default_alpha_grid(),
            methods: vec![Strategy::Max, Strategy::Hpf, Strategy::Lv, Strategy::Bc, Strategy::Cc],
            identify: IdentifyConfig::default(),
            scenario: StagedScenario::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("sweep needs at least one trial"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::config("alpha grid must be nonempty with values in [0, 1]"));
        }
        if self.methods.contains(&Strategy::Tlv) {
            return Err(Error::config("TLV is swept over the alpha grid, not listed as a method"));
        }
        IdentifyConfig { strategy: Strategy::Tlv, ..self.identify.clone() }.validate()
    }

    /// Curve labels in output order: `none`, then the strategies.
    pub fn curve_names(&self) -> Vec<&'static str> {
        let mut names = vec!["none"];
        names.extend(
            Strategy::ALL
                .iter()
                .filter(|s| **s == Strategy::Tlv || self.methods.contains(s))
                .map(|s| s.name()),
        );
        names
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub peak: usize,
    pub sources: Vec<usize>,
    /// Final accumulated infection per grid alpha, TLV control.
    pub alpha_finals: Vec<f64>,
    /// Smallest-final alpha; ties go to the first in grid order.
    pub best_alpha: f64,
    /// Final accumulated infection per curve name (TLV at best alpha).
    pub method_finals: Vec<(String, f64)>,
}

impl TrialSummary {
    pub fn final_of(&self, method: &str) -> Option<f64> {
        self.method_finals.iter().find(|(m, _)| m == method).map(|&(_, v)| v)
    }
}

/// Mean over trials of the running accumulated infection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: String,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub alphas: Vec<f64>,
    pub trials: Vec<TrialSummary>,
    pub curves: Vec<MethodCurve>,
}

impl SweepResult {
    /// Mean final accumulated infection of `method` over trials.
    pub fn mean_final(&self, method: &str) -> Option<f64> {
        let vals: Option<Vec<f64>> = self.trials.iter().map(|t| t.final_of(method)).collect();
        vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Share of trials whose best alpha is at least `threshold`.
    pub fn best_alpha_share(&self, threshold: f64) -> f64 {
        let hits = self.trials.iter().filter(|t| t.best_alpha >= threshold).count();
        hits as f64 / self.trials.len() as f64
    }
}

/// Seed of trial `trial` under `master`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    rng::trial_stream(master, trial as u64).next_u64()
}

struct TrialOutput {
    summary: TrialSummary,
    curves: Vec<Vec<f64>>,
}

fn run_trial<T: Real>(
    g: &Graph<T>,
    params: &SirParams<T>,
    cfg: &SweepConfig,
    integrator: &IntegratorConfig,
    master_seed: u64,
    trial: usize,
) -> Result<TrialOutput> {
    let seed = trial_seed(master_seed, trial);
    let horizon = cfg.scenario.horizon;
    let prepared = prepare_trial(g, params, &cfg.scenario, cfg.identify.r, integrator, seed)?;
    let mut checkpoint =
        Simulation::new(g, params, &prepared.scenario.init, &prepared.scenario.schedule, integrator, false)?;
    if let Some(&first) = prepared.plan.action_times().first() {
        checkpoint.run_to_step(first)?;
    }
    let run = |cfg: &IdentifyConfig, plan: &InterventionPlan| {
        control_from_checkpoint(checkpoint.clone(), g, plan, cfg, horizon)
    };

    let none = run(&cfg.identify, &InterventionPlan { stages: vec![], t_c: prepared.plan.t_c })?;
    let mut alpha_finals = Vec::with_capacity(cfg.alphas.len());
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for &alpha in &cfg.alphas {
        let tlv_cfg = IdentifyConfig { strategy: Strategy::Tlv, alpha, ..cfg.identify.clone() };
        let out = run(&tlv_cfg, &prepared.plan)?;
        let fin = out.final_cumulative.as_f64();
        alpha_finals.push(fin);
        if best.as_ref().is_none_or(|b| fin < b.1) {
            best = Some((alpha, fin, out.accumulated_curve()));
        }
    }
    let (best_alpha, best_final, best_curve) = best.expect("nonempty alpha grid");

    let mut finals = vec![("none".to_string(), none.final_cumulative.as_f64())];
    let mut curves = vec![none.accumulated_curve()];
    for name in cfg.curve_names().into_iter().skip(1) {
        let strategy = Strategy::from_name(name).expect("known strategy");
        if strategy == Strategy::Tlv {
            finals.push((name.to_string(), best_final));
            curves.push(best_curve.clone());
        } else {
            let out = run(&cfg.identify.with_strategy(strategy), &prepared.plan)?;
            finals.push((name.to_string(), out.final_cumulative.as_f64()));
            curves.push(out.accumulated_curve());
        }
    }
    Ok(TrialOutput {
        summary: TrialSummary {
            trial,
            seed,
            peak: prepared.peak,
            sources: prepared.scenario.sources,
            alpha_finals,
            best_alpha,
            method_finals: finals,
        },
        curves,
    })
}

/// Monte Carlo sweep of TLV control over the alpha grid, with the baseline
/// strategies and no control run on the same trials. Trial `k` draws its
/// scenario from [`trial_seed`]`(master_seed, k)`. Trials run in parallel;
/// results are ordered by trial index.
pub fn alpha_sweep<T: Real>(
    g: &Graph<T>,
    params: &SirParams<T>,
    cfg: &SweepConfig,
    integrator: &IntegratorConfig,
    master_seed: u64,
) -> Result<SweepResult> {
    cfg.validate()?;
    let outputs: Vec<TrialOutput> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(g, params, cfg, integrator, master_seed, trial))
        .collect::<Result<_>>()?;
    let names = cfg.curve_names();
    let curves = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let len = outputs[0].curves[k].len();
            let mut mean = vec![0.0; len];
            for out in &outputs {
                for (m, v) in mean.iter_mut().zip(&out.curves[k]) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= outputs.len() as f64;
            }
            MethodCurve { method: name.to_string(), mean }
        })
        .collect();
    Ok(SweepResult {
        alphas: cfg.alphas.clone(),
        trials: outputs.into_iter().map(|o| o.summary).collect(),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_enumerates_the_three_ranges() {
        let grid = default_alpha_grid();
        assert_eq!(grid.len(), 27);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[15], 0.3);
        assert_eq!(grid[16], 0.4);
        assert_eq!(grid[21], 0.9);
        assert_eq!(grid[22], 0.92);
        assert_eq!(*grid.last().unwrap(), 1.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    fn ring(n: usize) -> Graph<f64> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn tiny_cfg() -> SweepConfig {
        SweepConfig {
            trials: 2,
            alphas: vec![0.5],
            methods: vec![Strategy::Max],
            identify: IdentifyConfig { r: 5, ..Default::default() },
            scenario: StagedScenario { horizon: 200, t_c: 5, ..Default::default() },
        }
    }

    #[test]
    fn single_alpha_is_best() {
        let g = ring(40);
        let params = SirParams::uniform(40, 0.3, 0.1, 0.1);
        let res = alpha_sweep(&g, &params, &tiny_cfg(), &IntegratorConfig::default(), 3).unwrap();
        assert_eq!(res.trials.len(), 2);
        assert!(res.trials.iter().all(|t| t.best_alpha == 0.5));
        assert_eq!(
            res.curves.iter().map(|c| c.method.as_str()).collect::<Vec<_>>(),
            vec!["none", "max", "tlv"]
        );
        for t in &res.trials {
            assert_eq!(t.final_of("tlv"), Some(t.alpha_finals[0]));
        }
        let curve = &res.curves[0].mean;
        assert_eq!(curve.len(), 200);
        assert!((curve[199] - res.mean_final("none").unwrap()).abs() < 1e-9 * curve[199]);
        assert_eq!(res.best_alpha_share(0.6), 0.0);
    }

    #[test]
    fn sweep_is_deterministic() {
        let g = ring(30);
        let params = SirParams::uniform(30, 0.3, 0.1, 0.1);
        let a = alpha_sweep(&g, &params, &tiny_cfg(), &IntegratorConfig::default(), 3).unwrap();
        let b = alpha_sweep(&g, &params, &tiny_cfg(), &IntegratorConfig::default(), 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.trials[0].seed, a.trials[1].seed);
    }

    #[test]
    fn rejects_bad_config() {
        let g = ring(10);
        let params = SirParams::uniform(10, 0.3, 0.1, 0.1);
        let icfg = IntegratorConfig::default();
        for cfg in [
            SweepConfig { trials: 0, ..tiny_cfg() },
            SweepConfig { alphas: vec![], ..tiny_cfg() },
            SweepConfig { alphas: vec![1.2], ..tiny_cfg() },
            SweepConfig { methods: vec![Strategy::Tlv], ..tiny_cfg() },
        ] {
            assert!(alpha_sweep(&g, &params, &cfg, &icfg, 3).is_err());
        }
    }
}
