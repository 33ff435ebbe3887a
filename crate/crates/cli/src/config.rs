//! Declarative pipeline configuration, loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tlvnet_core::epidemic::{airport_like_network, H1n1Config, IntegratorConfig, ScenarioSpec};
use tlvnet_core::graph::{build_distance_graph, build_scale_free_graph, DistanceGraphConfig, ScaleFreeConfig};
use tlvnet_core::influence::{IdentifyConfig, InterventionPlan, StagedScenario, SweepConfig};
use tlvnet_core::variation::Metric;
use tlvnet_core::{Graph64, SirParams64};

use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; `--seed` overrides it.
    pub seed: u64,
    pub graph: GraphSource,
    pub sir: SirSection,
    pub scenario: ScenarioSpec,
    pub integrator: IntegratorConfig,
    pub identify: IdentifyConfig,
    pub control: ControlSection,
    pub sweep: SweepConfig,
    pub ingest: IngestConfig,
    pub report: ReportConfig,
    /// When present, `simulate` takes its parameters and scenario from here.
    pub h1n1: Option<H1n1Config>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    Distance {
        n: usize,
        box_side: f64,
        threshold: f64,
        #[serde(default)]
        sigma2: Option<f64>,
    },
    ScaleFree { n: usize, m: usize },
    Airport {},
    File {
        edges: PathBuf,
        #[serde(default)]
        nodes: Option<PathBuf>,
    },
}

impl Default for GraphSource {
    fn default() -> Self {
        GraphSource::Distance {
            n: 300,
            box_side: 10.0,
            threshold: 1.95,
            sigma2: None,
        }
    }
}

impl GraphSource {
    pub fn build(&self, seed: u64) -> CliResult<Graph64> {
        Ok(match self {
            GraphSource::Distance { n, box_side, threshold, sigma2 } => build_distance_graph(&DistanceGraphConfig {
                n: *n,
                box_side: *box_side,
                threshold: *threshold,
                sigma2: *sigma2,
                seed,
            })?,
            GraphSource::ScaleFree { n, m } => build_scale_free_graph(&ScaleFreeConfig { n: *n, m: *m, seed })?,
            GraphSource::Airport {} => airport_like_network(seed)?,
            GraphSource::File { edges, nodes } => io::read_graph(edges, nodes.as_deref())?,
        })
    }

    fn validate(&self) -> CliResult<()> {
        match self {
            GraphSource::Distance { n, box_side, threshold, sigma2 } => DistanceGraphConfig {
                n: *n,
                box_side: *box_side,
                threshold: *threshold,
                sigma2: *sigma2,
                seed: 0,
            }
            .validate()?,
            GraphSource::ScaleFree { n, m } => ScaleFreeConfig { n: *n, m: *m, seed: 0 }.validate()?,
            GraphSource::Airport {} | GraphSource::File { .. } => {}
        }
        Ok(())
    }
}

/// Uniform SIR rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SirSection {
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl Default for SirSection {
    fn default() -> Self {
        SirSection { beta: 0.3, gamma: 0.1, kappa: 0.1 }
    }
}

impl SirSection {
    pub fn params(&self, n: usize) -> CliResult<SirParams64> {
        let p = SirParams64::uniform(n, self.beta, self.gamma, self.kappa);
        p.validate(n)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    /// Explicit stages, applied to `[scenario]`. Without a plan the stages are
    /// derived from the uncontrolled peak using `template`.
    pub plan: Option<InterventionPlan>,
    pub template: StagedScenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Great-circle distance.
    #[default]
    Haversine,
    /// Equirectangular projection, then Euclidean distance.
    Planar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub threshold_km: f64,
    /// Kernel width in km; defaults to `threshold_km`.
    pub sigma_km: Option<f64>,
    pub distance: DistanceKind,
    /// Use daily new cases instead of cumulative counts.
    pub daily: bool,
    /// Clamp decreasing cumulative counts instead of failing.
    pub repair: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            threshold_km: 100.0,
            sigma_km: None,
            distance: DistanceKind::Haversine,
            daily: false,
            repair: false,
        }
    }
}

impl IngestConfig {
    pub fn sigma_km(&self) -> f64 {
        self.sigma_km.unwrap_or(self.threshold_km)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumWindow {
    pub width: usize,
    pub slide: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub metric: Metric,
    pub alpha: f64,
    /// Window length ending at each reported step.
    pub r: usize,
    /// dB value for entries that are not positive after scaling.
    pub floor_db: f64,
    /// Reported steps (1-based); defaults to the last step.
    pub times: Option<Vec<usize>>,
    /// Also dump wavelet coefficients of each window.
    pub sgwt: bool,
    /// Sum the signal over sliding windows before analysis.
    pub aggregate: Option<SumWindow>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            metric: Metric::TlvNormalized,
            alpha: 0.5,
            r: 10,
            floor_db: -120.0,
            times: None,
            sgwt: false,
            aggregate: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| CliError::input(path, e))?;
        // relative graph paths are taken from the config's directory
        if let GraphSource::File { edges, nodes } = &mut cfg.graph {
            let base = path.parent().unwrap_or(Path::new(""));
            *edges = base.join(&*edges);
            if let Some(n) = nodes {
                *n = base.join(&*n);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialize config: {e}")))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.graph.validate()?;
        let s = &self.sir;
        if ![s.beta, s.gamma, s.kappa].iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(CliError::invalid("sir rates must be finite and non-negative"));
        }
        self.scenario.validate()?;
        self.integrator.validate()?;
        self.identify.validate()?;
        if let Some(plan) = &self.control.plan {
            plan.validate(self.scenario.horizon, self.identify.r)?;
        }
        self.sweep.validate()?;
        let i = &self.ingest;
        if !(i.threshold_km > 0.0 && i.threshold_km.is_finite()) || !(i.sigma_km() > 0.0 && i.sigma_km().is_finite()) {
            return Err(CliError::invalid("ingest threshold and sigma must be positive"));
        }
        let r = &self.report;
        if !(0.0..=1.0).contains(&r.alpha) {
            return Err(CliError::invalid(format!("report alpha {} outside [0, 1]", r.alpha)));
        }
        let min_r = if matches!(r.metric, Metric::LocalVariation) { 1 } else { 2 };
        if r.r < min_r {
            return Err(CliError::invalid(format!("report window r = {} too short for {}", r.r, r.metric.name())));
        }
        if !r.floor_db.is_finite() {
            return Err(CliError::invalid("floor_db must be finite"));
        }
        if let Some(w) = r.aggregate {
            if w.width == 0 || w.slide == 0 {
                return Err(CliError::invalid("aggregate width and slide must be positive"));
            }
        }
        Ok(())
    }

    /// Seed for scenario draws, independent of the graph seed.
    pub fn scenario_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }
}
