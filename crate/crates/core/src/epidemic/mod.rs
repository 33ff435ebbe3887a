//! Metapopulation SIR dynamics on a graph.
//!
//! Each node holds normalized compartments `(S, I, R)`. Locally they follow
//! `S' = -beta S I`, `I' = beta S I - gamma I`, `R' = gamma I`; between nodes
//! every compartment diffuses as `(kappa / d_i) sum_j W_ij (Y_j - Y_i)`.

mod integrator;
mod scenario;

pub use integrator::{rk4_fixed, AdaptiveRk4, IntegratorConfig, OdeSystem, StepStats, NEG_CLAMP};
pub use scenario::{
    airport_like_network, h1n1_config, make_scenario, BetaEvent, H1n1Config, Scenario, ScenarioKind,
    ScenarioSpec, SuperSpreaderConfig, AIRPORT_NODES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;
use crate::signal::SignalSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirParams<T> {
    pub beta: Vec<T>,
    pub gamma: Vec<T>,
    pub kappa: T,
}

impl<T: Real> SirParams<T> {
    pub fn uniform(n: usize, beta: T, gamma: T, kappa: T) -> Self {
        SirParams {
            beta: vec![beta; n],
            gamma: vec![gamma; n],
            kappa,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.beta.len() != n {
            return Err(Error::dims(n, self.beta.len()));
        }
        if self.gamma.len() != n {
            return Err(Error::dims(n, self.gamma.len()));
        }
        let ok = |v: T| v.is_finite() && v >= T::zero();
        if !self.beta.iter().chain(&self.gamma).all(|&v| ok(v)) || !ok(self.kappa) {
            return Err(Error::config("beta, gamma and kappa must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Per-node susceptible, infected and recovered fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicState<T> {
    pub s: Vec<T>,
    pub i: Vec<T>,
    pub r: Vec<T>,
}

impl<T: Real> EpidemicState<T> {
    /// Fully susceptible population.
    pub fn susceptible(n: usize) -> Self {
        EpidemicState {
            s: vec![T::one(); n],
            i: vec![T::zero(); n],
            r: vec![T::zero(); n],
        }
    }

    /// Seed infection fraction `fraction` at `nodes`, keeping `S + I = 1` there.
    pub fn seeded(n: usize, nodes: &[usize], fraction: T) -> Self {
        let mut st = Self::susceptible(n);
        for &v in nodes {
            st.i[v] = fraction;
            st.s[v] = T::one() - fraction;
        }
        st
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for comp in [&self.s, &self.i, &self.r] {
            if comp.len() != n {
                return Err(Error::dims(n, comp.len()));
            }
            if comp.iter().any(|&v| !(v >= T::zero() && v <= T::one())) {
                return Err(Error::argument("compartment fractions must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Flat `[S.., I.., R..]` layout used by the integrator.
    pub fn to_flat(&self) -> Vec<T> {
        let mut y = Vec::with_capacity(3 * self.len());
        y.extend_from_slice(&self.s);
        y.extend_from_slice(&self.i);
        y.extend_from_slice(&self.r);
        y
    }

    pub fn from_flat(y: &[T]) -> Self {
        let n = y.len() / 3;
        EpidemicState {
            s: y[..n].to_vec(),
            i: y[n..2 * n].to_vec(),
            r: y[2 * n..].to_vec(),
        }
    }
}

/// Single-location SIR derivative in absolute counts.
pub fn sir_rhs_local<T: Real>(state: (T, T, T), beta: T, gamma: T, population: T) -> (T, T, T) {
    let (s, i, _r) = state;
    let infection = beta * s * i / population;
    let recovery = gamma * i;
    (-infection, infection - recovery, recovery)
}

/// The coupled network system with precomputed `W_ij / d_i`.
#[derive(Debug, Clone)]
pub struct NetworkSir<T> {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    /// `W_ij / d_i`; isolated nodes have no entries and so no diffusion.
    transition: Vec<T>,
    beta: Vec<T>,
    gamma: Vec<T>,
    kappa: T,
}

impl<T: Real> NetworkSir<T> {
    pub fn new(g: &Graph<T>, params: &SirParams<T>) -> Result<Self> {
        let n = g.node_count();
        params.validate(n)?;
        let mut sys = NetworkSir {
            n,
            row_start: Vec::new(),
            cols: Vec::new(),
            transition: Vec::new(),
            beta: params.beta.clone(),
            gamma: params.gamma.clone(),
            kappa: params.kappa,
        };
        sys.set_graph(g)?;
        Ok(sys)
    }

    pub fn set_graph(&mut self, g: &Graph<T>) -> Result<()> {
        if g.node_count() != self.n {
            return Err(Error::dims(self.n, g.node_count()));
        }
        self.row_start.clear();
        self.cols.clear();
        self.transition.clear();
        for i in 0..self.n {
            self.row_start.push(self.cols.len());
            let d = g.degree_of(i);
            if d > T::zero() {
                for &(j, w) in g.neighbors(i) {
                    self.cols.push(j);
                    self.transition.push(w / d);
                }
            }
        }
        self.row_start.push(self.cols.len());
        Ok(())
    }

    pub fn set_beta(&mut self, node: usize, beta: T) {
        self.beta[node] = beta;
    }

    pub fn params(&self) -> SirParams<T> {
        SirParams {
            beta: self.beta.clone(),
            gamma: self.gamma.clone(),
            kappa: self.kappa,
        }
    }
}

impl<T: Real> OdeSystem<T> for NetworkSir<T> {
    fn dim(&self) -> usize {
        3 * self.n
    }

    fn rhs(&self, _t: f64, y: &[T], dy: &mut [T]) {
        let n = self.n;
        let (s, rest) = y.split_at(n);
        let (inf, rec) = rest.split_at(n);
        let (ds, drest) = dy.split_at_mut(n);
        let (di, dr) = drest.split_at_mut(n);
        for k in 0..n {
            let (mut fs, mut fi, mut fr) = (T::zero(), T::zero(), T::zero());
            for e in self.row_start[k]..self.row_start[k + 1] {
                let (j, p) = (self.cols[e], self.transition[e]);
                fs += p * (s[j] - s[k]);
                fi += p * (inf[j] - inf[k]);
                fr += p * (rec[j] - rec[k]);
            }
            let infection = self.beta[k] * s[k] * inf[k];
            let recovery = self.gamma[k] * inf[k];
            ds[k] = -infection + self.kappa * fs;
            di[k] = infection - recovery + self.kappa * fi;
            dr[k] = recovery + self.kappa * fr;
        }
    }
}

/// Derivative of the network SIR system at `state`.
pub fn network_rhs<T: Real>(state: &EpidemicState<T>, params: &SirParams<T>, g: &Graph<T>) -> Result<EpidemicState<T>> {
    let n = g.node_count();
    if state.len() != n {
        return Err(Error::dims(n, state.len()));
    }
    let sys = NetworkSir::new(g, params)?;
    let y = state.to_flat();
    let mut dy = vec![T::zero(); y.len()];
    sys.rhs(0.0, &y, &mut dy);
    Ok(EpidemicState::from_flat(&dy))
}

/// Susceptible and recovered histories alongside the infection signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirHistory<T> {
    pub s: SignalSeries<T>,
    pub r: SignalSeries<T>,
}

/// Persisted result of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord<T> {
    /// Infection fractions, the graph signal `X`.
    pub series: SignalSeries<T>,
    pub full_state: Option<SirHistory<T>>,
    /// Parameters at the start of the run (before any scheduled events).
    pub params: SirParams<T>,
    pub schedule: Vec<BetaEvent<T>>,
    pub scenario: Option<ScenarioSpec>,
    pub sources: Vec<usize>,
    pub graph_hash: Option<String>,
    pub seed: u64,
    pub integrator: IntegratorConfig,
}

/// Resumable simulation recording infection on the output grid
/// `t_k = 1 + (k - 1) * output_dt`, starting from the initial state at `t = 1`.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    system: NetworkSir<T>,
    stepper: AdaptiveRk4,
    initial_params: SirParams<T>,
    schedule: Vec<BetaEvent<T>>,
    next_event: usize,
    t: f64,
    y: Vec<T>,
    infection: SignalSeries<T>,
    history: Option<SirHistory<T>>,
}

impl<T: Real> Simulation<T> {
    pub fn new(
        g: &Graph<T>,
        params: &SirParams<T>,
        init: &EpidemicState<T>,
        schedule: &[BetaEvent<T>],
        cfg: &IntegratorConfig,
        record_full: bool,
    ) -> Result<Self> {
        let n = g.node_count();
        init.validate(n)?;
        for ev in schedule {
            ev.validate(n)?;
        }
        let mut schedule = schedule.to_vec();
        schedule.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite event times"));
        let history = record_full.then(|| SirHistory {
            s: SignalSeries::new(n),
            r: SignalSeries::new(n),
        });
        let mut sim = Simulation {
            system: NetworkSir::new(g, params)?,
            stepper: AdaptiveRk4::new(cfg.clone())?,
            initial_params: params.clone(),
            schedule,
            next_event: 0,
            t: 1.0,
            y: init.to_flat(),
            infection: SignalSeries::new(n),
            history,
        };
        sim.apply_due_events();
        sim.record()?;
        Ok(sim)
    }

    fn n(&self) -> usize {
        self.infection.nodes()
    }

    fn apply_due_events(&mut self) {
        while let Some(ev) = self.schedule.get(self.next_event) {
            if ev.time > self.t {
                break;
            }
            for &v in &ev.nodes {
                self.system.set_beta(v, ev.beta);
            }
            self.next_event += 1;
        }
    }

    fn record(&mut self) -> Result<()> {
        let n = self.n();
        self.infection.push_frame(self.t, &self.y[n..2 * n])?;
        if let Some(h) = &mut self.history {
            h.s.push_frame(self.t, &self.y[..n])?;
            h.r.push_frame(self.t, &self.y[2 * n..])?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Number of recorded output steps so far.
    pub fn recorded_steps(&self) -> usize {
        self.infection.steps()
    }

    pub fn grid_time(&self, step: usize) -> f64 {
        1.0 + (step - 1) as f64 * self.stepper.config().output_dt
    }

    /// Integrate until `step` output states are recorded (1-based).
    pub fn run_to_step(&mut self, step: usize) -> Result<()> {
        while self.recorded_steps() < step {
            let target = self.grid_time(self.recorded_steps() + 1);
            while self.t < target {
                let stop = match self.schedule.get(self.next_event) {
                    Some(ev) if ev.time < target => ev.time,
                    _ => target,
                };
                self.stepper.advance(&self.system, &mut self.t, &mut self.y, stop, true)?;
                self.apply_due_events();
            }
            self.record()?;
        }
        Ok(())
    }

    /// Replace the coupling topology from the current time onward.
    pub fn set_graph(&mut self, g: &Graph<T>) -> Result<()> {
        self.system.set_graph(g)
    }

    pub fn infection(&self) -> &SignalSeries<T> {
        &self.infection
    }

    pub fn state(&self) -> EpidemicState<T> {
        EpidemicState::from_flat(&self.y)
    }

    pub fn stats(&self) -> StepStats {
        self.stepper.stats()
    }

    pub fn into_record(self, seed: u64) -> RunRecord<T> {
        RunRecord {
            series: self.infection,
            full_state: self.history,
            params: self.initial_params,
            schedule: self.schedule,
            scenario: None,
            sources: Vec::new(),
            graph_hash: None,
            seed,
            integrator: self.stepper.config().clone(),
        }
    }
}

/// Run the network SIR model for `horizon` recorded steps.
pub fn integrate<T: Real>(
    g: &Graph<T>,
    params: &SirParams<T>,
    init: &EpidemicState<T>,
    cfg: &IntegratorConfig,
    horizon: usize,
    schedule: &[BetaEvent<T>],
) -> Result<RunRecord<T>> {
    if horizon == 0 {
        return Err(Error::config("horizon must be at least 1 step"));
    }
    let mut sim = Simulation::new(g, params, init, schedule, cfg, true)?;
    sim.run_to_step(horizon)?;
    Ok(sim.into_record(0))
}
