use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tlvnet_core::epidemic::{h1n1_config, make_scenario, Simulation};
use tlvnet_core::graph::Position;
use tlvnet_core::influence::{
    alpha_sweep, identify, identify_online, peak_time, prepare_trial, staged_control, InterventionPlan, Stage,
    Strategy, TrialSummary,
};
use tlvnet_core::spectral::eigendecompose;
use tlvnet_core::Graph64;

use crate::config::PipelineConfig;
use crate::error::CliResult;
use crate::ingest::{
    build_geo_graph, cases_csv, dates_csv, ingest_cases, normalize_signal, read_regions, regions_csv, Repair,
};
use crate::io::{self, fmt_f64, write_atomic, RunManifest, Table};
use crate::report::report_tables;

#[derive(Debug, Parser)]
#[command(name = "tlvnet", version, about = "Temporal local variation analysis of epidemic graph signals")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML pipeline configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate, check or convert graphs.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Simulate the configured scenario and write the run record.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Also write all three compartments to sir.csv.
        #[arg(long)]
        full: bool,
    },
    /// Rank influential nodes in a simulated or ingested dataset.
    Identify {
        /// Directory with edges.csv, infection.csv and optionally nodes.csv.
        #[arg(long)]
        input: PathBuf,
        /// Output directory; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Single 1-based step; every step from r onward when omitted.
        #[arg(long)]
        time: Option<usize>,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
    },
    /// Run staged isolation control against the uncontrolled baseline.
    Control {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
    },
    /// Monte Carlo sweep of TLV control over the alpha grid.
    Sweep {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Turn regional case counts into a graph and a normalized signal.
    Ingest {
        #[arg(long)]
        regions: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use daily new cases instead of cumulative counts.
        #[arg(long)]
        daily: bool,
        /// Clamp decreasing cumulative counts instead of failing.
        #[arg(long)]
        repair: bool,
    },
    /// Emit variation and plot-ready CSVs for a dataset.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Build the configured graph.
    Generate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an edge list (and node table) and print a summary.
    Validate {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        nodes: Option<PathBuf>,
    },
    /// Rewrite a graph in canonical CSV or as JSON.
    Convert {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Csv)]
        format: GraphFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Csv,
    Json,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Strategy::ALL.iter().map(|s| s.name()).collect();
        format!("unknown strategy `{s}` (expected one of {})", names.join(", "))
    })
}

fn load_config(common: &Common) -> CliResult<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Graph(cmd) => graph(&cfg, cmd),
        Command::Simulate { out, full } => simulate(&cfg, &out, full),
        Command::Identify { input, out, time, strategy } => {
            let out = out.unwrap_or_else(|| input.clone());
            identify_cmd(&cfg, &input, &out, time, strategy)
        }
        Command::Control { out, strategy } => control(&cfg, &out, strategy),
        Command::Sweep { out, trials } => sweep(&cfg, &out, trials),
        Command::Ingest { regions, cases, out, daily, repair } => ingest(&cfg, &regions, &cases, &out, daily, repair),
        Command::Report { input, out } => {
            let out = out.unwrap_or_else(|| input.clone());
            report(&cfg, &input, &out)
        }
    }
}

#[derive(Serialize)]
struct GraphJson<'a> {
    nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    labels: Option<&'a [String]>,
    positions: Option<&'a [Position]>,
}

fn graph(cfg: &PipelineConfig, cmd: GraphCommand) -> CliResult<()> {
    match cmd {
        GraphCommand::Generate { out } => {
            let g = cfg.graph.build(cfg.seed)?;
            summarize(&g);
            announce(&io::write_graph(&out, &g)?);
        }
        GraphCommand::Validate { edges, nodes } => {
            let g = io::read_graph(&edges, nodes.as_deref())?;
            summarize(&g);
        }
        GraphCommand::Convert { edges, nodes, out, format } => {
            let g = io::read_graph(&edges, nodes.as_deref())?;
            match format {
                GraphFormat::Csv => announce(&io::write_graph(&out, &g)?),
                GraphFormat::Json => {
                    let path = out.join("graph.json");
                    io::write_json(
                        &path,
                        &GraphJson {
                            nodes: g.node_count(),
                            edges: g.edges().collect(),
                            labels: g.labels(),
                            positions: g.positions(),
                        },
                    )?;
                    announce(&[path]);
                }
            }
        }
    }
    Ok(())
}

fn summarize(g: &Graph64) {
    let degrees = g.degrees();
    let isolated = (0..g.node_count()).filter(|&i| degrees.is_isolated(i)).count();
    println!(
        "nodes {} edges {} connected {} isolated {} hash {}",
        g.node_count(),
        g.edge_count(),
        g.is_connected(),
        isolated,
        io::graph_hash(g)
    );
}

fn simulate(cfg: &PipelineConfig, out: &Path, full: bool) -> CliResult<()> {
    let g = cfg.graph.build(cfg.seed)?;
    let n = g.node_count();
    let (params, spec) = match &cfg.h1n1 {
        Some(h) => h1n1_config(&g, h)?,
        None => (cfg.sir.params(n)?, cfg.scenario.clone()),
    };
    let scenario = make_scenario(&spec, &g, cfg.scenario_seed())?;
    let mut sim = Simulation::new(&g, &params, &scenario.init, &scenario.schedule, &cfg.integrator, full)?;
    sim.run_to_step(spec.horizon)?;
    let record = sim.into_record(cfg.seed);

    let mut written = io::write_graph(out, &g)?;
    let path = out.join(io::INFECTION);
    write_atomic(&path, &io::series_csv(&record.series))?;
    written.push(path);
    if let Some(history) = &record.full_state {
        let path = out.join(io::SIR);
        write_atomic(&path, &io::sir_csv(&record.series, history))?;
        written.push(path);
    }
    let manifest = RunManifest {
        graph_hash: io::graph_hash(&g),
        nodes: n,
        horizon: spec.horizon,
        seed: cfg.seed,
        scenario_seed: cfg.scenario_seed(),
        params: record.params,
        scenario: spec,
        schedule: record.schedule,
        sources: scenario.sources.clone(),
        integrator: record.integrator,
    };
    let path = out.join(io::RUN);
    io::write_json(&path, &manifest)?;
    written.push(path);
    println!("sources {:?} peak step {}", scenario.sources, peak_time(&record.series)?);
    announce(&written);
    Ok(())
}

fn identify_cmd(
    cfg: &PipelineConfig,
    input: &Path,
    out: &Path,
    time: Option<usize>,
    strategy: Option<Strategy>,
) -> CliResult<()> {
    let (g, x) = io::read_dataset(input)?;
    let icfg = strategy.map_or_else(|| cfg.identify.clone(), |s| cfg.identify.with_strategy(s));
    icfg.validate()?;
    let spec = if icfg.strategy.needs_spectrum() { Some(eigendecompose(&g.laplacian())?) } else { None };
    let sets = match time {
        Some(t) => vec![identify(&g, &x, t, &icfg, spec.as_ref())?],
        None => identify_online(&g, &x, &icfg, spec.as_ref())?,
    };
    let mut table = io::influential_table();
    for set in &sets {
        io::influential_rows(&mut table, set);
    }
    let path = out.join(io::INFLUENTIAL);
    table.save(&path)?;
    announce(&[path]);
    Ok(())
}

#[derive(Serialize)]
struct StageSummary {
    stage: usize,
    trigger: usize,
    action_time: usize,
    p: f64,
    nodes: Vec<usize>,
    repeated: usize,
}

#[derive(Serialize)]
struct ControlReport {
    strategy: Strategy,
    graph_hash: String,
    seed: u64,
    scenario_seed: u64,
    /// Uncontrolled peak step used to place the stages, when derived.
    peak: Option<usize>,
    sources: Vec<usize>,
    plan: InterventionPlan,
    stages: Vec<StageSummary>,
    isolated: Vec<usize>,
    final_cumulative: f64,
    baseline_final_cumulative: f64,
}

fn curve_rows(t: &mut Table, method: &str, curve: &[f64]) {
    for (k, v) in curve.iter().enumerate() {
        t.row([method.to_string(), (k + 1).to_string(), fmt_f64(*v)]);
    }
}

fn control(cfg: &PipelineConfig, out: &Path, strategy: Option<Strategy>) -> CliResult<()> {
    let g = cfg.graph.build(cfg.seed)?;
    let params = cfg.sir.params(g.node_count())?;
    let icfg = strategy.map_or_else(|| cfg.identify.clone(), |s| cfg.identify.with_strategy(s));
    icfg.validate()?;
    let (scenario, plan, horizon, peak) = match &cfg.control.plan {
        Some(plan) => (
            make_scenario(&cfg.scenario, &g, cfg.scenario_seed())?,
            plan.clone(),
            cfg.scenario.horizon,
            None,
        ),
        None => {
            let template = &cfg.control.template;
            let p = prepare_trial(&g, &params, template, icfg.r, &cfg.integrator, cfg.scenario_seed())?;
            (p.scenario, p.plan, template.horizon, Some(p.peak))
        }
    };
    let outcome = staged_control(&g, &params, &scenario, horizon, &plan, &icfg, &cfg.integrator)?;
    let none_plan = InterventionPlan { stages: Vec::<Stage>::new(), t_c: plan.t_c };
    let baseline = staged_control(&g, &params, &scenario, horizon, &none_plan, &icfg, &cfg.integrator)?;

    let mut influential = io::influential_table();
    for s in &outcome.stages {
        io::influential_rows(&mut influential, &s.set);
    }
    let mut curves = Table::new(&["method", "time", "mean_cumulative"]);
    curve_rows(&mut curves, "none", &baseline.accumulated_curve());
    curve_rows(&mut curves, icfg.strategy.name(), &outcome.accumulated_curve());

    let report = ControlReport {
        strategy: icfg.strategy,
        graph_hash: io::graph_hash(&g),
        seed: cfg.seed,
        scenario_seed: cfg.scenario_seed(),
        peak,
        sources: scenario.sources.clone(),
        plan: plan.clone(),
        stages: outcome
            .stages
            .iter()
            .map(|s| StageSummary {
                stage: s.stage,
                trigger: s.trigger,
                action_time: s.action_time,
                p: s.p,
                nodes: s.set.nodes.clone(),
                repeated: s.repeated,
            })
            .collect(),
        isolated: outcome.isolated.clone(),
        final_cumulative: outcome.final_cumulative,
        baseline_final_cumulative: baseline.final_cumulative,
    };
    let paths = [
        out.join("control_outcome.json"),
        out.join(io::INFLUENTIAL),
        out.join(io::INFECTION),
        out.join("method_curves.csv"),
    ];
    io::write_json(&paths[0], &report)?;
    influential.save(&paths[1])?;
    write_atomic(&paths[2], &io::series_csv(&outcome.controlled_series))?;
    curves.save(&paths[3])?;
    println!(
        "{} final cumulative {} (no control {})",
        icfg.strategy,
        fmt_f64(outcome.final_cumulative),
        fmt_f64(baseline.final_cumulative)
    );
    announce(&paths);
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    graph_hash: String,
    seed: u64,
    alphas: &'a [f64],
    /// Mean final accumulated infection per method.
    mean_final: Vec<(String, f64)>,
    /// Number of trials whose best alpha is each grid value.
    best_alpha_counts: Vec<(f64, usize)>,
    share_best_alpha_ge_0_6: f64,
    trials: &'a [TrialSummary],
}

fn sweep(cfg: &PipelineConfig, out: &Path, trials: Option<usize>) -> CliResult<()> {
    let g = cfg.graph.build(cfg.seed)?;
    let params = cfg.sir.params(g.node_count())?;
    let mut scfg = cfg.sweep.clone();
    if let Some(t) = trials {
        scfg.trials = t;
    }
    let res = alpha_sweep(&g, &params, &scfg, &cfg.integrator, cfg.seed)?;

    let mut sweep_table = Table::new(&["trial", "alpha", "final_cumulative"]);
    for t in &res.trials {
        for (a, f) in res.alphas.iter().zip(&t.alpha_finals) {
            sweep_table.row([t.trial.to_string(), fmt_f64(*a), fmt_f64(*f)]);
        }
    }
    let mut curves = Table::new(&["method", "time", "mean_cumulative"]);
    for c in &res.curves {
        curve_rows(&mut curves, &c.method, &c.mean);
    }
    let mean_final: Vec<(String, f64)> = scfg
        .curve_names()
        .into_iter()
        .map(|m| (m.to_string(), res.mean_final(m).expect("every trial reports every curve")))
        .collect();
    let summary = SweepSummary {
        graph_hash: io::graph_hash(&g),
        seed: cfg.seed,
        alphas: &res.alphas,
        best_alpha_counts: res
            .alphas
            .iter()
            .map(|&a| (a, res.trials.iter().filter(|t| t.best_alpha == a).count()))
            .collect(),
        share_best_alpha_ge_0_6: res.best_alpha_share(0.6),
        mean_final: mean_final.clone(),
        trials: &res.trials,
    };
    let paths = [out.join("sweep.csv"), out.join("method_curves.csv"), out.join("sweep_summary.json")];
    sweep_table.save(&paths[0])?;
    curves.save(&paths[1])?;
    io::write_json(&paths[2], &summary)?;
    for (m, v) in &mean_final {
        println!("{m:>5} mean final cumulative {}", fmt_f64(*v));
    }
    println!("share of trials with best alpha >= 0.6: {}", fmt_f64(res.best_alpha_share(0.6)));
    announce(&paths);
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    regions: usize,
    days: usize,
    first_date: String,
    last_date: String,
    edges: usize,
    daily: bool,
    threshold_km: f64,
    sigma_km: f64,
    repairs: Vec<Repair>,
}

fn ingest(cfg: &PipelineConfig, regions: &Path, cases: &Path, out: &Path, daily: bool, repair: bool) -> CliResult<()> {
    let icfg = &cfg.ingest;
    let (daily, repair) = (daily || icfg.daily, repair || icfg.repair);
    let (table, repairs) = ingest_cases(read_regions(regions)?, cases, repair)?;
    for r in &repairs {
        eprintln!(
            "repaired line {}: `{}` on {} reported {}, kept {}",
            r.line, r.region, r.date, r.reported, r.kept
        );
    }
    let g = build_geo_graph(&table.regions, icfg)?;
    let x = normalize_signal(&table, daily);

    let mut written = io::write_graph(out, &g)?;
    for (name, bytes) in [
        (io::INFECTION, io::series_csv(&x)),
        ("dates.csv", dates_csv(&table)),
        ("region_table.csv", regions_csv(&table.regions)),
        ("case_table.csv", cases_csv(&table)),
    ] {
        let path = out.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    let fmt_date = |d: &chrono::NaiveDate| d.format("%Y-%m-%d").to_string();
    let summary = IngestSummary {
        regions: table.regions.len(),
        days: table.dates.len(),
        first_date: fmt_date(&table.dates[0]),
        last_date: fmt_date(table.dates.last().expect("nonempty dates")),
        edges: g.edge_count(),
        daily,
        threshold_km: icfg.threshold_km,
        sigma_km: icfg.sigma_km(),
        repairs,
    };
    let path = out.join("ingest.json");
    io::write_json(&path, &summary)?;
    written.push(path);
    println!("N = {} regions, {} days, {} edges", summary.regions, summary.days, summary.edges);
    announce(&written);
    Ok(())
}

fn report(cfg: &PipelineConfig, input: &Path, out: &Path) -> CliResult<()> {
    let (g, x) = io::read_dataset(input)?;
    let tables = report_tables(&g, &x, &cfg.report, &cfg.identify.sgwt)?;
    let mut paths = vec![out.join("variation.csv"), out.join("plot_field.csv")];
    tables.variation.save(&paths[0])?;
    tables.plot.save(&paths[1])?;
    if let Some(t) = tables.sgwt {
        let p = out.join("sgwt.csv");
        t.save(&p)?;
        paths.push(p);
    }
    announce(&paths);
    Ok(())
}
