use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use tlvnet::config::IngestConfig;
use tlvnet::ingest::{build_geo_graph, cases_csv, haversine_km, ingest_cases, normalize_signal, read_regions, regions_csv};
use tlvnet_core::epidemic::{
    make_scenario, rk4_fixed, EpidemicState, IntegratorConfig, NetworkSir, ScenarioKind, ScenarioSpec, Simulation,
    SirParams,
};
use tlvnet_core::graph::{build_distance_graph, build_scale_free_graph, DistanceGraphConfig, Graph, ScaleFreeConfig};
use tlvnet_core::influence::{
    alpha_sweep, identify, prepare_trial, trial_seed, IdentifyConfig, StagedScenario, Strategy, SweepConfig,
    SweepResult,
};
use tlvnet_core::rng::seeded;
use tlvnet_core::spectral::{eigendecompose, graph_hpf, HpfConfig};
use tlvnet_core::variation::{local_variation, temporal_variation, tlv, tlv_normalized, total_variation};
use tlvnet_core::{Graph64, SignalSeries64};

struct Verdicts(Vec<(usize, bool)>);

impl Verdicts {
    fn record(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        println!("C{id} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.0.push((id, pass));
    }
}

fn random_graph(rng: &mut impl Rng, n: usize) -> Graph64 {
    let density = rng.random_range(0.1..0.9);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((i, j, rng.random_range(0.01..3.0)));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn random_series(rng: &mut impl Rng, n: usize, steps: usize) -> SignalSeries64 {
    let frames: Vec<Vec<f64>> = (0..steps).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    SignalSeries64::from_frames(n, &frames).unwrap()
}

fn distance(n: usize, seed: u64) -> Graph64 {
    build_distance_graph(&DistanceGraphConfig::new(n, 10.0, 1.95, seed)).unwrap()
}

fn scale_free(n: usize, m: usize, seed: u64) -> Graph64 {
    build_scale_free_graph(&ScaleFreeConfig { n, m, seed }).unwrap()
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn variation_identities(v: &mut Verdicts) {
    let start = Instant::now();
    let mut rng = seeded(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=50);
        let g = random_graph(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let sum_lv: f64 = local_variation(&g, &x).unwrap().iter().sum();
        let tv = total_variation(&g, &x).unwrap();
        let edge_tv: f64 = 2.0 * g.edges().map(|(i, j, w)| w * (x[i] - x[j]).powi(2)).sum::<f64>();
        let quad = 2.0 * g.laplacian().quadratic_form(&x).unwrap();
        let scale = tv.abs().max(f64::MIN_POSITIVE);
        worst = worst.max((sum_lv - tv).abs() / scale).max((sum_lv - edge_tv).abs() / scale).max((tv - quad).abs() / scale);
    }
    let secs = start.elapsed().as_secs_f64();
    v.record(1, "variation identities", worst <= 1e-10 && secs < 5.0, format!("200 pairs, max rel err {worst:.2e}, {secs:.2} s"));
}

fn tlv_range(v: &mut Verdicts) {
    let mut rng = seeded(202);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..200 {
        let n = rng.random_range(2..=40);
        let g = random_graph(&mut rng, n);
        let steps = rng.random_range(2..=15);
        let w = random_series(&mut rng, n, steps);
        let alpha = match k % 10 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..=1.0),
        };
        for val in tlv_normalized(&g, &w, alpha).unwrap().as_series().as_time_major() {
            lo = lo.min(*val);
            hi = hi.max(*val);
        }
    }
    v.record(2, "normalized TLV range", lo >= -1.0 && hi <= 2.0, format!("200 windows, observed [{lo:.4}, {hi:.4}]"));
}

fn oracle_equivalence(v: &mut Verdicts) {
    let mut rng = seeded(303);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let g = random_graph(&mut rng, n);
        let steps = rng.random_range(2..=8);
        let x = random_series(&mut rng, n, steps);
        let alpha = rng.random_range(0.0..=1.0);
        let w = |i: usize, j: usize| g.weights()[i * n + j];
        let at = |i: usize, t: usize| x.frame(t)[i];

        let lv = |i: usize, t: usize| (0..n).map(|j| w(i, j) * (at(i, t) - at(j, t)).powi(2)).sum::<f64>();
        let dt = |i: usize, t: usize| if t == 0 { 0.0 } else { at(i, t) - at(i, t - 1) };
        let signed = |i: usize, t: usize| {
            let d = dt(i, t);
            if d > 0.0 {
                d * d
            } else {
                -d * d
            }
        };
        let mut tv_max = 0.0f64;
        let mut lv_max = 0.0f64;
        for t in 0..steps {
            for i in 0..n {
                tv_max = tv_max.max(signed(i, t).abs());
                lv_max = lv_max.max(lv(i, t));
            }
        }
        let norm = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };

        let lv_field = tlvnet_core::variation::local_variation_series(&g, &x).unwrap();
        let tv_field = temporal_variation(&x);
        let tlv_field = tlv(&g, &x, alpha).unwrap();
        let tlvn_field = tlv_normalized(&g, &x, alpha).unwrap();
        let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs() / (1.0 + want.abs()));
        for t in 0..steps {
            let frame_tv: f64 = (0..n).map(|i| lv(i, t)).sum();
            check(total_variation(&g, x.frame(t)).unwrap(), frame_tv);
            for i in 0..n {
                check(lv_field.get(i, t), lv(i, t));
                check(tv_field.get(i, t), dt(i, t).powi(2));
                check(tlv_field.get(i, t), alpha * signed(i, t) + (1.0 - alpha) * lv(i, t));
                check(
                    tlvn_field.get(i, t),
                    alpha * norm(signed(i, t), tv_max) + (1.0 - alpha) * norm(lv(i, t), lv_max),
                );
            }
        }
    }
    v.record(3, "oracle equivalence", worst <= 1e-12, format!("100 fixtures N <= 10, max rel err {worst:.2e}"));
}

fn spectral_correctness(v: &mut Verdicts) {
    let start = Instant::now();
    let mut rng = seeded(404);
    let graphs = vec![distance(20, 1), distance(100, 2), distance(250, 3), distance(400, 4), scale_free(200, 2, 5), scale_free(400, 3, 6)];
    let (mut parseval, mut constant, mut idem, mut recon) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for g in &graphs {
        let n = g.node_count();
        let l = g.laplacian();
        let spec = eigendecompose(&l).unwrap();
        recon = recon.max(max_abs(&spec.reconstruct(), l.as_slice()));
        let x = random_series(&mut rng, n, 3);
        for frame in x.frames() {
            let energy: f64 = frame.iter().map(|a| a * a).sum();
            let coeff: f64 = spec.forward(frame).iter().map(|a| a * a).sum();
            parseval = parseval.max((energy - coeff).abs() / energy);
        }
        let hpf = HpfConfig::default();
        let ones = SignalSeries64::from_frames(n, &[vec![1.0; n], vec![3.5; n]]).unwrap();
        let filtered = graph_hpf(&spec, &ones, &hpf).unwrap();
        constant = constant.max(filtered.as_time_major().iter().fold(0.0, |m, a| m.max(a.abs())));
        let once = graph_hpf(&spec, &x, &hpf).unwrap();
        let twice = graph_hpf(&spec, &once, &hpf).unwrap();
        idem = idem.max(max_abs(once.as_time_major(), twice.as_time_major()));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = parseval <= 1e-10 && constant <= 1e-10 && idem <= 1e-10 && recon <= 1e-9 && secs < 30.0;
    v.record(
        4,
        "spectral correctness",
        pass,
        format!("parseval {parseval:.1e}, hpf(const) {constant:.1e}, idempotence {idem:.1e}, reconstruction {recon:.1e}, N <= 400, {secs:.1} s"),
    );
}

fn sir_conservation(v: &mut Verdicts) {
    let start = Instant::now();
    let g = distance(300, 11);
    let params = SirParams::uniform(300, 0.3, 0.1, 0.1);
    let integ = IntegratorConfig::default();
    let template = StagedScenario::default();
    let cfg = IdentifyConfig::default();
    let trial = prepare_trial(&g, &params, &template, cfg.r, &integ, 12).unwrap();
    let mut sim = Simulation::new(&g, &params, &trial.scenario.init, &trial.scenario.schedule, &integ, true).unwrap();
    let mut current = g.clone();
    for (stage, action) in trial.plan.stages.iter().zip(trial.plan.action_times()) {
        sim.run_to_step(action).unwrap();
        let set = identify(&current, sim.infection(), action, &IdentifyConfig { p: stage.p, ..cfg.clone() }, None).unwrap();
        current = current.isolate_nodes(&set.nodes).unwrap();
        sim.set_graph(&current).unwrap();
    }
    sim.run_to_step(template.horizon).unwrap();
    let record = sim.into_record(0);
    let full = record.full_state.unwrap();
    let mut worst = 0.0f64;
    for t in 0..template.horizon {
        for k in 0..300 {
            worst = worst.max((full.s.get(k, t) + record.series.get(k, t) + full.r.get(k, t) - 1.0).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    v.record(
        5,
        "SIR conservation",
        worst <= 1e-6 && secs < 60.0,
        format!("staged plan, {} steps, max |S+I+R-1| {worst:.1e}, {secs:.1} s", template.horizon),
    );
}

fn integrator_order(v: &mut Verdicts) {
    let g = Graph64::from_edges(2, &[(0, 1, 1.0)]).unwrap();
    let params = SirParams { beta: vec![0.5, 0.3], gamma: vec![0.1, 0.2], kappa: 0.2 };
    let sys = NetworkSir::new(&g, &params).unwrap();
    let y0 = EpidemicState { s: vec![0.7, 1.0], i: vec![0.3, 0.0], r: vec![0.0, 0.0] }.to_flat();
    let y: Vec<Vec<f64>> = [0.1, 0.05, 0.025].iter().map(|&h| rk4_fixed(&sys, &y0, 0.0, 10.0, h)).collect();
    let order = (max_abs(&y[0], &y[1]) / max_abs(&y[1], &y[2])).log2();
    v.record(6, "integrator order", (3.5..=4.5).contains(&order), format!("self-convergence exponent {order:.3}"));
}

fn single_run(g: &Graph64, spec: &ScenarioSpec, seed: u64, steps: usize) -> (Vec<usize>, SignalSeries64) {
    let n = g.node_count();
    let params = SirParams::uniform(n, 0.3, 0.1, 0.1);
    let sc = make_scenario(spec, g, seed).unwrap();
    let mut sim = Simulation::new(g, &params, &sc.init, &sc.schedule, &IntegratorConfig::default(), false).unwrap();
    sim.run_to_step(steps).unwrap();
    (sc.sources, sim.into_record(seed).series)
}

fn source_identification(v: &mut Verdicts) {
    let cfg = IdentifyConfig { strategy: Strategy::Tlv, r: 10, alpha: 0.5, ..Default::default() };
    let spec = ScenarioSpec::new(ScenarioKind::SinglePerturbation, 10);
    let mut hits = Vec::new();
    for (label, p) in [("distance N=400 p=4%", 4.0), ("scale-free N=500 p=1%", 1.0)] {
        let mut found = 0;
        for trial in 0..20 {
            let g = if p == 4.0 { distance(400, 700 + trial as u64) } else { scale_free(500, 3, 700 + trial as u64) };
            let (sources, x) = single_run(&g, &spec, trial_seed(7, trial), 10);
            let set = identify(&g, &x, 10, &IdentifyConfig { p, ..cfg.clone() }, None).unwrap();
            found += usize::from(set.contains(sources[0]));
        }
        hits.push((label, found));
    }
    let pass = hits.iter().all(|h| h.1 >= 18);
    let detail = hits.iter().map(|(l, f)| format!("{l}: {f}/20")).collect::<Vec<_>>().join(", ");
    v.record(7, "source identification at t = 10", pass, detail);
}

fn double_perturbation(v: &mut Verdicts) {
    let (r, at) = (10usize, 50usize);
    let spec = ScenarioSpec::new(ScenarioKind::DoublePerturbation { time: at as f64, beta: 0.8 }, at + r);
    let base = IdentifyConfig { r, p: 4.0, ..Default::default() };
    let (mut tlv_hits, mut lv_hits) = (0, 0);
    for trial in 0..20 {
        let g = distance(400, 800 + trial as u64);
        let (sources, x) = single_run(&g, &spec, trial_seed(8, trial), at + r);
        let found = |cfg: &IdentifyConfig| (at + 1..=at + r).any(|t| identify(&g, &x, t, cfg, None).unwrap().contains(sources[0]));
        tlv_hits += usize::from(found(&IdentifyConfig { strategy: Strategy::Tlv, alpha: 0.7, ..base.clone() }));
        lv_hits += usize::from(found(&base.with_strategy(Strategy::Lv)));
    }
    v.record(
        8,
        "double perturbation re-identification",
        tlv_hits >= 16 && lv_hits <= tlv_hits,
        format!("TLV(0.7) {tlv_hits}/20, LV {lv_hits}/20 within steps {}..={}", at + 1, at + r),
    );
}

fn mean_finals(res: &SweepResult, trials: usize) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for t in &res.trials[..trials] {
        for (name, fin) in &t.method_finals {
            *out.entry(name.clone()).or_insert(0.0) += fin / trials as f64;
        }
    }
    out
}

fn control_and_alpha(v: &mut Verdicts) {
    let start = Instant::now();
    let g = distance(300, 21);
    let params = SirParams::uniform(300, 0.3, 0.1, 0.1);
    let res = alpha_sweep(&g, &params, &SweepConfig::default(), &IntegratorConfig::default(), 2024).unwrap();
    let means = mean_finals(&res, 20);
    let tlv_mean = means["tlv"];
    let beats_none = tlv_mean < means["none"];
    let beats_all = ["max", "hpf", "lv", "bc", "cc"].iter().all(|m| tlv_mean <= means[*m]);
    let listing = means.iter().map(|(k, m)| format!("{k} {m:.2}")).collect::<Vec<_>>().join(", ");
    let secs = start.elapsed().as_secs_f64();
    v.record(
        9,
        "control effectiveness",
        beats_none && beats_all && secs < 1800.0,
        format!("20 trials mean final accumulated infection: {listing}; sweep {secs:.0} s"),
    );

    let share = res.best_alpha_share(0.6);
    v.record(
        10,
        "best alpha at or above 0.6",
        share >= 0.6,
        format!("distance graph, 50 trials: share {share:.2}, best alphas {:?}", res.trials.iter().map(|t| t.best_alpha).collect::<Vec<_>>()),
    );
    let sf = scale_free(300, 3, 22);
    let cfg = SweepConfig { trials: 20, ..Default::default() };
    let sf_res = alpha_sweep(&sf, &params, &cfg, &IntegratorConfig::default(), 2025).unwrap();
    println!(
        "   scale-free counterpart (report only), 20 trials: share at or above 0.6 = {:.2}, mean tlv {:.2}, none {:.2}",
        sf_res.best_alpha_share(0.6),
        sf_res.mean_final("tlv").unwrap_or(f64::NAN),
        sf_res.mean_final("none").unwrap_or(f64::NAN)
    );
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ingestion_fidelity(v: &mut Verdicts) {
    let dir = fixture("india");
    let regions = read_regions(&dir.join("regions.csv")).unwrap();
    let (table, _) = ingest_cases(regions, &dir.join("cases.csv"), false).unwrap();
    let lossless = regions_csv(&table.regions) == std::fs::read(dir.join("regions.csv")).unwrap()
        && cases_csv(&table) == std::fs::read(dir.join("cases.csv")).unwrap();

    let g = build_geo_graph(&table.regions, &IngestConfig::default()).unwrap();
    let n = table.regions.len();
    let mut edges_exact = true;
    let mut near = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&table.regions[i], &table.regions[j]);
            let within = haversine_km((a.lat, a.lon), (b.lat, b.lon)) <= 100.0;
            near += usize::from(within);
            edges_exact &= within == (g.weight(i, j) > 0.0);
        }
    }
    let x = normalize_signal(&table, false);
    let exact = (0..n).all(|i| (0..table.dates.len()).all(|d| x.get(i, d) == table.confirmed[i][d] as f64 / table.regions[i].population as f64));
    v.record(
        11,
        "ingestion fidelity",
        n >= 10 && lossless && edges_exact && exact && near == g.edge_count(),
        format!("{n} districts, lossless {lossless}, {near} pairs within 100 km match edges {edges_exact}, exact normalization {exact}"),
    );
}

fn run_cli(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_tlvnet")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            files.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
        }
    }
    files
}

fn pipeline(root: &Path, config: &Path) -> BTreeMap<String, Vec<u8>> {
    let p = |name: &str| root.join(name).to_string_lossy().into_owned();
    let c = config.to_str().unwrap();
    let india = fixture("india");
    run_cli(&["graph", "generate", "--config", c, "--out", &p("graph")]);
    run_cli(&["simulate", "--config", c, "--out", &p("sim"), "--full"]);
    run_cli(&["identify", "--config", c, "--input", &p("sim"), "--out", &p("identify")]);
    run_cli(&["report", "--config", c, "--input", &p("sim"), "--out", &p("report")]);
    run_cli(&["control", "--config", c, "--out", &p("control")]);
    run_cli(&["sweep", "--config", c, "--out", &p("sweep"), "--trials", "2"]);
    run_cli(&[
        "ingest",
        "--config",
        c,
        "--regions",
        india.join("regions.csv").to_str().unwrap(),
        "--cases",
        india.join("cases.csv").to_str().unwrap(),
        "--out",
        &p("ingest"),
    ]);
    run_cli(&["identify", "--config", c, "--input", &p("ingest"), "--out", &p("ingest_identify")]);
    let mut all = BTreeMap::new();
    for sub in ["graph", "sim", "identify", "report", "control", "sweep", "ingest", "ingest_identify"] {
        for (name, bytes) in snapshot(&root.join(sub)) {
            all.insert(format!("{sub}/{name}"), bytes);
        }
    }
    all
}

fn determinism(v: &mut Verdicts) {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("pipeline.toml");
    std::fs::write(
        &config,
        "seed = 5\n[graph]\ntype = \"distance\"\nn = 150\nbox_side = 7.0\nthreshold = 1.95\n\
         [scenario]\nhorizon = 200\n[identify]\nr = 5\n[control.template]\nhorizon = 300\n\
         [sweep]\nalphas = [0.3, 0.7]\n[sweep.scenario]\nhorizon = 300\n[report]\nr = 5\nsgwt = true\n",
    )
    .unwrap();
    let first = pipeline(&dir.path().join("a"), &config);
    let second = pipeline(&dir.path().join("b"), &config);
    let differing: Vec<&String> = first.keys().filter(|k| second.get(*k) != first.get(*k)).collect();
    let pass = !first.is_empty() && first.len() == second.len() && differing.is_empty();
    v.record(
        12,
        "determinism",
        pass,
        format!("{} output files over 8 pipeline commands, {} differ", first.len(), differing.len()),
    );
}

#[test]
fn acceptance() {
    println!();
    let mut v = Verdicts(Vec::new());
    variation_identities(&mut v);
    tlv_range(&mut v);
    oracle_equivalence(&mut v);
    spectral_correctness(&mut v);
    sir_conservation(&mut v);
    integrator_order(&mut v);
    source_identification(&mut v);
    double_perturbation(&mut v);
    control_and_alpha(&mut v);
    ingestion_fidelity(&mut v);
    determinism(&mut v);
    let failed: Vec<usize> = v.0.iter().filter(|c| !c.1).map(|c| c.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
