//! File formats shared by the subcommands. Every write goes to a temporary
//! file in the target directory and is renamed into place.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tlvnet_core::epidemic::{BetaEvent, IntegratorConfig, ScenarioSpec, SirHistory};
use tlvnet_core::graph::Position;
use tlvnet_core::influence::InfluentialSet;
use tlvnet_core::{Graph64, SignalSeries64, SirParams64};

use crate::error::{CliError, CliResult};

pub const EDGES: &str = "edges.csv";
pub const NODES: &str = "nodes.csv";
pub const INFECTION: &str = "infection.csv";
pub const SIR: &str = "sir.csv";
pub const RUN: &str = "run.json";
pub const INFLUENTIAL: &str = "influential.csv";

/// Shortest text that parses back to exactly `v`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(path, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::output(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::output(path, e))?;
    tmp.persist(path).map_err(|e| CliError::output(path, e.error))?;
    Ok(())
}

/// CSV built in memory from string records.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<[u8]>>(header: &[S]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }

    pub fn save(self, path: &Path) -> CliResult<()> {
        write_atomic(path, &self.into_bytes())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::output(path, e))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
}

pub fn csv_reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path, e))
}

/// Ensure the header matches `expected` exactly.
pub fn expect_header(path: &Path, rdr: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> CliResult<()> {
    let header = rdr.headers().map_err(|e| CliError::input(path, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(CliError::input(
            path,
            format!("header must be `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

/// 1-based line number of a record, counting the header as line 1.
pub fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn parse_field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, idx: usize, name: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|e| CliError::input(path, format!("line {}: bad {name} `{raw}`: {e}", line_of(rec))))
}

pub fn edges_csv(g: &Graph64) -> Vec<u8> {
    let mut t = Table::new(&["src", "dst", "weight"]);
    for (i, j, w) in g.edges() {
        t.row([i.to_string(), j.to_string(), fmt_f64(w)]);
    }
    t.into_bytes()
}

/// SHA-256 of the canonical edge list.
pub fn graph_hash(g: &Graph64) -> String {
    let digest = Sha256::digest(edges_csv(g));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn nodes_csv(g: &Graph64) -> CliResult<Option<Vec<u8>>> {
    let n = g.node_count();
    let positions = g.positions();
    let labels = g.labels();
    if positions.is_none() && labels.is_none() {
        return Ok(None);
    }
    let geographic = matches!(positions.and_then(|p| p.first()), Some(Position::Geographic { .. }));
    let header = if geographic { ["id", "label", "lat", "lon"] } else { ["id", "label", "x", "y"] };
    let mut t = Table::new(&header);
    for i in 0..n {
        let label = labels.map_or(String::new(), |l| l[i].clone());
        let (a, b) = match positions.map(|p| p[i]) {
            None => (String::new(), String::new()),
            Some(Position::Planar { x, y }) if !geographic => (fmt_f64(x), fmt_f64(y)),
            Some(Position::Geographic { lat, lon }) if geographic => (fmt_f64(lat), fmt_f64(lon)),
            Some(_) => return Err(CliError::invalid("graph mixes planar and geographic positions")),
        };
        t.row([i.to_string(), label, a, b]);
    }
    Ok(Some(t.into_bytes()))
}

/// Write `edges.csv` and, when the graph carries labels or positions, `nodes.csv`.
pub fn write_graph(dir: &Path, g: &Graph64) -> CliResult<Vec<PathBuf>> {
    let mut written = vec![dir.join(EDGES)];
    write_atomic(&written[0], &edges_csv(g))?;
    if let Some(bytes) = nodes_csv(g)? {
        let p = dir.join(NODES);
        write_atomic(&p, &bytes)?;
        written.push(p);
    }
    Ok(written)
}

fn read_nodes(path: &Path) -> CliResult<(usize, Vec<String>, Option<Vec<Position>>)> {
    let mut rdr = csv_reader(path)?;
    let header: Vec<String> = rdr.headers().map_err(|e| CliError::input(path, e))?.iter().map(String::from).collect();
    let geographic = match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["id", "label", "x", "y"] => false,
        ["id", "label", "lat", "lon"] => true,
        _ => return Err(CliError::input(path, "header must be `id,label,x,y` or `id,label,lat,lon`")),
    };
    let mut labels = Vec::new();
    let mut positions = Vec::new();
    let mut any_position = false;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, e))?;
        let id: usize = parse_field(path, &rec, 0, "id")?;
        if id != k {
            return Err(CliError::input(path, format!("line {}: ids must run 0, 1, 2, ... (found {id})", line_of(&rec))));
        }
        labels.push(rec.get(1).unwrap_or("").to_string());
        let (a, b) = (rec.get(2).unwrap_or(""), rec.get(3).unwrap_or(""));
        if a.is_empty() && b.is_empty() {
            positions.push(None);
            continue;
        }
        any_position = true;
        let a: f64 = parse_field(path, &rec, 2, &header[2])?;
        let b: f64 = parse_field(path, &rec, 3, &header[3])?;
        if geographic && (a.abs() > 90.0 || b.abs() > 180.0) {
            return Err(CliError::input(path, format!("line {}: coordinates out of range", line_of(&rec))));
        }
        positions.push(Some(if geographic {
            Position::Geographic { lat: a, lon: b }
        } else {
            Position::Planar { x: a, y: b }
        }));
    }
    let positions = if any_position {
        Some(
            positions
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| CliError::input(path, "positions must be given for all nodes or none"))?,
        )
    } else {
        None
    };
    Ok((labels.len(), labels, positions))
}

/// Load a graph from an edge list and an optional node table. Without a node
/// table the node count is one more than the largest endpoint.
pub fn read_graph(edges: &Path, nodes: Option<&Path>) -> CliResult<Graph64> {
    let mut rdr = csv_reader(edges)?;
    expect_header(edges, &mut rdr, &["src", "dst", "weight"])?;
    let mut list = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(edges, e))?;
        let a: usize = parse_field(edges, &rec, 0, "src")?;
        let b: usize = parse_field(edges, &rec, 1, "dst")?;
        let w: f64 = parse_field(edges, &rec, 2, "weight")?;
        if a >= b {
            return Err(CliError::input(edges, format!("line {}: need src < dst", line_of(&rec))));
        }
        list.push((a, b, w));
    }
    let node_info = nodes.map(read_nodes).transpose()?;
    let n = match &node_info {
        Some((n, ..)) => *n,
        None => list.iter().map(|&(_, b, _)| b + 1).max().unwrap_or(0),
    };
    let mut g = Graph64::from_edges(n, &list).map_err(|e| CliError::input(edges, e))?;
    if let Some((_, labels, positions)) = node_info {
        if labels.iter().any(|l| !l.is_empty()) {
            g = g.with_labels(labels)?;
        }
        if let Some(p) = positions {
            g = g.with_positions(p)?;
        }
    }
    Ok(g)
}

/// Node-major matrix: header `node,<t_1>,...,<t_T>`, one row per node.
pub fn series_csv(x: &SignalSeries64) -> Vec<u8> {
    let mut header = vec!["node".to_string()];
    header.extend(x.time_axis().iter().map(|&t| fmt_f64(t)));
    let mut t = Table::new(&header);
    for i in 0..x.nodes() {
        let mut row = vec![i.to_string()];
        row.extend((0..x.steps()).map(|c| fmt_f64(x.get(i, c))));
        t.row(row);
    }
    t.into_bytes()
}

pub fn read_series(path: &Path) -> CliResult<SignalSeries64> {
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers().map_err(|e| CliError::input(path, e))?.clone();
    if header.get(0) != Some("node") {
        return Err(CliError::input(path, "first column must be `node`"));
    }
    let times = header
        .iter()
        .skip(1)
        .map(|s| s.parse::<f64>().map_err(|e| CliError::input(path, format!("bad time `{s}` in header: {e}"))))
        .collect::<CliResult<Vec<f64>>>()?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, e))?;
        let id: usize = parse_field(path, &rec, 0, "node")?;
        if id != k {
            return Err(CliError::input(path, format!("line {}: nodes must run 0, 1, 2, ...", line_of(&rec))));
        }
        let row = (1..=times.len())
            .map(|c| parse_field::<f64>(path, &rec, c, "value"))
            .collect::<CliResult<Vec<f64>>>()?;
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(CliError::input(path, format!("line {}: non-finite value {v}", line_of(&rec))));
        }
        rows.push(row);
    }
    let x = SignalSeries64::from_rows(&rows).map_err(|e| CliError::input(path, e))?;
    x.with_time_axis(times).map_err(|e| CliError::input(path, e))
}

/// Long format `time,node,s,i,r`.
pub fn sir_csv(infection: &SignalSeries64, history: &SirHistory<f64>) -> Vec<u8> {
    let mut t = Table::new(&["time", "node", "s", "i", "r"]);
    for c in 0..infection.steps() {
        for v in 0..infection.nodes() {
            t.row([
                fmt_f64(infection.time_axis()[c]),
                v.to_string(),
                fmt_f64(history.s.get(v, c)),
                fmt_f64(infection.get(v, c)),
                fmt_f64(history.r.get(v, c)),
            ]);
        }
    }
    t.into_bytes()
}

/// Metadata of a simulation, stored next to its signal files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub graph_hash: String,
    pub nodes: usize,
    pub horizon: usize,
    pub seed: u64,
    pub scenario_seed: u64,
    pub params: SirParams64,
    pub scenario: ScenarioSpec,
    pub schedule: Vec<BetaEvent<f64>>,
    pub sources: Vec<usize>,
    pub integrator: IntegratorConfig,
}

pub fn influential_rows(t: &mut Table, set: &InfluentialSet<f64>) {
    for (rank, (&node, &score)) in set.nodes.iter().zip(&set.scores).enumerate() {
        t.row([
            set.time.to_string(),
            (rank + 1).to_string(),
            node.to_string(),
            fmt_f64(score),
            set.strategy.name().to_string(),
        ]);
    }
}

pub fn influential_table() -> Table {
    Table::new(&["time", "rank", "node", "score", "strategy"])
}

/// A directory holding `edges.csv`, optional `nodes.csv` and `infection.csv`.
pub fn read_dataset(dir: &Path) -> CliResult<(Graph64, SignalSeries64)> {
    let nodes = dir.join(NODES);
    let g = read_graph(&dir.join(EDGES), nodes.exists().then_some(nodes.as_path()))?;
    let x = read_series(&dir.join(INFECTION))?;
    if x.nodes() != g.node_count() {
        return Err(CliError::invalid(format!(
            "{} has {} nodes but the graph has {}",
            INFECTION,
            x.nodes(),
            g.node_count()
        )));
    }
    let run = dir.join(RUN);
    if run.exists() {
        let manifest: RunManifest = read_json(&run)?;
        if manifest.graph_hash != graph_hash(&g) {
            return Err(CliError::invalid(format!("{} does not match the graph in {}", RUN, dir.display())));
        }
    }
    Ok((g, x))
}
