//! Regional case counts to graph and signal.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::Serialize;
use tlvnet_core::graph::{kernel_graph, Position};
use tlvnet_core::{Graph64, SignalSeries64};

use crate::config::{DistanceKind, IngestConfig};
use crate::error::{CliError, CliResult};
use crate::io::{csv_reader, expect_header, fmt_f64, line_of, parse_field, Table};

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

const DATE_FMT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRecord {
    pub id: String,
    pub label: String,
    pub lat: f64,
    pub lon: f64,
    pub population: u64,
}

/// Cumulative confirmed counts on a continuous daily grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseTable {
    pub regions: Vec<RegionRecord>,
    pub dates: Vec<NaiveDate>,
    /// `confirmed[region][day]`
    pub confirmed: Vec<Vec<u64>>,
}

/// A decreasing cumulative count that was clamped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repair {
    pub line: u64,
    pub region: String,
    pub date: String,
    pub reported: u64,
    pub kept: u64,
}

pub fn read_regions(path: &Path) -> CliResult<Vec<RegionRecord>> {
    let mut rdr = csv_reader(path)?;
    expect_header(path, &mut rdr, &["id", "label", "lat", "lon", "population"])?;
    let mut regions: Vec<RegionRecord> = Vec::new();
    let mut seen = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(path, e))?;
        let line = line_of(&rec);
        let id = rec.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::input(path, format!("line {line}: empty region id")));
        }
        if let Some(prev) = seen.insert(id.clone(), line) {
            return Err(CliError::input(path, format!("line {line}: region `{id}` already defined on line {prev}")));
        }
        let lat: f64 = parse_field(path, &rec, 2, "lat")?;
        let lon: f64 = parse_field(path, &rec, 3, "lon")?;
        if !(lat.abs() <= 90.0) || !(lon.abs() <= 180.0) {
            return Err(CliError::input(path, format!("line {line}: coordinates ({lat}, {lon}) out of range")));
        }
        let population: u64 = parse_field(path, &rec, 4, "population")?;
        if population == 0 {
            return Err(CliError::input(path, format!("line {line}: population must be positive")));
        }
        regions.push(RegionRecord {
            id,
            label: rec.get(1).unwrap_or("").to_string(),
            lat,
            lon,
            population,
        });
    }
    if regions.is_empty() {
        return Err(CliError::input(path, "no regions"));
    }
    Ok(regions)
}

/// Load cases against `regions`. Days missing for a region repeat its last
/// reported count (0 before the first report).
pub fn ingest_cases(
    regions: Vec<RegionRecord>,
    cases: &Path,
    repair: bool,
) -> CliResult<(CaseTable, Vec<Repair>)> {
    let index: HashMap<&str, usize> = regions.iter().enumerate().map(|(k, r)| (r.id.as_str(), k)).collect();
    let mut rdr = csv_reader(cases)?;
    expect_header(cases, &mut rdr, &["region_id", "date", "confirmed"])?;
    // per region: date -> (count, line)
    let mut obs: Vec<BTreeMap<NaiveDate, (u64, u64)>> = vec![BTreeMap::new(); regions.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(cases, e))?;
        let line = line_of(&rec);
        let id = rec.get(0).unwrap_or("");
        let &k = index
            .get(id)
            .ok_or_else(|| CliError::input(cases, format!("line {line}: unknown region id `{id}`")))?;
        let raw_date = rec.get(1).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, DATE_FMT)
            .map_err(|e| CliError::input(cases, format!("line {line}: bad date `{raw_date}`: {e}")))?;
        let count: u64 = parse_field(cases, &rec, 2, "confirmed")?;
        if let Some((_, prev)) = obs[k].insert(date, (count, line)) {
            return Err(CliError::input(
                cases,
                format!("line {line}: duplicate entry for `{id}` on {raw_date} (first on line {prev})"),
            ));
        }
    }
    let first = obs.iter().filter_map(|m| m.keys().next()).min().copied();
    let last = obs.iter().filter_map(|m| m.keys().next_back()).max().copied();
    let (Some(first), Some(last)) = (first, last) else {
        return Err(CliError::input(cases, "no case rows"));
    };
    let days = (last - first).num_days() as usize + 1;
    let dates: Vec<NaiveDate> = (0..days).map(|d| first + Days::new(d as u64)).collect();

    let mut repairs = Vec::new();
    let mut confirmed = Vec::with_capacity(regions.len());
    for (region, series) in regions.iter().zip(&obs) {
        let mut row = Vec::with_capacity(days);
        let mut current = 0u64;
        for date in &dates {
            if let Some(&(count, line)) = series.get(date) {
                if count < current {
                    if !repair {
                        return Err(CliError::input(
                            cases,
                            format!(
                                "line {line}: cumulative count for `{}` fell from {current} to {count} on {date}",
                                region.id
                            ),
                        ));
                    }
                    repairs.push(Repair {
                        line,
                        region: region.id.clone(),
                        date: date.format(DATE_FMT).to_string(),
                        reported: count,
                        kept: current,
                    });
                } else {
                    current = count;
                }
            }
            row.push(current);
        }
        confirmed.push(row);
    }
    Ok((CaseTable { regions, dates, confirmed }, repairs))
}

/// First difference with the first day kept as is.
pub fn daily_counts(cumulative: &[u64]) -> Vec<u64> {
    let mut prev = 0;
    cumulative
        .iter()
        .map(|&c| {
            let d = c - prev;
            prev = c;
            d
        })
        .collect()
}

/// `X[i][t] = count[i][t] / population[i]`, with steps numbered from 1.
pub fn normalize_signal(table: &CaseTable, daily: bool) -> SignalSeries64 {
    let rows: Vec<Vec<f64>> = table
        .regions
        .iter()
        .zip(&table.confirmed)
        .map(|(r, counts)| {
            let counts = if daily { daily_counts(counts) } else { counts.clone() };
            counts.iter().map(|&c| c as f64 / r.population as f64).collect()
        })
        .collect();
    SignalSeries64::from_rows(&rows).expect("rectangular case table")
}

pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Equirectangular distance about the mean latitude of the two points.
pub fn planar_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let mean_lat = ((a.0 + b.0) / 2.0).to_radians();
    let dx = (b.1 - a.1).to_radians() * mean_lat.cos() * EARTH_RADIUS_KM;
    let dy = (b.0 - a.0).to_radians() * EARTH_RADIUS_KM;
    (dx * dx + dy * dy).sqrt()
}

/// Kernel graph over regions with distances in km.
pub fn build_geo_graph(regions: &[RegionRecord], cfg: &IngestConfig) -> CliResult<Graph64> {
    let coords: Vec<(f64, f64)> = regions.iter().map(|r| (r.lat, r.lon)).collect();
    let dist = match cfg.distance {
        DistanceKind::Haversine => haversine_km,
        DistanceKind::Planar => planar_km,
    };
    let sigma = cfg.sigma_km();
    let g: Graph64 = kernel_graph(regions.len(), cfg.threshold_km, sigma * sigma, |i, j| dist(coords[i], coords[j]));
    let positions = regions.iter().map(|r| Position::Geographic { lat: r.lat, lon: r.lon }).collect();
    let labels = regions.iter().map(|r| r.label.clone()).collect();
    Ok(g.with_positions(positions)?.with_labels(labels)?)
}

pub fn regions_csv(regions: &[RegionRecord]) -> Vec<u8> {
    let mut t = Table::new(&["id", "label", "lat", "lon", "population"]);
    for r in regions {
        t.row([r.id.clone(), r.label.clone(), fmt_f64(r.lat), fmt_f64(r.lon), r.population.to_string()]);
    }
    t.into_bytes()
}

/// Re-export in input format, region-major and date-ascending.
pub fn cases_csv(table: &CaseTable) -> Vec<u8> {
    let mut t = Table::new(&["region_id", "date", "confirmed"]);
    for (r, row) in table.regions.iter().zip(&table.confirmed) {
        for (date, count) in table.dates.iter().zip(row) {
            t.row([r.id.clone(), date.format(DATE_FMT).to_string(), count.to_string()]);
        }
    }
    t.into_bytes()
}

pub fn dates_csv(table: &CaseTable) -> Vec<u8> {
    let mut t = Table::new(&["step", "date"]);
    for (k, date) in table.dates.iter().enumerate() {
        t.row([(k + 1).to_string(), date.format(DATE_FMT).to_string()]);
    }
    t.into_bytes()
}
