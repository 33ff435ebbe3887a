//! Plot-ready exports of variation fields.

use tlvnet_core::spectral::sgwt_coefficients;
use tlvnet_core::spectral::SgwtConfig;
use tlvnet_core::variation::{local_variation, temporal_variation, tlv, tlv_normalized, Metric};
use tlvnet_core::{Graph64, SignalSeries64};

use crate::config::ReportConfig;
use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, Table};

/// Metric values at one step plus the values used for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSlice {
    pub time: usize,
    pub values: Vec<f64>,
    /// Negative TLV entries replaced by their local-variation term.
    pub plotted: Vec<f64>,
}

/// Evaluate `cfg.metric` over the window ending at 1-based step `t`.
pub fn field_slice(g: &Graph64, x: &SignalSeries64, t: usize, cfg: &ReportConfig) -> CliResult<FieldSlice> {
    let window = x.window(t, cfg.r)?;
    let last = window.steps() - 1;
    let values = match cfg.metric {
        Metric::LocalVariation => local_variation(g, window.frame(last))?,
        Metric::TemporalVariation => temporal_variation(&window).last_column().to_vec(),
        Metric::Tlv => tlv(g, &window, cfg.alpha)?.last_column().to_vec(),
        Metric::TlvNormalized => tlv_normalized(g, &window, cfg.alpha)?.last_column().to_vec(),
    };
    let plotted = match cfg.metric {
        Metric::Tlv | Metric::TlvNormalized => {
            // at alpha = 0 the field is the (scaled) local variation alone
            let lv = match cfg.metric {
                Metric::Tlv => tlv(g, &window, 0.0)?,
                _ => tlv_normalized(g, &window, 0.0)?,
            };
            values
                .iter()
                .zip(lv.last_column())
                .map(|(&v, &l)| if v < 0.0 { (1.0 - cfg.alpha) * l } else { v })
                .collect()
        }
        _ => values.clone(),
    };
    Ok(FieldSlice { time: t, values, plotted })
}

/// `10 log10(v / max)`, with non-positive values and anything below the
/// floor reported at the floor.
pub fn to_db(values: &[f64], floor_db: f64) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values
        .iter()
        .map(|&v| {
            let scaled = if max > 0.0 { v / max } else { 0.0 };
            if scaled > 0.0 {
                (10.0 * scaled.log10()).max(floor_db)
            } else {
                floor_db
            }
        })
        .collect()
}

pub struct ReportTables {
    pub variation: Table,
    pub plot: Table,
    pub sgwt: Option<Table>,
}

pub fn report_tables(g: &Graph64, x: &SignalSeries64, cfg: &ReportConfig, sgwt: &SgwtConfig) -> CliResult<ReportTables> {
    let x = match cfg.aggregate {
        Some(w) => x.sliding_sums(w.width, w.slide)?,
        None => x.clone(),
    };
    let times = cfg.times.clone().unwrap_or_else(|| vec![x.steps()]);
    if times.is_empty() {
        return Err(CliError::invalid("report needs at least one time"));
    }
    let xy: Vec<(String, String)> = (0..g.node_count())
        .map(|i| match g.positions() {
            Some(p) => {
                let (a, b) = p[i].plot_xy();
                (fmt_f64(a), fmt_f64(b))
            }
            None => (String::new(), String::new()),
        })
        .collect();
    let alpha = match cfg.metric {
        Metric::Tlv | Metric::TlvNormalized => fmt_f64(cfg.alpha),
        _ => String::new(),
    };
    let mut variation = Table::new(&["node", "time", "metric", "alpha", "value"]);
    let mut plot = Table::new(&["node", "time", "value_db", "x", "y"]);
    let mut sgwt_table = cfg.sgwt.then(|| Table::new(&["node", "time", "scale", "value"]));
    for &t in &times {
        let slice = field_slice(g, &x, t, cfg)?;
        for (i, v) in slice.values.iter().enumerate() {
            variation.row([i.to_string(), t.to_string(), cfg.metric.name().into(), alpha.clone(), fmt_f64(*v)]);
        }
        for (i, db) in to_db(&slice.plotted, cfg.floor_db).into_iter().enumerate() {
            plot.row([i.to_string(), t.to_string(), fmt_f64(db), xy[i].0.clone(), xy[i].1.clone()]);
        }
        if let Some(table) = &mut sgwt_table {
            let coeffs = sgwt_coefficients(g, &x.window(t, cfg.r)?, sgwt)?;
            let last = coeffs.steps() - 1;
            for (k, &s) in coeffs.scales().iter().enumerate() {
                for v in 0..coeffs.nodes() {
                    table.row([v.to_string(), t.to_string(), fmt_f64(s), fmt_f64(coeffs.get(k, v, last))]);
                }
            }
        }
    }
    Ok(ReportTables { variation, plot, sgwt: sgwt_table })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_scaling_and_floor() {
        let db = to_db(&[1.0, 0.1, 0.0, -3.0, 1e-20], -120.0);
        assert_eq!(db[0], 0.0);
        assert!((db[1] + 10.0).abs() < 1e-12);
        assert_eq!(&db[2..], &[-120.0, -120.0, -120.0]);
        assert_eq!(to_db(&[0.0, 0.0], -90.0), vec![-90.0, -90.0]);
    }

    #[test]
    fn negative_tlv_is_plotted_by_its_local_term() {
        // node 0 falls while node 1 rises; both differ from their neighbor
        let g = Graph64::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let x = SignalSeries64::from_frames(2, &[vec![1.0, 0.0], vec![0.5, 0.45]]).unwrap();
        let cfg = ReportConfig { r: 2, alpha: 0.5, ..Default::default() };
        let s = field_slice(&g, &x, 2, &cfg).unwrap();
        assert!(s.values[0] < 0.0);
        // window max of LV is 1 (first step), so the scaled local term is 0.0025
        assert!((s.plotted[0] - 0.5 * 0.0025).abs() < 1e-15);
        assert_eq!(s.plotted[1], s.values[1]);
    }
}
