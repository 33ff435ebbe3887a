use serde::{Deserialize, Serialize};

use super::{identify, IdentifyConfig, Strategy};
use crate::error::Result;
use crate::graph::Graph;
use crate::scalar::Real;
use crate::signal::SignalSeries;
use crate::spectral::{sgwt_coefficients, sgwt_top_nodes, SpatioTemporalNode};

/// TLV and SGWT rankings over the same window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgwtComparison {
    pub time: usize,
    pub tlv_nodes: Vec<usize>,
    pub sgwt_nodes: Vec<usize>,
    /// Nodes present in both sets.
    pub overlap: usize,
    /// Strongest wavelet responses anywhere in the window.
    pub spatio_temporal: Vec<SpatioTemporalNode>,
}

/// Rank nodes at step `t` by TLV and by SGWT magnitude using the window and
/// percentage in `cfg`, and list the `s_total` strongest space-time wavelet
/// responses.
pub fn compare_sgwt_tlv<T: Real>(
    g: &Graph<T>,
    x: &SignalSeries<T>,
    t: usize,
    cfg: &IdentifyConfig,
    s_total: usize,
) -> Result<SgwtComparison> {
    let tlv = identify(g, x, t, &cfg.with_strategy(Strategy::Tlv), None)?;
    let sgwt = identify(g, x, t, &cfg.with_strategy(Strategy::Sgwt), None)?;
    let coeffs = sgwt_coefficients(g, &x.window(t, cfg.r)?, &cfg.sgwt)?;
    let overlap = tlv.nodes.iter().filter(|v| sgwt.contains(**v)).count();
    Ok(SgwtComparison {
        time: t,
        tlv_nodes: tlv.nodes,
        sgwt_nodes: sgwt.nodes,
        overlap,
        spatio_temporal: sgwt_top_nodes(&coeffs, s_total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn localized_burst_is_found_by_both() {
        let n = 8;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut frames = vec![vec![0.0; n]; 4];
        frames[3][5] = 1.0;
        let x = SignalSeries::from_frames(n, &frames).unwrap();
        let cfg = IdentifyConfig { r: 4, p: 12.5, ..Default::default() };
        let cmp = compare_sgwt_tlv(&g, &x, 4, &cfg, 3).unwrap();
        assert_eq!(cmp.tlv_nodes, vec![5]);
        assert_eq!(cmp.sgwt_nodes, vec![5]);
        assert_eq!(cmp.overlap, 1);
        assert_eq!(cmp.spatio_temporal.len(), 3);
        assert_eq!((cmp.spatio_temporal[0].node, cmp.spatio_temporal[0].step), (5, 3));
    }
}
