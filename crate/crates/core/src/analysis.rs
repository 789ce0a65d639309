//! One-call analysis of a graph into a [`MetricsReport`].

use serde::{Deserialize, Serialize};

use crate::detect::{compare_partitions, detect_communities};
use crate::graph::{Graph, Partition};
use crate::metrics::{
    avg_clustering, avg_path_length, degrees, fit_alpha, modularity, per_community_stats, relative_density,
    transitivity, AplMode, GroundTruthReport, MetricsError, MetricsReport,
};
use crate::sampling::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    /// Path-length mode; `None` picks by graph size.
    pub apl_mode: Option<AplMode>,
    /// Lower cutoff of the power-law fit.
    pub x_min: u64,
    /// Number of largest communities to break down; 0 skips the breakdown.
    pub top_k: usize,
    /// Seed for source sampling in sampled path-length mode.
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            apl_mode: None,
            x_min: 2,
            top_k: 10,
            seed: 0,
        }
    }
}

/// Computes every metric. Modularity and relative density in the top-level fields
/// refer to the detected partition; ground-truth values are added when a
/// partition is supplied, and the per-community breakdown then uses it too.
pub fn analyze(
    g: &Graph,
    ground_truth: Option<&Partition>,
    options: &AnalyzeOptions,
) -> Result<MetricsReport, MetricsError> {
    if let Some(p) = ground_truth {
        p.ensure_covers(g)?;
    }
    let apl_method = options.apl_mode.unwrap_or_else(|| AplMode::auto(g.node_count()));
    let mut rng = RngStream::new(options.seed);
    let avg_path_length = avg_path_length(g, apl_method, Some(&mut rng))?;
    let (detected, _) = detect_communities(g).map_err(|_| MetricsError::NoEdges)?;

    let ground = match ground_truth {
        Some(p) => {
            let agreement = compare_partitions(p, &detected).expect("same node count");
            Some(GroundTruthReport {
                communities: p.group_count(),
                modularity: modularity(g, p)?,
                relative_density: relative_density(g, p)?,
                nmi: agreement.nmi,
                ari: agreement.ari,
            })
        }
        None => None,
    };
    let per_community = match options.top_k {
        0 => None,
        k => Some(per_community_stats(g, ground_truth.unwrap_or(&detected), k, options.x_min)?),
    };

    Ok(MetricsReport {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        avg_path_length,
        avg_clustering: avg_clustering(g)?,
        alpha: fit_alpha(&degrees(g), options.x_min).ok(),
        modularity: modularity(g, &detected)?,
        relative_density: relative_density(g, &detected)?,
        apl_method,
        per_community,
        transitivity: transitivity(g)?,
        alpha_x_min: options.x_min,
        detected_communities: detected.group_count(),
        ground_truth: ground,
    })
}
