//! Network statistics: path length, clustering, power-law exponent, modularity and
//! relative density.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId, Partition, PartitionError};
use crate::sampling::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("power-law tail needs at least 2 values >= x_min = {x_min}, found {found}")]
    ShortTail { x_min: u64, found: usize },
    #[error("every tail value equals x_min = {0}; the exponent is undefined")]
    DegenerateTail(u64),
    #[error("x_min must be positive")]
    InvalidXMin,
    #[error("group {0} has no incident edges")]
    IsolatedGroup(usize),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Nodes above which [`AplMode::auto`] switches from exact to sampled path length.
pub const EXACT_APL_LIMIT: usize = 20_000;
/// BFS sources used by the sampled path length when chosen automatically.
pub const SAMPLED_APL_SOURCES: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AplMode {
    /// BFS from every node.
    Exact,
    /// BFS from `sources` distinct uniformly chosen nodes.
    Sampled { sources: usize },
}

impl AplMode {
    pub fn auto(node_count: usize) -> Self {
        if node_count <= EXACT_APL_LIMIT {
            AplMode::Exact
        } else {
            AplMode::Sampled {
                sources: SAMPLED_APL_SOURCES,
            }
        }
    }
}

/// Local clustering coefficient of every node; nodes of degree < 2 get 0.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    g.nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            let d = g.deg(u);
            if d < 2 {
                return 0.0;
            }
            let links = triangles_at(g, u);
            links as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}

/// Number of edges among the neighbors of `u`.
fn triangles_at(g: &Graph, u: NodeId) -> usize {
    let adj = g.adj(u);
    let mut twice = 0;
    for &v in adj {
        twice += sorted_intersection(adj, g.adj(v));
    }
    twice / 2
}

fn sorted_intersection(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Mean local clustering coefficient over all nodes, degree < 2 counting as 0.
pub fn avg_clustering(g: &Graph) -> Result<f64, MetricsError> {
    if g.is_empty() {
        return Err(MetricsError::EmptyGraph);
    }
    let local = local_clustering(g);
    Ok(local.iter().sum::<f64>() / local.len() as f64)
}

/// Global transitivity: `3 × triangles / connected triples`. Zero when there are no triples.
pub fn transitivity(g: &Graph) -> Result<f64, MetricsError> {
    if g.is_empty() {
        return Err(MetricsError::EmptyGraph);
    }
    let (closed, triples) = g
        .nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            let d = g.deg(u) as u64;
            (triangles_at(g, u) as u64, d * d.saturating_sub(1) / 2)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(if triples == 0 { 0.0 } else { closed as f64 / triples as f64 })
}

/// Sum of hop distances from `source` to every node, and the number reached.
fn bfs_distance_sum(g: &Graph, source: NodeId) -> (u64, usize) {
    let mut dist = vec![u32::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source.index()] = 0;
    queue.push_back(source);
    let (mut sum, mut reached) = (0u64, 1usize);
    while let Some(u) = queue.pop_front() {
        let next = dist[u.index()] + 1;
        for &v in g.adj(u) {
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = next;
                sum += next as u64;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    (sum, reached)
}

/// Mean shortest-path hop count.
///
/// Exact mode averages over all unordered pairs. Sampled mode averages the
/// distances from `sources` distinct random nodes to all others; with as many
/// sources as nodes it equals the exact value. Per-source sums are integers, so
/// the parallel reduction is order-independent.
pub fn avg_path_length(g: &Graph, mode: AplMode, rng: Option<&mut RngStream>) -> Result<f64, MetricsError> {
    let n = g.node_count();
    if n == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(MetricsError::Disconnected);
    }
    if n == 1 {
        return Ok(0.0);
    }
    let sources: Vec<NodeId> = match mode {
        AplMode::Exact => g.nodes().collect(),
        AplMode::Sampled { sources } => {
            let mut fallback;
            let rng = match rng {
                Some(r) => r,
                None => {
                    fallback = RngStream::new(0);
                    &mut fallback
                }
            };
            rng.distinct_below(n, sources.max(1))
                .into_iter()
                .map(NodeId::from)
                .collect()
        }
    };
    let total: u64 = sources
        .par_iter()
        .map(|&s| bfs_distance_sum(g, s).0)
        .sum();
    Ok(total as f64 / (sources.len() as f64 * (n - 1) as f64))
}

/// Default lower cutoff for the exponent fit on networks whose degree floor is `m`.
///
/// The half-integer offset of [`fit_alpha`] puts the scale at 0.5 when
/// `x_min = 1`, where the approximation badly underestimates the exponent, so the
/// cutoff never goes below 2.
pub fn default_x_min(m: usize) -> u64 {
    m.max(2) as u64
}

/// Discrete power-law exponent by the approximate maximum-likelihood estimator
/// `1 + n / Σ ln(x / (x_min - 1/2))` over the values `x >= x_min`.
pub fn fit_alpha(values: &[u64], x_min: u64) -> Result<f64, MetricsError> {
    fit_alpha_with_offset(values, x_min, 0.5)
}

/// Continuous estimator `1 + n / Σ ln(x / x_min)` over the values `x >= x_min`.
pub fn fit_alpha_continuous(values: &[u64], x_min: u64) -> Result<f64, MetricsError> {
    fit_alpha_with_offset(values, x_min, 0.0)
}

fn fit_alpha_with_offset(values: &[u64], x_min: u64, offset: f64) -> Result<f64, MetricsError> {
    if x_min == 0 {
        return Err(MetricsError::InvalidXMin);
    }
    let tail: Vec<u64> = values.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.len() < 2 {
        return Err(MetricsError::ShortTail {
            x_min,
            found: tail.len(),
        });
    }
    if tail.iter().all(|&x| x == x_min) {
        return Err(MetricsError::DegenerateTail(x_min));
    }
    let scale = x_min as f64 - offset;
    let log_sum: f64 = tail.iter().map(|&x| (x as f64 / scale).ln()).sum();
    Ok(1.0 + tail.len() as f64 / log_sum)
}

/// Degrees of all nodes.
pub fn degrees(g: &Graph) -> Vec<u64> {
    g.nodes().map(|u| g.deg(u) as u64).collect()
}

/// `histogram[k]` is the number of nodes with degree `k`.
pub fn degree_histogram(g: &Graph) -> Vec<usize> {
    let max = g.nodes().map(|u| g.deg(u)).max().unwrap_or(0);
    let mut hist = vec![0; max + 1];
    for u in g.nodes() {
        hist[g.deg(u)] += 1;
    }
    hist
}

/// Internal edge count and endpoint-degree sum per group.
fn group_tallies(g: &Graph, p: &Partition) -> (Vec<u64>, Vec<u64>) {
    let mut internal = vec![0u64; p.group_count()];
    let mut degree = vec![0u64; p.group_count()];
    for u in g.nodes() {
        let gu = p.group_of(u);
        degree[gu] += g.deg(u) as u64;
        internal[gu] += g.adj(u).iter().filter(|&&v| v > u && p.group_of(v) == gu).count() as u64;
    }
    (internal, degree)
}

/// Newman modularity `Q = Σ_i (e_ii - a_i²)`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64, MetricsError> {
    p.ensure_covers(g)?;
    let m = g.edge_count();
    if m == 0 {
        return Err(MetricsError::NoEdges);
    }
    let (internal, degree) = group_tallies(g, p);
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&l, &k)| l as f64 / m - (k as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Mean over groups of `internal / (internal + boundary)` edge counts.
pub fn relative_density(g: &Graph, p: &Partition) -> Result<f64, MetricsError> {
    p.ensure_covers(g)?;
    let (internal, degree) = group_tallies(g, p);
    let mut total = 0.0;
    for (gi, (&l, &k)) in internal.iter().zip(&degree).enumerate() {
        if k == 0 {
            return Err(MetricsError::IsolatedGroup(gi));
        }
        let boundary = k - 2 * l;
        total += l as f64 / (l + boundary) as f64;
    }
    Ok(total / internal.len() as f64)
}

/// Structure of one group's induced subgraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub group: usize,
    pub size: usize,
    /// Exponent fitted on within-group degrees; absent when the tail is too short.
    pub alpha: Option<f64>,
    pub clustering: f64,
}

/// Induced clustering and within-group power-law exponent for the `top_k` largest groups.
pub fn per_community_stats(
    g: &Graph,
    p: &Partition,
    top_k: usize,
    x_min: u64,
) -> Result<Vec<CommunityStats>, MetricsError> {
    p.ensure_covers(g)?;
    Ok(p.largest_groups(top_k)
        .into_iter()
        .map(|gi| {
            let sub = g.induced_subgraph(p.members(gi));
            CommunityStats {
                group: gi,
                size: sub.node_count(),
                alpha: fit_alpha(&degrees(&sub), x_min).ok(),
                clustering: avg_clustering(&sub).unwrap_or(0.0),
            }
        })
        .collect())
}

/// Every statistic for one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_path_length: f64,
    pub avg_clustering: f64,
    pub alpha: Option<f64>,
    /// Modularity of the detected partition.
    pub modularity: f64,
    /// Relative density of the detected partition.
    pub relative_density: f64,
    pub apl_method: AplMode,
    pub per_community: Option<Vec<CommunityStats>>,
    pub transitivity: f64,
    pub alpha_x_min: u64,
    pub detected_communities: usize,
    pub ground_truth: Option<GroundTruthReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthReport {
    pub communities: usize,
    pub modularity: f64,
    pub relative_density: f64,
    pub nmi: f64,
    pub ari: f64,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PartitionKind;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn triangle() -> Graph {
        g(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn two_triangles() -> Graph {
        g(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
    }

    fn split(labels: &[u32]) -> Partition {
        Partition::from_assignment(labels, PartitionKind::GroundTruth)
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(avg_clustering(&triangle()).unwrap(), 1.0);
        assert_eq!(avg_clustering(&g(3, &[(0, 1), (1, 2)])).unwrap(), 0.0);
        // 4-cycle 0-1-2-3 plus diagonal 0-2
        let diag = g(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let local = local_clustering(&diag);
        assert_eq!(local, vec![2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0]);
        assert!((avg_clustering(&diag).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(avg_clustering(&Graph::new()), Err(MetricsError::EmptyGraph));
    }

    #[test]
    fn transitivity_examples() {
        assert_eq!(transitivity(&triangle()).unwrap(), 1.0);
        assert_eq!(transitivity(&g(3, &[(0, 1), (1, 2)])).unwrap(), 0.0);
        assert_eq!(transitivity(&g(2, &[(0, 1)])).unwrap(), 0.0);
    }

    #[test]
    fn path_length_examples() {
        assert_eq!(avg_path_length(&triangle(), AplMode::Exact, None).unwrap(), 1.0);
        assert!((avg_path_length(&g(3, &[(0, 1), (1, 2)]), AplMode::Exact, None).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let star = g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert!((avg_path_length(&star, AplMode::Exact, None).unwrap() - 1.6).abs() < 1e-12);
        assert_eq!(
            avg_path_length(&g(4, &[(0, 1), (2, 3)]), AplMode::Exact, None),
            Err(MetricsError::Disconnected)
        );
    }

    #[test]
    fn sampled_with_all_sources_is_exact() {
        let graph = two_triangles();
        let exact = avg_path_length(&graph, AplMode::Exact, None).unwrap();
        let mut rng = RngStream::new(3);
        let sampled = avg_path_length(&graph, AplMode::Sampled { sources: 6 }, Some(&mut rng)).unwrap();
        assert_eq!(exact, sampled);
    }

    #[test]
    fn alpha_estimators() {
        let continuous = fit_alpha_continuous(&[2, 2, 4, 8], 2).unwrap();
        assert!((continuous - (1.0 + 4.0 / (3.0 * 2f64.ln()))).abs() < 1e-9);
        let discrete = fit_alpha(&[2, 2, 4, 8], 2).unwrap();
        let by_hand = 1.0 + 4.0 / (2.0 * (2.0f64 / 1.5).ln() + (4.0f64 / 1.5).ln() + (8.0f64 / 1.5).ln());
        assert!((discrete - by_hand).abs() < 1e-12);
        assert_eq!(fit_alpha(&[3, 3, 3], 3), Err(MetricsError::DegenerateTail(3)));
        assert_eq!(fit_alpha(&[1, 1, 5], 2), Err(MetricsError::ShortTail { x_min: 2, found: 1 }));
        assert_eq!(fit_alpha(&[1, 2], 0), Err(MetricsError::InvalidXMin));
    }

    /// Discrete power-law draws by inverse transform of the continuous
    /// approximation: `floor((x_min - 1/2)(1 - u)^(-1/(alpha - 1)) + 1/2)`.
    fn power_law_sample(alpha: f64, x_min: u64, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = RngStream::new(seed);
        (0..n)
            .map(|_| {
                let u = rng.unit();
                ((x_min as f64 - 0.5) * (1.0 - u).powf(-1.0 / (alpha - 1.0)) + 0.5).floor() as u64
            })
            .collect()
    }

    #[test]
    fn alpha_recovered_from_synthetic_power_law() {
        for (x_min, seed) in [(6, 1), (10, 2), (20, 3)] {
            let sample = power_law_sample(2.5, x_min, 100_000, seed);
            let alpha = fit_alpha(&sample, x_min).unwrap();
            assert!((alpha - 2.5).abs() <= 0.05, "x_min {x_min}: {alpha}");
        }
    }

    #[test]
    fn x_min_floor() {
        assert_eq!(default_x_min(1), 2);
        assert_eq!(default_x_min(2), 2);
        assert_eq!(default_x_min(5), 5);
    }

    #[test]
    fn modularity_examples() {
        let q = modularity(&two_triangles(), &split(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!((q - 5.0 / 14.0).abs() < 1e-12);
        assert_eq!(modularity(&two_triangles(), &split(&[0; 6])).unwrap(), 0.0);
        let q = modularity(&triangle(), &split(&[0, 1, 2])).unwrap();
        assert!((q + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(modularity(&Graph::with_nodes(2), &split(&[0, 1])), Err(MetricsError::NoEdges));
        assert!(matches!(
            modularity(&triangle(), &split(&[0, 1])),
            Err(MetricsError::Partition(_))
        ));
    }

    #[test]
    fn relative_density_examples() {
        let rd = relative_density(&two_triangles(), &split(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert_eq!(rd, 0.75);
        assert_eq!(relative_density(&two_triangles(), &split(&[0; 6])).unwrap(), 1.0);
        let cycle = g(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(relative_density(&cycle, &split(&[0, 1, 0, 1])).unwrap(), 0.0);
        let with_isolated = g(3, &[(0, 1)]);
        assert_eq!(
            relative_density(&with_isolated, &split(&[0, 0, 1])),
            Err(MetricsError::IsolatedGroup(1))
        );
    }

    #[test]
    fn per_community_on_triangle() {
        let stats = per_community_stats(&triangle(), &split(&[0, 0, 0]), 1, 2).unwrap();
        assert_eq!(
            stats,
            vec![CommunityStats { group: 0, size: 3, alpha: None, clustering: 1.0 }]
        );
    }

    #[test]
    fn per_community_orders_by_size() {
        let graph = two_triangles();
        let stats = per_community_stats(&graph, &split(&[0, 0, 1, 1, 1, 1]), 5, 1).unwrap();
        assert_eq!(stats.iter().map(|s| (s.group, s.size)).collect::<Vec<_>>(), vec![(1, 4), (0, 2)]);
    }

    #[test]
    fn histogram() {
        let star = g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(degree_histogram(&star), vec![0, 4, 0, 0, 1]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph() -> impl Strategy<Value = Graph> {
            (2usize..9).prop_flat_map(|n| {
                prop::collection::vec((0..n, 0..n), 1..20).prop_map(move |pairs| {
                    let mut graph = Graph::with_nodes(n);
                    for (u, v) in pairs {
                        if u != v {
                            graph.add_edge(NodeId::from(u), NodeId::from(v)).unwrap();
                        }
                    }
                    graph
                })
            })
        }

        proptest! {
            #[test]
            fn relabeling_invariance(graph in arb_graph(), seed in any::<u64>(), groups in 1u32..4) {
                prop_assume!(graph.edge_count() > 0);
                let n = graph.node_count();
                let mut rng = RngStream::new(seed);
                let perm = rng.distinct_below(n, n);
                let relabeled = Graph::from_edges(
                    n,
                    graph.edges().map(|(u, v)| (perm[u.index()], perm[v.index()])),
                ).unwrap();
                let labels: Vec<u32> = (0..n).map(|_| rng.below(groups as u64) as u32).collect();
                let mut moved = vec![0u32; n];
                for (u, &l) in labels.iter().enumerate() {
                    moved[perm[u]] = l;
                }
                let cc = avg_clustering(&graph).unwrap();
                let cc2 = avg_clustering(&relabeled).unwrap();
                prop_assert!((cc - cc2).abs() < 1e-12);
                let q = modularity(&graph, &split(&labels)).unwrap();
                let q2 = modularity(&relabeled, &split(&moved)).unwrap();
                prop_assert!((q - q2).abs() < 1e-12);
            }

            #[test]
            fn modularity_bounds(graph in arb_graph(), labels in prop::collection::vec(0u32..5, 9)) {
                prop_assume!(graph.edge_count() > 0);
                let p = split(&labels[..graph.node_count()]);
                let q = modularity(&graph, &p).unwrap();
                prop_assert!((-0.5..=1.0).contains(&q));
                let whole = split(&vec![0; graph.node_count()]);
                prop_assert!(modularity(&graph, &whole).unwrap().abs() < 1e-12);
            }
        }
    }
}
