//! Greedy agglomerative modularity maximization, hierarchical re-clustering and
//! partition agreement scores.
//!
//! Detection starts from singletons and repeatedly merges the pair of adjacent
//! groups with the largest modularity gain until no adjacent pairs remain. Gains
//! are kept as exact integers (`ΔQ · 2m²` is `2m·l_ij - k_i·k_j`), so ties are real
//! ties and are broken by the smallest `(i, j)` group pair. The returned partition
//! is the level of highest modularity.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId, Partition, PartitionKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DetectError {
    #[error("graph has no edges")]
    NoEdges,
    #[error("partitions cover {0} and {1} nodes")]
    Mismatch(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Surviving group, the smaller of the two ids.
    pub kept: u32,
    pub absorbed: u32,
    /// Modularity after this merge.
    pub modularity: f64,
}

/// Every merge taken by the greedy agglomeration, with the best cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeDendrogram {
    pub initial_groups: usize,
    /// Modularity of the all-singletons level.
    pub initial_modularity: f64,
    pub merges: Vec<Merge>,
    /// Number of merges applied at the maximum-modularity level.
    pub cut: usize,
}

impl MergeDendrogram {
    /// Modularity after `level` merges.
    pub fn modularity_at(&self, level: usize) -> f64 {
        match level {
            0 => self.initial_modularity,
            l => self.merges[l - 1].modularity,
        }
    }

    pub fn best_modularity(&self) -> f64 {
        self.modularity_at(self.cut)
    }

    pub fn levels(&self) -> usize {
        self.merges.len() + 1
    }

    /// Partition after the first `level` merges.
    pub fn partition_at(&self, level: usize) -> Partition {
        let mut parent: Vec<u32> = (0..self.initial_groups as u32).collect();
        for merge in &self.merges[..level] {
            parent[merge.absorbed as usize] = merge.kept;
        }
        // survivors always have smaller ids, so one ascending pass resolves roots
        for u in 0..parent.len() {
            let p = parent[u] as usize;
            parent[u] = parent[p];
        }
        Partition::from_assignment(&parent, PartitionKind::Detected)
    }
}

struct Agglomeration {
    two_m: i64,
    degree: Vec<i64>,
    internal: Vec<i64>,
    links: Vec<HashMap<u32, i64>>,
    alive: Vec<bool>,
    heap: BinaryHeap<(i64, Reverse<u32>, Reverse<u32>)>,
}

impl Agglomeration {
    fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let mut links = Vec::with_capacity(n);
        let mut degree = Vec::with_capacity(n);
        for u in g.nodes() {
            let adj = g.adj(u);
            degree.push(adj.len() as i64);
            links.push(adj.iter().map(|v| (v.0, 1i64)).collect::<HashMap<_, _>>());
        }
        let mut state = Agglomeration {
            two_m: 2 * g.edge_count() as i64,
            degree,
            internal: vec![0; n],
            links,
            alive: vec![true; n],
            heap: BinaryHeap::new(),
        };
        for (u, v) in g.edges() {
            state.push(u.0, v.0);
        }
        state
    }

    /// `ΔQ · 2m²` for merging adjacent groups `i` and `j`.
    fn gain(&self, i: u32, j: u32, between: i64) -> i64 {
        self.two_m * between - self.degree[i as usize] * self.degree[j as usize]
    }

    fn push(&mut self, i: u32, j: u32) {
        let (lo, hi) = (i.min(j), i.max(j));
        let between = self.links[lo as usize][&hi];
        self.heap.push((self.gain(lo, hi, between), Reverse(lo), Reverse(hi)));
    }

    /// `Q · 4m²` of the current grouping.
    fn scaled_modularity(&self) -> i64 {
        (0..self.alive.len())
            .filter(|&i| self.alive[i])
            .map(|i| 2 * self.two_m * self.internal[i] - self.degree[i] * self.degree[i])
            .sum()
    }

    fn pop_best(&mut self) -> Option<(i64, u32, u32)> {
        while let Some((gain, Reverse(i), Reverse(j))) = self.heap.pop() {
            if !(self.alive[i as usize] && self.alive[j as usize]) {
                continue;
            }
            let Some(&between) = self.links[i as usize].get(&j) else {
                continue;
            };
            if self.gain(i, j, between) == gain {
                return Some((gain, i, j));
            }
        }
        None
    }

    fn merge(&mut self, kept: u32, absorbed: u32) {
        let (k, a) = (kept as usize, absorbed as usize);
        let mut into = std::mem::take(&mut self.links[k]);
        let mut from = std::mem::take(&mut self.links[a]);
        let between = into.remove(&absorbed).unwrap_or(0);
        from.remove(&kept);
        if into.len() < from.len() {
            std::mem::swap(&mut into, &mut from);
        }
        for (x, w) in from {
            *into.entry(x).or_insert(0) += w;
        }
        for (&x, &w) in &into {
            let row = &mut self.links[x as usize];
            row.remove(&absorbed);
            row.insert(kept, w);
        }
        self.internal[k] += self.internal[a] + between;
        self.degree[k] += self.degree[a];
        self.alive[a] = false;
        let neighbors: Vec<u32> = into.keys().copied().collect();
        self.links[k] = into;
        for x in neighbors {
            self.push(kept, x);
        }
    }
}

/// Greedy modularity communities and the full merge sequence.
pub fn detect_communities(g: &Graph) -> Result<(Partition, MergeDendrogram), DetectError> {
    if g.edge_count() == 0 {
        return Err(DetectError::NoEdges);
    }
    let mut state = Agglomeration::new(g);
    let scale = (state.two_m * state.two_m) as f64;
    let mut q = state.scaled_modularity();
    let initial_modularity = q as f64 / scale;
    let (mut best, mut cut) = (q, 0);
    let mut merges = Vec::new();
    while let Some((gain, i, j)) = state.pop_best() {
        state.merge(i, j);
        q += 2 * gain;
        merges.push(Merge {
            kept: i,
            absorbed: j,
            modularity: q as f64 / scale,
        });
        if q > best {
            best = q;
            cut = merges.len();
        }
    }
    debug_assert_eq!(q, state.scaled_modularity());
    let dendrogram = MergeDendrogram {
        initial_groups: g.node_count(),
        initial_modularity,
        merges,
        cut,
    };
    Ok((dendrogram.partition_at(cut), dendrogram))
}

/// Detected sub-communities of one group.
#[derive(Clone, Debug, PartialEq)]
pub struct SubClustering {
    pub group: usize,
    /// Nodes of the group; sub-partition node `i` is `members[i]`.
    pub members: Vec<NodeId>,
    pub partition: Partition,
    /// Modularity of `partition` within the induced subgraph (0 for edgeless groups).
    pub modularity: f64,
}

/// Re-runs detection inside each of the `top_k` largest groups of `p`.
pub fn subcluster(g: &Graph, p: &Partition, top_k: usize) -> Vec<SubClustering> {
    p.largest_groups(top_k)
        .into_iter()
        .map(|group| {
            let members = p.members(group).to_vec();
            let sub = g.induced_subgraph(&members);
            let (partition, modularity) = match detect_communities(&sub) {
                Ok((partition, dendrogram)) => (partition, dendrogram.best_modularity()),
                Err(DetectError::NoEdges) => (Partition::whole(members.len(), PartitionKind::Detected), 0.0),
                Err(e) => unreachable!("{e}"),
            };
            SubClustering {
                group,
                members,
                partition,
                modularity,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// Normalized mutual information, arithmetic-mean normalization.
    pub nmi: f64,
    /// Adjusted Rand index.
    pub ari: f64,
}

/// NMI and ARI between two partitions of the same node set.
///
/// When both partitions are trivial (zero entropy, or no pairs to compare) and so
/// carry no information to disagree on, both scores are 1.
pub fn compare_partitions(a: &Partition, b: &Partition) -> Result<Agreement, DetectError> {
    let n = a.node_count();
    if n != b.node_count() {
        return Err(DetectError::Mismatch(n, b.node_count()));
    }
    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    for (&x, &y) in a.assignment().iter().zip(b.assignment()) {
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let sizes_a: Vec<u64> = a.groups().iter().map(|g| g.len() as u64).collect();
    let sizes_b: Vec<u64> = b.groups().iter().map(|g| g.len() as u64).collect();

    let nf = n as f64;
    let entropy = |sizes: &[u64]| -> f64 {
        sizes
            .iter()
            .map(|&s| s as f64 / nf)
            .map(|p| if p > 0.0 { -p * p.ln() } else { 0.0 })
            .sum()
    };
    let (ha, hb) = (entropy(&sizes_a), entropy(&sizes_b));
    // sorted for a platform-independent summation order
    let mut cells: Vec<_> = joint.into_iter().collect();
    cells.sort_unstable();
    let mutual: f64 = cells
        .iter()
        .map(|&((x, y), count)| {
            let pxy = count as f64 / nf;
            pxy * (pxy / (sizes_a[x as usize] as f64 / nf * sizes_b[y as usize] as f64 / nf)).ln()
        })
        .sum();
    let nmi = if ha + hb == 0.0 {
        1.0
    } else {
        (2.0 * mutual / (ha + hb)).clamp(0.0, 1.0)
    };

    let pairs = |k: u64| (k * k.saturating_sub(1) / 2) as f64;
    let index: f64 = cells.iter().map(|&(_, c)| pairs(c)).sum();
    let sum_a: f64 = sizes_a.iter().map(|&s| pairs(s)).sum();
    let sum_b: f64 = sizes_b.iter().map(|&s| pairs(s)).sum();
    let total = pairs(n as u64);
    let ari = if total == 0.0 {
        1.0
    } else {
        let expected = sum_a * sum_b / total;
        let max = (sum_a + sum_b) / 2.0;
        if max == expected {
            1.0
        } else {
            (index - expected) / (max - expected)
        }
    };
    Ok(Agreement { nmi, ari })
}
