//! Seeded randomness and degree-proportional (preferential attachment) selection.
//!
//! Selection probability of node `u` is `degree(u) / Σ degree`, taken over
//! whichever candidate set the caller restricts to. The global and per-community
//! distributions are realized with token lists in which each node appears once per
//! incident edge, so an unconstrained draw is a single uniform index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{CommunityId, Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("no edges to sample from")]
    Empty,
    #[error("no eligible candidate")]
    NoEligible,
}

/// Deterministic random source: ChaCha8 seeded from a 64-bit value.
///
/// ChaCha output is specified independently of platform and word size, and every
/// draw here goes through 64-bit integer ranges, so a seed reproduces the same
/// sequence everywhere.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream seeded from OS entropy. Use [`RngStream::seed`] to record it.
    pub fn from_entropy() -> Self {
        Self::new(rand::rng().random())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform integer in `0..bound`. `bound` must be positive.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }

    /// Uniform real in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `true` with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> Result<bool, SamplingError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SamplingError::InvalidProbability(p));
        }
        Ok(self.unit() < p)
    }

    /// `k` distinct values from `0..n` in draw order (partial Fisher-Yates).
    pub fn distinct_below(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// Rejection attempts per candidate before falling back to exact enumeration.
pub const REJECTION_FACTOR: usize = 50;

/// Token lists for degree-proportional sampling, globally and per community.
///
/// Node `u` appears `degree(u)` times in the global list and in the list of its
/// community. The index must be told about every node and edge in the same order
/// they are added to the graph.
#[derive(Clone, Debug, Default)]
pub struct DegreeIndex {
    tokens: Vec<NodeId>,
    community_tokens: Vec<Vec<NodeId>>,
    members: Vec<Vec<NodeId>>,
    degree: Vec<u32>,
    label: Vec<Option<CommunityId>>,
}

impl DegreeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index mirroring an existing graph.
    pub fn from_graph(g: &Graph) -> Self {
        let mut index = Self::new();
        for u in g.nodes() {
            index.add_node(u, g.label_of(u));
        }
        for (u, v) in g.edges() {
            index.record_edge(u, v);
        }
        index
    }

    pub fn add_node(&mut self, u: NodeId, label: Option<CommunityId>) {
        debug_assert_eq!(u.index(), self.degree.len(), "nodes must be added in id order");
        self.degree.push(0);
        self.label.push(label);
        if let Some(c) = label {
            if self.members.len() <= c.index() {
                self.members.resize_with(c.index() + 1, Vec::new);
                self.community_tokens.resize_with(c.index() + 1, Vec::new);
            }
            self.members[c.index()].push(u);
        }
    }

    pub fn record_edge(&mut self, u: NodeId, v: NodeId) {
        for w in [u, v] {
            self.tokens.push(w);
            self.degree[w.index()] += 1;
            if let Some(c) = self.label[w.index()] {
                self.community_tokens[c.index()].push(w);
            }
        }
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.degree[u.index()] as usize
    }

    /// Total token count, i.e. twice the number of recorded edges.
    pub fn total_weight(&self) -> usize {
        self.tokens.len()
    }

    /// Sum of degrees of the nodes in community `c`.
    pub fn community_weight(&self, c: CommunityId) -> usize {
        self.community_tokens.get(c.index()).map_or(0, Vec::len)
    }

    pub fn community_members(&self, c: CommunityId) -> &[NodeId] {
        self.members.get(c.index()).map_or(&[], Vec::as_slice)
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    /// Node chosen with probability `degree(u) / Σ degree` over the whole graph.
    pub fn sample(&self, rng: &mut RngStream) -> Result<NodeId, SamplingError> {
        if self.tokens.is_empty() {
            return Err(SamplingError::Empty);
        }
        Ok(self.tokens[rng.below(self.tokens.len() as u64) as usize])
    }

    /// Degree-proportional draw over nodes whose community differs from `forbidden`.
    ///
    /// Rejection-samples the global distribution up to `max_draws` times, then
    /// enumerates the eligible nodes exactly.
    pub fn sample_outside(
        &self,
        forbidden: CommunityId,
        max_draws: usize,
        rng: &mut RngStream,
    ) -> Result<NodeId, SamplingError> {
        if self.tokens.is_empty() {
            return Err(SamplingError::Empty);
        }
        for _ in 0..max_draws {
            let u = self.tokens[rng.below(self.tokens.len() as u64) as usize];
            if self.label[u.index()] != Some(forbidden) {
                return Ok(u);
            }
        }
        let eligible = (0..self.degree.len())
            .map(NodeId::from)
            .filter(|u| self.label[u.index()] != Some(forbidden));
        self.weighted_pick(eligible, rng)
    }

    /// Degree-proportional draw restricted to community `c`, skipping `exclude`.
    pub fn sample_in_community(
        &self,
        c: CommunityId,
        exclude: &[NodeId],
        rng: &mut RngStream,
    ) -> Result<NodeId, SamplingError> {
        let tokens = match self.community_tokens.get(c.index()) {
            Some(t) if !t.is_empty() => t,
            _ => return Err(SamplingError::NoEligible),
        };
        let attempts = REJECTION_FACTOR * self.members[c.index()].len();
        for _ in 0..attempts {
            let u = tokens[rng.below(tokens.len() as u64) as usize];
            if !exclude.contains(&u) {
                return Ok(u);
            }
        }
        let eligible = self.members[c.index()]
            .iter()
            .copied()
            .filter(|u| !exclude.contains(u));
        self.weighted_pick(eligible, rng)
    }

    /// Same distribution as the free function [`sample_neighbor`]. When `u` has
    /// more than `sqrt(W)` neighbors, with `W` the weight of community `c`, draws
    /// from the community are accepted if adjacent to `u`; after `degree(u)` misses
    /// the neighbors are enumerated.
    pub fn sample_neighbor(
        &self,
        g: &Graph,
        u: NodeId,
        c: CommunityId,
        exclude: &[NodeId],
        rng: &mut RngStream,
    ) -> Result<NodeId, SamplingError> {
        let d = g.deg(u);
        let weight = self.community_weight(c);
        if weight > 0 && d * d > weight {
            let tokens = &self.community_tokens[c.index()];
            for _ in 0..d {
                let v = tokens[rng.below(tokens.len() as u64) as usize];
                if v != u && g.has_edge(u, v) && !exclude.contains(&v) {
                    return Ok(v);
                }
            }
        }
        sample_neighbor(g, u, c, exclude, rng)
    }

    fn weighted_pick<I>(&self, candidates: I, rng: &mut RngStream) -> Result<NodeId, SamplingError>
    where
        I: Iterator<Item = NodeId> + Clone,
    {
        pick_weighted(candidates.map(|u| (u, self.degree(u))), rng)
    }
}

/// Degree-proportional choice among neighbors of `u` labeled `c`, skipping `exclude`.
///
/// The candidate set is the adjacency list of `u`, which is already materialized,
/// so the draw is an exact weighted enumeration in ascending id order.
pub fn sample_neighbor(
    g: &Graph,
    u: NodeId,
    c: CommunityId,
    exclude: &[NodeId],
    rng: &mut RngStream,
) -> Result<NodeId, SamplingError> {
    let candidates = g
        .neighbors(u)
        .map_err(|_| SamplingError::NoEligible)?
        .iter()
        .copied()
        .filter(|&v| g.label_of(v) == Some(c) && !exclude.contains(&v))
        .map(|v| (v, g.deg(v)));
    pick_weighted(candidates, rng)
}

fn pick_weighted<I>(candidates: I, rng: &mut RngStream) -> Result<NodeId, SamplingError>
where
    I: Iterator<Item = (NodeId, usize)> + Clone,
{
    let total: usize = candidates.clone().map(|(_, w)| w).sum();
    if total == 0 {
        return Err(SamplingError::NoEligible);
    }
    let mut r = rng.below(total as u64) as usize;
    for (u, w) in candidates {
        if r < w {
            return Ok(u);
        }
        r -= w;
    }
    unreachable!("weighted draw ran past the total weight")
}
