//! The growth model.
//!
//! Generation starts from `c` triangles, one per community, with one edge between
//! every pair of triangles. Each later node attaches to an anchor picked by global
//! preferential attachment and inherits the anchor's community. It then adds `m - 1`
//! more edges inside that community, either to degree-weighted neighbors of the
//! anchor (triad formation, probability `p_t`) or to degree-weighted members of the
//! community. Consecutive nodes never join the same community, and after every
//! node but the first, an edge between the last two communities is added with
//! probability `p_c`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CommunityId, Graph, NodeId};
use crate::sampling::{DegreeIndex, RngStream, SamplingError};

/// Global preferential-attachment draws spent looking for an anchor outside the
/// previous node's community before enumerating candidates exactly.
pub const ANCHOR_REDRAW_CAP: usize = 10_000;

/// Attempts at finding a non-duplicate inter-community edge before giving up.
pub const INTER_EDGE_ATTEMPTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("n = {n} is below 3c = {}; the seed triangles alone need that many nodes", 3 * c)]
    TooFewNodes { n: usize, c: usize },
    #[error("m must be at least 1")]
    ZeroEdgesPerNode,
    #[error("c must be at least 1")]
    ZeroCommunities,
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("node count {0} exceeds the supported maximum")]
    TooLarge(usize),
}

/// The five model parameters plus the random seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Final node count.
    pub n: usize,
    /// Edges created by each node after the seed phase.
    pub m: usize,
    /// Number of seed communities.
    pub c: usize,
    /// Probability of triad formation.
    pub p_t: f64,
    /// Probability of an inter-community edge per growth step.
    pub p_c: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn new(n: usize, m: usize, c: usize, p_t: f64, p_c: f64, seed: u64) -> Self {
        GenParams {
            n,
            m,
            c,
            p_t,
            p_c,
            seed,
        }
    }

    /// Single-community parameters, the triad-formation scale-free special case.
    pub fn holme_kim(n: usize, m: usize, p_t: f64, seed: u64) -> Self {
        Self::new(n, m, 1, p_t, 0.0, seed)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.c == 0 {
            return Err(GenError::ZeroCommunities);
        }
        if self.m == 0 {
            return Err(GenError::ZeroEdgesPerNode);
        }
        if self.n < 3 * self.c {
            return Err(GenError::TooFewNodes {
                n: self.n,
                c: self.c,
            });
        }
        if self.n > u32::MAX as usize {
            return Err(GenError::TooLarge(self.n));
        }
        for (name, value) in [("p_t", self.p_t), ("p_c", self.p_c)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::InvalidProbability { name, value });
            }
        }
        Ok(())
    }
}

impl fmt::Display for GenParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} m={} c={} p_t={} p_c={} seed={}",
            self.n, self.m, self.c, self.p_t, self.p_c, self.seed
        )
    }
}

impl FromStr for GenParams {
    type Err = String;

    /// Parses the `key=value` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut n, mut m, mut c, mut p_t, mut p_c, mut seed) = (None, None, None, None, None, None);
        for field in s.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {field:?}"))?;
            let bad = |e: &dyn fmt::Display| format!("bad value for {key}: {e}");
            match key {
                "n" => n = Some(value.parse().map_err(|e| bad(&e))?),
                "m" => m = Some(value.parse().map_err(|e| bad(&e))?),
                "c" => c = Some(value.parse().map_err(|e| bad(&e))?),
                "p_t" => p_t = Some(value.parse().map_err(|e| bad(&e))?),
                "p_c" => p_c = Some(value.parse().map_err(|e| bad(&e))?),
                "seed" => seed = Some(value.parse().map_err(|e| bad(&e))?),
                _ => return Err(format!("unknown parameter {key:?}")),
            }
        }
        let missing = |k: &str| format!("missing parameter {k}");
        Ok(GenParams {
            n: n.ok_or_else(|| missing("n"))?,
            m: m.ok_or_else(|| missing("m"))?,
            c: c.ok_or_else(|| missing("c"))?,
            p_t: p_t.ok_or_else(|| missing("p_t"))?,
            p_c: p_c.ok_or_else(|| missing("p_c"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        })
    }
}

/// How a new node chose its edges beyond the anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `m = 1`: no further edges.
    AnchorOnly,
    /// Edges to neighbors of the anchor.
    Triad,
    /// Edges to community members chosen by preferential attachment.
    Community,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterOutcome {
    /// The first growth node never attempts an inter-community edge, nor do
    /// single-community runs.
    NotAttempted,
    /// The `p_c` coin came up false.
    NotDrawn,
    Added(NodeId, NodeId),
    /// Every attempt hit an existing edge.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub node: NodeId,
    pub anchor: NodeId,
    pub community: CommunityId,
    pub branch: Branch,
    /// Edge targets after the anchor, in creation order.
    pub extra: Vec<NodeId>,
    /// Triad edges that fell back to community attachment.
    pub fallbacks: u32,
    /// Edges short of `m` because no eligible target was left.
    pub shortfall: u32,
    pub inter: InterOutcome,
}

/// Record of every random decision taken by a generation run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenTrace {
    pub communities: usize,
    pub seed_inter_edges: Vec<(NodeId, NodeId)>,
    pub steps: Vec<TraceStep>,
}

impl GenTrace {
    /// Rebuilds the generated graph from the trace alone.
    pub fn replay(&self) -> Graph {
        let mut g = Graph::with_capacity(3 * self.communities + self.steps.len());
        for k in 0..self.communities {
            seed_triangle(&mut g, CommunityId(k as u32));
        }
        for &(u, v) in &self.seed_inter_edges {
            g.add_edge(u, v).expect("trace edge");
        }
        for step in &self.steps {
            let u = g.add_node(Some(step.community));
            debug_assert_eq!(u, step.node);
            for &v in std::iter::once(&step.anchor).chain(&step.extra) {
                g.add_edge(u, v).expect("trace edge");
            }
            if let InterOutcome::Added(a, b) = step.inter {
                g.add_edge(a, b).expect("trace edge");
            }
        }
        g
    }

    pub fn total_shortfall(&self) -> u64 {
        self.steps.iter().map(|s| s.shortfall as u64).sum()
    }

    pub fn skipped_inter_edges(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.inter == InterOutcome::Skipped)
            .count()
    }
}

fn seed_triangle(g: &mut Graph, k: CommunityId) -> [NodeId; 3] {
    let tri = [g.add_node(Some(k)), g.add_node(Some(k)), g.add_node(Some(k))];
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        g.add_edge(tri[a], tri[b]).expect("fresh nodes");
    }
    tri
}

/// Step-by-step driver for one generation run.
///
/// [`generate`] is the usual entry point; the individual steps are public so they
/// can be exercised and inspected in isolation.
pub struct Generator {
    params: GenParams,
    graph: Graph,
    index: DegreeIndex,
    rng: RngStream,
    trace: Option<GenTrace>,
}

impl Generator {
    pub fn new(params: GenParams) -> Result<Self, GenError> {
        params.validate()?;
        Ok(Generator {
            params,
            graph: Graph::with_capacity(params.n),
            index: DegreeIndex::new(),
            rng: RngStream::new(params.seed),
            trace: Some(GenTrace {
                communities: params.c,
                ..GenTrace::default()
            }),
        })
    }

    /// Disables trace recording, which saves memory on very large runs.
    pub fn without_trace(mut self) -> Self {
        self.trace = None;
        self
    }

    pub fn params(&self) -> &GenParams {
        &self.params
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn index(&self) -> &DegreeIndex {
        &self.index
    }

    pub fn trace(&self) -> Option<&GenTrace> {
        self.trace.as_ref()
    }

    pub fn into_parts(self) -> (Graph, Option<GenTrace>) {
        (self.graph, self.trace)
    }

    fn connect(&mut self, u: NodeId, v: NodeId) -> bool {
        let added = self.graph.add_edge(u, v).expect("generator only links known distinct nodes");
        if added {
            self.index.record_edge(u, v);
        }
        added
    }

    fn new_node(&mut self, community: CommunityId) -> NodeId {
        let u = self.graph.add_node(Some(community));
        self.index.add_node(u, Some(community));
        u
    }

    /// Creates the `c` labeled seed triangles and joins every pair of them with one
    /// edge between uniformly chosen members. Must run on an empty graph.
    pub fn seed_phase(&mut self) {
        assert!(self.graph.is_empty(), "seed phase runs on an empty graph");
        let c = self.params.c;
        for k in 0..c {
            let k = CommunityId(k as u32);
            let tri = [self.new_node(k), self.new_node(k), self.new_node(k)];
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                self.connect(tri[a], tri[b]);
            }
        }
        for a in 0..c {
            for b in a + 1..c {
                let u = NodeId::from(3 * a + self.rng.below(3) as usize);
                let v = NodeId::from(3 * b + self.rng.below(3) as usize);
                self.connect(u, v);
                if let Some(t) = self.trace.as_mut() {
                    t.seed_inter_edges.push((u, v));
                }
            }
        }
    }

    /// Adds one node: anchor by global preferential attachment (outside
    /// `forbidden` when given), then `m - 1` further edges inside the anchor's
    /// community. Returns the new node and its community.
    pub fn attach_new_node(&mut self, forbidden: Option<CommunityId>) -> (NodeId, CommunityId) {
        let anchor = match forbidden {
            None => self.index.sample(&mut self.rng),
            Some(f) => self.index.sample_outside(f, ANCHOR_REDRAW_CAP, &mut self.rng),
        }
        .expect("graph has edges outside the forbidden community");
        let community = self.graph.label_of(anchor).expect("generated nodes are labeled");
        let u = self.new_node(community);
        self.connect(u, anchor);

        let m = self.params.m;
        let branch = if m == 1 {
            Branch::AnchorOnly
        } else if self.rng.bernoulli(self.params.p_t).expect("validated probability") {
            Branch::Triad
        } else {
            Branch::Community
        };

        // the new node and everything it already links to
        let mut exclude = Vec::with_capacity(m + 1);
        exclude.extend([u, anchor]);
        let mut fallbacks = 0;
        let mut shortfall = 0;
        for _ in 1..m {
            let target = match branch {
                Branch::Triad => self
                    .index
                    .sample_neighbor(&self.graph, anchor, community, &exclude, &mut self.rng)
                    .or_else(|_| {
                        fallbacks += 1;
                        self.index.sample_in_community(community, &exclude, &mut self.rng)
                    }),
                _ => self.index.sample_in_community(community, &exclude, &mut self.rng),
            };
            match target {
                Ok(v) => {
                    self.connect(u, v);
                    exclude.push(v);
                }
                Err(SamplingError::NoEligible) => shortfall += 1,
                Err(e) => unreachable!("community sampling failed: {e}"),
            }
        }
        if shortfall > 0 {
            log::debug!("node {u}: {shortfall} edge(s) short of m={m} in community {community}");
        }

        if let Some(t) = self.trace.as_mut() {
            t.steps.push(TraceStep {
                node: u,
                anchor,
                community,
                branch,
                extra: exclude[2..].to_vec(),
                fallbacks,
                shortfall,
                inter: InterOutcome::NotAttempted,
            });
        }
        (u, community)
    }

    /// With probability `p_c`, links a degree-weighted member of `a` with one of `b`.
    /// Pairs that are already linked are redrawn; returns whether an edge was added.
    pub fn inter_cluster_step(&mut self, a: CommunityId, b: CommunityId, p_c: f64) -> bool {
        assert_ne!(a, b, "inter-community step needs two distinct communities");
        let outcome = self.draw_inter_edge(a, b, p_c);
        if let Some(step) = self.trace.as_mut().and_then(|t| t.steps.last_mut()) {
            step.inter = outcome;
        }
        matches!(outcome, InterOutcome::Added(..))
    }

    fn draw_inter_edge(&mut self, a: CommunityId, b: CommunityId, p_c: f64) -> InterOutcome {
        if !self.rng.bernoulli(p_c).expect("probability in [0, 1]") {
            return InterOutcome::NotDrawn;
        }
        for _ in 0..INTER_EDGE_ATTEMPTS {
            let (Ok(u), Ok(v)) = (
                self.index.sample_in_community(a, &[], &mut self.rng),
                self.index.sample_in_community(b, &[], &mut self.rng),
            ) else {
                return InterOutcome::Skipped;
            };
            if self.connect(u, v) {
                return InterOutcome::Added(u, v);
            }
        }
        log::debug!("inter-community edge between {a} and {b} skipped after {INTER_EDGE_ATTEMPTS} attempts");
        InterOutcome::Skipped
    }

    /// Runs the growth loop until the graph has `n` nodes.
    pub fn run(&mut self) {
        if self.graph.is_empty() {
            self.seed_phase();
        }
        let multi = self.params.c > 1;
        let mut previous: Option<CommunityId> = None;
        while self.graph.node_count() < self.params.n {
            let forbidden = if multi { previous } else { None };
            let (_, community) = self.attach_new_node(forbidden);
            if let Some(prev) = previous.filter(|_| multi) {
                self.inter_cluster_step(prev, community, self.params.p_c);
            }
            previous = Some(community);
        }
    }
}

/// Generates a graph and the trace of every decision taken.
pub fn generate(params: &GenParams) -> Result<(Graph, GenTrace), GenError> {
    let mut gen = Generator::new(*params)?;
    gen.run();
    let (graph, trace) = gen.into_parts();
    Ok((graph, trace.expect("trace enabled")))
}

/// Generates a graph without recording a trace.
pub fn generate_graph(params: &GenParams) -> Result<Graph, GenError> {
    let mut gen = Generator::new(*params)?.without_trace();
    gen.run();
    Ok(gen.into_parts().0)
}

/// Single-community growth: preferential attachment with triad formation.
pub fn generate_holme_kim(n: usize, m: usize, p_t: f64, seed: u64) -> Result<Graph, GenError> {
    generate_graph(&GenParams::holme_kim(n, m, p_t, seed))
}
