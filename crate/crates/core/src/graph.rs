//! Undirected simple graphs with community labels, and node partitions.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node index, assigned in insertion order starting at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    #[inline]
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32 range"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ground-truth community label in `0..c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommunityId(pub u32);

impl CommunityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Undirected simple graph.
///
/// Adjacency lists are kept sorted, so membership checks are `O(log d)` and
/// [`Graph::neighbors`] yields ids in ascending order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    labels: Vec<Option<CommunityId>>,
    edge_count: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Graph {
            adjacency: Vec::with_capacity(nodes),
            labels: Vec::with_capacity(nodes),
            edge_count: 0,
        }
    }

    /// Graph with `n` unlabeled isolated nodes.
    pub fn with_nodes(n: usize) -> Self {
        let mut g = Self::with_capacity(n);
        for _ in 0..n {
            g.add_node(None);
        }
        g
    }

    /// Builds a graph on `n` nodes from an edge iterator, skipping duplicates.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::with_nodes(n);
        for (u, v) in edges {
            g.add_edge(NodeId::from(u), NodeId::from(v))?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, label: Option<CommunityId>) -> NodeId {
        let id = NodeId::from(self.adjacency.len());
        self.adjacency.push(Vec::new());
        self.labels.push(label);
        id
    }

    /// Inserts the undirected edge `{u, v}`. Returns `false` if it already existed.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let pos_u = match self.adjacency[u.index()].binary_search(&v) {
            Ok(_) => return Ok(false),
            Err(pos) => pos,
        };
        self.adjacency[u.index()].insert(pos_u, v);
        let adj_v = &mut self.adjacency[v.index()];
        let pos_v = adj_v.binary_search(&u).unwrap_err();
        adj_v.insert(pos_v, u);
        self.edge_count += 1;
        Ok(true)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u.index())
            .is_some_and(|adj| adj.binary_search(&v).is_ok())
    }

    pub fn degree(&self, u: NodeId) -> Result<usize, GraphError> {
        self.check(u)?;
        Ok(self.adjacency[u.index()].len())
    }

    /// Neighbors of `u` in ascending id order.
    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId], GraphError> {
        self.check(u)?;
        Ok(&self.adjacency[u.index()])
    }

    pub fn label(&self, u: NodeId) -> Result<Option<CommunityId>, GraphError> {
        self.check(u)?;
        Ok(self.labels[u.index()])
    }

    /// Assigns a label to an unlabeled node. Existing labels are never overwritten;
    /// returns `false` when the node was already labeled.
    pub fn set_label(&mut self, u: NodeId, label: CommunityId) -> Result<bool, GraphError> {
        self.check(u)?;
        let slot = &mut self.labels[u.index()];
        if slot.is_some() {
            return Ok(false);
        }
        *slot = Some(label);
        Ok(true)
    }

    pub fn labels(&self) -> &[Option<CommunityId>] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.adjacency.len()).map(NodeId::from)
    }

    /// Each undirected edge once as `(u, v)` with `u < v`, ordered by `(u, v)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, adj)| {
            let u = NodeId::from(u);
            adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    /// Unchecked adjacency access for hot loops. Panics on an unknown id.
    #[inline]
    pub(crate) fn adj(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u.index()]
    }

    #[inline]
    pub(crate) fn deg(&self, u: NodeId) -> usize {
        self.adjacency[u.index()].len()
    }

    #[inline]
    pub(crate) fn label_of(&self, u: NodeId) -> Option<CommunityId> {
        self.labels[u.index()]
    }

    /// True when every node is reachable from node 0. The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in self.adj(u) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == n
    }

    /// Subgraph induced by `members`. Node `i` of the result is `members[i]`.
    pub fn induced_subgraph(&self, members: &[NodeId]) -> Graph {
        let mut local = vec![u32::MAX; self.node_count()];
        for (i, &u) in members.iter().enumerate() {
            local[u.index()] = i as u32;
        }
        let mut sub = Graph::with_capacity(members.len());
        for &u in members {
            sub.add_node(self.label_of(u));
        }
        for (i, &u) in members.iter().enumerate() {
            let mut row: Vec<NodeId> = self
                .adj(u)
                .iter()
                .filter_map(|v| match local[v.index()] {
                    u32::MAX => None,
                    j => Some(NodeId(j)),
                })
                .collect();
            row.sort_unstable();
            sub.edge_count += row.len();
            sub.adjacency[i] = row;
        }
        sub.edge_count /= 2;
        sub
    }

    /// Checks the structural invariants: sorted duplicate-free adjacency, no self-loops,
    /// symmetry and the handshake identity. Intended for tests and debugging.
    pub fn audit(&self) -> Result<(), String> {
        let mut degree_sum = 0usize;
        for (u, adj) in self.adjacency.iter().enumerate() {
            let u = NodeId::from(u);
            degree_sum += adj.len();
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("adjacency of {u} is not strictly sorted"));
            }
            for &v in adj {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if v.index() >= self.node_count() {
                    return Err(format!("edge {u}-{v} points outside the graph"));
                }
                if self.adj(v).binary_search(&u).is_err() {
                    return Err(format!("edge {u}-{v} is not symmetric"));
                }
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(format!(
                "degree sum {degree_sum} does not equal twice the edge count {}",
                self.edge_count
            ));
        }
        Ok(())
    }

    fn check(&self, u: NodeId) -> Result<(), GraphError> {
        if u.index() < self.adjacency.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(u))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    GroundTruth,
    Detected,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("node {0} has no community label")]
    Unlabeled(NodeId),
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    SizeMismatch { partition: usize, graph: usize },
}

/// Assignment of every node to exactly one non-empty group.
///
/// Group ids are dense. When built from arbitrary labels they are renumbered in
/// ascending order of the original label, so ground-truth community `k` keeps id `k`
/// whenever all labels `0..c` are in use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
    groups: Vec<Vec<NodeId>>,
    kind: PartitionKind,
}

impl Partition {
    pub fn from_assignment<T>(labels: &[T], kind: PartitionKind) -> Self
    where
        T: Copy + Ord,
    {
        let mut distinct: Vec<T> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment: Vec<u32> = labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap() as u32)
            .collect();
        let mut groups = vec![Vec::new(); distinct.len()];
        for (u, &g) in assignment.iter().enumerate() {
            groups[g as usize].push(NodeId::from(u));
        }
        Partition {
            assignment,
            groups,
            kind,
        }
    }

    /// Ground-truth partition read from the graph's community labels.
    pub fn from_labels(g: &Graph) -> Result<Self, PartitionError> {
        let labels = g
            .labels()
            .iter()
            .enumerate()
            .map(|(u, l)| l.ok_or(PartitionError::Unlabeled(NodeId::from(u))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_assignment(&labels, PartitionKind::GroundTruth))
    }

    pub fn singletons(n: usize, kind: PartitionKind) -> Self {
        let ids: Vec<usize> = (0..n).collect();
        Self::from_assignment(&ids, kind)
    }

    pub fn whole(n: usize, kind: PartitionKind) -> Self {
        Self::from_assignment(&vec![0u32; n], kind)
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    #[inline]
    pub fn group_of(&self, u: NodeId) -> usize {
        self.assignment[u.index()] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn groups(&self) -> &[Vec<NodeId>] {
        &self.groups
    }

    pub fn members(&self, group: usize) -> &[NodeId] {
        &self.groups[group]
    }

    /// Indices of the `k` largest groups, by descending size then ascending index.
    pub fn largest_groups(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.groups.len()).collect();
        order.sort_by(|&a, &b| {
            self.groups[b]
                .len()
                .cmp(&self.groups[a].len())
                .then(a.cmp(&b))
        });
        order.truncate(k);
        order
    }

    pub fn ensure_covers(&self, g: &Graph) -> Result<(), PartitionError> {
        if self.node_count() == g.node_count() {
            Ok(())
        } else {
            Err(PartitionError::SizeMismatch {
                partition: self.node_count(),
                graph: g.node_count(),
            })
        }
    }

    /// Checks that groups are non-empty and consistent with the assignment.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = vec![false; self.assignment.len()];
        for (gi, members) in self.groups.iter().enumerate() {
            if members.is_empty() {
                return Err(format!("group {gi} is empty"));
            }
            for &u in members {
                if self.assignment.get(u.index()) != Some(&(gi as u32)) {
                    return Err(format!("node {u} listed in group {gi} but assigned elsewhere"));
                }
                if std::mem::replace(&mut seen[u.index()], true) {
                    return Err(format!("node {u} listed twice"));
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(u) => Err(format!("node {u} is in no group")),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn add_node_assigns_sequential_ids() {
        let mut g = Graph::new();
        let a = g.add_node(None);
        assert_eq!(a, NodeId(0));
        assert_eq!(g.degree(a).unwrap(), 0);
        g.add_node(None);
        g.add_node(None);
        assert_eq!(g.add_node(Some(CommunityId(2))), NodeId(3));
        assert_eq!(g.label(NodeId(3)).unwrap(), Some(CommunityId(2)));
    }

    #[test]
    fn add_edge_is_simple() {
        let mut g = Graph::with_nodes(2);
        assert!(g.add_edge(NodeId(0), NodeId(1)).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert!(!g.add_edge(NodeId(0), NodeId(1)).unwrap());
        assert!(!g.add_edge(NodeId(1), NodeId(0)).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert_eq!(
            g.add_edge(NodeId(0), NodeId(0)),
            Err(GraphError::SelfLoop(NodeId(0)))
        );
        assert_eq!(
            g.add_edge(NodeId(0), NodeId(7)),
            Err(GraphError::UnknownNode(NodeId(7)))
        );
    }

    #[test]
    fn degrees() {
        let mut g = Graph::with_nodes(1);
        assert_eq!(g.degree(NodeId(0)).unwrap(), 0);
        assert_eq!(triangle().degree(NodeId(1)).unwrap(), 2);
        g = Graph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(g.degree(NodeId(0)).unwrap(), 4);
        assert!(g.degree(NodeId(5)).is_err());
    }

    #[test]
    fn neighbors_ascending() {
        assert_eq!(triangle().neighbors(NodeId(0)).unwrap(), &[NodeId(1), NodeId(2)]);
        assert!(Graph::with_nodes(1).neighbors(NodeId(0)).unwrap().is_empty());
        let path = Graph::from_edges(3, [(1, 2), (0, 1)]).unwrap();
        assert_eq!(path.neighbors(NodeId(1)).unwrap(), &[NodeId(0), NodeId(2)]);
        assert!(path.neighbors(NodeId(3)).is_err());
    }

    #[test]
    fn labels_are_write_once() {
        let mut g = Graph::new();
        let u = g.add_node(None);
        assert!(g.set_label(u, CommunityId(1)).unwrap());
        assert!(!g.set_label(u, CommunityId(4)).unwrap());
        assert_eq!(g.label(u).unwrap(), Some(CommunityId(1)));
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        // two triangles bridged by 2-3
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
            .unwrap();
        let sub = g.induced_subgraph(&[NodeId(2), NodeId(3), NodeId(4), NodeId(5)]);
        assert_eq!(sub.node_count(), 4);
        assert_eq!(sub.edge_count(), 4);
        sub.audit().unwrap();
    }

    #[test]
    fn connectivity() {
        assert!(triangle().is_connected());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().is_connected());
    }

    #[test]
    fn partition_renumbers_by_label_order() {
        let p = Partition::from_assignment(&[7, 3, 7, 9], PartitionKind::Detected);
        assert_eq!(p.assignment(), &[1, 0, 1, 2]);
        assert_eq!(p.members(1), &[NodeId(0), NodeId(2)]);
        assert_eq!(p.largest_groups(2), vec![1, 0]);
        p.audit().unwrap();
    }

    #[test]
    fn partition_from_unlabeled_graph_fails() {
        assert_eq!(
            Partition::from_labels(&triangle()),
            Err(PartitionError::Unlabeled(NodeId(0)))
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn invariants_hold_after_every_mutation(
                ops in prop::collection::vec((0usize..12, 0usize..12), 0..80)
            ) {
                let mut g = Graph::with_nodes(12);
                for (u, v) in ops {
                    let before = g.edge_count();
                    match g.add_edge(NodeId::from(u), NodeId::from(v)) {
                        Ok(true) => prop_assert_eq!(g.edge_count(), before + 1),
                        Ok(false) => prop_assert_eq!(g.edge_count(), before),
                        Err(GraphError::SelfLoop(_)) => prop_assert_eq!(u, v),
                        Err(e) => return Err(TestCaseError::fail(e.to_string())),
                    }
                    prop_assert!(g.audit().is_ok());
                }
            }

            #[test]
            fn neighbor_order_is_content_determined(
                edges in prop::collection::btree_set((0usize..10, 0usize..10), 0..40)
            ) {
                let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
                let forward = Graph::from_edges(10, edges.iter().copied()).unwrap();
                let backward = Graph::from_edges(10, edges.iter().rev().map(|&(u, v)| (v, u))).unwrap();
                prop_assert_eq!(forward, backward);
            }
        }
    }
}
