use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A vertex of the network. Processing nodes and cloud nodes live in
/// separate index spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeId {
    Proc(usize),
    Cloud(usize),
}

impl NodeId {
    pub fn is_cloud(self) -> bool {
        matches!(self, NodeId::Cloud(_))
    }

    pub fn index(self) -> usize {
        match self {
            NodeId::Proc(i) | NodeId::Cloud(i) => i,
        }
    }

    /// Processing index, panicking on a cloud node.
    pub fn proc(self) -> usize {
        match self {
            NodeId::Proc(i) => i,
            NodeId::Cloud(c) => panic!("expected a processing node, got cloud c{c}"),
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Proc(i) => write!(f, "p{i}"),
            NodeId::Cloud(c) => write!(f, "c{c}"),
        }
    }
}

/// One way a [`NetworkGraph`] can be malformed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    CloudCloudLink(NodeId, NodeId),
    ZeroBandwidth(NodeId, NodeId),
    SelfLoop(NodeId),
    UnknownNode(NodeId),
    NoCloudAccess(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CloudCloudLink(u, v) => write!(f, "cloud-cloud link {u}->{v}"),
            Violation::ZeroBandwidth(u, v) => write!(f, "zero bandwidth on link {u}->{v}"),
            Violation::SelfLoop(u) => write!(f, "self-loop at {u}"),
            Violation::UnknownNode(u) => write!(f, "unknown node {u}"),
            Violation::NoCloudAccess(i) => write!(f, "node p{i} cannot reach any cloud node"),
        }
    }
}

/// Directed graph `G = (V, E, w)` with integral bandwidths in bits per round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkGraph {
    processing_count: usize,
    cloud_count: usize,
    links: BTreeMap<(NodeId, NodeId), u64>,
}

impl NetworkGraph {
    pub fn new(processing_count: usize, cloud_count: usize) -> Self {
        NetworkGraph {
            processing_count,
            cloud_count,
            links: BTreeMap::new(),
        }
    }

    pub fn processing_count(&self) -> usize {
        self.processing_count
    }

    pub fn cloud_count(&self) -> usize {
        self.cloud_count
    }

    pub fn node_count(&self) -> usize {
        self.processing_count + self.cloud_count
    }

    /// Dense index: processing nodes first, then clouds.
    pub fn dense(&self, v: NodeId) -> usize {
        match v {
            NodeId::Proc(i) => i,
            NodeId::Cloud(c) => self.processing_count + c,
        }
    }

    pub fn from_dense(&self, k: usize) -> NodeId {
        if k < self.processing_count {
            NodeId::Proc(k)
        } else {
            NodeId::Cloud(k - self.processing_count)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.processing_count)
            .map(NodeId::Proc)
            .chain((0..self.cloud_count).map(NodeId::Cloud))
    }

    pub fn contains(&self, v: NodeId) -> bool {
        match v {
            NodeId::Proc(i) => i < self.processing_count,
            NodeId::Cloud(c) => c < self.cloud_count,
        }
    }

    /// Inserts or replaces the directed link `u -> v`.
    pub fn set_link(&mut self, u: NodeId, v: NodeId, w: u64) {
        self.links.insert((u, v), w);
    }

    pub fn set_symmetric(&mut self, u: NodeId, v: NodeId, w: u64) {
        self.set_link(u, v, w);
        self.set_link(v, u, w);
    }

    /// Connects processing node `i` to `cloud` with separate up/down capacities.
    pub fn set_cloud_link(&mut self, i: usize, cloud: usize, up: u64, down: u64) {
        self.set_link(NodeId::Proc(i), NodeId::Cloud(cloud), up);
        self.set_link(NodeId::Cloud(cloud), NodeId::Proc(i), down);
    }

    pub fn bandwidth(&self, u: NodeId, v: NodeId) -> Option<u64> {
        self.links.get(&(u, v)).copied()
    }

    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.links.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn out_links(&self, u: NodeId) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.links
            .range((u, NodeId::Proc(0))..=(u, NodeId::Cloud(usize::MAX)))
            .map(|(&(_, v), &w)| (v, w))
    }

    /// Uplink capacity of processing node `i` to cloud 0, zero if absent.
    pub fn up(&self, i: usize) -> u64 {
        self.bandwidth(NodeId::Proc(i), NodeId::Cloud(0)).unwrap_or(0)
    }

    pub fn down(&self, i: usize) -> u64 {
        self.bandwidth(NodeId::Cloud(0), NodeId::Proc(i)).unwrap_or(0)
    }

    /// Local (processing-to-processing) out-neighbours of `i`.
    pub fn local_neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.out_links(NodeId::Proc(i)).filter_map(|(v, w)| match v {
            NodeId::Proc(j) => Some((j, w)),
            NodeId::Cloud(_) => None,
        })
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (u, v, w) in self.links() {
            for x in [u, v] {
                if !self.contains(x) {
                    out.push(Violation::UnknownNode(x));
                }
            }
            if u == v {
                out.push(Violation::SelfLoop(u));
            }
            if u.is_cloud() && v.is_cloud() {
                out.push(Violation::CloudCloudLink(u, v));
            }
            if w == 0 {
                out.push(Violation::ZeroBandwidth(u, v));
            }
        }
        if out.is_empty() {
            let reach = self.can_reach_cloud();
            out.extend(
                (0..self.processing_count)
                    .filter(|&i| !reach[i])
                    .map(Violation::NoCloudAccess),
            );
        }
        out
    }

    /// For each processing node, whether some cloud is reachable along
    /// positive-bandwidth links.
    fn can_reach_cloud(&self) -> Vec<bool> {
        let mut reach = vec![false; self.node_count()];
        let mut queue = VecDeque::new();
        for c in 0..self.cloud_count {
            let k = self.dense(NodeId::Cloud(c));
            reach[k] = true;
            queue.push_back(NodeId::Cloud(c));
        }
        let mut rev: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (u, v, w) in self.links() {
            if w > 0 {
                rev.entry(v).or_default().push(u);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in rev.get(&v).into_iter().flatten() {
                if self.contains(u) && !reach[self.dense(u)] {
                    reach[self.dense(u)] = true;
                    queue.push_back(u);
                }
            }
        }
        reach.truncate(self.processing_count);
        reach
    }

    /// The subgraph on `members` plus every cloud. Node ids are kept, so
    /// non-members stay present but isolated.
    pub fn restricted_to(&self, members: &BTreeSet<usize>) -> NetworkGraph {
        let keep = |x: NodeId| match x {
            NodeId::Proc(i) => members.contains(&i),
            NodeId::Cloud(_) => true,
        };
        NetworkGraph {
            processing_count: self.processing_count,
            cloud_count: self.cloud_count,
            links: self
                .links
                .iter()
                .filter(|((u, v), _)| keep(*u) && keep(*v))
                .map(|(&k, &w)| (k, w))
                .collect(),
        }
    }

    /// Every link flipped, so `w'(v,u) = w(u,v)`.
    pub fn reversed(&self) -> NetworkGraph {
        NetworkGraph {
            processing_count: self.processing_count,
            cloud_count: self.cloud_count,
            links: self.links.iter().map(|(&(u, v), &w)| ((v, u), w)).collect(),
        }
    }

    /// Hop distances from `src` over local links, restricted to `within` when
    /// given. Unreachable nodes get `None`.
    pub fn local_distances(&self, src: usize, within: Option<&BTreeSet<usize>>) -> Vec<Option<usize>> {
        let allowed = |i: usize| within.is_none_or(|m| m.contains(&i));
        let mut dist = vec![None; self.processing_count];
        if !allowed(src) {
            return dist;
        }
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for (v, w) in self.local_neighbors(u) {
                if w > 0 && allowed(v) && dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// BFS parent pointers rooted at `root` inside `within`; neighbours are
    /// visited in increasing index order.
    pub fn bfs_tree(&self, root: usize, within: &BTreeSet<usize>) -> BTreeMap<usize, Option<usize>> {
        let mut parent = BTreeMap::new();
        parent.insert(root, None);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for (v, w) in self.local_neighbors(u) {
                if w > 0 && within.contains(&v) && !parent.contains_key(&v) {
                    parent.insert(v, Some(u));
                    queue.push_back(v);
                }
            }
        }
        parent
    }

    /// Hop diameter of the local subgraph induced by `members`, or `None`
    /// when it is disconnected.
    pub fn induced_diameter(&self, members: &BTreeSet<usize>) -> Option<usize> {
        let mut best = 0;
        for &i in members {
            let dist = self.local_distances(i, Some(members));
            for &j in members {
                best = best.max(dist[j]?);
            }
        }
        Some(best)
    }

    /// Sum of uplink capacities to cloud 0 over `members`.
    pub fn cloud_bandwidth<'a>(&self, members: impl IntoIterator<Item = &'a usize>) -> u64 {
        members.into_iter().map(|&i| self.up(i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloud_cloud_link_is_reported() {
        let mut g = NetworkGraph::new(1, 2);
        g.set_cloud_link(0, 0, 1, 1);
        g.set_link(NodeId::Cloud(0), NodeId::Cloud(1), 3);
        let v = g.validate();
        assert!(v.contains(&Violation::CloudCloudLink(NodeId::Cloud(0), NodeId::Cloud(1))));
        assert!(v.iter().any(|x| x.to_string().contains("cloud-cloud link")));
    }

    #[test]
    fn zero_bandwidth_is_reported() {
        let mut g = NetworkGraph::new(2, 1);
        g.set_cloud_link(0, 0, 1, 1);
        g.set_cloud_link(1, 0, 1, 1);
        g.set_link(NodeId::Proc(0), NodeId::Proc(1), 0);
        assert_eq!(
            g.validate(),
            vec![Violation::ZeroBandwidth(NodeId::Proc(0), NodeId::Proc(1))]
        );
    }

    #[test]
    fn transitive_cloud_access_is_enough() {
        let mut g = NetworkGraph::new(2, 1);
        g.set_cloud_link(1, 0, 1, 1);
        g.set_symmetric(NodeId::Proc(0), NodeId::Proc(1), 2);
        assert!(g.validate().is_empty());
        let mut h = NetworkGraph::new(2, 1);
        h.set_cloud_link(1, 0, 1, 1);
        assert_eq!(h.validate(), vec![Violation::NoCloudAccess(0)]);
    }

    #[test]
    fn reversed_swaps_directions() {
        let mut g = NetworkGraph::new(1, 1);
        g.set_cloud_link(0, 0, 3, 5);
        let r = g.reversed();
        assert_eq!(r.up(0), 5);
        assert_eq!(r.down(0), 3);
    }

    #[test]
    fn out_links_are_scoped_to_the_source() {
        let mut g = NetworkGraph::new(3, 1);
        g.set_symmetric(NodeId::Proc(0), NodeId::Proc(1), 1);
        g.set_symmetric(NodeId::Proc(1), NodeId::Proc(2), 1);
        g.set_cloud_link(1, 0, 2, 2);
        let outs: Vec<_> = g.out_links(NodeId::Proc(1)).map(|(v, _)| v).collect();
        assert_eq!(outs, vec![NodeId::Proc(0), NodeId::Proc(2), NodeId::Cloud(0)]);
    }
}
