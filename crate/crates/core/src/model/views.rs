use std::collections::BTreeSet;

use super::graph::{NetworkGraph, NodeId};
use crate::error::{Error, Result};

/// An `s`-fat-links network: symmetric local links of bandwidth at least
/// `s`, a single cloud, and a connected processing subgraph.
#[derive(Clone, Debug)]
pub struct FatLinksView {
    graph: NetworkGraph,
    s: u64,
    diameter: usize,
}

impl FatLinksView {
    pub fn new(graph: NetworkGraph, s: u64) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if let Some(v) = graph.validate().first() {
            return bad(v.to_string());
        }
        if graph.cloud_count() != 1 {
            return bad(format!("fat links need exactly one cloud, got {}", graph.cloud_count()));
        }
        for (u, v, w) in graph.links() {
            if u.is_cloud() || v.is_cloud() {
                continue;
            }
            if graph.bandwidth(v, u) != Some(w) {
                return bad(format!("asymmetric local link {u}->{v}"));
            }
            if w < s {
                return bad(format!("local link {u}->{v} has bandwidth {w} < s = {s}"));
            }
        }
        let all: BTreeSet<usize> = (0..graph.processing_count()).collect();
        let Some(diameter) = graph.induced_diameter(&all) else {
            return bad("processing subgraph is disconnected".into());
        };
        Ok(FatLinksView { graph, s, diameter })
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.graph.processing_count()
    }

    /// `Diam(G_p)` in hops.
    pub fn diameter(&self) -> usize {
        self.diameter
    }

    /// Cloud uplink `bc(i)`.
    pub fn bc(&self, i: usize) -> u64 {
        self.graph.up(i)
    }
}

/// A wheel: ring `0 -> 1 -> ... -> n-1 -> 0` plus a hub cloud linked to
/// every node. Both ring and cloud links are symmetric.
#[derive(Clone, Debug)]
pub struct WheelView {
    graph: NetworkGraph,
    cloud_bandwidths: Vec<u64>,
    ring_bandwidths: Vec<u64>,
}

impl WheelView {
    /// Recognises a wheel in `graph`.
    pub fn new(graph: NetworkGraph) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if let Some(v) = graph.validate().first() {
            return bad(v.to_string());
        }
        let n = graph.processing_count();
        if n < 3 {
            return bad(format!("a wheel needs n >= 3, got {n}"));
        }
        if graph.cloud_count() != 1 {
            return bad("a wheel has exactly one cloud".into());
        }
        let mut cloud_bandwidths = Vec::with_capacity(n);
        let mut ring_bandwidths = Vec::with_capacity(n);
        for i in 0..n {
            let (up, down) = (graph.up(i), graph.down(i));
            if up == 0 || up != down {
                return bad(format!("cloud link of p{i} must exist and be symmetric"));
            }
            cloud_bandwidths.push(up);
            let next = (i + 1) % n;
            let fwd = graph.bandwidth(NodeId::Proc(i), NodeId::Proc(next));
            let back = graph.bandwidth(NodeId::Proc(next), NodeId::Proc(i));
            match (fwd, back) {
                (Some(a), Some(b)) if a == b => ring_bandwidths.push(a),
                _ => return bad(format!("ring link p{i}-p{next} missing or asymmetric")),
            }
            let prev = (i + n - 1) % n;
            if graph.local_neighbors(i).any(|(j, _)| j != next && j != prev) {
                return bad(format!("p{i} has a chord; not a wheel"));
            }
        }
        Ok(WheelView {
            graph,
            cloud_bandwidths,
            ring_bandwidths,
        })
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.cloud_bandwidths.len()
    }

    /// `β_c(i)`.
    pub fn bc(&self, i: usize) -> u64 {
        self.cloud_bandwidths[i % self.n()]
    }

    /// Bandwidth of the ring link between `i` and `i+1 (mod n)`.
    pub fn ring(&self, i: usize) -> u64 {
        self.ring_bandwidths[i % self.n()]
    }

    pub fn cloud_bandwidths(&self) -> &[u64] {
        &self.cloud_bandwidths
    }

    pub fn ring_bandwidths(&self) -> &[u64] {
        &self.ring_bandwidths
    }
}

/// Builds a wheel from per-node cloud bandwidths and per-link ring
/// bandwidths, `ring[i]` being the link `i - i+1`.
pub fn build_wheel(cloud: &[u64], ring: &[u64]) -> Result<WheelView> {
    if cloud.len() != ring.len() {
        return Err(Error::InvalidGraph("cloud and ring lengths differ".into()));
    }
    let n = cloud.len();
    if n < 3 {
        return Err(Error::InvalidGraph(format!("a wheel needs n >= 3, got {n}")));
    }
    let mut g = NetworkGraph::new(n, 1);
    for i in 0..n {
        g.set_cloud_link(i, 0, cloud[i], cloud[i]);
        g.set_symmetric(NodeId::Proc(i), NodeId::Proc((i + 1) % n), ring[i]);
    }
    WheelView::new(g)
}

pub fn build_uniform_wheel(n: usize, bc: u64, bl: u64) -> Result<WheelView> {
    build_wheel(&vec![bc; n], &vec![bl; n])
}

/// Path `0 - 1 - ... - n-1`, every node with cloud bandwidth `x` both ways.
pub fn build_path_with_cloud(n: usize, x: u64, local: u64) -> NetworkGraph {
    let mut g = NetworkGraph::new(n, 1);
    for i in 0..n {
        g.set_cloud_link(i, 0, x, x);
        if i + 1 < n {
            g.set_symmetric(NodeId::Proc(i), NodeId::Proc(i + 1), local);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_wheel_shape() {
        let w = build_uniform_wheel(8, 3, 8).unwrap();
        assert_eq!(w.n(), 8);
        assert!(w.graph().validate().is_empty());
        assert_eq!(w.bc(5), 3);
        assert_eq!(w.ring(7), 8);
        assert_eq!(w.graph().local_neighbors(0).count(), 2);
        let tiny = build_uniform_wheel(3, 1, 1).unwrap();
        assert_eq!(tiny.graph().links().count(), 12);
    }

    #[test]
    fn small_wheels_are_rejected() {
        assert!(build_uniform_wheel(2, 1, 1).is_err());
    }

    #[test]
    fn asymmetric_ring_rejected() {
        let mut g = build_uniform_wheel(4, 2, 2).unwrap().graph().clone();
        g.set_link(NodeId::Proc(0), NodeId::Proc(1), 5);
        assert!(WheelView::new(g).is_err());
    }

    #[test]
    fn path_shapes() {
        let g = build_path_with_cloud(16, 1, 256);
        assert!(g.validate().is_empty());
        assert_eq!(g.links().count(), 16 * 2 + 15 * 2);
        let single = build_path_with_cloud(1, 4, 1);
        assert_eq!(single.up(0), 4);
        assert_eq!(single.local_neighbors(0).count(), 0);
        let fat = FatLinksView::new(build_path_with_cloud(4, 2, 8), 8).unwrap();
        assert_eq!(fat.diameter(), 3);
    }

    #[test]
    fn fat_links_checks() {
        assert!(FatLinksView::new(build_path_with_cloud(4, 2, 7), 8).is_err());
        let mut g = build_path_with_cloud(3, 2, 8);
        g.set_link(NodeId::Proc(0), NodeId::Proc(1), 9);
        assert!(FatLinksView::new(g, 8).is_err());
        let mut split = NetworkGraph::new(2, 1);
        split.set_cloud_link(0, 0, 1, 1);
        split.set_cloud_link(1, 0, 1, 1);
        assert!(FatLinksView::new(split, 1).is_err());
    }
}
