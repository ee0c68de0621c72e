use super::maxflow::{MaxFlow, INF};
use crate::model::{NetworkGraph, NodeId};

/// An arc of the time-expanded graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandedArc {
    /// `(v,t) -> (v,t+1)`, unbounded.
    Holdover { v: NodeId, t: u32 },
    /// `(u,j-1) -> (v,j)` with capacity `w(u,v)`: bits sent in round `j`.
    Transit { u: NodeId, v: NodeId, j: u32, cap: u64 },
}

/// Layers `0..=T` of copies of every node.
#[derive(Clone, Debug)]
pub struct TimeExpandedGraph<'a> {
    base: &'a NetworkGraph,
    horizon: u32,
}

impl<'a> TimeExpandedGraph<'a> {
    pub fn new(base: &'a NetworkGraph, horizon: u32) -> Self {
        TimeExpandedGraph { base, horizon }
    }

    pub fn base(&self) -> &NetworkGraph {
        self.base
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn layer_count(&self) -> usize {
        self.horizon as usize + 1
    }

    /// Dense index of `(v, t)`.
    pub fn index(&self, v: NodeId, t: u32) -> usize {
        t as usize * self.base.node_count() + self.base.dense(v)
    }

    pub fn vertex_count(&self) -> usize {
        self.layer_count() * self.base.node_count()
    }

    /// Every arc, layer by layer: the transit arcs leaving layer `t` in link
    /// order, then the holdovers of layer `t`. Sending early is tried first.
    pub fn arcs(&self) -> impl Iterator<Item = ExpandedArc> + '_ {
        (0..self.horizon).flat_map(move |t| {
            let transit = self.base.links().map(move |(u, v, cap)| ExpandedArc::Transit {
                u,
                v,
                j: t + 1,
                cap,
            });
            let hold = self.base.nodes().map(move |v| ExpandedArc::Holdover { v, t });
            transit.chain(hold)
        })
    }

    /// Builds the max-flow network with two extra vertices, a super source
    /// and a super sink, returned along with the ids of the transit arcs.
    pub(crate) fn network(&self) -> ExpandedNetwork {
        let n = self.vertex_count();
        let mut net = MaxFlow::new(n + 2);
        let mut transit = Vec::new();
        for arc in self.arcs() {
            match arc {
                ExpandedArc::Holdover { v, t } => {
                    net.add_arc(self.index(v, t), self.index(v, t + 1), INF);
                }
                ExpandedArc::Transit { u, v, j, cap } => {
                    let id = net.add_arc(self.index(u, j - 1), self.index(v, j), cap);
                    transit.push((u, v, j, id));
                }
            }
        }
        ExpandedNetwork {
            net,
            transit,
            source: n,
            sink: n + 1,
        }
    }
}

pub(crate) struct ExpandedNetwork {
    pub net: MaxFlow,
    pub transit: Vec<(NodeId, NodeId, u32, usize)>,
    pub source: usize,
    pub sink: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_path_with_cloud;

    #[test]
    fn layer_and_arc_counts() {
        let g = build_path_with_cloud(3, 1, 2);
        let te = TimeExpandedGraph::new(&g, 4);
        assert_eq!(te.layer_count(), 5);
        let arcs: Vec<_> = te.arcs().collect();
        let holds = arcs
            .iter()
            .filter(|a| matches!(a, ExpandedArc::Holdover { .. }))
            .count();
        assert_eq!(holds, 4 * g.node_count());
        assert_eq!(arcs.len() - holds, 4 * g.links().count());
        for a in arcs {
            if let ExpandedArc::Transit { u, v, cap, .. } = a {
                assert_eq!(g.bandwidth(u, v), Some(cap));
            }
        }
    }
}
