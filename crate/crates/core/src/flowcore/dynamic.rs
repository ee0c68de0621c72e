use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::expanded::TimeExpandedGraph;
use super::maxflow::INF;
use crate::error::{Error, Result};
use crate::model::{NetworkGraph, NodeId};

/// Integral flow over time. `values[(u, v, j)]` is `f(e, j)`, the bits sent
/// on `e = (u, v)` in round `j ∈ 1..=T`; they reach `v` at layer `j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicFlow {
    pub horizon: u32,
    pub values: BTreeMap<(NodeId, NodeId, u32), u64>,
    /// Initial stock `F(v)` per source.
    pub supplies: BTreeMap<NodeId, u64>,
    /// Final stock per sink.
    pub demands: BTreeMap<NodeId, u64>,
}

/// One entry of the flow dump.
#[derive(Clone, Debug, Serialize)]
pub struct FlowEntry {
    pub round: u32,
    pub edge: String,
    pub bits: u64,
}

impl DynamicFlow {
    /// Flow value `F`.
    pub fn value(&self) -> u64 {
        self.supplies.values().sum()
    }

    pub fn get(&self, u: NodeId, v: NodeId, j: u32) -> u64 {
        self.values.get(&(u, v, j)).copied().unwrap_or(0)
    }

    pub fn dump(&self) -> Vec<FlowEntry> {
        let mut out: Vec<FlowEntry> = self
            .values
            .iter()
            .map(|(&(u, v, j), &bits)| FlowEntry {
                round: j,
                edge: format!("{u}->{v}"),
                bits,
            })
            .collect();
        out.sort_by_key(|e| e.round);
        out
    }

    /// Checks capacities, the prefix rule, and that every node ends with
    /// exactly its demand.
    pub fn validate(&self, graph: &NetworkGraph) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFlow(m));
        let supply_total: u64 = self.supplies.values().sum();
        let demand_total: u64 = self.demands.values().sum();
        if supply_total != demand_total {
            return bad(format!("supply {supply_total} differs from demand {demand_total}"));
        }
        for (&(u, v, j), &x) in &self.values {
            let Some(w) = graph.bandwidth(u, v) else {
                return bad(format!("flow on missing link {u}->{v}"));
            };
            if j == 0 || j > self.horizon {
                return bad(format!("round {j} outside 1..={}", self.horizon));
            }
            if x > w {
                return bad(format!("{x} bits on {u}->{v} in round {j} exceed w = {w}"));
            }
        }
        let mut stock: Vec<u64> = graph
            .nodes()
            .map(|v| self.supplies.get(&v).copied().unwrap_or(0))
            .collect();
        let by_round = self.by_round();
        for j in 1..=self.horizon {
            let mut delta_in = vec![0u64; stock.len()];
            let mut out = vec![0u64; stock.len()];
            for &(u, v, x) in by_round.get(&j).into_iter().flatten() {
                out[graph.dense(u)] += x;
                delta_in[graph.dense(v)] += x;
            }
            for k in 0..stock.len() {
                if out[k] > stock[k] {
                    return bad(format!(
                        "{} sends {} bits in round {j} but holds only {}",
                        graph.from_dense(k),
                        out[k],
                        stock[k]
                    ));
                }
                stock[k] = stock[k] - out[k] + delta_in[k];
            }
        }
        for v in graph.nodes() {
            let want = self.demands.get(&v).copied().unwrap_or(0);
            let have = stock[graph.dense(v)];
            if have != want {
                return bad(format!("{v} ends with {have} bits, expected {want}"));
            }
        }
        Ok(())
    }

    pub(crate) fn by_round(&self) -> BTreeMap<u32, Vec<(NodeId, NodeId, u64)>> {
        let mut out: BTreeMap<u32, Vec<_>> = BTreeMap::new();
        for (&(u, v, j), &x) in &self.values {
            if x > 0 {
                out.entry(j).or_default().push((u, v, x));
            }
        }
        out
    }
}

/// Solves the max flow on the time-expanded graph with the given supplies
/// (capped at `INF` for `None`) and returns the value and the flow.
fn solve(
    graph: &NetworkGraph,
    supplies: &BTreeMap<NodeId, Option<u64>>,
    sink: NodeId,
    horizon: u32,
) -> DynamicFlow {
    let te = TimeExpandedGraph::new(graph, horizon);
    let mut en = te.network();
    for (&v, &cap) in supplies {
        en.net.add_arc(en.source, te.index(v, 0), cap.unwrap_or(INF));
    }
    en.net.add_arc(te.index(sink, horizon), en.sink, INF);
    let value = en.net.run(en.source, en.sink);
    let mut values = BTreeMap::new();
    for &(u, v, j, id) in &en.transit {
        let x = en.net.flow(id);
        if x > 0 {
            values.insert((u, v, j), x);
        }
    }
    let mut flow = DynamicFlow {
        horizon,
        values,
        supplies: BTreeMap::new(),
        demands: BTreeMap::from([(sink, value)]),
    };
    if value == 0 {
        flow.demands.clear();
        return flow;
    }
    // Recover how much each source actually shipped from the stock balance.
    let mut net: BTreeMap<NodeId, i128> = BTreeMap::new();
    for (&(u, v, _), &x) in &flow.values {
        *net.entry(u).or_default() += i128::from(x);
        *net.entry(v).or_default() -= i128::from(x);
    }
    *net.entry(sink).or_default() += i128::from(value);
    for (v, x) in net {
        if x > 0 {
            flow.supplies.insert(v, x as u64);
        }
    }
    flow
}

/// Maximum flow from `source` to `sink` within `horizon` rounds.
pub fn max_flow_over_time(graph: &NetworkGraph, source: NodeId, sink: NodeId, horizon: u32) -> DynamicFlow {
    assert_ne!(source, sink, "source equals sink");
    if horizon == 0 {
        return DynamicFlow::default();
    }
    solve(graph, &BTreeMap::from([(source, None)]), sink, horizon)
}

fn reaches(graph: &NetworkGraph, from: NodeId, to: NodeId) -> bool {
    let mut seen = vec![false; graph.node_count()];
    seen[graph.dense(from)] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            return true;
        }
        for (v, w) in graph.out_links(u) {
            if w > 0 && graph.contains(v) && !seen[graph.dense(v)] {
                seen[graph.dense(v)] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

/// Quickest shipment of all `supplies` to `sink`: the minimal horizon `T*`
/// and a flow realising it. Found by galloping on `T` then binary search.
pub fn evacuation_flow(
    graph: &NetworkGraph,
    supplies: &BTreeMap<NodeId, u64>,
    sink: NodeId,
) -> Result<(u32, DynamicFlow)> {
    let supplies: BTreeMap<NodeId, u64> = supplies
        .iter()
        .filter(|(_, &x)| x > 0)
        .map(|(&v, &x)| (v, x))
        .collect();
    let total: u64 = supplies.values().sum();
    if total == 0 {
        return Ok((0, DynamicFlow::default()));
    }
    for &v in supplies.keys() {
        if v == sink {
            return Err(Error::InfeasibleFlow(format!("{v} is both a source and the sink")));
        }
        if !reaches(graph, v, sink) {
            return Err(Error::InfeasibleFlow(format!("{v} cannot reach {sink}")));
        }
    }
    let caps: BTreeMap<NodeId, Option<u64>> = supplies.iter().map(|(&v, &x)| (v, Some(x))).collect();
    let feasible = |t: u32| {
        let f = solve(graph, &caps, sink, t);
        (f.value() == total).then_some(f)
    };
    let mut hi = 1u32;
    let mut best = loop {
        if let Some(f) = feasible(hi) {
            break f;
        }
        hi = hi.checked_mul(2).ok_or_else(|| Error::InfeasibleFlow("horizon overflow".into()))?;
    };
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match feasible(mid) {
            Some(f) => {
                hi = mid;
                best = f;
            }
            None => lo = mid,
        }
    }
    Ok((hi, best))
}

/// Quickest flow of `demand` bits from `source` to `sink`.
pub fn quickest_flow(
    graph: &NetworkGraph,
    source: NodeId,
    sink: NodeId,
    demand: u64,
) -> Result<(u32, DynamicFlow)> {
    evacuation_flow(graph, &BTreeMap::from([(source, demand)]), sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_path_with_cloud, build_uniform_wheel};

    const C: NodeId = NodeId::Cloud(0);
    const P0: NodeId = NodeId::Proc(0);

    #[test]
    fn single_node_max_flow() {
        let g = build_path_with_cloud(1, 4, 1);
        let f = max_flow_over_time(&g, P0, C, 3);
        assert_eq!(f.value(), 12);
        f.validate(&g).unwrap();
        assert_eq!(max_flow_over_time(&g, P0, C, 0).value(), 0);
    }

    #[test]
    fn single_node_quickest() {
        let g = build_path_with_cloud(1, 4, 1);
        let (t, f) = quickest_flow(&g, P0, C, 10).unwrap();
        assert_eq!(t, 3);
        assert_eq!(f.value(), 10);
        f.validate(&g).unwrap();
        assert_eq!(quickest_flow(&g, P0, C, 0).unwrap().0, 0);
    }

    #[test]
    fn two_node_pipeline() {
        let mut g = NetworkGraph::new(2, 1);
        g.set_symmetric(P0, NodeId::Proc(1), 2);
        g.set_cloud_link(1, 0, 2, 2);
        let (t, f) = quickest_flow(&g, P0, C, 4).unwrap();
        assert_eq!(t, 3);
        f.validate(&g).unwrap();
    }

    #[test]
    fn unreachable_sink_is_infeasible() {
        let mut g = NetworkGraph::new(2, 1);
        g.set_cloud_link(1, 0, 2, 2);
        let err = quickest_flow(&g, P0, C, 4).unwrap_err();
        assert!(err.to_string().contains("p0"), "{err}");
    }

    #[test]
    fn evacuation_examples() {
        let mut g = NetworkGraph::new(2, 1);
        g.set_cloud_link(0, 0, 1, 1);
        g.set_cloud_link(1, 0, 1, 1);
        let sup = BTreeMap::from([(P0, 1), (NodeId::Proc(1), 1)]);
        assert_eq!(evacuation_flow(&g, &sup, C).unwrap().0, 1);

        let w = build_uniform_wheel(4, 1, 4).unwrap();
        let sup: BTreeMap<_, _> = (0..4).map(|i| (NodeId::Proc(i), 2)).collect();
        let (t, f) = evacuation_flow(w.graph(), &sup, C).unwrap();
        assert_eq!(t, 2);
        f.validate(w.graph()).unwrap();
    }

    #[test]
    fn path_example_capacity() {
        let g = build_path_with_cloud(16, 1, 256);
        assert!(max_flow_over_time(&g, P0, C, 31).value() >= 256);
    }
}
