use std::collections::BTreeMap;

use crate::model::{NetworkGraph, NodeId};

/// Counters gathered while executing a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundMetrics {
    /// Rounds until the last action ran and the last transfer landed.
    pub rounds_elapsed: u32,
    /// Bits carried per link per round.
    pub link_usage: BTreeMap<(NodeId, NodeId), BTreeMap<u32, u64>>,
    pub bits_sent: u64,
    pub bits_written: u64,
    pub bits_read: u64,
    /// Bits put on a link (sends and reads) and bits that have landed.
    pub bits_injected: u64,
    pub bits_delivered: u64,
    /// `(round, node)` of every operator application.
    pub combines: Vec<(u32, usize)>,
}

impl RoundMetrics {
    /// Ten-bucket histogram of per-round link utilisation `bits / w`.
    /// Bucket `k` counts link-rounds with utilisation in `(k/10, (k+1)/10]`.
    pub fn utilization_histogram(&self, graph: &NetworkGraph) -> [u64; 10] {
        let mut hist = [0u64; 10];
        for (&(u, v), rounds) in &self.link_usage {
            let w = graph.bandwidth(u, v).unwrap_or(1).max(1);
            for &bits in rounds.values() {
                if bits == 0 {
                    continue;
                }
                let k = ((bits * 10).div_ceil(w)).clamp(1, 10) - 1;
                hist[k as usize] += 1;
            }
        }
        hist
    }

    /// Peak bits on `(u, v)` in any round.
    pub fn peak(&self, u: NodeId, v: NodeId) -> u64 {
        self.link_usage
            .get(&(u, v))
            .and_then(|r| r.values().max().copied())
            .unwrap_or(0)
    }
}
