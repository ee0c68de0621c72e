use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flowcore::quickest_flow;
use crate::model::{FatLinksView, NodeId};

/// A cluster of a cover together with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub members: BTreeSet<usize>,
    /// `r(B)`: the member that writes `s` bits fastest using only `B`.
    pub leader: usize,
    pub diameter: usize,
    /// `Z(B)`: rounds of the leader's write within `B`.
    pub timespan: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub clusters: Vec<Cluster>,
    pub loads: Vec<usize>,
}

impl Cover {
    /// Computes leaders, diameters and loads for `sets`, which must be
    /// connected and cover every processing node.
    pub fn new(view: &FatLinksView, sets: Vec<BTreeSet<usize>>, s: u64) -> Result<Self> {
        let g = view.graph();
        let mut loads = vec![0; view.n()];
        let mut clusters = Vec::with_capacity(sets.len());
        for members in sets {
            let diameter = g
                .induced_diameter(&members)
                .ok_or_else(|| Error::InvalidGraph(format!("cluster {members:?} is disconnected")))?;
            let sub = g.restricted_to(&members);
            let mut best: Option<(u32, usize)> = None;
            for &i in &members {
                loads[i] += 1;
                let (t, _) = quickest_flow(&sub, NodeId::Proc(i), NodeId::Cloud(0), s)?;
                if best.is_none_or(|b| t < b.0) {
                    best = Some((t, i));
                }
            }
            let (timespan, leader) = best.ok_or_else(|| Error::InvalidGraph("empty cluster".into()))?;
            clusters.push(Cluster {
                members,
                leader,
                diameter,
                timespan,
            });
        }
        if let Some(i) = loads.iter().position(|&l| l == 0) {
            return Err(Error::InvalidGraph(format!("p{i} is not covered")));
        }
        Ok(Cover { clusters, loads })
    }

    /// Maximum number of clusters containing a node.
    pub fn load(&self) -> usize {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    pub fn max_diameter(&self) -> usize {
        self.clusters.iter().map(|c| c.diameter).max().unwrap_or(0)
    }

    pub fn max_timespan(&self) -> u32 {
        self.clusters.iter().map(|c| c.timespan).max().unwrap_or(0)
    }

    /// The lowest-index cluster containing `i`.
    pub fn home(&self, i: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.members.contains(&i))
    }
}

/// Coarsens a cover so that every node lies in few clusters while clusters
/// grow by at most a `4κ` diameter factor.
///
/// Repeatedly: starting from the lowest-index unprocessed cluster, absorb
/// every unprocessed cluster meeting the current kernel as long as this
/// multiplies the number of absorbed clusters by more than `|C|^{1/κ}`.
/// The kernel is emitted, its clusters count as subsumed, and clusters that
/// met it are skipped until the next pass.
pub fn sparse_cover(base: &[BTreeSet<usize>], kappa: u32) -> Vec<BTreeSet<usize>> {
    let kappa = kappa.max(1);
    let growth = (base.len() as f64).powf(1.0 / f64::from(kappa));
    let mut remaining: BTreeSet<usize> = (0..base.len()).collect();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let mut unmet = remaining.clone();
        let mut subsumed = BTreeSet::new();
        while let Some(&first) = unmet.iter().next() {
            let mut z: BTreeSet<usize> = BTreeSet::from([first]);
            let (y, kernel) = loop {
                let y = z;
                let kernel: BTreeSet<usize> = y.iter().flat_map(|&c| base[c].iter().copied()).collect();
                z = unmet
                    .iter()
                    .copied()
                    .filter(|&c| !base[c].is_disjoint(&kernel))
                    .collect();
                if (z.len() as f64) <= growth * y.len() as f64 {
                    break (y, kernel);
                }
            };
            unmet.retain(|c| !z.contains(c));
            subsumed.extend(y);
            out.push(kernel);
        }
        remaining.retain(|c| !subsumed.contains(c));
    }
    out
}

/// `⌈log₂ n⌉`, at least 1.
pub fn default_kappa(n: usize) -> u32 {
    crate::bits::log_factor(n) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_path_with_cloud;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn chain_merges() {
        let base = vec![set(&[0, 1]), set(&[1, 2]), set(&[2, 3]), set(&[3, 4])];
        let c = sparse_cover(&base, 1);
        // κ = 1 allows growth by |C| only, so every kernel is a single step.
        for b in &base {
            assert!(c.iter().any(|k| b.is_subset(k)));
        }
    }

    #[test]
    fn load_and_leaders() {
        let v = FatLinksView::new(build_path_with_cloud(4, 2, 8), 8).unwrap();
        let cover = Cover::new(&v, vec![set(&[0, 1]), set(&[1, 2, 3])], 8).unwrap();
        assert_eq!(cover.load(), 2);
        assert_eq!(cover.loads, vec![1, 2, 1, 1]);
        assert_eq!(cover.home(1), Some(0));
        assert_eq!(cover.clusters[0].leader, 0);
        assert_eq!(cover.clusters[1].diameter, 2);
        assert!(Cover::new(&v, vec![set(&[0, 1])], 8).is_err());
    }
}
