use std::collections::BTreeSet;

use serde::Serialize;

use crate::bits::{ceil_div, Bits};
use crate::error::{Error, Result};
use crate::flowcore::Schedule;
use crate::model::{FatLinksView, NodeId};
use crate::pipeline::{assign_ranges, tree_write};
use crate::simulator::{run_algorithm, Driver, Engine, Plan, Program, RoundMetrics};

/// The `s`-cloud cluster of a node: the smallest ball around it whose nodes
/// could, in principle, write `s` bits within its radius plus one rounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CloudCluster {
    pub center: usize,
    /// `k(i)` in hops.
    pub radius: usize,
    pub members: BTreeSet<usize>,
    /// `bc(B_i)`.
    pub bandwidth: u64,
    /// `Z_i = k(i) + ⌈s / bc(B_i)⌉`.
    pub timespan: u64,
}

pub fn cloud_cluster(view: &FatLinksView, i: usize) -> CloudCluster {
    let g = view.graph();
    let dist = g.local_distances(i, None);
    let ball = |k: usize| -> BTreeSet<usize> { (0..view.n()).filter(|&v| dist[v].is_some_and(|d| d <= k)).collect() };
    let mut radius = view.diameter();
    for k in 0..view.diameter() {
        if (k as u64 + 1) * g.cloud_bandwidth(&ball(k)) >= view.s() {
            radius = k;
            break;
        }
    }
    let members = ball(radius);
    let bandwidth = g.cloud_bandwidth(&members);
    CloudCluster {
        center: i,
        radius,
        timespan: radius as u64 + ceil_div(view.s(), bandwidth),
        members,
        bandwidth,
    }
}

pub fn cloud_clusters(view: &FatLinksView) -> Vec<CloudCluster> {
    (0..view.n()).map(|i| cloud_cluster(view, i)).collect()
}

/// `Zmax = max_i Z_i`.
pub fn zmax(view: &FatLinksView) -> u64 {
    cloud_clusters(view).iter().map(|c| c.timespan).max().unwrap_or(0)
}

/// File name used by single-node writes and reads.
pub const DATA_FILE: &str = "data";

/// The write schedule: broadcast down a BFS tree of the cluster while every
/// member writes its bandwidth-proportional share of the file.
pub fn cw_fat_schedule(view: &FatLinksView, i: usize, file: &str) -> Result<Schedule> {
    let c = cloud_cluster(view, i);
    let g = view.graph();
    let parent = g.bfs_tree(i, &c.members);
    let mut order: Vec<usize> = c.members.iter().copied().collect();
    let dist = g.local_distances(i, Some(&c.members));
    order.sort_by_key(|&v| (dist[v], v));
    let weights: Vec<(usize, u64)> = order.iter().map(|&v| (v, g.up(v))).collect();
    tree_write(g, &parent, &assign_ranges(&weights, view.s()), file, view.s())
}

/// Time reversal of the write schedule.
pub fn cr_fat_schedule(view: &FatLinksView, i: usize, file: &str) -> Result<Schedule> {
    Ok(cw_fat_schedule(view, i, file)?.reversed())
}

struct FatWrite<'a> {
    view: &'a FatLinksView,
    node: usize,
    payload: &'a Bits,
}

impl Driver for FatWrite<'_> {
    type Output = ();

    fn plan(&self, _: &crate::model::NetworkGraph) -> Result<Plan> {
        Ok(Plan {
            program: Program::from(&cw_fat_schedule(self.view, self.node, DATA_FILE)?),
            initial: vec![(self.node, DATA_FILE.into(), self.payload.clone())],
            ..Plan::default()
        })
    }

    fn collect(&self, engine: &Engine) -> Result<()> {
        check_copy(engine.cloud_file(0, DATA_FILE), self.payload, NodeId::Cloud(0))
    }
}

struct FatRead<'a> {
    view: &'a FatLinksView,
    node: usize,
    payload: &'a Bits,
}

impl Driver for FatRead<'_> {
    type Output = ();

    fn plan(&self, _: &crate::model::NetworkGraph) -> Result<Plan> {
        Ok(Plan {
            program: Program::from(&cr_fat_schedule(self.view, self.node, DATA_FILE)?),
            initial_cloud: vec![(DATA_FILE.into(), self.payload.clone())],
            ..Plan::default()
        })
    }

    fn collect(&self, engine: &Engine) -> Result<()> {
        check_copy(engine.node_file(self.node, DATA_FILE), self.payload, NodeId::Proc(self.node))
    }
}

pub(crate) fn check_copy(got: Option<Bits>, want: &Bits, at: NodeId) -> Result<()> {
    match got {
        Some(x) if x == *want => Ok(()),
        Some(_) => Err(Error::LawViolation(format!("{at} holds a corrupted copy"))),
        None => Err(Error::MissingData(at, DATA_FILE.into())),
    }
}

fn size_check(view: &FatLinksView, payload: &Bits) -> Result<()> {
    if payload.len() as u64 != view.s() {
        return Err(Error::WidthMismatch {
            expected: view.s() as usize,
            got: payload.len(),
        });
    }
    Ok(())
}

/// Writes `payload` from node `i` to the cloud and checks the result.
pub fn cw_fat(view: &FatLinksView, i: usize, payload: &Bits) -> Result<RoundMetrics> {
    size_check(view, payload)?;
    Ok(run_algorithm(&FatWrite { view, node: i, payload }, view.graph())?.1)
}

/// Reads the cloud file `payload` into node `i` and checks the copy.
pub fn cr_fat(view: &FatLinksView, i: usize, payload: &Bits) -> Result<RoundMetrics> {
    size_check(view, payload)?;
    Ok(run_algorithm(&FatRead { view, node: i, payload }, view.graph())?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::model::{build_path_with_cloud, build_uniform_wheel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path() -> FatLinksView {
        FatLinksView::new(build_path_with_cloud(16, 1, 256), 256).unwrap()
    }

    #[test]
    fn path_example_cluster() {
        let c = cloud_cluster(&path(), 0);
        assert_eq!((c.radius, c.bandwidth, c.timespan), (15, 16, 31));
        assert_eq!(zmax(&path()), 31);
    }

    #[test]
    fn rich_node_is_alone() {
        let mut g = build_path_with_cloud(3, 1, 64);
        g.set_cloud_link(1, 0, 64, 64);
        let c = cloud_cluster(&FatLinksView::new(g, 64).unwrap(), 1);
        assert_eq!((c.radius, c.timespan), (0, 1));
        assert_eq!(c.members.len(), 1);
    }

    #[test]
    fn fat_wheel_cluster() {
        // Ring links of 256 are fat for s = 256; balls grow on both sides.
        let w = build_uniform_wheel(16, 16, 256).unwrap();
        let c = cloud_cluster(&FatLinksView::new(w.graph().clone(), 256).unwrap(), 0);
        assert_eq!(c.radius, 3);
        assert_eq!(c.bandwidth, 7 * 16);
        assert_eq!(c.timespan, 3 + 3);
    }

    #[test]
    fn path_write_and_read() {
        let v = path();
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(3), 256);
        let m = cw_fat(&v, 0, &x).unwrap();
        assert_eq!(m.rounds_elapsed, 31);
        let m = cr_fat(&v, 0, &x).unwrap();
        assert_eq!(m.rounds_elapsed, 32);
    }

    #[test]
    fn wrong_size_rejected() {
        let x = Bits::repeat(false, 3);
        assert!(matches!(cw_fat(&path(), 0, &x), Err(Error::WidthMismatch { .. })));
    }
}
