use super::combine::fat_cover;
use crate::bits::{ceil_div, Bits};
use crate::error::{Error, Result};
use crate::flowcore::{cr_schedule, Op};
use crate::generic_comb::CAST_FILE;
use crate::model::{FatLinksView, NetworkGraph, NodeId};
use crate::pipeline::{multiplex, slots};
use crate::simulator::{run_algorithm, Driver, Engine, Plan, Program, RoundMetrics};

/// Cast over the fat-links cover: every cluster leader reads the file within
/// its cluster and floods it down a BFS tree of the cluster.
pub fn ccast_fat_program(view: &FatLinksView, width: u64) -> Result<Program> {
    let g = view.graph();
    let cover = fat_cover(view, width)?;
    let c = ceil_div(width, view.s()).max(1);
    let size = ceil_div(width, c).max(1);
    let mut per_cluster = Vec::new();
    for (b, cl) in cover.clusters.iter().enumerate() {
        let mut p = Program::new();
        let read = cr_schedule(&g.restricted_to(&cl.members), cl.leader, CAST_FILE, width)?;
        p.schedule_at(0, &read);
        let start = read.horizon();
        let dist = g.local_distances(cl.leader, Some(&cl.members));
        for (&v, &par) in &g.bfs_tree(cl.leader, &cl.members) {
            let Some(par) = par else { continue };
            let d = dist[par].unwrap() as u64;
            for k in 0..c {
                let off = k * size;
                if off >= width {
                    break;
                }
                p.push(
                    start + (d * c + k) as u32 + 1,
                    Op::Send {
                        src: par,
                        dst: v,
                        file: CAST_FILE.into(),
                        offset: off,
                        len: size.min(width - off),
                    },
                );
            }
        }
        per_cluster.push((b, p));
    }
    let (slots, load) = slots(cover.clusters.iter().enumerate().map(|(b, c)| (b, &c.members)));
    multiplex(&per_cluster, &slots, load)
}

/// The fat-links cast driver.
pub struct FatCast<'a> {
    pub view: &'a FatLinksView,
    pub payload: &'a Bits,
}

impl Driver for FatCast<'_> {
    type Output = Vec<Bits>;

    fn plan(&self, _: &NetworkGraph) -> Result<Plan> {
        Ok(Plan {
            program: ccast_fat_program(self.view, self.payload.len() as u64)?,
            initial_cloud: vec![(CAST_FILE.into(), self.payload.clone())],
            ..Plan::default()
        })
    }

    fn collect(&self, engine: &Engine) -> Result<Vec<Bits>> {
        (0..self.view.n())
            .map(|i| {
                engine
                    .node_file(i, CAST_FILE)
                    .ok_or_else(|| Error::MissingData(NodeId::Proc(i), CAST_FILE.into()))
            })
            .collect()
    }
}

/// Disseminates the cloud file `payload` to every node.
pub fn ccast_fat(view: &FatLinksView, payload: &Bits) -> Result<(Vec<Bits>, RoundMetrics)> {
    run_algorithm(&FatCast { view, payload }, view.graph())
}
