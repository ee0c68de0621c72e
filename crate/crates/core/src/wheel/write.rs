use std::collections::BTreeMap;

use super::intervals::{best_interval, CloudInterval};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::fatlinks::DATA_FILE;
use crate::flowcore::Schedule;
use crate::model::{NetworkGraph, NodeId, WheelView};
use crate::pipeline::{assign_ranges, tree_write};
use crate::simulator::{run_algorithm, Driver, Engine, Plan, Program, RoundMetrics};

/// Write schedule from `i`: pipeline the file along the better interval
/// while every member writes its bandwidth-proportional share.
pub fn cw_wheel_schedule(view: &WheelView, s: u64, i: usize, file: &str) -> Result<(CloudInterval, Schedule)> {
    let iv = best_interval(view, s, i);
    let parent: BTreeMap<usize, Option<usize>> = iv
        .nodes
        .iter()
        .enumerate()
        .map(|(j, &v)| (v, j.checked_sub(1).map(|p| iv.nodes[p])))
        .collect();
    let weights: Vec<(usize, u64)> = iv.nodes.iter().map(|&v| (v, view.bc(v))).collect();
    let sched = tree_write(view.graph(), &parent, &assign_ranges(&weights, s), file, s)?;
    Ok((iv, sched))
}

struct WheelWrite<'a> {
    view: &'a WheelView,
    node: usize,
    payload: &'a Bits,
    read: bool,
}

impl Driver for WheelWrite<'_> {
    type Output = ();

    fn plan(&self, _: &NetworkGraph) -> Result<Plan> {
        let (_, w) = cw_wheel_schedule(self.view, self.payload.len() as u64, self.node, DATA_FILE)?;
        let mut plan = Plan::default();
        if self.read {
            plan.program = Program::from(&w.reversed());
            plan.initial_cloud.push((DATA_FILE.into(), self.payload.clone()));
        } else {
            plan.program = Program::from(&w);
            plan.initial.push((self.node, DATA_FILE.into(), self.payload.clone()));
        }
        Ok(plan)
    }

    fn collect(&self, engine: &Engine) -> Result<()> {
        if self.read {
            crate::fatlinks::check_copy(engine.node_file(self.node, DATA_FILE), self.payload, NodeId::Proc(self.node))
        } else {
            crate::fatlinks::check_copy(engine.cloud_file(0, DATA_FILE), self.payload, NodeId::Cloud(0))
        }
    }
}

fn nonempty(payload: &Bits) -> Result<()> {
    if payload.is_empty() {
        return Err(Error::WidthMismatch { expected: 1, got: 0 });
    }
    Ok(())
}

/// Writes `payload` from node `i` and checks the cloud copy.
pub fn cw_wheel(view: &WheelView, i: usize, payload: &Bits) -> Result<RoundMetrics> {
    nonempty(payload)?;
    let d = WheelWrite { view, node: i, payload, read: false };
    Ok(run_algorithm(&d, view.graph())?.1)
}

/// Reads the cloud file `payload` into node `i` by time reversal.
pub fn cr_wheel(view: &WheelView, i: usize, payload: &Bits) -> Result<RoundMetrics> {
    nonempty(payload)?;
    let d = WheelWrite { view, node: i, payload, read: true };
    Ok(run_algorithm(&d, view.graph())?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::model::build_uniform_wheel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_point() {
        let w = build_uniform_wheel(16, 16, 64).unwrap();
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(9), 256);
        let r = cw_wheel(&w, 5, &x).unwrap().rounds_elapsed;
        assert!((12 / 3..=48).contains(&r), "{r}");
        let r2 = cr_wheel(&w, 5, &x).unwrap().rounds_elapsed;
        assert_eq!(r2, r + 1);
    }

    #[test]
    fn singleton_interval() {
        let w = build_uniform_wheel(5, 64, 8).unwrap();
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(1), 256);
        assert_eq!(cw_wheel(&w, 0, &x).unwrap().rounds_elapsed, 4);
    }
}
