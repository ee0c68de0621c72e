//! Topology-agnostic combining and broadcast built from optimal collective
//! cloud reads and writes.
//!
//! Combining runs a binary computation tree: in iteration `j` the `m`
//! surviving nodes write their values to the cloud, node `i` reads the values
//! of `2i` and `2i + 1`, and combines them. After `⌈log₂ n⌉` iterations node
//! 0 holds the fold and writes it.

use crate::bits::{ceil_log2, Bits};
use crate::error::{Error, Result};
use crate::flowcore::{car_schedule, caw_schedule, cw_schedule, Transfer};
use crate::model::NetworkGraph;
use crate::operators::Operator;
use crate::simulator::{run_algorithm, Action, Driver, Engine, Plan, Program, RoundMetrics, Source};

/// Cloud file holding the result of a combine.
pub const RESULT_FILE: &str = "result";
/// Cloud file broadcast by a cast.
pub const CAST_FILE: &str = "S";

/// Name of `X_i^j`.
pub fn tree_file(level: u32, i: usize) -> String {
    format!("x{level}/{i}")
}

/// The generic combine driver.
#[derive(Clone, Debug)]
pub struct GenericComb {
    pub operator: Operator,
    pub inputs: Vec<Bits>,
}

/// Standalone rounds of collective writes and reads in which every node moves
/// `s` bits; the unit cost of one step of the generic algorithm.
pub fn t_s(graph: &NetworkGraph, s: u64) -> Result<u32> {
    let all: Vec<Transfer> = (0..graph.processing_count())
        .map(|i| Transfer::new(i, "f", s))
        .collect();
    let w = caw_schedule(graph, &all)?.completion();
    let r = car_schedule(graph, &all)?.completion();
    Ok(w.max(r))
}

/// `3 T_s ⌈log₂ n⌉ + T_s`.
pub fn generic_bound(graph: &NetworkGraph, s: u64) -> Result<u64> {
    let ts = u64::from(t_s(graph, s)?);
    let levels = u64::from(ceil_log2(graph.processing_count() as u64));
    Ok(3 * ts * levels + ts)
}

impl GenericComb {
    fn program(&self, graph: &NetworkGraph) -> Result<Program> {
        let n = self.inputs.len();
        if n != graph.processing_count() {
            return Err(Error::Unsupported(format!(
                "{} inputs for {} processing nodes",
                n,
                graph.processing_count()
            )));
        }
        let s = self.operator.bit_width() as u64;
        let mut p = Program::new();
        let mut offset = 0;
        let mut m = n;
        let mut level = 0;
        while m > 1 {
            let writes: Vec<Transfer> = (0..m).map(|i| Transfer::new(i, tree_file(level, i), s)).collect();
            let aw = caw_schedule(graph, &writes)?;
            p.schedule_at(offset, &aw);
            offset += aw.horizon();

            let half = m.div_ceil(2);
            let left: Vec<Transfer> = (0..half)
                .map(|i| Transfer::new(i, tree_file(level, 2 * i), s))
                .collect();
            let ar = car_schedule(graph, &left)?;
            p.schedule_at(offset, &ar);
            offset += ar.horizon();

            let right: Vec<Transfer> = (0..half)
                .filter(|i| 2 * i + 1 < m)
                .map(|i| Transfer::new(i, tree_file(level, 2 * i + 1), s))
                .collect();
            let ar = car_schedule(graph, &right)?;
            p.schedule_at(offset, &ar);
            offset += ar.horizon();

            // Reads of the last round land one round later; the combine runs
            // then, ahead of that round's communication.
            for i in 0..half {
                let right = if 2 * i + 1 < m {
                    Source::file(tree_file(level, 2 * i + 1))
                } else {
                    Source::Unit
                };
                p.push(
                    offset + 1,
                    Action::Combine {
                        node: i,
                        left: Source::file(tree_file(level, 2 * i)),
                        right,
                        out: tree_file(level + 1, i),
                        grains: None,
                    },
                );
            }
            m = half;
            level += 1;
        }
        // Rename locally so the cloud copy is called `RESULT_FILE`.
        p.push(
            offset + 1,
            Action::Local {
                node: 0,
                inputs: vec![tree_file(level, 0)],
                out: RESULT_FILE.into(),
                label: "copy",
                f: std::sync::Arc::new(|x: &[Bits]| Ok(x[0].clone())),
            },
        );
        let w = cw_schedule(graph, 0, RESULT_FILE, s)?;
        p.schedule_at(offset, &w);
        Ok(p)
    }
}

impl Driver for GenericComb {
    type Output = Bits;

    fn plan(&self, graph: &NetworkGraph) -> Result<Plan> {
        Ok(Plan {
            program: self.program(graph)?,
            initial: self
                .inputs
                .iter()
                .enumerate()
                .map(|(i, x)| (i, tree_file(0, i), x.clone()))
                .collect(),
            initial_cloud: Vec::new(),
            operator: Some(self.operator.clone()),
        })
    }

    fn collect(&self, engine: &Engine) -> Result<Bits> {
        engine
            .cloud_file(0, RESULT_FILE)
            .ok_or_else(|| Error::MissingData(crate::model::NodeId::Cloud(0), RESULT_FILE.into()))
    }
}

/// Combines `inputs` (one per processing node, in node order) into a cloud file.
pub fn ccomb_generic(graph: &NetworkGraph, operator: Operator, inputs: Vec<Bits>) -> Result<(Bits, RoundMetrics)> {
    run_algorithm(&GenericComb { operator, inputs }, graph)
}

/// The generic cast driver: every node reads the whole cloud file.
#[derive(Clone, Debug)]
pub struct GenericCast {
    pub payload: Bits,
}

impl Driver for GenericCast {
    type Output = Vec<Bits>;

    fn plan(&self, graph: &NetworkGraph) -> Result<Plan> {
        let s = self.payload.len() as u64;
        let all: Vec<Transfer> = (0..graph.processing_count())
            .map(|i| Transfer::new(i, CAST_FILE, s))
            .collect();
        let mut program = Program::new();
        program.schedule_at(0, &car_schedule(graph, &all)?);
        Ok(Plan {
            program,
            initial: Vec::new(),
            initial_cloud: vec![(CAST_FILE.to_string(), self.payload.clone())],
            operator: None,
        })
    }

    fn collect(&self, engine: &Engine) -> Result<Vec<Bits>> {
        (0..engine.graph().processing_count())
            .map(|i| {
                engine
                    .node_file(i, CAST_FILE)
                    .ok_or_else(|| Error::MissingData(crate::model::NodeId::Proc(i), CAST_FILE.into()))
            })
            .collect()
    }
}

/// Broadcasts the cloud file `payload` to every processing node.
pub fn ccast_generic(graph: &NetworkGraph, payload: Bits) -> Result<(Vec<Bits>, RoundMetrics)> {
    run_algorithm(&GenericCast { payload }, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::model::{build_path_with_cloud, build_uniform_wheel};
    use crate::operators::{fold, MatMul, VectorAdd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn inputs(op: &Operator, n: usize, seed: u64) -> Vec<Bits> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| random_bits(&mut rng, op.bit_width())).collect()
    }

    #[test]
    fn single_node_is_bare_write() {
        let g = build_path_with_cloud(1, 4, 1);
        let op: Operator = Arc::new(VectorAdd::new(2, 16).unwrap());
        let x = inputs(&op, 1, 1);
        let (out, m) = ccomb_generic(&g, op, x.clone()).unwrap();
        assert_eq!(out, x[0]);
        assert_eq!(m.rounds_elapsed, 2);
    }

    #[test]
    fn matmul_chain_matches_fold() {
        let g = build_path_with_cloud(4, 2, 8);
        let op: Operator = Arc::new(MatMul::new(2, 2).unwrap());
        let x = inputs(&op, 4, 7);
        let expected = fold(op.as_ref(), &x).unwrap();
        let (out, m) = ccomb_generic(&g, op, x).unwrap();
        assert_eq!(out, expected);
        assert!(u64::from(m.rounds_elapsed) <= generic_bound(&g, 4).unwrap());
    }

    #[test]
    fn eight_nodes_on_wheel() {
        let g = build_uniform_wheel(8, 3, 8).unwrap().graph().clone();
        let op: Operator = Arc::new(MatMul::new(2, 3).unwrap());
        let x = inputs(&op, 8, 3);
        let expected = fold(op.as_ref(), &x).unwrap();
        let (out, m) = ccomb_generic(&g, op.clone(), x).unwrap();
        assert_eq!(out, expected);
        assert_eq!(m.combines.len(), 4 + 2 + 1);
        assert!(u64::from(m.rounds_elapsed) <= generic_bound(&g, op.bit_width() as u64).unwrap());
    }

    #[test]
    fn cast_on_one_node() {
        let g = build_path_with_cloud(1, 4, 1);
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(2), 10);
        let (out, m) = ccast_generic(&g, x.clone()).unwrap();
        assert_eq!(out, vec![x]);
        assert_eq!(m.rounds_elapsed, 10u32.div_ceil(4) + 1);
    }

    #[test]
    fn cast_on_wheel() {
        let g = build_uniform_wheel(8, 2, 16).unwrap().graph().clone();
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(5), 16);
        let (out, m) = ccast_generic(&g, x.clone()).unwrap();
        assert!(out.iter().all(|y| *y == x));
        assert!(m.rounds_elapsed <= t_s(&g, 16).unwrap());
    }
}
