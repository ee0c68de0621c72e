use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bits::{ceil_div, ceil_log2, Bits};
use crate::error::{Error, Result};
use crate::fatlinks::FatComb;
use crate::flowcore::Op;
use crate::generic_comb::RESULT_FILE;
use crate::model::{FatLinksView, NetworkGraph, NodeId, WheelView};
use crate::operators::{Operator, VectorAdd};
use crate::simulator::{execute, Action, Plan, Program, RoundMetrics};
use crate::wheel::Modular;

/// One masked aggregation: node `i` holds `x[i]` in `(Z_M)^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlConfig {
    pub m: usize,
    pub modulus: u64,
    pub x: Vec<Vec<u64>>,
    pub seed: u64,
}

impl FlConfig {
    /// Checks shapes and that the plain coordinate sums stay below `M`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.x.len() != n {
            return Err(Error::Unsupported(format!("{} input vectors for {n} nodes", self.x.len())));
        }
        if self.modulus < 2 {
            return Err(Error::Unsupported("modulus must be at least 2".into()));
        }
        for c in 0..self.m {
            let mut sum: u128 = 0;
            for (i, x) in self.x.iter().enumerate() {
                if x.len() != self.m {
                    return Err(Error::Unsupported(format!("x[{i}] has length {}, expected {}", x.len(), self.m)));
                }
                sum += u128::from(x[c]);
            }
            if sum >= u128::from(self.modulus) {
                return Err(Error::Unsupported(format!(
                    "coordinate {c} sums to {sum}, which overflows M = {}",
                    self.modulus
                )));
            }
        }
        Ok(())
    }

    pub fn operator(&self) -> Result<VectorAdd> {
        VectorAdd::new(self.m, self.modulus)
    }
}

/// Local links as pairs `u < v`, in a fixed order.
pub fn local_edges(graph: &NetworkGraph) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..graph.processing_count())
        .flat_map(|u| graph.local_neighbors(u).map(move |(v, _)| (u, v)))
        .filter(|&(u, v)| u < v)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The mask of edge number `e`, drawn by its lower endpoint from a stream
/// of its own so any single mask can be regenerated.
pub fn mask(seed: u64, e: usize, m: usize, modulus: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(e as u64);
    (0..m).map(|_| rng.random_range(0..modulus)).collect()
}

/// `y_i = x_i - Σ_{i<j} z_{i,j} + Σ_{j<i} z_{j,i}` for every node.
pub fn masked_inputs(graph: &NetworkGraph, cfg: &FlConfig) -> Vec<Vec<u64>> {
    let md = cfg.modulus;
    let mut y = cfg.x.clone();
    for (e, &(u, v)) in local_edges(graph).iter().enumerate() {
        let z = mask(cfg.seed, e, cfg.m, md);
        for c in 0..cfg.m {
            y[u][c] = (y[u][c] + md - z[c]) % md;
            y[v][c] = (y[v][c] + z[c]) % md;
        }
    }
    y
}

/// Which combine carries the masked vectors to the cloud.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlPath {
    Fat,
    Wheel,
}

fn mask_file(u: usize, v: usize) -> String {
    format!("z{u}-{v}")
}

/// The program of one FL iteration: the mask exchange over local links,
/// local masking into the file `in`, and a combine of the masked vectors.
pub fn fl_plan(graph: &NetworkGraph, cfg: &FlConfig, path: FlPath) -> Result<Plan> {
    let n = graph.processing_count();
    cfg.validate(n)?;
    let va = cfg.operator()?;
    let width = (cfg.m * va.lane_bits()) as u64;
    let op: Operator = Arc::new(va.clone());
    let edges = local_edges(graph);

    let mut plan = Plan {
        operator: Some(op.clone()),
        ..Plan::default()
    };
    let mut prog = Program::new();
    let mut exchange = 0;
    for (e, &(u, v)) in edges.iter().enumerate() {
        let f = mask_file(u, v);
        plan.initial.push((u, f.clone(), va.encode(&mask(cfg.seed, e, cfg.m, cfg.modulus))?));
        let w = graph
            .bandwidth(NodeId::Proc(u), NodeId::Proc(v))
            .ok_or_else(|| Error::InvalidGraph(format!("no link p{u}->p{v}")))?;
        let rounds = ceil_div(width, w) as u32;
        for r in 0..rounds {
            let offset = u64::from(r) * w;
            prog.push(
                r + 1,
                Op::Send {
                    src: u,
                    dst: v,
                    file: f.clone(),
                    offset,
                    len: w.min(width - offset),
                },
            );
        }
        exchange = exchange.max(rounds);
    }
    for i in 0..n {
        plan.initial.push((i, "x".into(), va.encode(&cfg.x[i])?));
        let outgoing: Vec<String> = edges.iter().filter(|e| e.0 == i).map(|&(u, v)| mask_file(u, v)).collect();
        let incoming: Vec<String> = edges.iter().filter(|e| e.1 == i).map(|&(u, v)| mask_file(u, v)).collect();
        let mut inputs = vec!["x".to_string()];
        inputs.extend(outgoing.iter().cloned());
        inputs.extend(incoming.iter().cloned());
        let k = outgoing.len();
        let va = va.clone();
        prog.push(
            exchange + 1,
            Action::Local {
                node: i,
                inputs,
                out: "in".into(),
                label: "mask",
                f: Arc::new(move |files: &[Bits]| {
                    let md = va.modulus();
                    let mut y = va.decode(&files[0]);
                    for (j, f) in files[1..].iter().enumerate() {
                        for (c, z) in va.decode(f).into_iter().enumerate() {
                            y[c] = if j < k { (y[c] + md - z) % md } else { (y[c] + z) % md };
                        }
                    }
                    va.encode(&y)
                }),
            },
        );
    }

    let comb = match path {
        FlPath::Fat => {
            let view = FatLinksView::new(graph.clone(), width)?;
            FatComb {
                view: &view,
                operator: op.clone(),
                input: "in".into(),
            }
            .program()?
        }
        FlPath::Wheel => {
            let view = WheelView::new(graph.clone())?;
            check_wheel(&view, cfg)?;
            Modular {
                view: &view,
                operator: op.clone(),
                input: "in".into(),
            }
            .program()?
        }
    };
    prog.merge_at(exchange, &comb);
    plan.program = prog;
    Ok(plan)
}

/// Runs one FL iteration and returns the decoded cloud sum.
pub fn fl_round(graph: &NetworkGraph, cfg: &FlConfig, path: FlPath) -> Result<(Vec<u64>, RoundMetrics)> {
    let va = cfg.operator()?;
    let engine = execute(graph, &fl_plan(graph, cfg, path)?, false)?;
    let out = engine
        .cloud_file(0, RESULT_FILE)
        .ok_or_else(|| Error::MissingData(NodeId::Cloud(0), RESULT_FILE.into()))?;
    Ok((va.decode(&out), engine.metrics().clone()))
}

/// Preconditions of the wheel path: uniform bandwidths, `⌈log₂ M⌉ ≤ bc`
/// and `bc · m · ⌈log₂ M⌉ ≤ bl²`.
pub fn check_wheel(view: &WheelView, cfg: &FlConfig) -> Result<()> {
    let bc = view.bc(0);
    let bl = view.ring(0);
    if view.cloud_bandwidths().iter().any(|&b| b != bc) || view.ring_bandwidths().iter().any(|&b| b != bl) {
        return Err(Error::Unsupported("the wheel FL path needs a uniform wheel".into()));
    }
    let g = u64::from(ceil_log2(cfg.modulus));
    if g > bc {
        return Err(Error::Unsupported(format!("grain of {g} bits exceeds bc = {bc}")));
    }
    if bc * cfg.m as u64 * g > bl * bl {
        return Err(Error::Unsupported(format!("bc·m·log M = {} exceeds bl² = {}", bc * cfg.m as u64 * g, bl * bl)));
    }
    Ok(())
}

/// `√(m ⌈log₂ M⌉ / bc) + ⌈log₂ n⌉`, the wheel FL round estimate.
pub fn fl_wheel_bound(view: &WheelView, cfg: &FlConfig) -> f64 {
    let g = f64::from(ceil_log2(cfg.modulus));
    (cfg.m as f64 * g / view.bc(0) as f64).sqrt() + f64::from(ceil_log2(view.n() as u64))
}

/// Outcome of the empirical masking check.
#[derive(Clone, Debug, Serialize)]
pub struct PrivacyReport {
    pub draws: usize,
    /// Whether `Σ y_i = Σ x_i` held on every draw.
    pub sums_match: bool,
    /// Nodes without local neighbours; their `y_i` is just `x_i`.
    pub isolated: Vec<usize>,
    /// Smallest chi-square p-value over all coordinates of all nodes.
    pub min_p_value: f64,
    pub alpha: f64,
    pub accepted: bool,
}

/// Redraws the masks `draws` times with `x` fixed and tests every
/// coordinate of every `y_i` for uniformity over `Z_M`.
pub fn fl_privacy_check(graph: &NetworkGraph, cfg: &FlConfig, draws: usize, alpha: f64) -> Result<PrivacyReport> {
    let n = graph.processing_count();
    cfg.validate(n)?;
    let md = cfg.modulus as usize;
    let isolated: Vec<usize> = (0..n).filter(|&i| graph.local_neighbors(i).next().is_none()).collect();
    let want: Vec<u64> = (0..cfg.m).map(|c| cfg.x.iter().map(|x| x[c]).sum::<u64>() % cfg.modulus).collect();
    let mut counts = vec![vec![vec![0u64; md]; cfg.m]; n];
    let mut sums_match = true;
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..draws {
        let draw = FlConfig {
            seed: seeds.random(),
            ..cfg.clone()
        };
        let y = masked_inputs(graph, &draw);
        let got: Vec<u64> = (0..cfg.m).map(|c| y.iter().map(|v| v[c]).sum::<u64>() % cfg.modulus).collect();
        sums_match &= got == want;
        for (i, v) in y.iter().enumerate() {
            for (c, &val) in v.iter().enumerate() {
                counts[i][c][val as usize] += 1;
            }
        }
    }
    let dist = ChiSquared::new((md - 1) as f64).map_err(|e| Error::Unsupported(e.to_string()))?;
    let expected = draws as f64 / md as f64;
    let mut min_p = 1.0f64;
    for (i, node) in counts.iter().enumerate() {
        if isolated.contains(&i) {
            continue;
        }
        for hist in node {
            let stat: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            min_p = min_p.min(1.0 - dist.cdf(stat));
        }
    }
    Ok(PrivacyReport {
        draws,
        sums_match,
        accepted: isolated.is_empty() && sums_match && min_p >= alpha,
        isolated,
        min_p_value: min_p,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_path_with_cloud, build_uniform_wheel};

    fn ring3() -> NetworkGraph {
        let mut g = build_path_with_cloud(3, 8, 64);
        g.set_symmetric(NodeId::Proc(2), NodeId::Proc(0), 64);
        g
    }

    #[test]
    fn ring_example() {
        let cfg = FlConfig {
            m: 2,
            modulus: 100,
            x: vec![vec![10, 20], vec![30, 40], vec![5, 5]],
            seed: 7,
        };
        let (sum, _) = fl_round(&ring3(), &cfg, FlPath::Fat).unwrap();
        assert_eq!(sum, vec![45, 65]);
        let y = masked_inputs(&ring3(), &cfg);
        assert_ne!(y, cfg.x);
    }

    #[test]
    fn single_node_is_plain() {
        let cfg = FlConfig {
            m: 3,
            modulus: 16,
            x: vec![vec![1, 2, 3]],
            seed: 1,
        };
        let g = build_path_with_cloud(1, 4, 1);
        assert_eq!(masked_inputs(&g, &cfg), cfg.x);
        assert_eq!(fl_round(&g, &cfg, FlPath::Fat).unwrap().0, vec![1, 2, 3]);
    }

    #[test]
    fn overflow_rejected() {
        let cfg = FlConfig {
            m: 1,
            modulus: 10,
            x: vec![vec![6], vec![5], vec![0]],
            seed: 1,
        };
        assert!(fl_round(&ring3(), &cfg, FlPath::Fat).is_err());
    }

    #[test]
    fn wheel_path() {
        let view = build_uniform_wheel(8, 4, 16).unwrap();
        let cfg = FlConfig {
            m: 8,
            modulus: 16,
            x: (0..8).map(|i| vec![i as u64 % 2; 8]).collect(),
            seed: 3,
        };
        let (sum, m) = fl_round(view.graph(), &cfg, FlPath::Wheel).unwrap();
        assert_eq!(sum, vec![4; 8]);
        assert!(f64::from(m.rounds_elapsed) <= 8.0 * fl_wheel_bound(&view, &cfg));
    }

    #[test]
    fn two_nodes_mask_cancels() {
        let g = build_path_with_cloud(2, 4, 8);
        let cfg = FlConfig {
            m: 2,
            modulus: 4,
            x: vec![vec![1, 0], vec![2, 1]],
            seed: 5,
        };
        let r = fl_privacy_check(&g, &cfg, 2000, 0.01).unwrap();
        assert!(r.sums_match);
        assert!(r.isolated.is_empty());
        assert!(fl_privacy_check(&build_path_with_cloud(1, 4, 8), &FlConfig { x: vec![vec![0, 0]], ..cfg }, 10, 0.01)
            .unwrap()
            .isolated
            .contains(&0));
    }
}
