use std::collections::BTreeMap;

use super::layout::Layout;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::generic_comb::RESULT_FILE;
use crate::model::{NetworkGraph, NodeId, WheelView};
use crate::operators::Operator;
use crate::pipeline::{multiplex, slots, tree_phases, value_file, CompTree};
use crate::simulator::{run_algorithm, Action, Driver, Engine, Plan, Program, RoundMetrics, Source};

/// Per-round link usage, so concurrent relays share bandwidth.
#[derive(Default)]
pub(crate) struct Links {
    used: BTreeMap<(usize, usize, u32), u64>,
}

impl Links {
    /// Pipelines `width` bits of `file` along `path`, forwarding whatever
    /// has arrived. The data is at `path[0]` from round `start`; returns the
    /// round from which the last node holds all of it.
    pub(crate) fn relay(
        &mut self,
        graph: &NetworkGraph,
        prog: &mut Program,
        path: &[usize],
        file: &str,
        width: u64,
        start: u32,
    ) -> Result<u32> {
        let hops = path.len() - 1;
        if hops == 0 {
            return Ok(start);
        }
        let mut received = vec![0u64; path.len()];
        received[0] = width;
        let mut sent = vec![0u64; hops];
        let mut t = start;
        while received[hops] < width {
            let mut arrived = vec![0u64; path.len()];
            for h in 0..hops {
                let (u, v) = (path[h], path[h + 1]);
                let w = graph
                    .bandwidth(NodeId::Proc(u), NodeId::Proc(v))
                    .ok_or_else(|| Error::InvalidGraph(format!("no link p{u}->p{v}")))?;
                let used = self.used.entry((u, v, t)).or_default();
                let x = (received[h] - sent[h]).min(w - *used);
                if x > 0 {
                    prog.push(
                        t,
                        crate::flowcore::Op::Send {
                            src: u,
                            dst: v,
                            file: file.to_string(),
                            offset: sent[h],
                            len: x,
                        },
                    );
                    *used += x;
                    sent[h] += x;
                    arrived[h + 1] += x;
                }
            }
            for (r, a) in received.iter_mut().zip(arrived) {
                *r += a;
            }
            t += 1;
            if t > start + 1_000_000 {
                return Err(Error::InfeasibleFlow(format!("relay of {file} does not finish")));
            }
        }
        Ok(t)
    }
}

fn copy(node: usize, from: &str, to: &str) -> Action {
    Action::Combine {
        node,
        left: Source::file(from),
        right: Source::Unit,
        out: to.to_string(),
        grains: None,
    }
}

/// Product of the segment `[a, b]` at node `b` by recursive doubling: the
/// segment is padded on the left to a power of two, and at each level the
/// product of a left block travels from its last node to the last node of
/// the right block. Returns the round from which `out` is ready.
fn doubling(
    graph: &NetworkGraph,
    prog: &mut Program,
    leaf: usize,
    (a, b): (usize, usize),
    input: &str,
    out: &str,
    width: u64,
) -> Result<u32> {
    let m = b - a + 1;
    let w = m.next_power_of_two();
    let pad = w - m;
    let node = |p: usize| a + p - pad;
    let mut links = Links::default();
    let mut ready: BTreeMap<usize, (u32, String)> = BTreeMap::new();
    for p in pad..w {
        let f = format!("h{leaf}/0/{p}");
        prog.push(1, copy(node(p), input, &f));
        ready.insert(p, (1, f));
    }
    let mut half = 1;
    let mut level = 1;
    while half < w {
        for q in (0..w).step_by(2 * half) {
            let (lp, rp) = (q + half - 1, q + 2 * half - 1);
            if lp < pad {
                continue;
            }
            let (rl, lf) = ready[&lp].clone();
            let (rr, rf) = ready[&rp].clone();
            let path: Vec<usize> = (node(lp)..=node(rp)).collect();
            let arrival = links.relay(graph, prog, &path, &lf, width, rl)?;
            let at = arrival.max(rr);
            let f = format!("h{leaf}/{level}/{rp}");
            prog.push(
                at,
                Action::Combine {
                    node: node(rp),
                    left: Source::File(lf),
                    right: Source::File(rf),
                    out: f.clone(),
                    grains: None,
                },
            );
            ready.insert(rp, (at, f));
        }
        half *= 2;
        level += 1;
    }
    let (at, f) = ready[&(w - 1)].clone();
    prog.push(at, copy(b, &f, out));
    Ok(at)
}

/// Combining on a wheel for any associative operator: per-segment doubling,
/// then a computation tree over the segment products evaluated by the cover
/// pieces through the cloud, pieces multiplexed by round slots.
#[derive(Clone, Debug)]
pub struct Holistic<'a> {
    pub view: &'a WheelView,
    pub operator: Operator,
    pub input: String,
}

impl Holistic<'_> {
    pub fn program(&self) -> Result<Program> {
        let width = self.operator.bit_width() as u64;
        let layout = Layout::new(self.view, width)?;
        let g = self.view.graph();
        let tree = CompTree::new(layout.leaves.len());
        let mut progs = vec![Program::new(); layout.pieces.len()];
        let mut ready = 1;
        for (j, &p) in layout.leaves.iter().enumerate() {
            let seg = layout.segments[p].unwrap();
            let r = doubling(g, &mut progs[p], j, seg, &self.input, &value_file(&tree, j), width)?;
            ready = ready.max(r);
        }
        let groups = layout.groups();
        let high = tree_phases(g, &groups, &layout.leaves, width)?;
        let per_piece: Vec<(usize, Program)> = progs
            .into_iter()
            .zip(high)
            .enumerate()
            .map(|(p, (mut low, h))| {
                low.merge_at(ready - 1, &h);
                (p, low)
            })
            .collect();
        let (slots, load) = slots(groups.iter().enumerate().map(|(p, g)| (p, &g.members)));
        multiplex(&per_piece, &slots, load)
    }
}

/// A wheel combine algorithm plus its inputs, run as a driver.
#[derive(Clone, Debug)]
pub struct WheelCombRun {
    pub program: Program,
    pub operator: Operator,
    pub input: String,
    pub inputs: Vec<Bits>,
}

impl Driver for WheelCombRun {
    type Output = Bits;

    fn plan(&self, _: &NetworkGraph) -> Result<Plan> {
        Ok(Plan {
            program: self.program.clone(),
            initial: self
                .inputs
                .iter()
                .enumerate()
                .map(|(i, x)| (i, self.input.clone(), x.clone()))
                .collect(),
            initial_cloud: Vec::new(),
            operator: Some(self.operator.clone()),
        })
    }

    fn collect(&self, engine: &Engine) -> Result<Bits> {
        engine
            .cloud_file(0, RESULT_FILE)
            .ok_or_else(|| Error::MissingData(NodeId::Cloud(0), RESULT_FILE.into()))
    }
}

pub(crate) fn check_inputs(view: &WheelView, op: &Operator, inputs: &[Bits]) -> Result<()> {
    if inputs.len() != view.n() {
        return Err(Error::Unsupported(format!("{} inputs for {} nodes", inputs.len(), view.n())));
    }
    for x in inputs {
        crate::operators::check_width(op.bit_width(), x.len())?;
    }
    Ok(())
}

/// Ordered combine `S_0 ⊗ ... ⊗ S_{n-1}` on a wheel.
pub fn ccomb_wheel_holistic(view: &WheelView, operator: Operator, inputs: Vec<Bits>) -> Result<(Bits, RoundMetrics)> {
    check_inputs(view, &operator, &inputs)?;
    let h = Holistic {
        view,
        operator: operator.clone(),
        input: "in".into(),
    };
    let run = WheelCombRun {
        program: h.program()?,
        operator,
        input: h.input,
        inputs,
    };
    run_algorithm(&run, view.graph())
}
