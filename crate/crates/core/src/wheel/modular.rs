use std::collections::{BTreeMap, HashMap};

use super::holistic::{check_inputs, WheelCombRun};
use super::layout::Layout;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::flowcore::Op;
use crate::model::{NodeId, WheelView};
use crate::operators::{grain_count, grain_range, Operator};
use crate::pipeline::{assign_ranges, value_file, CompTree};
use crate::simulator::{run_algorithm, Action, Program, RoundMetrics, Source};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Loc {
    Node(usize),
    Cloud,
}

#[derive(Clone, Debug)]
enum Task {
    Move {
        from: Loc,
        to: Loc,
        file: String,
        grain: usize,
        prio: (usize, usize, u8),
    },
    Combine {
        node: usize,
        left: Option<String>,
        right: Option<String>,
        out: String,
        grain: usize,
    },
}

/// Greedy list scheduling of grain moves and grain combines. Every link,
/// uplink and downlink carries whole grains up to its bandwidth each round;
/// competing moves are served by priority.
struct Sim<'a> {
    view: &'a WheelView,
    op: &'a Operator,
    g: u64,
    ready: HashMap<(Loc, String, usize), u32>,
    tasks: Vec<Task>,
    prog: Program,
}

impl<'a> Sim<'a> {
    fn available(&self, at: Loc, file: &Option<String>, grain: usize, t: u32) -> bool {
        match file {
            None => true,
            Some(f) => self.ready.get(&(at, f.clone(), grain)).is_some_and(|&r| r <= t),
        }
    }

    fn capacity(&self, from: Loc, to: Loc) -> u64 {
        let g = self.view.graph();
        let w = match (from, to) {
            (Loc::Node(u), Loc::Node(v)) => g.bandwidth(NodeId::Proc(u), NodeId::Proc(v)).unwrap_or(0),
            (Loc::Node(u), Loc::Cloud) => g.up(u),
            (Loc::Cloud, Loc::Node(v)) => g.down(v),
            (Loc::Cloud, Loc::Cloud) => 0,
        };
        w / self.g
    }

    fn op(&self, from: Loc, to: Loc, file: &str, grain: usize) -> Op {
        let r = grain_range(self.op.as_ref(), grain);
        let (offset, len) = (r.start as u64, r.len() as u64);
        let file = file.to_string();
        match (from, to) {
            (Loc::Node(src), Loc::Node(dst)) => Op::Send { src, dst, file, offset, len },
            (Loc::Node(node), Loc::Cloud) => Op::Write { node, cloud: 0, file, offset, len },
            (Loc::Cloud, Loc::Node(node)) => Op::Read { node, cloud: 0, file, offset, len },
            (Loc::Cloud, Loc::Cloud) => unreachable!("cloud to cloud move"),
        }
    }

    fn run(mut self) -> Result<Program> {
        let mut t = 1;
        let mut last_progress = 1;
        while !self.tasks.is_empty() {
            // Local combines first, chained within the round.
            loop {
                let mut done = Vec::new();
                for (i, task) in self.tasks.iter().enumerate() {
                    if let Task::Combine { node, left, right, grain, .. } = task {
                        let at = Loc::Node(*node);
                        if self.available(at, left, *grain, t) && self.available(at, right, *grain, t) {
                            done.push(i);
                        }
                    }
                }
                if done.is_empty() {
                    break;
                }
                for &i in done.iter().rev() {
                    let Task::Combine { node, left, right, out, grain } = self.tasks.swap_remove(i) else {
                        unreachable!()
                    };
                    let src = |f: Option<String>| f.map(Source::File).unwrap_or(Source::Unit);
                    self.prog.push(
                        t,
                        Action::Combine {
                            node,
                            left: src(left),
                            right: src(right),
                            out: out.clone(),
                            grains: Some(grain..grain + 1),
                        },
                    );
                    self.ready.insert((Loc::Node(node), out, grain), t);
                }
                last_progress = t;
            }

            let mut eligible: Vec<usize> = (0..self.tasks.len())
                .filter(|&i| match &self.tasks[i] {
                    Task::Move { from, file, grain, .. } => self.available(*from, &Some(file.clone()), *grain, t),
                    Task::Combine { .. } => false,
                })
                .collect();
            eligible.sort_by_key(|&i| match &self.tasks[i] {
                Task::Move { prio, .. } => *prio,
                Task::Combine { .. } => unreachable!(),
            });
            let mut used: BTreeMap<(Loc, Loc), u64> = BTreeMap::new();
            let mut sent = Vec::new();
            for i in eligible {
                let Task::Move { from, to, file, grain, .. } = &self.tasks[i] else {
                    unreachable!()
                };
                let key = match (*from, *to) {
                    // Uplinks and downlinks are budgets of the node, not of the cloud.
                    (Loc::Node(u), Loc::Cloud) => (Loc::Node(u), Loc::Cloud),
                    (Loc::Cloud, Loc::Node(v)) => (Loc::Cloud, Loc::Node(v)),
                    k => k,
                };
                let u = used.entry(key).or_default();
                if *u < self.capacity(*from, *to) {
                    *u += 1;
                    let op = self.op(*from, *to, file, *grain);
                    self.prog.push(t, op);
                    self.ready.insert((*to, file.clone(), *grain), t + 1);
                    sent.push(i);
                }
            }
            if !sent.is_empty() {
                last_progress = t;
            }
            sent.sort_unstable();
            for &i in sent.iter().rev() {
                self.tasks.swap_remove(i);
            }
            if t > last_progress + 1 {
                return Err(Error::InfeasibleFlow(format!(
                    "grain schedule stalls at round {t} with {} tasks left",
                    self.tasks.len()
                )));
            }
            t += 1;
        }
        Ok(self.prog)
    }
}

/// Grain ownership inside one piece, proportional to cloud bandwidth.
fn owners(view: &WheelView, layout: &Layout, piece: usize, grains: usize) -> Vec<usize> {
    let (a, b) = layout.pieces[piece];
    let weights: Vec<(usize, u64)> = (a..=b).map(|v| (v, view.bc(v))).collect();
    let mut own = vec![a; grains];
    for (v, off, len) in assign_ranges(&weights, grains as u64) {
        for k in off..off + len {
            own[k as usize] = v;
        }
    }
    own
}

/// Combining on a wheel for modular operators. Inside each piece every node
/// owns a share of the grains and assembles them from running products
/// that travel along the ring in both directions; across pieces the grains
/// of the computation tree move through the cloud independently of each
/// other. All transfers share link budgets and are scheduled greedily.
#[derive(Clone, Debug)]
pub struct Modular<'a> {
    pub view: &'a WheelView,
    pub operator: Operator,
    pub input: String,
}

impl Modular<'_> {
    pub fn program(&self) -> Result<Program> {
        let op = &self.operator;
        let Some(g) = op.grain_size() else {
            return Err(Error::Unsupported(format!("{} is not modular", op.name())));
        };
        let g = g as u64;
        let view = self.view;
        for (u, v, w) in view.graph().links() {
            if w < g {
                return Err(Error::Unsupported(format!("link {u}->{v} of bandwidth {w} cannot carry a grain of {g} bits")));
            }
        }
        let width = op.bit_width() as u64;
        let grains = grain_count(op.as_ref());
        let layout = Layout::new(view, width)?;
        let tree = CompTree::new(layout.leaves.len());
        let heights = tree.heights();
        let owner: Vec<Vec<usize>> = (0..layout.pieces.len()).map(|p| owners(view, &layout, p, grains)).collect();
        let piece_of = |id: usize| if id < tree.leaves { layout.leaves[id] } else { id - tree.leaves };

        let mut tasks = Vec::new();
        let mv = |from, to, file: &String, grain, prio| Task::Move {
            from,
            to,
            file: file.clone(),
            grain,
            prio,
        };
        let comb = |node, left: Option<&String>, right: Option<&String>, out: &String, grain| Task::Combine {
            node,
            left: left.cloned(),
            right: right.cloned(),
            out: out.clone(),
            grain,
        };

        for (j, &p) in layout.leaves.iter().enumerate() {
            let (a, b) = layout.segments[p].unwrap();
            let rf = |v: usize| format!("R{j}/{v}");
            let lf = |v: usize| format!("L{j}/{v}");
            let out = value_file(&tree, j);
            for k in 0..grains {
                let x = owner[p][k];
                let prio = (k, 0, 0);
                if x > a {
                    tasks.push(comb(a, Some(&self.input), None, &rf(a), k));
                    for v in a + 1..=x {
                        tasks.push(mv(Loc::Node(v - 1), Loc::Node(v), &rf((v - 1).min(b)), k, prio));
                        if v < x && v <= b {
                            tasks.push(comb(v, Some(&rf(v - 1)), Some(&self.input), &rf(v), k));
                        }
                    }
                }
                if x < b {
                    tasks.push(comb(b, Some(&self.input), None, &lf(b), k));
                    for v in (x..b).rev() {
                        tasks.push(mv(Loc::Node(v + 1), Loc::Node(v), &lf((v + 1).max(a)), k, prio));
                        if v > x && v >= a {
                            tasks.push(comb(v, Some(&self.input), Some(&lf(v + 1)), &lf(v), k));
                        }
                    }
                }
                let left = (x > a).then(|| rf((x - 1).min(b)));
                let mid = (a <= x && x <= b).then(|| self.input.clone());
                let right = (x < b).then(|| lf((x + 1).max(a)));
                let tmp = format!("T{j}");
                tasks.push(comb(x, left.as_ref(), mid.as_ref(), &tmp, k));
                tasks.push(comb(x, Some(&tmp), right.as_ref(), &out, k));
            }
        }

        for (k, &(l, r)) in tree.internal.iter().enumerate() {
            let y = tree.leaves + k;
            let h = heights[y];
            let out = value_file(&tree, y);
            for q in 0..grains {
                let x = owner[k][q];
                let mut operands = Vec::new();
                for (side, c) in [(0u8, l), (1, r)] {
                    let f = value_file(&tree, c);
                    let holder = owner[piece_of(c)][q];
                    if holder != x {
                        tasks.push(mv(Loc::Node(holder), Loc::Cloud, &f, q, (q, h, side)));
                        tasks.push(mv(Loc::Cloud, Loc::Node(x), &f, q, (q, h, side)));
                    }
                    operands.push(f);
                }
                tasks.push(comb(x, Some(&operands[0]), Some(&operands[1]), &out, q));
            }
        }
        let root = tree.root();
        let rf = value_file(&tree, root);
        for q in 0..grains {
            let x = owner[piece_of(root)][q];
            tasks.push(mv(Loc::Node(x), Loc::Cloud, &rf, q, (q, tree.height() + 1, 0)));
        }

        Sim {
            view,
            op,
            g,
            ready: self
                .initial_ready()
                .into_iter()
                .collect(),
            tasks,
            prog: Program::new(),
        }
        .run()
    }

    fn initial_ready(&self) -> Vec<((Loc, String, usize), u32)> {
        let grains = grain_count(self.operator.as_ref());
        (0..self.view.n())
            .flat_map(|v| (0..grains).map(move |k| ((Loc::Node(v), self.input.clone(), k), 1)))
            .collect()
    }
}

/// Ordered combine on a wheel for modular operators.
pub fn ccomb_wheel_modular(view: &WheelView, operator: Operator, inputs: Vec<Bits>) -> Result<(Bits, RoundMetrics)> {
    check_inputs(view, &operator, &inputs)?;
    let m = Modular {
        view,
        operator: operator.clone(),
        input: "in".into(),
    };
    let run = WheelCombRun {
        program: m.program()?,
        operator,
        input: m.input,
        inputs,
    };
    run_algorithm(&run, view.graph())
}
