use std::collections::BTreeMap;

use serde::Serialize;

use super::dynamic::{evacuation_flow, DynamicFlow};
use crate::error::{Error, Result};
use crate::model::{NetworkGraph, NodeId};

/// A communication operation. Offsets address bits of a named file; the
/// same name refers to the node's local copy and the cloud copy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Send {
        src: usize,
        dst: usize,
        file: String,
        offset: u64,
        len: u64,
    },
    /// FW: node `node` writes its local bits into the cloud file.
    Write {
        node: usize,
        cloud: usize,
        file: String,
        offset: u64,
        len: u64,
    },
    /// FR: node `node` reads cloud bits; they arrive next round.
    Read {
        node: usize,
        cloud: usize,
        file: String,
        offset: u64,
        len: u64,
    },
}

impl Op {
    pub fn len(&self) -> u64 {
        match self {
            Op::Send { len, .. } | Op::Write { len, .. } | Op::Read { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn file(&self) -> &str {
        match self {
            Op::Send { file, .. } | Op::Write { file, .. } | Op::Read { file, .. } => file,
        }
    }

    pub fn offset(&self) -> u64 {
        match self {
            Op::Send { offset, .. } | Op::Write { offset, .. } | Op::Read { offset, .. } => *offset,
        }
    }

    /// The link the operation occupies.
    pub fn link(&self) -> (NodeId, NodeId) {
        match *self {
            Op::Send { src, dst, .. } => (NodeId::Proc(src), NodeId::Proc(dst)),
            Op::Write { node, cloud, .. } => (NodeId::Proc(node), NodeId::Cloud(cloud)),
            Op::Read { node, cloud, .. } => (NodeId::Cloud(cloud), NodeId::Proc(node)),
        }
    }

    /// The processing node that issues the operation.
    pub fn actor(&self) -> usize {
        match *self {
            Op::Send { src, .. } => src,
            Op::Write { node, .. } | Op::Read { node, .. } => node,
        }
    }

    /// The same transfer with information flowing the other way.
    pub fn reversed(&self) -> Op {
        match self.clone() {
            Op::Send {
                src,
                dst,
                file,
                offset,
                len,
            } => Op::Send {
                src: dst,
                dst: src,
                file,
                offset,
                len,
            },
            Op::Write {
                node,
                cloud,
                file,
                offset,
                len,
            } => Op::Read {
                node,
                cloud,
                file,
                offset,
                len,
            },
            Op::Read {
                node,
                cloud,
                file,
                offset,
                len,
            } => Op::Write {
                node,
                cloud,
                file,
                offset,
                len,
            },
        }
    }

    fn with_range(&self, offset: u64, len: u64) -> Op {
        let mut op = self.clone();
        match &mut op {
            Op::Send { offset: o, len: l, .. }
            | Op::Write { offset: o, len: l, .. }
            | Op::Read { offset: o, len: l, .. } => {
                *o = offset;
                *l = len;
            }
        }
        op
    }

    /// Key under which contiguous ranges may merge.
    fn merge_key(&self) -> (u8, usize, usize, &str) {
        match self {
            Op::Send { src, dst, file, .. } => (0, *src, *dst, file),
            Op::Write { node, cloud, file, .. } => (1, *node, *cloud, file),
            Op::Read { node, cloud, file, .. } => (2, *node, *cloud, file),
        }
    }
}

/// One entry of the schedule dump.
#[derive(Clone, Debug, Serialize)]
pub struct ScheduleEntry {
    pub round: u32,
    pub op: &'static str,
    pub src: String,
    pub dst: String,
    pub offset: u64,
    pub len: u64,
    pub file: String,
}

/// Operations per round. `rounds[r - 1]` holds round `r`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub rounds: Vec<Vec<Op>>,
    /// Bits each node holds at the start.
    pub supplies: BTreeMap<NodeId, u64>,
    /// Bits each node must hold at the end.
    pub demands: BTreeMap<NodeId, u64>,
}

impl Schedule {
    /// Last round with an operation.
    pub fn horizon(&self) -> u32 {
        self.rounds
            .iter()
            .rposition(|r| !r.is_empty())
            .map_or(0, |k| k as u32 + 1)
    }

    /// Rounds until every transfer has landed: reads and sends deliver one
    /// round after they are issued.
    pub fn completion(&self) -> u32 {
        let h = self.horizon();
        if h == 0 {
            return 0;
        }
        let last = &self.rounds[h as usize - 1];
        if last.iter().any(|op| !matches!(op, Op::Write { .. })) {
            h + 1
        } else {
            h
        }
    }

    pub fn push(&mut self, round: u32, op: Op) {
        assert!(round >= 1, "rounds start at 1");
        if self.rounds.len() < round as usize {
            self.rounds.resize(round as usize, Vec::new());
        }
        self.rounds[round as usize - 1].push(op);
    }

    pub fn ops(&self) -> impl Iterator<Item = (u32, &Op)> {
        self.rounds
            .iter()
            .enumerate()
            .flat_map(|(k, ops)| ops.iter().map(move |op| (k as u32 + 1, op)))
    }

    /// Time reversal: round `r` becomes `H + 1 - r`, sends flip direction and
    /// FW/FR swap.
    pub fn reversed(&self) -> Schedule {
        let h = self.horizon() as usize;
        let mut rounds = vec![Vec::new(); h];
        for (r, op) in self.ops() {
            rounds[h - r as usize].push(op.reversed());
        }
        let mut out = Schedule {
            rounds,
            supplies: self.demands.clone(),
            demands: self.supplies.clone(),
        };
        out.normalize();
        out
    }

    /// Sorts each round and merges adjacent ranges of the same transfer.
    pub fn normalize(&mut self) {
        for ops in &mut self.rounds {
            ops.sort_by(|a, b| a.merge_key().cmp(&b.merge_key()).then(a.offset().cmp(&b.offset())));
            let mut merged: Vec<Op> = Vec::with_capacity(ops.len());
            for op in ops.drain(..) {
                if let Some(last) = merged.last_mut() {
                    if last.merge_key() == op.merge_key() && last.offset() + last.len() == op.offset() {
                        *last = last.with_range(last.offset(), last.len() + op.len());
                        continue;
                    }
                }
                merged.push(op);
            }
            *ops = merged;
        }
    }

    pub fn dump(&self) -> Vec<ScheduleEntry> {
        self.ops()
            .map(|(round, op)| {
                let (u, v) = op.link();
                ScheduleEntry {
                    round,
                    op: match op {
                        Op::Send { .. } => "send",
                        Op::Write { .. } => "fw",
                        Op::Read { .. } => "fr",
                    },
                    src: u.to_string(),
                    dst: v.to_string(),
                    offset: op.offset(),
                    len: op.len(),
                    file: op.file().to_string(),
                }
            })
            .collect()
    }
}

/// Whether a schedule moves data into the cloud or out of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Write,
    Read,
}

/// Turns a flow into a schedule.
///
/// For [`Direction::Write`] the flow runs from the sources in `files` to a
/// cloud sink. For [`Direction::Read`] the flow is the write flow on the
/// reversed graph and the result is its time reversal. Each source's payload
/// is its file `[0, F(v))`. FW operations are grouped by (round, node,
/// origin) and receive consecutive offsets per origin in that order.
pub fn flow_to_schedule(
    flow: &DynamicFlow,
    files: &BTreeMap<NodeId, String>,
    direction: Direction,
) -> Result<Schedule> {
    let sink = match flow.demands.keys().collect::<Vec<_>>()[..] {
        [] => return Ok(Schedule::default()),
        [&v] => v,
        _ => return Err(Error::InvalidFlow("expected a single sink".into())),
    };
    for v in flow.supplies.keys() {
        if !files.contains_key(v) {
            return Err(Error::InvalidFlow(format!("no file name for source {v}")));
        }
    }
    let f = without_sink_outflow(flow, sink)?;
    let paths = decompose(&f, sink)?;

    // Offsets per origin, in (round, node) order of the final hop.
    let mut groups: BTreeMap<(u32, NodeId, NodeId), Vec<usize>> = BTreeMap::new();
    for (k, p) in paths.iter().enumerate() {
        let &(last_u, _, last_j) = p.arcs.last().expect("non-empty path");
        groups.entry((last_j, last_u, p.origin)).or_default().push(k);
    }
    let mut next: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut sched = Schedule {
        rounds: Vec::new(),
        supplies: f.supplies.clone(),
        demands: f.demands.clone(),
    };
    for ((_, _, origin), members) in groups {
        for k in members {
            let p = &paths[k];
            let off = next.entry(origin).or_default();
            let (offset, len) = (*off, p.amount);
            *off += len;
            let file = files[&origin].clone();
            for &(u, v, j) in &p.arcs {
                let op = match (u, v) {
                    (NodeId::Proc(a), NodeId::Proc(b)) => Op::Send {
                        src: a,
                        dst: b,
                        file: file.clone(),
                        offset,
                        len,
                    },
                    (NodeId::Proc(a), NodeId::Cloud(c)) => Op::Write {
                        node: a,
                        cloud: c,
                        file: file.clone(),
                        offset,
                        len,
                    },
                    (NodeId::Cloud(c), NodeId::Proc(b)) => Op::Read {
                        node: b,
                        cloud: c,
                        file: file.clone(),
                        offset,
                        len,
                    },
                    _ => return Err(Error::InvalidFlow(format!("flow on cloud-cloud arc {u}->{v}"))),
                };
                sched.push(j, op);
            }
        }
    }
    sched.normalize();
    Ok(match direction {
        Direction::Write => sched,
        Direction::Read => sched.reversed(),
    })
}

/// The rewrite that stops flow from leaving the sink: every other node's
/// outflow in a round is truncated greedily to the stock it holds.
fn without_sink_outflow(flow: &DynamicFlow, sink: NodeId) -> Result<DynamicFlow> {
    let mut stock: BTreeMap<NodeId, u64> = flow.supplies.clone();
    let mut out = DynamicFlow {
        horizon: flow.horizon,
        values: BTreeMap::new(),
        supplies: flow.supplies.clone(),
        demands: flow.demands.clone(),
    };
    let by_round = flow.by_round();
    for j in 1..=flow.horizon {
        let mut arrivals: Vec<(NodeId, u64)> = Vec::new();
        let mut avail = stock.clone();
        for &(u, v, x) in by_round.get(&j).into_iter().flatten() {
            if u == sink {
                continue;
            }
            let have = avail.entry(u).or_default();
            let kept = x.min(*have);
            if kept > 0 {
                *have -= kept;
                out.values.insert((u, v, j), kept);
                arrivals.push((v, kept));
            }
        }
        stock = avail;
        for (v, x) in arrivals {
            *stock.entry(v).or_default() += x;
        }
    }
    let total = flow.value();
    let at_sink = stock.get(&sink).copied().unwrap_or(0);
    if at_sink != total {
        return Err(Error::InvalidFlow(format!(
            "only {at_sink} of {total} bits reach {sink}; the flow is not valid"
        )));
    }
    Ok(out)
}

struct Path {
    origin: NodeId,
    amount: u64,
    /// Transit arcs `(u, v, round)` in order.
    arcs: Vec<(NodeId, NodeId, u32)>,
}

/// Path decomposition over the time-expanded graph. Holdover amounts are
/// implied by stock; walks prefer transit arcs in arc order.
fn decompose(flow: &DynamicFlow, sink: NodeId) -> Result<Vec<Path>> {
    let horizon = flow.horizon;
    let mut rem: BTreeMap<(NodeId, NodeId, u32), u64> = flow.values.clone();
    // out_at[(u, j)] lists arcs leaving u in round j.
    let mut out_at: BTreeMap<(NodeId, u32), Vec<NodeId>> = BTreeMap::new();
    for &(u, v, j) in flow.values.keys() {
        out_at.entry((u, j)).or_default().push(v);
    }
    // hold[(v, t)] is the flow on (v,t) -> (v,t+1).
    let mut hold: BTreeMap<(NodeId, u32), u64> = BTreeMap::new();
    let mut stock: BTreeMap<NodeId, u64> = flow.supplies.clone();
    let by_round = flow.by_round();
    for t in 0..horizon {
        let mut next = stock.clone();
        for &(u, v, x) in by_round.get(&(t + 1)).into_iter().flatten() {
            *next.get_mut(&u).expect("validated stock") -= x;
            *next.entry(v).or_default() += x;
        }
        for (&v, &s) in &stock {
            let sent: u64 = by_round
                .get(&(t + 1))
                .into_iter()
                .flatten()
                .filter(|(u, _, _)| *u == v)
                .map(|&(_, _, x)| x)
                .sum();
            if s > sent && v != sink {
                hold.insert((v, t), s - sent);
            }
        }
        stock = next;
    }

    let mut paths = Vec::new();
    for (&origin, &supply) in &flow.supplies {
        let mut left = supply;
        while left > 0 {
            let mut arcs = Vec::new();
            let mut holds = Vec::new();
            let mut amount = left;
            let (mut v, mut t) = (origin, 0u32);
            while v != sink {
                if t >= horizon {
                    return Err(Error::InvalidFlow(format!("flow stranded at {v}")));
                }
                let step = out_at
                    .get(&(v, t + 1))
                    .into_iter()
                    .flatten()
                    .copied()
                    .find(|&w| rem[&(v, w, t + 1)] > 0);
                match step {
                    Some(w) => {
                        amount = amount.min(rem[&(v, w, t + 1)]);
                        arcs.push((v, w, t + 1));
                        v = w;
                    }
                    None => {
                        let h = hold.get(&(v, t)).copied().unwrap_or(0);
                        if h == 0 {
                            return Err(Error::InvalidFlow(format!("no outflow at ({v}, {t})")));
                        }
                        amount = amount.min(h);
                        holds.push((v, t));
                    }
                }
                t += 1;
            }
            for a in &arcs {
                *rem.get_mut(a).unwrap() -= amount;
            }
            for h in &holds {
                *hold.get_mut(h).unwrap() -= amount;
            }
            left -= amount;
            paths.push(Path {
                origin,
                amount,
                arcs,
            });
        }
    }
    Ok(paths)
}

/// Per-round totals of a schedule as a flow. `supplies` and `demands` are
/// carried over from the schedule.
pub fn schedule_to_flow(schedule: &Schedule, graph: &NetworkGraph) -> Result<DynamicFlow> {
    let mut values: BTreeMap<(NodeId, NodeId, u32), u64> = BTreeMap::new();
    for (r, op) in schedule.ops() {
        let (u, v) = op.link();
        let Some(w) = graph.bandwidth(u, v) else {
            return Err(Error::schedule(r, format!("no link {u}->{v}")));
        };
        let x = values.entry((u, v, r)).or_default();
        *x += op.len();
        if *x > w {
            return Err(Error::schedule(r, format!("{x} bits exceed w({u},{v}) = {w}")));
        }
    }
    values.retain(|_, x| *x > 0);
    Ok(DynamicFlow {
        horizon: schedule.horizon(),
        values,
        supplies: schedule.supplies.clone(),
        demands: schedule.demands.clone(),
    })
}

/// One transfer of a collective read or write: `node` writes (or reads)
/// `size` bits of `file`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub node: usize,
    pub file: String,
    pub size: u64,
}

impl Transfer {
    pub fn new(node: usize, file: impl Into<String>, size: u64) -> Self {
        Transfer {
            node,
            file: file.into(),
            size,
        }
    }
}

fn collective(graph: &NetworkGraph, transfers: &[Transfer], direction: Direction) -> Result<Schedule> {
    let mut supplies = BTreeMap::new();
    let mut files = BTreeMap::new();
    for t in transfers {
        if t.size == 0 {
            continue;
        }
        let v = NodeId::Proc(t.node);
        if supplies.insert(v, t.size).is_some() {
            return Err(Error::Unsupported(format!("two transfers for p{}", t.node)));
        }
        files.insert(v, t.file.clone());
    }
    let g = match direction {
        Direction::Write => graph.clone(),
        Direction::Read => graph.reversed(),
    };
    let (_, flow) = evacuation_flow(&g, &supplies, NodeId::Cloud(0))?;
    flow_to_schedule(&flow, &files, direction)
}

/// Optimal cAW: every transfer's file lands in cloud 0.
pub fn caw_schedule(graph: &NetworkGraph, transfers: &[Transfer]) -> Result<Schedule> {
    collective(graph, transfers, Direction::Write)
}

/// Optimal cAR: every node ends up holding its transfer's file.
pub fn car_schedule(graph: &NetworkGraph, transfers: &[Transfer]) -> Result<Schedule> {
    collective(graph, transfers, Direction::Read)
}

pub fn cw_schedule(graph: &NetworkGraph, node: usize, file: &str, size: u64) -> Result<Schedule> {
    caw_schedule(graph, &[Transfer::new(node, file, size)])
}

pub fn cr_schedule(graph: &NetworkGraph, node: usize, file: &str, size: u64) -> Result<Schedule> {
    car_schedule(graph, &[Transfer::new(node, file, size)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowcore::quickest_flow;
    use crate::model::build_path_with_cloud;

    #[test]
    fn single_node_schedule() {
        let g = build_path_with_cloud(1, 4, 1);
        let s = cw_schedule(&g, 0, "f", 10).unwrap();
        assert_eq!(s.horizon(), 3);
        let lens: Vec<Vec<u64>> = s.rounds.iter().map(|r| r.iter().map(Op::len).collect()).collect();
        assert_eq!(lens.iter().map(|r| r.iter().sum::<u64>()).collect::<Vec<_>>(), vec![4, 4, 2]);
        let mut offsets: Vec<(u64, u64)> = s.ops().map(|(_, op)| (op.offset(), op.len())).collect();
        offsets.sort();
        assert_eq!(offsets.first().unwrap().0, 0);
        assert_eq!(offsets.iter().map(|x| x.1).sum::<u64>(), 10);
    }

    #[test]
    fn read_is_time_reversed_write() {
        let g = build_path_with_cloud(1, 4, 1);
        let r = cr_schedule(&g, 0, "f", 10).unwrap();
        assert!(r.ops().all(|(_, op)| matches!(op, Op::Read { .. })));
        assert_eq!(r.horizon(), 3);
        assert_eq!(r.completion(), 4);
    }

    #[test]
    fn flow_roundtrip() {
        let mut g = NetworkGraph::new(2, 1);
        g.set_symmetric(NodeId::Proc(0), NodeId::Proc(1), 2);
        g.set_cloud_link(1, 0, 2, 2);
        let (t, f) = quickest_flow(&g, NodeId::Proc(0), NodeId::Cloud(0), 4).unwrap();
        let files = BTreeMap::from([(NodeId::Proc(0), "x".to_string())]);
        let s = flow_to_schedule(&f, &files, Direction::Write).unwrap();
        assert!(s.horizon() <= t);
        let back = schedule_to_flow(&s, &g).unwrap();
        back.validate(&g).unwrap();
        assert_eq!(back.value(), f.value());
    }

    #[test]
    fn sink_outflow_is_removed() {
        // 1 bit goes p0 -> c0, leaves to p1 and comes back.
        let mut g = NetworkGraph::new(2, 1);
        g.set_cloud_link(0, 0, 1, 1);
        g.set_cloud_link(1, 0, 1, 1);
        let c = NodeId::Cloud(0);
        let f = DynamicFlow {
            horizon: 3,
            values: BTreeMap::from([
                ((NodeId::Proc(0), c, 1), 1),
                ((c, NodeId::Proc(1), 2), 1),
                ((NodeId::Proc(1), c, 3), 1),
            ]),
            supplies: BTreeMap::from([(NodeId::Proc(0), 1)]),
            demands: BTreeMap::from([(c, 1)]),
        };
        f.validate(&g).unwrap();
        let files = BTreeMap::from([(NodeId::Proc(0), "x".to_string())]);
        let s = flow_to_schedule(&f, &files, Direction::Write).unwrap();
        assert_eq!(s.horizon(), 1);
        assert_eq!(s.ops().count(), 1);
    }

    #[test]
    fn empty_schedule_gives_zero_flow() {
        let g = build_path_with_cloud(2, 1, 1);
        let f = schedule_to_flow(&Schedule::default(), &g).unwrap();
        assert_eq!(f.value(), 0);
        assert!(f.values.is_empty());
    }

    #[test]
    fn hand_written_schedule_to_flow() {
        let g = build_path_with_cloud(2, 2, 3);
        let mut s = Schedule::default();
        s.push(1, Op::Send { src: 0, dst: 1, file: "a".into(), offset: 0, len: 3 });
        s.push(1, Op::Write { node: 0, cloud: 0, file: "a".into(), offset: 3, len: 1 });
        s.push(2, Op::Write { node: 1, cloud: 0, file: "a".into(), offset: 0, len: 2 });
        s.push(3, Op::Write { node: 1, cloud: 0, file: "a".into(), offset: 2, len: 1 });
        s.supplies.insert(NodeId::Proc(0), 4);
        s.demands.insert(NodeId::Cloud(0), 4);
        let f = schedule_to_flow(&s, &g).unwrap();
        f.validate(&g).unwrap();
        assert_eq!(f.horizon, 3);
        assert_eq!(f.get(NodeId::Proc(0), NodeId::Proc(1), 1), 3);
        assert_eq!(f.get(NodeId::Proc(1), NodeId::Cloud(0), 2), 2);
    }
}
