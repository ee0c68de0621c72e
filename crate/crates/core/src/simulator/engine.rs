use std::collections::BTreeMap;

use serde_json::json;

use super::metrics::RoundMetrics;
use super::program::{Action, Program, Source};
use super::store::{Buffer, CloudStore, Store, WriteRecord};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::flowcore::{Op, Schedule};
use crate::model::{NetworkGraph, NodeId};
use crate::operators::{grain_range, Operator};

#[derive(Clone, Debug)]
struct Delivery {
    node: usize,
    file: String,
    offset: usize,
    bits: Bits,
}

/// Synchronous round engine.
///
/// Round `t` runs in this order: transfers issued in round `t-1` land; local
/// actions run; operations are checked against bandwidth and cloud rules;
/// sends and FR replies are queued for round `t+1` (FR sees the cloud as of
/// the end of round `t-1`); FW takes effect at the end of round `t`.
#[derive(Clone, Debug)]
pub struct Engine<'g> {
    graph: &'g NetworkGraph,
    operator: Option<Operator>,
    nodes: Vec<Store>,
    clouds: Vec<CloudStore>,
    pending: BTreeMap<u32, Vec<Delivery>>,
    metrics: RoundMetrics,
    trace: Option<Vec<serde_json::Value>>,
    round: u32,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g NetworkGraph) -> Self {
        Engine {
            graph,
            operator: None,
            nodes: vec![Store::new(); graph.processing_count()],
            clouds: vec![CloudStore::default(); graph.cloud_count()],
            pending: BTreeMap::new(),
            metrics: RoundMetrics::default(),
            trace: None,
            round: 0,
        }
    }

    pub fn with_operator(mut self, op: Operator) -> Self {
        self.operator = Some(op);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn graph(&self) -> &NetworkGraph {
        self.graph
    }

    /// Places `bits` in a node's file before the run.
    pub fn load(&mut self, node: usize, file: &str, bits: &Bits) {
        self.nodes[node].insert(file.to_string(), Buffer::full(bits));
    }

    pub fn load_cloud(&mut self, cloud: usize, file: &str, bits: &Bits) {
        self.clouds[cloud].files.insert(file.to_string(), Buffer::full(bits));
    }

    /// A complete local file.
    pub fn node_file(&self, node: usize, file: &str) -> Option<Bits> {
        self.nodes[node].get(file).and_then(Buffer::contents)
    }

    pub fn node_store(&self, node: usize) -> &Store {
        &self.nodes[node]
    }

    pub fn cloud(&self, cloud: usize) -> &CloudStore {
        &self.clouds[cloud]
    }

    pub fn cloud_file(&self, cloud: usize, file: &str) -> Option<Bits> {
        self.clouds[cloud].file(file)
    }

    pub fn metrics(&self) -> &RoundMetrics {
        &self.metrics
    }

    pub fn trace(&self) -> Option<&[serde_json::Value]> {
        self.trace.as_deref()
    }

    /// Last executed round.
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn run_schedule(&mut self, schedule: &Schedule) -> Result<()> {
        self.run(&Program::from(schedule))
    }

    /// Executes `program`, whose round 1 is the round after the last one
    /// executed. Transfers issued in the final round are landed before
    /// returning and counted in `rounds_elapsed`.
    pub fn run(&mut self, program: &Program) -> Result<()> {
        let base = self.round;
        for (k, actions) in program.rounds.iter().enumerate() {
            let t = base + k as u32 + 1;
            self.step(t, actions)?;
        }
        self.round = base + program.horizon().max(0);
        // Land what is still in flight; it arrives at the start of the next round.
        let later: Vec<u32> = self.pending.keys().copied().collect();
        for t in later {
            self.land(t);
            self.metrics.rounds_elapsed = self.metrics.rounds_elapsed.max(t);
        }
        Ok(())
    }

    fn emit(&mut self, event: serde_json::Value) {
        if let Some(tr) = &mut self.trace {
            tr.push(event);
        }
    }

    fn land(&mut self, t: u32) {
        for d in self.pending.remove(&t).unwrap_or_default() {
            self.metrics.bits_delivered += d.bits.len() as u64;
            self.emit(json!({"round": t, "kind": "deliver", "node": d.node, "file": d.file, "offset": d.offset, "len": d.bits.len()}));
            self.nodes[d.node]
                .entry(d.file)
                .or_default()
                .write(d.offset, &d.bits);
        }
    }

    fn node_bits(&self, t: u32, node: usize, file: &str, offset: u64, len: u64) -> Result<Bits> {
        self.nodes[node]
            .get(file)
            .and_then(|b| b.read(offset as usize, len as usize))
            .ok_or_else(|| {
                Error::schedule(
                    t,
                    format!("p{node} does not hold {file}[{offset}..{}]", offset + len),
                )
            })
    }

    fn operand(&self, t: u32, node: usize, src: &Source) -> Result<Option<Bits>> {
        match src {
            Source::Unit => Ok(None),
            Source::File(f) => self.nodes[node]
                .get(f)
                .and_then(Buffer::contents)
                .map(Some)
                .ok_or_else(|| Error::schedule(t, format!("p{node} lacks operand {f}"))),
        }
    }

    fn local(&mut self, t: u32, action: &Action) -> Result<()> {
        match action {
            Action::Combine {
                node,
                left,
                right,
                out,
                grains,
            } => {
                let op = self
                    .operator
                    .clone()
                    .ok_or_else(|| Error::schedule(t, "combine without an operator"))?;
                let node = *node;
                let (bits, offset) = match grains {
                    None => {
                        let a = self.operand(t, node, left)?;
                        let b = self.operand(t, node, right)?;
                        let r = match (a, b) {
                            (Some(a), Some(b)) => op.apply(&a, &b)?,
                            (Some(x), None) | (None, Some(x)) => x,
                            (None, None) => op.unit(),
                        };
                        (r, 0)
                    }
                    Some(ks) => {
                        let start = grain_range(op.as_ref(), ks.start).start;
                        let mut acc = Bits::new();
                        for k in ks.clone() {
                            let r = grain_range(op.as_ref(), k);
                            let a = self.grain_bits(t, node, left, r.clone())?;
                            let b = self.grain_bits(t, node, right, r)?;
                            let g = match (a, b) {
                                (Some(a), Some(b)) => op.apply_grain(k, &a, &b)?,
                                (Some(x), None) | (None, Some(x)) => x,
                                (None, None) => {
                                    op.unit()[grain_range(op.as_ref(), k)].to_bitvec()
                                }
                            };
                            acc.extend_from_bitslice(&g);
                        }
                        (acc, start)
                    }
                };
                self.metrics.combines.push((t, node));
                self.emit(json!({"round": t, "kind": "combine", "node": node, "out": out}));
                self.nodes[node]
                    .entry(out.clone())
                    .or_default()
                    .write(offset, &bits);
            }
            Action::Local {
                node,
                inputs,
                out,
                label,
                f,
            } => {
                let args = inputs
                    .iter()
                    .map(|name| {
                        self.nodes[*node]
                            .get(name)
                            .and_then(Buffer::contents)
                            .ok_or_else(|| Error::schedule(t, format!("p{node} lacks input {name}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let bits = f(&args)?;
                self.emit(json!({"round": t, "kind": "local", "node": node, "label": label, "out": out}));
                self.nodes[*node].insert(out.clone(), Buffer::full(&bits));
            }
            Action::Op(_) => unreachable!("ops are handled separately"),
        }
        Ok(())
    }

    fn grain_bits(
        &self,
        t: u32,
        node: usize,
        src: &Source,
        r: std::ops::Range<usize>,
    ) -> Result<Option<Bits>> {
        match src {
            Source::Unit => Ok(None),
            Source::File(f) => self.nodes[node]
                .get(f)
                .and_then(|b| b.read(r.start, r.len()))
                .map(Some)
                .ok_or_else(|| Error::schedule(t, format!("p{node} lacks grain {r:?} of {f}"))),
        }
    }

    fn step(&mut self, t: u32, actions: &[Action]) -> Result<()> {
        self.land(t);
        let mut active = !actions.is_empty();
        for a in actions {
            if !matches!(a, Action::Op(_)) {
                self.local(t, a)?;
            }
        }

        let mut usage: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
        let mut writes: BTreeMap<(usize, String), Vec<(u64, u64, usize, Bits)>> = BTreeMap::new();
        let mut reads: Vec<(usize, usize, String, u64, u64)> = Vec::new();
        for a in actions {
            let Action::Op(op) = a else { continue };
            if op.is_empty() {
                continue;
            }
            let (u, v) = op.link();
            if self.graph.bandwidth(u, v).is_none() {
                return Err(Error::schedule(t, format!("no link {u}->{v}")));
            }
            *usage.entry((u, v)).or_default() += op.len();
            match op {
                Op::Send {
                    src,
                    dst,
                    file,
                    offset,
                    len,
                } => {
                    let bits = self.node_bits(t, *src, file, *offset, *len)?;
                    self.emit(json!({"round": t, "kind": "send", "src": src, "dst": dst, "file": file, "offset": offset, "len": len}));
                    self.metrics.bits_sent += len;
                    self.metrics.bits_injected += len;
                    self.pending.entry(t + 1).or_default().push(Delivery {
                        node: *dst,
                        file: file.clone(),
                        offset: *offset as usize,
                        bits,
                    });
                }
                Op::Write {
                    node,
                    cloud,
                    file,
                    offset,
                    len,
                } => {
                    let bits = self.node_bits(t, *node, file, *offset, *len)?;
                    writes
                        .entry((*cloud, file.clone()))
                        .or_default()
                        .push((*offset, *len, *node, bits));
                }
                Op::Read {
                    node,
                    cloud,
                    file,
                    offset,
                    len,
                } => reads.push((*node, *cloud, file.clone(), *offset, *len)),
            }
        }
        for (&(u, v), &bits) in &usage {
            let w = self.graph.bandwidth(u, v).unwrap();
            if bits > w {
                return Err(Error::schedule(t, format!("{bits} bits on {u}->{v} exceed w = {w}")));
            }
            self.metrics.link_usage.entry((u, v)).or_default().insert(t, bits);
        }
        for ((cloud, file), ws) in &mut writes {
            ws.sort_by_key(|w| w.0);
            for pair in ws.windows(2) {
                if pair[0].0 + pair[0].1 > pair[1].0 {
                    return Err(Error::schedule(
                        t,
                        format!(
                            "overlapping FW to c{cloud}:{file} by p{} and p{}",
                            pair[0].2, pair[1].2
                        ),
                    ));
                }
            }
        }
        for (node, cloud, file, offset, len) in reads {
            if let Some(ws) = writes.get(&(cloud, file.clone())) {
                if ws.iter().any(|w| w.0 < offset + len && offset < w.0 + w.1) {
                    return Err(Error::schedule(
                        t,
                        format!("FR by p{node} overlaps a concurrent FW on c{cloud}:{file}"),
                    ));
                }
            }
            let bits = self.clouds[cloud]
                .files
                .get(&file)
                .and_then(|b| b.read(offset as usize, len as usize))
                .ok_or_else(|| {
                    Error::schedule(t, format!("FR of unwritten c{cloud}:{file}[{offset}..{}]", offset + len))
                })?;
            self.emit(json!({"round": t, "kind": "fr", "node": node, "cloud": cloud, "file": file, "offset": offset, "len": len}));
            self.metrics.bits_read += len;
            self.metrics.bits_injected += len;
            self.pending.entry(t + 1).or_default().push(Delivery {
                node,
                file,
                offset: offset as usize,
                bits,
            });
        }
        for ((cloud, file), ws) in writes {
            for (offset, len, node, bits) in ws {
                self.emit(json!({"round": t, "kind": "fw", "node": node, "cloud": cloud, "file": file, "offset": offset, "len": len}));
                self.metrics.bits_written += len;
                let store = &mut self.clouds[cloud];
                store.files.entry(file.clone()).or_default().write(offset as usize, &bits);
                store.ledger.push(WriteRecord {
                    round: t,
                    file: file.clone(),
                    offset,
                    len,
                    writer: node,
                });
            }
        }
        if self.pending.contains_key(&t) {
            active = true;
        }
        if active {
            self.metrics.rounds_elapsed = self.metrics.rounds_elapsed.max(t);
        }
        Ok(())
    }

    /// Bits currently in flight.
    pub fn in_flight(&self) -> u64 {
        self.pending
            .values()
            .flatten()
            .map(|d| d.bits.len() as u64)
            .sum()
    }
}

/// Replays a schedule from the given initial node files.
pub fn run_schedule<'g>(
    graph: &'g NetworkGraph,
    schedule: &Schedule,
    initial: &[(usize, String, Bits)],
) -> Result<Engine<'g>> {
    let mut e = Engine::new(graph);
    for (node, file, bits) in initial {
        e.load(*node, file, bits);
    }
    e.run_schedule(schedule)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::flowcore::cw_schedule;
    use crate::model::build_path_with_cloud;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn payload(len: usize) -> Bits {
        random_bits(&mut ChaCha8Rng::seed_from_u64(len as u64), len)
    }

    #[test]
    fn single_node_write() {
        let g = build_path_with_cloud(1, 4, 1);
        let s = cw_schedule(&g, 0, "f", 10).unwrap();
        let x = payload(10);
        let e = run_schedule(&g, &s, &[(0, "f".into(), x.clone())]).unwrap();
        assert_eq!(e.cloud_file(0, "f"), Some(x));
        assert_eq!(e.metrics().rounds_elapsed, 3);
        assert_eq!(e.metrics().bits_written, 10);
    }

    fn read_all(n: usize) -> Schedule {
        let mut s = Schedule::default();
        for i in 0..n {
            s.push(1, Op::Read { node: i, cloud: 0, file: "f".into(), offset: 0, len: 4 });
        }
        s
    }

    #[test]
    fn concurrent_reads_succeed() {
        let g = build_path_with_cloud(4, 4, 1);
        let mut e = Engine::new(&g);
        let x = payload(4);
        e.load_cloud(0, "f", &x);
        e.run_schedule(&read_all(4)).unwrap();
        for i in 0..4 {
            assert_eq!(e.node_file(i, "f"), Some(x.clone()));
        }
        assert_eq!(e.metrics().rounds_elapsed, 2);
    }

    #[test]
    fn overlapping_writes_abort() {
        let g = build_path_with_cloud(2, 4, 1);
        let mut s = Schedule::default();
        for i in 0..2 {
            s.push(1, Op::Write { node: i, cloud: 0, file: "f".into(), offset: 0, len: 2 });
        }
        let x = payload(2);
        let err = run_schedule(&g, &s, &[(0, "f".into(), x.clone()), (1, "f".into(), x)]).unwrap_err();
        assert!(matches!(err, Error::Schedule { round: 1, .. }), "{err}");
    }

    #[test]
    fn bandwidth_overflow_aborts() {
        let g = build_path_with_cloud(1, 3, 1);
        let mut s = Schedule::default();
        s.push(1, Op::Write { node: 0, cloud: 0, file: "f".into(), offset: 0, len: 4 });
        let err = run_schedule(&g, &s, &[(0, "f".into(), payload(4))]).unwrap_err();
        assert!(err.to_string().contains("exceed"), "{err}");
    }

    #[test]
    fn unwritten_read_aborts() {
        let g = build_path_with_cloud(1, 4, 1);
        let err = run_schedule(&g, &read_all(1), &[]).unwrap_err();
        assert!(err.to_string().contains("unwritten"), "{err}");
    }

    #[test]
    fn reads_do_not_see_same_round_writes() {
        let g = build_path_with_cloud(2, 4, 1);
        let mut s = Schedule::default();
        s.push(1, Op::Write { node: 0, cloud: 0, file: "f".into(), offset: 0, len: 4 });
        s.push(1, Op::Read { node: 1, cloud: 0, file: "g".into(), offset: 0, len: 4 });
        let mut e = Engine::new(&g);
        e.load(0, "f", &payload(4));
        e.load_cloud(0, "g", &payload(3));
        assert!(e.run_schedule(&s).is_err());
        let mut later = Schedule::default();
        later.push(1, Op::Write { node: 0, cloud: 0, file: "f".into(), offset: 0, len: 4 });
        later.push(2, Op::Read { node: 1, cloud: 0, file: "f".into(), offset: 0, len: 4 });
        let e = run_schedule(&g, &later, &[(0, "f".into(), payload(4))]).unwrap();
        assert_eq!(e.node_file(1, "f"), Some(payload(4)));
        assert_eq!(e.metrics().rounds_elapsed, 3);
    }

    #[test]
    fn write_and_read_in_one_round() {
        let g = build_path_with_cloud(1, 4, 1);
        let mut s = Schedule::default();
        s.push(1, Op::Write { node: 0, cloud: 0, file: "a".into(), offset: 0, len: 4 });
        s.push(1, Op::Read { node: 0, cloud: 0, file: "b".into(), offset: 0, len: 4 });
        let mut e = Engine::new(&g);
        e.load(0, "a", &payload(4));
        e.load_cloud(0, "b", &payload(5));
        e.run_schedule(&s).unwrap();
        assert!(e.node_file(0, "b").is_some());
    }
}
