//! Building blocks shared by the topology-specific algorithms: greedy
//! writes along a tree, the shape of the cross-cluster computation tree, and
//! round multiplexing of several cluster programs.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::flowcore::{cr_schedule, cw_schedule, Op, Schedule};
use crate::model::{NetworkGraph, NodeId};
use crate::simulator::{Action, Program, Source};

/// Splits `[0, s)` into contiguous ranges proportional to the weights, in the
/// given order. The last positive-weight member absorbs the rounding slack.
pub fn assign_ranges(weights: &[(usize, u64)], s: u64) -> Vec<(usize, u64, u64)> {
    let total: u64 = weights.iter().map(|w| w.1).sum();
    if total == 0 {
        return weights.iter().map(|&(v, _)| (v, 0, 0)).collect();
    }
    let last = weights.iter().rposition(|w| w.1 > 0).unwrap();
    let mut prefix = 0u64;
    let mut out = Vec::with_capacity(weights.len());
    for (k, &(v, w)) in weights.iter().enumerate() {
        let start = (u128::from(s) * u128::from(prefix) / u128::from(total)) as u64;
        prefix += w;
        let end = if k >= last {
            s
        } else {
            (u128::from(s) * u128::from(prefix) / u128::from(total)) as u64
        };
        let start = start.min(end);
        out.push((v, start, end - start));
    }
    out
}

/// Contiguous runs of `true` in `bits`, as `(offset, len)`.
fn runs(bits: &[bool]) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < bits.len() {
        if bits[k] {
            let start = k;
            while k < bits.len() && bits[k] {
                k += 1;
            }
            out.push((start as u64, (k - start) as u64));
        } else {
            k += 1;
        }
    }
    out
}

/// Greedy cloud write of `file` (`s` bits, held by `root`) along a tree.
///
/// `parent` describes the tree (the root maps to `None`) and `ranges` the
/// part of the file each member writes. Every round each member writes as
/// much of its own range as it holds and its uplink allows, and each tree
/// edge forwards bits the child's subtree still needs, nearest owners first.
pub fn tree_write(
    graph: &NetworkGraph,
    parent: &BTreeMap<usize, Option<usize>>,
    ranges: &[(usize, u64, u64)],
    file: &str,
    s: u64,
) -> Result<Schedule> {
    let root = parent
        .iter()
        .find(|(_, p)| p.is_none())
        .map(|(&v, _)| v)
        .ok_or_else(|| Error::InvalidGraph("tree without root".into()))?;
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&v, &p) in parent {
        if let Some(p) = p {
            children.entry(p).or_default().push(v);
        }
    }
    let mut depth: BTreeMap<usize, usize> = BTreeMap::from([(root, 0)]);
    let mut order = vec![root];
    let mut k = 0;
    while k < order.len() {
        let v = order[k];
        for &c in children.get(&v).into_iter().flatten() {
            depth.insert(c, depth[&v] + 1);
            order.push(c);
        }
        k += 1;
    }
    let range_of: BTreeMap<usize, (u64, u64)> = ranges.iter().map(|&(v, o, l)| (v, (o, l))).collect();

    // Bits each child must receive, in priority order.
    let mut need: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &c in order.iter().skip(1) {
        let mut owners = vec![c];
        let mut k = 0;
        while k < owners.len() {
            let v = owners[k];
            owners.extend(children.get(&v).into_iter().flatten().copied());
            k += 1;
        }
        owners.sort_by_key(|v| (depth[v], *v));
        let bits: Vec<usize> = owners
            .iter()
            .filter_map(|v| range_of.get(v))
            .flat_map(|&(o, l)| o as usize..(o + l) as usize)
            .collect();
        need.insert(c, bits);
    }

    let s = s as usize;
    let mut have: BTreeMap<usize, Vec<bool>> = order.iter().map(|&v| (v, vec![v == root; s])).collect();
    let mut written: BTreeMap<usize, u64> = BTreeMap::new();
    let mut sched = Schedule {
        supplies: BTreeMap::from([(NodeId::Proc(root), s as u64)]),
        demands: BTreeMap::from([(NodeId::Cloud(0), s as u64)]),
        ..Schedule::default()
    };
    let mut remaining: u64 = ranges.iter().map(|r| r.2).sum();
    let mut t = 0u32;
    while remaining > 0 {
        t += 1;
        let mut progress = false;
        let start = have.clone();
        for &(v, o, l) in ranges {
            let done = written.entry(v).or_default();
            if *done == l {
                continue;
            }
            let up = graph.up(v);
            let mut len = 0;
            while *done + len < l && len < up && start[&v][(o + *done + len) as usize] {
                len += 1;
            }
            if len > 0 {
                sched.push(
                    t,
                    Op::Write {
                        node: v,
                        cloud: 0,
                        file: file.to_string(),
                        offset: o + *done,
                        len,
                    },
                );
                *done += len;
                remaining -= len;
                progress = true;
            }
        }
        for &c in order.iter().skip(1) {
            let p = parent[&c].unwrap();
            let w = graph
                .bandwidth(NodeId::Proc(p), NodeId::Proc(c))
                .ok_or_else(|| Error::InvalidGraph(format!("no link p{p}->p{c}")))?;
            let mut mark = vec![false; s];
            let mut budget = w;
            for &b in &need[&c] {
                if budget == 0 {
                    break;
                }
                if start[&p][b] && !have[&c][b] {
                    mark[b] = true;
                    budget -= 1;
                }
            }
            let hc = have.get_mut(&c).unwrap();
            for (o, l) in runs(&mark) {
                hc[o as usize..(o + l) as usize].fill(true);
                sched.push(
                    t,
                    Op::Send {
                        src: p,
                        dst: c,
                        file: file.to_string(),
                        offset: o,
                        len: l,
                    },
                );
                progress = true;
            }
        }
        if !progress {
            return Err(Error::InfeasibleFlow(format!("tree write of {file} stalled in round {t}")));
        }
    }
    Ok(sched)
}

/// A binary computation tree over `m` ordered leaves: a complete tree whose
/// rightmost leaves were removed and whose unary nodes were collapsed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompTree {
    pub leaves: usize,
    /// Internal nodes in post-order as `(left, right)` children. Ids below
    /// `leaves` denote leaves, id `leaves + k` denotes `internal[k]`.
    pub internal: Vec<(usize, usize)>,
}

impl CompTree {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let width = m.next_power_of_two();
        let mut t = CompTree {
            leaves: m,
            internal: Vec::new(),
        };
        t.build(0, width);
        t
    }

    fn build(&mut self, a: usize, b: usize) -> usize {
        if b - a == 1 {
            return a;
        }
        let mid = (a + b) / 2;
        if mid >= self.leaves {
            return self.build(a, mid);
        }
        let l = self.build(a, mid);
        let r = self.build(mid, b);
        self.internal.push((l, r));
        self.leaves + self.internal.len() - 1
    }

    pub fn root(&self) -> usize {
        if self.internal.is_empty() {
            0
        } else {
            self.leaves + self.internal.len() - 1
        }
    }

    /// Height of every node; leaves have height 0.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0; self.leaves + self.internal.len()];
        for (k, &(l, r)) in self.internal.iter().enumerate() {
            h[self.leaves + k] = 1 + h[l].max(h[r]);
        }
        h
    }

    pub fn height(&self) -> usize {
        self.heights()[self.root()]
    }
}

/// Runs several cluster programs on shared nodes by time slicing: a node in
/// `L` clusters acts for its `q`-th cluster (1-based) in global round
/// `(r - 1) L + q` of cluster round `r`. Transfers issued in a slot land
/// before the receiver's next slot of the same cluster.
pub fn multiplex(programs: &[(usize, Program)], slots: &BTreeMap<(usize, usize), u32>, load: u32) -> Result<Program> {
    let mut out = Program::new();
    for (cluster, p) in programs {
        for (r, a) in p.actions() {
            let node = a.actor();
            let q = slots
                .get(&(node, *cluster))
                .ok_or_else(|| Error::Unsupported(format!("p{node} has no slot in cluster {cluster}")))?;
            out.push((r - 1) * load + q, a.clone());
        }
    }
    Ok(out)
}

/// Slot numbers for a family of node sets: each node numbers its clusters
/// 1, 2, ... in cluster order. Returns the slots and the load.
pub fn slots<'a>(clusters: impl IntoIterator<Item = (usize, &'a BTreeSet<usize>)>) -> (BTreeMap<(usize, usize), u32>, u32) {
    let mut count: BTreeMap<usize, u32> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for (id, members) in clusters {
        for &v in members {
            let q = count.entry(v).or_default();
            *q += 1;
            out.insert((v, id), *q);
        }
    }
    (out, count.values().copied().max().unwrap_or(1))
}

/// Shifts every action of `p` by `offset` rounds into `into`.
pub fn place(into: &mut Program, offset: u32, p: &Program) {
    into.merge_at(offset, p);
}

/// A program consisting of one local action.
pub fn single(round: u32, a: Action) -> Program {
    let mut p = Program::new();
    p.push(round, a);
    p
}

/// A cluster taking part in the cross-cluster computation tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub members: BTreeSet<usize>,
    pub leader: usize,
}

/// Local and cloud file holding the value of tree node `id`.
pub fn value_file(tree: &CompTree, id: usize) -> String {
    if id == tree.root() {
        crate::generic_comb::RESULT_FILE.to_string()
    } else {
        format!("v{id}")
    }
}

/// Cluster-local programs evaluating a computation tree over cluster values.
///
/// Leaf `j` is held by the leader of group `leaves[j]` in
/// `value_file(tree, j)` from round 1 on. Leaves are written to the cloud
/// first; then, one height at a time, the leader of the group assigned to
/// each internal node reads both children, combines them in order and
/// writes the result. Internal node `k` is assigned to group `k`. Reads and
/// writes are optimal schedules on the group's induced subgraph, and every
/// step lasts as long as its slowest group so the groups stay in lockstep.
pub fn tree_phases(graph: &NetworkGraph, groups: &[Group], leaves: &[usize], s: u64) -> Result<Vec<Program>> {
    let tree = CompTree::new(leaves.len());
    if tree.internal.len() > groups.len() {
        return Err(Error::Unsupported(format!(
            "{} internal tree nodes for {} groups",
            tree.internal.len(),
            groups.len()
        )));
    }
    let subs: Vec<NetworkGraph> = groups.iter().map(|g| graph.restricted_to(&g.members)).collect();
    let mut progs = vec![Program::new(); groups.len()];

    let mut offset = 0;
    let mut len = 0;
    for (j, &b) in leaves.iter().enumerate() {
        let w = cw_schedule(&subs[b], groups[b].leader, &value_file(&tree, j), s)?;
        progs[b].schedule_at(offset, &w);
        len = len.max(w.horizon());
    }
    offset += len;

    let heights = tree.heights();
    for h in 1..=tree.height() {
        let level: Vec<usize> = (0..tree.internal.len()).filter(|&k| heights[tree.leaves + k] == h).collect();
        let mut plans = Vec::new();
        let (mut la, mut lb, mut lc) = (0, 0, 0);
        for &k in &level {
            let (l, r) = tree.internal[k];
            let leader = groups[k].leader;
            let ra = cr_schedule(&subs[k], leader, &value_file(&tree, l), s)?;
            let rb = cr_schedule(&subs[k], leader, &value_file(&tree, r), s)?;
            let out = value_file(&tree, tree.leaves + k);
            let w = cw_schedule(&subs[k], leader, &out, s)?;
            la = la.max(ra.horizon());
            lb = lb.max(rb.horizon());
            lc = lc.max(w.horizon());
            plans.push((k, l, r, out, ra, rb, w));
        }
        for (k, l, r, out, ra, rb, w) in plans {
            let p = &mut progs[k];
            p.schedule_at(offset, &ra);
            p.schedule_at(offset + la, &rb);
            p.push(
                offset + la + lb + 1,
                Action::Combine {
                    node: groups[k].leader,
                    left: Source::file(value_file(&tree, l)),
                    right: Source::file(value_file(&tree, r)),
                    out,
                    grains: None,
                },
            );
            p.schedule_at(offset + la + lb, &w);
        }
        offset += la + lb + lc;
    }
    Ok(progs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::model::build_path_with_cloud;
    use crate::simulator::run_schedule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn proportional_ranges() {
        assert_eq!(assign_ranges(&[(0, 1), (1, 1), (2, 2)], 8), vec![(0, 0, 2), (1, 2, 2), (2, 4, 4)]);
        assert_eq!(assign_ranges(&[(3, 5)], 8), vec![(3, 0, 8)]);
        assert_eq!(assign_ranges(&[(0, 2), (1, 0)], 8), vec![(0, 0, 8), (1, 8, 0)]);
        assert_eq!(assign_ranges(&[(0, 1), (1, 1), (2, 1)], 10), vec![(0, 0, 3), (1, 3, 3), (2, 6, 4)]);
    }

    #[test]
    fn path_tree_write_takes_timespan() {
        let g = build_path_with_cloud(16, 1, 256);
        let members: std::collections::BTreeSet<usize> = (0..16).collect();
        let parent = g.bfs_tree(0, &members);
        let ranges = assign_ranges(&(0..16).map(|v| (v, 1)).collect::<Vec<_>>(), 256);
        let sched = tree_write(&g, &parent, &ranges, "f", 256).unwrap();
        assert_eq!(sched.horizon(), 31);
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(1), 256);
        let e = run_schedule(&g, &sched, &[(0, "f".into(), x.clone())]).unwrap();
        assert_eq!(e.cloud_file(0, "f"), Some(x));
    }

    #[test]
    fn tree_shapes() {
        assert_eq!(CompTree::new(1).internal, vec![]);
        assert_eq!(CompTree::new(1).root(), 0);
        let t = CompTree::new(3);
        assert_eq!(t.internal, vec![(0, 1), (3, 2)]);
        assert_eq!(t.root(), 4);
        assert_eq!(t.height(), 2);
        let t = CompTree::new(8);
        assert_eq!(t.internal.len(), 7);
        assert_eq!(t.height(), 3);
        let t = CompTree::new(5);
        assert_eq!(t.internal.len(), 4);
        assert_eq!(t.height(), 3);
    }
}
