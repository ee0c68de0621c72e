use std::collections::{BTreeMap, BTreeSet};

use super::cluster::cloud_clusters;
use super::cover::{default_kappa, sparse_cover, Cover};
use crate::bits::{ceil_div, Bits};
use crate::error::{Error, Result};
use crate::generic_comb::RESULT_FILE;
use crate::model::{FatLinksView, NetworkGraph, NodeId};
use crate::operators::Operator;
use crate::pipeline::{multiplex, slots, tree_phases, value_file, CompTree, Group};
use crate::simulator::{run_algorithm, Action, Driver, Engine, Plan, Program, RoundMetrics, Source};

/// The cover used by the fat-links algorithms: all cloud clusters, coarsened
/// with `κ = ⌈log₂ n⌉`.
pub fn fat_cover(view: &FatLinksView, s: u64) -> Result<Cover> {
    let mut base: Vec<BTreeSet<usize>> = Vec::new();
    for c in cloud_clusters(view) {
        if !base.contains(&c.members) {
            base.push(c.members);
        }
    }
    Cover::new(view, sparse_cover(&base, default_kappa(view.n())), s)
}

/// Rounds per hop when an operand is wider than the fat-link guarantee.
fn chunks(view: &FatLinksView, width: u64) -> u32 {
    ceil_div(width, view.s()).max(1) as u32
}

/// Splits a `width`-bit transfer into `c` consecutive pieces.
fn pieces(width: u64, c: u32) -> impl Iterator<Item = (u32, u64, u64)> {
    let size = ceil_div(width, u64::from(c)).max(1);
    (0..c).filter_map(move |k| {
        let off = u64::from(k) * size;
        (off < width).then(|| (k, off, size.min(width - off)))
    })
}

/// Convergecast of the home inputs of cluster `b` to its leader, which ends
/// up holding the cluster product in `out`. Returns the program and the
/// round in which the leader's product is ready.
fn convergecast(
    view: &FatLinksView,
    cover: &Cover,
    b: usize,
    input: &str,
    out: &str,
    width: u64,
) -> (Program, u32) {
    let g = view.graph();
    let cl = &cover.clusters[b];
    let parent = g.bfs_tree(cl.leader, &cl.members);
    let dist = g.local_distances(cl.leader, Some(&cl.members));
    let depth = |v: usize| dist[v].unwrap() as u32;
    let max_depth = cl.members.iter().map(|&v| depth(v)).max().unwrap_or(0);
    let home = |v: usize| cover.home(v) == Some(b);

    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&v, &p) in &parent {
        if let Some(p) = p {
            children.entry(p).or_default().push(v);
        }
    }
    // Whether a subtree holds any home input; others stay silent.
    let mut has: BTreeMap<usize, bool> = BTreeMap::new();
    let mut by_depth: Vec<usize> = cl.members.iter().copied().collect();
    by_depth.sort_by_key(|&v| std::cmp::Reverse(depth(v)));
    for &v in &by_depth {
        let h = home(v) || children.get(&v).into_iter().flatten().any(|c| has[c]);
        has.insert(v, h);
    }

    let c = chunks(view, width);
    let partial = |v: usize| if v == cl.leader { out.to_string() } else { format!("c{b}/{v}") };
    let mut p = Program::new();
    for &v in &by_depth {
        if !has[&v] && v != cl.leader {
            continue;
        }
        let round = (max_depth - depth(v)) * c + 1;
        let mut sources: Vec<Source> = Vec::new();
        if home(v) {
            sources.push(Source::file(input));
        }
        for &ch in children.get(&v).into_iter().flatten() {
            if has[&ch] {
                sources.push(Source::File(partial(ch)));
            }
        }
        let acc = partial(v);
        let mut rest = sources.into_iter();
        let first = rest.next().unwrap_or(Source::Unit);
        let second = rest.next().unwrap_or(Source::Unit);
        p.push(round, combine(v, first, second, &acc));
        for src in rest {
            p.push(round, combine(v, Source::File(acc.clone()), src, &acc));
        }
        if let Some(par) = parent[&v] {
            for (k, off, len) in pieces(width, c) {
                p.push(
                    round + k,
                    crate::flowcore::Op::Send {
                        src: v,
                        dst: par,
                        file: acc.clone(),
                        offset: off,
                        len,
                    },
                );
            }
        }
    }
    (p, max_depth * c + 1)
}

fn combine(node: usize, left: Source, right: Source, out: &str) -> Action {
    Action::Combine {
        node,
        left,
        right,
        out: out.to_string(),
        grains: None,
    }
}

/// Cover-based combine for commutative operators. Each node's input sits in
/// the local file `input`; the result lands in the cloud file `result`.
#[derive(Clone, Debug)]
pub struct FatComb<'a> {
    pub view: &'a FatLinksView,
    pub operator: Operator,
    pub input: String,
}

impl FatComb<'_> {
    pub fn program(&self) -> Result<Program> {
        if !self.operator.commutative() {
            return Err(Error::Unsupported(format!(
                "{} is not commutative; use the wheel algorithms",
                self.operator.name()
            )));
        }
        let width = self.operator.bit_width() as u64;
        let cover = fat_cover(self.view, width)?;
        let m = cover.clusters.len();
        let tree = CompTree::new(m);

        let mut low = Vec::with_capacity(m);
        let mut ready = 0;
        for b in 0..m {
            let (p, r) = convergecast(self.view, &cover, b, &self.input, &value_file(&tree, b), width);
            ready = ready.max(r);
            low.push(p);
        }
        let groups: Vec<Group> = cover
            .clusters
            .iter()
            .map(|c| Group {
                members: c.members.clone(),
                leader: c.leader,
            })
            .collect();
        let high = tree_phases(self.view.graph(), &groups, &(0..m).collect::<Vec<_>>(), width)?;

        // The products are ready in round `ready`; the leaf writes start then.
        let mut per_cluster = Vec::with_capacity(m);
        for (b, (mut p, h)) in low.into_iter().zip(high).enumerate() {
            p.merge_at(ready - 1, &h);
            per_cluster.push((b, p));
        }
        let (slots, load) = slots(cover.clusters.iter().enumerate().map(|(b, c)| (b, &c.members)));
        multiplex(&per_cluster, &slots, load)
    }
}

/// The fat-links combine driver with its inputs.
#[derive(Clone, Debug)]
pub struct FatCombRun<'a> {
    pub comb: FatComb<'a>,
    pub inputs: Vec<Bits>,
}

impl Driver for FatCombRun<'_> {
    type Output = Bits;

    fn plan(&self, _: &NetworkGraph) -> Result<Plan> {
        Ok(Plan {
            program: self.comb.program()?,
            initial: self
                .inputs
                .iter()
                .enumerate()
                .map(|(i, x)| (i, self.comb.input.clone(), x.clone()))
                .collect(),
            initial_cloud: Vec::new(),
            operator: Some(self.comb.operator.clone()),
        })
    }

    fn collect(&self, engine: &Engine) -> Result<Bits> {
        engine
            .cloud_file(0, RESULT_FILE)
            .ok_or_else(|| Error::MissingData(NodeId::Cloud(0), RESULT_FILE.into()))
    }
}

/// Combines one input per node into the cloud.
pub fn ccomb_fat(view: &FatLinksView, operator: Operator, inputs: Vec<Bits>) -> Result<(Bits, RoundMetrics)> {
    if inputs.len() != view.n() {
        return Err(Error::Unsupported(format!("{} inputs for {} nodes", inputs.len(), view.n())));
    }
    let run = FatCombRun {
        comb: FatComb {
            view,
            operator,
            input: "in".into(),
        },
        inputs,
    };
    run_algorithm(&run, view.graph())
}

/// `Zmax · max(1, ⌈log₂ n⌉)²`.
pub fn fat_comb_bound(view: &FatLinksView) -> u64 {
    let l = crate::bits::log_factor(view.n());
    super::cluster::zmax(view) * l * l
}
