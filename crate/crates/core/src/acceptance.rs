//! The acceptance suite: twelve end-to-end checks with fixed seeds, each
//! reporting what it measured next to the bound it was held to.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apps::{dedup, fl_privacy_check, fl_round, masked_inputs, DedupConfig, FlConfig, FlPath};
use crate::bits::{ceil_div, ceil_log2, log_factor, random_bits, Bits};
use crate::error::{Error, Result};
use crate::fatlinks::{
    ccomb_fat, cloud_cluster, cw_fat, default_kappa, fat_comb_bound, sparse_cover, zmax, DATA_FILE,
};
use crate::flowcore::{
    car_schedule, caw_schedule, cr_schedule, cw_schedule, evacuation_flow, max_flow_over_time, quickest_flow,
    Schedule, Transfer,
};
use crate::generic_comb::{ccomb_generic, generic_bound};
use crate::model::{build_path_with_cloud, build_uniform_wheel, build_wheel, FatLinksView, NetworkGraph, NodeId, WheelView};
use crate::operators::laws::{check_associativity, check_unit};
use crate::operators::{fold, Faulty, MatMul, Operator, VectorAdd};
use crate::simulator::Engine;
use crate::wheel::{
    best_interval, ccomb_wheel_holistic, ccomb_wheel_modular, cw_wheel, loads, wheel_bounds, Arc as RingArc, Layout,
};

/// Suite switches.
#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    /// Only the small-graph flow oracle.
    pub fast: bool,
    /// Swap in an operator with broken laws; the generic combine check must fail.
    pub fault: bool,
    pub seed: u64,
}

/// The verdict on one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub bound: String,
    pub millis: u128,
    pub limit_millis: u128,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {} | bound {} | {} ms of {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.bound,
            self.millis,
            self.limit_millis
        )
    }
}

struct Check {
    ok: bool,
    measured: String,
    bound: String,
}

type Criterion = fn(&Options) -> Result<Check>;

const CRITERIA: [(u8, &str, u64, Criterion); 12] = [
    (1, "quickest-flow optimality", 60, c1_quickest),
    (2, "schedule replay", 30, c2_replay),
    (3, "path example", 5, c3_path),
    (4, "uniform wheel write", 30, c4_wheel_write),
    (5, "generic combine", 30, c5_generic),
    (6, "fat-links combine", 60, c6_fat),
    (7, "sparse cover", 30, c7_sparse),
    (8, "circle cover load", 30, c8_circle),
    (9, "wheel holistic vs modular", 60, c9_wheel_comb),
    (10, "lower-bound sanity", 10, c10_lower),
    (11, "masked aggregation", 60, c11_fl),
    (12, "dedup", 10, c12_dedup),
];

/// Runs one criterion by number.
pub fn run_criterion(id: u8, opts: &Options) -> Option<Outcome> {
    let &(id, name, secs, f) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let res = f(opts);
    let took = start.elapsed();
    let limit = Duration::from_secs(secs);
    let (passed, measured, bound) = match res {
        Ok(c) => (c.ok && took <= limit, c.measured, c.bound),
        Err(e) => (false, format!("error: {e}"), "-".into()),
    };
    Some(Outcome {
        id,
        name,
        passed,
        measured,
        bound,
        millis: took.as_millis(),
        limit_millis: limit.as_millis(),
    })
}

/// Runs the suite, or just criterion 1 when `fast` is set.
pub fn run(opts: &Options) -> Vec<Outcome> {
    let ids: Vec<u8> = if opts.fast { vec![1] } else { (1..=12).collect() };
    ids.into_iter().filter_map(|id| run_criterion(id, opts)).collect()
}

fn rng(opts: &Options, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn pick<T: Copy>(r: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[r.random_range(0..xs.len())]
}

/// At most five processing nodes and one cloud, bandwidths in {1, 2, 4},
/// links present at random and not necessarily symmetric.
fn small_graph(r: &mut ChaCha8Rng) -> NetworkGraph {
    let n = r.random_range(1..=5usize);
    let mut g = NetworkGraph::new(n, 1);
    let w = [1, 2, 4];
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(0.5) {
                g.set_link(NodeId::Proc(u), NodeId::Proc(v), pick(r, &w));
                g.set_link(NodeId::Proc(v), NodeId::Proc(u), pick(r, &w));
            }
        }
        if r.random_bool(0.6) {
            g.set_cloud_link(u, 0, pick(r, &w), pick(r, &w));
        }
    }
    if (0..n).all(|i| g.up(i) == 0) {
        g.set_cloud_link(0, 0, pick(r, &w), pick(r, &w));
    }
    g
}

/// Max flow by shortest augmenting paths on an explicitly built
/// time-expanded graph; shares no code with the library solver.
fn oracle_max_flow(g: &NetworkGraph, src: NodeId, dst: NodeId, horizon: u32) -> u64 {
    let k = g.node_count();
    let layers = horizon as usize + 1;
    let size = k * layers;
    let at = |v: NodeId, t: usize| t * k + g.dense(v);
    let mut cap = vec![vec![0u64; size]; size];
    for t in 0..horizon as usize {
        for v in g.nodes() {
            cap[at(v, t)][at(v, t + 1)] = u64::MAX / 4;
        }
        for (u, v, w) in g.links() {
            cap[at(u, t)][at(v, t + 1)] += w;
        }
    }
    let (s, t) = (at(src, 0), at(dst, horizon as usize));
    let mut total = 0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[s] = s;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for v in 0..size {
                if cap[u][v] > 0 && prev[v] == usize::MAX {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = u64::MAX;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

fn reachable(g: &NetworkGraph, src: NodeId, dst: NodeId) -> bool {
    oracle_max_flow(g, src, dst, g.node_count() as u32) > 0
}

fn c1_quickest(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 1);
    let (mut checked, mut bad) = (0, Vec::new());
    while checked < 240 {
        let g = small_graph(&mut r);
        let node = NodeId::Proc(r.random_range(0..g.processing_count()));
        let s = r.random_range(1..=16u64);
        let (src, dst) = if r.random_bool(0.5) { (node, NodeId::Cloud(0)) } else { (NodeId::Cloud(0), node) };
        if !reachable(&g, src, dst) {
            continue;
        }
        checked += 1;
        let (t, flow) = quickest_flow(&g, src, dst, s)?;
        let scan = (1..).find(|&h| max_flow_over_time(&g, src, dst, h).value() >= s).unwrap();
        let independent = (1..).find(|&h| oracle_max_flow(&g, src, dst, h) >= s).unwrap();
        flow.validate(&g)?;
        if t != scan || t != independent || flow.value() != s {
            bad.push(format!("{src}->{dst} s={s}: {t} vs scan {scan}, oracle {independent}"));
        }
    }
    Ok(Check {
        ok: bad.is_empty(),
        measured: format!("{checked} instances, {} mismatches {}", bad.len(), bad.first().cloned().unwrap_or_default()),
        bound: "horizon equal to both oracles".into(),
    })
}

/// Replays `sched` and returns the round by whose end every file arrived.
fn replay(g: &NetworkGraph, sched: &Schedule, files: &[(Option<usize>, String, Bits)], read: bool) -> Result<u32> {
    let mut e = Engine::new(g);
    for (node, f, x) in files {
        match (read, node) {
            (false, Some(i)) => e.load(*i, f, x),
            _ => e.load_cloud(0, f, x),
        }
    }
    e.run_schedule(sched)?;
    for (node, f, x) in files {
        let got = if read { e.node_file(node.unwrap(), f) } else { e.cloud_file(0, f) };
        if got.as_ref() != Some(x) {
            return Err(Error::Unsupported(format!("{f} not delivered bit-exactly")));
        }
    }
    // A read issued in the last round lands at its end, which the engine
    // counts as one more elapsed round; delivery is the last issuing round.
    if e.metrics().rounds_elapsed > sched.completion() {
        return Err(Error::Unsupported("engine ran past the schedule".into()));
    }
    Ok(sched.horizon())
}

fn c2_replay(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 2);
    let (mut runs, mut late) = (0, Vec::new());
    while runs < 200 {
        let g = small_graph(&mut r);
        let n = g.processing_count();
        let writers: Vec<usize> = (0..n)
            .filter(|&i| reachable(&g, NodeId::Proc(i), NodeId::Cloud(0)) && reachable(&g, NodeId::Cloud(0), NodeId::Proc(i)))
            .collect();
        if writers.is_empty() {
            continue;
        }
        let i = pick(&mut r, &writers);
        let s = r.random_range(1..=16u64);
        let x = random_bits(&mut r, s as usize);
        for read in [false, true] {
            let (sched, t) = if read {
                (cr_schedule(&g, i, DATA_FILE, s)?, quickest_flow(&g, NodeId::Cloud(0), NodeId::Proc(i), s)?.0)
            } else {
                (cw_schedule(&g, i, DATA_FILE, s)?, quickest_flow(&g, NodeId::Proc(i), NodeId::Cloud(0), s)?.0)
            };
            let rounds = replay(&g, &sched, &[(Some(i), DATA_FILE.into(), x.clone())], read)?;
            runs += 1;
            if rounds > t {
                late.push(format!("single {rounds} > {t}"));
            }
        }
        // Collective transfers from a random subset of the writers.
        let mut transfers = Vec::new();
        let mut files = Vec::new();
        let mut supplies = BTreeMap::new();
        for &j in &writers {
            let size = r.random_range(0..=8u64);
            if size > 0 {
                transfers.push(Transfer::new(j, format!("f{j}"), size));
                files.push((Some(j), format!("f{j}"), random_bits(&mut r, size as usize)));
                supplies.insert(NodeId::Proc(j), size);
            }
        }
        if transfers.is_empty() {
            continue;
        }
        let t = evacuation_flow(&g, &supplies, NodeId::Cloud(0))?.0;
        let rounds = replay(&g, &caw_schedule(&g, &transfers)?, &files, false)?;
        if rounds > t {
            late.push(format!("cAW {rounds} > {t}"));
        }
        let t = evacuation_flow(&g.reversed(), &supplies, NodeId::Cloud(0))?.0;
        let rounds = replay(&g, &car_schedule(&g, &transfers)?, &files, true)?;
        if rounds > t {
            late.push(format!("cAR {rounds} > {t}"));
        }
        runs += 2;
    }
    Ok(Check {
        ok: late.is_empty(),
        measured: format!("{runs} replays bit-exact, {} late {}", late.len(), late.first().cloned().unwrap_or_default()),
        bound: "rounds <= flow horizon".into(),
    })
}

fn c3_path(opts: &Options) -> Result<Check> {
    let view = FatLinksView::new(build_path_with_cloud(16, 1, 256), 256)?;
    let c = cloud_cluster(&view, 0);
    let x = random_bits(&mut rng(opts, 3), 256);
    let rounds = cw_fat(&view, 0, &x)?.rounds_elapsed;
    Ok(Check {
        ok: c.timespan == 31 && c.radius == 15 && (31..=93).contains(&rounds),
        measured: format!("Z_0={} k={} rounds={rounds}", c.timespan, c.radius),
        bound: "Z_0=31, k=15, rounds in [31, 93]".into(),
    })
}

fn closed_form(s: u64, bc: u64, bl: u64) -> f64 {
    let (s, bc, bl) = (s as f64, bc as f64, bl as f64);
    s / bl + (s / bc).sqrt().min(bl / bc)
}

fn c4_wheel_write(opts: &Options) -> Result<Check> {
    let s = 256;
    let x = random_bits(&mut rng(opts, 4), s as usize);
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    let mut spot = None;
    for bc in [4, 16, 64] {
        for bl in [16, 64, 256] {
            if bl < bc {
                continue;
            }
            let view = build_uniform_wheel(16, bc, bl)?;
            let rounds = cw_wheel(&view, 0, &x)?.rounds_elapsed;
            let ratio = f64::from(rounds) / closed_form(s, bc, bl);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            if (bc, bl) == (16, 64) {
                spot = Some((best_interval(&view, s, 0).timespan, rounds));
            }
        }
    }
    let (z, rounds) = spot.unwrap();
    Ok(Check {
        ok: lo >= 0.25 && hi <= 4.0 && z == 12 && rounds <= 48,
        measured: format!("ratios in [{lo:.2}, {hi:.2}], spot Z={z} rounds={rounds}"),
        bound: "ratios in [0.25, 4], spot Z=12 rounds<=48".into(),
    })
}

fn matmul_operator(opts: &Options) -> Result<Operator> {
    let base: Operator = Arc::new(MatMul::new(2, 2)?);
    Ok(if opts.fault { Arc::new(Faulty(base)) } else { base })
}

fn c5_generic(opts: &Options) -> Result<Check> {
    let op = matmul_operator(opts)?;
    let mut r = rng(opts, 5);
    let mut sample = |r: &mut dyn rand::Rng| {
        let raw = random_bits(r, 4);
        op.apply(&op.unit(), &raw).unwrap_or(raw)
    };
    check_associativity(op.as_ref(), &mut sample, &mut r, 200)?;
    check_unit(op.as_ref(), &mut sample, &mut r, 200)?;
    let mut worst = 0.0f64;
    let mut wrong = 0;
    let mut runs = 0;
    for n in [2usize, 4, 8] {
        let mut graphs = vec![build_path_with_cloud(n, 1, 2), build_path_with_cloud(n, 2, 4)];
        if n >= 3 {
            graphs.push(build_uniform_wheel(n, 1, 4)?.graph().clone());
        }
        for g in graphs {
            for _ in 0..4 {
                let x: Vec<Bits> = (0..n).map(|_| random_bits(&mut r, 4)).collect();
                let (out, m) = ccomb_generic(&g, op.clone(), x.clone())?;
                wrong += usize::from(out != fold(op.as_ref(), &x)?);
                let bound = generic_bound(&g, 4)?;
                worst = worst.max(f64::from(m.rounds_elapsed) / bound as f64);
                runs += 1;
            }
        }
    }
    Ok(Check {
        ok: wrong == 0 && worst <= 1.0,
        measured: format!("{runs} runs, {wrong} wrong, max rounds/bound {worst:.2}"),
        bound: "fold equal, rounds <= 3 T_s ceil(log n) + T_s".into(),
    })
}

fn random_tree(r: &mut ChaCha8Rng, n: usize, local: u64, cloud: &[u64]) -> NetworkGraph {
    let mut g = NetworkGraph::new(n, 1);
    for v in 0..n {
        let c = pick(r, cloud);
        g.set_cloud_link(v, 0, c, c);
        if v > 0 {
            let u = r.random_range(0..v);
            g.set_symmetric(NodeId::Proc(u), NodeId::Proc(v), local);
        }
    }
    g
}

fn ring(n: usize, bc: u64, bl: u64) -> NetworkGraph {
    let mut g = build_path_with_cloud(n, bc, bl);
    g.set_symmetric(NodeId::Proc(n - 1), NodeId::Proc(0), bl);
    g
}

/// Fat-links instances used by criteria 6 and 10.
fn fat_instances(r: &mut ChaCha8Rng) -> Vec<NetworkGraph> {
    let mut out = Vec::new();
    for n in [2, 4, 8, 16, 32] {
        out.push(build_path_with_cloud(n, pick(r, &[1, 2, 4, 8]), 64));
    }
    for n in [4, 8, 16, 32] {
        out.push(ring(n, pick(r, &[1, 2, 4, 8]), 128));
    }
    for n in [8, 16, 24, 32] {
        out.push(random_tree(r, n, 64, &[1, 2, 4, 8, 16]));
    }
    out
}

fn c6_fat(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 6);
    let op: Operator = Arc::new(VectorAdd::new(8, 256)?);
    let (mut worst, mut wrong, mut runs) = (0.0f64, 0, 0);
    for g in fat_instances(&mut r) {
        let view = FatLinksView::new(g, 64)?;
        let x: Vec<Bits> = (0..view.n()).map(|_| random_bits(&mut r, 64)).collect();
        let (out, m) = ccomb_fat(&view, op.clone(), x.clone())?;
        wrong += usize::from(out != fold(op.as_ref(), &x)?);
        worst = worst.max(f64::from(m.rounds_elapsed) / fat_comb_bound(&view) as f64);
        runs += 1;
    }
    Ok(Check {
        ok: wrong == 0 && worst <= 8.0,
        measured: format!("{runs} runs, {wrong} wrong, C = {worst:.2}"),
        bound: "fold equal, C <= 8".into(),
    })
}

fn c7_sparse(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 7);
    let mut failures = Vec::new();
    let (mut worst_diam, mut worst_load) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = r.random_range(2..=64usize);
        let mut g = random_tree(&mut r, n, 1, &[1]);
        for _ in 0..r.random_range(0..n) {
            let (u, v) = (r.random_range(0..n), r.random_range(0..n));
            if u != v {
                g.set_symmetric(NodeId::Proc(u), NodeId::Proc(v), 1);
            }
        }
        let mut base: Vec<BTreeSet<usize>> = (0..n)
            .map(|v| {
                let rad = r.random_range(0..=2usize);
                let d = g.local_distances(v, None);
                (0..n).filter(|&u| d[u].is_some_and(|x| x <= rad)).collect()
            })
            .collect();
        base.sort();
        base.dedup();
        let kappa = default_kappa(n);
        let cover = sparse_cover(&base, kappa);
        let contained = base.iter().all(|b| cover.iter().any(|c| b.is_subset(c)));
        let max_base = base.iter().map(|b| g.induced_diameter(b).unwrap_or(usize::MAX)).max().unwrap_or(0);
        let max_cover = cover.iter().map(|c| g.induced_diameter(c).unwrap_or(usize::MAX)).max().unwrap_or(0);
        let load = (0..n).map(|v| cover.iter().filter(|c| c.contains(&v)).count()).max().unwrap_or(0);
        let diam_bound = 4 * kappa as usize * max_base;
        let load_bound = 2.0 * f64::from(kappa) * (base.len() as f64).powf(1.0 / f64::from(kappa));
        if max_base > 0 {
            worst_diam = worst_diam.max(max_cover as f64 / diam_bound as f64);
        }
        worst_load = worst_load.max(load as f64 / load_bound);
        if !contained || max_cover > diam_bound || load as f64 > load_bound {
            failures.push(format!("n={n}: contained={contained} diam {max_cover}/{diam_bound} load {load}/{load_bound:.1}"));
        }
    }
    Ok(Check {
        ok: failures.is_empty(),
        measured: format!(
            "{} of 100 violate; max diam/bound {worst_diam:.2}, load/bound {worst_load:.2} {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
        bound: "containment, diam <= 4k maxdiam, load <= 2k|C|^(1/k)".into(),
    })
}

fn random_wheel(r: &mut ChaCha8Rng, n: usize) -> Result<WheelView> {
    let cloud: Vec<u64> = (0..n).map(|_| pick(r, &[1, 2, 4, 8, 16, 32, 64])).collect();
    let ring: Vec<u64> = (0..n).map(|_| pick(r, &[1, 4, 16, 64, 256])).collect();
    build_wheel(&cloud, &ring)
}

/// Fewest arcs covering the ring, by trying all subsets of growing size.
fn brute_force_cover(n: usize, arcs: &[RingArc]) -> Option<usize> {
    fn search(n: usize, arcs: &[RingArc], from: usize, left: usize, covered: &mut Vec<u32>) -> bool {
        if left == 0 {
            return covered.iter().all(|&c| c > 0);
        }
        for a in from..arcs.len() {
            for v in arcs[a].nodes(n) {
                covered[v] += 1;
            }
            let ok = search(n, arcs, a + 1, left - 1, covered);
            for v in arcs[a].nodes(n) {
                covered[v] -= 1;
            }
            if ok {
                return true;
            }
        }
        false
    }
    (1..=arcs.len()).find(|&k| search(n, arcs, 0, k, &mut vec![0; n]))
}

fn c8_circle(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 8);
    let (mut bad_load, mut not_min, mut brute) = (0, 0, 0);
    let mut seen = BTreeSet::new();
    for _ in 0..1000 {
        let n = r.random_range(3..=16usize);
        let view = random_wheel(&mut r, n)?;
        let s = pick(&mut r, &[16, 64, 256, 1024]);
        let layout = Layout::new(&view, s)?;
        let load = loads(n, &layout.cover.arcs).into_iter().max().unwrap_or(0);
        seen.insert(load);
        bad_load += usize::from(!(1..=2).contains(&load));
        if n <= 10 {
            let mut arcs: Vec<RingArc> = crate::wheel::cloud_intervals(&view, s)
                .into_iter()
                .flat_map(|(a, b)| [a.arc(n), b.arc(n)])
                .map(|(start, len)| RingArc { start, len })
                .collect();
            arcs.sort();
            arcs.dedup();
            brute += 1;
            not_min += usize::from(brute_force_cover(n, &arcs) != Some(layout.cover.arcs.len()));
        }
    }
    Ok(Check {
        ok: bad_load == 0 && not_min == 0,
        measured: format!("loads seen {seen:?}, {bad_load} out of range; {not_min} of {brute} not minimal"),
        bound: "load in {1, 2}, minimal cover".into(),
    })
}

fn c9_wheel_comb(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 9);
    let (mut worst, mut slower, mut differ, mut runs) = (0.0f64, 0, 0, 0);
    let mut detail = String::new();
    for n in [8usize, 16, 32] {
        for (bc, bl, m, modulus) in [(4u64, 16u64, 16usize, 16u64), (16, 16, 16, 16), (16, 64, 32, 256), (8, 64, 32, 256)] {
            let view = build_uniform_wheel(n, bc, bl)?;
            let op: Operator = Arc::new(VectorAdd::new(m, modulus)?);
            let s = op.bit_width() as u64;
            let x: Vec<Bits> = (0..n).map(|_| random_bits(&mut r, s as usize)).collect();
            let (a, ma) = ccomb_wheel_holistic(&view, op.clone(), x.clone())?;
            let (b, mb) = ccomb_wheel_modular(&view, op.clone(), x.clone())?;
            differ += usize::from(a != b || a != fold(op.as_ref(), &x)?);
            if mb.rounds_elapsed > ma.rounds_elapsed {
                slower += 1;
                detail = format!(" (n={n} bc={bc} bl={bl}: {} > {})", mb.rounds_elapsed, ma.rounds_elapsed);
            }
            let bound = wheel_bounds(&view, s).zmax + u64::from(ceil_log2(n as u64));
            worst = worst.max(f64::from(mb.rounds_elapsed) / bound as f64);
            runs += 1;
        }
    }
    Ok(Check {
        ok: differ == 0 && slower == 0 && worst <= 8.0,
        measured: format!("{runs} pairs, {differ} differ, {slower} modular slower{detail}, C = {worst:.2}"),
        bound: "equal results, modular <= holistic, C <= 8".into(),
    })
}

fn c10_lower(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 10);
    let (mut runs, mut below) = (0, Vec::new());
    for g in fat_instances(&mut r) {
        let view = FatLinksView::new(g, 64)?;
        let x = random_bits(&mut r, 64);
        for i in [0, view.n() / 2, view.n() - 1] {
            let c = cloud_cluster(&view, i);
            let lb = (c.radius as u64).max(ceil_div(64, 2 * c.bandwidth));
            let rounds = u64::from(cw_fat(&view, i, &x)?.rounds_elapsed);
            runs += 1;
            if rounds < lb {
                below.push(format!("fat n={} i={i}: {rounds} < {lb}", view.n()));
            }
        }
    }
    let s = 256;
    let x = random_bits(&mut r, s as usize);
    for n in [8usize, 16, 32] {
        for bc in [4u64, 16, 64] {
            for bl in [16u64, 64, 256] {
                if bl < bc {
                    continue;
                }
                let view = build_uniform_wheel(n, bc, bl)?;
                let iv = best_interval(&view, s, 0);
                let phi = iv.phi.map_or(0, |p| ceil_div(s, 2 * p));
                let lb = (iv.k as u64).max(ceil_div(s, 2 * iv.bandwidth)).max(phi);
                let rounds = u64::from(cw_wheel(&view, 0, &x)?.rounds_elapsed);
                runs += 1;
                if rounds < lb {
                    below.push(format!("wheel n={n} bc={bc} bl={bl}: {rounds} < {lb}"));
                }
            }
        }
    }
    Ok(Check {
        ok: below.is_empty(),
        measured: format!("{runs} writes, {} below {}", below.len(), below.first().cloned().unwrap_or_default()),
        bound: "rounds >= max(k, s/(2 bc), s/(2 phi))".into(),
    })
}

fn c11_fl(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 11);
    let mut mismatches = 0;
    let mut simulated = 0;
    for k in 0..1000 {
        let n = r.random_range(2..=8usize);
        let g = if n >= 3 && r.random_bool(0.5) { ring(n, 8, 64) } else { build_path_with_cloud(n, 8, 64) };
        let m = r.random_range(1..=4usize);
        let modulus = pick(&mut r, &[4u64, 16, 100, 256]);
        let x: Vec<Vec<u64>> = (0..n).map(|_| (0..m).map(|_| r.random_range(0..=(modulus - 1) / n as u64)).collect()).collect();
        let cfg = FlConfig { m, modulus, x, seed: r.random() };
        let want: Vec<u64> = (0..m).map(|c| cfg.x.iter().map(|v| v[c]).sum::<u64>()).collect();
        let y = masked_inputs(&g, &cfg);
        let got: Vec<u64> = (0..m).map(|c| y.iter().map(|v| v[c]).sum::<u64>() % modulus).collect();
        mismatches += usize::from(got != want);
        if k % 50 == 0 {
            simulated += 1;
            mismatches += usize::from(fl_round(&g, &cfg, FlPath::Fat)?.0 != want);
        }
    }
    let cfg = FlConfig {
        m: 2,
        modulus: 4,
        x: vec![vec![1, 0], vec![0, 2], vec![2, 1]],
        seed: opts.seed ^ 0x5eed,
    };
    let report = fl_privacy_check(&ring(3, 8, 64), &cfg, 10_000, 0.01)?;
    Ok(Check {
        ok: mismatches == 0 && report.accepted,
        measured: format!(
            "1000 instances ({simulated} simulated), {mismatches} sum mismatches; min p = {:.3}",
            report.min_p_value
        ),
        bound: "sums equal, p >= 0.01".into(),
    })
}

fn c12_dedup(opts: &Options) -> Result<Check> {
    let mut r = rng(opts, 12);
    let mut bad = 0;
    for _ in 0..100 {
        let n = r.random_range(2..=10usize);
        let pool: Vec<u64> = (0..12).map(|_| r.random_range(0..1000u64)).collect();
        let files: BTreeMap<usize, Vec<u64>> = (0..n)
            .map(|i| (i, (0..r.random_range(0..5)).map(|_| pick(&mut r, &pool)).collect()))
            .collect();
        let mut holders: BTreeMap<u64, usize> = BTreeMap::new();
        for (&i, hs) in &files {
            for &h in hs {
                holders.entry(h).and_modify(|o| *o = (*o).min(i)).or_insert(i);
            }
        }
        let cfg = DedupConfig {
            hash_bits: 10,
            capacity: 12,
            files,
        };
        let s = cfg.width(n);
        let g = if n >= 3 { ring(n, 8, s) } else { build_path_with_cloud(n, 8, s) };
        let out = dedup(&FatLinksView::new(g, s)?, &cfg)?;
        bad += usize::from(out.ownership != holders || out.per_node.iter().any(|o| *o != out.ownership));
    }
    Ok(Check {
        ok: bad == 0,
        measured: format!("{bad} of 100 instances wrong"),
        bound: "minimal owners, identical maps".into(),
    })
}

/// `Zmax · ⌈log₂ n⌉²` for a fat-links view; re-exported for reports.
pub fn fat_reference(view: &FatLinksView) -> u64 {
    zmax(view) * log_factor(view.n()).pow(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_agrees_on_single_link() {
        let g = build_path_with_cloud(1, 4, 1);
        assert_eq!(oracle_max_flow(&g, NodeId::Proc(0), NodeId::Cloud(0), 3), 12);
        assert_eq!(oracle_max_flow(&g, NodeId::Proc(0), NodeId::Cloud(0), 0), 0);
    }

    #[test]
    fn brute_force_counts() {
        let arcs = [RingArc { start: 0, len: 3 }, RingArc { start: 3, len: 3 }, RingArc { start: 1, len: 5 }];
        assert_eq!(brute_force_cover(6, &arcs), Some(2));
        assert_eq!(brute_force_cover(6, &arcs[..1]), None);
    }

    #[test]
    fn fault_is_caught() {
        let o = run_criterion(5, &Options { fault: true, ..Options::default() }).unwrap();
        assert!(!o.passed);
        assert!(o.measured.contains("associativity"), "{}", o.measured);
    }
}
