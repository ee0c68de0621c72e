//! Running scenarios end to end and tabulating measured rounds against the
//! matching theoretical bound.

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::apps::{fl_plan, fl_wheel_bound, FlConfig, FlPath};
use crate::bits::{random_bits, Bits};
use crate::error::{Error, Result};
use crate::fatlinks::{cloud_cluster, cw_fat_schedule, fat_comb_bound, FatCast, FatComb, FatCombRun, DATA_FILE};
use crate::flowcore::{car_schedule, caw_schedule, cw_schedule, evacuation_flow, quickest_flow, Schedule, Transfer};
use crate::generic_comb::{generic_bound, t_s, GenericCast, GenericComb, RESULT_FILE};
use crate::model::{
    build_path_with_cloud, build_uniform_wheel, scenario, Algorithm, FatLinksView, NetworkGraph, NodeId, Scenario,
    Task, WheelView,
};
use crate::operators::{fold, DedupUnion, Operator, Ownership};
use crate::simulator::{execute, Driver, Engine, Plan, Program, RoundMetrics};
use crate::wheel::{cw_wheel_schedule, holistic_bound, modular_bound, Holistic, Modular, WheelCombRun};

/// One CSV row. Column order is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario_id: String,
    pub task: String,
    pub n: usize,
    pub s: u64,
    /// Smallest cloud uplink.
    pub bc: u64,
    /// Smallest local link, 0 without local links.
    pub bl: u64,
    pub rounds: u32,
    pub bound: f64,
    pub ratio: f64,
    pub seed: u64,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub row: MetricsRow,
    pub algorithm: &'static str,
    pub result: Value,
    pub trace: Option<Vec<Value>>,
}

struct Measured {
    rounds: u32,
    bound: f64,
    algorithm: &'static str,
    result: Value,
}

struct Runner<'a> {
    sc: &'a Scenario,
    trace: Option<Vec<Value>>,
    rng: ChaCha8Rng,
}

impl<'a> Runner<'a> {
    fn graph(&self) -> &'a NetworkGraph {
        &self.sc.graph
    }

    fn exec(&mut self, graph: &'a NetworkGraph, plan: &Plan) -> Result<Engine<'a>> {
        let e = execute(graph, plan, self.trace.is_some())?;
        if let (Some(log), Some(t)) = (&mut self.trace, e.trace()) {
            log.extend(t.iter().cloned());
        }
        Ok(e)
    }

    fn drive<D: Driver>(&mut self, d: &D, graph: &'a NetworkGraph) -> Result<(D::Output, RoundMetrics)> {
        let plan = d.plan(graph)?;
        let e = self.exec(graph, &plan)?;
        Ok((d.collect(&e)?, e.metrics().clone()))
    }

    fn payload(&mut self, len: u64) -> Bits {
        random_bits(&mut self.rng, len as usize)
    }

    fn fat(&self, s: u64) -> Option<FatLinksView> {
        FatLinksView::new(self.graph().clone(), s).ok()
    }

    fn wheel(&self) -> Option<WheelView> {
        WheelView::new(self.graph().clone()).ok()
    }

    fn single(&mut self, node: usize, algorithm: Algorithm, read: bool) -> Result<Measured> {
        let s = self.sc.s;
        let g = self.graph();
        let algorithm = match algorithm {
            Algorithm::Auto if self.fat(s).is_some() => Algorithm::Fat,
            Algorithm::Auto if self.wheel().is_some() => Algorithm::Wheel,
            Algorithm::Auto => Algorithm::Flow,
            a => a,
        };
        let (sched, bound, name): (Schedule, f64, &'static str) = match algorithm {
            Algorithm::Flow => {
                let t = if read {
                    quickest_flow(g, NodeId::Cloud(0), NodeId::Proc(node), s)?.0
                } else {
                    quickest_flow(g, NodeId::Proc(node), NodeId::Cloud(0), s)?.0
                };
                (cw_schedule(g, node, DATA_FILE, s)?, f64::from(t), "flow")
            }
            Algorithm::Fat => {
                let view = self.fat(s).ok_or_else(|| Error::Unsupported("graph is not s-fat-links".into()))?;
                let z = cloud_cluster(&view, node).timespan;
                (cw_fat_schedule(&view, node, DATA_FILE)?, z as f64, "fat")
            }
            Algorithm::Wheel => {
                let view = self.wheel().ok_or_else(|| Error::Unsupported("graph is not a wheel".into()))?;
                let (iv, sched) = cw_wheel_schedule(&view, s, node, DATA_FILE)?;
                (sched, iv.timespan as f64, "wheel")
            }
            a => return Err(Error::Unsupported(format!("{a:?} does not implement cW/cR"))),
        };
        let x = self.payload(s);
        let mut plan = Plan::default();
        if read {
            // The flow read is built directly; the others reverse their write.
            let sched = if algorithm == Algorithm::Flow {
                crate::flowcore::cr_schedule(g, node, DATA_FILE, s)?
            } else {
                sched.reversed()
            };
            plan.program = Program::from(&sched);
            plan.initial_cloud.push((DATA_FILE.into(), x.clone()));
        } else {
            plan.program = Program::from(&sched);
            plan.initial.push((node, DATA_FILE.into(), x.clone()));
        }
        let e = self.exec(g, &plan)?;
        let got = if read {
            e.node_file(node, DATA_FILE)
        } else {
            e.cloud_file(0, DATA_FILE)
        };
        Ok(Measured {
            rounds: e.metrics().rounds_elapsed,
            bound,
            algorithm: name,
            result: json!({ "delivered": got.as_ref() == Some(&x) }),
        })
    }

    fn collective(&mut self, sizes: &[u64], read: bool) -> Result<Measured> {
        let g = self.graph();
        let transfers: Vec<Transfer> = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| Transfer::new(i, format!("f{i}"), s))
            .collect();
        let supplies: BTreeMap<NodeId, u64> = sizes.iter().enumerate().map(|(i, &s)| (NodeId::Proc(i), s)).collect();
        let (sched, t) = if read {
            (car_schedule(g, &transfers)?, evacuation_flow(&g.reversed(), &supplies, NodeId::Cloud(0))?.0)
        } else {
            (caw_schedule(g, &transfers)?, evacuation_flow(g, &supplies, NodeId::Cloud(0))?.0)
        };
        let mut plan = Plan {
            program: Program::from(&sched),
            ..Plan::default()
        };
        let data: Vec<Bits> = sizes.iter().map(|&s| self.payload(s)).collect();
        for (i, x) in data.iter().enumerate() {
            if x.is_empty() {
                continue;
            }
            if read {
                plan.initial_cloud.push((format!("f{i}"), x.clone()));
            } else {
                plan.initial.push((i, format!("f{i}"), x.clone()));
            }
        }
        let e = self.exec(g, &plan)?;
        let ok = data.iter().enumerate().all(|(i, x)| {
            let f = format!("f{i}");
            x.is_empty() || (if read { e.node_file(i, &f) } else { e.cloud_file(0, &f) }).as_ref() == Some(x)
        });
        Ok(Measured {
            rounds: e.metrics().rounds_elapsed,
            bound: f64::from(t),
            algorithm: "flow",
            result: json!({ "delivered": ok }),
        })
    }

    fn combine(&mut self, op: Operator, inputs: Option<&Vec<Value>>, algorithm: Algorithm) -> Result<Measured> {
        let g = self.graph();
        let n = g.processing_count();
        let width = op.bit_width() as u64;
        let inputs: Vec<Bits> = match inputs {
            Some(vs) => vs.iter().map(|v| op.parse_value(v)).collect::<Result<_>>()?,
            None => (0..n)
                .map(|_| {
                    let raw = self.payload(width);
                    // Normalise through the operator so structured encodings stay valid.
                    op.apply(&op.unit(), &raw).unwrap_or(raw)
                })
                .collect(),
        };
        let wheel_fits = |view: &WheelView| {
            op.grain_size()
                .is_some_and(|gs| view.graph().links().all(|(_, _, w)| w >= gs as u64))
        };
        let algorithm = match algorithm {
            Algorithm::Auto if op.commutative() && self.fat(width).is_some() => Algorithm::Fat,
            Algorithm::Auto | Algorithm::Wheel if self.wheel().is_some() => {
                if wheel_fits(&self.wheel().unwrap()) {
                    Algorithm::WheelModular
                } else {
                    Algorithm::WheelHolistic
                }
            }
            Algorithm::Auto => Algorithm::Generic,
            a => a,
        };
        let (out, metrics, bound, name) = match algorithm {
            Algorithm::Fat => {
                let view = self.fat(width).ok_or_else(|| Error::Unsupported("graph is not s-fat-links".into()))?;
                let run = FatCombRun {
                    comb: FatComb {
                        view: &view,
                        operator: op.clone(),
                        input: "in".into(),
                    },
                    inputs: inputs.clone(),
                };
                let (o, m) = self.drive(&run, g)?;
                (o, m, fat_comb_bound(&view) as f64, "fat")
            }
            Algorithm::WheelHolistic | Algorithm::WheelModular => {
                let view = self.wheel().ok_or_else(|| Error::Unsupported("graph is not a wheel".into()))?;
                let modular = algorithm == Algorithm::WheelModular;
                let program = if modular {
                    Modular {
                        view: &view,
                        operator: op.clone(),
                        input: "in".into(),
                    }
                    .program()?
                } else {
                    Holistic {
                        view: &view,
                        operator: op.clone(),
                        input: "in".into(),
                    }
                    .program()?
                };
                let run = WheelCombRun {
                    program,
                    operator: op.clone(),
                    input: "in".into(),
                    inputs: inputs.clone(),
                };
                let (o, m) = self.drive(&run, g)?;
                if modular {
                    (o, m, modular_bound(&view, width) as f64, "wheel_modular")
                } else {
                    (o, m, holistic_bound(&view, width) as f64, "wheel_holistic")
                }
            }
            Algorithm::Generic => {
                let run = GenericComb {
                    operator: op.clone(),
                    inputs: inputs.clone(),
                };
                let (o, m) = self.drive(&run, g)?;
                (o, m, generic_bound(g, width)? as f64, "generic")
            }
            a => return Err(Error::Unsupported(format!("{a:?} does not implement cComb"))),
        };
        let want = fold(op.as_ref(), &inputs)?;
        Ok(Measured {
            rounds: metrics.rounds_elapsed,
            bound,
            algorithm: name,
            result: json!({ "value": op.render(&out), "matches_fold": out == want }),
        })
    }

    fn cast(&mut self, size: u64, algorithm: Algorithm) -> Result<Measured> {
        let g = self.graph();
        let x = self.payload(size);
        let fat = self.fat(size);
        let (out, m, bound, name) = match (algorithm, fat) {
            (Algorithm::Auto | Algorithm::Fat, Some(view)) => {
                let (o, m) = self.drive(&FatCast { view: &view, payload: &x }, g)?;
                (o, m, fat_comb_bound(&view) as f64, "fat")
            }
            (Algorithm::Fat, None) => return Err(Error::Unsupported("graph is not s-fat-links".into())),
            (Algorithm::Auto | Algorithm::Generic | Algorithm::Wheel, _) => {
                let (o, m) = self.drive(&GenericCast { payload: x.clone() }, g)?;
                (o, m, f64::from(t_s(g, size)?), "generic")
            }
            (a, _) => return Err(Error::Unsupported(format!("{a:?} does not implement cCast"))),
        };
        Ok(Measured {
            rounds: m.rounds_elapsed,
            bound,
            algorithm: name,
            result: json!({ "delivered": out.iter().all(|y| *y == x) }),
        })
    }

    fn fl(&mut self, algorithm: Algorithm) -> Result<Measured> {
        let g = self.graph();
        let p = self
            .sc
            .fl
            .as_ref()
            .ok_or_else(|| Error::scenario("task", "fl task without parameters"))?;
        let cfg = FlConfig {
            m: p.m,
            modulus: p.modulus,
            x: p.x.clone(),
            seed: self.sc.seed,
        };
        let width = self.sc.s;
        let path = match algorithm {
            Algorithm::Auto if self.fat(width).is_some() => FlPath::Fat,
            Algorithm::Fat => FlPath::Fat,
            Algorithm::Auto | Algorithm::Wheel | Algorithm::WheelModular => FlPath::Wheel,
            a => return Err(Error::Unsupported(format!("{a:?} does not implement fl"))),
        };
        let bound = match path {
            FlPath::Fat => {
                let view = self.fat(width).ok_or_else(|| Error::Unsupported("graph is not s-fat-links".into()))?;
                fat_comb_bound(&view) as f64
            }
            FlPath::Wheel => {
                let view = self.wheel().ok_or_else(|| Error::Unsupported("graph is neither fat-links nor a wheel".into()))?;
                fl_wheel_bound(&view, &cfg)
            }
        };
        let va = cfg.operator()?;
        let e = self.exec(g, &fl_plan(g, &cfg, path)?)?;
        let sum = e
            .cloud_file(0, RESULT_FILE)
            .map(|b| va.decode(&b))
            .ok_or_else(|| Error::MissingData(NodeId::Cloud(0), RESULT_FILE.into()))?;
        let want: Vec<u64> = (0..cfg.m).map(|c| cfg.x.iter().map(|x| x[c]).sum::<u64>() % cfg.modulus).collect();
        Ok(Measured {
            rounds: e.metrics().rounds_elapsed,
            bound,
            algorithm: if path == FlPath::Fat { "fat" } else { "wheel_modular" },
            result: json!({ "sum": sum, "matches": sum == want }),
        })
    }

    fn dedup(&mut self) -> Result<Measured> {
        let g = self.graph();
        let n = g.processing_count();
        let p = self
            .sc
            .dedup
            .as_ref()
            .ok_or_else(|| Error::scenario("task", "dedup task without parameters"))?;
        let view = self.fat(self.sc.s).ok_or_else(|| Error::Unsupported("dedup needs an s-fat-links graph".into()))?;
        let op = DedupUnion::new(p.hash_bits, n, p.capacity)?;
        let inputs = (0..n)
            .map(|i| {
                let own: Ownership = p.files.get(&i).into_iter().flatten().map(|&h| (h, i)).collect();
                op.encode(&own)
            })
            .collect::<Result<Vec<_>>>()?;
        let shared: Operator = std::sync::Arc::new(op.clone());
        let run = FatCombRun {
            comb: FatComb {
                view: &view,
                operator: shared,
                input: "in".into(),
            },
            inputs,
        };
        let (bits, m1) = self.drive(&run, g)?;
        let (copies, m2) = self.drive(&FatCast { view: &view, payload: &bits }, g)?;
        let owners = op.decode(&bits)?;
        let identical = copies.iter().all(|c| *c == bits);
        let map: BTreeMap<String, usize> = owners.iter().map(|(h, o)| (h.to_string(), *o)).collect();
        Ok(Measured {
            rounds: m1.rounds_elapsed + m2.rounds_elapsed,
            bound: 2.0 * fat_comb_bound(&view) as f64,
            algorithm: "fat",
            result: json!({ "ownership": map, "identical_at_all_nodes": identical }),
        })
    }
}

fn min_bandwidths(g: &NetworkGraph) -> (u64, u64) {
    let n = g.processing_count();
    let bc = (0..n).map(|i| g.up(i)).min().unwrap_or(0);
    let bl = (0..n)
        .flat_map(|u| g.local_neighbors(u).map(|(_, w)| w).collect::<Vec<_>>())
        .min()
        .unwrap_or(0);
    (bc, bl)
}

/// Runs the scenario's task and measures it.
pub fn run_scenario(sc: &Scenario, id: &str, trace: bool) -> Result<RunOutput> {
    let mut r = Runner {
        sc,
        trace: trace.then(Vec::new),
        rng: ChaCha8Rng::seed_from_u64(sc.seed),
    };
    let m = match &sc.task {
        Task::CloudWrite { node, algorithm } => r.single(*node, *algorithm, false)?,
        Task::CloudRead { node, algorithm } => r.single(*node, *algorithm, true)?,
        Task::AllWrite { sizes } => r.collective(sizes, false)?,
        Task::AllRead { sizes } => r.collective(sizes, true)?,
        Task::Combine {
            operator,
            inputs,
            algorithm,
        } => r.combine(operator.build()?, inputs.as_ref(), *algorithm)?,
        Task::Cast { size, algorithm } => r.cast(*size, *algorithm)?,
        Task::FederatedLearning { algorithm } => r.fl(*algorithm)?,
        Task::Dedup {} => r.dedup()?,
    };
    let (bc, bl) = min_bandwidths(&sc.graph);
    let ratio = if m.bound > 0.0 { f64::from(m.rounds) / m.bound } else { 0.0 };
    Ok(RunOutput {
        row: MetricsRow {
            scenario_id: id.to_string(),
            task: sc.task.label().to_string(),
            n: sc.graph.processing_count(),
            s: sc.s,
            bc,
            bl,
            rounds: m.rounds,
            bound: m.bound,
            ratio,
            seed: sc.seed,
        },
        algorithm: m.algorithm,
        result: m.result,
        trace: r.trace,
    })
}

/// Writes rows as CSV with the fixed header, even when there are none.
pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["scenario_id", "task", "n", "s", "bc", "bl", "rounds", "bound", "ratio", "seed"])
        .map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Path,
    Ring,
    Wheel,
}

fn one() -> usize {
    1
}

/// A grid of uniform scenarios: every combination of the listed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub topology: Topology,
    pub n: Vec<usize>,
    pub s: Vec<u64>,
    pub bc: Vec<u64>,
    pub bl: Vec<u64>,
    /// Task template; sizes of cAW/cAR and cCast follow `s`.
    pub task: Task,
    #[serde(default = "one")]
    pub repetitions: usize,
    pub seed: u64,
    /// Skip points with `bl < bc`.
    #[serde(default)]
    pub require_bl_ge_bc: bool,
}

/// Parses a sweep document, reporting the path of the first bad field.
pub fn load_sweep(text: &str) -> Result<SweepSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::scenario(path, e.into_inner().to_string())
    })
}

fn uniform_graph(t: Topology, n: usize, bc: u64, bl: u64) -> Result<NetworkGraph> {
    Ok(match t {
        Topology::Path => build_path_with_cloud(n, bc, bl),
        Topology::Ring => {
            if n < 3 {
                return Err(Error::scenario("n", "a ring needs n >= 3"));
            }
            let mut g = build_path_with_cloud(n, bc, bl);
            g.set_symmetric(NodeId::Proc(n - 1), NodeId::Proc(0), bl);
            g
        }
        Topology::Wheel => build_uniform_wheel(n, bc, bl)?.graph().clone(),
    })
}

/// The scenarios of a sweep in output order, with their ids.
pub fn sweep_points(spec: &SweepSpec) -> Result<Vec<(String, Scenario)>> {
    let mut out = Vec::new();
    let topo = serde_json::to_value(spec.topology)?;
    let topo = topo.as_str().unwrap_or("graph");
    for &n in &spec.n {
        for &s in &spec.s {
            for &bc in &spec.bc {
                for &bl in &spec.bl {
                    if spec.require_bl_ge_bc && bl < bc {
                        continue;
                    }
                    for rep in 0..spec.repetitions {
                        let task = match &spec.task {
                            Task::AllWrite { .. } => Task::AllWrite { sizes: vec![s; n] },
                            Task::AllRead { .. } => Task::AllRead { sizes: vec![s; n] },
                            Task::Cast { algorithm, .. } => Task::Cast {
                                size: s,
                                algorithm: *algorithm,
                            },
                            Task::Combine { operator, .. } => {
                                let w = operator.build()?.bit_width() as u64;
                                if w != s {
                                    return Err(Error::scenario("s", format!("operator width {w} differs from s = {s}")));
                                }
                                spec.task.clone()
                            }
                            Task::FederatedLearning { .. } | Task::Dedup {} => {
                                return Err(Error::scenario("task", "fl and dedup cannot be swept"))
                            }
                            t => t.clone(),
                        };
                        let id = format!("{topo}-n{n}-s{s}-bc{bc}-bl{bl}-r{rep}");
                        let g = uniform_graph(spec.topology, n, bc, bl)?;
                        out.push((id, scenario(g, task, s, spec.seed + rep as u64)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs every point, in parallel, and returns rows in point order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<MetricsRow>> {
    let points = sweep_points(spec)?;
    points
        .par_iter()
        .map(|(id, sc)| run_scenario(sc, id, false).map(|o| o.row))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_scenario;

    #[test]
    fn path_write_row() {
        let sc = scenario(build_path_with_cloud(16, 1, 256), Task::CloudWrite { node: 0, algorithm: Algorithm::Auto }, 256, 1);
        let out = run_scenario(&sc, "p", false).unwrap();
        assert_eq!(out.algorithm, "fat");
        assert_eq!(out.row.bound, 31.0);
        assert!((31..=93).contains(&out.row.rounds));
        assert_eq!(out.result["delivered"], true);
    }

    #[test]
    fn every_task_runs() {
        let g = build_uniform_wheel(6, 4, 16).unwrap().graph().clone();
        let tasks = [
            Task::CloudRead { node: 2, algorithm: Algorithm::Flow },
            Task::AllWrite { sizes: vec![8; 6] },
            Task::AllRead { sizes: vec![8, 0, 8, 0, 8, 0] },
            Task::Cast { size: 16, algorithm: Algorithm::Auto },
        ];
        for t in tasks {
            let out = run_scenario(&scenario(g.clone(), t, 16, 3), "w", true).unwrap();
            assert_eq!(out.result["delivered"], true, "{}", out.row.task);
            assert!(!out.trace.unwrap().is_empty());
        }
    }

    #[test]
    fn combine_and_apps_from_json() {
        let comb = r#"{"nodes": 3, "links": [{"u":0,"v":1,"w":32},{"u":1,"v":2,"w":32},{"u":2,"v":0,"w":32}],
            "cloud_links": [{"node":0,"up":4,"down":4},{"node":1,"up":4,"down":4},{"node":2,"up":4,"down":4}],
            "task": {"kind":"cComb","operator":{"op":"matmul","d":2,"p":2}}, "s": 4, "seed": 2}"#;
        let out = run_scenario(&load_scenario(comb).unwrap(), "c", false).unwrap();
        assert_eq!(out.result["matches_fold"], true);
        assert_eq!(out.algorithm, "wheel_holistic");

        let fl = comb
            .replace(r#"{"kind":"cComb","operator":{"op":"matmul","d":2,"p":2}}"#, r#"{"kind":"fl"}"#)
            .replace(r#""s": 4"#, r#""s": 14, "m": 2, "M": 100, "x": [[10,20],[30,40],[5,5]]"#);
        let out = run_scenario(&load_scenario(&fl).unwrap(), "f", false).unwrap();
        assert_eq!(out.result["sum"], json!([45, 65]));

        let dd = comb
            .replace(r#"{"kind":"cComb","operator":{"op":"matmul","d":2,"p":2}}"#, r#"{"kind":"dedup"}"#)
            .replace(r#""s": 4"#, r#""s": 20, "m": 2, "H": 8, "files": {"1": [5], "2": [5, 9]}"#);
        let out = run_scenario(&load_scenario(&dd).unwrap(), "d", false).unwrap();
        assert_eq!(out.result["ownership"], json!({"5": 1, "9": 2}));
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let spec = load_sweep(
            r#"{"topology":"wheel","n":[],"s":[256],"bc":[4],"bl":[16],"task":{"kind":"cW","node":0},"seed":1}"#,
        )
        .unwrap();
        let rows = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "scenario_id,task,n,s,bc,bl,rounds,bound,ratio,seed\n");
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = load_sweep(
            r#"{"topology":"wheel","n":[8],"s":[64],"bc":[4,16],"bl":[16,4],"task":{"kind":"cW","node":0},
                "seed":5,"require_bl_ge_bc":true,"repetitions":2}"#,
        )
        .unwrap();
        let a = run_sweep(&spec).unwrap();
        assert_eq!(a.len(), 3 * 2);
        assert_eq!(a, run_sweep(&spec).unwrap());
        assert!(load_sweep(r#"{"topology":"torus"}"#).is_err());
    }
}
