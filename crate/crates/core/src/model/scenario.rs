use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::graph::{NetworkGraph, NodeId};
use crate::bits::ceil_log2;
use crate::error::{Error, Result};
use crate::operators::OperatorSpec;

/// Which algorithm a task should run. `Auto` picks from the topology.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Auto,
    /// Optimal schedules from dynamic flows, any topology.
    Flow,
    Generic,
    Fat,
    Wheel,
    WheelHolistic,
    WheelModular,
}

impl Algorithm {
    fn is_auto(&self) -> bool {
        *self == Algorithm::Auto
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Task {
    #[serde(rename = "cW")]
    CloudWrite {
        node: usize,
        #[serde(default, skip_serializing_if = "Algorithm::is_auto")]
        algorithm: Algorithm,
    },
    #[serde(rename = "cR")]
    CloudRead {
        node: usize,
        #[serde(default, skip_serializing_if = "Algorithm::is_auto")]
        algorithm: Algorithm,
    },
    #[serde(rename = "cAW")]
    AllWrite { sizes: Vec<u64> },
    #[serde(rename = "cAR")]
    AllRead { sizes: Vec<u64> },
    #[serde(rename = "cComb")]
    Combine {
        operator: OperatorSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inputs: Option<Vec<Value>>,
        #[serde(default, skip_serializing_if = "Algorithm::is_auto")]
        algorithm: Algorithm,
    },
    #[serde(rename = "cCast")]
    Cast {
        size: u64,
        #[serde(default, skip_serializing_if = "Algorithm::is_auto")]
        algorithm: Algorithm,
    },
    #[serde(rename = "fl")]
    FederatedLearning {
        #[serde(default, skip_serializing_if = "Algorithm::is_auto")]
        algorithm: Algorithm,
    },
    #[serde(rename = "dedup")]
    Dedup {},
}

impl Task {
    pub fn label(&self) -> &'static str {
        match self {
            Task::CloudWrite { .. } => "cW",
            Task::CloudRead { .. } => "cR",
            Task::AllWrite { .. } => "cAW",
            Task::AllRead { .. } => "cAR",
            Task::Combine { .. } => "cComb",
            Task::Cast { .. } => "cCast",
            Task::FederatedLearning { .. } => "fl",
            Task::Dedup {} => "dedup",
        }
    }
}

/// Parameters of the masked federated-learning task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlParams {
    pub m: usize,
    pub modulus: u64,
    pub x: Vec<Vec<u64>>,
}

/// Parameters of the dedup task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DedupParams {
    pub hash_bits: usize,
    pub capacity: usize,
    pub files: BTreeMap<usize, Vec<u64>>,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub graph: NetworkGraph,
    pub task: Task,
    pub s: u64,
    pub seed: u64,
    pub fl: Option<FlParams>,
    pub dedup: Option<DedupParams>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    u: usize,
    v: usize,
    w: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudLinkDoc {
    node: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    cloud: usize,
    up: u64,
    down: u64,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

fn one() -> usize {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    nodes: usize,
    #[serde(default = "one")]
    clouds: usize,
    links: Vec<LinkDoc>,
    cloud_links: Vec<CloudLinkDoc>,
    task: Task,
    s: u64,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    modulus: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<Vec<Vec<u64>>>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    hash_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    files: Option<BTreeMap<String, Vec<u64>>>,
}

/// Parses and validates a scenario document. Errors carry a path into the
/// document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::scenario(path, e.into_inner().to_string())
    })?;
    from_doc(doc)
}

fn from_doc(doc: ScenarioDoc) -> Result<Scenario> {
    let n = doc.nodes;
    if n == 0 {
        return Err(Error::scenario("nodes", "need at least one processing node"));
    }
    if doc.clouds == 0 {
        return Err(Error::scenario("clouds", "need at least one cloud node"));
    }
    let mut graph = NetworkGraph::new(n, doc.clouds);
    let mut seen = BTreeSet::new();
    for (k, l) in doc.links.iter().enumerate() {
        let path = format!("links[{k}]");
        if l.u >= n || l.v >= n {
            return Err(Error::scenario(path, format!("node out of range 0..{n}")));
        }
        if l.w == 0 {
            return Err(Error::scenario(format!("{path}.w"), "bandwidth must be positive"));
        }
        if l.u == l.v {
            return Err(Error::scenario(path, "self-loop"));
        }
        if !seen.insert((l.u.min(l.v), l.u.max(l.v))) {
            return Err(Error::scenario(path, "duplicate link"));
        }
        graph.set_symmetric(NodeId::Proc(l.u), NodeId::Proc(l.v), l.w);
    }
    let mut seen = BTreeSet::new();
    for (k, c) in doc.cloud_links.iter().enumerate() {
        let path = format!("cloud_links[{k}]");
        if c.node >= n {
            return Err(Error::scenario(format!("{path}.node"), format!("node out of range 0..{n}")));
        }
        if c.cloud >= doc.clouds {
            return Err(Error::scenario(format!("{path}.cloud"), "unknown cloud"));
        }
        if c.up == 0 || c.down == 0 {
            return Err(Error::scenario(path, "bandwidth must be positive"));
        }
        if !seen.insert((c.node, c.cloud)) {
            return Err(Error::scenario(path, "duplicate cloud link"));
        }
        graph.set_cloud_link(c.node, c.cloud, c.up, c.down);
    }
    if let Some(v) = graph.validate().first() {
        return Err(Error::scenario("links", v.to_string()));
    }
    check_task(&doc.task, n, doc.s)?;

    let fl = match &doc.task {
        Task::FederatedLearning { .. } => Some(fl_params(&doc, n)?),
        _ => None,
    };
    let dedup = match &doc.task {
        Task::Dedup {} => Some(dedup_params(&doc, n)?),
        _ => None,
    };
    let uses_fl = fl.is_some();
    let uses_dedup = dedup.is_some();
    if !uses_fl && !uses_dedup && doc.m.is_some() {
        return Err(Error::scenario("m", "only fl and dedup tasks take `m`"));
    }
    if !uses_fl && (doc.modulus.is_some() || doc.x.is_some()) {
        return Err(Error::scenario("M", "only the fl task takes `M` and `x`"));
    }
    if !uses_dedup && (doc.hash_bits.is_some() || doc.files.is_some()) {
        return Err(Error::scenario("H", "only the dedup task takes `H` and `files`"));
    }
    Ok(Scenario {
        graph,
        task: doc.task,
        s: doc.s,
        seed: doc.seed,
        fl,
        dedup,
    })
}

fn check_task(task: &Task, n: usize, s: u64) -> Result<()> {
    match task {
        Task::CloudWrite { node, .. } | Task::CloudRead { node, .. } => {
            if *node >= n {
                return Err(Error::scenario("task.node", format!("node out of range 0..{n}")));
            }
        }
        Task::AllWrite { sizes } | Task::AllRead { sizes } => {
            if sizes.len() != n {
                return Err(Error::scenario(
                    "task.sizes",
                    format!("expected {n} sizes, got {}", sizes.len()),
                ));
            }
        }
        Task::Combine { operator, inputs, .. } => {
            let op = operator
                .build()
                .map_err(|e| Error::scenario("task.operator", e.to_string()))?;
            if op.bit_width() as u64 != s {
                return Err(Error::scenario(
                    "task.operator",
                    format!("operator width {} differs from s = {s}", op.bit_width()),
                ));
            }
            if let Some(inputs) = inputs {
                if inputs.len() != n {
                    return Err(Error::scenario(
                        "task.inputs",
                        format!("expected {n} inputs, got {}", inputs.len()),
                    ));
                }
                for (k, v) in inputs.iter().enumerate() {
                    op.parse_value(v)
                        .map_err(|e| Error::scenario(format!("task.inputs[{k}]"), e.to_string()))?;
                }
            }
        }
        Task::Cast { size, .. } => {
            if *size == 0 {
                return Err(Error::scenario("task.size", "size must be positive"));
            }
        }
        Task::FederatedLearning { .. } | Task::Dedup {} => {}
    }
    Ok(())
}

fn fl_params(doc: &ScenarioDoc, n: usize) -> Result<FlParams> {
    let m = doc.m.ok_or_else(|| Error::scenario("m", "fl needs `m`"))?;
    let modulus = doc.modulus.ok_or_else(|| Error::scenario("M", "fl needs `M`"))?;
    if modulus < 2 {
        return Err(Error::scenario("M", "modulus must be at least 2"));
    }
    let x = doc.x.clone().ok_or_else(|| Error::scenario("x", "fl needs `x`"))?;
    if x.len() != n {
        return Err(Error::scenario("x", format!("expected {n} vectors, got {}", x.len())));
    }
    for (i, xi) in x.iter().enumerate() {
        if xi.len() != m {
            return Err(Error::scenario(format!("x[{i}]"), format!("expected {m} coordinates")));
        }
        if let Some(j) = xi.iter().position(|&c| c >= modulus) {
            return Err(Error::scenario(format!("x[{i}][{j}]"), "coordinate not below M"));
        }
    }
    for j in 0..m {
        let total: u128 = x.iter().map(|xi| u128::from(xi[j])).sum();
        if total >= u128::from(modulus) {
            return Err(Error::scenario(
                "M",
                format!("coordinate {j} of the sum reaches {total} >= M"),
            ));
        }
    }
    let width = m as u64 * u64::from(ceil_log2(modulus));
    if doc.s != width {
        return Err(Error::scenario("s", format!("fl needs s = m*ceil(log2 M) = {width}")));
    }
    Ok(FlParams { m, modulus, x })
}

fn dedup_params(doc: &ScenarioDoc, n: usize) -> Result<DedupParams> {
    let capacity = doc.m.ok_or_else(|| Error::scenario("m", "dedup needs `m`"))?;
    let hash_bits = doc.hash_bits.ok_or_else(|| Error::scenario("H", "dedup needs `H`"))?;
    if !(1..=63).contains(&hash_bits) {
        return Err(Error::scenario("H", "H must be in 1..=63"));
    }
    let raw = doc.files.clone().ok_or_else(|| Error::scenario("files", "dedup needs `files`"))?;
    let mut files = BTreeMap::new();
    let mut unique = BTreeSet::new();
    let sentinel = (1u64 << hash_bits) - 1;
    for (key, hashes) in raw {
        let path = format!("files.{key}");
        let node: usize = key
            .parse()
            .map_err(|_| Error::scenario(&path, "keys are node indices"))?;
        if node >= n {
            return Err(Error::scenario(&path, format!("node out of range 0..{n}")));
        }
        if let Some(h) = hashes.iter().find(|&&h| h >= sentinel) {
            return Err(Error::scenario(&path, format!("hash {h} needs more than H bits")));
        }
        unique.extend(hashes.iter().copied());
        files.insert(node, hashes);
    }
    if unique.len() > capacity {
        return Err(Error::scenario(
            "files",
            format!("{} unique hashes exceed m = {capacity}", unique.len()),
        ));
    }
    let width = capacity as u64 * (hash_bits as u64 + u64::from(ceil_log2(n as u64)));
    if doc.s != width {
        return Err(Error::scenario("s", format!("dedup needs s = m*(H+ceil(log2 n)) = {width}")));
    }
    Ok(DedupParams {
        hash_bits,
        capacity,
        files,
    })
}

/// Serialises a scenario. Local links are written once per unordered pair,
/// so asymmetric local links cannot be saved.
pub fn save_scenario(sc: &Scenario) -> Result<String> {
    let g = &sc.graph;
    let mut links = Vec::new();
    let mut cloud_links = Vec::new();
    for (u, v, w) in g.links() {
        match (u, v) {
            (NodeId::Proc(a), NodeId::Proc(b)) => {
                if g.bandwidth(v, u) != Some(w) {
                    return Err(Error::InvalidGraph(format!("asymmetric local link {u}->{v}")));
                }
                if a < b {
                    links.push(LinkDoc { u: a, v: b, w });
                }
            }
            (NodeId::Proc(i), NodeId::Cloud(c)) => {
                let down = g.bandwidth(v, u).ok_or_else(|| {
                    Error::InvalidGraph(format!("cloud link {u}->{v} has no downlink"))
                })?;
                cloud_links.push(CloudLinkDoc {
                    node: i,
                    cloud: c,
                    up: w,
                    down,
                });
            }
            (NodeId::Cloud(_), NodeId::Proc(_)) => {
                if g.bandwidth(v, u).is_none() {
                    return Err(Error::InvalidGraph(format!("cloud link {u}->{v} has no uplink")));
                }
            }
            (NodeId::Cloud(_), NodeId::Cloud(_)) => {
                return Err(Error::InvalidGraph(format!("cloud-cloud link {u}->{v}")));
            }
        }
    }
    let doc = ScenarioDoc {
        nodes: g.processing_count(),
        clouds: g.cloud_count(),
        links,
        cloud_links,
        task: sc.task.clone(),
        s: sc.s,
        seed: sc.seed,
        m: sc
            .fl
            .as_ref()
            .map(|f| f.m)
            .or(sc.dedup.as_ref().map(|d| d.capacity)),
        modulus: sc.fl.as_ref().map(|f| f.modulus),
        x: sc.fl.as_ref().map(|f| f.x.clone()),
        hash_bits: sc.dedup.as_ref().map(|d| d.hash_bits),
        files: sc.dedup.as_ref().map(|d| {
            d.files
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect()
        }),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// A scenario with the given graph and task and no application payload.
pub fn scenario(graph: NetworkGraph, task: Task, s: u64, seed: u64) -> Scenario {
    Scenario {
        graph,
        task,
        s,
        seed,
        fl: None,
        dedup: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_uniform_wheel;

    const MINIMAL: &str = r#"{
        "nodes": 1, "clouds": 1, "links": [],
        "cloud_links": [{"node": 0, "up": 4, "down": 4}],
        "task": {"kind": "cW", "node": 0}, "s": 10, "seed": 1
    }"#;

    #[test]
    fn minimal_cw() {
        let sc = load_scenario(MINIMAL).unwrap();
        assert_eq!(
            sc.task,
            Task::CloudWrite {
                node: 0,
                algorithm: Algorithm::Auto
            }
        );
        assert_eq!(sc.graph.up(0), 4);
    }

    #[test]
    fn negative_bandwidth_names_field() {
        let text = MINIMAL.replace(r#""up": 4"#, r#""up": -4"#);
        let err = load_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("cloud_links[0].up"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace(r#""seed": 1"#, r#""seed": 1, "colour": 3"#);
        assert!(load_scenario(&text).is_err());
        let text = MINIMAL.replace(r#""node": 0}"#, r#""node": 0, "x": 1}"#);
        assert!(load_scenario(&text).is_err());
    }

    #[test]
    fn task_node_range_checked() {
        let text = MINIMAL.replace(r#""kind": "cW", "node": 0"#, r#""kind": "cW", "node": 3"#);
        let err = load_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("task.node"), "{err}");
    }

    #[test]
    fn wheel_comb_roundtrip() {
        let w = build_uniform_wheel(4, 2, 8).unwrap();
        let sc = scenario(
            w.graph().clone(),
            Task::Combine {
                operator: OperatorSpec::MatMul { d: 2, p: 2 },
                inputs: Some(vec![serde_json::json!([[1, 0], [0, 1]]); 4]),
                algorithm: Algorithm::WheelHolistic,
            },
            4,
            9,
        );
        let text = save_scenario(&sc).unwrap();
        assert_eq!(load_scenario(&text).unwrap(), sc);
    }

    #[test]
    fn operator_width_must_match_s() {
        let text = MINIMAL.replace(
            r#"{"kind": "cW", "node": 0}"#,
            r#"{"kind": "cComb", "operator": {"op": "matmul", "d": 2, "p": 2}}"#,
        );
        let err = load_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("task.operator"), "{err}");
    }
}
