//! DOT and JSON netlists.
//!
//! JSON schema:
//!
//! ```text
//! { "inputs": ["q0","q1","q2","q3"],
//!   "nodes": [{"id": 4, "kind": "add", "args": [1, 2]}, ...],
//!   "outputs": {"c00": 30, ..., "c22": 27} }
//! ```
//!
//! Inputs implicitly hold ids 0..3. Node ids are strictly increasing and
//! arguments reference smaller ids. A node may carry an optional `"label"`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{DatapathError, DatapathGraph, DatapathNode, NodeKind, INPUT_NAMES};
use crate::quaternion::ENTRY_NAMES;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetlistDoc {
    inputs: Vec<String>,
    nodes: Vec<NetlistNode>,
    outputs: BTreeMap<String, i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetlistNode {
    id: i64,
    kind: String,
    args: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

pub fn emit_netlist_json(g: &DatapathGraph) -> String {
    let doc = NetlistDoc {
        inputs: INPUT_NAMES.iter().map(|s| s.to_string()).collect(),
        nodes: g
            .nodes()
            .iter()
            .filter(|n| n.kind != NodeKind::Input)
            .map(|n| NetlistNode {
                id: n.id as i64,
                kind: n.kind.name().to_string(),
                args: n.args.iter().map(|&a| a as i64).collect(),
                label: n.label.clone(),
            })
            .collect(),
        outputs: g
            .outputs()
            .iter()
            .map(|(k, &v)| (k.clone(), v as i64))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("netlist serializes")
}

pub fn load_netlist_json(text: &str) -> Result<DatapathGraph, DatapathError> {
    let doc: NetlistDoc = serde_json::from_str(text)?;
    let schema = |msg: String| Err(DatapathError::Schema(msg));

    if doc.inputs != INPUT_NAMES {
        return schema(format!(
            "inputs must be {INPUT_NAMES:?}, got {:?}",
            doc.inputs
        ));
    }
    let names: BTreeSet<&str> = doc.outputs.keys().map(String::as_str).collect();
    if let Some(missing) = ENTRY_NAMES.iter().find(|n| !names.contains(**n)) {
        return schema(format!(
            "outputs must name all of c00..c22; {missing} is missing"
        ));
    }
    if let Some(extra) = names.iter().find(|n| !ENTRY_NAMES.contains(n)) {
        return schema(format!("unexpected output {extra}"));
    }

    let first_id = INPUT_NAMES.len() as i64;
    let mut kinds: HashMap<i64, NodeKind> = HashMap::new();
    for n in &doc.nodes {
        let kind = match NodeKind::parse(&n.kind) {
            Some(NodeKind::Input) | None => {
                return schema(format!(
                    "node {}: kind must be add, sub, square, double or mul, got {:?}",
                    n.id, n.kind
                ))
            }
            Some(k) => k,
        };
        if n.id < first_id {
            return schema(format!(
                "node id {} collides with the input ids 0..{}",
                n.id,
                first_id - 1
            ));
        }
        if kinds.insert(n.id, kind).is_some() {
            return schema(format!("duplicate node id {}", n.id));
        }
        if n.args.len() != kind.arity() {
            return Err(DatapathError::Arity {
                id: n.id as usize,
                kind,
                expected: kind.arity(),
                got: n.args.len(),
            });
        }
    }
    let exists = |id: i64| (0..first_id).contains(&id) || kinds.contains_key(&id);
    for n in &doc.nodes {
        if let Some(&arg) = n.args.iter().find(|&&a| !exists(a)) {
            return Err(DatapathError::Dangling { id: n.id, arg });
        }
    }
    if let Some((name, &id)) = doc.outputs.iter().find(|(_, &id)| !exists(id)) {
        return Err(DatapathError::DanglingOutput {
            name: name.clone(),
            id,
        });
    }
    if let Some(id) = find_cycle(&doc.nodes) {
        return Err(DatapathError::Cycle { id });
    }
    let mut prev = first_id - 1;
    for n in &doc.nodes {
        if n.id <= prev {
            return Err(DatapathError::IdOrder { id: n.id, prev });
        }
        if let Some(&arg) = n.args.iter().find(|&&a| a >= n.id) {
            return Err(DatapathError::ForwardReference { id: n.id, arg });
        }
        prev = n.id;
    }

    let mut remap: HashMap<i64, usize> = (0..first_id).map(|i| (i, i as usize)).collect();
    let mut nodes: Vec<DatapathNode> = INPUT_NAMES
        .iter()
        .enumerate()
        .map(|(id, name)| DatapathNode {
            id,
            kind: NodeKind::Input,
            args: vec![],
            label: Some(name.to_string()),
        })
        .collect();
    for n in &doc.nodes {
        let id = nodes.len();
        remap.insert(n.id, id);
        nodes.push(DatapathNode {
            id,
            kind: kinds[&n.id],
            args: n.args.iter().map(|a| remap[a]).collect(),
            label: n.label.clone(),
        });
    }
    let outputs = doc
        .outputs
        .iter()
        .map(|(k, v)| (k.clone(), remap[v]))
        .collect();
    DatapathGraph::new(nodes, outputs)
}

/// Some node on a cycle, if the node set has one (Kahn's algorithm).
fn find_cycle(nodes: &[NetlistNode]) -> Option<i64> {
    let ids: HashMap<i64, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut indegree = vec![0usize; nodes.len()];
    let mut users: Vec<Vec<usize>> = vec![vec![]; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        for a in &n.args {
            if let Some(&j) = ids.get(a) {
                indegree[i] += 1;
                users[j].push(i);
            }
        }
    }
    let mut ready: Vec<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut done = 0;
    while let Some(i) = ready.pop() {
        done += 1;
        for &u in &users[i] {
            indegree[u] -= 1;
            if indegree[u] == 0 {
                ready.push(u);
            }
        }
    }
    if done == nodes.len() {
        return None;
    }
    (0..nodes.len())
        .filter(|&i| indegree[i] > 0)
        .map(|i| nodes[i].id)
        .min()
}

const STAGE_NAMES: [&str; 4] = [
    "pairwise adders",
    "squarer bank",
    "combination adders",
    "output assembly",
];

/// A DOT digraph: one line per node (shape by kind, output names in the
/// label), grouped into stage clusters, then one line per edge.
pub fn emit_dot(g: &DatapathGraph) -> String {
    let mut out_names: HashMap<usize, Vec<&str>> = HashMap::new();
    for (name, &id) in g.outputs() {
        out_names.entry(id).or_default().push(name);
    }
    let node_line = |n: &DatapathNode| {
        let (shape, symbol) = match n.kind {
            NodeKind::Input => ("ellipse", ""),
            NodeKind::Add => ("box", "+"),
            NodeKind::Sub => ("box", "-"),
            NodeKind::Square => ("diamond", "x²"),
            NodeKind::Double => ("triangle", "<<1"),
            NodeKind::Mul => ("octagon", "×"),
        };
        let mut label = match (&n.label, n.kind) {
            (Some(l), NodeKind::Input) => l.clone(),
            (Some(l), _) => format!("{symbol}\\n{l}"),
            (None, _) => symbol.to_string(),
        };
        if let Some(names) = out_names.get(&n.id) {
            label.push_str("\\n");
            label.push_str(&names.join(","));
        }
        format!("n{} [label=\"{}\", shape={}];", n.id, label, shape)
    };

    let stages = g.stages();
    let mut s = String::from("digraph datapath {\n  rankdir=TB;\n");
    for n in g.nodes().iter().filter(|n| n.kind == NodeKind::Input) {
        let _ = writeln!(s, "  {}", node_line(n));
    }
    for (i, title) in STAGE_NAMES.iter().enumerate() {
        let stage = Some(i as u8 + 1);
        let members: Vec<&DatapathNode> =
            g.nodes().iter().filter(|n| stages[n.id] == stage).collect();
        if members.is_empty() {
            continue;
        }
        let _ = writeln!(s, "  subgraph cluster_stage{} {{", i + 1);
        let _ = writeln!(s, "    label=\"{}: {}\";", i + 1, title);
        for n in members {
            let _ = writeln!(s, "    {}", node_line(n));
        }
        s.push_str("  }\n");
    }
    for n in g.nodes() {
        for a in &n.args {
            let _ = writeln!(s, "  n{} -> n{};", a, n.id);
        }
    }
    s.push_str("}\n");
    s
}
