//! The conversion kernels as explicit arithmetic dataflow graphs.
//!
//! A graph is produced by running a kernel under a tracing profile, so the
//! graph and the kernel cannot drift apart. Graphs can be CSE'd, scheduled,
//! priced under a gate-cost model, evaluated under any scalar profile and
//! exported as DOT or JSON netlists.
//!
//! The squaring kernel's graph is grouped into four stages: pairwise input
//! adders, the squarer bank, the combination adders that form the `theta`
//! terms and `lambda`, and the output assembly adders. That grouping is a
//! reconstruction of the processing unit's block structure from the
//! equations alone; see [`DatapathGraph::stages`].

mod cost;
mod cse;
mod netlist;
mod schedule;

pub use cost::{
    compare_costs, cost_report, CostComparison, CostModel, CostReport, KindCost, KindWeights,
};
pub use cse::{cse, unshare};
pub use netlist::{emit_dot, emit_netlist_json, load_netlist_json};
pub use schedule::{schedule_asap, Schedule};

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logan::{assemble, compute_intermediates};
use crate::quaternion::{rotmat_direct, Quaternion, RotationMatrix3, ENTRY_NAMES};
use crate::scalar::{OpCountLedger, ScalarProfile};
use crate::Method;

/// Input labels, in id order.
pub const INPUT_NAMES: [&str; 4] = ["q0", "q1", "q2", "q3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Add,
    Sub,
    Square,
    Double,
    Mul,
}

impl NodeKind {
    pub fn arity(self) -> usize {
        match self {
            NodeKind::Input => 0,
            NodeKind::Square | NodeKind::Double => 1,
            NodeKind::Add | NodeKind::Sub | NodeKind::Mul => 2,
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, NodeKind::Add | NodeKind::Mul)
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Input => "input",
            NodeKind::Add => "add",
            NodeKind::Sub => "sub",
            NodeKind::Square => "square",
            NodeKind::Double => "double",
            NodeKind::Mul => "mul",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "input" => NodeKind::Input,
            "add" => NodeKind::Add,
            "sub" => NodeKind::Sub,
            "square" => NodeKind::Square,
            "double" => NodeKind::Double,
            "mul" => NodeKind::Mul,
            _ => return None,
        })
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DatapathNode {
    pub id: usize,
    pub kind: NodeKind,
    pub args: Vec<usize>,
    pub label: Option<String>,
}

#[derive(Debug, Error)]
pub enum DatapathError {
    #[error("node {id}: {kind} takes {expected} argument(s), got {got}")]
    Arity {
        id: usize,
        kind: NodeKind,
        expected: usize,
        got: usize,
    },
    #[error("node {id} references unknown node {arg}")]
    Dangling { id: i64, arg: i64 },
    #[error("node {id} references node {arg}, which is not earlier in the graph")]
    ForwardReference { id: i64, arg: i64 },
    #[error("cycle through node {id}")]
    Cycle { id: i64 },
    #[error("node ids must be strictly increasing: {id} follows {prev}")]
    IdOrder { id: i64, prev: i64 },
    #[error("node ids must equal their position: node at index {index} has id {id}")]
    IdMismatch { index: usize, id: usize },
    #[error("the first four nodes must be the inputs q0, q1, q2, q3")]
    Inputs,
    #[error("output {name} references unknown node {id}")]
    DanglingOutput { name: String, id: i64 },
    #[error("graph has no output {0}")]
    MissingOutput(String),
    #[error("netlist schema violation: {0}")]
    Schema(String),
    #[error("invalid netlist JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A DAG of arithmetic nodes. Ids equal positions, the first four nodes are
/// the inputs `q0..q3`, and every argument precedes its user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatapathGraph {
    nodes: Vec<DatapathNode>,
    outputs: BTreeMap<String, usize>,
}

impl DatapathGraph {
    pub fn new(
        nodes: Vec<DatapathNode>,
        outputs: BTreeMap<String, usize>,
    ) -> Result<Self, DatapathError> {
        for (index, node) in nodes.iter().enumerate() {
            if node.id != index {
                return Err(DatapathError::IdMismatch { index, id: node.id });
            }
            let is_input_slot = index < INPUT_NAMES.len();
            let labelled_input = node.kind == NodeKind::Input
                && node.label.as_deref() == INPUT_NAMES.get(index).copied();
            if is_input_slot != labelled_input {
                return Err(DatapathError::Inputs);
            }
            if node.args.len() != node.kind.arity() {
                return Err(DatapathError::Arity {
                    id: node.id,
                    kind: node.kind,
                    expected: node.kind.arity(),
                    got: node.args.len(),
                });
            }
            if let Some(&arg) = node.args.iter().find(|&&a| a >= index) {
                return Err(DatapathError::ForwardReference {
                    id: index as i64,
                    arg: arg as i64,
                });
            }
        }
        if nodes.len() < INPUT_NAMES.len() {
            return Err(DatapathError::Inputs);
        }
        if let Some((name, &id)) = outputs.iter().find(|(_, &id)| id >= nodes.len()) {
            return Err(DatapathError::DanglingOutput {
                name: name.clone(),
                id: id as i64,
            });
        }
        Ok(Self { nodes, outputs })
    }

    pub fn nodes(&self) -> &[DatapathNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &DatapathNode {
        &self.nodes[id]
    }

    pub fn outputs(&self) -> &BTreeMap<String, usize> {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Operation nodes by hardware class. Inputs are free.
    pub fn census(&self) -> OpCountLedger {
        let mut l = OpCountLedger::default();
        for n in &self.nodes {
            match n.kind {
                NodeKind::Input => {}
                NodeKind::Add | NodeKind::Sub => l.addsub += 1,
                NodeKind::Square => l.square += 1,
                NodeKind::Double => l.double += 1,
                NodeKind::Mul => l.mul += 1,
            }
        }
        l
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Reconstructed block of each node: `None` for inputs, then
    /// 1 = adders fed only by inputs, 2 = squarers and multipliers,
    /// 3 = non-output adders fed only by coefficient squares or other
    /// stage-3 adders, 4 = everything else (output assembly and shifts).
    pub fn stages(&self) -> Vec<Option<u8>> {
        let is_output: Vec<bool> = {
            let mut v = vec![false; self.nodes.len()];
            for &id in self.outputs.values() {
                v[id] = true;
            }
            v
        };
        let mut stage: Vec<Option<u8>> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let arg_is_input = |a: &usize| self.nodes[*a].kind == NodeKind::Input;
            let s = match n.kind {
                NodeKind::Input => None,
                NodeKind::Square | NodeKind::Mul => Some(2),
                NodeKind::Add | NodeKind::Sub if n.args.iter().all(arg_is_input) => Some(1),
                NodeKind::Add | NodeKind::Sub => {
                    let combining = n.args.iter().all(|&a| {
                        let arg = &self.nodes[a];
                        let coeff_square =
                            arg.kind == NodeKind::Square && arg_is_input(&arg.args[0]);
                        coeff_square || stage[a] == Some(3)
                    });
                    if combining && !is_output[n.id] {
                        Some(3)
                    } else {
                        Some(4)
                    }
                }
                NodeKind::Double => Some(4),
            };
            stage.push(s);
        }
        stage
    }

    /// Interpret the graph in id order under `p`, returning every node value.
    pub fn evaluate_nodes<P: ScalarProfile>(
        &self,
        p: &P,
        q: &Quaternion<P::Value>,
    ) -> Vec<P::Value> {
        let inputs = [&q.q0, &q.q1, &q.q2, &q.q3];
        let mut vals: Vec<P::Value> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n.kind {
                NodeKind::Input => inputs[n.id].clone(),
                NodeKind::Add => p.add(&vals[n.args[0]], &vals[n.args[1]]),
                NodeKind::Sub => p.sub(&vals[n.args[0]], &vals[n.args[1]]),
                NodeKind::Mul => p.mul(&vals[n.args[0]], &vals[n.args[1]]),
                NodeKind::Square => p.square(&vals[n.args[0]]),
                NodeKind::Double => p.double(&vals[n.args[0]]),
            };
            vals.push(v);
        }
        vals
    }

    /// Values of all named outputs.
    pub fn evaluate_outputs<P: ScalarProfile>(
        &self,
        p: &P,
        q: &Quaternion<P::Value>,
    ) -> BTreeMap<String, P::Value> {
        let vals = self.evaluate_nodes(p, q);
        self.outputs
            .iter()
            .map(|(name, &id)| (name.clone(), vals[id].clone()))
            .collect()
    }
}

/// Evaluate a rotation-matrix graph. Fails if any of `c00..c22` is missing.
pub fn evaluate<P: ScalarProfile>(
    g: &DatapathGraph,
    q: &Quaternion<P::Value>,
    p: &P,
) -> Result<RotationMatrix3<P::Value>, DatapathError> {
    let ids: Vec<usize> = ENTRY_NAMES
        .iter()
        .map(|name| {
            g.outputs
                .get(*name)
                .copied()
                .ok_or_else(|| DatapathError::MissingOutput(name.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let vals = g.evaluate_nodes(p, q);
    let v = |k: usize| vals[ids[k]].clone();
    Ok(RotationMatrix3::from_rows([
        [v(0), v(1), v(2)],
        [v(3), v(4), v(5)],
        [v(6), v(7), v(8)],
    ]))
}

/// Incremental graph construction; ids are handed out in creation order so
/// arguments always precede their users.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    nodes: Vec<DatapathNode>,
    outputs: BTreeMap<String, usize>,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphBuilder {
    /// A builder holding the four input nodes.
    pub fn new() -> Self {
        let nodes = INPUT_NAMES
            .iter()
            .enumerate()
            .map(|(id, name)| DatapathNode {
                id,
                kind: NodeKind::Input,
                args: vec![],
                label: Some(name.to_string()),
            })
            .collect();
        Self {
            nodes,
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&self, index: usize) -> usize {
        assert!(index < INPUT_NAMES.len());
        index
    }

    /// # Panics
    /// If the arity is wrong, an argument does not exist yet, or `kind` is
    /// `Input`.
    pub fn op(&mut self, kind: NodeKind, args: &[usize]) -> usize {
        assert!(kind != NodeKind::Input, "inputs are created by the builder");
        assert_eq!(args.len(), kind.arity(), "{kind} arity");
        let id = self.nodes.len();
        assert!(args.iter().all(|&a| a < id), "argument does not exist yet");
        self.nodes.push(DatapathNode {
            id,
            kind,
            args: args.to_vec(),
            label: None,
        });
        id
    }

    pub fn label(&mut self, id: usize, label: impl Into<String>) {
        self.nodes[id].label = Some(label.into());
    }

    pub fn output(&mut self, name: impl Into<String>, id: usize) {
        self.outputs.insert(name.into(), id);
    }

    pub fn finish(self) -> DatapathGraph {
        DatapathGraph::new(self.nodes, self.outputs)
            .expect("builder maintains the graph invariants")
    }
}

/// A profile whose values are node ids: running a kernel under it records
/// the kernel's dataflow graph.
struct Tracer {
    builder: RefCell<GraphBuilder>,
}

impl Tracer {
    fn new() -> Self {
        Self {
            builder: RefCell::new(GraphBuilder::new()),
        }
    }

    fn inputs(&self) -> Quaternion<usize> {
        Quaternion::new(0, 1, 2, 3)
    }

    fn op(&self, kind: NodeKind, args: &[usize]) -> usize {
        self.builder.borrow_mut().op(kind, args)
    }

    fn finish(self, out: &RotationMatrix3<usize>) -> DatapathGraph {
        let mut b = self.builder.into_inner();
        for (name, &id) in ENTRY_NAMES.iter().zip(out.row_major()) {
            b.output(*name, id);
        }
        b.finish()
    }
}

impl ScalarProfile for Tracer {
    type Value = usize;

    fn zero(&self) -> usize {
        unimplemented!("constants have no datapath node")
    }
    fn one(&self) -> usize {
        unimplemented!("constants have no datapath node")
    }
    fn add(&self, a: &usize, b: &usize) -> usize {
        self.op(NodeKind::Add, &[*a, *b])
    }
    fn sub(&self, a: &usize, b: &usize) -> usize {
        self.op(NodeKind::Sub, &[*a, *b])
    }
    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.op(NodeKind::Mul, &[*a, *b])
    }
    fn square(&self, a: &usize) -> usize {
        self.op(NodeKind::Square, &[*a])
    }
    fn double(&self, a: &usize) -> usize {
        self.op(NodeKind::Double, &[*a])
    }
    fn halve(&self, _: &usize) -> usize {
        unimplemented!("neither kernel halves")
    }
}

fn trace_direct() -> DatapathGraph {
    let t = Tracer::new();
    let out = rotmat_direct(&t, &t.inputs());
    t.finish(&out)
}

fn trace_logan() -> DatapathGraph {
    let t = Tracer::new();
    let m = compute_intermediates(&t, &t.inputs());
    {
        let mut b = t.builder.borrow_mut();
        for (i, &id) in m.phi.iter().enumerate() {
            b.label(id, format!("phi{i}"));
        }
        b.label(m.theta0, "theta0");
        b.label(m.theta1, "theta1");
        b.label(m.theta3, "theta3");
        b.label(m.theta4, "theta4");
        b.label(m.lambda, "lambda");
    }
    let out = assemble(&t, &m);
    t.finish(&out)
}

/// The traced kernel graph, shared by value numbering.
pub fn build_graph(method: Method) -> DatapathGraph {
    let traced = match method {
        Method::Direct => trace_direct(),
        Method::Logan => trace_logan(),
    };
    cse(&traced)
}

/// The kernel as a forest of expression trees: every use of an intermediate
/// gets its own copy, as if each entry were written out independently.
pub fn build_naive_graph(method: Method) -> DatapathGraph {
    unshare(&build_graph(method))
}

pub fn build_direct_graph() -> DatapathGraph {
    build_graph(Method::Direct)
}

pub fn build_logan_graph() -> DatapathGraph {
    build_graph(Method::Logan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logan::LOGAN_CENSUS;
    use crate::quaternion::DIRECT_CENSUS;
    use crate::scalar::{F64Profile, RationalProfile};

    #[test]
    fn censuses_match_kernel_ledgers() {
        assert_eq!(build_direct_graph().census(), DIRECT_CENSUS);
        assert_eq!(build_logan_graph().census(), LOGAN_CENSUS);
        assert_eq!(build_direct_graph().outputs().len(), 9);
        assert_eq!(build_logan_graph().outputs().len(), 9);
    }

    #[test]
    fn naive_direct_has_twelve_squares() {
        let naive = build_naive_graph(Method::Direct);
        assert_eq!(naive.count(NodeKind::Square), 12);
        assert_eq!(cse(&naive).count(NodeKind::Square), 4);
        // same graph up to numbering
        assert_eq!(cse(&naive).census(), build_direct_graph().census());
        assert_eq!(cse(&naive).len(), build_direct_graph().len());
    }

    #[test]
    fn naive_logan_collapses_to_shared() {
        let naive = build_naive_graph(Method::Logan);
        assert!(naive.census().addsub > LOGAN_CENSUS.addsub);
        assert_eq!(cse(&naive).census(), LOGAN_CENSUS);
    }

    #[test]
    fn evaluate_examples() {
        let p = RationalProfile;
        let q = Quaternion::new(1, 2, 3, 4).map(RationalProfile::from_int);
        let m = evaluate(&build_logan_graph(), &q, &p).unwrap();
        let want = RotationMatrix3::from_rows([[-20, 4, 22], [20, -10, 20], [10, 28, 4]])
            .map(RationalProfile::from_int);
        assert_eq!(m, want);
        let m = evaluate(
            &build_direct_graph(),
            &Quaternion::new(1.0, 0.0, 0.0, 0.0),
            &F64Profile,
        )
        .unwrap();
        assert_eq!(m.c, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let m = evaluate(
            &build_logan_graph(),
            &Quaternion::new(1.0, 0.0, 0.0, 0.0),
            &F64Profile,
        )
        .unwrap();
        assert_eq!(m.c, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn evaluate_requires_all_entries() {
        let mut b = GraphBuilder::new();
        let s = b.op(NodeKind::Add, &[0, 1]);
        b.output("c00", s);
        let g = b.finish();
        let err = evaluate(&g, &Quaternion::new(1.0, 2.0, 3.0, 4.0), &F64Profile).unwrap_err();
        assert!(matches!(err, DatapathError::MissingOutput(ref n) if n == "c01"));
        let outs = g.evaluate_outputs(&F64Profile, &Quaternion::new(1.0, 2.0, 3.0, 4.0));
        assert_eq!(outs["c00"], 3.0);
    }

    #[test]
    fn logan_stages() {
        let g = build_logan_graph();
        let stages = g.stages();
        let count = |s: u8| stages.iter().filter(|&&x| x == Some(s)).count();
        // 6 pairwise adders, 10 squarers, theta0/1/3/4 and lambda, 15 assembly adders
        assert_eq!((count(1), count(2), count(3), count(4)), (6, 10, 5, 15));
        for n in g.nodes() {
            if let Some(label) = &n.label {
                if label.starts_with("theta") || label == "lambda" {
                    assert_eq!(stages[n.id], Some(3), "{label}");
                }
            }
        }
    }

    #[test]
    fn graph_validation() {
        let input = |id: usize| DatapathNode {
            id,
            kind: NodeKind::Input,
            args: vec![],
            label: Some(INPUT_NAMES[id].to_string()),
        };
        let mut nodes: Vec<_> = (0..4).map(input).collect();
        nodes.push(DatapathNode {
            id: 4,
            kind: NodeKind::Square,
            args: vec![0, 1],
            label: None,
        });
        assert!(matches!(
            DatapathGraph::new(nodes.clone(), BTreeMap::new()),
            Err(DatapathError::Arity { .. })
        ));
        nodes[4].args = vec![4];
        assert!(matches!(
            DatapathGraph::new(nodes.clone(), BTreeMap::new()),
            Err(DatapathError::ForwardReference { .. })
        ));
        nodes[4].args = vec![3];
        let outputs = BTreeMap::from([("c00".to_string(), 9)]);
        assert!(matches!(
            DatapathGraph::new(nodes.clone(), outputs),
            Err(DatapathError::DanglingOutput { .. })
        ));
        nodes.swap(0, 1);
        assert!(DatapathGraph::new(nodes, BTreeMap::new()).is_err());
    }
}
