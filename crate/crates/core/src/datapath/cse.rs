use std::collections::{BTreeMap, HashMap};

use super::{DatapathGraph, DatapathNode, NodeKind};

/// Common-subexpression elimination by value numbering, followed by removal
/// of nodes no output depends on.
///
/// Two nodes are merged when they have the same kind and the same
/// (renumbered) arguments; arguments of commutative kinds are compared as a
/// sorted pair. The surviving node keeps its original argument order, so
/// evaluation results are unchanged bit for bit.
pub fn cse(g: &DatapathGraph) -> DatapathGraph {
    let mut nodes: Vec<DatapathNode> = Vec::with_capacity(g.len());
    let mut remap: Vec<usize> = Vec::with_capacity(g.len());
    let mut table: HashMap<(NodeKind, Vec<usize>), usize> = HashMap::new();

    for n in g.nodes() {
        if n.kind == NodeKind::Input {
            remap.push(nodes.len());
            nodes.push(n.clone());
            continue;
        }
        let args: Vec<usize> = n.args.iter().map(|&a| remap[a]).collect();
        let mut key_args = args.clone();
        if n.kind.is_commutative() {
            key_args.sort_unstable();
        }
        match table.get(&(n.kind, key_args.clone())) {
            Some(&existing) => {
                if nodes[existing].label.is_none() {
                    nodes[existing].label = n.label.clone();
                }
                remap.push(existing);
            }
            None => {
                let id = nodes.len();
                table.insert((n.kind, key_args), id);
                nodes.push(DatapathNode {
                    id,
                    kind: n.kind,
                    args,
                    label: n.label.clone(),
                });
                remap.push(id);
            }
        }
    }
    let outputs = g
        .outputs()
        .iter()
        .map(|(name, &id)| (name.clone(), remap[id]))
        .collect();
    prune(nodes, outputs)
}

/// Drop nodes unreachable from the outputs (inputs are always kept) and
/// renumber densely.
fn prune(nodes: Vec<DatapathNode>, outputs: BTreeMap<String, usize>) -> DatapathGraph {
    let mut live = vec![false; nodes.len()];
    let mut stack: Vec<usize> = outputs.values().copied().collect();
    while let Some(id) = stack.pop() {
        if !live[id] {
            live[id] = true;
            stack.extend(nodes[id].args.iter().copied());
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::with_capacity(nodes.len());
    for n in nodes {
        if n.kind == NodeKind::Input || live[n.id] {
            remap[n.id] = kept.len();
            kept.push(DatapathNode {
                id: kept.len(),
                kind: n.kind,
                args: n.args.iter().map(|&a| remap[a]).collect(),
                label: n.label,
            });
        }
    }
    let outputs = outputs
        .into_iter()
        .map(|(name, id)| (name, remap[id]))
        .collect();
    DatapathGraph::new(kept, outputs).expect("pruning preserves the graph invariants")
}

/// Expand the DAG into expression trees: every use of a non-input node gets
/// a private copy of its whole cone. Inverse of [`cse`] up to numbering.
pub fn unshare(g: &DatapathGraph) -> DatapathGraph {
    fn copy(g: &DatapathGraph, id: usize, out: &mut Vec<DatapathNode>) -> usize {
        let n = g.node(id);
        if n.kind == NodeKind::Input {
            return id;
        }
        let args: Vec<usize> = n.args.iter().map(|&a| copy(g, a, out)).collect();
        let new_id = out.len();
        out.push(DatapathNode {
            id: new_id,
            kind: n.kind,
            args,
            label: n.label.clone(),
        });
        new_id
    }

    let mut nodes: Vec<DatapathNode> = g
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Input)
        .cloned()
        .collect();
    let outputs = g
        .outputs()
        .iter()
        .map(|(name, &id)| (name.clone(), copy(g, id, &mut nodes)))
        .collect();
    DatapathGraph::new(nodes, outputs).expect("tree expansion preserves the graph invariants")
}
