use super::{CostModel, DatapathGraph, NodeKind};

/// ASAP schedule: inputs sit at level 0 and every operation one level after
/// its latest argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub levels: Vec<u32>,
    /// Deepest level among the outputs.
    pub critical_path_levels: u32,
    /// Longest input-to-output path weighted by the model's latencies.
    pub critical_path_latency: f64,
}

pub fn schedule_asap(g: &DatapathGraph, model: &CostModel) -> Schedule {
    let mut levels = vec![0u32; g.len()];
    let mut arrival = vec![0.0f64; g.len()];
    // Ids are a topological order.
    for n in g.nodes() {
        if n.kind == NodeKind::Input {
            continue;
        }
        levels[n.id] = 1 + n.args.iter().map(|&a| levels[a]).max().unwrap_or(0);
        let ready = n.args.iter().map(|&a| arrival[a]).fold(0.0, f64::max);
        arrival[n.id] = ready + model.latency.of(n.kind);
    }
    let critical_path_levels = g
        .outputs()
        .values()
        .map(|&id| levels[id])
        .max()
        .unwrap_or(0);
    let critical_path_latency = g
        .outputs()
        .values()
        .map(|&id| arrival[id])
        .fold(0.0, f64::max);
    Schedule {
        levels,
        critical_path_levels,
        critical_path_latency,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datapath::{build_direct_graph, build_logan_graph, GraphBuilder, KindWeights};

    #[test]
    fn kernel_depths() {
        let m = CostModel::default_for_width(16);
        assert_eq!(
            schedule_asap(&build_logan_graph(), &m).critical_path_levels,
            4
        );
        assert_eq!(
            schedule_asap(&build_direct_graph(), &m).critical_path_levels,
            3
        );
    }

    #[test]
    fn single_input() {
        let mut b = GraphBuilder::new();
        b.output("c00", 0);
        let s = schedule_asap(&b.finish(), &CostModel::default_for_width(8));
        assert_eq!(s.levels[0], 0);
        assert_eq!(s.critical_path_levels, 0);
        assert_eq!(s.critical_path_latency, 0.0);
    }

    #[test]
    fn levels_strictly_increase_along_edges() {
        for g in [build_logan_graph(), build_direct_graph()] {
            let s = schedule_asap(&g, &CostModel::default_for_width(8));
            for n in g.nodes() {
                for &a in &n.args {
                    assert!(s.levels[n.id] > s.levels[a]);
                }
            }
        }
    }

    #[test]
    fn weighted_latency() {
        let mut m = CostModel::default_for_width(8);
        m.latency = KindWeights {
            mul: 4.0,
            square: 3.0,
            add: 1.0,
            shift: 0.0,
        };
        // direct: mul(4) + add(1) + double(0) = 5 vs square(3) + add + sub = 5
        assert_eq!(
            schedule_asap(&build_direct_graph(), &m).critical_path_latency,
            5.0
        );
        // logan: add + square + sub + add = 6
        assert_eq!(
            schedule_asap(&build_logan_graph(), &m).critical_path_latency,
            6.0
        );
    }
}
