//! Area and latency model for the datapath.
//!
//! Defaults for an `n`-bit word: a general multiplier costs `n²`, a
//! dedicated squarer half of that (the squarer/multiplier ratio is
//! configurable), an adder or subtractor `n`, and a shift nothing (it is
//! wiring). Energy is taken as proportional to area.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{schedule_asap, DatapathGraph, NodeKind};

/// One weight per hardware class. Subtractors are priced as adders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KindWeights {
    pub mul: f64,
    pub square: f64,
    pub add: f64,
    pub shift: f64,
}

impl KindWeights {
    pub fn of(&self, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::Input => 0.0,
            NodeKind::Add | NodeKind::Sub => self.add,
            NodeKind::Square => self.square,
            NodeKind::Double => self.shift,
            NodeKind::Mul => self.mul,
        }
    }

    pub fn zero() -> Self {
        Self {
            mul: 0.0,
            square: 0.0,
            add: 0.0,
            shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub bit_width: u32,
    pub area: KindWeights,
    pub latency: KindWeights,
}

impl CostModel {
    pub const DEFAULT_SQUARER_RATIO: f64 = 0.5;

    pub fn default_for_width(n: u32) -> Self {
        Self::with_squarer_ratio(n, Self::DEFAULT_SQUARER_RATIO)
    }

    /// `w_mul = n²`, `w_sq = ratio·n²`, `w_add = n`, `w_shift = 0`, and unit
    /// latency for every operation so the weighted critical path equals the
    /// level count.
    pub fn with_squarer_ratio(n: u32, ratio: f64) -> Self {
        let n = n as f64;
        Self {
            bit_width: n as u32,
            area: KindWeights {
                mul: n * n,
                square: ratio * n * n,
                add: n,
                shift: 0.0,
            },
            latency: KindWeights {
                mul: 1.0,
                square: 1.0,
                add: 1.0,
                shift: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KindCost {
    pub count: u64,
    pub unit_area: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub bit_width: u32,
    pub total_area: f64,
    pub breakdown: BTreeMap<NodeKind, KindCost>,
    pub critical_path_levels: u32,
    pub critical_path_latency: f64,
}

pub fn cost_report(g: &DatapathGraph, m: &CostModel) -> CostReport {
    let mut breakdown: BTreeMap<NodeKind, KindCost> = BTreeMap::new();
    for n in g.nodes().iter().filter(|n| n.kind != NodeKind::Input) {
        let unit = m.area.of(n.kind);
        let e = breakdown.entry(n.kind).or_insert(KindCost {
            count: 0,
            unit_area: unit,
            area: 0.0,
        });
        e.count += 1;
        e.area += unit;
    }
    let total_area = breakdown.values().map(|c| c.area).sum();
    let s = schedule_asap(g, m);
    CostReport {
        bit_width: m.bit_width,
        total_area,
        breakdown,
        critical_path_levels: s.critical_path_levels,
        critical_path_latency: s.critical_path_latency,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostComparison {
    pub logan: CostReport,
    pub direct: CostReport,
    /// `logan / direct` total area; also the relative energy estimate.
    /// NaN when the direct area is zero.
    pub ratio: f64,
}

pub fn compare_costs(
    logan: &DatapathGraph,
    direct: &DatapathGraph,
    m: &CostModel,
) -> CostComparison {
    let logan = cost_report(logan, m);
    let direct = cost_report(direct, m);
    let ratio = logan.total_area / direct.total_area;
    CostComparison {
        logan,
        direct,
        ratio,
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bit width {}", self.bit_width)?;
        for (kind, c) in &self.breakdown {
            writeln!(
                f,
                "  {:<7} x{:<3} @ {:>8} = {:>10}",
                kind, c.count, c.unit_area, c.area
            )?;
        }
        writeln!(f, "  total area {}", self.total_area)?;
        write!(
            f,
            "  critical path {} levels, latency {}",
            self.critical_path_levels, self.critical_path_latency
        )
    }
}
