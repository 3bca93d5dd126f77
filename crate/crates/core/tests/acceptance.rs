//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line each
//! (with the measured runtime against its limit) and exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quatrot::datapath::{
    build_direct_graph, build_logan_graph, compare_costs, emit_netlist_json, evaluate,
    load_netlist_json, schedule_asap, CostModel, DatapathGraph,
};
use quatrot::logan::{op_census_logan, LOGAN_ADDSUB_BOUND};
use quatrot::precision::{max_error, QuaternionSampler};
use quatrot::quaternion::op_census_direct;
use quatrot::scalar::{F64Profile, FixedPointFormat, FixedProfile, OpCountLedger, RationalProfile};
use quatrot::symbolic::{grid_equivalence, verify_assembly, verify_entrywise_identity, Assembly};
use quatrot::{rotmat_direct, rotmat_logan, Method, Quaternion, RotationMatrix3};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ac1_direct_census() -> Outcome {
    let l = op_census_direct().map_err(|e| e.to_string())?;
    ensure!(l == OpCountLedger::new(6, 4, 15, 6), "direct census {l}");
    ensure!(l.halve == 0, "direct kernel halves");
    Ok(format!("{l}"))
}

fn ac2_logan_census() -> Outcome {
    let l = op_census_logan().map_err(|e| e.to_string())?;
    ensure!(
        l.mul == 0 && l.double == 0 && l.halve == 0,
        "logan uses mul/shift: {l}"
    );
    ensure!(l.square == 10, "logan squares {}", l.square);
    ensure!(
        l.addsub <= LOGAN_ADDSUB_BOUND,
        "logan addsub {} > {LOGAN_ADDSUB_BOUND}",
        l.addsub
    );
    ensure!(
        l.addsub == 26,
        "logan addsub {} (reference assembly has 26)",
        l.addsub
    );
    Ok(format!("{l} (bound {LOGAN_ADDSUB_BOUND})"))
}

fn ac3_symbolic_proof() -> Outcome {
    let corrected = verify_entrywise_identity();
    ensure!(
        corrected.all_passed(),
        "corrected assembly fails:\n{corrected}"
    );
    ensure!(
        corrected.passed_count() == 9,
        "only {} entries checked",
        corrected.passed_count()
    );

    let typeset = verify_assembly(Assembly::Uncorrected);
    for entry in ["c02", "c20", "c12", "c21"] {
        let check = typeset.check(entry).ok_or("missing entry")?;
        ensure!(!check.passed(), "uncorrected {entry} unexpectedly holds");
    }
    // The typeset theta3 = q0² − q2² breaks c00 = theta3 + theta4.
    let c00 = typeset.check("c00").ok_or("missing c00")?;
    ensure!(
        !c00.passed(),
        "uncorrected theta3 unexpectedly holds in c00"
    );
    let failing: Vec<String> = typeset
        .failures()
        .map(|e| format!("{}: {}", e.entry, e.difference))
        .collect();
    Ok(format!(
        "9/9 identities; uncorrected table fails [{}]",
        failing.join("; ")
    ))
}

fn int_q(q: [i64; 4]) -> Quaternion<BigRational> {
    Quaternion::from_array(q).map(RationalProfile::from_int)
}

fn ac4_grid() -> Outcome {
    let r = grid_equivalence(3).map_err(|e| e.to_string())?;
    ensure!(r.cases == 2401, "{} cases", r.cases);
    ensure!(r.passed(), "{r}");
    let want = RotationMatrix3::from_rows([[-20, 4, 22], [20, -10, 20], [10, 28, 4]])
        .map(RationalProfile::from_int);
    let q = int_q([1, 2, 3, 4]);
    ensure!(
        rotmat_direct(&RationalProfile, &q) == want,
        "direct (1,2,3,4) wrong"
    );
    ensure!(
        rotmat_logan(&RationalProfile, &q) == want,
        "logan (1,2,3,4) wrong"
    );
    Ok(format!(
        "{r}; (1,2,3,4) -> [[-20,4,22],[20,-10,20],[10,28,4]]"
    ))
}

fn ac5_float_agreement() -> Outcome {
    let mut worst_diff = 0.0f64;
    let mut worst_orth = 0.0f64;
    let mut worst_det = 0.0f64;
    for q in QuaternionSampler::new(2024).take(1_000_000) {
        let d = rotmat_direct(&F64Profile, &q);
        let l = rotmat_logan(&F64Profile, &q);
        worst_diff = worst_diff.max(d.max_abs_diff(&l));
        for m in [&d, &l] {
            worst_orth = worst_orth.max(m.orthogonality_error());
            worst_det = worst_det.max((m.determinant() - 1.0).abs());
        }
    }
    ensure!(worst_diff <= 1e-14, "max |logan - direct| = {worst_diff:e}");
    ensure!(worst_orth <= 1e-12, "max |RtR - I| = {worst_orth:e}");
    ensure!(worst_det <= 1e-12, "max |det - 1| = {worst_det:e}");
    Ok(format!(
        "max|logan-direct|={worst_diff:.3e} max|RtR-I|={worst_orth:.3e} max|det-1|={worst_det:.3e}"
    ))
}

/// Longest input-to-output path in edges, via petgraph's topological sort.
fn longest_path_levels(g: &DatapathGraph) -> Result<u32, String> {
    let mut pg: DiGraph<(), ()> = DiGraph::new();
    let idx: Vec<NodeIndex> = g.nodes().iter().map(|_| pg.add_node(())).collect();
    for n in g.nodes() {
        for &a in &n.args {
            pg.add_edge(idx[a], idx[n.id], ());
        }
    }
    let order = toposort(&pg, None).map_err(|_| "cycle".to_string())?;
    let mut dist = vec![0u32; g.len()];
    for v in order {
        for w in pg.neighbors(v) {
            dist[w.index()] = dist[w.index()].max(dist[v.index()] + 1);
        }
    }
    Ok(g.outputs().values().map(|&o| dist[o]).max().unwrap_or(0))
}

fn ac6_datapath() -> Outcome {
    let fmt = FixedPointFormat::q(3, 12).map_err(|e| e.to_string())?;
    let graphs = [
        (Method::Direct, build_direct_graph()),
        (Method::Logan, build_logan_graph()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let inputs: Vec<Quaternion<f64>> = (0..1000)
        .map(|_| Quaternion::from_array([(); 4].map(|_| rng.gen_range(-1.0..1.0))))
        .collect();

    for (method, g) in &graphs {
        for q in &inputs {
            let kernel = method.rotmat(&F64Profile, q);
            let graph = evaluate(g, q, &F64Profile).map_err(|e| e.to_string())?;
            let same = kernel
                .row_major()
                .zip(graph.row_major())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            ensure!(same, "{method} f64 graph/kernel differ at {q:?}");

            let fx = FixedProfile::new(fmt);
            let qx = q.map(|c| fx.quantize(c));
            let kernel = method.rotmat(&fx, &qx);
            let graph = evaluate(g, &qx, &fx).map_err(|e| e.to_string())?;
            ensure!(
                kernel == graph,
                "{method} Q3.12 graph/kernel differ at {q:?}"
            );
        }

        let loaded = load_netlist_json(&emit_netlist_json(g)).map_err(|e| e.to_string())?;
        for q in inputs.iter().take(100) {
            let a = evaluate(g, q, &F64Profile).map_err(|e| e.to_string())?;
            let b = evaluate(&loaded, q, &F64Profile).map_err(|e| e.to_string())?;
            ensure!(a == b, "{method} netlist round trip changes evaluation");
        }
    }

    let model = CostModel::default_for_width(16);
    let mut depths = Vec::new();
    for ((method, g), want) in graphs.iter().zip([3u32, 4]) {
        let asap = schedule_asap(g, &model).critical_path_levels;
        let oracle = longest_path_levels(g)?;
        ensure!(asap == want, "{method} ASAP depth {asap}, expected {want}");
        ensure!(
            oracle == want,
            "{method} longest path {oracle}, expected {want}"
        );
        depths.push(format!("{method}={asap}"));
    }
    Ok(format!(
        "1000 inputs bit-equal (f64, Q3.12), JSON round trip ok, depths {}",
        depths.join(" ")
    ))
}

fn ac7_cost() -> Outcome {
    let (logan, direct) = (build_logan_graph(), build_direct_graph());
    let mut parts = Vec::new();
    for n in [8u32, 12, 16, 24, 32] {
        let c = compare_costs(&logan, &direct, &CostModel::default_for_width(n));
        ensure!(
            c.logan.total_area < c.direct.total_area,
            "n={n}: logan {} >= direct {}",
            c.logan.total_area,
            c.direct.total_area
        );
        if n == 8 {
            ensure!(
                c.logan.total_area == 528.0,
                "n=8 logan area {}",
                c.logan.total_area
            );
            ensure!(
                c.direct.total_area == 632.0,
                "n=8 direct area {}",
                c.direct.total_area
            );
        }
        parts.push(format!(
            "n={n}: {}/{}",
            c.logan.total_area, c.direct.total_area
        ));
    }
    Ok(parts.join(", "))
}

fn ac8_fixed_point() -> Outcome {
    const SAMPLES: usize = 100_000;
    const SEED: u64 = 8;
    let mut parts = Vec::new();
    for method in Method::ALL {
        let mut prev = f64::INFINITY;
        for f in [8u32, 12, 16, 20] {
            let fmt = FixedPointFormat::q(3, f).map_err(|e| e.to_string())?;
            let row = max_error(method, fmt, SAMPLES, SEED);
            let bound = 16.0 * fmt.ulp();
            ensure!(
                row.max_abs_error <= bound,
                "{method} {fmt}: max error {:e} > {bound:e}",
                row.max_abs_error
            );
            ensure!(
                row.saturation_event_count == 0,
                "{method} {fmt}: {} saturations",
                row.saturation_event_count
            );
            ensure!(
                row.max_abs_error <= prev,
                "{method} {fmt}: error grew with more bits"
            );
            prev = row.max_abs_error;
            parts.push(format!(
                "{method} {fmt} {:.2}ulp",
                row.max_abs_error / fmt.ulp()
            ));
        }
    }
    Ok(parts.join(", "))
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: "AC1",
            title: "direct op census",
            limit: Duration::from_secs(1),
            run: ac1_direct_census,
        },
        Criterion {
            id: "AC2",
            title: "logan op census",
            limit: Duration::from_secs(1),
            run: ac2_logan_census,
        },
        Criterion {
            id: "AC3",
            title: "symbolic proof and errata",
            limit: Duration::from_secs(1),
            run: ac3_symbolic_proof,
        },
        Criterion {
            id: "AC4",
            title: "exhaustive grid {-3..3}^4",
            limit: Duration::from_secs(5),
            run: ac4_grid,
        },
        Criterion {
            id: "AC5",
            title: "float agreement and rotation properties",
            limit: Duration::from_secs(30),
            run: ac5_float_agreement,
        },
        Criterion {
            id: "AC6",
            title: "datapath fidelity and depth",
            limit: Duration::from_secs(5),
            run: ac6_datapath,
        },
        Criterion {
            id: "AC7",
            title: "cost model",
            limit: Duration::from_secs(1),
            run: ac7_cost,
        },
        Criterion {
            id: "AC8",
            title: "fixed-point error",
            limit: Duration::from_secs(60),
            run: ac8_fixed_point,
        },
    ];

    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!(
                "took {:.2}s, limit {:.0}s ({detail})",
                elapsed.as_secs_f64(),
                c.limit.as_secs_f64()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "{} PASS {} [{:.3}s/{:.0}s] {}",
                c.id,
                c.title,
                elapsed.as_secs_f64(),
                c.limit.as_secs_f64(),
                detail
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "{} FAIL {} [{:.3}s] {}",
                    c.id,
                    c.title,
                    elapsed.as_secs_f64(),
                    why
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
