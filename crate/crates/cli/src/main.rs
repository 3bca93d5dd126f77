//! `quatrot`: quaternion to rotation matrix conversion, verification, op
//! counting, datapath netlists, fixed-point sweeps and micro-benchmarks.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

mod input;
mod output;

use std::fmt;
use std::fs;
use std::hint::black_box;
use std::io::{self, Read, Write};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use quatrot::datapath::{
    build_graph, build_naive_graph, compare_costs, emit_dot, emit_netlist_json, CostModel,
};
use quatrot::logan::{op_census_logan, LOGAN_ADDSUB_BOUND};
use quatrot::precision::{sweep, QuaternionSampler, SweepConfig};
use quatrot::quaternion::{op_census_direct, DIRECT_CENSUS};
use quatrot::scalar::{F64Profile, FixedPointFormat, FixedProfile, RationalProfile};
use quatrot::symbolic::{grid_compare, verify_assembly, Assembly};
use quatrot::{Method, OpCountLedger, Quaternion};

use input::{parse_records, InputRecord};
use output::{csv_row, f64_token, json_row, rational_token};

#[derive(Parser)]
#[command(
    name = "quatrot",
    version,
    about = "Quaternion to rotation matrix toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert quaternions (CSV or JSON lines) to row-major rotation matrices.
    Convert {
        #[arg(long, value_enum, default_value_t = MethodArg::Logan)]
        method: MethodArg,
        /// f64, rational, fixed or fixed:Q<int>.<frac>
        #[arg(long, env = "QUATROT_DEFAULT_PROFILE", default_value = "f64")]
        profile: Profile,
        /// Input file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long, value_enum, default_value_t = RowFormat::Csv)]
        format: RowFormat,
        /// Scale each quaternion to unit norm first (binary64).
        #[arg(long)]
        normalize: bool,
    },
    /// Prove the squaring kernel symbolically and check it on an integer grid.
    Verify {
        /// Check every integer quaternion in [-N, N]^4.
        #[arg(long, default_value_t = 3)]
        grid_bound: i64,
        /// Assignment table to check; `uncorrected` is a known-bad fixture.
        #[arg(long, value_enum, default_value_t = AssemblyArg::Corrected)]
        assembly: AssemblyArg,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Operation census of a kernel as JSON.
    Count {
        #[arg(long, value_enum, default_value_t = MethodArg::Logan)]
        method: MethodArg,
    },
    /// Emit the datapath of a kernel as DOT or JSON.
    Netlist {
        #[arg(long, value_enum, default_value_t = MethodArg::Logan)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = NetlistFormat::Json)]
        out: NetlistFormat,
        /// Emit the expansion without subexpression sharing.
        #[arg(long)]
        no_cse: bool,
    },
    /// Area and latency estimate of both datapaths.
    Cost {
        /// Word widths to evaluate.
        #[arg(long, value_delimiter = ',', default_values_t = [8u32, 12, 16, 24, 32])]
        bits: Vec<u32>,
        /// Squarer area relative to a multiplier.
        #[arg(long, default_value_t = CostModel::DEFAULT_SQUARER_RATIO)]
        squarer_ratio: f64,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Fixed-point error of each kernel across fraction widths.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [8u32, 12, 16, 20])]
        frac_bits: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        int_bits: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = KernelArg::Both)]
        kernel: KernelArg,
        #[arg(long, value_enum, default_value_t = SweepFormat::Table)]
        format: SweepFormat,
    },
    /// Wall-clock timing of both kernels in binary64 and fixed point.
    Bench {
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Timed runs per configuration; the median is reported.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Fixed-point format for the fixed runs.
        #[arg(long, default_value = "Q3.12")]
        fixed: FixedPointFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Logan,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Logan => Method::Logan,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Both,
    Direct,
    Logan,
}

#[derive(Clone, Copy, ValueEnum)]
enum AssemblyArg {
    Corrected,
    Uncorrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum RowFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetlistFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    F64,
    Rational,
    Fixed(FixedPointFormat),
}

impl Profile {
    const DEFAULT_FIXED: &'static str = "Q3.12";
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f64" => Ok(Profile::F64),
            "rational" => Ok(Profile::Rational),
            "fixed" => Ok(Profile::Fixed(
                Self::DEFAULT_FIXED.parse().expect("valid default"),
            )),
            _ => match s.strip_prefix("fixed:") {
                Some(fmt) => fmt.parse().map(Profile::Fixed).map_err(|e| e.to_string()),
                None => Err(format!(
                    "unknown profile `{s}` (expected f64, rational, fixed or fixed:Q<int>.<frac>)"
                )),
            },
        }
    }
}

/// An error that ends the run with a specific exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn verification(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        // A closed downstream pipe is not an error for a filter.
        let code = if e.kind() == io::ErrorKind::BrokenPipe {
            0
        } else {
            2
        };
        Self {
            code,
            message: format!("I/O error: {e}"),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.code == 0 => ExitCode::SUCCESS,
        Err(e) => {
            drop(out);
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> Result<(), Failure> {
    match command {
        Command::Convert {
            method,
            profile,
            input,
            format,
            normalize,
        } => cmd_convert(out, method.into(), profile, &input, format, normalize),
        Command::Verify {
            grid_bound,
            assembly,
            format,
        } => cmd_verify(out, grid_bound, assembly, format),
        Command::Count { method } => cmd_count(out, method.into()),
        Command::Netlist {
            method,
            out: fmt,
            no_cse,
        } => {
            let g = if no_cse {
                build_naive_graph(method.into())
            } else {
                build_graph(method.into())
            };
            match fmt {
                NetlistFormat::Json => writeln!(out, "{}", emit_netlist_json(&g))?,
                NetlistFormat::Dot => write!(out, "{}", emit_dot(&g))?,
            }
            Ok(())
        }
        Command::Cost {
            bits,
            squarer_ratio,
            format,
        } => cmd_cost(out, &bits, squarer_ratio, format),
        Command::Sweep {
            frac_bits,
            int_bits,
            samples,
            seed,
            kernel,
            format,
        } => {
            let kernels = match kernel {
                KernelArg::Both => Method::ALL.to_vec(),
                KernelArg::Direct => vec![Method::Direct],
                KernelArg::Logan => vec![Method::Logan],
            };
            let cfg = SweepConfig {
                frac_bits,
                int_bits,
                sample_count: samples,
                seed,
                kernels,
            };
            let report = sweep(&cfg).map_err(|e| Failure::input(e.to_string()))?;
            match format {
                SweepFormat::Table => write!(out, "{report}")?,
                SweepFormat::Csv => write!(out, "{}", report.to_csv())?,
                SweepFormat::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                )?,
            }
            Ok(())
        }
        Command::Bench {
            samples,
            repeats,
            fixed,
        } => cmd_bench(out, samples, repeats, fixed),
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
    }
    Ok(text)
}

fn cmd_convert(
    out: &mut impl Write,
    method: Method,
    profile: Profile,
    path: &str,
    format: RowFormat,
    normalize: bool,
) -> Result<(), Failure> {
    let text = read_input(path)?;
    let records = parse_records(&text).map_err(|errs| {
        Failure::input(
            errs.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })?;

    let unit = |r: &InputRecord| -> Result<[f64; 4], Failure> {
        let q = Quaternion::from_array(r.as_f64());
        if !normalize {
            return Ok(q.into_array());
        }
        q.normalize()
            .map(Quaternion::into_array)
            .map_err(|e| Failure::input(format!("line {}: {e}", r.line)))
    };

    // Check every record before printing anything.
    let inputs: Vec<[f64; 4]> = records.iter().map(unit).collect::<Result<_, _>>()?;

    let fixed = match profile {
        Profile::Fixed(fmt) => Some(FixedProfile::new(fmt)),
        _ => None,
    };
    for (r, q) in records.iter().zip(&inputs) {
        let tokens: Vec<String> = match (profile, &fixed) {
            (Profile::F64, _) => method
                .rotmat(&F64Profile, &Quaternion::from_array(*q))
                .row_major()
                .map(|&v| f64_token(v))
                .collect(),
            (Profile::Rational, _) => {
                let exact = if normalize {
                    q.map(|c| BigRational::from_float(c).expect("finite"))
                } else {
                    r.as_rational()
                };
                method
                    .rotmat(&RationalProfile, &Quaternion::from_array(exact))
                    .row_major()
                    .map(rational_token)
                    .collect()
            }
            (Profile::Fixed(_), Some(fx)) => {
                let qx = Quaternion::from_array(*q).map(|c| fx.quantize(c));
                method
                    .rotmat(fx, &qx)
                    .row_major()
                    .map(|&v| f64_token(fx.to_f64(v)))
                    .collect()
            }
            (Profile::Fixed(_), None) => unreachable!("fixed profile is built above"),
        };
        let tokens: [String; 9] = tokens.try_into().expect("nine entries");
        match format {
            RowFormat::Csv => writeln!(out, "{}", csv_row(&tokens))?,
            RowFormat::Json => writeln!(out, "{}", json_row(r.line, &tokens))?,
        }
    }
    if let Some(fx) = &fixed {
        if fx.saturation_count() > 0 {
            eprintln!(
                "warning: {} saturation events in {}",
                fx.saturation_count(),
                fx.format()
            );
        }
    }
    Ok(())
}

fn cmd_verify(
    out: &mut impl Write,
    grid_bound: i64,
    assembly: AssemblyArg,
    format: TextFormat,
) -> Result<(), Failure> {
    let assembly = match assembly {
        AssemblyArg::Corrected => Assembly::Corrected,
        AssemblyArg::Uncorrected => Assembly::Uncorrected,
    };
    let grid = grid_compare(grid_bound, assembly).map_err(|e| Failure::input(e.to_string()))?;
    let report = verify_assembly(assembly);
    match format {
        TextFormat::Text => {
            writeln!(out, "{report}")?;
            writeln!(out, "grid bound {grid_bound}: {grid}")?;
        }
        TextFormat::Json => {
            let doc = serde_json::json!({
                "assembly": assembly,
                "entries": report.to_json(),
                "passed": report.passed_count(),
                "grid": {
                    "bound": grid.bound,
                    "cases": grid.cases,
                    "mismatches": grid.mismatches,
                },
            });
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializes")
            )?;
        }
    }
    let grid_passed = grid.passed();
    report
        .into_result()
        .map_err(|e| Failure::verification(e.to_string()))?;
    if !grid_passed {
        return Err(Failure::verification(format!("grid check failed: {grid}")));
    }
    Ok(())
}

fn census_json(c: &OpCountLedger) -> String {
    format!(
        "\"mul\":{},\"square\":{},\"addsub\":{},\"double\":{}",
        c.mul, c.square, c.addsub, c.double
    )
}

fn cmd_count(out: &mut impl Write, method: Method) -> Result<(), Failure> {
    let line = match method {
        Method::Direct => {
            let c = op_census_direct().map_err(|e| Failure::verification(e.to_string()))?;
            format!(
                "{{{},\"reference\":{{{}}}}}",
                census_json(&c),
                census_json(&DIRECT_CENSUS)
            )
        }
        Method::Logan => {
            let c = op_census_logan().map_err(|e| Failure::verification(e.to_string()))?;
            format!(
                "{{{},\"reference\":{{\"mul\":0,\"square\":10,\"addsub_bound\":{b},\"double\":0}},\"note\":\"reference bound: {b}\"}}",
                census_json(&c),
                b = LOGAN_ADDSUB_BOUND
            )
        }
    };
    writeln!(out, "{line}")?;
    Ok(())
}

fn cmd_cost(
    out: &mut impl Write,
    bits: &[u32],
    squarer_ratio: f64,
    format: TextFormat,
) -> Result<(), Failure> {
    if bits.contains(&0) {
        return Err(Failure::input("bit widths must be positive"));
    }
    if !(squarer_ratio.is_finite() && squarer_ratio >= 0.0) {
        return Err(Failure::input(
            "squarer ratio must be a non-negative number",
        ));
    }
    let logan = build_graph(Method::Logan);
    let direct = build_graph(Method::Direct);
    let rows: Vec<_> = bits
        .iter()
        .map(|&n| {
            compare_costs(
                &logan,
                &direct,
                &CostModel::with_squarer_ratio(n, squarer_ratio),
            )
        })
        .collect();
    match format {
        TextFormat::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&rows).expect("serializes")
        )?,
        TextFormat::Text => {
            writeln!(
                out,
                "{:>5} {:>12} {:>12} {:>7} {:>12} {:>12}",
                "bits", "logan_area", "direct_area", "ratio", "logan_depth", "direct_depth"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>5} {:>12.1} {:>12.1} {:>7.3} {:>12} {:>12}",
                    r.logan.bit_width,
                    r.logan.total_area,
                    r.direct.total_area,
                    r.ratio,
                    r.logan.critical_path_levels,
                    r.direct.critical_path_levels
                )?;
            }
            writeln!(out, "areas use n^2 per multiplier, {squarer_ratio}*n^2 per squarer, n per adder; shifts are free")?;
        }
    }
    Ok(())
}

/// Median nanoseconds per conversion over `repeats` passes of `f`.
fn time_median(samples: usize, repeats: usize, mut f: impl FnMut()) -> f64 {
    let mut runs: Vec<f64> = (0..repeats)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_nanos() as f64 / samples as f64
        })
        .collect();
    runs.sort_by(f64::total_cmp);
    runs[runs.len() / 2]
}

fn cmd_bench(
    out: &mut impl Write,
    samples: usize,
    repeats: usize,
    fixed: FixedPointFormat,
) -> Result<(), Failure> {
    if samples == 0 || repeats == 0 {
        return Err(Failure::input("samples and repeats must be at least 1"));
    }
    let qs: Vec<Quaternion<f64>> = QuaternionSampler::new(1).take(samples).collect();
    let fx = FixedProfile::new(fixed);
    let qx: Vec<_> = qs.iter().map(|q| q.map(|c| fx.quantize(c))).collect();

    writeln!(
        out,
        "{:<7} {:<7} {:>12} {:>14}",
        "method", "profile", "ns/conv", "conv/s"
    )?;
    for method in Method::ALL {
        let f64_ns = time_median(samples, repeats, || {
            for q in &qs {
                black_box(method.rotmat(&F64Profile, black_box(q)));
            }
        });
        let fixed_ns = time_median(samples, repeats, || {
            for q in &qx {
                black_box(method.rotmat(&fx, black_box(q)));
            }
        });
        for (profile, ns) in [("f64".to_string(), f64_ns), (fixed.to_string(), fixed_ns)] {
            writeln!(
                out,
                "{:<7} {:<7} {:>12.2} {:>14.3e}",
                method.name(),
                profile,
                ns,
                1e9 / ns
            )?;
        }
    }
    writeln!(
        out,
        "median of {repeats} runs over {samples} samples. Software timing reflects this CPU only; it says nothing about hardware area or latency."
    )?;
    Ok(())
}
