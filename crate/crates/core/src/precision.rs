//! Fixed-point error of both kernels against a binary64 reference.
//!
//! Each sample is quantized into the format under test, run bit-true through
//! the kernel in that format, and compared entrywise against the binary64
//! product-form kernel evaluated on the *quantized* inputs. That isolates
//! arithmetic error from input quantization, which is reported separately.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::quaternion::{rotmat_direct, Quaternion};
use crate::scalar::{F64Profile, FixedPointFormat, FixedProfile, FormatError};
use crate::Method;

/// Uniform on the unit 3-sphere: four standard normals, normalized. An
/// all-zero draw is redrawn.
pub fn sample_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion<f64> {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Ok(unit) = q.normalize() {
            return unit;
        }
    }
}

/// Deterministic stream of unit quaternions.
#[derive(Debug, Clone)]
pub struct QuaternionSampler {
    rng: ChaCha8Rng,
}

impl QuaternionSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Iterator for QuaternionSampler {
    type Item = Quaternion<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(sample_unit_quaternion(&mut self.rng))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("sample_count must be at least 1")]
    NoSamples,
    #[error("no kernels selected")]
    NoKernels,
    #[error(transparent)]
    Format(#[from] FormatError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub frac_bits: Vec<u32>,
    /// Integer bits of every format; total width is `1 + int_bits + f`.
    pub int_bits: u32,
    pub sample_count: usize,
    pub seed: u64,
    pub kernels: Vec<Method>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            frac_bits: vec![8, 12, 16, 20],
            // Unit-quaternion intermediates peak at 2 (the squared pairwise
            // sums), so three integer bits leave headroom.
            int_bits: 3,
            sample_count: 10_000,
            seed: 0x5eed,
            kernels: Method::ALL.to_vec(),
        }
    }
}

impl SweepConfig {
    pub fn formats(&self) -> Result<Vec<FixedPointFormat>, SweepError> {
        self.frac_bits
            .iter()
            .map(|&f| FixedPointFormat::q(self.int_bits, f).map_err(SweepError::from))
            .collect()
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.sample_count == 0 {
            return Err(SweepError::NoSamples);
        }
        if self.kernels.is_empty() {
            return Err(SweepError::NoKernels);
        }
        self.formats().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    #[serde(serialize_with = "serialize_display")]
    pub format: FixedPointFormat,
    pub kernel: Method,
    pub samples: usize,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub saturation_event_count: u64,
    /// Max entrywise change of the binary64 matrix caused by quantizing the
    /// inputs alone.
    pub input_quantization_error: f64,
}

fn serialize_display<S: serde::Serializer>(v: &FixedPointFormat, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Error of `kernel` in `fmt` over the given quaternions.
pub fn measure<I>(kernel: Method, fmt: FixedPointFormat, quaternions: I) -> ErrorRow
where
    I: IntoIterator<Item = Quaternion<f64>>,
{
    let fx = FixedProfile::new(fmt);
    let mut max_abs_error = 0.0f64;
    let mut sum = 0.0f64;
    let mut entries = 0u64;
    let mut input_quantization_error = 0.0f64;
    let mut samples = 0usize;
    for q in quaternions {
        samples += 1;
        let qx = q.map(|c| fx.quantize(c));
        let q_quantized = qx.map(|c| fx.to_f64(c));
        let reference = rotmat_direct(&F64Profile, &q_quantized);
        let original = rotmat_direct(&F64Profile, &q);
        input_quantization_error = input_quantization_error.max(reference.max_abs_diff(&original));

        let got = kernel.rotmat(&fx, &qx).map(|v| fx.to_f64(v));
        for (a, b) in got.row_major().zip(reference.row_major()) {
            let e = (a - b).abs();
            max_abs_error = max_abs_error.max(e);
            sum += e;
            entries += 1;
        }
    }
    ErrorRow {
        format: fmt,
        kernel,
        samples,
        max_abs_error,
        mean_abs_error: if entries == 0 {
            0.0
        } else {
            sum / entries as f64
        },
        saturation_event_count: fx.saturation_count(),
        input_quantization_error,
    }
}

/// Error of `kernel` in `fmt` over `samples` seeded unit quaternions.
pub fn max_error(kernel: Method, fmt: FixedPointFormat, samples: usize, seed: u64) -> ErrorRow {
    measure(kernel, fmt, QuaternionSampler::new(seed).take(samples))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

/// Every (format, kernel) pair, formats in the configured order. All rows use
/// the same seed, so every row sees the same quaternions.
pub fn sweep(cfg: &SweepConfig) -> Result<ErrorReport, SweepError> {
    cfg.validate()?;
    let jobs: Vec<(FixedPointFormat, Method)> = cfg
        .formats()?
        .into_iter()
        .flat_map(|f| cfg.kernels.iter().map(move |&k| (f, k)))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(f, k)| max_error(k, f, cfg.sample_count, cfg.seed))
        .collect();
    Ok(ErrorReport { rows })
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str = "format,kernel,max_abs_error,mean_abs_error,saturations";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{}",
                r.format, r.kernel, r.max_abs_error, r.mean_abs_error, r.saturation_event_count
            );
        }
        s
    }

    pub fn row(&self, format: FixedPointFormat, kernel: Method) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| r.format == format && r.kernel == kernel)
    }
}

impl fmt::Display for ErrorReport {
    /// Aligned table; the last columns give the error in units of the
    /// format's LSB and the input-quantization error.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<7} {:<7} {:>13} {:>13} {:>9} {:>11} {:>13}",
            "format",
            "kernel",
            "max_abs_err",
            "mean_abs_err",
            "max/ulp",
            "saturations",
            "input_q_err"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<7} {:<7} {:>13.6e} {:>13.6e} {:>9.3} {:>11} {:>13.6e}",
                r.format.to_string(),
                r.kernel.name(),
                r.max_abs_error,
                r.mean_abs_error,
                r.max_abs_error / r.format.ulp(),
                r.saturation_event_count,
                r.input_quantization_error
            )?;
        }
        Ok(())
    }
}
