//! Exact polynomial arithmetic over the four quaternion coefficients, used to
//! prove the squaring kernel equal to the product form entry by entry, plus an
//! exhaustive integer-grid check as an independent second route.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::logan::{rotmat_logan, rotmat_logan_uncorrected};
use crate::quaternion::{rotmat_direct, Quaternion, RotationMatrix3, ENTRY_NAMES};
use crate::scalar::{RationalProfile, ScalarProfile};

/// Exponents of `q0..q3`.
pub type Monomial = [u8; 4];

/// Largest per-variable exponent the engine accepts.
pub const MAX_EXPONENT: u8 = 4;

/// A polynomial in `q0, q1, q2, q3` with rational coefficients, kept in
/// canonical form (no zero coefficients stored).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial4 {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial4 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, [0; 4])
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// The indeterminate `q<index>`.
    pub fn var(index: usize) -> Self {
        assert!(index < 4, "only q0..q3 exist");
        let mut exp = [0; 4];
        exp[index] = 1;
        Self::term(BigRational::one(), exp)
    }

    pub fn term(coeff: BigRational, exponents: Monomial) -> Self {
        let mut p = Self::zero();
        p.accumulate(exponents, coeff);
        p
    }

    /// The four indeterminates as a quaternion.
    pub fn indeterminates() -> Quaternion<Self> {
        Quaternion::new(Self::var(0), Self::var(1), Self::var(2), Self::var(3))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exponents: Monomial) -> BigRational {
        self.terms
            .get(&exponents)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[BigRational; 4]) -> BigRational {
        self.terms
            .iter()
            .map(|(exp, c)| {
                exp.iter().zip(point).fold(c.clone(), |acc, (&e, x)| {
                    acc * num_traits::pow(x.clone(), e as usize)
                })
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }

    fn accumulate(&mut self, exp: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        assert!(
            exp.iter().all(|&e| e <= MAX_EXPONENT),
            "exponent exceeds {MAX_EXPONENT}: {exp:?}"
        );
        let entry = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }
}

impl Add for &Polynomial4 {
    type Output = Polynomial4;
    fn add(self, rhs: &Polynomial4) -> Polynomial4 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(*e, c.clone());
        }
        out
    }
}

impl Sub for &Polynomial4 {
    type Output = Polynomial4;
    fn sub(self, rhs: &Polynomial4) -> Polynomial4 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(*e, -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial4 {
    type Output = Polynomial4;
    fn mul(self, rhs: &Polynomial4) -> Polynomial4 {
        let mut out = Polynomial4::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exp = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.accumulate(exp, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial4 {
    type Output = Polynomial4;
    fn neg(self) -> Polynomial4 {
        Polynomial4 {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

pub fn poly_add(p: &Polynomial4, r: &Polynomial4) -> Polynomial4 {
    p + r
}

pub fn poly_sub(p: &Polynomial4, r: &Polynomial4) -> Polynomial4 {
    p - r
}

pub fn poly_mul(p: &Polynomial4, r: &Polynomial4) -> Polynomial4 {
    p * r
}

impl fmt::Display for Polynomial4 {
    /// Terms by descending total degree, then descending exponents, e.g.
    /// `2*q0*q3 - q1^2 + 1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().map(|&x| x as u32).sum();
            let db: u32 = b.iter().map(|&x| x as u32).sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (i, (exp, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let vars: Vec<String> = exp
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        format!("q{v}")
                    } else {
                        format!("q{v}^{e}")
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Runs kernels symbolically: values are polynomials.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolyProfile;

impl ScalarProfile for PolyProfile {
    type Value = Polynomial4;

    fn zero(&self) -> Polynomial4 {
        Polynomial4::zero()
    }
    fn one(&self) -> Polynomial4 {
        Polynomial4::from_int(1)
    }
    fn add(&self, a: &Polynomial4, b: &Polynomial4) -> Polynomial4 {
        a + b
    }
    fn sub(&self, a: &Polynomial4, b: &Polynomial4) -> Polynomial4 {
        a - b
    }
    fn mul(&self, a: &Polynomial4, b: &Polynomial4) -> Polynomial4 {
        a * b
    }
    fn square(&self, a: &Polynomial4) -> Polynomial4 {
        a * a
    }
    fn double(&self, a: &Polynomial4) -> Polynomial4 {
        a + a
    }
    fn halve(&self, a: &Polynomial4) -> Polynomial4 {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        a * &Polynomial4::constant(half)
    }
}

/// Which squaring-kernel assignment table to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Assembly {
    /// The kernel shipped in [`crate::logan`].
    Corrected,
    /// The original typeset table, with its known errors.
    Uncorrected,
}

impl Assembly {
    pub fn rotmat<P: ScalarProfile>(
        self,
        p: &P,
        q: &Quaternion<P::Value>,
    ) -> RotationMatrix3<P::Value> {
        match self {
            Assembly::Corrected => rotmat_logan(p, q),
            Assembly::Uncorrected => rotmat_logan_uncorrected(p, q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryCheck {
    pub entry: &'static str,
    /// `assembly − reference`; zero iff the entry is an identity.
    pub difference: Polynomial4,
}

impl EntryCheck {
    pub fn passed(&self) -> bool {
        self.difference.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("entry {entry} is not an identity: difference {difference}")]
pub struct IdentityViolation {
    pub entry: &'static str,
    pub difference: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub assembly: Assembly,
    pub entries: Vec<EntryCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(EntryCheck::passed)
    }

    pub fn passed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.passed()).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &EntryCheck> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn check(&self, entry: &str) -> Option<&EntryCheck> {
        self.entries.iter().find(|e| e.entry == entry)
    }

    /// First failing entry as an error.
    pub fn into_result(self) -> Result<(), IdentityViolation> {
        match self.failures().next() {
            None => Ok(()),
            Some(e) => Err(IdentityViolation {
                entry: e.entry,
                difference: e.difference.to_string(),
            }),
        }
    }

    /// `{ "c00": {"status": "pass", "difference": "0"}, ... }`
    pub fn to_json(&self) -> serde_json::Value {
        let entries: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                let status = if e.passed() { "pass" } else { "fail" };
                (
                    e.entry.to_string(),
                    serde_json::json!({ "status": status, "difference": e.difference.to_string() }),
                )
            })
            .collect();
        serde_json::Value::Object(entries)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            if e.passed() {
                writeln!(f, "{}: pass", e.entry)?;
            } else {
                writeln!(f, "{}: FAIL (difference {})", e.entry, e.difference)?;
            }
        }
        write!(
            f,
            "{}/{} entries pass",
            self.passed_count(),
            self.entries.len()
        )
    }
}

/// Expand both kernels over the indeterminates and subtract entrywise.
pub fn verify_assembly(assembly: Assembly) -> VerificationReport {
    let q = Polynomial4::indeterminates();
    let reference = rotmat_direct(&PolyProfile, &q);
    let candidate = assembly.rotmat(&PolyProfile, &q);
    let entries = ENTRY_NAMES
        .iter()
        .zip(candidate.row_major().zip(reference.row_major()))
        .map(|(name, (c, r))| EntryCheck {
            entry: name,
            difference: c - r,
        })
        .collect();
    VerificationReport { assembly, entries }
}

/// Symbolic proof for the shipped kernel.
pub fn verify_entrywise_identity() -> VerificationReport {
    verify_assembly(Assembly::Corrected)
}

pub const MAX_GRID_BOUND: i64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid bound must be in 0..={MAX_GRID_BOUND}, got {0}")]
    Bound(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub q: [i64; 4],
    pub entry: &'static str,
    pub direct: BigRational,
    pub candidate: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridReport {
    pub bound: i64,
    pub cases: u64,
    pub mismatches: u64,
    pub first_counterexample: Option<Counterexample>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

impl fmt::Display for GridReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cases, {} mismatches", self.cases, self.mismatches)?;
        if let Some(c) = &self.first_counterexample {
            write!(
                f,
                " (first at q={:?}, {}: direct {} vs {})",
                c.q, c.entry, c.direct, c.candidate
            )?;
        }
        Ok(())
    }
}

/// Evaluate both kernels with exact arithmetic on every integer quaternion in
/// `{-bound..=bound}^4` and compare entrywise.
pub fn grid_equivalence(bound: i64) -> Result<GridReport, GridError> {
    grid_compare(bound, Assembly::Corrected)
}

pub fn grid_compare(bound: i64, assembly: Assembly) -> Result<GridReport, GridError> {
    if !(0..=MAX_GRID_BOUND).contains(&bound) {
        return Err(GridError::Bound(bound));
    }
    let p = RationalProfile;
    let range = || -bound..=bound;
    let mut report = GridReport {
        bound,
        cases: 0,
        mismatches: 0,
        first_counterexample: None,
    };
    for a in range() {
        for b in range() {
            for c in range() {
                for d in range() {
                    let raw = [a, b, c, d];
                    let q = Quaternion::from_array(raw).map(RationalProfile::from_int);
                    let direct = rotmat_direct(&p, &q);
                    let cand = assembly.rotmat(&p, &q);
                    report.cases += 1;
                    let bad = ENTRY_NAMES
                        .iter()
                        .zip(direct.row_major().zip(cand.row_major()))
                        .find(|(_, (x, y))| x != y);
                    if let Some((name, (x, y))) = bad {
                        report.mismatches += 1;
                        report
                            .first_counterexample
                            .get_or_insert_with(|| Counterexample {
                                q: raw,
                                entry: name,
                                direct: x.clone(),
                                candidate: y.clone(),
                            });
                    }
                }
            }
        }
    }
    Ok(report)
}
