//! Multiplication-free kernel built on the quarter-square identity
//! `ab = ½[(a+b)² − a² − b²]`.
//!
//! Every product the rotation matrix needs appears doubled, so the kernel
//! uses `2ab = (a+b)² − a² − b²` and never halves. Six squared pairwise sums
//! (`phi`) and four coefficient squares are shared across all nine entries:
//!
//! ```text
//! phi0 = (q1+q2)²  phi1 = (q0+q3)²  phi2 = (q2+q3)²
//! phi3 = (q0+q1)²  phi4 = (q1+q3)²  phi5 = (q0+q2)²
//! theta0 = q1²+q2²  theta1 = q0²+q3²  theta3 = q1²−q2²  theta4 = q0²−q3²
//! lambda = theta0 + theta1
//!
//! c00 = theta3 + theta4          c11 = theta4 − theta3      c22 = theta1 − theta0
//! c01 = (phi0 − phi1) + c22      c10 = (phi0 + phi1) − lambda
//! c12 = (phi2 − phi3) + c00      c21 = (phi2 + phi3) − lambda
//! c20 = (phi4 − phi5) + c11      c02 = (phi4 + phi5) − lambda
//! ```
//!
//! Cost: 10 squarings and 26 additions/subtractions, no multiplier and no
//! shifter.

use crate::quaternion::{Quaternion, QuaternionError, RotationMatrix3};
use crate::scalar::{counted, OpCountLedger, RationalProfile, ScalarProfile};

/// Census of [`rotmat_logan`].
pub const LOGAN_CENSUS: OpCountLedger = OpCountLedger::new(0, 10, 26, 0);

/// Published upper figure for the additions of the squaring kernel.
pub const LOGAN_ADDSUB_BOUND: u64 = 29;

/// Shared intermediates of the squaring kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoganIntermediates<T> {
    /// Squares of the pairwise sums, in the order documented at module level.
    pub phi: [T; 6],
    pub theta0: T,
    pub theta1: T,
    pub theta3: T,
    pub theta4: T,
    /// Equal to the squared norm of the quaternion.
    pub lambda: T,
}

/// `a·b` through three squarings and one halving.
pub fn logan_product<P: ScalarProfile>(p: &P, a: &P::Value, b: &P::Value) -> P::Value {
    p.halve(&logan_double_product(p, a, b))
}

/// `2·a·b = (a+b)² − a² − b²`.
pub fn logan_double_product<P: ScalarProfile>(p: &P, a: &P::Value, b: &P::Value) -> P::Value {
    let sum_sq = p.square(&p.add(a, b));
    p.sub(&p.sub(&sum_sq, &p.square(a)), &p.square(b))
}

/// Ten squarings, eleven additions/subtractions.
pub fn compute_intermediates<P: ScalarProfile>(
    p: &P,
    q: &Quaternion<P::Value>,
) -> LoganIntermediates<P::Value> {
    let Quaternion { q0, q1, q2, q3 } = q;
    let phi = [
        p.square(&p.add(q1, q2)),
        p.square(&p.add(q0, q3)),
        p.square(&p.add(q2, q3)),
        p.square(&p.add(q0, q1)),
        p.square(&p.add(q1, q3)),
        p.square(&p.add(q0, q2)),
    ];
    let s0 = p.square(q0);
    let s1 = p.square(q1);
    let s2 = p.square(q2);
    let s3 = p.square(q3);

    let theta0 = p.add(&s1, &s2);
    let theta1 = p.add(&s0, &s3);
    let theta3 = p.sub(&s1, &s2);
    let theta4 = p.sub(&s0, &s3);
    let lambda = p.add(&theta0, &theta1);
    LoganIntermediates {
        phi,
        theta0,
        theta1,
        theta3,
        theta4,
        lambda,
    }
}

/// Fifteen additions/subtractions; the diagonal entries are reused inside
/// three of the off-diagonal ones.
pub fn assemble<P: ScalarProfile>(
    p: &P,
    m: &LoganIntermediates<P::Value>,
) -> RotationMatrix3<P::Value> {
    let [phi0, phi1, phi2, phi3, phi4, phi5] = &m.phi;

    let c00 = p.add(&m.theta3, &m.theta4);
    let c11 = p.sub(&m.theta4, &m.theta3);
    let c22 = p.sub(&m.theta1, &m.theta0);

    let c01 = p.add(&p.sub(phi0, phi1), &c22);
    let c10 = p.sub(&p.add(phi0, phi1), &m.lambda);
    let c12 = p.add(&p.sub(phi2, phi3), &c00);
    let c21 = p.sub(&p.add(phi2, phi3), &m.lambda);
    let c20 = p.add(&p.sub(phi4, phi5), &c11);
    let c02 = p.sub(&p.add(phi4, phi5), &m.lambda);

    RotationMatrix3::from_rows([[c00, c01, c02], [c10, c11, c12], [c20, c21, c22]])
}

pub fn rotmat_logan<P: ScalarProfile>(
    p: &P,
    q: &Quaternion<P::Value>,
) -> RotationMatrix3<P::Value> {
    assemble(p, &compute_intermediates(p, q))
}

/// The assignment table as it was originally typeset, before correction.
///
/// It uses `theta2 = q0²+q2²` and `theta3 = q0²−q2²` and permutes several
/// off-diagonal lines, so `c00`, `c11`, `c02`, `c12`, `c20` and `c21` are
/// wrong. Kept only so the verifier can demonstrate which lines fail.
pub fn rotmat_logan_uncorrected<P: ScalarProfile>(
    p: &P,
    q: &Quaternion<P::Value>,
) -> RotationMatrix3<P::Value> {
    let Quaternion { q0, q1, q2, q3 } = q;
    let phi0 = p.square(&p.add(q1, q2));
    let phi1 = p.square(&p.add(q0, q3));
    let phi2 = p.square(&p.add(q2, q3));
    let phi3 = p.square(&p.add(q0, q1));
    let phi4 = p.square(&p.add(q1, q3));
    let phi5 = p.square(&p.add(q0, q2));
    let (s0, s1, s2, s3) = (p.square(q0), p.square(q1), p.square(q2), p.square(q3));
    let theta0 = p.add(&s1, &s2);
    let theta1 = p.add(&s0, &s3);
    let theta2 = p.add(&s0, &s2);
    let theta3 = p.sub(&s0, &s2);
    let theta4 = p.sub(&s0, &s3);
    let lambda = p.add(&theta0, &theta1);

    let c00 = p.add(&theta3, &theta4);
    let c01 = p.sub(&p.sub(&phi0, &phi1), &p.sub(&theta0, &theta1));
    let c02 = p.sub(&p.add(&phi2, &phi3), &lambda);
    let c10 = p.sub(&p.add(&phi0, &phi1), &lambda);
    let c12 = p.add(&p.sub(&phi1, &phi5), &p.sub(&theta2, &theta1));
    let c11 = p.sub(&theta4, &theta3);
    let c20 = p.sub(&p.add(&phi4, &phi5), &lambda);
    let c21 = p.add(&p.sub(&phi2, &phi3), &p.sub(&theta3, &theta4));
    let c22 = p.sub(&theta1, &theta0);

    RotationMatrix3::from_rows([[c00, c01, c02], [c10, c11, c12], [c20, c21, c22]])
}

/// Count the squaring kernel's operations with an instrumented run and check
/// them against [`LOGAN_CENSUS`] and the published bound.
pub fn op_census_logan() -> Result<OpCountLedger, QuaternionError> {
    let p = counted(RationalProfile);
    let q = Quaternion::new(1, 2, 3, 4).map(RationalProfile::from_int);
    let _ = rotmat_logan(&p, &q);
    let actual = p.ledger();
    let within_contract = actual.mul == 0
        && actual.double == 0
        && actual.halve == 0
        && actual.square == 10
        && actual.addsub <= LOGAN_ADDSUB_BOUND;
    if !within_contract || actual != LOGAN_CENSUS {
        return Err(QuaternionError::CensusMismatch {
            kernel: "logan",
            expected: LOGAN_CENSUS,
            actual,
        });
    }
    Ok(actual)
}
