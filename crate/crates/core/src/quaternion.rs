//! Quaternion and rotation-matrix types, and the direct product-form kernel.

use std::fmt;

use thiserror::Error;

use crate::scalar::{counted, OpCountLedger, RationalProfile, ScalarProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuaternionError {
    #[error("cannot normalize the zero quaternion")]
    ZeroQuaternion,
    #[error("operation census mismatch for {kernel}: expected {expected}, got {actual}")]
    CensusMismatch {
        kernel: &'static str,
        expected: OpCountLedger,
        actual: OpCountLedger,
    },
}

/// `q0` is the scalar part, `q1..q3` the vector part. No unit-norm
/// requirement: every kernel accepts arbitrary quaternions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Quaternion<T> {
    pub q0: T,
    pub q1: T,
    pub q2: T,
    pub q3: T,
}

impl<T> Quaternion<T> {
    pub const fn new(q0: T, q1: T, q2: T, q3: T) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub fn from_array([q0, q1, q2, q3]: [T; 4]) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub fn into_array(self) -> [T; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Quaternion<U> {
        Quaternion {
            q0: f(self.q0),
            q1: f(self.q1),
            q2: f(self.q2),
            q3: f(self.q3),
        }
    }

    pub fn as_ref(&self) -> Quaternion<&T> {
        Quaternion::new(&self.q0, &self.q1, &self.q2, &self.q3)
    }
}

impl Quaternion<f64> {
    /// Scale to unit norm. Zero input is a domain error.
    pub fn normalize(&self) -> Result<Self, QuaternionError> {
        let n2 = norm_squared(&crate::scalar::F64Profile, self);
        if n2 == 0.0 || !n2.is_finite() {
            return Err(QuaternionError::ZeroQuaternion);
        }
        let inv = n2.sqrt().recip();
        Ok(self.map(|c| c * inv))
    }
}

/// Row-major 3x3 matrix of `c[i][j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RotationMatrix3<T> {
    pub c: [[T; 3]; 3],
}

/// Entry names in row-major order.
pub const ENTRY_NAMES: [&str; 9] = [
    "c00", "c01", "c02", "c10", "c11", "c12", "c20", "c21", "c22",
];

impl<T> RotationMatrix3<T> {
    pub fn from_rows(c: [[T; 3]; 3]) -> Self {
        Self { c }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.c[i][j]
    }

    pub fn row_major(&self) -> impl Iterator<Item = &T> {
        self.c.iter().flatten()
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> RotationMatrix3<U> {
        let [r0, r1, r2] = self.c;
        let mut row = |[a, b, c]: [T; 3]| [f(a), f(b), f(c)];
        RotationMatrix3 {
            c: [row(r0), row(r1), row(r2)],
        }
    }

    /// Entry by name (`"c00"`..`"c22"`).
    pub fn entry(&self, name: &str) -> Option<&T> {
        let idx = ENTRY_NAMES.iter().position(|n| *n == name)?;
        Some(&self.c[idx / 3][idx % 3])
    }
}

impl RotationMatrix3<f64> {
    /// Largest entry of `|RᵀR − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| self.c[k][i] * self.c[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        let c = &self.c;
        c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
            - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.row_major()
            .zip(other.row_major())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl<T: fmt::Display> fmt::Display for RotationMatrix3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.c.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}, {}, {}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

/// `q0² + q1² + q2² + q3²`: four squarings, three additions.
pub fn norm_squared<P: ScalarProfile>(p: &P, q: &Quaternion<P::Value>) -> P::Value {
    let a = p.add(&p.square(&q.q0), &p.square(&q.q1));
    let b = p.add(&p.square(&q.q2), &p.square(&q.q3));
    p.add(&a, &b)
}

/// Rotation matrix in product form.
///
/// Diagonal entries combine the four coefficient squares as
/// `(a + b) − (c + d)`; off-diagonal entries are doubled sums or differences
/// of the six pairwise products. Cost: 6 mul, 4 square, 15 add/sub, 6 double.
pub fn rotmat_direct<P: ScalarProfile>(
    p: &P,
    q: &Quaternion<P::Value>,
) -> RotationMatrix3<P::Value> {
    let s0 = p.square(&q.q0);
    let s1 = p.square(&q.q1);
    let s2 = p.square(&q.q2);
    let s3 = p.square(&q.q3);

    let p01 = p.mul(&q.q0, &q.q1);
    let p02 = p.mul(&q.q0, &q.q2);
    let p03 = p.mul(&q.q0, &q.q3);
    let p12 = p.mul(&q.q1, &q.q2);
    let p13 = p.mul(&q.q1, &q.q3);
    let p23 = p.mul(&q.q2, &q.q3);

    let c00 = p.sub(&p.add(&s0, &s1), &p.add(&s2, &s3));
    let c11 = p.sub(&p.add(&s0, &s2), &p.add(&s1, &s3));
    let c22 = p.sub(&p.add(&s0, &s3), &p.add(&s1, &s2));

    let c01 = p.double(&p.sub(&p12, &p03));
    let c10 = p.double(&p.add(&p12, &p03));
    let c02 = p.double(&p.add(&p02, &p13));
    let c20 = p.double(&p.sub(&p13, &p02));
    let c12 = p.double(&p.sub(&p23, &p01));
    let c21 = p.double(&p.add(&p01, &p23));

    RotationMatrix3::from_rows([[c00, c01, c02], [c10, c11, c12], [c20, c21, c22]])
}

/// Operation census of the product-form kernel.
pub const DIRECT_CENSUS: OpCountLedger = OpCountLedger::new(6, 4, 15, 6);

/// Count the product-form kernel's operations with an instrumented run.
pub fn op_census_direct() -> Result<OpCountLedger, QuaternionError> {
    let p = counted(RationalProfile);
    let q = Quaternion::new(1, 2, 3, 4).map(RationalProfile::from_int);
    let _ = rotmat_direct(&p, &q);
    let actual = p.ledger();
    if actual != DIRECT_CENSUS {
        return Err(QuaternionError::CensusMismatch {
            kernel: "direct",
            expected: DIRECT_CENSUS,
            actual,
        });
    }
    Ok(actual)
}
