//! Quaternion to rotation-matrix conversion, two ways.
//!
//! * [`quaternion::rotmat_direct`] evaluates the textbook product form
//!   (6 multiplications, 4 squarings, 15 additions, 6 doublings).
//! * [`logan::rotmat_logan`] replaces every multiplication with squarings via
//!   the quarter-square identity `2ab = (a+b)² − a² − b²`, sharing the
//!   squared sums across entries (10 squarings, 26 additions, nothing else).
//!
//! Both kernels are generic over a [`scalar::ScalarProfile`], so the same
//! code runs in binary64, exact rationals, bit-true fixed point, symbolic
//! polynomials ([`symbolic`]) and an op-counting wrapper. [`datapath`]
//! traces either kernel into a dataflow graph for scheduling, costing and
//! netlist export; [`precision`] measures fixed-point error.
//!
//! ```
//! use quatrot::scalar::{F64Profile, FixedPointFormat, FixedProfile};
//! use quatrot::{rotmat_logan, Quaternion};
//!
//! let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
//! let r = rotmat_logan(&F64Profile, &q);
//! assert_eq!(r.c[0], [-20.0, 4.0, 22.0]);
//!
//! let fx = FixedProfile::new("Q3.12".parse::<FixedPointFormat>().unwrap());
//! let unit = Quaternion::new(0.5, 0.5, 0.5, 0.5).map(|c| fx.quantize(c));
//! let m = rotmat_logan(&fx, &unit).map(|v| fx.to_f64(v));
//! assert_eq!(m.c[0], [0.0, 0.0, 1.0]);
//! ```

pub mod datapath;
pub mod logan;
pub mod precision;
pub mod quaternion;
pub mod scalar;
pub mod symbolic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use logan::{rotmat_logan, LoganIntermediates};
pub use quaternion::{rotmat_direct, Quaternion, RotationMatrix3};
pub use scalar::{OpCountLedger, ScalarProfile};

/// Which conversion kernel to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Logan,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Direct, Method::Logan];

    pub fn rotmat<P: ScalarProfile>(
        self,
        p: &P,
        q: &Quaternion<P::Value>,
    ) -> RotationMatrix3<P::Value> {
        match self {
            Method::Direct => rotmat_direct(p, q),
            Method::Logan => rotmat_logan(p, q),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Logan => "logan",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Method::Direct),
            "logan" => Ok(Method::Logan),
            other => Err(format!(
                "unknown method `{other}` (expected direct or logan)"
            )),
        }
    }
}
