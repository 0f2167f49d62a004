//! Exact extremal yields for the decoy-state method with a finite number of intensities.
//!
//! Given detection rates measured at intensities `μ_1 < … < μ_M`, every yield vector
//! `y_n ∈ [0, 1]` consistent with the data satisfies per-photon-number bounds built from
//! two configurations:
//!
//! * `X`: the unique solution with `y_n = 0` for `n > M` ([`bounds::compute_x`]);
//! * `Z`: zeros on `(M, L0)`, `a0` at `L0` and ones beyond ([`bounds::compute_z`]).
//!
//! Which of the two is the lower bound depends on the parity of `M − n`. When all
//! intensities are at most one, both are attained, so the bounds are the exact
//! extrema. [`oracle`] re-derives them by brute-force linear programming, and
//! [`keyrate`] turns them into a secure key rate.
//!
//! All numerics are generic over [`Scalar`]/[`Real`]; [`Mp256`] is the default
//! working type.

pub mod bounds;
pub mod error;
pub mod keyrate;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod symfunc;

pub use error::{Error, Result};
pub use scalar::{MpFloat, Real, Scalar};

/// 64-bit significand.
pub type Mp64 = MpFloat<64>;
/// 128-bit significand.
pub type Mp128 = MpFloat<128>;
/// 256-bit significand, the default working precision.
pub type Mp256 = MpFloat<256>;
/// 512-bit significand.
pub type Mp512 = MpFloat<512>;
/// 1024-bit significand.
pub type Mp1024 = MpFloat<1024>;
/// Exact rational arithmetic for the parts that need no transcendental functions.
pub type Exact = num_rational::BigRational;
