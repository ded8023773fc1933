//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for coordinates, scores and statistics.
///
/// Implemented for `f32` and `f64`. Pixel data stays 8-bit; this trait only
/// covers the values derived from it.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` constant.
    fn c(v: f64) -> Self;

    /// Widening conversion used at I/O and special-function boundaries.
    fn to_f64_lossy(self) -> f64;

    /// Total order for finite values; NaN sorts last.
    fn total_cmp_real(&self, other: &Self) -> std::cmp::Ordering;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn c(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn total_cmp_real(&self, other: &Self) -> std::cmp::Ordering {
                self.total_cmp(other)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Round half away from zero and saturate into the 8-bit range.
///
/// Every 8-bit result in the crate goes through this function.
#[inline]
pub fn round_to_u8(v: f64) -> u8 {
    // f64::round already rounds half away from zero.
    v.round().clamp(0.0, 255.0) as u8
}
