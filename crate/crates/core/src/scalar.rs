use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar accepted by every numerical routine in the crate.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in the docs assume `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// `n` logarithmically spaced points from `lo` to `hi` (both included).
pub fn log_space<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(lo > T::zero() && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}

/// `n` equally spaced points from `lo` to `hi` (both included).
pub fn lin_space<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2);
    let step = (hi - lo) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * T::from_usize_lossy(i) })
        .collect()
}
