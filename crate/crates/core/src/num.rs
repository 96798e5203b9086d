//! Scalar abstraction.
//!
//! Every physics routine is written against [`Real`] so the same code runs in
//! `f64` (the default used by the CLI) and `f32`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

use crate::linalg::Magnitude;

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Sum
    + NumAssign
    + Magnitude<Self>
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values at all, which no implementor does.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// `x` formatted with `digits` significant digits, as a plain decimal.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let rounded = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (e.g. 999.96 -> 1000.0).
    let carried = rounded.parse::<f64>().unwrap_or(x);
    let new_mag = carried.abs().log10().floor() as i32;
    if new_mag != mag {
        let decimals = (digits as i32 - 1 - new_mag).max(0) as usize;
        return format!("{carried:.decimals$}");
    }
    rounded
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(6.667377, 4), "6.667");
        assert_eq!(fmt_sig(555.98, 4), "556.0");
        assert_eq!(fmt_sig(281.325, 4), "281.3");
        assert_eq!(fmt_sig(999.96, 4), "1000");
        assert_eq!(fmt_sig(0.0012345, 3), "0.00123");
        assert_eq!(fmt_sig(-31.7524, 4), "-31.75");
    }

    #[test]
    fn literal_conversion() {
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Real>::from_usize_lossy(7), 7.0);
    }
}
