//! Scalar math routed to `std` intrinsics or `libm`, so the crate body never
//! calls `f64` inherent methods that vanish under `no_std`.

#![allow(dead_code)]

macro_rules! unary {
    ($($name:ident),* $(,)?) => {
        $(
            #[cfg(feature = "std")]
            #[inline]
            pub fn $name(x: f64) -> f64 {
                f64::$name(x)
            }
            #[cfg(not(feature = "std"))]
            #[inline]
            pub fn $name(x: f64) -> f64 {
                libm::$name(x)
            }
        )*
    };
}

unary!(sqrt, sin, cos, tan, asin, acos, atan, sinh, cosh, tanh, acosh, atanh);

#[cfg(feature = "std")]
#[inline]
pub fn abs(x: f64) -> f64 {
    f64::abs(x)
}
#[cfg(not(feature = "std"))]
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    f64::atan2(y, x)
}
#[cfg(not(feature = "std"))]
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// Sign as ±1.0; zero maps to +1.0 (callers guard the degenerate case).
#[inline]
pub fn signum1(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}
