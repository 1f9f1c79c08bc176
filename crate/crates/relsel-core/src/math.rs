//! Float helpers. Integer powers use binary exponentiation so std and no_std
//! builds agree bit for bit; transcendentals go through `std` when available
//! and `libm` otherwise.

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("relsel-core requires either the `std` feature or the `libm` feature");

/// `base^exp` by binary exponentiation on the integer exponent.
pub(crate) fn powi(base: f64, exp: u32) -> f64 {
    if exp == 0 {
        return 1.0;
    }
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    loop {
        if e & 1 == 1 {
            acc *= b;
        }
        e >>= 1;
        if e == 0 {
            return acc;
        }
        b *= b;
    }
}

pub(crate) fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & 0x7fff_ffff_ffff_ffff)
}

#[cfg(feature = "std")]
pub(crate) fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
pub(crate) fn expm1(x: f64) -> f64 {
    x.exp_m1()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[cfg(feature = "std")]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
