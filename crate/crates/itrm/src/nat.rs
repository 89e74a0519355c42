//! The unsigned scalar abstraction shared by the whole crate.
//!
//! Register contents, ordinal coefficients, oracle bit indices and the
//! pairing function are all plain naturals, but different workloads want
//! different representations: bulk corpus runs are fastest on `u64`, while
//! program ranks and anything fed back through them genuinely need
//! arbitrary precision. Everything generic in this crate is written against
//! [`Nat`] and instantiated at either.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::{BigUint, ToBigUint};
use num_integer::{Integer, Roots};
use num_traits::{FromPrimitive, ToPrimitive, Unsigned};

/// An unsigned integer scalar: `u32`, `u64`, `u128`, `usize` or `BigUint`.
///
/// `Roots` is needed for inverting the pairing function, `ToBigUint` for
/// handing values to the rank machinery, which is always arbitrary
/// precision.
pub trait Nat:
    Integer
    + Roots
    + Unsigned
    + FromPrimitive
    + ToPrimitive
    + ToBigUint
    + Hash
    + Clone
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless conversion from `usize`; indices and small counts only.
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize does not fit in this scalar")
    }

    /// Parse a decimal literal.
    fn from_decimal(s: &str) -> Option<Self> {
        <Self as num_traits::Num>::from_str_radix(s, 10).ok()
    }
}

impl<T> Nat for T where
    T: Integer
        + Roots
        + Unsigned
        + FromPrimitive
        + ToPrimitive
        + ToBigUint
        + Hash
        + Clone
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Saturating decrement: register machines clamp `Dec` at zero.
pub fn dec_clamped<N: Nat>(n: &N) -> N {
    if n.is_zero() {
        N::zero()
    } else {
        n.clone() - N::one()
    }
}

/// The default arbitrary-precision scalar.
pub type BigNat = BigUint;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dec_clamps_at_zero() {
        assert_eq!(dec_clamped(&0u64), 0);
        assert_eq!(dec_clamped(&5u64), 4);
        assert_eq!(dec_clamped(&BigUint::from(0u8)), BigUint::from(0u8));
    }

    #[test]
    fn scalar_conversions() {
        assert_eq!(u64::from_usize_exact(7), 7);
        assert_eq!(BigUint::from_decimal("123456789012345678901234567890")
            .unwrap()
            .to_string(), "123456789012345678901234567890");
        assert_eq!(u64::from_decimal("18446744073709551616"), None);
    }
}
