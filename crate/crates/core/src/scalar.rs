//! Scalar abstraction so the numeric core runs at `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar used throughout the library.
///
/// Everything is written against this trait; `f64` is the default lane
/// (see the type aliases at the crate root) and `f32` is available for
/// memory-bound sweeps.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; panics only on values a float cannot
    /// represent, which `f32`/`f64` never do for finite inputs.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value representable as scalar")
    }

    /// Widening conversion to `f64` for reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// One standard-normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw in `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::of(2.5).as_f64(), 2.5);
        assert_eq!(f32::of(0.5), 0.5f32);
    }

    #[test]
    fn draws_are_finite() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0);
        for _ in 0..100 {
            let z: f64 = Scalar::standard_normal(&mut rng);
            let u: f64 = Scalar::unit_uniform(&mut rng);
            assert!(z.is_finite());
            assert!((0.0..1.0).contains(&u));
        }
    }
}
