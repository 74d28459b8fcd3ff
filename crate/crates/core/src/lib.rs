//! Positive operators on finite weighted coordinate lattices.
//!
//! The crate studies operators that preserve the entrywise-nonnegative
//! cone of a weighted coordinate space, and which diagonal operators
//! arise as their self-commutators `A*A - AA*`. It provides:
//!
//! * the weighted spaces, adjoints and commutators ([`space`],
//!   [`operator`]);
//! * diagonal factorizations through dyadic step spaces and related
//!   positive maps ([`constructions`]);
//! * certificate-producing realizations of diagonal operators as
//!   self-commutators of positive block shifts ([`selfcomm`]);
//! * falsification campaigns for the rigidity statements that forbid
//!   such realizations in other regimes ([`verify`]);
//! * a projected-gradient search over positive operators ([`search`]).
//!
//! Everything is finite and explicit: infinite-dimensional statements
//! are represented by truncations that carry an explicitly reported
//! edge region where the finite model must deviate.

pub mod constructions;
pub mod diagonal;
pub mod error;
pub mod matrix;
pub mod operator;
pub mod report;
pub mod scalar;
pub mod search;
pub mod selfcomm;
pub mod space;
pub mod tolerance;
pub mod verify;

pub use diagonal::DiagonalSpec;
pub use error::{LatticeError, Result};
pub use matrix::Mat;
pub use operator::{
    switch_operator, LatticeOperator, NormEstimate, PositivityReport, PositivityWitness,
};
pub use scalar::{parse_ratio, Rat, Scalar};
pub use space::{SpaceKind, WeightedSpace};
pub use tolerance::ToleranceConfig;

/// Splittable deterministic seeding: one root seed, many independent
/// streams (trial indices, restart indices). SplitMix64 finalizer.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::derive_seed;

    #[test]
    fn derived_seeds_are_stable_and_spread() {
        assert_eq!(derive_seed(0, 0), derive_seed(0, 0));
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
        assert_ne!(derive_seed(0, 0), derive_seed(1, 0));
        // Frozen value: guards against accidental reseeding changes that
        // would silently break report reproducibility.
        assert_eq!(derive_seed(42, 7), 14769051326987775908u64);
    }
}
