//! Shared fixtures for the benchmark targets.

use mmot_core::{gen_instance, Instance, Rational};

/// Seeded random-tensor instance with the given space sizes.
pub fn fixture(sizes: &[usize], seed: u64) -> Instance<Rational> {
    gen_instance(sizes, "random", seed).expect("fixture arguments are valid")
}
