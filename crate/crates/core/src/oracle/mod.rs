//! Brute-force consistency checks at desk scale.
//!
//! None of these are proofs. They give empirical witnesses that the
//! certified bounds are consistent with actual minimisers and with actual
//! low-order Mayer coefficients.

pub mod cluster;
pub mod graphs;
pub mod mayer;

pub use cluster::{
    check_prop1, empirical_stability, minimize_energy, probe_local_minimum, Configuration,
    MinimizeOutcome,
    MinimizeParams, Prop1Check, StabilityRow,
};
pub use graphs::{enumerate_connected_graphs, GraphEnumeration};
pub use mayer::{c2_exact, c3_monte_carlo, EstimateMethod, MayerCoefficientEstimate, McParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for worker `index` of a run seeded with `seed`: same seed, a
/// separate stream per worker.
pub(crate) fn worker_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
