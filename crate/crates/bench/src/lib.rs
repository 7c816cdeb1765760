//! Input generators shared by the benchmarks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xsens_core::{Scenario, VoxelObservations};

/// Observations with real and imaginary parts drawn uniformly from [-1, 1).
pub fn random_observations(rows: usize, coils: usize, seed: u64) -> VoxelObservations {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * coils)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    VoxelObservations::new(rows, coils, data).expect("positive shape")
}

/// The reference scenario on a smaller phantom grid.
pub fn scenario(phantom_size: usize) -> Scenario {
    Scenario { phantom_size, ..Scenario::default() }
}
