//! Fixtures shared by the benchmarks.

use modpid::experiment::{bin_cell, simulate_cell, CellConfig};
use modpid::models::{Model, SampleBatch};
use modpid::transfer::TransferTag;
use modpid::JointDist3;

/// A small BGM cell: M1, scenario 4, d = 0.8.
pub fn small_cell(n: usize) -> CellConfig {
    let mut config = CellConfig::new(Model::Bgm, TransferTag::M1, 4, 0.8);
    config.n = n;
    config.seed = 7;
    config
}

/// Simulated samples for [`small_cell`].
pub fn small_batch(n: usize) -> (CellConfig, SampleBatch) {
    let config = small_cell(n);
    let batch = simulate_cell(&config).expect("fixture cell simulates").batch;
    (config, batch)
}

/// Binned 2×6×6 joint of a simulated cell.
pub fn binned_joint() -> JointDist3 {
    let (config, batch) = small_batch(200_000);
    bin_cell(&config, &batch).expect("fixture cell bins").1
}
