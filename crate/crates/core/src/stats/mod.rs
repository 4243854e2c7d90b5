//! Correlation, resampling and logistic regression.
//!
//! Resampling replicates draw from `ChaCha8Rng` seeded with the user seed and
//! the replicate index as stream, so results do not depend on thread count or
//! scheduling.

mod correlation;
mod logistic;

pub use correlation::{bootstrap_mean, pearson, spearman, CorrelationResult, GroupMIStat, MIN_RESAMPLES};
pub use logistic::{logistic_fit, xnor_interaction, DesignMatrix, LogisticFit};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replicate `index` under `seed`.
pub(crate) fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
