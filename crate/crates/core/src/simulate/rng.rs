//! Per-path random substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha is counter based: the stream for path `i` depends only on
/// `(seed, i)`, so results do not depend on how paths are scheduled.
pub fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}
