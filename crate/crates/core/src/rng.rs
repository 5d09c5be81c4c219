//! Seeded generators with deterministic substreams and a bounded worker pool.
//!
//! Every unit of parallel work (a Monte Carlo trial block, an audited state)
//! draws from its own ChaCha8 stream keyed by `(seed, stream id)`, so results
//! do not depend on how many workers run them or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Environment variable capping the worker count (`0` or unset = automatic).
pub const THREADS_ENV: &str = "PREPOST_THREADS";

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Worker count requested through [`THREADS_ENV`]; `0` means automatic.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs `f` inside a pool of `threads` workers (`0` = rayon default).
pub(crate) fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
