//! Seed management for reproducible parallel experiments.
//!
//! Every experiment takes one master seed. Independent units of work (trials,
//! boost runs, meta-trials) each get their own ChaCha stream derived as
//! `stream(master, index)`: same cipher key, stream id = index. Streams are
//! independent and the derivation is stable across platforms and thread
//! counts, so re-running with the same master seed reproduces every trial
//! bit-for-bit regardless of parallel scheduling.
//!
//! When an experiment contains several sub-experiments that each need their
//! own family of streams (e.g. one per runtime value `t`), derive a fresh
//! master per sub-experiment with [`derive_master`].

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for one unit of work: ChaCha8 keyed by the master seed, on stream
/// `index`. One `random_range` call per walk step keeps streams aligned.
pub fn stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Derive a sub-experiment master seed via the SplitMix64 finalizer, so that
/// nested stream families never collide across sub-experiments.
pub fn derive_master(master_seed: u64, salt: u64) -> u64 {
    let mut z = master_seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
