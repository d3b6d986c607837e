//! Seed derivation.
//!
//! All randomness flows from a single root seed. Named substreams keep the
//! topology, cluster election, sign draws and trial sampling independent of
//! each other, so changing how many draws one consumer makes never shifts
//! another consumer's values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a
    label.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Derives the seed of substream `label`/`index` under `root`.
pub fn derive(root: u64, label: &str, index: u64) -> u64 {
    mix64(mix64(root ^ label_hash(label)).wrapping_add(mix64(index)))
}

/// A generator for substream `label`/`index` under `root`.
pub fn stream(root: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, label, index))
}

/// Counter-based uniform draw in `[0, 1)`: the `index`-th value of the stream
/// keyed by `seed`. Used for per-node draws that must not depend on the order
/// in which nodes are visited.
pub fn unit_draw(seed: u64, index: u64) -> f64 {
    let bits = mix64(seed ^ mix64(index.wrapping_mul(GOLDEN)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
