//! Deterministic seed derivation. One user-facing seed fans out into
//! independent sub-seeds keyed by a purpose string and an index, so that
//! splits, clustering, and synthetic data never share RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over a byte slice. Also used for file audit digests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Derives a sub-seed from `(base, purpose, index)`.
pub fn derive(base: u64, purpose: &str, index: u64) -> u64 {
    let mut buf = Vec::with_capacity(16 + purpose.len());
    buf.extend_from_slice(&base.to_le_bytes());
    buf.extend_from_slice(purpose.as_bytes());
    buf.extend_from_slice(&index.to_le_bytes());
    fnv1a64(&buf)
}

/// A reproducible RNG for the derived sub-seed.
pub fn rng(base: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, purpose, index))
}

/// Hex digest of a byte stream, for audit headers in output files.
pub fn digest_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}
