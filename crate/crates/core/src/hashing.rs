//! Seeded FNV-1a hashing shared by the lexical embedder, the mock
//! paraphraser, and the synthetic-suite generators. The scheme is fixed so
//! hashed artifacts are stable across runs and platforms.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over `bytes`, with `seed` folded into the offset basis.
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET ^ seed.wrapping_mul(FNV_PRIME);
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Uniform value in [0, 1) derived from the top 32 bits of the hash.
///
/// The 2^-32 grid keeps downstream affine transforms order- and
/// tie-preserving in f64.
pub fn unit_fraction(seed: u64, bytes: &[u8]) -> f64 {
    f64::from((fnv1a64(seed, bytes) >> 32) as u32) / f64::from(u32::MAX) * 0.999_999_999
}
