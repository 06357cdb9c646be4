//! Stateless seed derivation for reproducible parallel sweeps.
//!
//! The algorithm is fixed so that ports in other languages reproduce the same
//! seeds:
//!
//! ```text
//! fmix64(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!             z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!             return z ^ (z >> 31)                       (wrapping u64)
//!
//! key = (i << 43) | (j << 22) | r         if i, j < 2^21 and r < 2^22
//!     = fmix64(fmix64(fmix64(i ^ G) ^ j) ^ r)   otherwise
//! seed = fmix64(fmix64(base + G) ^ key)   with G = 0x9E3779B97F4A7C15
//! ```
//!
//! `fmix64` (the SplitMix64 finalizer) is a bijection on `u64`, so triples that
//! fit the packed layout always map to distinct seeds for a fixed base.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

const I_BITS: u32 = 21;
const J_BITS: u32 = 21;
const R_BITS: u32 = 22;

#[inline]
pub fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pack_key(i: u64, j: u64, r: u64) -> u64 {
    if i < (1 << I_BITS) && j < (1 << J_BITS) && r < (1 << R_BITS) {
        (i << (J_BITS + R_BITS)) | (j << R_BITS) | r
    } else {
        // Out-of-range indices: hashed, so distinctness is only probabilistic.
        fmix64(fmix64(fmix64(i ^ GOLDEN) ^ j) ^ r)
    }
}

/// Seed for grid cell `(i, j)` and realization `r` under `base`.
pub fn derive_seed(base: u64, i: u64, j: u64, r: u64) -> u64 {
    fmix64(fmix64(base.wrapping_add(GOLDEN)) ^ pack_key(i, j, r))
}
