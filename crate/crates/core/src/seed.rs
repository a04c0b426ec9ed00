//! Stable seed derivation (splitmix64 finalizer), independent of std hashing.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn combine(seed: u64, value: u64) -> u64 {
    mix(seed ^ mix(value))
}

pub(crate) fn derive<I: IntoIterator<Item = u64>>(seed: u64, values: I) -> u64 {
    values.into_iter().fold(mix(seed), combine)
}
