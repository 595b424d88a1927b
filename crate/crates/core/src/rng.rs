//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator whose 64-bit seed is obtained by
//! folding a list of words into the master seed with the SplitMix64
//! finalizer:
//!
//! ```text
//! state = master
//! for w in words: state = splitmix64(state ^ splitmix64(w))
//! ```
//!
//! where splitmix64 is the standard SplitMix64 step (increment then
//! finalize). The first word is a domain tag so that surface draws, noise draws and any
//! future consumers never share a stream. Gaussian variates use the Marsaglia
//! polar method with the spare value discarded, so a draw always consumes an
//! even number of uniforms and the sequence depends only on the stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_SURFACE: u64 = 0x5355_5246;
pub const DOMAIN_NOISE: u64 = 0x4e4f_4953;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix_seed(master: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(master, |state, &w| splitmix64(state ^ splitmix64(w)))
}

pub fn stream(master: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(master, words))
}

/// Standard normal draw by the polar method.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Uniform draw on [-1, 1).
pub fn symmetric_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}
