//! Reproducible random streams.
//!
//! A trial seed is `mix(mix(mix(mix(master) ^ family) ^ grid) ^ trial)` where
//! `mix` is the SplitMix64 finalizer applied after adding the golden-ratio
//! increment `0x9E3779B97F4A7C15`. The 32-byte ChaCha20 key is four successive
//! SplitMix64 outputs of the trial seed, little-endian. Each purpose (matrix,
//! signal, noise) reads its own ChaCha20 stream id, so streams never overlap.
//!
//! Uniforms take the top 53 bits of a `u64` output. Normals use Box-Muller on
//! `u1 = (b + 1) / 2^53` and `u2 = b' / 2^53`, producing
//! `sqrt(-2 ln u1) cos(2 pi u2)` then `sqrt(-2 ln u1) sin(2 pi u2)`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_POW_53: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Matrix = 1,
    Signal = 2,
    MeasurementNoise = 3,
    SignalNoise = 4,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(x: u64) -> u64 {
    let mut s = x;
    splitmix(&mut s)
}

/// Seed of trial `trial` at grid point `grid_index` of experiment family `family`.
pub fn derive_seed(master: u64, family: u64, grid_index: u64, trial: u64) -> u64 {
    mix(mix(mix(mix(master) ^ family) ^ grid_index) ^ trial)
}

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream as u64);
        Self { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / TWO_POW_53
    }

    /// Uniform integer in `0..bound`, by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) / TWO_POW_53;
        let u2 = (self.next_u64() >> 11) as f64 / TWO_POW_53;
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
