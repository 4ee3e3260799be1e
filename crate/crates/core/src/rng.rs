//! Seed derivation.
//!
//! Every consumer of randomness draws from its own ChaCha stream keyed by the
//! experiment seed, a consumer tag and an index, so subbands and trials can be
//! generated in any order without changing their values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{CMatrix, CVector, Complex64};

/// Named random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Scatter = 1,
    Precoder = 2,
    Symbols = 3,
    Noise = 4,
    Trial = 5,
}

/// Deterministic generator for `(seed, stream, index)`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) ^ index);
    rng
}

/// Circularly symmetric complex Gaussian sample with variance `power`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, power: f64) -> Complex64 {
    let scale = (power / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

/// `rows x cols` matrix of i.i.d. CN(0, power) entries, filled column-major.
pub fn gaussian_matrix<R: rand::Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    power: f64,
) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, power))
}

pub fn gaussian_vector<R: rand::Rng + ?Sized>(rng: &mut R, len: usize, power: f64) -> CVector {
    CVector::from_fn(len, |_, _| complex_gaussian(rng, power))
}
