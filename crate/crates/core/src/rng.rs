//! Seeded randomness.
//!
//! Every random draw in the crate goes through ChaCha8 (`rand_chacha`) seeded
//! with `seed_from_u64(seed)` and a stream id selecting an independent
//! sub-sequence, so that parallel restarts stay reproducible. Gaussian
//! entries use `rand_distr::StandardNormal` sampled in `f64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMat;
use crate::scalar::{c, Real};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<T: Real>(rng: &mut SeededRng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<T: Real>(rng: &mut SeededRng, rows: usize, cols: usize) -> CMat<T> {
    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    CMat::from_fn(rows, cols, |_, _| {
        let re = gaussian::<T>(rng);
        let im = gaussian::<T>(rng);
        c(re * half, im * half)
    })
}

/// Uniform draw from `[0, 1)`.
pub fn uniform<T: Real>(rng: &mut SeededRng) -> T {
    T::lit(rng.random::<f64>())
}

/// Haar-random isometry of shape `rows × cols` (`rows ≥ cols`).
pub fn random_isometry<T: Real>(rng: &mut SeededRng, rows: usize, cols: usize) -> CMat<T> {
    let g = gaussian_matrix::<T>(rng, rows, cols);
    crate::linalg::polar_isometry(&g)
}
