//! Instance generation and initialization.

mod image;
mod init;
mod synthetic;

pub use image::{gen_hadamard_problem, hadamard_problem_from_image, image_to_signal, signal_to_image, ImageSpec, PpmImage};
pub use init::{spectral_init, warm_start, DEFAULT_SELECTION_QUANTILE};
pub use synthetic::{covariance_profile, gen_synthetic, SyntheticSpec};

use rand::distributions::{Distribution, Open01};
use rand::seq::index;

use crate::error::{invalid, Result};
use crate::linalg::lower_median;
use crate::rng::{self, Stream};

/// Number of corrupted measurements, `⌈m·p_fail⌉`.
pub fn corruption_count(m: usize, p_fail: f64) -> usize {
    (m as f64 * p_fail).ceil() as usize
}

pub(crate) fn check_p_fail(m: usize, p_fail: f64) -> Result<usize> {
    if !(0.0..0.5).contains(&p_fail) {
        return Err(invalid(format!("p_fail must lie in [0, 1/2), got {p_fail}")));
    }
    let count = corruption_count(m, p_fail);
    if 2 * count >= m && count > 0 {
        return Err(invalid(format!("{count} corrupted of {m} measurements is not a minority")));
    }
    Ok(count)
}

/// Replaces `⌈m·p_fail⌉` clean measurements, sampled without replacement, by
/// `M̃·tan(πU/2)` with `U ~ Uniform(0, 1)` and `M̃` the sample median of the
/// clean measurements. Returns the sorted corrupted indices.
pub(crate) fn corrupt(b: &mut [f64], p_fail: f64, seed: u64) -> Result<Vec<usize>> {
    let count = check_p_fail(b.len(), p_fail)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let median = lower_median(b);
    let mut idx = index::sample(&mut rng::stream(seed, Stream::CorruptionIndex), b.len(), count).into_vec();
    idx.sort_unstable();
    let mut values = rng::stream(seed, Stream::CorruptionValue);
    for &i in &idx {
        let u: f64 = Open01.sample(&mut values);
        b[i] = median * (std::f64::consts::FRAC_PI_2 * u).tan();
    }
    Ok(idx)
}
