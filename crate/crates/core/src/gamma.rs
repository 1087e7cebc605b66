//! Gamma variates by the Marsaglia–Tsang squeeze/rejection method.
//!
//! Shapes below 1 are boosted: draw `Gamma(shape + 1)` and multiply by
//! `U^(1/shape)`. Every draw is a deterministic function of the stream.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{positive, Result};

/// Draws from `Gamma(shape, rate)` (mean `shape / rate`).
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> Result<f64> {
    positive("shape", shape)?;
    positive("rate", rate)?;
    Ok(standard_gamma(rng, shape) / rate)
}

/// `Gamma(shape, 1)` with `shape > 0` already checked.
pub(crate) fn standard_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let boosted = marsaglia_tsang(rng, shape + 1.0);
        let u: f64 = rng.random();
        return boosted * u.powf(1.0 / shape);
    }
    marsaglia_tsang(rng, shape)
}

fn marsaglia_tsang<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x: f64 = rng.sample(StandardNormal);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(shape: f64, rate: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..n).map(|_| sample_gamma(&mut rng, shape, rate).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, var)
    }

    #[test]
    fn matches_gamma_moments() {
        let n = 400_000;
        for &(shape, rate) in &[(0.5, 0.5), (0.7, 2.0), (1.0, 1.0), (3.0, 2.0), (50.0, 10.0)] {
            let (mean, var) = moments(shape, rate, n, 11);
            let true_mean = shape / rate;
            let true_var = shape / (rate * rate);
            let se = (true_var / n as f64).sqrt();
            assert!((mean - true_mean).abs() < 5.0 * se, "shape {shape} rate {rate}: mean {mean}");
            assert!((var / true_var - 1.0).abs() < 0.03, "shape {shape} rate {rate}: var {var}");
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(
                sample_gamma(&mut a, 1.5, 0.5).unwrap().to_bits(),
                sample_gamma(&mut b, 1.5, 0.5).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_gamma(&mut rng, 0.0, 1.0).is_err());
        assert!(sample_gamma(&mut rng, 1.0, -1.0).is_err());
        assert!(sample_gamma(&mut rng, f64::NAN, 1.0).is_err());
    }
}
