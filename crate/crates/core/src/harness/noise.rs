//! Additive Gaussian measurement noise and seeded random streams.

use super::config::NoiseConvention;
use crate::forward::DataVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent purposes drawing from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Noise = 1,
    Init = 2,
    Heterogeneity = 3,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// Returns `(clean + e, ||e||)`. Complex entries get independent real and
/// imaginary perturbations of `std / sqrt(2)` each.
pub fn add_noise(clean: &DataVector, percent: f64, convention: NoiseConvention, rng: &mut impl Rng) -> (DataVector, f64) {
    if percent == 0.0 || clean.is_empty() {
        return (clean.clone(), 0.0);
    }
    let rel = percent / 100.0;
    let global = rel * clean.norm() / (clean.len() as f64).sqrt();
    let mut draw = |scale: f64| -> f64 { scale * rng.sample::<f64, _>(StandardNormal) };
    match clean {
        DataVector::Real(v) => {
            let e: Vec<f64> = v
                .iter()
                .map(|x| match convention {
                    NoiseConvention::Global => draw(global),
                    NoiseConvention::PerSample => draw(rel * x.abs()),
                })
                .collect();
            let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            (DataVector::Real(v.iter().zip(&e).map(|(x, n)| x + n).collect()), norm)
        }
        DataVector::Complex(v) => {
            let e: Vec<Complex64> = v
                .iter()
                .map(|z| {
                    let s = match convention {
                        NoiseConvention::Global => global,
                        NoiseConvention::PerSample => rel * z.norm(),
                    } / std::f64::consts::SQRT_2;
                    Complex64::new(draw(s), draw(s))
                })
                .collect();
            let norm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (DataVector::Complex(v.iter().zip(&e).map(|(x, n)| x + n).collect()), norm)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean() -> DataVector {
        DataVector::Real((0..500).map(|i| (i as f64 * 0.37).sin() + 0.2).collect())
    }

    #[test]
    fn zero_percent_is_identity() {
        let c = clean();
        let (n, e) = add_noise(&c, 0.0, NoiseConvention::Global, &mut rng(1, Stream::Noise));
        assert_eq!(n, c);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = clean();
        let a = add_noise(&c, 1.0, NoiseConvention::Global, &mut rng(7, Stream::Noise));
        let b = add_noise(&c, 1.0, NoiseConvention::Global, &mut rng(7, Stream::Noise));
        assert_eq!(a, b);
        let d = add_noise(&c, 1.0, NoiseConvention::Global, &mut rng(8, Stream::Noise));
        assert_ne!(a.0, d.0);
    }

    #[test]
    fn streams_are_independent() {
        let a: u64 = rng(5, Stream::Noise).random();
        let b: u64 = rng(5, Stream::Init).random();
        assert_ne!(a, b);
    }

    #[test]
    fn reported_norm_matches_perturbation() {
        let c = DataVector::Complex((0..100).map(|i| Complex64::new(i as f64, -0.5 * i as f64)).collect());
        let (n, e) = add_noise(&c, 2.0, NoiseConvention::Global, &mut rng(2, Stream::Noise));
        assert!((n.sub(&c).unwrap().norm() - e).abs() < 1e-12 * e);
    }
}
