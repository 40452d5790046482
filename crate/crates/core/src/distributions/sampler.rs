use nalgebra::{DMatrix, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{stable, FiniteSupportDist, Samples, Source, MAX_DIM};
use crate::error::{Error, Result};
use crate::rng::{map_chunks, StreamKey};

/// A [`Source`] with its derived state (Gaussian factors, atom tables)
/// precomputed for repeated draws.
#[derive(Debug, Clone)]
pub enum Sampler {
    Finite { dist: FiniteSupportDist, index: WeightedIndex<f64> },
    Gaussian { dim: usize, factor: Vec<f64> },
    Stable { index: f64, scale: f64 },
    Pareto { exponent: f64 },
    Thinned { inner: Box<Sampler>, keep: f64 },
    Scaled { inner: Box<Sampler>, factor: f64 },
    Product { parts: Vec<Sampler> },
}

fn gaussian_factor(cov: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = cov.len();
    if d == 0 || d > MAX_DIM {
        return Err(Error::param(format!("covariance dimension {d} outside [1, {MAX_DIM}]")));
    }
    if cov.iter().any(|r| r.len() != d) {
        return Err(Error::param("covariance matrix must be square"));
    }
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::param("covariance entries must be finite"));
    }
    let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (&m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::param("covariance matrix is not symmetric"));
    }
    let eig = SymmetricEigen::new(m);
    let mut factor = vec![0.0; d * d];
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-10 * scale {
            return Err(Error::param(format!("covariance is not positive semidefinite (eigenvalue {lam})")));
        }
        let s = lam.max(0.0).sqrt();
        for i in 0..d {
            factor[i * d + k] = eig.eigenvectors[(i, k)] * s;
        }
    }
    Ok(factor)
}

impl Sampler {
    pub fn compile(source: &Source) -> Result<Sampler> {
        Ok(match source {
            Source::Finite(dist) => {
                let index = WeightedIndex::new(dist.atoms().iter().map(|a| a.prob))
                    .map_err(|e| Error::param(e.to_string()))?;
                Sampler::Finite { dist: dist.clone(), index }
            }
            Source::Gaussian { covariance } => {
                Sampler::Gaussian { dim: covariance.len(), factor: gaussian_factor(covariance)? }
            }
            Source::SymmetricStable { index, scale } => {
                if !(*index > 0.0 && *index <= 2.0) {
                    return Err(Error::param(format!("stability index {index} outside (0,2]")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::param(format!("stable scale {scale} must be positive")));
                }
                Sampler::Stable { index: *index, scale: *scale }
            }
            Source::ParetoTail { exponent } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::param(format!("tail exponent {exponent} must be positive")));
                }
                Sampler::Pareto { exponent: *exponent }
            }
            Source::Thinned { inner, keep } => {
                if !(*keep > 0.0 && *keep <= 1.0) {
                    return Err(Error::param(format!("keep-probability {keep} outside (0,1]")));
                }
                Sampler::Thinned { inner: Box::new(Sampler::compile(inner)?), keep: *keep }
            }
            Source::Scaled { inner, factor } => {
                if !factor.is_finite() {
                    return Err(Error::param("scale factor must be finite"));
                }
                Sampler::Scaled { inner: Box::new(Sampler::compile(inner)?), factor: *factor }
            }
            Source::Product { components } => {
                if components.is_empty() {
                    return Err(Error::param("product source needs at least one component"));
                }
                let dim: usize = components.iter().map(Source::dim).sum();
                if dim > MAX_DIM {
                    return Err(Error::param(format!("product dimension {dim} exceeds {MAX_DIM}")));
                }
                Sampler::Product { parts: components.iter().map(Sampler::compile).collect::<Result<_>>()? }
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Sampler::Finite { dist, .. } => dist.dim(),
            Sampler::Gaussian { dim, .. } => *dim,
            Sampler::Stable { .. } | Sampler::Pareto { .. } => 1,
            Sampler::Thinned { inner, .. } | Sampler::Scaled { inner, .. } => inner.dim(),
            Sampler::Product { parts } => parts.iter().map(Sampler::dim).sum(),
        }
    }

    /// Writes one draw into `out`, which must have length `dim()`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Sampler::Finite { dist, index } => {
                out.copy_from_slice(&dist.atoms()[index.sample(rng)].point);
            }
            Sampler::Gaussian { dim, factor } => {
                let mut z = [0.0f64; MAX_DIM];
                for zi in z.iter_mut().take(*dim) {
                    *zi = rng.sample(StandardNormal);
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o = factor[i * dim..(i + 1) * dim].iter().zip(&z).map(|(a, b)| a * b).sum();
                }
            }
            Sampler::Stable { index, scale } => out[0] = scale * stable::cms_symmetric(rng, *index),
            Sampler::Pareto { exponent } => {
                let u = 1.0 - rng.random::<f64>();
                let r = u.powf(-1.0 / exponent);
                out[0] = if rng.random::<bool>() { r } else { -r };
            }
            Sampler::Thinned { inner, keep } => {
                let kept = rng.random::<f64>() < *keep;
                inner.draw(rng, out);
                if !kept {
                    out.iter_mut().for_each(|v| *v = 0.0);
                }
            }
            Sampler::Scaled { inner, factor } => {
                inner.draw(rng, out);
                out.iter_mut().for_each(|v| *v *= factor);
            }
            Sampler::Product { parts } => {
                let mut at = 0;
                for p in parts {
                    let d = p.dim();
                    p.draw(rng, &mut out[at..at + d]);
                    at += d;
                }
            }
        }
    }

    pub fn sample(&self, count: usize, key: &StreamKey) -> Samples {
        let d = self.dim();
        let chunks = map_chunks(key, count, |rng: &mut ChaCha8Rng, range| {
            let mut buf = vec![0.0; range.len() * d];
            for row in buf.chunks_exact_mut(d) {
                self.draw(rng, row);
            }
            buf
        });
        Samples { dim: d, data: chunks.concat() }
    }

    /// Draws of `Σ_i X_i` with `X_i` from `samplers[i]`.
    pub fn sample_sum(samplers: &[Sampler], dim: usize, count: usize, key: &StreamKey) -> Samples {
        let chunks = map_chunks(key, count, |rng: &mut ChaCha8Rng, range| {
            let mut buf = vec![0.0; range.len() * dim];
            let mut x = vec![0.0; dim];
            for row in buf.chunks_exact_mut(dim) {
                for s in samplers {
                    s.draw(rng, &mut x);
                    row.iter_mut().zip(&x).for_each(|(r, v)| *r += v);
                }
            }
            buf
        });
        Samples { dim, data: chunks.concat() }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{sample, thin};
    use super::*;

    const N: usize = 1_000_000;

    #[test]
    fn gaussian_mean_near_zero() {
        let s = sample(&Source::gaussian(vec![vec![1.0]]).unwrap(), N, &StreamKey::new(1, "g")).unwrap();
        let mean = s.data.iter().sum::<f64>() / N as f64;
        assert!(mean.abs() < 0.005);
    }

    #[test]
    fn pareto_tail_frequency() {
        let s = sample(&Source::ParetoTail { exponent: 2.0 }, N, &StreamKey::new(2, "p")).unwrap();
        let p = s.data.iter().filter(|v| v.abs() > 2.0).count() as f64 / N as f64;
        assert!((p - 0.25).abs() < 0.002, "{p}");
    }

    #[test]
    fn half_stable_tail_frequency() {
        let src = Source::SymmetricStable { index: 0.5, scale: 1.0 };
        let s = sample(&src, N, &StreamKey::new(3, "s")).unwrap();
        let p = s.data.iter().filter(|v| v.abs() > 1.0).count() as f64 / N as f64;
        assert!((p - 0.5425606253786865).abs() < 0.005, "{p}");
    }

    #[test]
    fn thinned_gaussian_zero_mass() {
        let src = thin(&Source::gaussian(vec![vec![1.0]]).unwrap(), 0.3).unwrap();
        let s = sample(&src, N, &StreamKey::new(4, "t")).unwrap();
        let p = s.data.iter().filter(|v| **v == 0.0).count() as f64 / N as f64;
        assert!((p - 0.7).abs() < 0.002, "{p}");
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Source::gaussian(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(Source::SymmetricStable { index: 2.5, scale: 1.0 }.validate().is_err());
        assert!(Source::SymmetricStable { index: 0.0, scale: 1.0 }.validate().is_err());
        let psd = Source::gaussian(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(psd.is_ok());
    }

    #[test]
    fn gaussian_covariance_reproduced() {
        let cov = vec![vec![2.0, 0.6], vec![0.6, 1.0]];
        let s = sample(&Source::gaussian(cov.clone()).unwrap(), 400_000, &StreamKey::new(9, "c")).unwrap();
        let n = s.len() as f64;
        for i in 0..2 {
            for j in 0..2 {
                let c: f64 = s.rows().map(|r| r[i] * r[j]).sum::<f64>() / n;
                assert!((c - cov[i][j]).abs() < 0.02, "({i},{j}) {c}");
            }
        }
    }

    #[test]
    fn deterministic_given_key() {
        let src = Source::SymmetricStable { index: 1.3, scale: 2.0 };
        let key = StreamKey::new(42, "det");
        assert_eq!(sample(&src, 50_000, &key).unwrap(), sample(&src, 50_000, &key).unwrap());
    }
}
