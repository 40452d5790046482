//! Seeded random instances for randomized checks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::distributions::{FiniteSupportDist, ProductLaw, Source};
use crate::error::Result;
use crate::geometry::{random_norm_family, FamilyMix, NormSpec};
use crate::inequalities::SignInstance;
use crate::rng::StreamKey;

/// Generator for instance number `index` of a named suite.
pub fn instance_rng(seed: u64, suite: &str, index: u64) -> ChaCha8Rng {
    StreamKey::new(seed, format!("fixtures/{suite}")).stream(index)
}

/// One norm on R^d drawn from a mixed random family.
pub fn random_norm<R: Rng>(rng: &mut R, d: usize) -> Result<NormSpec> {
    let family = random_norm_family(rng.random(), d, 6, FamilyMix::Mixed)?;
    Ok(family[rng.random_range(0..family.len())].clone())
}

fn random_vector<R: Rng>(rng: &mut R, d: usize, spread: f64) -> Vec<f64> {
    (0..d).map(|_| spread * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Symmetric law with `1..=max_pairs` atom pairs and leftover mass at zero.
pub fn random_finite_source<R: Rng>(rng: &mut R, d: usize, max_pairs: usize) -> Result<Source> {
    let k = rng.random_range(1..=max_pairs);
    let mut masses: Vec<f64> = (0..=k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    let pairs: Vec<(Vec<f64>, f64)> = (0..k).map(|i| (random_vector(rng, d, 1.5), masses[i])).collect();
    Ok(Source::Finite(FiniteSupportDist::from_pairs(d, &pairs)?))
}

/// Product of `1..=max_len` independent random finite laws on R^d.
pub fn random_finite_law<R: Rng>(rng: &mut R, max_len: usize, d: usize, max_pairs: usize) -> Result<ProductLaw> {
    let n = rng.random_range(1..=max_len);
    ProductLaw::new((0..n).map(|_| random_finite_source(rng, d, max_pairs)).collect::<Result<_>>()?)
}

/// Sign instance with `1..=max_len` vectors and a random norm.
pub fn random_sign_instance<R: Rng>(rng: &mut R, max_len: usize, d: usize) -> Result<SignInstance> {
    let n = rng.random_range(1..=max_len);
    let vectors = (0..n).map(|_| random_vector(rng, d, 1.0)).collect();
    SignInstance::new(vectors, random_norm(rng, d)?)
}

/// `(a, b)` with `a ≺ b`: `a` averages random permutations of `b`.
pub fn random_majorised_pair<R: Rng>(rng: &mut R, max_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=max_len);
    let b: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 0.5).collect();
    let m = rng.random_range(1..=4);
    let mut w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut a = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for wk in w {
        perm.shuffle(rng);
        a.iter_mut().zip(&perm).for_each(|(ai, &p)| *ai += wk * b[p]);
    }
    (a, b)
}
