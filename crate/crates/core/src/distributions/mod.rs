//! Symmetric random vectors in R^d.
//!
//! [`FiniteSupportDist`] is the exact substrate: laws with finitely many
//! atoms whose products can be enumerated. [`Source`] adds the continuous
//! families used by the experiments; every family is symmetric by
//! construction (finite laws are validated symmetric, the Gaussian and the
//! β = 0 stable transform are odd under the sign of their driving noise, and
//! the Pareto family draws an explicit uniform sign).

mod sampler;
mod split;
pub mod stable;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;

pub use sampler::Sampler;
pub use split::{split_scheme, SplitScheme};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Default cap on the size of an enumerated product support.
pub const PRODUCT_CAP: u128 = 1_000_000;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: Vec<f64>,
    pub prob: f64,
}

/// A symmetric law with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFinite", into = "RawFinite")]
pub struct FiniteSupportDist {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFinite {
    atoms: Vec<Atom>,
}

impl TryFrom<RawFinite> for FiniteSupportDist {
    type Error = Error;
    fn try_from(raw: RawFinite) -> Result<Self> {
        FiniteSupportDist::new(raw.atoms)
    }
}

impl From<FiniteSupportDist> for RawFinite {
    fn from(d: FiniteSupportDist) -> Self {
        RawFinite { atoms: d.atoms }
    }
}

fn point_key(v: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same location
    v.iter().map(|x| (x + 0.0).to_bits()).collect()
}

impl FiniteSupportDist {
    /// Validates the atoms: positive probabilities summing to one, no
    /// duplicate locations, and `(-v, p)` present for every `(v, p)`.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let dim = atoms.first().map(|a| a.point.len()).ok_or_else(|| Error::param("no atoms"))?;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param(format!("dimension {dim} outside [1, {MAX_DIM}]")));
        }
        let mut by_loc: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        let mut total = 0.0;
        for a in &atoms {
            if a.point.len() != dim {
                return Err(Error::Dimension { expected: dim, got: a.point.len() });
            }
            if a.point.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("atom locations must be finite"));
            }
            if !(a.prob > 0.0 && a.prob <= 1.0) {
                return Err(Error::param(format!("atom probability {} outside (0,1]", a.prob)));
            }
            if by_loc.insert(point_key(&a.point), a.prob).is_some() {
                return Err(Error::param(format!("duplicate atom at {:?}", a.point)));
            }
            total += a.prob;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::param(format!("atom probabilities sum to {total}, not 1")));
        }
        for a in &atoms {
            if a.point.iter().all(|v| *v == 0.0) {
                continue;
            }
            let neg: Vec<f64> = a.point.iter().map(|v| -v).collect();
            match by_loc.get(&point_key(&neg)) {
                Some(p) if (p - a.prob).abs() <= PROB_TOL => {}
                Some(p) => {
                    return Err(Error::param(format!(
                        "asymmetric atom {:?}: mass {} vs {} at the reflection",
                        a.point, a.prob, p
                    )))
                }
                None => return Err(Error::param(format!("atom {:?} has no reflection", a.point))),
            }
        }
        Ok(Self { dim, atoms })
    }

    /// Builds `±v` pairs, each pair carrying total mass `mass` split evenly;
    /// whatever is left goes to the origin.
    pub fn from_pairs(dim: usize, pairs: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * pairs.len() + 1);
        let mut used = 0.0;
        for (v, mass) in pairs {
            atoms.push(Atom { point: v.clone(), prob: mass / 2.0 });
            atoms.push(Atom { point: v.iter().map(|x| -x).collect(), prob: mass / 2.0 });
            used += mass;
        }
        let rest = 1.0 - used;
        if rest > PROB_TOL {
            atoms.push(Atom { point: vec![0.0; dim], prob: rest });
        }
        Self::new(atoms)
    }

    /// `±1` with probability ½ each, in R^1.
    pub fn rademacher() -> Self {
        Self::from_pairs(1, &[(vec![1.0], 1.0)]).expect("valid law")
    }

    /// A point mass at the origin.
    pub fn zero(dim: usize) -> Self {
        Self::new(vec![Atom { point: vec![0.0; dim], prob: 1.0 }]).expect("valid law")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Law of `c·X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 {
            return Ok(Self::zero(self.dim));
        }
        Self::new(
            self.atoms
                .iter()
                .map(|a| Atom { point: a.point.iter().map(|v| v * c).collect(), prob: a.prob })
                .collect(),
        )
    }

    /// Law of `δ·X` with `δ ~ Bernoulli(p)` independent of `X`.
    pub fn thinned(&self, p: f64) -> Result<Self> {
        check_keep(p)?;
        if p == 1.0 {
            return Ok(self.clone());
        }
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len() + 1);
        let mut zero_mass = 1.0 - p;
        for a in &self.atoms {
            if a.point.iter().all(|v| *v == 0.0) {
                zero_mass += p * a.prob;
            } else {
                atoms.push(Atom { point: a.point.clone(), prob: p * a.prob });
            }
        }
        atoms.push(Atom { point: vec![0.0; self.dim], prob: zero_mass });
        Self::new(atoms)
    }

    /// `P(‖X‖ > t)` under `norm_value`.
    pub fn tail_by(&self, t: f64, norm_value: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().filter(|a| norm_value(&a.point) > t).map(|a| a.prob).sum()
    }
}

fn check_keep(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("keep-probability {p} outside (0,1]")))
    }
}

/// A symmetric random vector source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Finite(FiniteSupportDist),
    Gaussian { covariance: Vec<Vec<f64>> },
    /// Symmetric `index`-stable scalar with characteristic function
    /// `exp(-|scale·u|^index)`.
    SymmetricStable { index: f64, scale: f64 },
    /// Scalar with `P(|X| > t) = min(1, t^-exponent)` and a uniform sign.
    ParetoTail { exponent: f64 },
    Thinned { inner: Box<Source>, keep: f64 },
    Scaled { inner: Box<Source>, factor: f64 },
    /// Independent blocks stacked into one vector.
    Product { components: Vec<Source> },
}

impl From<FiniteSupportDist> for Source {
    fn from(d: FiniteSupportDist) -> Self {
        Source::Finite(d)
    }
}

impl Source {
    pub fn gaussian(covariance: Vec<Vec<f64>>) -> Result<Self> {
        let s = Source::Gaussian { covariance };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            Source::Finite(d) => d.dim(),
            Source::Gaussian { covariance } => covariance.len(),
            Source::SymmetricStable { .. } | Source::ParetoTail { .. } => 1,
            Source::Thinned { inner, .. } | Source::Scaled { inner, .. } => inner.dim(),
            Source::Product { components } => components.iter().map(Source::dim).sum(),
        }
    }

    /// Checks family parameters; construction through [`Source::sampler`]
    /// runs the same checks.
    pub fn validate(&self) -> Result<()> {
        Sampler::compile(self).map(|_| ())
    }

    /// The exact finite law, when this source has one and its support stays
    /// within `cap`.
    pub fn exact_finite(&self, cap: u128) -> Option<FiniteSupportDist> {
        match self {
            Source::Finite(d) => Some(d.clone()),
            Source::Scaled { inner, factor } => inner.exact_finite(cap)?.scaled(*factor).ok(),
            Source::Thinned { inner, keep } => inner.exact_finite(cap)?.thinned(*keep).ok(),
            Source::Product { components } => {
                let parts: Option<Vec<_>> = components.iter().map(|c| c.exact_finite(cap)).collect();
                let parts = parts?;
                let size: u128 = parts.iter().map(|p| p.len() as u128).product();
                if size > cap {
                    return None;
                }
                let dims: Vec<usize> = parts.iter().map(|p| p.dim()).collect();
                let mut atoms = Vec::with_capacity(size as usize);
                for_each_index_tuple(&parts.iter().map(|p| p.len()).collect::<Vec<_>>(), |idx| {
                    let mut point = Vec::with_capacity(dims.iter().sum());
                    let mut prob = 1.0;
                    for (p, &i) in parts.iter().zip(idx) {
                        point.extend_from_slice(&p.atoms()[i].point);
                        prob *= p.atoms()[i].prob;
                    }
                    atoms.push(Atom { point, prob });
                });
                FiniteSupportDist::new(atoms).ok()
            }
            _ => None,
        }
    }

    /// Closed-form `P(|X| > t)` for scalar sources, when one is known.
    pub fn abs_tail(&self, t: f64) -> Option<f64> {
        if self.dim() != 1 {
            return None;
        }
        if t < 0.0 {
            return Some(1.0);
        }
        match self {
            Source::Finite(d) => Some(d.tail_by(t, |x| x[0].abs())),
            Source::Gaussian { covariance } => {
                let sd = covariance[0][0].sqrt();
                if sd == 0.0 {
                    return Some(0.0);
                }
                Some(libm::erfc(t / (sd * std::f64::consts::SQRT_2)))
            }
            Source::SymmetricStable { index, scale } => stable::stable_abs_tail(*index, t / scale),
            Source::ParetoTail { exponent } => Some(if t < 1.0 { 1.0 } else { t.powf(-exponent) }),
            Source::Thinned { inner, keep } => inner.abs_tail(t).map(|p| keep * p),
            Source::Scaled { inner, factor } => {
                if *factor == 0.0 {
                    Some(0.0)
                } else {
                    inner.abs_tail(t / factor.abs())
                }
            }
            Source::Product { components } => components[0].abs_tail(t),
        }
    }
}

/// Law of `δ·X` with `δ ~ Bernoulli(p)`; finite inputs stay finite and exact.
pub fn thin(source: &Source, p: f64) -> Result<Source> {
    check_keep(p)?;
    match source {
        Source::Finite(d) => Ok(Source::Finite(d.thinned(p)?)),
        _ if p == 1.0 => Ok(source.clone()),
        _ => Ok(Source::Thinned { inner: Box::new(source.clone()), keep: p }),
    }
}

/// Independent components `(X_1, …, X_n)` of common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductLaw {
    components: Vec<Source>,
}

impl ProductLaw {
    pub fn new(components: Vec<Source>) -> Result<Self> {
        let d = components.first().map(Source::dim).ok_or_else(|| Error::param("empty product law"))?;
        if d == 0 || d > MAX_DIM {
            return Err(Error::param(format!("dimension {d} outside [1, {MAX_DIM}]")));
        }
        for c in &components {
            if c.dim() != d {
                return Err(Error::Dimension { expected: d, got: c.dim() });
            }
            c.validate()?;
        }
        Ok(Self { components })
    }

    pub fn iid(source: Source, n: usize) -> Result<Self> {
        Self::new(vec![source; n])
    }

    pub fn single(source: Source) -> Result<Self> {
        Self::new(vec![source])
    }

    pub fn components(&self) -> &[Source] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    /// Finite laws of all components, if every one has one.
    pub fn exact_components(&self, cap: u128) -> Option<Vec<FiniteSupportDist>> {
        self.components.iter().map(|c| c.exact_finite(cap)).collect()
    }

    /// Law of `c·X_i` componentwise.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|s| match s {
                    Source::Finite(d) => Source::Finite(d.scaled(c).expect("scaling keeps symmetry")),
                    _ => Source::Scaled { inner: Box::new(s.clone()), factor: c },
                })
                .collect(),
        }
    }
}

/// One tuple `(x_1, …, x_n)` of a product law with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub points: Vec<Vec<f64>>,
    pub prob: f64,
}

/// Visits every index tuple of a mixed-radix counter, last index fastest.
pub(crate) fn for_each_index_tuple(radices: &[usize], mut f: impl FnMut(&[usize])) {
    if radices.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; radices.len()];
    loop {
        f(&idx);
        let mut pos = radices.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < radices[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

pub(crate) fn support_size(dists: &[FiniteSupportDist]) -> u128 {
    dists.iter().map(|d| d.len() as u128).product()
}

pub(crate) fn finite_components(law: &ProductLaw, cap: u128) -> Result<Vec<FiniteSupportDist>> {
    let dists = law
        .exact_components(cap)
        .ok_or_else(|| Error::param("exact evaluation needs finite-support components"))?;
    let size = support_size(&dists);
    if size > cap {
        return Err(Error::Capacity { what: "product support", size, cap });
    }
    Ok(dists)
}

/// Visits every outcome of a finite product law as `(atom indices, prob)`.
pub(crate) fn for_each_outcome(dists: &[FiniteSupportDist], mut f: impl FnMut(&[usize], f64)) {
    let radices: Vec<usize> = dists.iter().map(FiniteSupportDist::len).collect();
    for_each_index_tuple(&radices, |idx| {
        let prob = dists.iter().zip(idx).map(|(d, &i)| d.atoms()[i].prob).product();
        f(idx, prob);
    });
}

/// All outcomes of a finite product law.
pub fn enumerate(law: &ProductLaw, cap: u128) -> Result<Vec<Outcome>> {
    let dists = finite_components(law, cap)?;
    let mut out = Vec::with_capacity(support_size(&dists) as usize);
    for_each_outcome(&dists, |idx, prob| {
        let points = dists.iter().zip(idx).map(|(d, &i)| d.atoms()[i].point.clone()).collect();
        out.push(Outcome { points, prob });
    });
    Ok(out)
}

/// A finite law given by atoms that need not be symmetric-validated; used
/// for the distribution of sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLaw {
    pub dim: usize,
    /// Row-major atom locations.
    pub points: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ExactLaw {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Merges coincident atoms, ordering them by location bits.
    fn from_map(dim: usize, map: BTreeMap<Vec<u64>, (Vec<f64>, f64)>) -> Self {
        let mut points = Vec::with_capacity(map.len() * dim);
        let mut probs = Vec::with_capacity(map.len());
        for (_, (p, w)) in map {
            points.extend(p);
            probs.push(w);
        }
        Self { dim, points, probs }
    }
}

/// Exact law of `X_1 + … + X_n` with coincident atoms merged.
pub fn sum_distribution(law: &ProductLaw, cap: u128) -> Result<ExactLaw> {
    let dists = finite_components(law, cap)?;
    let d = law.dim();
    let mut map: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
    let mut s = vec![0.0; d];
    for_each_outcome(&dists, |idx, prob| {
        s.iter_mut().for_each(|v| *v = 0.0);
        for (dist, &i) in dists.iter().zip(idx) {
            for (acc, v) in s.iter_mut().zip(&dist.atoms()[i].point) {
                *acc += v;
            }
        }
        map.entry(point_key(&s)).or_insert_with(|| (s.clone(), 0.0)).1 += prob;
    });
    Ok(ExactLaw::from_map(d, map))
}

/// `count` draws stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// RFC-4180 CSV, one row per vector, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        out.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for row in self.rows() {
            out.write_record(row.iter().map(|v| crate::report::fmt_f64(*v)))
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Draws `count` vectors from `source`; bit-identical for a given key and
/// count regardless of the worker pool.
pub fn sample(source: &Source, count: usize, key: &StreamKey) -> Result<Samples> {
    if count == 0 {
        return Err(Error::param("sample count must be positive"));
    }
    let sampler = Sampler::compile(source)?;
    Ok(sampler.sample(count, key))
}

/// Draws `count` realizations of `X_1 + … + X_n`.
pub fn sample_sum(law: &ProductLaw, count: usize, key: &StreamKey) -> Result<Samples> {
    if count == 0 {
        return Err(Error::param("sample count must be positive"));
    }
    let samplers = law.components().iter().map(Sampler::compile).collect::<Result<Vec<_>>>()?;
    Ok(Sampler::sample_sum(&samplers, law.dim(), count, key))
}
