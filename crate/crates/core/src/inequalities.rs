//! Classical inequalities for Rademacher sums and for sums of independent
//! symmetric vectors, checked exactly by enumeration or by Monte Carlo.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{self, ProductLaw, Sampler, PRODUCT_CAP};
use crate::error::{Error, Result};
use crate::geometry::NormSpec;
use crate::rng::{map_chunks, StreamKey};
use crate::stats::{Estimator, Interval, Method, SlackReport, TailEstimate, Verdict};

/// Largest number of signs handled by exact enumeration.
pub const SIGN_CAP: usize = 22;

const BLOCK_BITS: u32 = 12;

/// Vectors `v_1, …, v_n` and a norm; the object `Σ ε_i v_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignInstance {
    pub vectors: Vec<Vec<f64>>,
    pub norm: NormSpec,
}

impl SignInstance {
    pub fn new(vectors: Vec<Vec<f64>>, norm: NormSpec) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::param("a sign instance needs at least one vector"));
        }
        norm.validate()?;
        let d = norm.dimension().unwrap_or(vectors[0].len());
        for v in &vectors {
            if v.len() != d {
                return Err(Error::Dimension { expected: d, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::param("vector entries must be finite"));
            }
        }
        Ok(Self { vectors, norm })
    }

    /// Scalar instance under the absolute value.
    pub fn scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| vec![*v]).collect(), NormSpec::euclidean())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    fn check_cap(&self) -> Result<()> {
        if self.len() > SIGN_CAP {
            return Err(Error::Capacity {
                what: "sign patterns",
                size: 1u128 << self.len(),
                cap: 1u128 << SIGN_CAP,
            });
        }
        Ok(())
    }

    /// Instance with `v_i` replaced by `c_i·v_i`.
    pub fn weighted(&self, c: &[f64]) -> Result<Self> {
        if c.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), got: c.len() });
        }
        let vectors = self.vectors.iter().zip(c).map(|(v, w)| v.iter().map(|x| x * w).collect()).collect();
        Ok(Self { vectors, norm: self.norm.clone() })
    }
}

/// Function applied to `‖Σ ε_i v_i‖` before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "shift", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `u ↦ (u - a)_+`
    ShiftedPlus(f64),
    Square,
}

impl Transform {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Transform::Identity => u,
            Transform::ShiftedPlus(a) => (u - a).max(0.0),
            Transform::Square => u * u,
        }
    }
}

/// Folds `f` over `‖Σ ε_i v_i‖` for the `2^(n-1)` patterns with `ε_n = +1`.
///
/// Patterns are visited in Gray-code order inside fixed blocks, each block
/// starting from a freshly computed sum; block results are merged in block
/// order so the result does not depend on scheduling.
pub(crate) fn fold_sign_norms<A, I, F, G>(vectors: &[Vec<f64>], norm: &NormSpec, init: I, fold: F, merge: G) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, f64) + Sync,
    G: Fn(A, A) -> A,
{
    let n = vectors.len();
    let d = vectors[0].len();
    let free = n - 1;
    let total: u64 = 1 << free;
    let block = 1u64 << BLOCK_BITS.min(free as u32);
    let blocks = total / block;
    let run_block = |b: u64| {
        let mut acc = init();
        let start = b * block;
        let gray = start ^ (start >> 1);
        let mut sum = vec![0.0; d];
        for (i, v) in vectors.iter().enumerate() {
            let negative = i < free && (gray >> i) & 1 == 1;
            for (s, x) in sum.iter_mut().zip(v) {
                if negative {
                    *s -= x;
                } else {
                    *s += x;
                }
            }
        }
        let mut g = gray;
        fold(&mut acc, norm.eval(&sum));
        for j in start + 1..start + block {
            let bit = j.trailing_zeros() as usize;
            g ^= 1 << bit;
            let now_negative = (g >> bit) & 1 == 1;
            for (s, x) in sum.iter_mut().zip(&vectors[bit]) {
                if now_negative {
                    *s -= 2.0 * x;
                } else {
                    *s += 2.0 * x;
                }
            }
            fold(&mut acc, norm.eval(&sum));
        }
        acc
    };
    let parts: Vec<A> = if blocks == 1 {
        vec![run_block(0)]
    } else {
        (0..blocks).into_par_iter().map(run_block).collect()
    };
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one block");
    it.fold(first, merge)
}

/// Exact `P_ε(‖Σ ε_i v_i‖ > t)`, a dyadic rational `k / 2^(n-1)`.
pub fn sign_tail_exact(inst: &SignInstance, t: f64) -> Result<f64> {
    inst.check_cap()?;
    let count = fold_sign_norms(&inst.vectors, &inst.norm, || 0u64, |c, x| *c += (x > t) as u64, |a, b| a + b);
    Ok(count as f64 / (1u64 << (inst.len() - 1)) as f64)
}

/// Exact `E_ε transform(‖Σ ε_i v_i‖)`.
pub fn sign_mean_exact(inst: &SignInstance, transform: Transform) -> Result<f64> {
    inst.check_cap()?;
    let s = fold_sign_norms(&inst.vectors, &inst.norm, || 0.0, |a, x| *a += transform.apply(x), |a, b| a + b);
    Ok(s / (1u64 << (inst.len() - 1)) as f64)
}

/// Several exact sign statistics in one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignMoments {
    pub mean: f64,
    pub mean_square: f64,
}

pub fn sign_moments_exact(inst: &SignInstance) -> Result<SignMoments> {
    inst.check_cap()?;
    let (m1, m2) = fold_sign_norms(
        &inst.vectors,
        &inst.norm,
        || (0.0, 0.0),
        |a, x| {
            a.0 += x;
            a.1 += x * x;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let w = (1u64 << (inst.len() - 1)) as f64;
    Ok(SignMoments { mean: m1 / w, mean_square: m2 / w })
}

/// Monte Carlo `P_ε(‖Σ ε_i v_i‖ > t)` with a Clopper–Pearson interval.
pub fn sign_tail_mc(inst: &SignInstance, t: f64, samples: u64, confidence: f64, key: &StreamKey) -> Result<TailEstimate> {
    Estimator::MonteCarlo { samples, confidence }.validate()?;
    let d = inst.dim();
    let hits: u64 = map_chunks(key, samples as usize, |rng, range| {
        let mut sum = vec![0.0; d];
        let mut count = 0u64;
        for _ in range {
            sum.iter_mut().for_each(|s| *s = 0.0);
            let mut bits = 0u64;
            for (i, v) in inst.vectors.iter().enumerate() {
                if i % 64 == 0 {
                    bits = rng.random();
                }
                let neg = (bits >> (i % 64)) & 1 == 1;
                for (s, x) in sum.iter_mut().zip(v) {
                    if neg {
                        *s -= x;
                    } else {
                        *s += x;
                    }
                }
            }
            count += (inst.norm.eval(&sum) > t) as u64;
        }
        count
    })
    .into_iter()
    .sum();
    Ok(TailEstimate::from_counts(hits, samples, confidence))
}

/// `P(‖S‖ > s+t) ≤ 4·P(‖S‖ > s)·P(‖S‖ > t)` for `S = Σ ε_i v_i`.
pub fn verify_kahane(inst: &SignInstance, s: f64, t: f64) -> Result<SlackReport> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::param("Kahane levels must be positive"));
    }
    let lhs = sign_tail_exact(inst, s + t)?;
    let rhs = 4.0 * sign_tail_exact(inst, s)? * sign_tail_exact(inst, t)?;
    Ok(SlackReport::exact("kahane", lhs, rhs))
}

/// `E‖S‖² ≤ 2(E‖S‖)²`.
pub fn verify_l1l2(inst: &SignInstance) -> Result<SlackReport> {
    let m = sign_moments_exact(inst)?;
    Ok(SlackReport::exact("l1-l2", m.mean_square, 2.0 * m.mean * m.mean))
}

/// `½(1-θ)² ≤ P(‖S‖ > θ·E‖S‖)`, reported with the constant on the left.
pub fn verify_pz(inst: &SignInstance, theta: f64) -> Result<SlackReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param(format!("theta {theta} outside (0,1)")));
    }
    let mean = sign_mean_exact(inst, Transform::Identity)?;
    let p = sign_tail_exact(inst, theta * mean)?;
    Ok(SlackReport::exact("paley-zygmund", 0.5 * (1.0 - theta).powi(2), p))
}

/// `E‖Σ ε_i a_i v_i‖ ≤ E‖Σ ε_i b_i v_i‖` when `|a_i| ≤ |b_i|`.
pub fn verify_contraction(inst: &SignInstance, a: &[f64], b: &[f64]) -> Result<SlackReport> {
    if a.len() != inst.len() || b.len() != inst.len() {
        return Err(Error::Dimension { expected: inst.len(), got: a.len().min(b.len()) });
    }
    if let Some(i) = a.iter().zip(b).position(|(x, y)| x.abs() > y.abs()) {
        return Err(Error::param(format!("|a_{i}| = {} exceeds |b_{i}| = {}", a[i].abs(), b[i].abs())));
    }
    let lhs = sign_mean_exact(&inst.weighted(a)?, Transform::Identity)?;
    let rhs = sign_mean_exact(&inst.weighted(b)?, Transform::Identity)?;
    Ok(SlackReport::exact("contraction", lhs, rhs))
}

/// Levels for the sum inequalities; `t` is shared by all four.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumLevels {
    pub s: f64,
    pub t: f64,
    pub u: f64,
}

impl SumLevels {
    pub fn uniform(t: f64) -> Self {
        Self { s: t, t, u: t }
    }
}

/// Results of one pass over `(X_1, …, X_n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumInequalityReport {
    pub levels: SumLevels,
    /// `P(S_n^* > t) ≤ 2P(‖S_n‖ > t)`
    pub levy: SlackReport,
    /// `P(X_n^* > t) ≤ 2P(‖S_n‖ > t)`
    pub max_summand: SlackReport,
    /// `P(S_n^* > s+t+u) ≤ P(X_n^* > s) + 2P(S_n^* > t)P(‖S_n‖ > u)`
    pub hoffmann_jorgensen: SlackReport,
    /// `Σ_j P(‖X_j‖ > t) ≤ P(X_n^* > t) / (1 - P(X_n^* > t))`; absent when
    /// `P(X_n^* > t) = 1`.
    pub summand_tails: Option<SlackReport>,
    pub summand_tails_skipped: bool,
}

impl SumInequalityReport {
    pub fn reports(&self) -> Vec<&SlackReport> {
        let mut v = vec![&self.levy, &self.max_summand, &self.hoffmann_jorgensen];
        v.extend(self.summand_tails.as_ref());
        v
    }

    pub fn verdict(&self) -> Verdict {
        self.reports().iter().fold(Verdict::Holds, |v, r| v.worst(r.verdict))
    }
}

// Event indices in the per-outcome tallies.
const LEVY: usize = 0; // S* > t
const SUM_T: usize = 1; // ‖S_n‖ > t
const MAX_T: usize = 2; // X* > t
const HJ: usize = 3; // S* > s+t+u
const MAX_S: usize = 4; // X* > s
const SUM_U: usize = 5; // ‖S_n‖ > u
const EVENTS: usize = 6;

fn tally(points: &[&[f64]], norm: &NormSpec, lv: &SumLevels, partial: &mut [f64], out: &mut [bool]) {
    partial.iter_mut().for_each(|v| *v = 0.0);
    let mut s_star: f64 = 0.0;
    let mut x_star: f64 = 0.0;
    for (j, x) in points.iter().enumerate() {
        partial.iter_mut().zip(x.iter()).for_each(|(p, v)| *p += v);
        s_star = s_star.max(norm.eval(partial));
        let xn = norm.eval(x);
        x_star = x_star.max(xn);
        out[EVENTS + j] = xn > lv.t;
    }
    let sn = norm.eval(partial);
    out[LEVY] = s_star > lv.t;
    out[SUM_T] = sn > lv.t;
    out[MAX_T] = x_star > lv.t;
    out[HJ] = s_star > lv.s + lv.t + lv.u;
    out[MAX_S] = x_star > lv.s;
    out[SUM_U] = sn > lv.u;
}

/// Checks the four sum inequalities in a single pass over outcomes (exact)
/// or draws (Monte Carlo).
pub fn verify_sum_inequalities(
    law: &ProductLaw,
    norm: &NormSpec,
    levels: SumLevels,
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<SumInequalityReport> {
    estimator.validate()?;
    norm.validate()?;
    if let Some(d) = norm.dimension() {
        if d != law.dim() {
            return Err(Error::Dimension { expected: d, got: law.dim() });
        }
    }
    if levels.s < 0.0 || levels.t < 0.0 || levels.u < 0.0 {
        return Err(Error::param("levels must be nonnegative"));
    }
    let n = law.len();
    let d = law.dim();
    let exact = estimator.allows_exact().then(|| law.exact_components(PRODUCT_CAP)).flatten().filter(|c| {
        distributions::support_size(c) <= PRODUCT_CAP
    });
    let (probs, method): (Vec<Interval>, Method) = match (exact, estimator.mc_budget()) {
        (Some(dists), _) => {
            let mut acc = vec![0.0; EVENTS + n];
            let mut partial = vec![0.0; d];
            let mut flags = vec![false; EVENTS + n];
            distributions::for_each_outcome(&dists, |idx, p| {
                let pts: Vec<&[f64]> = dists.iter().zip(idx).map(|(dd, &i)| dd.atoms()[i].point.as_slice()).collect();
                tally(&pts, norm, &levels, &mut partial, &mut flags);
                for (a, f) in acc.iter_mut().zip(&flags) {
                    if *f {
                        *a += p;
                    }
                }
            });
            (acc.into_iter().map(|p| Interval::point(p.min(1.0))).collect(), Method::Exact)
        }
        (None, Some((samples, confidence))) => {
            let samplers = law.components().iter().map(Sampler::compile).collect::<Result<Vec<_>>>()?;
            let counts = map_chunks(key, samples as usize, |rng, range| {
                let mut c = vec![0u64; EVENTS + n];
                let mut buf = vec![0.0; n * d];
                let mut partial = vec![0.0; d];
                let mut flags = vec![false; EVENTS + n];
                for _ in range {
                    for (j, s) in samplers.iter().enumerate() {
                        s.draw(rng, &mut buf[j * d..(j + 1) * d]);
                    }
                    let pts: Vec<&[f64]> = buf.chunks_exact(d).collect();
                    tally(&pts, norm, &levels, &mut partial, &mut flags);
                    for (a, f) in c.iter_mut().zip(&flags) {
                        *a += *f as u64;
                    }
                }
                c
            });
            let mut total = vec![0u64; EVENTS + n];
            for c in counts {
                total.iter_mut().zip(c).for_each(|(a, b)| *a += b);
            }
            let ivs = total.iter().map(|&h| TailEstimate::from_counts(h, samples, confidence).interval()).collect();
            let points: Vec<f64> = total.iter().map(|&h| h as f64 / samples as f64).collect();
            return Ok(assemble(levels, &points, ivs, Method::Mc { samples, confidence }));
        }
        (None, None) => {
            return Err(Error::param("exact evaluation needs finite-support components within the cap"));
        }
    };
    let points: Vec<f64> = probs.iter().map(|iv| iv.lo).collect();
    Ok(assemble(levels, &points, probs, method))
}

fn assemble(levels: SumLevels, p: &[f64], iv: Vec<Interval>, method: Method) -> SumInequalityReport {
    let rep = |label: &str, lhs: f64, rhs: f64, l: Interval, r: Interval| {
        SlackReport::from_intervals(label, lhs, rhs, l, r, method)
    };
    let levy = rep("levy", p[LEVY], 2.0 * p[SUM_T], iv[LEVY], iv[SUM_T].scale(2.0));
    let max_summand = rep("max-summand", p[MAX_T], 2.0 * p[SUM_T], iv[MAX_T], iv[SUM_T].scale(2.0));
    let hj_rhs = p[MAX_S] + 2.0 * p[LEVY] * p[SUM_U];
    let hj_iv = iv[MAX_S] + (iv[LEVY] * iv[SUM_U]).scale(2.0);
    let hoffmann_jorgensen = rep("hoffmann-jorgensen", p[HJ], hj_rhs, iv[HJ], hj_iv);
    let (summand_tails, summand_tails_skipped) = if p[MAX_T] >= 1.0 || iv[MAX_T].hi >= 1.0 {
        (None, true)
    } else {
        let sum: f64 = p[EVENTS..].iter().sum();
        let sum_iv = iv[EVENTS..].iter().fold(Interval::point(0.0), |a, b| a + *b);
        let ratio = |q: f64| q / (1.0 - q);
        (Some(rep("summand-tails", sum, ratio(p[MAX_T]), sum_iv, iv[MAX_T].map_monotone(ratio))), false)
    };
    SumInequalityReport { levels, levy, max_summand, hoffmann_jorgensen, summand_tails, summand_tails_skipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{FiniteSupportDist, Source};

    fn ones(n: usize) -> SignInstance {
        SignInstance::scalars(&vec![1.0; n]).unwrap()
    }

    #[test]
    fn three_signs_tail() {
        assert_eq!(sign_tail_exact(&ones(3), 1.0).unwrap(), 0.25);
        assert_eq!(sign_tail_exact(&ones(3), -0.5).unwrap(), 1.0);
        assert_eq!(sign_tail_exact(&ones(1), 0.5).unwrap(), 1.0);
    }

    #[test]
    fn sign_means() {
        assert_eq!(sign_mean_exact(&ones(3), Transform::ShiftedPlus(1.0)).unwrap(), 0.5);
        assert_eq!(sign_mean_exact(&SignInstance::scalars(&[2.0]).unwrap(), Transform::ShiftedPlus(1.0)).unwrap(), 1.0);
        assert_eq!(sign_mean_exact(&ones(2), Transform::Square).unwrap(), 2.0);
    }

    #[test]
    fn gray_blocks_match_direct_enumeration() {
        let vs: Vec<f64> = (0..15).map(|i| 0.3 + (i as f64 * 0.77).sin()).collect();
        let inst = SignInstance::scalars(&vs).unwrap();
        let n = vs.len();
        let mut direct = 0.0;
        for mask in 0u32..(1 << n) {
            let s: f64 = vs.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v }).sum();
            direct += s.abs();
        }
        direct /= (1u32 << n) as f64;
        let got = sign_mean_exact(&inst, Transform::Identity).unwrap();
        assert!((got - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(sign_tail_exact(&ones(23), 1.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn kahane_equality_case() {
        let r = verify_kahane(&ones(3), 1.0, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.slack), (0.25, 0.25, 0.0));
        assert!(r.holds);
        let single = verify_kahane(&ones(1), 1.0, 1.0).unwrap();
        assert_eq!(single.lhs, 0.0);
    }

    #[test]
    fn l1l2_extremal_case() {
        let r = verify_l1l2(&ones(2)).unwrap();
        assert_eq!((r.lhs, r.rhs, r.slack), (2.0, 2.0, 0.0));
        let r1 = verify_l1l2(&ones(1)).unwrap();
        assert_eq!((r1.lhs, r1.rhs), (1.0, 2.0));
    }

    #[test]
    fn paley_zygmund_examples() {
        let r = verify_pz(&ones(1), 0.5).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.125, 1.0));
        let r = verify_pz(&ones(2), 0.9).unwrap();
        assert!((r.lhs - 0.005).abs() < 1e-15);
        assert_eq!(r.rhs, 0.5);
    }

    #[test]
    fn contraction_examples() {
        let inst = ones(2);
        let r = verify_contraction(&inst, &[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 2.0));
        let z = verify_contraction(&inst, &[0.0, 0.0], &[0.3, 2.0]).unwrap();
        assert_eq!(z.lhs, 0.0);
        assert!(verify_contraction(&inst, &[2.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn sum_inequalities_three_rademachers() {
        let law = ProductLaw::iid(Source::Finite(FiniteSupportDist::rademacher()), 3).unwrap();
        let r = verify_sum_inequalities(
            &law,
            &NormSpec::euclidean(),
            SumLevels::uniform(1.0),
            &Estimator::Exact,
            &StreamKey::new(0, "x"),
        )
        .unwrap();
        assert_eq!(r.max_summand.lhs, 0.0);
        assert_eq!(r.max_summand.rhs, 0.5);
        assert_eq!(r.verdict(), Verdict::Holds);
        assert!(!r.summand_tails_skipped);
    }

    #[test]
    fn single_summand_levy_is_trivial() {
        let d = FiniteSupportDist::from_pairs(1, &[(vec![2.0], 0.5)]).unwrap();
        let law = ProductLaw::single(d.into()).unwrap();
        let r = verify_sum_inequalities(
            &law,
            &NormSpec::euclidean(),
            SumLevels::uniform(1.0),
            &Estimator::Exact,
            &StreamKey::new(0, "x"),
        )
        .unwrap();
        assert_eq!(r.levy.lhs, 0.5);
        assert_eq!(r.levy.rhs, 1.0);
    }

    #[test]
    fn summand_tail_skipped_when_certain() {
        let law = ProductLaw::iid(Source::Finite(FiniteSupportDist::rademacher()), 2).unwrap();
        let r = verify_sum_inequalities(
            &law,
            &NormSpec::euclidean(),
            SumLevels::uniform(0.5),
            &Estimator::Exact,
            &StreamKey::new(0, "x"),
        )
        .unwrap();
        assert!(r.summand_tails_skipped);
        assert!(r.summand_tails.is_none());
    }

    #[test]
    fn sum_inequalities_mc_gaussian() {
        let law = ProductLaw::iid(Source::gaussian(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), 3).unwrap();
        let r = verify_sum_inequalities(
            &law,
            &NormSpec::lp(1.0),
            SumLevels::uniform(1.5),
            &Estimator::mc(100_000),
            &StreamKey::new(8, "sum-mc"),
        )
        .unwrap();
        assert_ne!(r.verdict(), Verdict::Violated);
        assert!(matches!(r.levy.method, Method::Mc { .. }));
    }

    #[test]
    fn mc_sign_tail_agrees_with_exact() {
        let inst = SignInstance::new(
            vec![vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.7, 0.7], vec![1.2, -0.1]],
            NormSpec::euclidean(),
        )
        .unwrap();
        let exact = sign_tail_exact(&inst, 1.5).unwrap();
        let mc = sign_tail_mc(&inst, 1.5, 100_000, 0.999, &StreamKey::new(1, "mc")).unwrap();
        assert!(mc.lower <= exact && exact <= mc.upper, "{exact} not in [{}, {}]", mc.lower, mc.upper);
    }
}
