//! Majorisation of real sequences, its decomposition into a mixture of
//! permutations, and domination of majorised weighted sums.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::distributions::{sum_distribution, ProductLaw, Source, PRODUCT_CAP};
use crate::dominance::{check_domination, DominationQuery, DominationReport};
use crate::error::{Error, Result};
use crate::geometry::{NormFamily, NormSpec};
use crate::inequalities::Transform;
use crate::rng::StreamKey;
use crate::stats::{compare_le, Estimator, Interval, SlackReport, TailEstimate, Verdict, EXACT_TOL};
use crate::tails::family_tails;
use crate::weakborell::{check_wb, wb_tensorize_constants, WBParams, WBReport, DEFAULT_LAMBDAS};

/// Default tolerance on partial sums.
pub const MAJORISATION_TOL: f64 = 1e-9;

/// Largest length accepted by [`decompose`].
pub const MAX_DECOMPOSE_LEN: usize = 64;

const ZERO_ENTRY: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-10;

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::param(format!("weight lengths {} and {} must be equal and positive", a.len(), b.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::param("weights must be finite"));
    }
    Ok(())
}

/// Indices ordering `v` nonincreasingly, ties by index.
fn descending_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].total_cmp(&v[i]).then(i.cmp(&j)));
    idx
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    descending_order(v).into_iter().map(|i| v[i]).collect()
}

/// The first partial sum where `a ≺ b` fails, as a not-majorised error.
fn first_violation(a: &[f64], b: &[f64], tol: f64) -> Result<Option<Error>> {
    check_lengths(a, b)?;
    let (sa, sb) = (sorted_desc(a), sorted_desc(b));
    let n = a.len();
    let (mut pa, mut pb) = (0.0, 0.0);
    for k in 0..n {
        pa += sa[k];
        pb += sb[k];
        let bad = if k + 1 < n { pa > pb + tol } else { (pa - pb).abs() > tol };
        if bad {
            return Ok(Some(Error::NotMajorised { index: k + 1, lhs: pa, rhs: pb }));
        }
    }
    Ok(None)
}

/// Whether `a ≺ b`: partial sums of the nonincreasing rearrangement of `a`
/// stay below those of `b` and the totals agree, both up to `tol`.
pub fn is_majorised(a: &[f64], b: &[f64], tol: f64) -> Result<bool> {
    Ok(first_violation(a, b, tol)?.is_none())
}

fn require_majorised(a: &[f64], b: &[f64]) -> Result<()> {
    match first_violation(a, b, MAJORISATION_TOL)? {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// One averaging step `x_i ← t·x_i + (1-t)·x_j`, `x_j ← (1-t)·x_i + t·x_j`
/// on nonincreasingly sorted coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TStep {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

/// Chain of T-transforms carrying `b*` to `a*` (both sorted nonincreasingly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TChain {
    pub steps: Vec<TStep>,
    /// `vectors[0] = b*`, `vectors[k]` after step `k`.
    pub vectors: Vec<Vec<f64>>,
}

/// Builds at most `n - 1` T-transforms from `b*` to `a*`; each step matches
/// one more coordinate of `a*`.
pub fn t_transform_chain(a: &[f64], b: &[f64]) -> Result<TChain> {
    require_majorised(a, b)?;
    let target = sorted_desc(a);
    let mut x = sorted_desc(b);
    let n = x.len();
    let eps = EXACT_TOL * x.iter().chain(&target).fold(1.0f64, |m, v| m.max(v.abs()));
    let mut steps = Vec::new();
    let mut vectors = vec![x.clone()];
    while steps.len() < n {
        let Some(i) = (0..n).rev().find(|&i| x[i] - target[i] > eps) else { break };
        let Some(j) = (i + 1..n).find(|&j| target[j] - x[j] > eps) else { break };
        let shift = (x[i] - target[i]).min(target[j] - x[j]);
        let t = 1.0 - shift / (x[i] - x[j]);
        if x[i] - target[i] <= target[j] - x[j] {
            x[j] += x[i] - target[i];
            x[i] = target[i];
        } else {
            x[i] -= target[j] - x[j];
            x[j] = target[j];
        }
        steps.push(TStep { i, j, t });
        vectors.push(x.clone());
    }
    Ok(TChain { steps, vectors })
}

/// Doubly stochastic `D` with `a = D·b` in the original coordinates.
pub fn doubly_stochastic(a: &[f64], b: &[f64]) -> Result<DMatrix<f64>> {
    let chain = t_transform_chain(a, b)?;
    let n = a.len();
    let mut t = DMatrix::<f64>::identity(n, n);
    for s in &chain.steps {
        // left-multiply by the step matrix: mixes rows i and j
        for c in 0..n {
            let (ri, rj) = (t[(s.i, c)], t[(s.j, c)]);
            t[(s.i, c)] = s.t * ri + (1.0 - s.t) * rj;
            t[(s.j, c)] = (1.0 - s.t) * ri + s.t * rj;
        }
    }
    let (oa, ob) = (descending_order(a), descending_order(b));
    let mut d = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            d[(oa[r], ob[c])] = t[(r, c)];
        }
    }
    Ok(d)
}

/// One permutation `σ` with weight `w`; contributes `w·b_{σ(i)}` to `a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTerm {
    pub permutation: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationMixture {
    pub terms: Vec<MixtureTerm>,
    /// Largest entry left in the doubly stochastic matrix after extraction.
    pub residual: f64,
}

impl PermutationMixture {
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `Σ_σ w_σ·(b ∘ σ)`.
    pub fn reconstruct(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; b.len()];
        for term in &self.terms {
            for (o, &s) in out.iter_mut().zip(&term.permutation) {
                *o += term.weight * b[s];
            }
        }
        out
    }

    /// `Σ_σ w_σ·P_σ`.
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for term in &self.terms {
            for (r, &c) in term.permutation.iter().enumerate() {
                m[(r, c)] += term.weight;
            }
        }
        m
    }
}

/// Kuhn augmenting path from row `r` over allowed columns.
fn augment(r: usize, adj: &[Vec<bool>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
    for c in 0..adj.len() {
        if adj[r][c] && !seen[c] {
            seen[c] = true;
            if owner[c].is_none_or(|o| augment(o, adj, seen, owner)) {
                owner[c] = Some(r);
                return true;
            }
        }
    }
    false
}

fn has_perfect_matching(adj: &[Vec<bool>], rows: &[usize]) -> bool {
    let n = adj.len();
    let mut owner = vec![None; n];
    rows.iter().all(|&r| augment(r, adj, &mut vec![false; n], &mut owner))
}

/// Lexicographically smallest perfect matching `row ↦ column` on `support`.
fn smallest_matching(support: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = support.len();
    let mut adj = support.to_vec();
    if !has_perfect_matching(&adj, &(0..n).collect::<Vec<_>>()) {
        return None;
    }
    let mut perm = Vec::with_capacity(n);
    for r in 0..n {
        let rest: Vec<usize> = (r + 1..n).collect();
        let chosen = (0..n).find(|&c| {
            if !adj[r][c] {
                return false;
            }
            let mut trial = adj.clone();
            for (rr, row) in trial.iter_mut().enumerate() {
                if rr != r {
                    row[c] = false;
                }
            }
            trial[r].iter_mut().enumerate().for_each(|(cc, v)| *v = cc == c);
            has_perfect_matching(&trial, &rest)
        })?;
        for (rr, row) in adj.iter_mut().enumerate() {
            if rr != r {
                row[chosen] = false;
            }
        }
        adj[r].iter_mut().enumerate().for_each(|(cc, v)| *v = cc == chosen);
        perm.push(chosen);
    }
    Some(perm)
}

/// Drops terms until at most `(n-1)²+1` remain, keeping the weighted sum of
/// permutation matrices fixed.
fn caratheodory(mut terms: Vec<MixtureTerm>, n: usize) -> Vec<MixtureTerm> {
    let limit = (n - 1) * (n - 1) + 1;
    while terms.len() > limit {
        let m = terms.len();
        let mut a = DMatrix::<f64>::zeros(n * n + 1, m);
        for (k, t) in terms.iter().enumerate() {
            for (r, &c) in t.permutation.iter().enumerate() {
                a[(r * n + c, k)] = 1.0;
            }
            a[(n * n, k)] = 1.0;
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (idx, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| {
            if s < acc.1 {
                (i, s)
            } else {
                acc
            }
        });
        let dir: Vec<f64> = vt.row(idx).iter().copied().collect();
        // largest step keeping weights nonnegative along w - s·dir
        let step = terms
            .iter()
            .zip(&dir)
            .filter(|(_, &c)| c > 0.0)
            .map(|(t, &c)| t.weight / c)
            .fold(f64::INFINITY, f64::min);
        if !step.is_finite() {
            break;
        }
        for (t, c) in terms.iter_mut().zip(&dir) {
            t.weight -= step * c;
        }
        let drop = terms
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.weight.total_cmp(&y.1.weight))
            .map(|(i, _)| i)
            .expect("nonempty");
        terms.remove(drop);
        terms.iter_mut().for_each(|t| t.weight = t.weight.max(0.0));
    }
    terms
}

/// Greedy Birkhoff–von Neumann extraction from a doubly stochastic matrix.
pub fn birkhoff(matrix: &DMatrix<f64>) -> Result<PermutationMixture> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::param("birkhoff extraction needs a nonempty square matrix"));
    }
    let mut rest = matrix.clone();
    let mut terms = Vec::new();
    for _ in 0..n * n {
        let support: Vec<Vec<bool>> = (0..n).map(|r| (0..n).map(|c| rest[(r, c)] > ZERO_ENTRY).collect()).collect();
        let Some(perm) = smallest_matching(&support) else { break };
        let w = perm.iter().enumerate().map(|(r, &c)| rest[(r, c)]).fold(f64::INFINITY, f64::min);
        for (r, &c) in perm.iter().enumerate() {
            rest[(r, c)] = (rest[(r, c)] - w).max(0.0);
        }
        terms.push(MixtureTerm { permutation: perm, weight: w });
    }
    let residual = rest.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > RESIDUAL_TOL {
        return Err(Error::Precondition(format!("matrix is not doubly stochastic: residual entry {residual:e}")));
    }
    let terms = caratheodory(terms, n);
    Ok(PermutationMixture { terms, residual })
}

/// Writes `a` as a convex combination of permutations of `b`.
pub fn decompose(a: &[f64], b: &[f64]) -> Result<PermutationMixture> {
    if a.len() > MAX_DECOMPOSE_LEN {
        return Err(Error::Capacity { what: "decomposition length", size: a.len() as u128, cap: MAX_DECOMPOSE_LEN as u128 });
    }
    birkhoff(&doubly_stochastic(a, b)?)
}

/// Law of `Σ c_i X_i` with `X_i` iid copies of `source`.
pub fn weighted_law(source: &Source, weights: &[f64]) -> Result<ProductLaw> {
    ProductLaw::new(
        weights
            .iter()
            .map(|&c| match source {
                Source::Finite(d) => d.scaled(c).map(Source::Finite),
                _ => Ok(Source::Scaled { inner: Box::new(source.clone()), factor: c }),
            })
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Exact `E φ(‖Σ a_i X_i‖) ≤ E φ(‖Σ b_i X_i‖)` for convex nondecreasing `φ`.
pub fn schur_convexity_check(a: &[f64], b: &[f64], source: &Source, norm: &NormSpec, transform: Transform) -> Result<SlackReport> {
    require_majorised(a, b)?;
    norm.validate()?;
    let mean = |w: &[f64]| -> Result<f64> {
        let law = sum_distribution(&weighted_law(source, w)?, PRODUCT_CAP)?;
        if let Some(d) = norm.dimension() {
            if d != law.dim {
                return Err(Error::Dimension { expected: d, got: law.dim });
            }
        }
        Ok((0..law.len()).map(|i| law.probs[i] * transform.apply(norm.eval(law.point(i)))).sum())
    };
    Ok(SlackReport::exact("schur convexity", mean(a)?, mean(b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedDominationReport {
    pub params: WBParams,
    /// `max{2/θ, 96·C·9^δ, 12·C·9^δ/(δ-1)}`
    pub kappa_expanded: Option<f64>,
    /// `max{1/θ', C'/(δ-1)}` with the tensorised constants `(C', θ')`.
    pub kappa_tensorised: Option<f64>,
    pub forms_agree: bool,
    pub kappa: f64,
    pub lambda: f64,
    pub certification: WBReport,
    pub domination: DominationReport,
}

/// Both closed forms of the domination constant for majorised weights.
pub fn majorised_kappa(params: WBParams) -> Option<(f64, f64)> {
    if params.delta <= 1.0 {
        return None;
    }
    let nine = 9f64.powf(params.delta);
    let (c, d, th) = (params.c, params.delta, params.theta);
    let expanded = (2.0 / th).max(96.0 * c * nine).max(12.0 * c * nine / (d - 1.0));
    let t = wb_tensorize_constants(params);
    let tensorised = (1.0 / t.theta).max(t.c / (d - 1.0));
    Some((expanded, tensorised))
}

/// Inputs of [`weighted_domination_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDominationQuery {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub source: Source,
    pub params: WBParams,
    pub family: NormFamily,
    pub estimator: Estimator,
    /// Replaces the formula constant; required when `δ = 1`.
    pub kappa_override: Option<f64>,
}

/// Certifies the summand law, then checks that `Σ b_i X_i` dominates
/// `Σ a_i X_i` with `λ = 2`.
pub fn weighted_domination_experiment(q: &WeightedDominationQuery, key: &StreamKey) -> Result<WeightedDominationReport> {
    q.params.validate()?;
    require_majorised(&q.a, &q.b)?;
    if q.params.delta < 1.0 || (q.params.delta == 1.0 && q.kappa_override.is_none()) {
        return Err(Error::param(format!(
            "delta = {} ≤ 1 has no domination constant; use the counterexample experiment or give a kappa override",
            q.params.delta
        )));
    }
    let forms = majorised_kappa(q.params);
    let forms_agree = forms.is_none_or(|(e, t)| (e - t).abs() <= EXACT_TOL * e.abs());
    let kappa = match (q.kappa_override, forms) {
        (Some(k), _) => k,
        (None, Some((e, _))) => e,
        (None, None) => unreachable!("rejected above"),
    };
    let single = ProductLaw::single(q.source.clone())?;
    let certification = check_wb(&single, q.params, &q.family, &DEFAULT_LAMBDAS, &q.estimator, &key.child("certify"))?;
    if certification.verdict == Verdict::Violated {
        return Err(Error::Precondition("summand law does not satisfy the weak Borell bound".into()));
    }
    let query = DominationQuery {
        x: weighted_law(&q.source, &q.a)?,
        y: weighted_law(&q.source, &q.b)?,
        kappa,
        lambda: 2.0,
        family: q.family.clone(),
        estimator: q.estimator,
    };
    let domination = check_domination(&query, key)?;
    Ok(WeightedDominationReport {
        params: q.params,
        kappa_expanded: forms.map(|f| f.0),
        kappa_tensorised: forms.map(|f| f.1),
        forms_agree,
        kappa,
        lambda: 2.0,
        certification,
        domination,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub n: u64,
    /// `n^{1/δ-1}/λ`
    pub threshold: f64,
    /// `P(|X_1| > 1)`
    pub lhs: TailEstimate,
    /// `κ·P(λ|X_1| > n^{1/δ-1})`
    pub rhs: f64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    pub ratio: f64,
    /// `Violated` when the domination inequality certainly fails.
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub delta: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub rows: Vec<CounterexampleRow>,
    /// Smallest `n > 1` whose row is violated.
    pub witness: Option<u64>,
}

/// Equal weights `1/n` against `(1, 0, …, 0)` for a symmetric δ-stable law
/// with `δ < 1`: `Σ X_i/n` has the law of `n^{1/δ-1}·X_1`.
pub fn counterexample_experiment(
    delta: f64,
    n_grid: &[u64],
    kappa: f64,
    lambda: f64,
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<CounterexampleReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta = {delta} outside (0,1)")));
    }
    if !(kappa >= 1.0 && kappa.is_finite() && lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::param("kappa and lambda must be finite and ≥ 1"));
    }
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::param("n grid must be nonempty with positive entries"));
    }
    let law = ProductLaw::single(Source::SymmetricStable { index: delta, scale: 1.0 })?;
    let thresholds: Vec<f64> = n_grid.iter().map(|&n| (n as f64).powf(1.0 / delta - 1.0) / lambda).collect();
    let mut levels = vec![1.0];
    levels.extend_from_slice(&thresholds);
    let tails = family_tails(&law, &NormFamily::single(NormSpec::euclidean()), &levels, estimator, key)?;
    let lhs = tails[0];
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut witness = None;
    for (k, (&n, &threshold)) in n_grid.iter().zip(&thresholds).enumerate() {
        let p = tails[k + 1];
        let rhs: Interval = p.interval().scale(kappa);
        let verdict = compare_le(lhs.interval(), rhs);
        if n > 1 && verdict == Verdict::Violated && witness.is_none() {
            witness = Some(n);
        }
        rows.push(CounterexampleRow {
            n,
            threshold,
            lhs,
            rhs: kappa * p.estimate,
            rhs_lower: rhs.lo,
            rhs_upper: rhs.hi,
            ratio: lhs.estimate / (kappa * p.estimate),
            verdict,
        });
    }
    Ok(CounterexampleReport { delta, kappa, lambda, rows, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::FiniteSupportDist;

    fn max_err(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn predicate_examples() {
        let third = 1.0 / 3.0;
        assert!(is_majorised(&[third; 3], &[1.0, 0.0, 0.0], MAJORISATION_TOL).unwrap());
        assert!(is_majorised(&[0.2, 0.7, -1.0], &[0.2, 0.7, -1.0], MAJORISATION_TOL).unwrap());
        assert!(!is_majorised(&[0.6, 0.5], &[1.0, 0.0], MAJORISATION_TOL).unwrap());
        assert!(is_majorised(&[1.0], &[1.0, 2.0], 1e-9).is_err());
        match first_violation(&[1.0, 0.0], &[0.5, 0.5], 1e-9).unwrap() {
            Some(Error::NotMajorised { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_point_mixture() {
        let m = decompose(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
        assert_eq!(m.terms.len(), 2);
        assert_eq!(m.terms[0].permutation, vec![0, 1]);
        assert_eq!(m.terms[1].permutation, vec![1, 0]);
        for t in &m.terms {
            assert!((t.weight - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_vectors_give_identity() {
        let v = [0.3, -1.0, 2.0, 2.0];
        let m = decompose(&v, &v).unwrap();
        assert_eq!(m.terms, vec![MixtureTerm { permutation: vec![0, 1, 2, 3], weight: 1.0 }]);
    }

    #[test]
    fn uniform_from_point_mass() {
        let a = [1.0 / 3.0; 3];
        let b = [1.0, 0.0, 0.0];
        let chain = t_transform_chain(&a, &b).unwrap();
        assert!(chain.steps.len() <= 2);
        let m = decompose(&a, &b).unwrap();
        assert!(max_err(&m.reconstruct(&b), &a) < 1e-9);
        assert!((m.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn not_majorised_is_reported() {
        assert!(matches!(decompose(&[1.0, 0.0], &[0.5, 0.5]), Err(Error::NotMajorised { .. })));
    }

    #[test]
    fn schur_examples() {
        let rad = Source::Finite(FiniteSupportDist::rademacher());
        let r = schur_convexity_check(&[0.5, 0.5], &[1.0, 0.0], &rad, &NormSpec::euclidean(), Transform::ShiftedPlus(1.0)).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let three = Source::Finite(FiniteSupportDist::from_pairs(1, &[(vec![3.0], 1.0)]).unwrap());
        let r = schur_convexity_check(&[0.5, 0.5], &[1.0, 0.0], &three, &NormSpec::euclidean(), Transform::ShiftedPlus(1.0)).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 2.0).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn kappa_forms() {
        let (e, t) = majorised_kappa(WBParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
        assert_eq!(e, 7776.0);
        assert!((t - 7776.0).abs() < 1e-12 * 7776.0);
        assert!(majorised_kappa(WBParams::new(1.0, 1.0, 0.5).unwrap()).is_none());
    }

    #[test]
    fn delta_at_most_one_needs_override() {
        let q = WeightedDominationQuery {
            a: vec![0.5, 0.5],
            b: vec![1.0, 0.0],
            source: Source::ParetoTail { exponent: 1.0 },
            params: WBParams::new(1.0, 1.0, 0.5).unwrap(),
            family: NormFamily::single(NormSpec::euclidean()),
            estimator: Estimator::Exact,
            kappa_override: None,
        };
        assert!(matches!(weighted_domination_experiment(&q, &StreamKey::new(0, "w")), Err(Error::Parameter(_))));
    }

    #[test]
    fn counterexample_table_is_analytic() {
        let r = counterexample_experiment(0.5, &[1, 4, 16], 100.0, 2.0, &Estimator::Exact, &StreamKey::new(0, "c")).unwrap();
        assert!((r.rows[0].lhs.estimate - 0.5425606253786865).abs() < 2e-7);
        assert_eq!(r.rows[0].verdict, Verdict::Holds);
        assert!(r.rows.windows(2).all(|w| w[0].ratio < w[1].ratio));
    }
}
