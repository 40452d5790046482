//! The proxy `E min{E_ε(‖Σ ε_i X_i‖ - 1)_+, 1}`, its two-sided bounds,
//! `(κ, λ)`-domination checks over norm families, and the tensorisation
//! experiments built from them.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::{self, split_scheme, thin, ProductLaw, Sampler, Source, PRODUCT_CAP};
use crate::error::{Error, Result};
use crate::geometry::{NormFamily, NormSpec};
use crate::inequalities::{fold_sign_norms, sign_mean_exact, SignInstance, Transform, SIGN_CAP};
use crate::rng::{map_chunks, StreamKey};
use crate::stats::{compare_le, Estimator, Method, SlackReport, TailEstimate, Verdict};
use crate::tails::family_tails;

/// Cap on outcomes × sign patterns for exact proxy evaluation.
pub const JOINT_CAP: u128 = 100_000_000;

/// Largest `n` for the joint Bernoulli × sign enumeration.
pub const REMOVEDELTA_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyMethod {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyValue {
    pub value: f64,
    pub method: ProxyMethod,
    pub std_error: Option<f64>,
    pub outer_samples: Option<u64>,
    /// `None` when the inner sign average is exact.
    pub inner_samples: Option<u64>,
}

/// `E_ε(‖Σ ε_i x_i‖ - 1)_+`, skipping zero vectors.
fn inner_shifted_mean(points: &[&[f64]], norm: &NormSpec) -> f64 {
    let vs: Vec<Vec<f64>> = points.iter().filter(|x| x.iter().any(|v| *v != 0.0)).map(|x| x.to_vec()).collect();
    if vs.is_empty() {
        return 0.0;
    }
    let total = fold_sign_norms(&vs, norm, || 0.0, |a, u| *a += (u - 1.0).max(0.0), |a, b| a + b);
    total / (1u64 << (vs.len() - 1)) as f64
}

/// Per-outcome `(probability, E_ε(‖Σ ε_i x_i‖ - 1)_+, ‖Σ x_i‖)`.
#[derive(Debug, Clone, Copy)]
struct ProxyOutcome {
    prob: f64,
    inner: f64,
    sum_norm: f64,
}

fn proxy_outcomes(law: &ProductLaw, norm: &NormSpec) -> Result<Vec<ProxyOutcome>> {
    check_norm(norm, law.dim())?;
    let dists = distributions::finite_components(law, PRODUCT_CAP)?;
    if law.len() > SIGN_CAP {
        return Err(Error::Capacity { what: "sign patterns", size: 1u128 << law.len(), cap: 1u128 << SIGN_CAP });
    }
    let joint = distributions::support_size(&dists) * (1u128 << (law.len() - 1));
    if joint > JOINT_CAP {
        return Err(Error::Capacity { what: "outcomes × sign patterns", size: joint, cap: JOINT_CAP });
    }
    let d = law.dim();
    let mut out = Vec::new();
    let mut s = vec![0.0; d];
    distributions::for_each_outcome(&dists, |idx, prob| {
        let pts: Vec<&[f64]> = dists.iter().zip(idx).map(|(dd, &i)| dd.atoms()[i].point.as_slice()).collect();
        s.iter_mut().for_each(|v| *v = 0.0);
        for p in &pts {
            s.iter_mut().zip(p.iter()).for_each(|(a, b)| *a += b);
        }
        out.push(ProxyOutcome { prob, inner: inner_shifted_mean(&pts, norm), sum_norm: norm.eval(&s) });
    });
    Ok(out)
}

fn check_norm(norm: &NormSpec, d: usize) -> Result<()> {
    norm.validate()?;
    match norm.dimension() {
        Some(nd) if nd != d => Err(Error::Dimension { expected: nd, got: d }),
        _ => Ok(()),
    }
}

/// Exact proxy for a finite-support product law.
pub fn proxy_exact(law: &ProductLaw, norm: &NormSpec) -> Result<ProxyValue> {
    let value = proxy_outcomes(law, norm)?.iter().map(|o| o.prob * o.inner.min(1.0)).sum::<f64>().min(1.0);
    Ok(ProxyValue { value, method: ProxyMethod::Exact, std_error: None, outer_samples: None, inner_samples: None })
}

/// How the inner sign average is computed inside [`proxy_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMode {
    /// Exact when `n` is within the sign cap, otherwise sampled with the
    /// given budget.
    Auto(u64),
    /// Always sampled.
    Mc(u64),
}

impl Default for InnerMode {
    fn default() -> Self {
        InnerMode::Auto(10_000)
    }
}

/// Monte Carlo proxy: outer expectation over draws of `(X_i)`, inner sign
/// average exact or sampled per [`InnerMode`].
pub fn proxy_mc(law: &ProductLaw, norm: &NormSpec, outer: u64, inner: InnerMode, key: &StreamKey) -> Result<ProxyValue> {
    check_norm(norm, law.dim())?;
    Estimator::mc(outer).validate()?;
    let n = law.len();
    let d = law.dim();
    let inner_budget = match inner {
        InnerMode::Auto(_) if n <= SIGN_CAP => None,
        InnerMode::Auto(b) | InnerMode::Mc(b) => {
            if b == 0 {
                return Err(Error::param("inner budget must be positive"));
            }
            Some(b)
        }
    };
    let samplers = law.components().iter().map(Sampler::compile).collect::<Result<Vec<_>>>()?;
    let parts = map_chunks(key, outer as usize, |rng, range| {
        let mut buf = vec![0.0; n * d];
        let mut s = vec![0.0; d];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in range {
            for (j, sm) in samplers.iter().enumerate() {
                sm.draw(rng, &mut buf[j * d..(j + 1) * d]);
            }
            let u = match inner_budget {
                None => {
                    let pts: Vec<&[f64]> = buf.chunks_exact(d).collect();
                    inner_shifted_mean(&pts, norm)
                }
                Some(b) => {
                    let mut acc = 0.0;
                    for _ in 0..b {
                        s.iter_mut().for_each(|v| *v = 0.0);
                        for x in buf.chunks_exact(d) {
                            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                            s.iter_mut().zip(x).for_each(|(a, v)| *a += sign * v);
                        }
                        acc += (norm.eval(&s) - 1.0).max(0.0);
                    }
                    acc / b as f64
                }
            };
            let v = u.min(1.0);
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = parts.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = outer as f64;
    let mean = sum / m;
    let var = if outer > 1 { ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
    Ok(ProxyValue {
        value: mean,
        method: ProxyMethod::Mc,
        std_error: Some((var / m).sqrt()),
        outer_samples: Some(outer),
        inner_samples: inner_budget,
    })
}

/// `1/p + 4/(1 - √(2p))`, the upper-bound constant for threshold `p`.
pub fn proxy_upper_constant(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::param(format!("threshold p = {p} outside (0, 1/2)")));
    }
    Ok(1.0 / p + 4.0 / (1.0 - (2.0 * p).sqrt()))
}

/// Default threshold; gives the constant 16.
pub const DEFAULT_PROXY_P: f64 = 0.125;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProxyBounds {
    pub alpha: f64,
    pub constant: f64,
    pub proxy: f64,
    /// `α·P(‖S‖ > 1+α) ≤ proxy`
    pub lower: SlackReport,
    /// `proxy ≤ constant·P(‖S‖ > 1)`
    pub upper: SlackReport,
}

impl ProxyBounds {
    pub fn verdict(&self) -> Verdict {
        self.lower.verdict.worst(self.upper.verdict)
    }
}

/// Checks both sides of the proxy sandwich exactly.
pub fn proxy_bound_check(law: &ProductLaw, norm: &NormSpec, alpha: f64, p: f64) -> Result<ProxyBounds> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha {alpha} outside (0,1]")));
    }
    let constant = proxy_upper_constant(p)?;
    let outs = proxy_outcomes(law, norm)?;
    let proxy = outs.iter().map(|o| o.prob * o.inner.min(1.0)).sum::<f64>().min(1.0);
    let far: f64 = outs.iter().filter(|o| o.sum_norm > 1.0 + alpha).map(|o| o.prob).sum();
    let out: f64 = outs.iter().filter(|o| o.sum_norm > 1.0).map(|o| o.prob).sum();
    Ok(ProxyBounds {
        alpha,
        constant,
        proxy,
        lower: SlackReport::exact("proxy-lower", alpha * far, proxy),
        upper: SlackReport::exact("proxy-upper", proxy, constant * out),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// `P(U_X > t) ≤ P(U_Y > t)` per grid point, `U` the inner proxy average.
    pub per_level: Vec<SlackReport>,
    /// `E min{U_X, 1} ≤ E min{U_Y, 1}`
    pub integrated: SlackReport,
}

impl ConvexityReport {
    pub fn verdict(&self) -> Verdict {
        self.per_level.iter().fold(self.integrated.verdict, |v, r| v.worst(r.verdict))
    }
}

/// Exact check of the distribution-function comparison of the inner proxy
/// average, after certifying `X_i ≺ Y_i` (κ = λ = 1) on `certify`.
pub fn conditional_convexity_check(
    x: &ProductLaw,
    y: &ProductLaw,
    norm: &NormSpec,
    t_grid: &[f64],
    certify: &NormFamily,
) -> Result<ConvexityReport> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    if x.dim() != y.dim() {
        return Err(Error::Dimension { expected: x.dim(), got: y.dim() });
    }
    let key = StreamKey::new(0, "unused");
    for (i, (xi, yi)) in x.components().iter().zip(y.components()).enumerate() {
        let px = family_tails(&ProductLaw::single(xi.clone())?, certify, &[1.0], &Estimator::Exact, &key)?;
        let py = family_tails(&ProductLaw::single(yi.clone())?, certify, &[1.0], &Estimator::Exact, &key)?;
        for ((cell, a), b) in certify.cells().iter().zip(&px).zip(&py) {
            if compare_le(a.interval(), b.interval()) != Verdict::Holds {
                return Err(Error::Precondition(format!(
                    "component {i} is not dominated under norm {} at scale {}: {} > {}",
                    cell.norm, cell.scale, a.estimate, b.estimate
                )));
            }
        }
    }
    let ox = proxy_outcomes(x, norm)?;
    let oy = proxy_outcomes(y, norm)?;
    let tail = |o: &[ProxyOutcome], t: f64| o.iter().filter(|v| v.inner > t).map(|v| v.prob).sum::<f64>();
    let per_level = t_grid
        .iter()
        .map(|&t| SlackReport::exact(format!("level {t}"), tail(&ox, t), tail(&oy, t)))
        .collect();
    let proxy = |o: &[ProxyOutcome]| o.iter().map(|v| v.prob * v.inner.min(1.0)).sum::<f64>();
    Ok(ConvexityReport { per_level, integrated: SlackReport::exact("integrated", proxy(&ox), proxy(&oy)) })
}

/// Is `Σ X_i` `(κ, λ)`-dominated by `Σ Y_i` on every cell of a norm family?
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationQuery {
    pub x: ProductLaw,
    pub y: ProductLaw,
    pub kappa: f64,
    pub lambda: f64,
    pub family: NormFamily,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationCell {
    pub norm: usize,
    pub scale: f64,
    /// `P(‖X‖ > 1)`
    pub px: TailEstimate,
    /// `P(λ‖Y‖ > 1)`
    pub py: TailEstimate,
    /// `κ·P(λ‖Y‖ > 1)`
    pub bound: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub kappa: f64,
    pub lambda: f64,
    pub cells: Vec<DominationCell>,
    pub verdict: Verdict,
    pub violated: usize,
    pub inconclusive: usize,
    pub method: Method,
}

fn check_constants(kappa: f64, lambda: f64) -> Result<()> {
    if !(kappa >= 1.0 && kappa.is_finite()) || !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::param(format!("kappa {kappa} and lambda {lambda} must be finite and ≥ 1")));
    }
    Ok(())
}

/// Per-cell comparison of `P(‖X‖ > 1)` with `κ·P(λ‖Y‖ > 1)`.
pub fn check_domination(q: &DominationQuery, key: &StreamKey) -> Result<DominationReport> {
    check_constants(q.kappa, q.lambda)?;
    q.family.validate()?;
    if q.x.dim() != q.y.dim() {
        return Err(Error::Dimension { expected: q.x.dim(), got: q.y.dim() });
    }
    let px = family_tails(&q.x, &q.family, &[1.0], &q.estimator, &key.child("x"))?;
    let py = family_tails(&q.y, &q.family, &[1.0 / q.lambda], &q.estimator, &key.child("y"))?;
    let mut cells = Vec::with_capacity(px.len());
    let mut verdict = Verdict::Holds;
    let (mut violated, mut inconclusive) = (0, 0);
    for ((cell, a), b) in q.family.cells().into_iter().zip(px).zip(py) {
        let v = compare_le(a.interval(), b.interval().scale(q.kappa));
        match v {
            Verdict::Violated => violated += 1,
            Verdict::Inconclusive => inconclusive += 1,
            Verdict::Holds => {}
        }
        verdict = verdict.worst(v);
        let bound = q.kappa * b.estimate;
        cells.push(DominationCell {
            norm: cell.norm,
            scale: cell.scale,
            px: a,
            py: b,
            bound,
            slack: bound - a.estimate,
            verdict: v,
        });
    }
    let method = cells
        .iter()
        .flat_map(|c| [c.px, c.py])
        .find(|t| !t.exact)
        .map(|t| Method::Mc { samples: t.samples.unwrap_or(0), confidence: t.confidence.unwrap_or(0.0) })
        .unwrap_or(Method::Exact);
    Ok(DominationReport { kappa: q.kappa, lambda: q.lambda, cells, verdict, violated, inconclusive, method })
}

/// Constants after tensorisation: `(16⌈κ⌉/α, (1+α)⌈κ⌉λ)`.
pub fn tensorised_constants(kappa: f64, lambda: f64, alpha: f64) -> (f64, f64) {
    let m = kappa.ceil();
    (16.0 / alpha * m, (1.0 + alpha) * m * lambda)
}

/// Constants reached through Bernoulli thinning: `(64κ/α, 2(1+α)κλ)`.
pub fn thinned_constants(kappa: f64, lambda: f64, alpha: f64) -> (f64, f64) {
    (64.0 * kappa / alpha, 2.0 * (1.0 + alpha) * kappa * lambda)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha {alpha} outside (0,1]")))
    }
}

/// Per-pair `(κ, λ)` checks; a violated pair is a precondition error.
fn certify_pairs(
    pairs: &[(Source, Source)],
    kappa: f64,
    lambda: f64,
    family: &NormFamily,
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<Vec<DominationReport>> {
    if pairs.is_empty() {
        return Err(Error::param("at least one pair is required"));
    }
    let mut out = Vec::with_capacity(pairs.len());
    for (i, (x, y)) in pairs.iter().enumerate() {
        let q = DominationQuery {
            x: ProductLaw::single(x.clone())?,
            y: ProductLaw::single(y.clone())?,
            kappa,
            lambda,
            family: family.clone(),
            estimator: *estimator,
        };
        let r = check_domination(&q, &key.child(&format!("pair-{i}")))?;
        if r.verdict == Verdict::Violated {
            let c = r.cells.iter().find(|c| c.verdict == Verdict::Violated).expect("violated cell");
            return Err(Error::Precondition(format!(
                "pair {i} is not ({kappa}, {lambda})-dominated: norm {} at scale {} gives {} > {}",
                c.norm, c.scale, c.px.estimate, c.bound
            )));
        }
        out.push(r);
    }
    Ok(out)
}

fn sums(pairs: &[(Source, Source)]) -> Result<(ProductLaw, ProductLaw)> {
    Ok((
        ProductLaw::new(pairs.iter().map(|p| p.0.clone()).collect())?,
        ProductLaw::new(pairs.iter().map(|p| p.1.clone()).collect())?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorisationReport {
    pub kappa: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub kappa_prime: f64,
    pub lambda_prime: f64,
    pub pairs: Vec<DominationReport>,
    pub sum: DominationReport,
}

/// Certifies each pair, then checks the sums at the tensorised constants.
pub fn tensorisation_experiment(
    pairs: &[(Source, Source)],
    kappa: f64,
    lambda: f64,
    alpha: f64,
    family: &NormFamily,
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<TensorisationReport> {
    check_constants(kappa, lambda)?;
    check_alpha(alpha)?;
    let certified = certify_pairs(pairs, kappa, lambda, family, estimator, key)?;
    let (kappa_prime, lambda_prime) = tensorised_constants(kappa, lambda, alpha);
    let (x, y) = sums(pairs)?;
    let q = DominationQuery { x, y, kappa: kappa_prime, lambda: lambda_prime, family: family.clone(), estimator: *estimator };
    let sum = check_domination(&q, &key.child("sum"))?;
    Ok(TensorisationReport { kappa, lambda, alpha, kappa_prime, lambda_prime, pairs: certified, sum })
}

/// `(p/4)·1{E_ε‖Σ ε_i v_i‖ > 2/p} ≤ P_δ(E_ε‖Σ ε_i δ_i v_i‖ > 1)`, with the
/// Bernoulli vector enumerated exactly.
pub fn removedelta_check(inst: &SignInstance, p: f64) -> Result<SlackReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("keep-probability {p} outside (0,1]")));
    }
    let n = inst.len();
    if n > REMOVEDELTA_CAP {
        return Err(Error::Capacity {
            what: "Bernoulli × sign patterns",
            size: 1u128 << (2 * n - 1),
            cap: 1u128 << (2 * REMOVEDELTA_CAP - 1),
        });
    }
    let full = sign_mean_exact(inst, Transform::Identity)?;
    let rhs_side = if full > 2.0 / p { p / 4.0 } else { 0.0 };
    let mut prob = 0.0;
    for mask in 1u32..(1 << n) {
        let kept: Vec<Vec<f64>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| inst.vectors[i].clone()).collect();
        let k = kept.len() as i32;
        let weight = p.powi(k) * (1.0 - p).powi(n as i32 - k);
        if weight == 0.0 {
            continue;
        }
        let sub = SignInstance { vectors: kept, norm: inst.norm.clone() };
        if sign_mean_exact(&sub, Transform::Identity)? > 1.0 {
            prob += weight;
        }
    }
    Ok(SlackReport::exact("remove-delta", rhs_side, prob))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Split each summand across `⌈κ⌉` disjoint indicator cells.
    Split,
    /// Bernoulli thinning with keep-probability `1/κ`.
    Thin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStep {
    pub label: String,
    pub report: DominationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub route: Route,
    pub kappa: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub kappa_prime: f64,
    pub lambda_prime: f64,
    pub pairs: Vec<DominationReport>,
    pub steps: Vec<ReductionStep>,
    pub sum: DominationReport,
}

impl ReductionReport {
    pub fn verdict(&self) -> Verdict {
        self.steps.iter().fold(self.sum.verdict, |v, s| v.worst(s.report.verdict))
    }
}

/// Reduction of general `(κ, λ)` pairs to the `(1, 1)` case along one of
/// the two routes, with every intermediate comparison checked.
#[allow(clippy::too_many_arguments)]
pub fn reduction_experiment(
    pairs: &[(Source, Source)],
    kappa: f64,
    lambda: f64,
    alpha: f64,
    route: Route,
    family: &NormFamily,
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<ReductionReport> {
    check_constants(kappa, lambda)?;
    check_alpha(alpha)?;
    let certified = certify_pairs(pairs, kappa, lambda, family, estimator, key)?;
    let keep = match route {
        Route::Split => split_scheme(kappa, pairs.len())?.cell_probability(),
        Route::Thin => 1.0 / kappa,
    };
    let mut steps = Vec::new();
    let mut thinned = Vec::with_capacity(pairs.len());
    for (i, (x, y)) in pairs.iter().enumerate() {
        let tx = thin(x, keep)?;
        let q = DominationQuery {
            x: ProductLaw::single(tx.clone())?,
            y: ProductLaw::single(y.clone())?,
            kappa: 1.0,
            lambda,
            family: family.clone(),
            estimator: *estimator,
        };
        let report = check_domination(&q, &key.child(&format!("thinned-pair-{i}")))?;
        steps.push(ReductionStep { label: format!("thinned pair {i} vs scaled partner"), report });
        thinned.push(tx);
    }
    let (x, y) = sums(pairs)?;
    if route == Route::Split {
        let m = 1.0 / keep;
        let q = DominationQuery {
            x: x.clone(),
            y: ProductLaw::new(thinned)?,
            kappa: m,
            lambda: m,
            family: family.clone(),
            estimator: *estimator,
        };
        let report = check_domination(&q, &key.child("union"))?;
        steps.push(ReductionStep { label: "union over split cells".into(), report });
    }
    let (kappa_prime, lambda_prime) = match route {
        Route::Split => tensorised_constants(kappa, lambda, alpha),
        Route::Thin => thinned_constants(kappa, lambda, alpha),
    };
    let q = DominationQuery { x, y, kappa: kappa_prime, lambda: lambda_prime, family: family.clone(), estimator: *estimator };
    let sum = check_domination(&q, &key.child("sum"))?;
    Ok(ReductionReport { route, kappa, lambda, alpha, kappa_prime, lambda_prime, pairs: certified, steps, sum })
}

/// `n` pairs of centred Gaussians in R^d with `Σ_X ⪯ Σ_Y`, so that each
/// `X_i` is `(1, 1)`-dominated by `Y_i`.
pub fn dominated_gaussian_pairs(seed: u64, d: usize, n: usize) -> Result<Vec<(Source, Source)>> {
    if d == 0 || d > distributions::MAX_DIM || n == 0 {
        return Err(Error::param("need 1 ≤ d ≤ 16 and n ≥ 1"));
    }
    let mut rng = StreamKey::new(seed, format!("gaussian-pairs/{d}/{n}")).stream(0);
    let mut random_psd = |ridge: f64, spread: f64| {
        let a = DMatrix::from_fn(d, d, |_, _| spread * rng.sample::<f64, _>(StandardNormal));
        let m = &a * a.transpose() + DMatrix::identity(d, d) * ridge;
        (&m + m.transpose()) * 0.5
    };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let sx = random_psd(0.05, 0.4);
        let sy = &sx + random_psd(0.0, 0.3);
        let rows = |m: &DMatrix<f64>| (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect();
        out.push((Source::gaussian(rows(&sx))?, Source::gaussian(rows(&sy))?));
    }
    Ok(out)
}
