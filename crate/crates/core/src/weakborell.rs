//! Weak Borell inequality `P(‖X‖ > λ) ≤ C λ^-δ P(‖X‖ > 1)` for norms with
//! `P(‖X‖ > 1) < θ`, its tensorised constants, and the tail recursion used
//! to prove them.

use serde::{Deserialize, Serialize};

use crate::distributions::{ProductLaw, Source};
use crate::error::{Error, Result};
use crate::geometry::NormFamily;
use crate::rng::StreamKey;
use crate::stats::{compare_le, Estimator, SlackReport, TailEstimate, Verdict};
use crate::tails::{family_tails, has_exact_tails};

/// Default λ grid: powers of three plus two intermediate points.
pub const DEFAULT_LAMBDAS: [f64; 7] = [1.0, 2.0, 3.0, 5.0, 9.0, 27.0, 81.0];

/// Constants `(C, δ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WBParams {
    pub c: f64,
    pub delta: f64,
    pub theta: f64,
}

impl WBParams {
    pub fn new(c: f64, delta: f64, theta: f64) -> Result<Self> {
        let p = Self { c, delta, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(Error::param(format!("C = {} must be finite and ≥ 1", self.c)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::param(format!("theta = {} outside (0,1)", self.theta)));
        }
        Ok(())
    }
}

/// `(12·9^δ·C, δ, min{θ/2, 1/(96·C·9^δ)})`.
pub fn wb_tensorize_constants(params: WBParams) -> WBParams {
    let nine = 9f64.powf(params.delta);
    WBParams {
        c: 12.0 * nine * params.c,
        delta: params.delta,
        theta: (params.theta / 2.0).min(1.0 / (96.0 * params.c * nine)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WBRecord {
    pub norm: usize,
    pub scale: f64,
    pub lambda: f64,
    /// `P(‖X‖ > 1)`
    pub p1: TailEstimate,
    /// `P(‖X‖ > λ)`
    pub p_lambda: TailEstimate,
    /// `C·λ^-δ·P(‖X‖ > 1)`
    pub bound: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

/// A cell left out because the premise `P(‖X‖ > 1) < θ` is not certain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub norm: usize,
    pub scale: f64,
    pub p1: TailEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WBReport {
    pub params: WBParams,
    pub lambdas: Vec<f64>,
    pub records: Vec<WBRecord>,
    pub skipped: Vec<SkippedCell>,
    pub verdict: Verdict,
    pub violated: usize,
    pub inconclusive: usize,
}

/// Checks `WB(C, δ, θ)` on every cell whose unit tail is certainly below θ.
pub fn check_wb(
    law: &ProductLaw,
    params: WBParams,
    family: &NormFamily,
    lambdas: &[f64],
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<WBReport> {
    params.validate()?;
    family.validate()?;
    if lambdas.is_empty() {
        return Err(Error::param("empty lambda grid"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
        return Err(Error::param(format!("lambda {l} must be finite and ≥ 1")));
    }
    let mut levels = vec![1.0];
    levels.extend_from_slice(lambdas);
    let tails = family_tails(law, family, &levels, estimator, key)?;
    let width = levels.len();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut verdict = Verdict::Holds;
    let (mut violated, mut inconclusive) = (0, 0);
    for (ci, cell) in family.cells().into_iter().enumerate() {
        let p1 = tails[ci * width];
        if p1.upper >= params.theta {
            skipped.push(SkippedCell { norm: cell.norm, scale: cell.scale, p1 });
            continue;
        }
        for (li, &lambda) in lambdas.iter().enumerate() {
            let pl = tails[ci * width + 1 + li];
            let factor = params.c * lambda.powf(-params.delta);
            let v = compare_le(pl.interval(), p1.interval().scale(factor));
            match v {
                Verdict::Violated => violated += 1,
                Verdict::Inconclusive => inconclusive += 1,
                Verdict::Holds => {}
            }
            verdict = verdict.worst(v);
            let bound = factor * p1.estimate;
            records.push(WBRecord {
                norm: cell.norm,
                scale: cell.scale,
                lambda,
                p1,
                p_lambda: pl,
                bound,
                slack: bound - pl.estimate,
                verdict: v,
            });
        }
    }
    Ok(WBReport { params, lambdas: lambdas.to_vec(), records, skipped, verdict, violated, inconclusive })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionRow {
    pub k: u32,
    /// Iterate of `b_k = 6C·3^{-δ(k-1)}·p0 + 4·b_{k-1}²`, `b_0 = p0`.
    pub recursive: f64,
    /// `12·3^δ·C·3^{-kδ}·p0`
    pub closed_form: f64,
    /// `½ + 48·C·3^{-δk+3δ}·p0`
    pub multiplier: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub p0: f64,
    pub params: WBParams,
    /// `1/(96·C·9^δ)`: largest `p0` for which the induction closes.
    pub threshold: f64,
    /// `p0 ≤ threshold`; rows must then all be within the closed form.
    pub induction_applies: bool,
    /// `p0 < min{1/3, θ'}`, the premise under which the recursion is valid.
    pub premise_holds: bool,
    pub rows: Vec<RecursionRow>,
}

impl RecursionReport {
    /// Rows violating the closed form while the induction applies.
    pub fn failures(&self) -> Vec<u32> {
        if !self.induction_applies {
            return Vec::new();
        }
        self.rows.iter().filter(|r| !r.within).map(|r| r.k).collect()
    }
}

/// Value of `p0` at which the `k = 1` induction multiplier equals one.
pub fn induction_threshold(params: WBParams) -> f64 {
    0.5 / (48.0 * params.c * 3f64.powf(2.0 * params.delta))
}

/// Iterates the tail recursion for `k = 0..=K`.
pub fn recursion_bound(p0: f64, params: WBParams, k_max: u32) -> Result<RecursionReport> {
    params.validate()?;
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::param(format!("p0 = {p0} outside (0,1)")));
    }
    let (c, d) = (params.c, params.delta);
    let threshold = 1.0 / (96.0 * c * 9f64.powf(d));
    let theta_prime = wb_tensorize_constants(params).theta;
    let lead = 12.0 * 3f64.powf(d) * c;
    let mut rows = Vec::with_capacity(k_max as usize + 1);
    let mut b = p0;
    for k in 0..=k_max {
        let kf = k as f64;
        if k > 0 {
            b = 6.0 * c * 3f64.powf(-d * (kf - 1.0)) * p0 + 4.0 * b * b;
        }
        let closed_form = lead * 3f64.powf(-kf * d) * p0;
        let multiplier = 0.5 + 48.0 * c * 3f64.powf(-d * kf + 3.0 * d) * p0;
        let within = b <= closed_form * (1.0 + crate::stats::EXACT_TOL);
        rows.push(RecursionRow { k, recursive: b, closed_form, multiplier, within });
    }
    Ok(RecursionReport {
        p0,
        params,
        threshold,
        induction_applies: p0 <= threshold,
        premise_holds: p0 < theta_prime.min(1.0 / 3.0),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WBSumReport {
    pub params: WBParams,
    pub tensorised: WBParams,
    pub components: Vec<WBReport>,
    pub sum: WBReport,
    /// On exact instances: `max_j P(‖X_j‖ > 1) ≤ 2·P(‖S‖ > 1)` for every
    /// cell in the sum's premise, which puts every summand in its own.
    pub gate: Vec<SlackReport>,
}

impl WBSumReport {
    pub fn verdict(&self) -> Verdict {
        self.gate.iter().fold(self.sum.verdict, |v, r| v.worst(r.verdict))
    }
}

/// Certifies each component with `params`, then checks the sum with the
/// tensorised constants.
pub fn wb_sum_experiment(
    components: &[Source],
    params: WBParams,
    family: &NormFamily,
    lambdas: &[f64],
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<WBSumReport> {
    params.validate()?;
    if components.is_empty() {
        return Err(Error::param("at least one component is required"));
    }
    let mut certified = Vec::with_capacity(components.len());
    for (j, c) in components.iter().enumerate() {
        let law = ProductLaw::single(c.clone())?;
        let r = check_wb(&law, params, family, lambdas, estimator, &key.child(&format!("component-{j}")))?;
        if r.verdict == Verdict::Violated {
            return Err(Error::Precondition(format!("component {j} does not satisfy the weak Borell bound")));
        }
        certified.push(r);
    }
    let tensorised = wb_tensorize_constants(params);
    let law = ProductLaw::new(components.to_vec())?;
    let sum = check_wb(&law, tensorised, family, lambdas, estimator, &key.child("sum"))?;
    let mut gate = Vec::new();
    let all_exact = has_exact_tails(&law) && components.iter().all(|c| has_exact_tails(&ProductLaw::single(c.clone()).unwrap()));
    if all_exact && estimator.allows_exact() {
        let ps = family_tails(&law, family, &[1.0], &Estimator::Exact, key)?;
        let mut pj = vec![0.0f64; ps.len()];
        for c in components {
            let t = family_tails(&ProductLaw::single(c.clone())?, family, &[1.0], &Estimator::Exact, key)?;
            pj.iter_mut().zip(t).for_each(|(m, e)| *m = m.max(e.estimate));
        }
        for ((cell, s), m) in family.cells().iter().zip(ps).zip(pj) {
            if s.estimate < tensorised.theta {
                gate.push(SlackReport::exact(
                    format!("gate norm {} scale {}", cell.norm, cell.scale),
                    m,
                    (2.0 * s.estimate).min(params.theta),
                ));
            }
        }
    }
    Ok(WBSumReport { params, tensorised, components: certified, sum, gate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::FiniteSupportDist;
    use crate::geometry::NormSpec;

    #[test]
    fn tensorised_constants_examples() {
        let a = wb_tensorize_constants(WBParams::new(1.0, 1.0, 0.5).unwrap());
        assert_eq!(a.c, 108.0);
        assert_eq!(a.theta, 1.0 / 864.0);
        let b = wb_tensorize_constants(WBParams::new(1.0, 2.0, 0.5).unwrap());
        assert_eq!(b.c, 972.0);
        assert_eq!(b.theta, 1.0 / 7776.0);
        let c2 = wb_tensorize_constants(WBParams::new(2.0, 2.0, 0.5).unwrap());
        assert_eq!(c2.c, 2.0 * b.c);
        assert!(c2.theta <= b.theta);
    }

    #[test]
    fn recursion_examples() {
        let p = WBParams::new(1.0, 2.0, 0.5).unwrap();
        let r = recursion_bound(1e-3, p, 10).unwrap();
        assert_eq!(r.rows[0].recursive, 1e-3);
        assert!((r.rows[1].recursive - 0.006004).abs() < 1e-15);
        let q = WBParams::new(1.0, 1.0, 0.5).unwrap();
        let at = recursion_bound(1.0 / 864.0, q, 3).unwrap();
        assert!((at.rows[1].multiplier - 1.0).abs() < 1e-15);
        assert!(at.failures().is_empty());
        assert_eq!(induction_threshold(p), wb_tensorize_constants(p).theta);
    }

    #[test]
    fn pareto_component_is_tight() {
        let law = ProductLaw::single(Source::ParetoTail { exponent: 2.0 }).unwrap();
        let fam = NormFamily::new(vec![NormSpec::euclidean()], vec![1.0, 0.5, 0.25]).unwrap();
        let r = check_wb(
            &law,
            WBParams::new(1.0, 2.0, 0.9).unwrap(),
            &fam,
            &[1.0, 2.0, 4.0],
            &Estimator::Exact,
            &StreamKey::new(0, "wb"),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.skipped.len(), 1);
        assert!(r.records.iter().all(|x| x.slack.abs() <= 1e-15));
    }

    #[test]
    fn empty_grid_rejected() {
        let law = ProductLaw::single(Source::ParetoTail { exponent: 2.0 }).unwrap();
        let fam = NormFamily::single(NormSpec::euclidean());
        let p = WBParams::new(1.0, 2.0, 0.5).unwrap();
        assert!(check_wb(&law, p, &fam, &[], &Estimator::Exact, &StreamKey::new(0, "e")).is_err());
    }

    #[test]
    fn discrete_heavy_tail_sum() {
        // atoms at ±3^k with mass ∝ 9^-k: WB with δ = 2 up to a constant
        let pairs: Vec<(Vec<f64>, f64)> = (1..5).map(|k| (vec![3f64.powi(k)], 0.5 * 9f64.powi(-k))).collect();
        let x = Source::Finite(FiniteSupportDist::from_pairs(1, &pairs).unwrap());
        let fam = NormFamily::new(vec![NormSpec::euclidean()], vec![1.0, 0.5, 0.2, 0.1]).unwrap();
        let p = WBParams::new(9.0, 2.0, 0.5).unwrap();
        let r = wb_sum_experiment(&[x.clone(), x.clone(), x], p, &fam, &[1.0, 3.0, 9.0], &Estimator::Exact, &StreamKey::new(0, "s"))
            .unwrap();
        assert_eq!(r.verdict(), Verdict::Holds);
    }
}
