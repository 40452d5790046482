//! Tail probabilities `P(c·N(X_1 + … + X_n) > t)` over a norm family and a
//! list of levels, computed exactly, in closed form, or by Monte Carlo.

use crate::distributions::{sum_distribution, ProductLaw, Sampler, Source, PRODUCT_CAP};
use crate::error::{Error, Result};
use crate::geometry::NormFamily;
use crate::rng::{map_chunks, StreamKey};
use crate::stats::{Estimator, TailEstimate};

/// Closed-form `P(|S| > t)` for a scalar sum, when one is known.
pub(crate) fn scalar_sum_tail(law: &ProductLaw) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    if law.dim() != 1 {
        return None;
    }
    let comps = law.components();
    if comps.len() == 1 {
        let src = comps[0].clone();
        src.abs_tail(1.0)?;
        return Some(Box::new(move |t| src.abs_tail(t).expect("checked above")));
    }
    // Gaussian variances add; iid stable laws scale by n^(1/index).
    let mut variance = 0.0;
    let mut all_gaussian = true;
    for c in comps {
        match c {
            Source::Gaussian { covariance } => variance += covariance[0][0],
            _ => all_gaussian = false,
        }
    }
    if all_gaussian {
        return Some(Box::new(move |t| Source::Gaussian { covariance: vec![vec![variance]] }.abs_tail(t).unwrap()));
    }
    if let Source::SymmetricStable { index, scale } = &comps[0] {
        if comps.iter().all(|c| c == &comps[0]) {
            let s = scale * (comps.len() as f64).powf(1.0 / index);
            let src = Source::SymmetricStable { index: *index, scale: s };
            return Some(Box::new(move |t| src.abs_tail(t).unwrap()));
        }
    }
    None
}

/// Whether [`family_tails`] would avoid sampling for this law.
pub fn has_exact_tails(law: &ProductLaw) -> bool {
    law.exact_components(PRODUCT_CAP)
        .map(|c| c.iter().map(|d| d.len() as u128).product::<u128>() <= PRODUCT_CAP)
        .unwrap_or(false)
        || scalar_sum_tail(law).is_some()
}

/// Tail probabilities of `S = Σ X_i` for every `(cell, level)` pair, in
/// cell-major order: entry `c·levels.len() + l` is
/// `P(scale_c·N_c(S) > levels[l])`.
pub fn family_tails(
    law: &ProductLaw,
    family: &NormFamily,
    levels: &[f64],
    estimator: &Estimator,
    key: &StreamKey,
) -> Result<Vec<TailEstimate>> {
    estimator.validate()?;
    family.check_dimension(law.dim())?;
    if levels.is_empty() {
        return Err(Error::param("no tail levels requested"));
    }
    let cells = family.cells();
    if estimator.allows_exact() {
        if let Some(comps) = law.exact_components(PRODUCT_CAP) {
            if comps.iter().map(|d| d.len() as u128).product::<u128>() <= PRODUCT_CAP {
                let sums = sum_distribution(law, PRODUCT_CAP)?;
                let mut acc = vec![0.0; cells.len() * levels.len()];
                let mut base = vec![0.0; family.norms.len()];
                for a in 0..sums.len() {
                    let x = sums.point(a);
                    let p = sums.probs[a];
                    for (b, n) in base.iter_mut().zip(&family.norms) {
                        *b = n.eval(x);
                    }
                    for (ci, cell) in cells.iter().enumerate() {
                        let v = cell.scale * base[cell.norm];
                        for (li, &t) in levels.iter().enumerate() {
                            if v > t {
                                acc[ci * levels.len() + li] += p;
                            }
                        }
                    }
                }
                return Ok(acc.into_iter().map(TailEstimate::exact).collect());
            }
        }
        if let Some(tail) = scalar_sum_tail(law) {
            let mut out = Vec::with_capacity(cells.len() * levels.len());
            for cell in &cells {
                // every norm on R is a multiple of |x|
                let unit = cell.scale * family.norms[cell.norm].eval(&[1.0]);
                for &t in levels {
                    out.push(TailEstimate::exact(tail(t / unit)));
                }
            }
            return Ok(out);
        }
    }
    let (samples, confidence) = estimator
        .mc_budget()
        .ok_or_else(|| Error::param("exact tails need a finite-support law within the cap or a closed form"))?;
    let samplers = law.components().iter().map(Sampler::compile).collect::<Result<Vec<_>>>()?;
    let d = law.dim();
    let width = cells.len() * levels.len();
    let counts = map_chunks(key, samples as usize, |rng, range| {
        let mut c = vec![0u64; width];
        let mut s = vec![0.0; d];
        let mut x = vec![0.0; d];
        let mut base = vec![0.0; family.norms.len()];
        for _ in range {
            s.iter_mut().for_each(|v| *v = 0.0);
            for sm in &samplers {
                sm.draw(rng, &mut x);
                s.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
            }
            for (b, n) in base.iter_mut().zip(&family.norms) {
                *b = n.eval(&s);
            }
            for (ci, cell) in cells.iter().enumerate() {
                let v = cell.scale * base[cell.norm];
                for (li, &t) in levels.iter().enumerate() {
                    c[ci * levels.len() + li] += (v > t) as u64;
                }
            }
        }
        c
    });
    let mut total = vec![0u64; width];
    for c in counts {
        total.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }
    Ok(total.into_iter().map(|h| TailEstimate::from_counts(h, samples, confidence)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::FiniteSupportDist;
    use crate::geometry::NormSpec;

    #[test]
    fn exact_rademacher_sum() {
        let law = ProductLaw::iid(Source::Finite(FiniteSupportDist::rademacher()), 3).unwrap();
        let fam = NormFamily::new(vec![NormSpec::euclidean()], vec![1.0, 0.5]).unwrap();
        let t = family_tails(&law, &fam, &[1.0, 2.0], &Estimator::Exact, &StreamKey::new(0, "t")).unwrap();
        let p: Vec<f64> = t.iter().map(|e| e.estimate).collect();
        assert_eq!(p, vec![0.25, 0.25, 0.25, 0.0]);
        assert!(t.iter().all(|e| e.exact));
    }

    #[test]
    fn rescaling_identity_exact() {
        let d = FiniteSupportDist::from_pairs(2, &[(vec![1.0, 2.0], 0.5), (vec![0.25, -3.0], 0.3)]).unwrap();
        let law = ProductLaw::iid(d.into(), 3).unwrap();
        let n = NormSpec::lp(3.0);
        for t in [0.5, 2.0, 4.0] {
            let direct = family_tails(&law, &NormFamily::single(n.clone()), &[t], &Estimator::Exact, &StreamKey::new(0, "r"))
                .unwrap()[0]
                .estimate;
            let fam = NormFamily::new(vec![n.clone()], vec![1.0 / t]).unwrap();
            let scaled = family_tails(&law, &fam, &[1.0], &Estimator::Exact, &StreamKey::new(0, "r")).unwrap()[0].estimate;
            assert_eq!(direct, scaled, "t {t}");
        }
    }

    #[test]
    fn analytic_gaussian_sum() {
        let law = ProductLaw::iid(Source::gaussian(vec![vec![1.0]]).unwrap(), 4).unwrap();
        let fam = NormFamily::single(NormSpec::euclidean());
        let t = family_tails(&law, &fam, &[1.0], &Estimator::Exact, &StreamKey::new(0, "g")).unwrap()[0];
        // S ~ N(0, 4)
        assert!((t.estimate - libm::erfc(0.5 / std::f64::consts::SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn mc_agrees_with_closed_form() {
        let law = ProductLaw::iid(Source::ParetoTail { exponent: 2.0 }, 1).unwrap();
        let fam = NormFamily::single(NormSpec::euclidean());
        let mc = family_tails(&law, &fam, &[2.0], &Estimator::mc(1_000_000), &StreamKey::new(4, "p")).unwrap()[0];
        assert!(mc.lower <= 0.25 && 0.25 <= mc.upper);
    }

    #[test]
    fn exact_mode_without_closed_form_is_an_error() {
        let law = ProductLaw::iid(Source::gaussian(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), 2).unwrap();
        let fam = NormFamily::single(NormSpec::euclidean());
        assert!(family_tails(&law, &fam, &[1.0], &Estimator::Exact, &StreamKey::new(0, "e")).is_err());
    }
}
