use domlab::distributions::{enumerate, sample, split_scheme, thin, FiniteSupportDist, ProductLaw, Source, PRODUCT_CAP};
use domlab::dominance::{check_domination, proxy_exact, proxy_mc, DominationQuery, InnerMode};
use domlab::fixtures::{
    instance_rng, random_finite_law, random_finite_source, random_majorised_pair, random_norm, random_sign_instance,
};
use domlab::geometry::{NormFamily, NormSpec};
use domlab::inequalities::{sign_tail_exact, sign_tail_mc};
use domlab::majorisation::{decompose, is_majorised, t_transform_chain, MAJORISATION_TOL};
use domlab::rng::StreamKey;
use domlab::stats::{clopper_pearson, Estimator, Verdict};
use domlab::tails::family_tails;
use domlab::weakborell::{check_wb, recursion_bound, wb_sum_experiment, wb_tensorize_constants, WBParams};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn key(label: &str) -> StreamKey {
    StreamKey::new(99, label)
}

fn abs() -> NormSpec {
    NormSpec::euclidean()
}

#[test]
fn sources_are_symmetric_in_law() {
    let sources = [
        Source::gaussian(vec![vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap(),
        Source::SymmetricStable { index: 0.7, scale: 1.0 },
        Source::SymmetricStable { index: 1.5, scale: 2.0 },
        Source::ParetoTail { exponent: 1.5 },
        Source::Finite(FiniteSupportDist::from_pairs(2, &[(vec![1.0, -2.0], 0.6)]).unwrap()),
        thin(&Source::gaussian(vec![vec![2.0]]).unwrap(), 0.4).unwrap(),
    ];
    for (i, s) in sources.iter().enumerate() {
        let draws = sample(s, 100_000, &key(&format!("symmetry-{i}"))).unwrap();
        let dir: Vec<f64> = (0..draws.dim).map(|j| 1.0 + j as f64 * 0.37).collect();
        let (mut pos, mut nonzero) = (0u64, 0u64);
        for row in draws.rows() {
            let v: f64 = row.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if v != 0.0 {
                nonzero += 1;
                pos += (v > 0.0) as u64;
            }
        }
        let (lo, hi) = clopper_pearson(pos, nonzero, 0.99);
        assert!(lo <= 0.5 && 0.5 <= hi, "source {i}: {pos}/{nonzero}");
    }
}

#[test]
fn split_indicators_partition_the_grid() {
    for (kappa, n) in [(1.0, 1), (2.0, 3), (2.5, 2), (7.0, 4), (10.3, 2)] {
        let s = split_scheme(kappa, n).unwrap();
        for g in 0..=1000 {
            let t = vec![g as f64 / 1000.0; n];
            for i in 0..n {
                let hits = (1..=s.m).filter(|&k| s.indicator(i, k, &t)).count();
                assert_eq!(hits, 1, "kappa {kappa} t {}", t[0]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_is_a_probability(seed in any::<u64>()) {
        let law = random_finite_law(&mut instance_rng(seed, "enum", 0), 4, 2, 3).unwrap();
        let outs = enumerate(&law, PRODUCT_CAP).unwrap();
        let total: f64 = outs.iter().map(|o| o.prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(outs.iter().all(|o| o.prob > 0.0));
    }

    #[test]
    fn thinning_keeps_mass_and_symmetry(seed in any::<u64>(), p in 0.01f64..1.0) {
        let src = random_finite_source(&mut instance_rng(seed, "thin", 0), 2, 3).unwrap();
        let t = thin(&src, p).unwrap().exact_finite(PRODUCT_CAP).unwrap();
        let total: f64 = t.atoms().iter().map(|a| a.prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for a in t.atoms() {
            let neg: Vec<f64> = a.point.iter().map(|v| -v).collect();
            let mirror: f64 = t.atoms().iter().filter(|b| b.point == neg).map(|b| b.prob).sum();
            let same: f64 = t.atoms().iter().filter(|b| b.point == a.point).map(|b| b.prob).sum();
            prop_assert!((mirror - same).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive(seed in any::<u64>(), d in 1usize..5, t in -5.0f64..5.0) {
        let mut rng = instance_rng(seed, "norm-axioms", 0);
        let n = random_norm(&mut rng, d).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let nx = n.evaluate(&x).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        prop_assert!((n.evaluate(&tx).unwrap() - t.abs() * nx).abs() <= 1e-9 * (1.0 + nx));
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(n.evaluate(&s).unwrap() <= nx + n.evaluate(&y).unwrap() + 1e-9);
        let c = 0.1 + t.abs();
        let scaled = n.clone().scaled(c).evaluate(&x).unwrap();
        prop_assert!((scaled - c * nx).abs() <= 1e-12 * (c * nx).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn rescaling_the_norm_rescales_the_level(seed in any::<u64>(), t in 0.1f64..4.0) {
        let mut rng = instance_rng(seed, "rescale", 0);
        let law = random_finite_law(&mut rng, 3, 2, 3).unwrap();
        let n = random_norm(&mut rng, 2).unwrap();
        let direct = family_tails(&law, &NormFamily::single(n.clone()), &[t], &Estimator::Exact, &key("r")).unwrap()[0].estimate;
        let fam = NormFamily::new(vec![n], vec![1.0 / t]).unwrap();
        let scaled = family_tails(&law, &fam, &[1.0], &Estimator::Exact, &key("r")).unwrap()[0].estimate;
        prop_assert_eq!(direct, scaled);
    }

    #[test]
    fn sign_tail_is_nonincreasing(seed in any::<u64>()) {
        let inst = random_sign_instance(&mut instance_rng(seed, "monotone", 0), 10, 2).unwrap();
        let mut prev = 1.0;
        for g in 0..20 {
            let p = sign_tail_exact(&inst, g as f64 * 0.25).unwrap();
            prop_assert!(p <= prev);
            prev = p;
        }
    }

    #[test]
    fn proxy_grows_with_the_norm_scale(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, "proxy-scale", 0);
        let law = random_finite_law(&mut rng, 3, 2, 2).unwrap();
        let n = random_norm(&mut rng, 2).unwrap();
        let mut prev = 0.0;
        for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let v = proxy_exact(&law, &n.clone().scaled(c)).unwrap().value;
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn self_domination_holds(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, "self", 0);
        let law = random_finite_law(&mut rng, 3, 2, 3).unwrap();
        let fam = NormFamily::new(vec![random_norm(&mut rng, 2).unwrap(), abs()], vec![0.5, 1.0, 2.0]).unwrap();
        let q = DominationQuery { x: law.clone(), y: law, kappa: 1.0, lambda: 1.0, family: fam, estimator: Estimator::Exact };
        prop_assert_eq!(check_domination(&q, &key("self")).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn exact_domination_is_transitive(seed in any::<u64>(), p in 0.05f64..1.0, q in 0.05f64..1.0) {
        let mut rng = instance_rng(seed, "transitive", 0);
        let z = random_finite_source(&mut rng, 1, 3).unwrap();
        let y = thin(&z, q).unwrap();
        let candidates = [thin(&y, p).unwrap(), random_finite_source(&mut rng, 1, 3).unwrap()];
        let fam = NormFamily::new(vec![abs()], vec![0.25, 0.5, 1.0, 2.0, 4.0]).unwrap();
        let holds = |a: &Source, b: &Source| {
            let q = DominationQuery {
                x: ProductLaw::single(a.clone()).unwrap(),
                y: ProductLaw::single(b.clone()).unwrap(),
                kappa: 1.0,
                lambda: 1.0,
                family: fam.clone(),
                estimator: Estimator::Exact,
            };
            check_domination(&q, &key("t")).unwrap().verdict == Verdict::Holds
        };
        for x in &candidates {
            if holds(x, &y) && holds(&y, &z) {
                prop_assert!(holds(x, &z));
            }
        }
    }

    #[test]
    fn weak_borell_is_monotone_in_c(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, "wb-monotone", 0);
        let law = random_finite_law(&mut rng, 3, 1, 3).unwrap();
        let fam = NormFamily::new(vec![abs()], vec![0.25, 0.5, 1.0]).unwrap();
        let grid = [1.0, 1.5, 2.0, 3.0];
        let small = check_wb(&law, WBParams::new(1.0, 1.0, 0.9).unwrap(), &fam, &grid, &Estimator::Exact, &key("w")).unwrap();
        let large = check_wb(&law, WBParams::new(4.0, 1.0, 0.9).unwrap(), &fam, &grid, &Estimator::Exact, &key("w")).unwrap();
        for (a, b) in small.records.iter().zip(&large.records) {
            prop_assert!(!(a.verdict == Verdict::Holds && b.verdict == Verdict::Violated));
        }
    }

    #[test]
    fn recursion_stays_below_closed_form(c in 1.0f64..10.0, delta in 0.2f64..3.0, frac in 0.001f64..1.0) {
        let params = WBParams::new(c, delta, 0.5).unwrap();
        let threshold = 1.0 / (96.0 * c * 9f64.powf(delta));
        let r = recursion_bound(frac * threshold, params, 12).unwrap();
        prop_assert!(r.induction_applies);
        prop_assert!(r.failures().is_empty());
    }

    #[test]
    fn sum_bound_uses_tensorised_constant(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, "wb-sum", 0);
        let comps: Vec<Source> = (0..3).map(|_| random_finite_source(&mut rng, 1, 3).unwrap()).collect();
        let params = WBParams::new(50.0, 1.0, 0.6).unwrap();
        let fam = NormFamily::new(vec![abs()], vec![0.05, 0.1, 0.2, 0.5]).unwrap();
        let Ok(r) = wb_sum_experiment(&comps, params, &fam, &[1.0, 2.0, 4.0, 9.0, 30.0], &Estimator::Exact, &key("s")) else {
            return Ok(());
        };
        let t = wb_tensorize_constants(params);
        for rec in &r.sum.records {
            let expect = t.c * rec.lambda.powf(-t.delta) * rec.p1.estimate;
            prop_assert!((rec.bound - expect).abs() <= 1e-12 * expect.abs());
        }
        prop_assert!(t.theta <= params.theta / 2.0);
        for g in &r.gate {
            prop_assert_eq!(g.verdict, Verdict::Holds);
            prop_assert!(g.lhs < params.theta);
        }
    }

    #[test]
    fn majorisation_is_a_preorder(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, "preorder", 0);
        let (b, a) = random_majorised_pair(&mut rng, 7);
        prop_assert!(is_majorised(&a, &a, MAJORISATION_TOL).unwrap());
        // c averages permutations of b, so c ≺ b ≺ a
        let mut c = vec![0.0; b.len()];
        let mut perm: Vec<usize> = (0..b.len()).collect();
        for _ in 0..3 {
            perm.shuffle(&mut rng);
            c.iter_mut().zip(&perm).for_each(|(ci, &p)| *ci += b[p] / 3.0);
        }
        prop_assert!(is_majorised(&c, &b, MAJORISATION_TOL).unwrap());
        prop_assert!(is_majorised(&c, &a, MAJORISATION_TOL).unwrap());
        let mut pa = a.clone();
        pa.shuffle(&mut rng);
        let mut pb = b.clone();
        pb.shuffle(&mut rng);
        prop_assert!(is_majorised(&pb, &pa, MAJORISATION_TOL).unwrap());
        prop_assert_eq!(is_majorised(&a, &b, MAJORISATION_TOL).unwrap(), is_majorised(&pa, &pb, MAJORISATION_TOL).unwrap());
    }

    #[test]
    fn chain_steps_stay_between(seed in any::<u64>()) {
        let (a, b) = random_majorised_pair(&mut instance_rng(seed, "chain", 0), 8);
        let chain = t_transform_chain(&a, &b).unwrap();
        prop_assert!(chain.steps.len() < a.len().max(2));
        for v in &chain.vectors {
            prop_assert!(is_majorised(v, &b, MAJORISATION_TOL).unwrap());
            prop_assert!(is_majorised(&a, v, MAJORISATION_TOL).unwrap());
        }
        let m = decompose(&a, &b).unwrap();
        prop_assert!(m.residual <= 1e-10);
        prop_assert!(m.terms.len() <= (a.len() - 1).pow(2) + 1);
    }
}

#[test]
fn sign_tails_agree_with_sampling() {
    for i in 0..25 {
        let mut rng = instance_rng(5, "sign-mc", i);
        let inst = random_sign_instance(&mut rng, 12, 2).unwrap();
        let t = rng.random_range(0.2..2.0);
        let exact = sign_tail_exact(&inst, t).unwrap();
        let mc = sign_tail_mc(&inst, t, 100_000, 0.999, &key(&format!("sign-mc-{i}"))).unwrap();
        assert!(mc.lower <= exact && exact <= mc.upper, "instance {i}: {exact} vs [{}, {}]", mc.lower, mc.upper);
    }
}

#[test]
fn proxy_sampling_matches_enumeration() {
    for i in 0..12 {
        let mut rng = instance_rng(6, "proxy-mc", i);
        let law = random_finite_law(&mut rng, 4, 2, 2).unwrap();
        let n = random_norm(&mut rng, 2).unwrap();
        let exact = proxy_exact(&law, &n).unwrap().value;
        let mc = proxy_mc(&law, &n, 50_000, InnerMode::default(), &key(&format!("proxy-{i}"))).unwrap();
        let se = mc.std_error.unwrap();
        assert!((mc.value - exact).abs() <= 4.0 * se + 1e-12, "instance {i}: {} vs {exact} (se {se})", mc.value);
    }
}
