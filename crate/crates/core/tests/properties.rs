mod common;

use proptest::prelude::*;
use simlab::adversary::{self, Adversary, FinalizeMode};
use simlab::concentration::{self, AlphaMethod, ConcentrationProfile};
use simlab::domain::{BitString, Domain, Point};
use simlab::experiments::{ExperimentName, Params};
use simlab::pivot::{select_pivots, PivotStrategy, PivotTable};
use simlab::reduce::{self, MapKind};
use simlab::rng;
use simlab::vc::{self, ConceptClass};

fn any_domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (1usize..200).prop_map(Domain::hamming),
        (1usize..40).prop_map(Domain::gaussian),
        (1usize..40).prop_map(Domain::unit_cube),
        (2usize..40).prop_map(Domain::sphere),
        (3usize..40, any::<u64>()).prop_map(|(n, s)| common::random_finite(n, s)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(dom in any_domain(), seed in any::<u64>()) {
        let mut r = rng::rng(seed);
        for _ in 0..50 {
            let (x, y, z) = (dom.random_point(&mut r), dom.random_point(&mut r), dom.random_point(&mut r));
            prop_assert_eq!(dom.dist(&x, &y), dom.dist(&y, &x));
            prop_assert!(dom.dist(&x, &z) <= dom.dist(&x, &y) + dom.dist(&y, &z) + 1e-9);
            prop_assert_eq!(dom.dist(&x, &x), 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic(dom in any_domain(), seed in any::<u64>()) {
        let n = 3;
        prop_assert_eq!(dom.sample(n, seed).unwrap(), dom.sample(n, seed).unwrap());
        if let Some(s) = dom.sample(n, seed).unwrap().points().iter().find_map(|p| match dom.kind() {
            simlab::DomainKind::Sphere { .. } => p.reals().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()),
            _ => None,
        }) {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn exact_alpha_below_chernoff(d in 1usize..2000, eps in 0.0f64..=1.0) {
        prop_assert!(concentration::exact_hamming_alpha(d, eps) <= concentration::chernoff_alpha_bound(eps, d) + 1e-15);
    }

    #[test]
    fn estimated_profiles_are_valid(dim in 2usize..30, seed in any::<u64>()) {
        let dom = Domain::gaussian(dim).normalize(0, 0).unwrap();
        let p = concentration::estimate_alpha(&dom, &concentration::unit_grid(11), 200, 3, seed).unwrap();
        prop_assert_eq!(p.alpha()[0], 0.5);
        prop_assert!(p.alpha().windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(p.alpha().iter().all(|a| (0.0..=0.5).contains(a)));
    }

    #[test]
    fn increasing_profiles_rejected(a in 0.0f64..0.4, bump in 0.01f64..0.1) {
        let r = ConcentrationProfile::new(vec![0.0, 0.5, 1.0], vec![0.5, a, a + bump], AlphaMethod::ChernoffBound);
        prop_assert!(r.is_err());
    }

    #[test]
    fn shattering_is_monotone(m in 4usize..10, count in 1usize..60, seed in any::<u64>()) {
        let cc = ConceptClass::random(m, count, seed).unwrap();
        let mut r = rng::rng(seed ^ 1);
        let k = rand::Rng::random_range(&mut r, 1..m);
        let subset: Vec<usize> = rand::seq::index::sample(&mut r, m, k).into_vec();
        if !vc::shatters(&cc, &subset).unwrap() {
            for extra in (0..m).filter(|i| !subset.contains(i)) {
                let mut sup = subset.clone();
                sup.push(extra);
                prop_assert!(!vc::shatters(&cc, &sup).unwrap());
            }
        }
    }

    #[test]
    fn vc_dimension_at_most_log2(m in 2usize..12, count in 1usize..200, seed in any::<u64>()) {
        let cc = ConceptClass::random(m, count, seed).unwrap();
        let n = cc.concepts().len();
        prop_assert!(vc::vc_dimension(&cc, m).unwrap() <= n.ilog2() as usize);
    }

    #[test]
    fn pivot_lower_bounds_hold(dom in any_domain(), seed in any::<u64>(), k in 1usize..5) {
        let ds = dom.sample(3.max(k), seed).unwrap();
        let pt = PivotTable::build(&ds, select_pivots(&ds, k, PivotStrategy::RandomFromDomain, seed).unwrap()).unwrap();
        let q = dom.random_point(&mut rng::rng(seed));
        for (i, lb) in pt.lower_bounds(&q).into_iter().enumerate() {
            prop_assert!(lb <= ds.dist_to(&q, i) + 1e-9);
        }
        for j in 0..ds.len() {
            for (i, p) in pt.pivots().iter().enumerate() {
                prop_assert_eq!(pt.row(j)[i], dom.dist(ds.point(j), p));
            }
        }
    }

    #[test]
    fn sketch_distances_in_unit_interval(d in 8usize..300, k in 1usize..64, seed in any::<u64>()) {
        let dom = Domain::hamming(d);
        let ds = dom.sample(4, seed).unwrap();
        let ell = 1 + (seed as usize % d);
        for map in [reduce::bit_sample_map(d, k.min(d), seed).unwrap(), reduce::kor_map(d, k, ell, seed).unwrap()] {
            let img = map.apply_dataset(&ds).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((0.0..=1.0).contains(&img.dist(i, j)));
                }
            }
            if let MapKind::BitSample { indices } = map.kind() {
                prop_assert!(indices.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(indices.len(), k.min(d));
            }
        }
    }

    #[test]
    fn jl_scale_and_reproducibility(d in 1usize..200, k in 1usize..50, seed in any::<u64>()) {
        let k = k.min(d);
        let map = reduce::jl_map(d, k, seed).unwrap();
        prop_assert_eq!(&map, &reduce::jl_map(d, k, seed).unwrap());
        if let MapKind::Jl { scale, .. } = map.kind() {
            prop_assert!((scale - (d as f64 / k as f64).sqrt()).abs() < 1e-12);
        }
        let y = map.apply(&Point::Reals(vec![1.0; d])).unwrap();
        prop_assert!(y.reals().unwrap().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn default_finalization_is_katetov(n in 2usize..32, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let space = adversary::random_space(n, seed).unwrap();
        let mut adv = Adversary::new(&space).unwrap();
        let queried = ((n - 1) as f64 * frac) as usize;
        for x in 0..queried {
            prop_assert_eq!(adv.answer(x).unwrap(), 1.0);
        }
        let x0 = n - 1;
        let f = adv.finalize(x0, FinalizeMode::Default).unwrap();
        prop_assert!(adversary::is_katetov(&space, &f.values).unwrap());
        prop_assert!((0..queried).all(|y| f.values[y] == 1.0));
        prop_assert!((0..n).filter(|&x| x != x0).all(|x| f.values[x0] < f.values[x]));
        prop_assert!(adv.answer(0).is_err());
    }

    #[test]
    fn params_resolve_independent_of_order(d in 1usize..500, g in 2usize..200) {
        let a = vec![("d".to_string(), d.to_string()), ("grid".to_string(), g.to_string())];
        let b: Vec<_> = a.iter().rev().cloned().collect();
        let name = ExperimentName::Fig4HammingAlpha;
        prop_assert_eq!(Params::resolve(name, &[], &a).unwrap(), Params::resolve(name, &[], &b).unwrap());
    }

    #[test]
    fn bitstring_hamming_is_popcount(len in 1usize..300, seed in any::<u64>()) {
        let mut r = rng::rng(seed);
        let (x, y) = (BitString::random(len, &mut r), BitString::random(len, &mut r));
        let manual = (0..len).filter(|&i| x.get(i) != y.get(i)).count();
        prop_assert_eq!(x.hamming(&y), manual);
    }
}
