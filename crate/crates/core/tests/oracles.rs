//! Reference values checked against independent computations.

mod common;

use common::binomial_upper_tail;
use rand::Rng as _;
use simlab::adversary::{self, Adversary, EarlyStop, FinalizeMode};
use simlab::concentration::{self, DomainFamily, FamilyKind, NnCurveConfig};
use simlab::domain::{BitString, Domain, FiniteMetric, Point};
use simlab::pivot::PivotTable;
use simlab::reduce::{self, DistortionMode};
use simlab::rng;
use simlab::scan;
use simlab::stats;
use simlab::vc::{self, ConceptClass, UnitIntervals};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn gaussian_sample_means() {
    let ds = Domain::gaussian(2).sample(1_000_000, 1).unwrap();
    for c in 0..2 {
        let m = stats::mean(
            &ds.points()
                .iter()
                .map(|p| p.reals().unwrap()[c])
                .collect::<Vec<_>>(),
        );
        assert!(m.abs() <= 0.005, "coordinate {c} mean {m}");
    }
}

#[test]
fn char_size_values() {
    let h = Domain::hamming(100).char_size(100_000, 2).unwrap();
    assert!(close(h, 0.5, 0.005), "{h}");
    let g = Domain::gaussian(1).char_size(1_000_000, 3).unwrap();
    let exact = 2.0 / std::f64::consts::PI.sqrt();
    assert!(close(g, exact, 0.005), "{g}");
    assert!(close(
        Domain::gaussian(1).char_size(0, 0).unwrap(),
        exact,
        1e-12
    ));
    let cube = Domain::unit_cube(3).normalize(100_000, 4).unwrap();
    assert!(close(cube.char_size(100_000, 5).unwrap(), 1.0, 0.01));
    assert_eq!(
        Domain::hamming(64)
            .normalize(0, 0)
            .unwrap()
            .char_size(0, 0)
            .unwrap(),
        1.0
    );
}

#[test]
fn chernoff_and_exact_alpha() {
    assert!(close(
        concentration::chernoff_alpha_bound(0.1, 100),
        0.13534,
        1e-5
    ));
    assert!(close(
        concentration::chernoff_alpha_bound(0.5, 100),
        1.9287e-22,
        1e-25
    ));
    let exact = concentration::exact_hamming_alpha(100, 0.1);
    assert!(close(exact, binomial_upper_tail(100, 61), 1e-12));
    assert!(close(exact, 0.0176, 1e-4));
    for d in [10, 100, 1000] {
        for &e in &concentration::unit_grid(100) {
            if e > 0.0 {
                let j =
                    (d as f64 / 2.0).floor() as usize + (e * d as f64 + 1e-9).floor() as usize + 1;
                if d % 2 == 0 {
                    assert!(close(
                        concentration::exact_hamming_alpha(d, e),
                        binomial_upper_tail(d, j),
                        1e-12
                    ));
                }
            }
        }
    }
}

#[test]
fn estimated_alpha_respects_bound() {
    let p =
        concentration::estimate_alpha(&Domain::hamming(100), &[0.0, 0.1], 100_000, 32, 6).unwrap();
    assert_eq!(p.alpha()[0], 0.5);
    assert!(p.alpha()[1] <= 0.1353, "{}", p.alpha()[1]);
    assert!(p.alpha()[1] <= concentration::exact_hamming_alpha(100, 0.1) + 0.01);
}

#[test]
fn estimated_alpha_decreases_with_dimension() {
    let at = |d: usize| {
        let dom = Domain::gaussian(d).normalize(0, 0).unwrap();
        concentration::estimate_alpha(&dom, &[0.0, 0.1], 20_000, 16, 7)
            .unwrap()
            .alpha()[1]
    };
    let (a10, a100) = (at(10), at(100));
    assert!(a100 < a10, "{a10} → {a100}");
}

#[test]
fn simplex_fraction_low_dimension() {
    let dom = Domain::hamming(10).normalize(0, 0).unwrap();
    let f = concentration::pairwise_simplex_check(&dom.sample(100, 8).unwrap(), 0.01).unwrap();
    assert!(f < 0.5, "{f}");
}

#[test]
fn dim_dist_of_hamming_cube() {
    for (d, seed) in [(10usize, 9u64), (100, 10)] {
        let dom = Domain::hamming(d).normalize(0, 0).unwrap();
        let ds = dom.sample(5000, seed).unwrap();
        let v = concentration::dim_dist(&ds, 100_000, seed).unwrap();
        let target = d as f64 / 2.0;
        assert!((v / target - 1.0).abs() <= 0.05, "d = {d}: {v}");
    }
}

#[test]
fn dim_alpha_of_gaussian_profile() {
    let grid: Vec<f64> = (0..10_000).map(|i| i as f64 / 9_999.0).collect();
    let values: Vec<f64> = grid.iter().map(|e| (-200.0 * e * e).exp()).collect();
    let v = concentration::dim_alpha_curve(&grid, &values).unwrap();
    assert!(close(v, 200.0 / std::f64::consts::PI, 1.0), "{v}");
}

#[test]
fn nn_curve_ignores_raw_scale() {
    let cfg = NnCurveConfig {
        n: 200,
        trials: 5,
        queries_per_trial: 10,
        ..NnCurveConfig::default()
    };
    let base = concentration::nn_distance_curve(
        DomainFamily::new(FamilyKind::Gaussian),
        &[5, 20],
        &cfg,
        11,
    )
    .unwrap();
    let scaled = DomainFamily {
        kind: FamilyKind::Gaussian,
        raw_scale: 37.0,
    };
    let other = concentration::nn_distance_curve(scaled, &[5, 20], &cfg, 11).unwrap();
    for (a, b) in base.iter().zip(&other) {
        assert!(close(a.value, b.value, 1e-9), "{} vs {}", a.value, b.value);
    }
}

#[test]
fn interval_shattering() {
    let cc = ConceptClass::intervals(&[1.0, 2.0, 3.0]).unwrap();
    assert!(vc::shatters(&cc, &[0, 2]).unwrap());
    assert!(!vc::shatters(&cc, &[0, 1, 2]).unwrap());
}

#[test]
fn closed_form_bounds() {
    assert_eq!(vc::ugc_sample_bound(2, 0.1, 0.05).unwrap(), 1243);
    assert_eq!(vc::ugc_sample_bound(1, 0.5, 0.5).unwrap(), 88);
    assert_eq!(vc::goldberg_jerrum_bound(3, 5), 84);
    assert_eq!(reduce::jl_target_dim(100, 0.4, 4.0).unwrap(), 116);
    assert_eq!(reduce::jl_target_dim(2, 0.25, 1.0).unwrap(), 12);
}

#[test]
fn sup_deviation_large_n() {
    let r = vc::empirical_sup_deviation(&UnitIntervals { grid: 45 }, 1_000_000, 10, 12).unwrap();
    assert!(r.per_trial.iter().all(|&v| v <= 0.01), "{:?}", r.per_trial);
}

#[test]
fn sup_deviation_shrinks_with_n() {
    let fam = UnitIntervals { grid: 45 };
    let medians: Vec<f64> = [100, 400, 1600]
        .iter()
        .map(|&n| {
            vc::empirical_sup_deviation(&fam, n, 100, 13)
                .unwrap()
                .median
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

fn unit_vector(d: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::rng(seed);
    let v: Vec<f64> = (0..d).map(|_| r.random::<f64>() - 0.5).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

#[test]
fn jl_preserves_squared_norm_on_average() {
    let x = Point::Reals(unit_vector(300, 14));
    let norms: Vec<f64> = (0..1000)
        .map(|s| {
            let y = reduce::jl_map(300, 128, s).unwrap().apply(&x).unwrap();
            y.reals().unwrap().iter().map(|v| v * v).sum()
        })
        .collect();
    let m = stats::mean(&norms);
    assert!(close(m, 1.0, 0.05), "{m}");
}

fn jl_report(k: usize, seed: u64) -> reduce::DistortionReport {
    let ds = Domain::gaussian(1000).sample(100, 15).unwrap();
    let img = reduce::jl_map(1000, k, seed)
        .unwrap()
        .apply_dataset(&ds)
        .unwrap();
    reduce::distortion_histogram(&ds, &img, DistortionMode::Multiplicative, 20).unwrap()
}

#[test]
fn jl_distortion_tightens_with_k() {
    let (a, b) = (jl_report(64, 16), jl_report(256, 16));
    assert!(b.summary.std < a.summary.std);
    for r in [&a, &b] {
        assert!((0.9..=1.1).contains(&r.summary.mean), "{}", r.summary.mean);
    }
}

#[test]
fn bit_sampling_is_unbiased() {
    let mut r = rng::rng(17);
    let (x, y) = (
        BitString::random(500, &mut r),
        BitString::random(500, &mut r),
    );
    let truth = x.hamming(&y) as f64 / 500.0;
    let (px, py) = (Point::Bits(x), Point::Bits(y));
    let d: Vec<f64> = (0..1000)
        .map(|s| {
            let m = reduce::bit_sample_map(500, 25, s).unwrap();
            let (a, b) = (m.apply(&px).unwrap(), m.apply(&py).unwrap());
            a.bits().unwrap().hamming(b.bits().unwrap()) as f64 / 25.0 - truth
        })
        .collect();
    let bound = 3.0 * stats::std_dev(&d) / 1000f64.sqrt();
    assert!(stats::mean(&d).abs() <= bound);
}

/// Probability that a Binomial(h, p) count is odd, by summing its pmf.
fn odd_parity(h: usize, p: f64) -> f64 {
    let mut pmf = (1.0 - p).powi(h as i32);
    let mut odd = 0.0;
    for i in 0..h {
        pmf *= (h - i) as f64 / (i + 1) as f64 * p / (1.0 - p);
        if i % 2 == 0 {
            odd += pmf;
        }
    }
    odd
}

#[test]
fn kor_closed_form() {
    for ell in [2, 8, 32] {
        for h in [1, 5, 16, 128] {
            assert!(close(
                reduce::kor_rate(h, ell),
                odd_parity(h, 1.0 / ell as f64),
                1e-12
            ));
        }
    }
    assert!(close(reduce::kor_rate(2000, 8), 0.5, 1e-9));
    assert!(close(
        reduce::kor_invert_rate(reduce::kor_rate(16, 32), 32).unwrap(),
        16.0,
        1e-9
    ));
}

#[test]
fn circle_projection_distortion() {
    let m = reduce::sphere_projection_distortion(2, 1_000_000, 18).unwrap();
    assert!(close(m, 2.0 / std::f64::consts::PI, 0.01), "{m}");
}

#[test]
fn cube_projection_concentrates() {
    let lo = reduce::cube_projection_scatter(3, 1000, 19).unwrap();
    let hi = reduce::cube_projection_scatter(1000, 1000, 19).unwrap();
    assert!(hi.radius_ratio() < lo.radius_ratio());
}

#[test]
fn pivot_overhead_matches_direct_count() {
    let dom = Domain::gaussian(14);
    let ds = dom.sample(20_000, 20).unwrap();
    let mut r = rng::rng(21);
    let pivot = dom.random_point(&mut r);
    let pt = PivotTable::build(&ds, vec![pivot.clone()]).unwrap();
    let qs: Vec<Point> = (0..20).map(|_| dom.random_point(&mut r)).collect();
    let eps = stats::mean(&scan::nn_distances(&ds, &qs));
    for q in &qs {
        let fq = dom.dist(&pivot, q);
        let inside = (0..ds.len())
            .filter(|&i| (dom.dist(&pivot, ds.point(i)) - fq).abs() < eps)
            .count();
        let hits = (0..ds.len()).filter(|&i| ds.dist_to(q, i) < eps).count();
        assert_eq!(pt.access_overhead(q, eps).unwrap(), inside - hits);
    }
}

#[test]
fn adversary_fixtures() {
    let tri = FiniteMetric::equilateral(3, 1.0).unwrap();
    let mut adv = Adversary::new(&tri).unwrap();
    assert_eq!(adv.answer(1).unwrap(), 1.0);
    let mut adv = Adversary::new(&tri).unwrap();
    adv.answer(0).unwrap();
    let f = adv.finalize(2, FinalizeMode::Default).unwrap();
    assert_eq!(f.values, vec![1.0, 1.0, 0.5]);
    assert_eq!(f.nearest(), vec![2]);

    let two = FiniteMetric::equilateral(2, 1.0).unwrap();
    assert!(!adversary::is_katetov(&two, &[0.2, 0.3]).unwrap());

    let m = FiniteMetric::from_rows(&[
        vec![0.0, 1.0, 0.6],
        vec![1.0, 0.0, 0.7],
        vec![0.6, 0.7, 0.0],
    ])
    .unwrap();
    let mut adv = Adversary::new(&m).unwrap();
    adv.answer(0).unwrap();
    adv.answer(1).unwrap();
    let f = adv.finalize(2, FinalizeMode::DistanceFormula).unwrap();
    assert!(close(f.values[2], 0.6, 1e-12));
}

#[test]
fn single_call_scanner_is_fooled() {
    let space = FiniteMetric::equilateral(8, 1.0).unwrap();
    let t = adversary::run_adversary_game(&space, &mut EarlyStop { calls: 1 }).unwrap();
    assert!(t.fooled);
    assert_eq!(t.answer, 0);
}
