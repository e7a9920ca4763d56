#![allow(dead_code)]

use rand::Rng as _;
use simlab::domain::{Dataset, Domain, FiniteMetric, Point};
use simlab::rng;

/// Indices with `ρ(q, x) < eps`, by exhaustive scan.
pub fn brute_range(ds: &Dataset, q: &Point, eps: f64) -> Vec<usize> {
    (0..ds.len()).filter(|&i| ds.dist_to(q, i) < eps).collect()
}

/// The `m` nearest indices ordered by `(distance, index)`.
pub fn brute_knn(ds: &Dataset, q: &Point, m: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..ds.len()).map(|i| (i, ds.dist_to(q, i))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(m);
    all
}

/// `P[Bin(d, 1/2) ≥ j]` via the pmf recurrence in log space.
pub fn binomial_upper_tail(d: usize, j: usize) -> f64 {
    let mut log_pmf = -(d as f64) * std::f64::consts::LN_2;
    let mut total = 0.0;
    for i in 0..=d {
        if i >= j {
            total += log_pmf.exp();
        }
        log_pmf += ((d - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    total
}

/// A small random metric from points in the unit square.
pub fn random_finite(n: usize, seed: u64) -> Domain {
    let mut r = rng::rng(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            vec![
                rand::Rng::random::<f64>(&mut r),
                rand::Rng::random::<f64>(&mut r),
            ]
        })
        .collect();
    Domain::finite(FiniteMetric::from_points(&pts).unwrap())
}

/// One domain of each kind, raw (unnormalized) scale.
pub fn domain_zoo() -> Vec<Domain> {
    vec![
        Domain::hamming(64),
        Domain::gaussian(6),
        Domain::unit_cube(4),
        Domain::sphere(5),
        random_finite(300, 17),
    ]
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(r: &mut rng::Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rand::Rng::random::<f64>(r)
}

/// `(dataset, query, eps, m)` drawn across every domain kind.
pub fn cases(count: usize, seed: u64) -> Vec<(Dataset, Point, f64, usize)> {
    let zoo = domain_zoo();
    let mut r = rng::child(seed, "cases");
    (0..count)
        .map(|c| {
            let dom = &zoo[c % zoo.len()];
            let n = r.random_range(20..200);
            let ds = dom.sample(n, r.random()).unwrap();
            let q = if r.random::<f64>() < 0.2 {
                ds.point(r.random_range(0..n)).clone()
            } else {
                dom.random_point(&mut r)
            };
            let anchor = ds.dist_to(&q, r.random_range(0..n));
            let eps = anchor * uniform(&mut r, 0.0, 1.3) + 1e-9;
            (ds, q, eps, r.random_range(1..=10))
        })
        .collect()
}
