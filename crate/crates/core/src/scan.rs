//! Exhaustive nearest-neighbour computations.
//!
//! These are the baseline every index is measured against, and the way the
//! nearest-neighbour distance function `ε_NN(ω) = ρ(ω, X)` is evaluated.

use rayon::prelude::*;

use crate::domain::{Dataset, Point};
use crate::stats;

/// Index and distance of the closest datapoint, lowest index on ties.
///
/// `exclude` removes one datapoint from consideration (leave-one-out queries).
pub fn nearest(ds: &Dataset, q: &Point, exclude: Option<usize>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..ds.len() {
        if Some(i) == exclude {
            continue;
        }
        let d = ds.dist_to(q, i);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

/// Nearest and second-nearest datapoints, ties broken by index.
pub fn two_nearest(ds: &Dataset, q: &Point) -> Option<((usize, f64), (usize, f64))> {
    let mut first: Option<(usize, f64)> = None;
    let mut second: Option<(usize, f64)> = None;
    for i in 0..ds.len() {
        let d = ds.dist_to(q, i);
        match first {
            Some((_, fd)) if d >= fd => {
                if second.is_none_or(|(_, sd)| d < sd) {
                    second = Some((i, d));
                }
            }
            _ => {
                second = first;
                first = Some((i, d));
            }
        }
    }
    Some((first?, second?))
}

/// Nearest-neighbour distance for each query, computed in parallel.
pub fn nn_distances(ds: &Dataset, queries: &[Point]) -> Vec<f64> {
    queries
        .par_iter()
        .map(|q| {
            nearest(ds, q, None)
                .map(|(_, d)| d)
                .unwrap_or(f64::INFINITY)
        })
        .collect()
}

/// Lower median of the nearest-neighbour distances of `queries`.
pub fn median_nn_distance(ds: &Dataset, queries: &[Point]) -> f64 {
    stats::lower_median(&nn_distances(ds, queries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_with_ties_and_exclusion() {
        let ds = Dataset::on_line(&[0.0, 2.0, 4.0]).unwrap();
        let q = Point::Reals(vec![1.0]);
        assert_eq!(nearest(&ds, &q, None), Some((0, 1.0)));
        assert_eq!(nearest(&ds, &q, Some(0)), Some((1, 1.0)));
        let ((a, _), (b, _)) = two_nearest(&ds, &Point::Reals(vec![3.0])).unwrap();
        assert_eq!((a, b), (1, 2));
    }
}
