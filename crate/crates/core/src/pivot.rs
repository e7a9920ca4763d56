//! Pivot tables: the map `x ↦ (ρ(x, p₁), …, ρ(x, p_k))` into `ℓ∞(k)` used as a filter.
//!
//! Each coordinate is 1-Lipschitz, so `lb(x) = maxᵢ |ρ(q, pᵢ) − ρ(x, pᵢ)|` never exceeds
//! `ρ(q, x)`. Range queries discard `x` when `lb(x) ≥ ε` and verify the survivors.

use std::collections::BinaryHeap;

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Dataset, Point};
use crate::error::{invalid, Result};
use crate::rng;
use crate::stats;

/// Cost accounting for a single query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub distance_computations: usize,
    pub candidates: usize,
    pub discarded: usize,
    pub true_hits: usize,
}

impl QueryStats {
    /// `acc_f(q)`: candidates that turned out not to be hits.
    pub fn access_overhead(&self) -> usize {
        self.candidates - self.true_hits
    }
}

#[derive(Clone, Debug)]
pub struct PivotTable<'a> {
    dataset: &'a Dataset,
    pivots: Vec<Point>,
    /// Row-major `n × k`.
    table: Vec<f64>,
}

impl<'a> PivotTable<'a> {
    pub fn build(dataset: &'a Dataset, pivots: Vec<Point>) -> Result<Self> {
        if dataset.is_empty() {
            return invalid("cannot index an empty dataset");
        }
        if pivots.is_empty() {
            return invalid("need at least one pivot");
        }
        for p in &pivots {
            dataset.domain().validate_point(p)?;
        }
        let k = pivots.len();
        let mut table = vec![0.0; dataset.len() * k];
        table.par_chunks_mut(k).enumerate().for_each(|(j, row)| {
            for (i, p) in pivots.iter().enumerate() {
                row[i] = dataset.dist_to(p, j);
            }
        });
        Ok(PivotTable {
            dataset,
            pivots,
            table,
        })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn pivots(&self) -> &[Point] {
        &self.pivots
    }

    pub fn k(&self) -> usize {
        self.pivots.len()
    }

    /// Distance computations spent on the build, always `n·k`.
    pub fn build_distance_computations(&self) -> usize {
        self.table.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.table[j * self.k()..(j + 1) * self.k()]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.dataset.len()).map(|j| self.row(j)[i]).collect()
    }

    /// `(ρ(q, p₁), …, ρ(q, p_k))`.
    pub fn project(&self, q: &Point) -> Vec<f64> {
        let dom = self.dataset.domain();
        self.pivots.iter().map(|p| dom.dist(q, p)).collect()
    }

    fn lower_bound(&self, fq: &[f64], j: usize) -> f64 {
        self.row(j)
            .iter()
            .zip(fq)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// All lower bounds `lb(x)` for a query.
    pub fn lower_bounds(&self, q: &Point) -> Vec<f64> {
        let fq = self.project(q);
        (0..self.dataset.len())
            .map(|j| self.lower_bound(&fq, j))
            .collect()
    }

    /// Indices `x` with `ρ(q, x) < ε`, ascending.
    pub fn range_query(&self, q: &Point, eps: f64) -> Result<(Vec<usize>, QueryStats)> {
        if !(eps > 0.0) {
            return invalid("range queries need ε > 0");
        }
        let fq = self.project(q);
        let n = self.dataset.len();
        let mut hits = Vec::new();
        let mut candidates = 0;
        for j in 0..n {
            let lb = self.lower_bound(&fq, j);
            if lb >= eps {
                continue;
            }
            candidates += 1;
            let d = self.dataset.dist_to(q, j);
            debug_assert!(
                lb <= d + 1e-9,
                "pivot lower bound {lb} exceeds distance {d}"
            );
            if d < eps {
                hits.push(j);
            }
        }
        let stats = QueryStats {
            distance_computations: self.k() + candidates,
            candidates,
            discarded: n - candidates,
            true_hits: hits.len(),
        };
        Ok((hits, stats))
    }

    /// Exact `m` nearest neighbours, nearest first, ties by index.
    pub fn knn_query(&self, q: &Point, m: usize) -> Result<(Vec<(usize, f64)>, QueryStats)> {
        let n = self.dataset.len();
        if m == 0 || m > n {
            return invalid(format!("need 1 ≤ m ≤ n = {n}, got m = {m}"));
        }
        let fq = self.project(q);
        let mut order: Vec<(f64, usize)> = (0..n).map(|j| (self.lower_bound(&fq, j), j)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best: BinaryHeap<Neighbour> = BinaryHeap::with_capacity(m + 1);
        let mut verified = 0;
        for (lb, j) in order {
            if best.len() == m && lb > best.peek().expect("heap is full").dist {
                break;
            }
            verified += 1;
            let d = self.dataset.dist_to(q, j);
            debug_assert!(
                lb <= d + 1e-9,
                "pivot lower bound {lb} exceeds distance {d}"
            );
            best.push(Neighbour { dist: d, index: j });
            if best.len() > m {
                best.pop();
            }
        }
        let hits: Vec<(usize, f64)> = best
            .into_sorted_vec()
            .into_iter()
            .map(|nb| (nb.index, nb.dist))
            .collect();
        let stats = QueryStats {
            distance_computations: self.k() + verified,
            candidates: verified,
            discarded: n - verified,
            true_hits: hits.len(),
        };
        Ok((hits, stats))
    }

    /// `|X ∩ f⁻¹(B_ε(f(q)))| − |X ∩ B_ε(q)|`.
    pub fn access_overhead(&self, q: &Point, eps: f64) -> Result<usize> {
        Ok(self.range_query(q, eps)?.1.access_overhead())
    }

    /// Runs range queries in parallel, preserving query order.
    pub fn range_batch(
        &self,
        queries: &[Point],
        eps: f64,
    ) -> Result<Vec<(Vec<usize>, QueryStats)>> {
        queries
            .par_iter()
            .map(|q| self.range_query(q, eps))
            .collect()
    }

    /// Measures how much of `sample` lies in every pivot shell `{x : |ρ(x, pᵢ) − Mᵢ| ≤ ε/2}`,
    /// where `Mᵢ` is the median pivot distance over the dataset.
    pub fn shell_intersection(&self, eps: f64, sample: &[Point]) -> ShellReport {
        let medians: Vec<f64> = (0..self.k())
            .map(|i| stats::lower_median(&self.column(i)))
            .collect();
        let inside = sample
            .par_iter()
            .filter(|x| {
                let fx = self.project(x);
                fx.iter()
                    .zip(&medians)
                    .all(|(d, m)| (d - m).abs() <= eps / 2.0)
            })
            .count();
        ShellReport {
            medians,
            half_width: eps / 2.0,
            fraction: inside as f64 / sample.len().max(1) as f64,
        }
    }
}

/// Median pivot radii and the sampled measure of the intersection of their shells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellReport {
    pub medians: Vec<f64>,
    pub half_width: f64,
    pub fraction: f64,
}

#[derive(Clone, Copy, Debug)]
struct Neighbour {
    dist: f64,
    index: usize,
}

impl PartialEq for Neighbour {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Neighbour {}

impl PartialOrd for Neighbour {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbour {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

/// How pivots are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PivotStrategy {
    RandomFromDomain,
    RandomFromData,
    /// Max-min greedy. The start index is drawn from the seed when absent.
    FarthestFirst {
        start: Option<usize>,
    },
}

pub fn select_pivots(
    ds: &Dataset,
    k: usize,
    strategy: PivotStrategy,
    seed: u64,
) -> Result<Vec<Point>> {
    if k == 0 {
        return invalid("need at least one pivot");
    }
    let n = ds.len();
    let mut r = rng::child(seed, "pivots");
    match strategy {
        PivotStrategy::RandomFromDomain => {
            Ok((0..k).map(|_| ds.domain().random_point(&mut r)).collect())
        }
        PivotStrategy::RandomFromData => {
            if k > n {
                return invalid(format!("cannot pick {k} distinct datapoints from {n}"));
            }
            let mut idx = index::sample(&mut r, n, k).into_vec();
            idx.sort_unstable();
            Ok(idx.into_iter().map(|i| ds.point(i).clone()).collect())
        }
        PivotStrategy::FarthestFirst { start } => {
            if k > n {
                return invalid(format!("cannot pick {k} distinct datapoints from {n}"));
            }
            let start = match start {
                Some(s) if s < n => s,
                Some(s) => return invalid(format!("start index {s} out of range for {n} points")),
                None => r.random_range(0..n),
            };
            let mut min_dist = vec![f64::INFINITY; n];
            let mut chosen = Vec::with_capacity(k);
            for step in 0..k {
                let next = if step == 0 {
                    argmax(&(0..n).map(|j| ds.dist(start, j)).collect::<Vec<_>>())
                } else {
                    argmax(&min_dist)
                };
                chosen.push(next);
                for (j, m) in min_dist.iter_mut().enumerate() {
                    *m = m.min(ds.dist(next, j));
                }
            }
            Ok(chosen.into_iter().map(|i| ds.point(i).clone()).collect())
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| {
            if x > bv {
                (i, x)
            } else {
                (bi, bv)
            }
        })
        .0
}
