//! Witness-approximated Delaunay graphs and greedy search over them.
//!
//! Two datapoints are Delaunay-adjacent when their Voronoi cells touch. A witness
//! point whose nearest and second-nearest datapoints are `x` and `y` lies close to
//! the common boundary of their cells, so every witness contributes one edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Dataset, Point};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scan;

const WITNESS_CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<usize>>,
    witness_count: usize,
    witnesses: Option<BTreeMap<(usize, usize), Point>>,
}

impl NeighborGraph {
    /// Builds a symmetric graph without self-loops from an edge list.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) out of range for {n} vertices"));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(NeighborGraph {
            adjacency,
            witness_count: 0,
            witnesses: None,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
        Self::from_edges(n, edges).expect("indices are in range")
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn witness_count(&self) -> usize {
        self.witness_count
    }

    /// First witness recorded for each edge, if the graph was built keeping them.
    pub fn witnesses(&self) -> Option<&BTreeMap<(usize, usize), Point>> {
        self.witnesses.as_ref()
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// One `i j` line per edge, `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.edges() {
            writeln!(s, "{i} {j}").expect("writing to a String");
        }
        s
    }

    /// Re-checks that every stored witness still has its edge's endpoints as two nearest datapoints.
    pub fn verify_witnesses(&self, ds: &Dataset) -> Result<()> {
        let Some(w) = &self.witnesses else {
            return Err(Error::InvalidState(
                "graph was built without keeping witnesses".into(),
            ));
        };
        for (&(a, b), q) in w {
            let ((x, _), (y, _)) = scan::two_nearest(ds, q).expect("at least two datapoints");
            if (x.min(y), x.max(y)) != (a, b) {
                return Err(Error::InvalidState(format!(
                    "witness for ({a}, {b}) now selects ({x}, {y})"
                )));
            }
        }
        Ok(())
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let degrees: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut histogram = vec![0; max + 1];
        for &d in &degrees {
            histogram[d] += 1;
        }
        DegreeStats {
            mean: degrees.iter().sum::<usize>() as f64 / degrees.len().max(1) as f64,
            max,
            histogram,
        }
    }
}

/// `histogram[k]` is the number of vertices of degree `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeStats {
    pub mean: f64,
    pub max: usize,
    pub histogram: Vec<usize>,
}

/// Witness graph with witnesses drawn from the dataset's domain.
pub fn build_witness_graph(
    ds: &Dataset,
    witness_samples: usize,
    seed: u64,
) -> Result<NeighborGraph> {
    let dom = ds.domain();
    build_witness_graph_with(ds, |r| dom.random_point(r), witness_samples, seed, false)
}

/// Witness graph with a custom witness sampler, optionally keeping the first witness per edge.
pub fn build_witness_graph_with<S>(
    ds: &Dataset,
    sampler: S,
    witness_samples: usize,
    seed: u64,
    keep_witnesses: bool,
) -> Result<NeighborGraph>
where
    S: Fn(&mut rng::Rng) -> Point + Sync,
{
    if ds.len() < 2 {
        return invalid("a witness graph needs at least two datapoints");
    }
    if witness_samples == 0 {
        return invalid("need at least one witness");
    }
    let chunks = witness_samples.div_ceil(WITNESS_CHUNK);
    let per_chunk: Vec<BTreeMap<(usize, usize), Point>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::rng(rng::derive_indexed(seed, "witness_chunk", c as u64));
            let count = WITNESS_CHUNK.min(witness_samples - c * WITNESS_CHUNK);
            let mut edges = BTreeMap::new();
            for _ in 0..count {
                let q = sampler(&mut r);
                let ((a, _), (b, _)) = scan::two_nearest(ds, &q).expect("at least two datapoints");
                edges.entry((a.min(b), a.max(b))).or_insert(q);
            }
            edges
        })
        .collect();
    let mut merged: BTreeMap<(usize, usize), Point> = BTreeMap::new();
    for chunk in per_chunk {
        for (e, q) in chunk {
            merged.entry(e).or_insert(q);
        }
    }
    let mut g = NeighborGraph::from_edges(ds.len(), merged.keys().copied())?;
    g.witness_count = witness_samples;
    if keep_witnesses {
        g.witnesses = Some(merged);
    }
    Ok(g)
}

/// The exact Delaunay graph of points on a line: consecutive points in sorted order.
pub fn delaunay_line(ds: &Dataset) -> Result<NeighborGraph> {
    let mut order: Vec<(f64, usize)> = ds
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| match p.reals() {
            Some([v]) => Ok((*v, i)),
            _ => invalid("line Delaunay graphs need one-dimensional real points"),
        })
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    NeighborGraph::from_edges(ds.len(), order.windows(2).map(|w| (w[0].1, w[1].1)))
}

/// Outcome of one greedy walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyResult {
    pub answer: usize,
    pub distance: f64,
    pub path: Vec<usize>,
    pub distance_evaluations: usize,
}

/// Moves to the closest vertex of the closed neighbourhood until staying put is best.
pub fn greedy_nn(
    graph: &NeighborGraph,
    ds: &Dataset,
    q: &Point,
    start: usize,
) -> Result<GreedyResult> {
    if graph.len() != ds.len() {
        return invalid("graph and dataset sizes differ");
    }
    if start >= ds.len() {
        return invalid(format!(
            "start {start} out of range for {} points",
            ds.len()
        ));
    }
    let mut cache: Vec<Option<f64>> = vec![None; ds.len()];
    let mut evaluations = 0;
    let mut dist = |i: usize| -> f64 {
        *cache[i].get_or_insert_with(|| {
            evaluations += 1;
            ds.dist_to(q, i)
        })
    };
    let mut x = start;
    let mut dx = dist(x);
    let mut path = vec![x];
    loop {
        let mut best = (x, dx);
        for &y in graph.neighbors(x) {
            let dy = dist(y);
            if dy < best.1 {
                best = (y, dy);
            }
        }
        if best.0 == x {
            break;
        }
        debug_assert!(best.1 < dx);
        x = best.0;
        dx = best.1;
        path.push(x);
        assert!(path.len() <= ds.len(), "greedy walk exceeded n steps");
    }
    Ok(GreedyResult {
        answer: x,
        distance: dx,
        path,
        distance_evaluations: evaluations,
    })
}

/// Greedy walks from `restarts` random starts, keeping the closest answer (lowest index on ties).
pub fn greedy_nn_restarts(
    graph: &NeighborGraph,
    ds: &Dataset,
    q: &Point,
    restarts: usize,
    seed: u64,
) -> Result<GreedyResult> {
    if restarts == 0 {
        return invalid("need at least one start");
    }
    let mut r = rng::child(seed, "greedy_starts");
    let mut best: Option<GreedyResult> = None;
    let mut evaluations = 0;
    for _ in 0..restarts {
        let res = greedy_nn(graph, ds, q, r.random_range(0..ds.len()))?;
        evaluations += res.distance_evaluations;
        let better = best.as_ref().is_none_or(|b| {
            res.distance < b.distance || (res.distance == b.distance && res.answer < b.answer)
        });
        if better {
            best = Some(res);
        }
    }
    let mut best = best.expect("at least one restart");
    best.distance_evaluations = evaluations;
    Ok(best)
}
