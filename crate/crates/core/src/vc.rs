//! Shattering, restricted VC dimension and uniform Glivenko–Cantelli checks.

use std::collections::HashSet;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BitString, Domain, Point};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::stats;

/// Largest subset whose `2^k` traces we are willing to enumerate.
pub const MAX_SHATTER_SIZE: usize = 25;
/// Largest number of `k`-subsets a VC search may visit.
pub const MAX_SEARCH_CONFIGURATIONS: f64 = 1e8;

/// How a concept class was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    Intervals,
    HalfPlanes,
    Balls(usize),
    Rectangles(usize),
    HammingBalls(usize),
    Explicit,
}

/// A family of subsets of a finite ground set `{0, …, m−1}`, stored as `m`-bit strings.
#[derive(Clone, Debug, PartialEq)]
pub struct ConceptClass {
    m: usize,
    ground: Vec<Vec<f64>>,
    concepts: Vec<BitString>,
    generator: Generator,
}

impl ConceptClass {
    /// Builds a class from explicit concepts, dropping duplicates.
    pub fn explicit(m: usize, concepts: Vec<BitString>) -> Result<Self> {
        Self::build(m, Vec::new(), concepts, Generator::Explicit)
    }

    fn build(
        m: usize,
        ground: Vec<Vec<f64>>,
        concepts: Vec<BitString>,
        generator: Generator,
    ) -> Result<Self> {
        if !ground.is_empty() && ground.len() != m {
            return invalid("ground coordinates must cover every element");
        }
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for c in concepts {
            if c.len() != m {
                return invalid(format!(
                    "concept has {} bits, ground has {m} elements",
                    c.len()
                ));
            }
            if seen.insert(c.clone()) {
                kept.push(c);
            }
        }
        Ok(ConceptClass {
            m,
            ground,
            concepts: kept,
            generator,
        })
    }

    fn from_predicate<F>(
        ground: Vec<Vec<f64>>,
        generator: Generator,
        mut shapes: Vec<F>,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool,
    {
        let m = ground.len();
        let concepts = shapes
            .drain(..)
            .map(|inside| {
                BitString::from_bools(&ground.iter().map(|p| inside(p)).collect::<Vec<_>>())
            })
            .collect();
        Self::build(m, ground, concepts, generator)
    }

    /// Closed intervals on points of the line.
    pub fn intervals(xs: &[f64]) -> Result<Self> {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut shapes: Vec<Box<dyn Fn(&[f64]) -> bool>> = vec![Box::new(|_: &[f64]| false)];
        for i in 0..sorted.len() {
            for j in i..sorted.len() {
                let (a, b) = (sorted[i], sorted[j]);
                shapes.push(Box::new(move |p: &[f64]| a <= p[0] && p[0] <= b));
            }
        }
        Self::from_predicate(
            xs.iter().map(|&x| vec![x]).collect(),
            Generator::Intervals,
            shapes,
        )
    }

    /// Closed half-planes on planar points in general position.
    pub fn half_planes(pts: &[[f64; 2]]) -> Result<Self> {
        let ground: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
        let m = pts.len();
        let mut concepts = vec![BitString::zeros(m), BitString::ones(m)];
        for i in 0..m {
            for j in (i + 1)..m {
                let side: Vec<f64> = pts.iter().map(|p| orient(pts[i], pts[j], *p)).collect();
                push_boundary_variants(&mut concepts, &side, &[i, j], true);
            }
        }
        Self::build(m, ground, concepts, Generator::HalfPlanes)
    }

    /// Closed Euclidean balls. Dimension 1 gives intervals, dimension 2 disks.
    pub fn balls(pts: &[Vec<f64>], dim: usize) -> Result<Self> {
        if pts.iter().any(|p| p.len() != dim) {
            return invalid(format!("all points must have dimension {dim}"));
        }
        match dim {
            1 => {
                let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
                let mut cc = Self::intervals(&xs)?;
                cc.generator = Generator::Balls(1);
                Ok(cc)
            }
            2 => {
                let p2: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
                let mut concepts = Self::half_planes(&p2)?.concepts;
                let m = pts.len();
                for i in 0..m {
                    let mut single = BitString::zeros(m);
                    single.set(i, true);
                    concepts.push(single);
                }
                for i in 0..m {
                    for j in (i + 1)..m {
                        for k in (j + 1)..m {
                            if let Some((c, r2)) = circumcircle(p2[i], p2[j], p2[k]) {
                                let side: Vec<f64> = p2
                                    .iter()
                                    .map(|p| {
                                        let d2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                                        let s = r2 - d2;
                                        if s.abs() <= 1e-9 * r2.max(1.0) {
                                            0.0
                                        } else {
                                            s
                                        }
                                    })
                                    .collect();
                                push_boundary_variants(&mut concepts, &side, &[i, j, k], false);
                            }
                        }
                    }
                }
                Self::build(m, pts.to_vec(), concepts, Generator::Balls(2))
            }
            _ => invalid(format!(
                "ball enumeration is implemented for dimensions 1 and 2, not {dim}"
            )),
        }
    }

    /// Closed axis-parallel boxes.
    pub fn rectangles(pts: &[Vec<f64>], dim: usize) -> Result<Self> {
        if dim == 0 || pts.iter().any(|p| p.len() != dim) {
            return invalid(format!("all points must have dimension {dim} ≥ 1"));
        }
        let m = pts.len();
        let axis_ranges: Vec<Vec<(f64, f64)>> = (0..dim)
            .map(|a| {
                let mut v: Vec<f64> = pts.iter().map(|p| p[a]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                let mut r = Vec::new();
                for i in 0..v.len() {
                    for j in i..v.len() {
                        r.push((v[i], v[j]));
                    }
                }
                r
            })
            .collect();
        let total: f64 = axis_ranges.iter().map(|r| r.len() as f64).product();
        if total > MAX_SEARCH_CONFIGURATIONS {
            return Err(Error::ResourceLimit(format!("{total} boxes to enumerate")));
        }
        let mut concepts = vec![BitString::zeros(m)];
        let mut idx = vec![0usize; dim];
        'outer: loop {
            let bits: Vec<bool> = pts
                .iter()
                .map(|p| {
                    (0..dim).all(|a| {
                        let (lo, hi) = axis_ranges[a][idx[a]];
                        lo <= p[a] && p[a] <= hi
                    })
                })
                .collect();
            concepts.push(BitString::from_bools(&bits));
            for a in 0..dim {
                idx[a] += 1;
                if idx[a] < axis_ranges[a].len() {
                    continue 'outer;
                }
                idx[a] = 0;
            }
            break;
        }
        Self::build(m, pts.to_vec(), concepts, Generator::Rectangles(dim))
    }

    /// All closed Hamming balls of the cube `{0,1}^d`, with the whole cube as ground set.
    pub fn hamming_balls(d: usize) -> Result<Self> {
        if d == 0 || d > 12 {
            return invalid("Hamming-ball classes are enumerated for 1 ≤ d ≤ 12");
        }
        let m = 1usize << d;
        let ground: Vec<Vec<f64>> = (0..m)
            .map(|x| (0..d).map(|b| ((x >> b) & 1) as f64).collect())
            .collect();
        let mut concepts = Vec::new();
        for c in 0..m {
            for r in 0..=d {
                let bits: Vec<bool> = (0..m)
                    .map(|x| ((x ^ c).count_ones() as usize) <= r)
                    .collect();
                concepts.push(BitString::from_bools(&bits));
            }
        }
        Self::build(m, ground, concepts, Generator::HammingBalls(d))
    }

    /// `count` uniformly random subsets of an `m`-element ground set (duplicates dropped).
    pub fn random(m: usize, count: usize, seed: u64) -> Result<Self> {
        let mut r = rng::child(seed, "concepts");
        let concepts = (0..count).map(|_| BitString::random(m, &mut r)).collect();
        Self::explicit(m, concepts)
    }

    pub fn ground_size(&self) -> usize {
        self.m
    }

    pub fn ground(&self) -> &[Vec<f64>] {
        &self.ground
    }

    pub fn concepts(&self) -> &[BitString] {
        &self.concepts
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ConceptClassJson {
            generator: self.generator,
            m: self.m,
            ground: self.ground.clone(),
            concepts: self
                .concepts
                .iter()
                .map(|c| hex::encode(c.to_bytes()))
                .collect(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ConceptClassJson = serde_json::from_str(s)?;
        let concepts = j
            .concepts
            .iter()
            .map(|h| {
                let bytes = hex::decode(h)
                    .map_err(|e| Error::InvalidArgument(format!("bad hex concept: {e}")))?;
                BitString::from_bytes(&bytes, j.m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(j.m, j.ground, concepts, j.generator)
    }
}

#[derive(Serialize, Deserialize)]
struct ConceptClassJson {
    generator: Generator,
    m: usize,
    ground: Vec<Vec<f64>>,
    concepts: Vec<String>,
}

fn orient(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let v = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if v.abs() <= 1e-12 {
        0.0
    } else {
        v
    }
}

fn circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<([f64; 2], f64)> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-12 {
        return None;
    }
    let (a2, b2, c2) = (
        a[0] * a[0] + a[1] * a[1],
        b[0] * b[0] + b[1] * b[1],
        c[0] * c[0] + c[1] * c[1],
    );
    let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
    let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
    let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
    Some(([ux, uy], r2))
}

/// Pushes the traces `{side > 0} ∪ S` for each `S ⊆ boundary`, and with `both_sides`
/// also `{side < 0} ∪ S`. When further points lie on the boundary only `S = ∅` and
/// `S = all zeros` are kept.
fn push_boundary_variants(
    out: &mut Vec<BitString>,
    side: &[f64],
    boundary: &[usize],
    both_sides: bool,
) {
    let m = side.len();
    let signs: &[f64] = if both_sides { &[1.0, -1.0] } else { &[1.0] };
    let zeros: Vec<usize> = (0..m).filter(|&i| side[i] == 0.0).collect();
    if zeros.len() > boundary.len() {
        for &sign in signs {
            let open: Vec<bool> = side.iter().map(|&s| s * sign > 0.0).collect();
            let closed: Vec<bool> = side.iter().map(|&s| s * sign >= 0.0).collect();
            out.push(BitString::from_bools(&open));
            out.push(BitString::from_bools(&closed));
        }
        return;
    }
    for &sign in signs {
        for mask in 0..(1u32 << boundary.len()) {
            let mut bits: Vec<bool> = side.iter().map(|&s| s * sign > 0.0).collect();
            for (t, &b) in boundary.iter().enumerate() {
                bits[b] = mask >> t & 1 == 1;
            }
            debug_assert_eq!(bits.len(), m);
            out.push(BitString::from_bools(&bits));
        }
    }
}

/// Whether every subset of `subset` is cut out by some concept.
pub fn shatters(cc: &ConceptClass, subset: &[usize]) -> Result<bool> {
    if subset.len() > MAX_SHATTER_SIZE {
        return Err(Error::ResourceLimit(format!(
            "cannot enumerate 2^{} traces (limit 2^{MAX_SHATTER_SIZE})",
            subset.len()
        )));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= cc.m) {
        return invalid(format!(
            "element {bad} is outside the ground set of size {}",
            cc.m
        ));
    }
    Ok(shatters_unchecked(cc, subset))
}

fn shatters_unchecked(cc: &ConceptClass, subset: &[usize]) -> bool {
    let needed = 1usize << subset.len();
    if cc.concepts.len() < needed {
        return false;
    }
    let mut seen = vec![false; needed];
    let mut count = 0;
    for c in &cc.concepts {
        let trace = subset
            .iter()
            .enumerate()
            .fold(0usize, |acc, (t, &i)| acc | (usize::from(c.get(i)) << t));
        if !seen[trace] {
            seen[trace] = true;
            count += 1;
            if count == needed {
                return true;
            }
        }
    }
    false
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Lexicographically first shattered `k`-subset, if any.
pub fn find_shattered(cc: &ConceptClass, k: usize) -> Result<Option<Vec<usize>>> {
    check_search(cc, k)?;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        if shatters_unchecked(cc, &combo) {
            return Ok(Some(combo));
        }
        if !next_combination(&mut combo, cc.m) {
            return Ok(None);
        }
    }
}

fn check_search(cc: &ConceptClass, k: usize) -> Result<()> {
    if k > MAX_SHATTER_SIZE {
        return Err(Error::ResourceLimit(format!(
            "subset size {k} exceeds {MAX_SHATTER_SIZE}"
        )));
    }
    if k > cc.m {
        return invalid(format!("subset size {k} exceeds ground size {}", cc.m));
    }
    let configs = binomial(cc.m, k);
    if configs > MAX_SEARCH_CONFIGURATIONS {
        return Err(Error::ResourceLimit(format!(
            "C({}, {k}) = {configs:.3e} subsets exceeds the search budget",
            cc.m
        )));
    }
    Ok(())
}

fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < m - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn some_shattered(cc: &ConceptClass, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    (0..=cc.m - k).into_par_iter().any(|first| {
        let mut rest: Vec<usize> = (first + 1..first + k).collect();
        let mut subset = Vec::with_capacity(k);
        loop {
            subset.clear();
            subset.push(first);
            subset.extend_from_slice(&rest);
            if shatters_unchecked(cc, &subset) {
                return true;
            }
            if rest.is_empty() || !next_combination_from(&mut rest, first + 1, cc.m) {
                return false;
            }
        }
    })
}

/// Advances a combination drawn from `lo..m`.
fn next_combination_from(c: &mut [usize], lo: usize, m: usize) -> bool {
    for v in c.iter_mut() {
        *v -= lo;
    }
    let more = next_combination(c, m - lo);
    for v in c.iter_mut() {
        *v += lo;
    }
    more
}

/// Largest `k ≤ cap` such that some `k`-subset of the ground set is shattered.
pub fn vc_dimension(cc: &ConceptClass, cap: usize) -> Result<usize> {
    if cap > MAX_SHATTER_SIZE {
        return Err(Error::ResourceLimit(format!(
            "cap {cap} exceeds {MAX_SHATTER_SIZE}"
        )));
    }
    let mut best = 0;
    for k in 1..=cap.min(cc.m) {
        if (1usize << k) > cc.concepts.len() {
            break;
        }
        check_search(cc, k)?;
        if !some_shattered(cc, k) {
            break;
        }
        best = k;
    }
    Ok(best)
}

/// `⌈max{(8d/ε)·lg(8e/ε), (4/ε)·lg(2/δ)}⌉`.
pub fn ugc_sample_bound(d: usize, eps: f64, delta: f64) -> Result<u64> {
    if d == 0 || !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return invalid("need d ≥ 1 and ε, δ in (0, 1)");
    }
    let a = 8.0 * d as f64 / eps * (8.0 * std::f64::consts::E / eps).log2();
    let b = 4.0 / eps * (2.0 / delta).log2();
    Ok(a.max(b).ceil() as u64)
}

/// `4s(t + 2)`, the VC bound for classes computed by `t` operations on `s` parameters.
pub fn goldberg_jerrum_bound(s: u64, t: u64) -> u64 {
    4 * s * (t + 2)
}

/// A finite list of probe concepts over a sampled domain with known measures.
pub trait ConceptFamily: Sync {
    fn probe_count(&self) -> usize;
    fn true_measure(&self, probe: usize) -> f64;
    fn contains(&self, probe: usize, x: &Point) -> bool;
    fn sample(&self, n: usize, rng: &mut rng::Rng) -> Vec<Point>;

    /// Empirical measure of every probe on `sample`.
    fn empirical(&self, sample: &[Point]) -> Vec<f64> {
        (0..self.probe_count())
            .map(|p| {
                sample.iter().filter(|x| self.contains(p, x)).count() as f64 / sample.len() as f64
            })
            .collect()
    }
}

/// Intervals `[i/g, j/g]` under the uniform measure on `[0, 1]`.
#[derive(Clone, Copy, Debug)]
pub struct UnitIntervals {
    pub grid: usize,
}

impl UnitIntervals {
    fn endpoints(&self, probe: usize) -> (f64, f64) {
        let mut p = probe;
        for i in 0..self.grid {
            let row = self.grid - i;
            if p < row {
                let j = i + 1 + p;
                return (i as f64 / self.grid as f64, j as f64 / self.grid as f64);
            }
            p -= row;
        }
        panic!("probe {probe} out of range")
    }
}

impl ConceptFamily for UnitIntervals {
    fn probe_count(&self) -> usize {
        self.grid * (self.grid + 1) / 2
    }

    fn true_measure(&self, probe: usize) -> f64 {
        let (a, b) = self.endpoints(probe);
        b - a
    }

    fn contains(&self, probe: usize, x: &Point) -> bool {
        let (a, b) = self.endpoints(probe);
        let v = x.reals().expect("interval probes need real points")[0];
        a <= v && v <= b
    }

    fn sample(&self, n: usize, rng: &mut rng::Rng) -> Vec<Point> {
        (0..n)
            .map(|_| Point::Reals(vec![rng.random::<f64>()]))
            .collect()
    }

    fn empirical(&self, sample: &[Point]) -> Vec<f64> {
        let mut xs: Vec<f64> = sample
            .iter()
            .map(|p| p.reals().expect("real points")[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        (0..self.probe_count())
            .map(|p| {
                let (a, b) = self.endpoints(p);
                let lo = xs.partition_point(|&v| v < a);
                let hi = xs.partition_point(|&v| v <= b);
                (hi - lo) as f64 / n
            })
            .collect()
    }
}

/// The single concept "everything" over a domain.
#[derive(Clone, Debug)]
pub struct FullSpace(pub Domain);

impl ConceptFamily for FullSpace {
    fn probe_count(&self) -> usize {
        1
    }

    fn true_measure(&self, _probe: usize) -> f64 {
        1.0
    }

    fn contains(&self, _probe: usize, _x: &Point) -> bool {
        true
    }

    fn sample(&self, n: usize, rng: &mut rng::Rng) -> Vec<Point> {
        (0..n).map(|_| self.0.random_point(rng)).collect()
    }
}

/// Closed balls around random domain points, measured against a large reference sample.
#[derive(Clone, Debug)]
pub struct DomainBalls {
    domain: Domain,
    balls: Vec<(Point, f64)>,
    reference: Vec<f64>,
}

impl DomainBalls {
    pub fn new(
        domain: Domain,
        probe_count: usize,
        reference_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if probe_count == 0 || reference_samples == 0 {
            return invalid("need probes and a reference sample");
        }
        let mut r = rng::child(seed, "balls");
        let balls: Vec<(Point, f64)> = (0..probe_count)
            .map(|_| {
                let c = domain.random_point(&mut r);
                let other = domain.random_point(&mut r);
                let radius = domain.dist(&c, &other);
                (c, radius)
            })
            .collect();
        let reference_set = domain.sample(reference_samples, rng::derive(seed, "reference"))?;
        let mut fam = DomainBalls {
            domain,
            balls,
            reference: Vec::new(),
        };
        fam.reference = fam.empirical(reference_set.points());
        Ok(fam)
    }
}

impl ConceptFamily for DomainBalls {
    fn probe_count(&self) -> usize {
        self.balls.len()
    }

    fn true_measure(&self, probe: usize) -> f64 {
        self.reference[probe]
    }

    fn contains(&self, probe: usize, x: &Point) -> bool {
        let (c, r) = &self.balls[probe];
        self.domain.dist(c, x) <= *r
    }

    fn sample(&self, n: usize, rng: &mut rng::Rng) -> Vec<Point> {
        (0..n).map(|_| self.domain.random_point(rng)).collect()
    }
}

/// Per-trial `sup_C |μ(C) − μ_n(C)|` with summary statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupDeviationReport {
    pub n: usize,
    pub per_trial: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub q95: f64,
}

impl SupDeviationReport {
    pub fn fraction_at_most(&self, eps: f64) -> f64 {
        self.per_trial.iter().filter(|&&v| v <= eps).count() as f64 / self.per_trial.len() as f64
    }
}

pub fn empirical_sup_deviation(
    family: &dyn ConceptFamily,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<SupDeviationReport> {
    if n == 0 || trials == 0 {
        return invalid("need n ≥ 1 and at least one trial");
    }
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::rng(rng::derive_indexed(seed, "sup_trial", t as u64));
            let sample = family.sample(n, &mut r);
            family
                .empirical(&sample)
                .iter()
                .enumerate()
                .map(|(p, e)| (family.true_measure(p) - e).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let mut sorted = per_trial.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(SupDeviationReport {
        n,
        max: sorted[sorted.len() - 1],
        mean: stats::mean(&per_trial),
        median: stats::lower_median(&per_trial),
        q95: stats::quantile_sorted(&sorted, 0.95),
        per_trial,
    })
}
