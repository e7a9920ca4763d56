//! Dimensionality reductions for approximate nearest-neighbour search and their distortion.

use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{gaussian_vector, sphere_vector, BitString, Dataset, Domain, Point};
use crate::error::{invalid, Result};
use crate::rng;
pub use crate::stats::HistogramBin;
use crate::stats::{self, histogram, Summary};

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    /// `x ↦ scale · Mx` with `M` a `k × d` matrix of `N(0, 1/d)` entries, row-major.
    Jl { matrix: Vec<f64>, scale: f64 },
    /// Restriction to sorted distinct coordinates.
    BitSample { indices: Vec<usize> },
    /// `x ↦ xA mod 2`, stored as the `k` columns of `A`.
    KorMod2 { columns: Vec<BitString>, ell: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionMap {
    kind: MapKind,
    source_dim: usize,
    target_dim: usize,
    seed: u64,
}

/// Gaussian random projection to `k` dimensions.
pub fn jl_map(d: usize, k: usize, seed: u64) -> Result<ReductionMap> {
    if k == 0 || k > d {
        return invalid(format!("need 1 ≤ k ≤ d, got k = {k}, d = {d}"));
    }
    let mut r = rng::child(seed, "jl");
    let sd = 1.0 / (d as f64).sqrt();
    let matrix = (0..k * d)
        .map(|_| sd * r.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(ReductionMap {
        kind: MapKind::Jl {
            matrix,
            scale: (d as f64 / k as f64).sqrt(),
        },
        source_dim: d,
        target_dim: k,
        seed,
    })
}

/// The identity in JL form, for checking the plumbing.
pub fn jl_identity(d: usize) -> ReductionMap {
    let mut matrix = vec![0.0; d * d];
    for i in 0..d {
        matrix[i * d + i] = 1.0;
    }
    ReductionMap {
        kind: MapKind::Jl { matrix, scale: 1.0 },
        source_dim: d,
        target_dim: d,
        seed: 0,
    }
}

/// `⌈C ε⁻² ln n⌉`.
pub fn jl_target_dim(n: usize, eps: f64, c: f64) -> Result<usize> {
    if n < 2 {
        return invalid("need n ≥ 2");
    }
    if !(eps > 0.0 && eps < 0.5) {
        return invalid(format!("ε = {eps} is outside (0, 1/2)"));
    }
    Ok((c / (eps * eps) * (n as f64).ln()).ceil() as usize)
}

/// Uniform random `k` of the `d` coordinates.
pub fn bit_sample_map(d: usize, k: usize, seed: u64) -> Result<ReductionMap> {
    if k == 0 || k > d {
        return invalid(format!("need 1 ≤ k ≤ d, got k = {k}, d = {d}"));
    }
    let mut indices = index::sample(&mut rng::child(seed, "bit_sample"), d, k).into_vec();
    indices.sort_unstable();
    Ok(ReductionMap {
        kind: MapKind::BitSample { indices },
        source_dim: d,
        target_dim: k,
        seed,
    })
}

/// Random `d × k` matrix over GF(2) with `Bernoulli(1/ℓ)` entries.
pub fn kor_map(d: usize, k: usize, ell: usize, seed: u64) -> Result<ReductionMap> {
    if k == 0 {
        return invalid("need k ≥ 1");
    }
    if ell == 0 || ell > d {
        return invalid(format!("need 1 ≤ ℓ ≤ d, got ℓ = {ell}, d = {d}"));
    }
    let mut r = rng::child(seed, "kor");
    let p = 1.0 / ell as f64;
    let columns = (0..k)
        .map(|_| BitString::random_sparse(d, p, &mut r))
        .collect();
    Ok(ReductionMap {
        kind: MapKind::KorMod2 { columns, ell },
        source_dim: d,
        target_dim: k,
        seed,
    })
}

/// Probability that one KOR output bit differs for inputs at Hamming distance `h`.
pub fn kor_rate(h: usize, ell: usize) -> f64 {
    (1.0 - (1.0 - 2.0 / ell as f64).powi(h as i32)) / 2.0
}

/// Inverts [`kor_rate`] for `ℓ > 2`. Rates at or above 1/2 map to infinity.
pub fn kor_invert_rate(rate: f64, ell: usize) -> Option<f64> {
    if ell <= 2 {
        return None;
    }
    if rate >= 0.5 {
        return Some(f64::INFINITY);
    }
    Some((1.0 - 2.0 * rate.max(0.0)).ln() / (1.0 - 2.0 / ell as f64).ln())
}

impl ReductionMap {
    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        match &self.kind {
            MapKind::Jl { matrix, scale } => {
                let Some(x) = p.reals().filter(|x| x.len() == self.source_dim) else {
                    return invalid(format!(
                        "JL map expects a real vector of length {}",
                        self.source_dim
                    ));
                };
                Ok(Point::Reals(
                    matrix
                        .chunks(self.source_dim)
                        .map(|row| scale * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                        .collect(),
                ))
            }
            MapKind::BitSample { indices } => {
                let x = self.source_bits(p)?;
                Ok(Point::Bits(BitString::from_bools(
                    &indices.iter().map(|&i| x.get(i)).collect::<Vec<_>>(),
                )))
            }
            MapKind::KorMod2 { columns, .. } => {
                let x = self.source_bits(p)?;
                Ok(Point::Bits(BitString::from_bools(
                    &columns.iter().map(|c| x.dot_parity(c)).collect::<Vec<_>>(),
                )))
            }
        }
    }

    fn source_bits<'p>(&self, p: &'p Point) -> Result<&'p BitString> {
        match p.bits() {
            Some(b) if b.len() == self.source_dim => Ok(b),
            _ => invalid(format!(
                "map expects a bit string of length {}",
                self.source_dim
            )),
        }
    }

    /// Domain of the images: Euclidean `ℝ^k` (keeping the norm factor) or normalized Hamming on `k` bits.
    pub fn target_domain(&self, source: &Domain) -> Result<Domain> {
        match self.kind {
            MapKind::Jl { .. } => {
                Domain::gaussian(self.target_dim).with_norm_factor(source.norm_factor())
            }
            _ => Ok(Domain::hamming(self.target_dim)),
        }
    }

    pub fn apply_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        let points = ds
            .points()
            .par_iter()
            .map(|p| self.apply(p))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.target_domain(ds.domain())?, points)
    }
}

/// Maps for `ℓ = 1, 2, 4, …` up to `d`, one per distance scale.
#[derive(Clone, Debug)]
pub struct KorLadder {
    pub maps: Vec<(usize, ReductionMap)>,
}

impl KorLadder {
    pub fn new(d: usize, k: usize, seed: u64) -> Result<Self> {
        let mut maps = Vec::new();
        let mut ell = 1;
        while ell <= d {
            maps.push((
                ell,
                kor_map(
                    d,
                    k,
                    ell,
                    rng::derive_indexed(seed, "kor_scale", ell as u64),
                )?,
            ));
            ell *= 2;
        }
        Ok(KorLadder { maps })
    }

    /// Image distances of a pair at every scale.
    pub fn image_distances(&self, x: &Point, y: &Point) -> Result<Vec<(usize, f64)>> {
        self.maps
            .iter()
            .map(|(ell, m)| {
                let (a, b) = (m.apply(x)?, m.apply(y)?);
                let (a, b) = (a.bits().expect("bits"), b.bits().expect("bits"));
                Ok((*ell, a.hamming(b) as f64 / m.target_dim() as f64))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistortionMode {
    /// `ρ'(f(x), f(y)) − ρ(x, y)`.
    Additive,
    /// `ρ'(f(x), f(y)) / ρ(x, y)`.
    Multiplicative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionReport {
    pub mode: DistortionMode,
    /// One value per unordered pair, in row order `(0,1), (0,2), …`.
    pub values: Vec<f64>,
    pub summary: Summary,
    pub histogram: Vec<HistogramBin>,
}

impl DistortionReport {
    pub fn fraction_in(&self, lo: f64, hi: f64) -> f64 {
        self.values
            .iter()
            .filter(|v| (lo..=hi).contains(*v))
            .count() as f64
            / self.values.len() as f64
    }
}

/// Distortion of every pairwise distance between `original` and its image `reduced`.
pub fn distortion_histogram(
    original: &Dataset,
    reduced: &Dataset,
    mode: DistortionMode,
    bins: usize,
) -> Result<DistortionReport> {
    let n = original.len();
    if reduced.len() != n {
        return invalid(format!(
            "{n} original points but {} reduced points",
            reduced.len()
        ));
    }
    if n < 2 {
        return invalid("need at least two points");
    }
    if bins == 0 {
        return invalid("need at least one bin");
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| {
                    let (a, b) = (original.dist(i, j), reduced.dist(i, j));
                    match mode {
                        DistortionMode::Additive => Ok(b - a),
                        DistortionMode::Multiplicative if a == 0.0 => invalid(format!(
                            "points {i} and {j} coincide; multiplicative distortion is undefined"
                        )),
                        DistortionMode::Multiplicative => Ok(b / a),
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let summary = Summary::of(&values);
    let histogram = histogram(&values, summary.min, summary.max, bins);
    Ok(DistortionReport {
        mode,
        values,
        summary,
        histogram,
    })
}

/// `|x₁ − y₁| / ‖x − y‖`.
pub fn projection_ratio(x: &[f64], y: &[f64]) -> f64 {
    (x[0] - y[0]).abs() / crate::domain::euclidean(x, y)
}

/// Monte Carlo mean of [`projection_ratio`] over random pairs on the sphere `S^{d−1}`.
pub fn sphere_projection_distortion(d: usize, pair_count: usize, seed: u64) -> Result<f64> {
    if d < 2 {
        return invalid("need d ≥ 2");
    }
    if pair_count == 0 {
        return invalid("need at least one pair");
    }
    const CHUNK: usize = 1 << 14;
    let chunks = pair_count.div_ceil(CHUNK);
    let sum: f64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::rng(rng::derive_indexed(seed, "sphere_pairs", c as u64));
            let count = CHUNK.min(pair_count - c * CHUNK);
            (0..count)
                .map(|_| {
                    let x = sphere_vector(d, &mut r);
                    let y = sphere_vector(d, &mut r);
                    projection_ratio(&x, &y)
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(sum / pair_count as f64)
}

/// A cube sample and its vertex outline projected onto a random plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeScatter {
    pub d: usize,
    pub points: Vec<[f64; 2]>,
    pub outline: Vec<[f64; 2]>,
}

impl CubeScatter {
    /// Spread of the projected sample relative to the extent of the projected cube.
    pub fn radius_ratio(&self) -> f64 {
        let radii: Vec<f64> = self.points.iter().map(|p| p[0].hypot(p[1])).collect();
        let outer = self
            .outline
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max);
        stats::std_dev(&radii) / outer
    }
}

/// Projects `n` uniform points of `[−½, ½]^d` and the cube's vertices onto a random 2-plane.
pub fn cube_projection_scatter(d: usize, n: usize, seed: u64) -> Result<CubeScatter> {
    if d < 2 {
        return invalid("need d ≥ 2");
    }
    let mut r = rng::child(seed, "frame");
    let frame = loop {
        let mut u = gaussian_vector(d, &mut r);
        let mut v = gaussian_vector(d, &mut r);
        let nu = norm(&u);
        u.iter_mut().for_each(|a| *a /= nu);
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&u).for_each(|(b, a)| *b -= dot * a);
        let nv = norm(&v);
        if nu > 1e-12 && nv > 1e-12 {
            v.iter_mut().for_each(|b| *b /= nv);
            break [u, v];
        }
    };
    let project = |x: &[f64]| -> [f64; 2] {
        [
            frame[0].iter().zip(x).map(|(a, b)| a * b).sum(),
            frame[1].iter().zip(x).map(|(a, b)| a * b).sum(),
        ]
    };
    let mut rp = rng::child(seed, "cube_points");
    let points = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rp.random::<f64>() - 0.5).collect();
            project(&x)
        })
        .collect();
    let vertex = |bits: &dyn Fn(usize) -> bool| -> Vec<f64> {
        (0..d).map(|i| if bits(i) { 0.5 } else { -0.5 }).collect()
    };
    let outline = if d <= 16 {
        (0..1usize << d)
            .into_par_iter()
            .map(|m| project(&vertex(&|i| m >> i & 1 == 1)))
            .collect()
    } else {
        let mut rv = rng::child(seed, "cube_vertices");
        (0..1usize << 16)
            .map(|_| {
                let b = BitString::random(d, &mut rv);
                project(&vertex(&|i| b.get(i)))
            })
            .collect()
    };
    Ok(CubeScatter { d, points, outline })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
