//! Concentration functions, Lipschitz deviation and intrinsic dimension.
//!
//! The concentration function `α(ε)` bounds the measure left outside the
//! `ε`-neighbourhood of any half-measure set. On the Hamming cube it is known
//! exactly (Hamming balls are extremal), elsewhere we estimate a lower bound
//! for it from how far sampled 1-Lipschitz functions stray from their medians:
//! `μ{|f − M_f| > ε} ≤ 2α(ε)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Dataset, Domain, Point};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scan;
use crate::stats;

/// Gaussian tail bound `min(1/2, exp(−2ε²d))` for the normalized Hamming cube.
pub fn chernoff_alpha_bound(eps: f64, d: usize) -> f64 {
    (-2.0 * eps * eps * d as f64).exp().min(0.5)
}

/// `⌊εd⌋` with a small guard so that grid values like `0.29 · 100` land on 29.
fn floor_scaled(eps: f64, d: usize) -> usize {
    let v = eps * d as f64;
    (v + 1e-9 * v.abs().max(1.0)).floor().max(0.0) as usize
}

/// Exact upper tails of `Bin(d, 1/2)`, kept as big integers until the final division.
#[derive(Clone, Debug)]
pub struct HammingTails {
    d: usize,
    /// `tail[j] = P[Bin(d, 1/2) ≥ j]` for `j = 0..=d+1`.
    tail: Vec<f64>,
    median_radius: usize,
}

impl HammingTails {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "Hamming dimension must be positive");
        let mut binom = Vec::with_capacity(d + 1);
        let mut c = BigUint::one();
        for k in 0..=d {
            binom.push(c.clone());
            c = c * BigUint::from(d - k) / BigUint::from(k + 1);
        }
        let total = BigUint::one() << d;

        let mut suffix = vec![BigUint::zero(); d + 2];
        for j in (0..=d).rev() {
            suffix[j] = &suffix[j + 1] + &binom[j];
        }
        let tail = suffix.iter().map(|s| ratio_pow2(s, d)).collect();

        // Smallest r with 2·P[Bin ≤ r] ≥ 1, i.e. 2·(2^d − suffix[r+1]) ≥ 2^d.
        let median_radius = (0..=d)
            .find(|&r| (&total - &suffix[r + 1]) * 2u32 >= total)
            .expect("P[Bin ≤ d] = 1");
        HammingTails {
            d,
            tail,
            median_radius,
        }
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Smallest radius whose Hamming ball has measure at least 1/2.
    pub fn median_radius(&self) -> usize {
        self.median_radius
    }

    /// `P[Bin(d, 1/2) ≥ j]`.
    pub fn tail_at_least(&self, j: usize) -> f64 {
        self.tail.get(j).copied().unwrap_or(0.0)
    }

    /// `α(ε) = P[Bin(d, 1/2) > r + ⌊εd⌋]`.
    pub fn alpha(&self, eps: f64) -> f64 {
        self.tail_at_least(self.median_radius + floor_scaled(eps, self.d) + 1)
    }
}

/// `num / 2^shift` rounded to the nearest double.
fn ratio_pow2(num: &BigUint, shift: usize) -> f64 {
    let bits = num.bits() as i64;
    if bits == 0 {
        return 0.0;
    }
    let drop = (bits - 64).max(0);
    let top = (num >> drop as usize).to_u64().expect("fits in 64 bits") as f64;
    ldexp(top, drop - shift as i64)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Exact concentration function of the normalized Hamming cube `{0,1}^d`.
pub fn exact_hamming_alpha(d: usize, eps: f64) -> f64 {
    HammingTails::new(d).alpha(eps)
}

/// Where the values of a [`ConcentrationProfile`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AlphaMethod {
    ExactHamming,
    MonteCarloLipschitz {
        samples: usize,
        witness_count: usize,
    },
    ChernoffBound,
}

/// A concentration function tabulated on an increasing grid in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationProfile {
    eps_grid: Vec<f64>,
    alpha: Vec<f64>,
    method: AlphaMethod,
}

impl ConcentrationProfile {
    pub fn new(eps_grid: Vec<f64>, alpha: Vec<f64>, method: AlphaMethod) -> Result<Self> {
        if eps_grid.is_empty() || eps_grid.len() != alpha.len() {
            return invalid("grid and values must be nonempty and of equal length");
        }
        if eps_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("eps grid must be strictly increasing");
        }
        if eps_grid[0] < 0.0 || eps_grid[eps_grid.len() - 1] > 1.0 {
            return invalid("eps grid must lie in [0, 1]");
        }
        if alpha.iter().any(|a| !(0.0..=0.5).contains(a)) {
            return invalid("concentration values must lie in [0, 1/2]");
        }
        if alpha.windows(2).any(|w| w[1] > w[0]) {
            return invalid("concentration values must be nonincreasing");
        }
        if eps_grid[0] == 0.0 && alpha[0] != 0.5 {
            return invalid("α(0) must equal 1/2");
        }
        Ok(ConcentrationProfile {
            eps_grid,
            alpha,
            method,
        })
    }

    pub fn exact_hamming(d: usize, eps_grid: Vec<f64>) -> Result<Self> {
        let tails = HammingTails::new(d);
        let alpha = eps_grid
            .iter()
            .map(|&e| if e == 0.0 { 0.5 } else { tails.alpha(e) })
            .collect();
        Self::new(eps_grid, alpha, AlphaMethod::ExactHamming)
    }

    pub fn chernoff(d: usize, eps_grid: Vec<f64>) -> Result<Self> {
        let alpha = eps_grid
            .iter()
            .map(|&e| chernoff_alpha_bound(e, d))
            .collect();
        Self::new(eps_grid, alpha, AlphaMethod::ChernoffBound)
    }

    pub fn eps_grid(&self) -> &[f64] {
        &self.eps_grid
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn method(&self) -> AlphaMethod {
        self.method
    }
}

/// `n` equally spaced points from 0 to 1 inclusive.
pub fn unit_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs both endpoints");
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// A 1-Lipschitz function used to probe concentration.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessKind {
    /// `x ↦ ρ(x, p)`.
    DistanceTo(Point),
    /// `x ↦ c·⟨u, x⟩` for a unit vector `u`, where `c` is the domain's norm factor.
    LinearFunctional(Vec<f64>),
    Constant(f64),
}

/// A witness function together with its empirical median.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzWitness {
    pub kind: WitnessKind,
    pub median: f64,
}

impl WitnessKind {
    pub fn eval(&self, domain: &Domain, x: &Point) -> f64 {
        match self {
            WitnessKind::DistanceTo(p) => domain.dist(p, x),
            WitnessKind::LinearFunctional(u) => {
                let x = x.reals().expect("linear functionals need real points");
                domain.norm_factor() * u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            }
            WitnessKind::Constant(c) => *c,
        }
    }

    pub fn random_unit_functional(dim: usize, rng: &mut rng::Rng) -> WitnessKind {
        WitnessKind::LinearFunctional(crate::domain::sphere_vector(dim, rng))
    }
}

impl LipschitzWitness {
    /// Sets the median to the lower median of the function over `sample`.
    pub fn fit(kind: WitnessKind, domain: &Domain, sample: &[Point]) -> Self {
        let values: Vec<f64> = sample.iter().map(|x| kind.eval(domain, x)).collect();
        let median = stats::lower_median(&values);
        LipschitzWitness { kind, median }
    }

    pub fn eval(&self, domain: &Domain, x: &Point) -> f64 {
        self.kind.eval(domain, x)
    }

    /// Largest observed `|f(x) − f(y)| − ρ(x, y)` over `pairs` random pairs.
    pub fn lipschitz_excess(&self, domain: &Domain, pairs: usize, seed: u64) -> f64 {
        let mut rng = rng::child(seed, "lipschitz_check");
        (0..pairs)
            .map(|_| {
                let x = domain.random_point(&mut rng);
                let y = domain.random_point(&mut rng);
                (self.eval(domain, &x) - self.eval(domain, &y)).abs() - domain.dist(&x, &y)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fraction of datapoints with `|f(x) − M_f| > ε`.
pub fn lipschitz_deviation(ds: &Dataset, witness: &LipschitzWitness, eps: f64) -> f64 {
    let dom = ds.domain();
    let far = ds
        .points()
        .iter()
        .filter(|x| (witness.eval(dom, x) - witness.median).abs() > eps)
        .count();
    far as f64 / ds.len() as f64
}

/// Sorted absolute deviations of a witness from its lower median.
fn sorted_deviations(kind: &WitnessKind, domain: &Domain, sample: &[Point]) -> Vec<f64> {
    let values: Vec<f64> = sample.iter().map(|x| kind.eval(domain, x)).collect();
    let m = stats::lower_median(&values);
    let mut dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    dev.sort_by(f64::total_cmp);
    dev
}

fn fraction_above(sorted: &[f64], eps: f64) -> f64 {
    let at_most = sorted.partition_point(|&v| v <= eps);
    (sorted.len() - at_most) as f64 / sorted.len() as f64
}

fn profile_from_witnesses(
    kinds: &[WitnessKind],
    domain: &Domain,
    sample: &[Point],
    eps_grid: &[f64],
    method: AlphaMethod,
) -> Result<ConcentrationProfile> {
    let per_witness: Vec<Vec<f64>> = kinds
        .par_iter()
        .map(|k| {
            let dev = sorted_deviations(k, domain, sample);
            eps_grid.iter().map(|&e| fraction_above(&dev, e)).collect()
        })
        .collect();
    let mut alpha = Vec::with_capacity(eps_grid.len());
    let mut running = 0.5f64;
    for (gi, &e) in eps_grid.iter().enumerate() {
        let worst = per_witness.iter().map(|v| v[gi]).fold(0.0, f64::max);
        let a = if e == 0.0 {
            0.5
        } else {
            (0.5 * worst).clamp(0.0, 0.5)
        };
        running = running.min(a);
        alpha.push(running);
    }
    ConcentrationProfile::new(eps_grid.to_vec(), alpha, method)
}

fn witness_kinds(
    domain: &Domain,
    sample_from: impl Fn(&mut rng::Rng) -> Point,
    count: usize,
    seed: u64,
) -> Vec<WitnessKind> {
    let mut kinds = Vec::with_capacity(2 * count);
    for i in 0..count {
        let mut r = rng::rng(rng::derive_indexed(seed, "witness", i as u64));
        kinds.push(WitnessKind::DistanceTo(sample_from(&mut r)));
    }
    if domain.is_euclidean() {
        for i in 0..count {
            let mut r = rng::rng(rng::derive_indexed(seed, "functional", i as u64));
            kinds.push(WitnessKind::random_unit_functional(
                domain.dimension(),
                &mut r,
            ));
        }
    }
    kinds
}

/// Monte Carlo lower estimate of `α(ε)` on `eps_grid`.
///
/// Witnesses are distance functions to `witness_count` random domain points,
/// plus as many random unit linear functionals on Euclidean domains.
pub fn estimate_alpha(
    domain: &Domain,
    eps_grid: &[f64],
    sample_count: usize,
    witness_count: usize,
    seed: u64,
) -> Result<ConcentrationProfile> {
    if eps_grid.is_empty() || witness_count == 0 {
        return invalid("need a nonempty grid and at least one witness");
    }
    if sample_count < 100 {
        return invalid("estimate_alpha needs at least 100 samples");
    }
    let sample = domain.sample(sample_count, rng::derive(seed, "alpha_sample"))?;
    let kinds = witness_kinds(domain, |r| domain.random_point(r), witness_count, seed);
    profile_from_witnesses(
        &kinds,
        domain,
        sample.points(),
        eps_grid,
        AlphaMethod::MonteCarloLipschitz {
            samples: sample_count,
            witness_count,
        },
    )
}

/// Same estimator with the dataset itself as the sample and random datapoints as pivots.
pub fn estimate_alpha_dataset(
    ds: &Dataset,
    eps_grid: &[f64],
    witness_count: usize,
    seed: u64,
) -> Result<ConcentrationProfile> {
    if eps_grid.is_empty() || witness_count == 0 {
        return invalid("need a nonempty grid and at least one witness");
    }
    let kinds = witness_kinds(
        ds.domain(),
        |r| ds.point(r.random_range(0..ds.len())).clone(),
        witness_count,
        seed,
    );
    profile_from_witnesses(
        &kinds,
        ds.domain(),
        ds.points(),
        eps_grid,
        AlphaMethod::MonteCarloLipschitz {
            samples: ds.len(),
            witness_count,
        },
    )
}

/// Largest `|mean − median|` among distance functions to `witness_count` random points.
pub fn mean_median_gap(
    domain: &Domain,
    sample_count: usize,
    witness_count: usize,
    seed: u64,
) -> Result<f64> {
    let sample = domain.sample(sample_count, rng::derive(seed, "gap_sample"))?;
    let kinds = witness_kinds(domain, |r| domain.random_point(r), witness_count, seed);
    Ok(kinds
        .iter()
        .filter(|k| matches!(k, WitnessKind::DistanceTo(_)))
        .map(|k| {
            let v: Vec<f64> = sample.points().iter().map(|x| k.eval(domain, x)).collect();
            (stats::mean(&v) - stats::lower_median(&v)).abs()
        })
        .fold(0.0, f64::max))
}

/// Families of domains indexed by dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Hamming,
    Gaussian,
    UnitCube,
    Sphere,
}

/// A family of domains with an optional raw rescaling of the metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DomainFamily {
    pub kind: FamilyKind,
    pub raw_scale: f64,
}

impl DomainFamily {
    pub fn new(kind: FamilyKind) -> Self {
        DomainFamily {
            kind,
            raw_scale: 1.0,
        }
    }

    pub fn at(&self, d: usize) -> Result<Domain> {
        let dom = match self.kind {
            FamilyKind::Hamming => Domain::hamming(d),
            FamilyKind::Gaussian => Domain::gaussian(d),
            FamilyKind::UnitCube => Domain::unit_cube(d),
            FamilyKind::Sphere => Domain::sphere(d),
        };
        dom.with_norm_factor(self.raw_scale)
    }
}

/// Where the queries of a nearest-neighbour curve come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QueryMode {
    /// Fresh points drawn from the domain.
    Fresh,
    /// Datapoints, each measured against the rest of the dataset.
    LeaveOneOut,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NnCurveConfig {
    pub n: usize,
    pub trials: usize,
    pub queries_per_trial: usize,
    pub mode: QueryMode,
    /// Monte Carlo pairs used to normalize domains without a closed-form CharSize.
    pub char_size_pairs: usize,
}

impl Default for NnCurveConfig {
    fn default() -> Self {
        NnCurveConfig {
            n: 1000,
            trials: 100,
            queries_per_trial: 10,
            mode: QueryMode::Fresh,
            char_size_pairs: 100_000,
        }
    }
}

/// One row of a dimension sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub d: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Mean nearest-neighbour distance, in CharSize units, for each dimension.
pub fn nn_distance_curve(
    family: DomainFamily,
    dims: &[usize],
    cfg: &NnCurveConfig,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    if cfg.n < 2 {
        return invalid("nearest-neighbour curves need n ≥ 2");
    }
    if cfg.trials == 0 || cfg.queries_per_trial == 0 {
        return invalid("need at least one trial and one query");
    }
    dims.iter()
        .map(|&d| {
            let dseed = rng::derive_indexed(seed, "nn_curve_dim", d as u64);
            let domain = family
                .at(d)?
                .normalize(cfg.char_size_pairs, rng::derive(dseed, "normalize"))?;
            let trial_means: Vec<f64> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| nn_trial(&domain, cfg, rng::derive_indexed(dseed, "trial", t as u64)))
                .collect::<Result<_>>()?;
            Ok(CurveRow {
                d,
                value: stats::mean(&trial_means),
                stderr: stats::std_err(&trial_means),
            })
        })
        .collect()
}

fn nn_trial(domain: &Domain, cfg: &NnCurveConfig, seed: u64) -> Result<f64> {
    let ds = domain.sample(cfg.n, rng::derive(seed, "data"))?;
    let dists: Vec<f64> = match cfg.mode {
        QueryMode::Fresh => {
            let mut r = rng::child(seed, "queries");
            (0..cfg.queries_per_trial)
                .map(|_| {
                    let q = domain.random_point(&mut r);
                    scan::nearest(&ds, &q, None).map(|(_, d)| d).unwrap_or(0.0)
                })
                .collect()
        }
        QueryMode::LeaveOneOut => {
            let mut r = rng::child(seed, "queries");
            (0..cfg.queries_per_trial)
                .map(|_| {
                    let i = r.random_range(0..ds.len());
                    scan::nearest(&ds, ds.point(i), Some(i))
                        .map(|(_, d)| d)
                        .unwrap_or(0.0)
                })
                .collect()
        }
    };
    Ok(stats::mean(&dists))
}

/// Fraction of unordered datapoint pairs whose distance lies in `[1 − ε, 1 + ε]`.
pub fn pairwise_simplex_check(ds: &Dataset, eps: f64) -> Result<f64> {
    if ds.len() < 2 {
        return invalid("need at least two datapoints");
    }
    if !ds.domain().is_normalized() {
        return Err(Error::InvalidState(
            "pairwise simplex check needs a CharSize-normalized domain".into(),
        ));
    }
    let n = ds.len();
    let inside: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| {
                    let d = ds.dist(i, j);
                    (1.0 - eps..=1.0 + eps).contains(&d)
                })
                .count()
        })
        .sum();
    Ok(inside as f64 / (n * (n - 1) / 2) as f64)
}

/// Mean distance over `pair_count` random pairs of distinct datapoints.
pub fn empirical_char_size(ds: &Dataset, pair_count: usize, seed: u64) -> Result<f64> {
    let d = sampled_pair_distances(ds, pair_count, seed)?;
    Ok(stats::mean(&d))
}

fn sampled_pair_distances(ds: &Dataset, pair_count: usize, seed: u64) -> Result<Vec<f64>> {
    if ds.len() < 2 {
        return invalid("need at least two datapoints");
    }
    if pair_count < 2 {
        return invalid("need at least two pairs");
    }
    let mut r = rng::child(seed, "pairs");
    Ok((0..pair_count)
        .map(|_| loop {
            let i = r.random_range(0..ds.len());
            let j = r.random_range(0..ds.len());
            if i != j {
                break ds.dist(i, j);
            }
        })
        .collect())
}

/// Distance-variance intrinsic dimension `1 / (2·var)` of distances rescaled to mean one.
///
/// Returns `+∞` when every sampled distance is equal.
pub fn dim_dist(ds: &Dataset, pair_count: usize, seed: u64) -> Result<f64> {
    let d = sampled_pair_distances(ds, pair_count, seed)?;
    let (lo, hi) = d
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if lo == hi {
        if hi == 0.0 {
            return Err(Error::DegenerateDomain(
                "all sampled distances are zero".into(),
            ));
        }
        return Ok(f64::INFINITY);
    }
    let m = stats::mean(&d);
    let normalized: Vec<f64> = d.iter().map(|v| v / m).collect();
    Ok(1.0 / (2.0 * stats::sample_variance(&normalized)))
}

/// Concentration dimension `1 / [2∫₀¹ α]²` by the trapezoid rule on an arbitrary curve.
pub fn dim_alpha_curve(eps_grid: &[f64], values: &[f64]) -> Result<f64> {
    if eps_grid.len() < 2 || eps_grid.len() != values.len() {
        return invalid("need at least two grid points and matching values");
    }
    let (first, last) = (eps_grid[0], eps_grid[eps_grid.len() - 1]);
    if first.abs() > 1e-12 || (last - 1.0).abs() > 1e-12 {
        return invalid(format!("grid spans [{first}, {last}], not [0, 1]"));
    }
    let integral: f64 = eps_grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(e, a)| 0.5 * (e[1] - e[0]) * (a[0] + a[1]))
        .sum();
    Ok(1.0 / (2.0 * integral).powi(2))
}

pub fn dim_alpha(profile: &ConcentrationProfile) -> Result<f64> {
    dim_alpha_curve(profile.eps_grid(), profile.alpha())
}
