//! Metric spaces with measure, their points, samplers and file loaders.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Rng};

/// Absolute tolerance used when validating finite metrics.
pub const METRIC_TOLERANCE: f64 = 1e-9;

/// Largest finite metric whose triangle inequality is checked on construction.
pub const TRIANGLE_CHECK_LIMIT: usize = 512;

/// Packed bit-string, bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = BitString {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        b.mask_tail();
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Parses a string of `0`/`1` characters; character `i` becomes bit `i`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => invalid(format!("bit-string contains {other:?}")),
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_bools(&bits))
    }

    pub fn random(len: usize, rng: &mut Rng) -> Self {
        let mut b = BitString {
            words: (0..len.div_ceil(64)).map(|_| rng.random()).collect(),
            len,
        };
        b.mask_tail();
        b
    }

    /// Bernoulli(`p`) bits.
    pub fn random_sparse(len: usize, p: f64, rng: &mut Rng) -> Self {
        let mut b = Self::zeros(len);
        for i in 0..len {
            if rng.random::<f64>() < p {
                b.set(i, true);
            }
        }
        b
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing positions. Lengths must agree.
    pub fn hamming(&self, other: &BitString) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Parity of the inner product over GF(2).
    pub fn dot_parity(&self, other: &BitString) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        BitString {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Little-endian byte image (bit 0 is the low bit of byte 0).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return invalid(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            ));
        }
        let mut b = Self::zeros(len);
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            b.words[i] = u64::from_le_bytes(buf);
        }
        let before = b.words.clone();
        b.mask_tail();
        if before != b.words {
            return invalid("bits set beyond the declared length");
        }
        Ok(b)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitString({s})")
    }
}

/// A point of some domain. The payload kind must match the owning domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Bits(BitString),
    Reals(Vec<f64>),
    Index(usize),
}

impl Point {
    pub fn reals(&self) -> Option<&[f64]> {
        match self {
            Point::Reals(v) => Some(v),
            _ => None,
        }
    }

    pub fn bits(&self) -> Option<&BitString> {
        match self {
            Point::Bits(b) => Some(b),
            _ => None,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            _ => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Point::Bits(_) => "bits",
            Point::Reals(_) => "reals",
            Point::Index(_) => "index",
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Reals(v)
    }
}

impl From<BitString> for Point {
    fn from(b: BitString) -> Self {
        Point::Bits(b)
    }
}

/// Symmetric distance matrix on `n` points, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetric {
    n: usize,
    dist: Vec<f64>,
    /// False when the matrix was too large for the O(n³) triangle check.
    triangle_checked: bool,
}

impl FiniteMetric {
    pub fn new(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return invalid("finite metric needs at least one point");
        }
        if dist.len() != n * n {
            return invalid(format!(
                "expected {} matrix entries, got {}",
                n * n,
                dist.len()
            ));
        }
        for i in 0..n {
            if dist[i * n + i].abs() > METRIC_TOLERANCE {
                return invalid(format!("nonzero diagonal entry at {i}"));
            }
            for j in 0..n {
                let v = dist[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return invalid(format!("entry ({i}, {j}) = {v} is not a nonnegative real"));
                }
                if (v - dist[j * n + i]).abs() > METRIC_TOLERANCE {
                    return invalid(format!("matrix not symmetric at ({i}, {j})"));
                }
            }
        }
        let triangle_checked = n <= TRIANGLE_CHECK_LIMIT;
        if triangle_checked {
            for i in 0..n {
                for j in 0..n {
                    let dij = dist[i * n + j];
                    for k in 0..n {
                        if dij > dist[i * n + k] + dist[k * n + j] + METRIC_TOLERANCE {
                            return invalid(format!(
                                "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                            ));
                        }
                    }
                }
            }
        }
        Ok(FiniteMetric {
            n,
            dist,
            triangle_checked,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("distance matrix is not square");
        }
        Self::new(n, rows.concat())
    }

    /// All off-diagonal distances equal to `d`.
    pub fn equilateral(n: usize, d: f64) -> Result<Self> {
        let mut dist = vec![d; n * n];
        for i in 0..n {
            dist[i * n + i] = 0.0;
        }
        Self::new(n, dist)
    }

    /// Euclidean distances between the given vectors.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&points[i], &points[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self::new(n, dist)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn triangle_checked(&self) -> bool {
        self.triangle_checked
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Mean distance over ordered pairs of distinct points.
    pub fn mean_offdiagonal(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let total: f64 = self.dist.iter().sum();
        Some(total / (self.n * (self.n - 1)) as f64)
    }

    /// The same metric multiplied by `factor`; the triangle flag is kept.
    pub fn scaled(&self, factor: f64) -> FiniteMetric {
        FiniteMetric {
            n: self.n,
            dist: self.dist.iter().map(|d| d * factor).collect(),
            triangle_checked: self.triangle_checked,
        }
    }
}

/// The underlying space of a [`Domain`].
#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    /// `{0,1}^bits` with the Hamming distance divided by `bits`, uniform measure.
    Hamming { bits: usize },
    /// `ℝ^dim` with the Euclidean distance and standard Gaussian measure.
    Gaussian { dim: usize },
    /// `[0,1]^dim`, Euclidean distance, uniform measure.
    UnitCube { dim: usize },
    /// Unit sphere in `ℝ^dim`, chordal distance, uniform measure.
    Sphere { dim: usize },
    /// Finite metric with the uniform measure on its points.
    Finite(Arc<FiniteMetric>),
}

/// How a characteristic size was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CharSizeMethod {
    Analytic,
    MonteCarlo { pairs: usize, seed: u64 },
}

/// The CharSize value a domain was normalized with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharSizeEstimate {
    pub value: f64,
    pub method: CharSizeMethod,
}

/// A metric space with a probability measure and a distance multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    norm_factor: f64,
    normalized_with: Option<CharSizeEstimate>,
}

impl Domain {
    fn with_kind(kind: DomainKind) -> Self {
        Domain {
            kind,
            norm_factor: 1.0,
            normalized_with: None,
        }
    }

    pub fn hamming(bits: usize) -> Self {
        assert!(bits >= 1, "Hamming cube needs at least one bit");
        Self::with_kind(DomainKind::Hamming { bits })
    }

    pub fn gaussian(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self::with_kind(DomainKind::Gaussian { dim })
    }

    pub fn unit_cube(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self::with_kind(DomainKind::UnitCube { dim })
    }

    pub fn sphere(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self::with_kind(DomainKind::Sphere { dim })
    }

    pub fn finite(metric: FiniteMetric) -> Self {
        Self::with_kind(DomainKind::Finite(Arc::new(metric)))
    }

    /// Returns the domain with its raw distances multiplied by `factor`.
    pub fn with_norm_factor(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return invalid(format!("norm factor must be positive, got {factor}"));
        }
        self.norm_factor = factor;
        self.normalized_with = None;
        Ok(self)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn normalized_with(&self) -> Option<CharSizeEstimate> {
        self.normalized_with
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized_with.is_some()
    }

    /// Bit count, ambient dimension, or number of points.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            DomainKind::Hamming { bits } => *bits,
            DomainKind::Gaussian { dim }
            | DomainKind::UnitCube { dim }
            | DomainKind::Sphere { dim } => *dim,
            DomainKind::Finite(m) => m.len(),
        }
    }

    /// True for the kinds whose points are real vectors.
    pub fn is_euclidean(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::Gaussian { .. } | DomainKind::UnitCube { .. } | DomainKind::Sphere { .. }
        )
    }

    pub fn finite_metric(&self) -> Option<&FiniteMetric> {
        match &self.kind {
            DomainKind::Finite(m) => Some(m),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DomainKind::Hamming { bits } => format!("hamming({bits})"),
            DomainKind::Gaussian { dim } => format!("gaussian({dim})"),
            DomainKind::UnitCube { dim } => format!("unit_cube({dim})"),
            DomainKind::Sphere { dim } => format!("sphere({dim})"),
            DomainKind::Finite(m) => format!("finite({})", m.len()),
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (&self.kind, p) {
            (DomainKind::Hamming { bits }, Point::Bits(b)) if b.len() == *bits => Ok(()),
            (DomainKind::Gaussian { dim }, Point::Reals(v))
            | (DomainKind::UnitCube { dim }, Point::Reals(v))
                if v.len() == *dim =>
            {
                Ok(())
            }
            (DomainKind::Sphere { dim }, Point::Reals(v)) if v.len() == *dim => {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() <= METRIC_TOLERANCE {
                    Ok(())
                } else {
                    invalid(format!("sphere point has norm {norm}"))
                }
            }
            (DomainKind::Finite(m), Point::Index(i)) if *i < m.len() => Ok(()),
            _ => invalid(format!(
                "{} point does not belong to {}",
                p.kind_name(),
                self.label()
            )),
        }
    }

    /// Distance between two points, checking that both belong to the domain's kind.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        match (&self.kind, x, y) {
            (DomainKind::Hamming { bits }, Point::Bits(a), Point::Bits(b))
                if a.len() == *bits && b.len() == *bits => {}
            (
                DomainKind::Gaussian { dim }
                | DomainKind::UnitCube { dim }
                | DomainKind::Sphere { dim },
                Point::Reals(a),
                Point::Reals(b),
            ) if a.len() == *dim && b.len() == *dim => {}
            (DomainKind::Finite(m), Point::Index(i), Point::Index(j))
                if *i < m.len() && *j < m.len() => {}
            _ => {
                return invalid(format!(
                    "cannot measure {} against {} in {}",
                    x.kind_name(),
                    y.kind_name(),
                    self.label()
                ))
            }
        }
        Ok(self.dist(x, y))
    }

    /// Unchecked distance for points already known to be valid.
    ///
    /// Panics if the payload kinds do not match the domain.
    #[inline]
    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        let raw = match (&self.kind, x, y) {
            (DomainKind::Hamming { bits }, Point::Bits(a), Point::Bits(b)) => {
                a.hamming(b) as f64 / *bits as f64
            }
            (DomainKind::Finite(m), Point::Index(i), Point::Index(j)) => m.get(*i, *j),
            (_, Point::Reals(a), Point::Reals(b)) => euclidean(a, b),
            _ => panic!(
                "{} / {} points used with {}",
                x.kind_name(),
                y.kind_name(),
                self.label()
            ),
        };
        raw * self.norm_factor
    }

    pub fn random_point(&self, rng: &mut Rng) -> Point {
        match &self.kind {
            DomainKind::Hamming { bits } => Point::Bits(BitString::random(*bits, rng)),
            DomainKind::Gaussian { dim } => Point::Reals(gaussian_vector(*dim, rng)),
            DomainKind::UnitCube { dim } => {
                Point::Reals((0..*dim).map(|_| rng.random::<f64>()).collect())
            }
            DomainKind::Sphere { dim } => Point::Reals(sphere_vector(*dim, rng)),
            DomainKind::Finite(m) => Point::Index(rng.random_range(0..m.len())),
        }
    }

    /// Draws `n` i.i.d. points from the domain's measure.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return invalid("sample size must be at least 1");
        }
        if let DomainKind::Finite(m) = &self.kind {
            if n > m.len() {
                return invalid(format!(
                    "cannot draw {n} points from a finite metric on {} points",
                    m.len()
                ));
            }
        }
        let mut rng = rng::child(seed, "sample");
        let points = (0..n).map(|_| self.random_point(&mut rng)).collect();
        Ok(Dataset {
            domain: self.clone(),
            points,
            seed,
        })
    }

    /// Closed-form CharSize, including the norm factor, when one is known.
    pub fn analytic_char_size(&self) -> Option<f64> {
        let raw = match &self.kind {
            DomainKind::Hamming { .. } => 0.5,
            DomainKind::Gaussian { dim } => {
                // X − Y ~ N(0, 2I), so E‖X − Y‖ = √2 · E χ_d.
                let d = *dim as f64;
                2.0 * (statrs::function::gamma::ln_gamma((d + 1.0) / 2.0)
                    - statrs::function::gamma::ln_gamma(d / 2.0))
                .exp()
            }
            DomainKind::Finite(m) => m.mean_offdiagonal()?,
            DomainKind::UnitCube { .. } | DomainKind::Sphere { .. } => return None,
        };
        Some(raw * self.norm_factor)
    }

    /// Estimate of `E ρ(x, y)` over independent pairs.
    ///
    /// `pair_count == 0` requests the closed form and fails for domains that
    /// have none. For finite metrics pairs with identical endpoints are redrawn.
    pub fn char_size(&self, pair_count: usize, seed: u64) -> Result<f64> {
        if pair_count == 0 {
            return self.analytic_char_size().ok_or_else(|| {
                Error::InvalidArgument(format!("no closed-form CharSize for {}", self.label()))
            });
        }
        let mut rng = rng::child(seed, "char_size");
        let mut total = 0.0;
        for _ in 0..pair_count {
            let (x, y) = self.random_pair(&mut rng);
            total += self.dist(&x, &y);
        }
        Ok(total / pair_count as f64)
    }

    fn random_pair(&self, rng: &mut Rng) -> (Point, Point) {
        loop {
            let x = self.random_point(rng);
            let y = self.random_point(rng);
            match (&x, &y) {
                (Point::Index(i), Point::Index(j)) if i == j => continue,
                _ => return (x, y),
            }
        }
    }

    /// The same domain rescaled so that its CharSize is one.
    ///
    /// Uses the closed form when available, otherwise `pair_count` Monte Carlo pairs.
    pub fn normalize(&self, pair_count: usize, seed: u64) -> Result<Domain> {
        let (value, method) = match self.analytic_char_size() {
            Some(v) => (v, CharSizeMethod::Analytic),
            None => {
                if pair_count == 0 {
                    return invalid(format!(
                        "{} needs a positive pair count for Monte Carlo CharSize",
                        self.label()
                    ));
                }
                (
                    self.char_size(pair_count, seed)?,
                    CharSizeMethod::MonteCarlo {
                        pairs: pair_count,
                        seed,
                    },
                )
            }
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::DegenerateDomain(format!(
                "CharSize estimate {value} for {}",
                self.label()
            )));
        }
        Ok(Domain {
            kind: self.kind.clone(),
            norm_factor: self.norm_factor / value,
            normalized_with: Some(CharSizeEstimate { value, method }),
        })
    }
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn gaussian_vector(dim: usize, rng: &mut Rng) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

pub(crate) fn sphere_vector(dim: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let mut v = gaussian_vector(dim, rng);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// An ordered sample of points from a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    domain: Domain,
    points: Vec<Point>,
    seed: u64,
}

impl Dataset {
    /// Wraps explicit points, validating each against the domain.
    pub fn new(domain: Domain, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return invalid("dataset must contain at least one point");
        }
        for p in &points {
            domain.validate_point(p)?;
        }
        Ok(Dataset {
            domain,
            points,
            seed: 0,
        })
    }

    /// Points on the real line, as a one-dimensional Gaussian-kind dataset.
    pub fn on_line(values: &[f64]) -> Result<Self> {
        Self::new(
            Domain::gaussian(1),
            values.iter().map(|&v| Point::Reals(vec![v])).collect(),
        )
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Distance between datapoints `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.domain.dist(&self.points[i], &self.points[j])
    }

    /// Distance from an arbitrary point to datapoint `i`.
    #[inline]
    pub fn dist_to(&self, q: &Point, i: usize) -> f64 {
        self.domain.dist(q, &self.points[i])
    }

    /// The same points viewed in `domain`, which must accept every point.
    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        for p in &self.points {
            domain.validate_point(p)?;
        }
        Ok(Dataset {
            domain,
            points: self.points.clone(),
            seed: self.seed,
        })
    }
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_reals(path: &Path, line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format_err(path, line_no, format!("cannot parse {tok:?} as a real")))
        })
        .collect()
}

/// Reads a finite metric: first line `n`, then `n` lines of `n` reals.
pub fn load_finite_metric(path: impl AsRef<Path>) -> Result<Domain> {
    let path = path.as_ref();
    parse_finite_metric(File::open(path)?, path)
}

pub fn parse_finite_metric(reader: impl Read, path: &Path) -> Result<Domain> {
    let mut lines = BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| format_err(path, 1, "empty file, expected point count"))?;
    let first = first?;
    let n: usize = first.trim().parse().map_err(|_| {
        format_err(
            path,
            first_no,
            format!("cannot parse {:?} as a point count", first.trim()),
        )
    })?;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, line) = lines
            .next()
            .ok_or_else(|| format_err(path, first_no + rows.len() + 1, "missing matrix row"))?;
        let row = parse_reals(path, no, &line?)?;
        if row.len() != n {
            return Err(format_err(
                path,
                no,
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if let Some((no, _)) = lines.next() {
        return Err(format_err(path, no, "trailing data after the matrix"));
    }
    let metric =
        FiniteMetric::from_rows(&rows).map_err(|e| format_err(path, first_no, e.to_string()))?;
    Ok(Domain::finite(metric))
}

/// Reads whitespace-separated vectors, `d` reals per line, into an unnormalized
/// Euclidean dataset. Blank lines are ignored.
pub fn load_vectors(path: impl AsRef<Path>, d: usize) -> Result<Dataset> {
    let path = path.as_ref();
    parse_vectors(File::open(path)?, d, path)
}

pub fn parse_vectors(reader: impl Read, d: usize, path: &Path) -> Result<Dataset> {
    if d == 0 {
        return invalid("vector dimension must be positive");
    }
    let mut points = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_reals(path, i + 1, &line)?;
        if v.len() != d {
            return Err(format_err(
                path,
                i + 1,
                format!("expected {d} values, found {}", v.len()),
            ));
        }
        points.push(Point::Reals(v));
    }
    if points.is_empty() {
        return Err(format_err(path, 1, "no vectors in file"));
    }
    Dataset::new(Domain::gaussian(d), points)
}

/// Label used for in-memory parses in error messages.
pub fn memory_path() -> PathBuf {
    PathBuf::from("<memory>")
}
