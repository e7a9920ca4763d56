//! Katětov functions and an adversarial distance oracle for black-box exact search.
//!
//! A Katětov function `f` on a finite metric space `(X, d)` satisfies
//! `|f(x) − f(y)| ≤ d(x, y) ≤ f(x) + f(y)` for all pairs, which is exactly what it
//! takes for `f` to be the distance function of a new point added to `X`. The
//! adversary answers every distance query with 1 and only afterwards picks a
//! Katětov extension consistent with those answers whose nearest neighbour is a
//! point the search never looked at.

use rand::Rng as _;
use serde::Serialize;

use crate::domain::FiniteMetric;
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Slack for the pairwise comparisons.
pub const KATETOV_TOLERANCE: f64 = 1e-12;

/// First pair violating the Katětov conditions, or `None`.
pub fn katetov_violation(
    space: &FiniteMetric,
    values: &[f64],
) -> Result<Option<(usize, usize, String)>> {
    let n = space.len();
    if values.len() != n {
        return invalid(format!("{} values for a space of {n} points", values.len()));
    }
    if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Ok(Some((
            i,
            i,
            format!("value {} is not a nonnegative real", values[i]),
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.get(i, j);
            let (a, b) = (values[i], values[j]);
            if (a - b).abs() > d + KATETOV_TOLERANCE {
                return Ok(Some((i, j, format!("|{a} − {b}| > {d}"))));
            }
            if d > a + b + KATETOV_TOLERANCE {
                return Ok(Some((i, j, format!("{a} + {b} < {d}"))));
            }
        }
    }
    Ok(None)
}

pub fn is_katetov(space: &FiniteMetric, values: &[f64]) -> Result<bool> {
    Ok(katetov_violation(space, values)?.is_none())
}

/// A verified Katětov function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KatetovFunction {
    pub values: Vec<f64>,
}

impl KatetovFunction {
    pub fn verified(space: &FiniteMetric, values: Vec<f64>) -> Result<Self> {
        if let Some((x, y, detail)) = katetov_violation(space, &values)? {
            return Err(Error::KatetovViolation { x, y, detail });
        }
        Ok(KatetovFunction { values })
    }

    /// Indices attaining the minimum value.
    pub fn nearest(&self) -> Vec<usize> {
        let m = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        (0..self.values.len())
            .filter(|&i| self.values[i] == m)
            .collect()
    }
}

/// Which extension the adversary commits to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FinalizeMode {
    /// `f ≡ 1` off `x₀`, `f(x₀) = 1 − d(x₀, X∖{x₀})/2`.
    Default,
    /// `f(x) = max{1 − d(x, Y), d(x₀, Y) − d(x, x₀)}`, checked after the fact.
    DistanceFormula,
}

/// Distance oracle for an unknown query point.
#[derive(Clone, Debug)]
pub struct Adversary {
    space: FiniteMetric,
    queried: Vec<usize>,
    transcript: Vec<(usize, f64)>,
    finalized: Option<KatetovFunction>,
}

impl Adversary {
    /// Rescales the space to diameter 1.
    pub fn new(space: &FiniteMetric) -> Result<Self> {
        let diam = space.diameter();
        if space.len() < 2 || diam <= 0.0 {
            return Err(Error::DegenerateDomain(
                "adversary needs two points at positive distance".into(),
            ));
        }
        Ok(Adversary {
            space: space.scaled(1.0 / diam),
            queried: Vec::new(),
            transcript: Vec::new(),
            finalized: None,
        })
    }

    pub fn space(&self) -> &FiniteMetric {
        &self.space
    }

    /// Queried points in first-query order.
    pub fn queried(&self) -> &[usize] {
        &self.queried
    }

    pub fn transcript(&self) -> &[(usize, f64)] {
        &self.transcript
    }

    pub fn finalized(&self) -> Option<&KatetovFunction> {
        self.finalized.as_ref()
    }

    /// Answers `d(q, x) = 1` and records `x`.
    pub fn answer(&mut self, x: usize) -> Result<f64> {
        if self.finalized.is_some() {
            return Err(Error::InvalidState(
                "adversary already finalized; read the function instead".into(),
            ));
        }
        if x >= self.space.len() {
            return invalid(format!(
                "point {x} out of range for {} points",
                self.space.len()
            ));
        }
        if !self.queried.contains(&x) {
            self.queried.push(x);
        }
        self.transcript.push((x, 1.0));
        Ok(1.0)
    }

    fn dist_to_set(&self, x: usize, set: impl Iterator<Item = usize>) -> f64 {
        set.map(|y| self.space.get(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Commits to a query point whose unique nearest neighbour is `x0`.
    pub fn finalize(&mut self, x0: usize, mode: FinalizeMode) -> Result<KatetovFunction> {
        let n = self.space.len();
        if x0 >= n {
            return invalid(format!("point {x0} out of range for {n} points"));
        }
        if self.queried.contains(&x0) {
            return invalid(format!("point {x0} was already queried"));
        }
        let values: Vec<f64> = match mode {
            FinalizeMode::Default => {
                let gap = self.dist_to_set(x0, (0..n).filter(|&y| y != x0));
                (0..n)
                    .map(|x| if x == x0 { 1.0 - gap / 2.0 } else { 1.0 })
                    .collect()
            }
            FinalizeMode::DistanceFormula => {
                if self.queried.is_empty() {
                    return invalid("the distance formula needs at least one queried point");
                }
                let d0 = self.dist_to_set(x0, self.queried.iter().copied());
                (0..n)
                    .map(|x| {
                        let dy = self.dist_to_set(x, self.queried.iter().copied());
                        (1.0 - dy).max(d0 - self.space.get(x, x0))
                    })
                    .collect()
            }
        };
        let f = KatetovFunction::verified(&self.space, values)?;
        debug_assert!(self
            .queried
            .iter()
            .all(|&y| (f.values[y] - 1.0).abs() <= KATETOV_TOLERANCE));
        let rival = (0..n)
            .filter(|&x| x != x0 && f.values[x] <= f.values[x0])
            .min_by(|&a, &b| f.values[a].total_cmp(&f.values[b]).then(a.cmp(&b)));
        if let Some(rival) = rival {
            return Err(Error::AmbiguousNearest { target: x0, rival });
        }
        self.finalized = Some(f.clone());
        Ok(f)
    }
}

/// A search procedure that sees distances only through an oracle.
pub trait BlackBoxSearch {
    fn name(&self) -> String;
    /// Returns the index it claims is nearest to the hidden query.
    fn search(&mut self, n: usize, oracle: &mut dyn FnMut(usize) -> Result<f64>) -> Result<usize>;
}

/// Queries every point and returns the first minimum.
pub struct LinearScan;

impl BlackBoxSearch for LinearScan {
    fn name(&self) -> String {
        "linear_scan".into()
    }

    fn search(&mut self, n: usize, oracle: &mut dyn FnMut(usize) -> Result<f64>) -> Result<usize> {
        EarlyStop { calls: n }.search(n, oracle)
    }
}

/// Queries points `0, 1, …, calls − 1` and returns the first minimum among them.
pub struct EarlyStop {
    pub calls: usize,
}

impl BlackBoxSearch for EarlyStop {
    fn name(&self) -> String {
        format!("early_stop_{}", self.calls)
    }

    fn search(&mut self, n: usize, oracle: &mut dyn FnMut(usize) -> Result<f64>) -> Result<usize> {
        first_minimum((0..self.calls.min(n)).collect(), oracle)
    }
}

/// Queries a seeded random prefix of a permutation and returns the first minimum among it.
pub struct RandomPrefix {
    pub calls: usize,
    pub seed: u64,
}

impl BlackBoxSearch for RandomPrefix {
    fn name(&self) -> String {
        format!("random_prefix_{}", self.calls)
    }

    fn search(&mut self, n: usize, oracle: &mut dyn FnMut(usize) -> Result<f64>) -> Result<usize> {
        let mut r = rng::child(self.seed, "prefix");
        let order = rand::seq::index::sample(&mut r, n, self.calls.min(n)).into_vec();
        first_minimum(order, oracle)
    }
}

/// Queries all but the last point and answers the last one.
pub struct AnswerUnqueried;

impl BlackBoxSearch for AnswerUnqueried {
    fn name(&self) -> String {
        "answer_unqueried".into()
    }

    fn search(&mut self, n: usize, oracle: &mut dyn FnMut(usize) -> Result<f64>) -> Result<usize> {
        for x in 0..n - 1 {
            oracle(x)?;
        }
        Ok(n - 1)
    }
}

fn first_minimum(order: Vec<usize>, oracle: &mut dyn FnMut(usize) -> Result<f64>) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for x in order {
        let d = oracle(x)?;
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((x, d));
        }
    }
    best.map(|b| b.0)
        .ok_or_else(|| Error::Protocol("search made no calls".into()))
}

/// Everything that happened in one game, for auditing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameTranscript {
    pub algorithm: String,
    pub n: usize,
    pub calls: Vec<(usize, f64)>,
    pub distinct_calls: usize,
    pub answer: usize,
    pub x0: Option<usize>,
    pub values: Option<Vec<f64>>,
    pub fooled: bool,
}

impl GameTranscript {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs `algo` against a fresh adversary.
///
/// When some point outside the queried set and the answer exists, the adversary
/// finalizes on the lowest-index such point and the algorithm is fooled unless
/// its answer is a nearest neighbour of the finalized query. Otherwise nothing
/// can be hidden and the algorithm is not fooled.
pub fn run_adversary_game(
    space: &FiniteMetric,
    algo: &mut dyn BlackBoxSearch,
) -> Result<GameTranscript> {
    let n = space.len();
    let adv = std::cell::RefCell::new(Adversary::new(space)?);
    let mut oracle = |x: usize| -> Result<f64> {
        let mut a = adv.borrow_mut();
        if a.transcript().len() >= n {
            return Err(Error::Protocol(format!("more than {n} oracle calls")));
        }
        a.answer(x).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Protocol(m),
            other => other,
        })
    };
    let answer = algo.search(n, &mut oracle)?;
    if answer >= n {
        return Err(Error::Protocol(format!(
            "answer {answer} is not a point of the space"
        )));
    }
    let mut adv = adv.into_inner();
    let x0 = (0..n).find(|&x| x != answer && !adv.queried().contains(&x));
    let (values, fooled) = match x0 {
        Some(x0) => {
            let f = adv.finalize(x0, FinalizeMode::Default)?;
            let fooled = !f.nearest().contains(&answer);
            (Some(f.values), fooled)
        }
        None => (None, false),
    };
    Ok(GameTranscript {
        algorithm: algo.name(),
        n,
        calls: adv.transcript().to_vec(),
        distinct_calls: adv.queried().len(),
        answer,
        x0,
        values,
        fooled,
    })
}

/// Random points of the unit cube in `ℝ³`, as a finite metric of diameter 1.
pub fn random_space(n: usize, seed: u64) -> Result<FiniteMetric> {
    let mut r = rng::child(seed, "space");
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| r.random::<f64>()).collect())
        .collect();
    let m = FiniteMetric::from_points(&pts)?;
    let diam = m.diameter();
    Ok(m.scaled(1.0 / diam))
}
