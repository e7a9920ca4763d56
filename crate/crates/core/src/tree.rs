//! Binary metric trees whose inner nodes carry 1-Lipschitz pruning functions.
//!
//! A point `x` goes to child `−1` when `f_t(x) < 0` and to child `+1` otherwise.
//! During a range search with radius `ε`, child `−1` is skipped when `f_t(q) > ε`
//! and child `+1` when `f_t(q) < −ε`.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Dataset, Domain, Point};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::stats;

/// A 1-Lipschitz decision function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Pruner {
    /// `(ρ(x, a) − ρ(x, b)) / 2`.
    GeneralizedHyperplane { a: Point, b: Point },
    /// `ρ(x, c) − r`.
    BallShell { c: Point, r: f64 },
}

impl Pruner {
    pub fn eval(&self, dom: &Domain, x: &Point) -> f64 {
        match self {
            Pruner::GeneralizedHyperplane { a, b } => 0.5 * (dom.dist(x, a) - dom.dist(x, b)),
            Pruner::BallShell { c, r } => dom.dist(x, c) - r,
        }
    }

    /// Distance computations per evaluation.
    pub fn cost(&self) -> usize {
        match self {
            Pruner::GeneralizedHyperplane { .. } => 2,
            Pruner::BallShell { .. } => 1,
        }
    }
}

/// `+1` for `f ≥ 0`, `−1` otherwise.
pub fn side(f: f64) -> i8 {
    if f >= 0.0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Splitter {
    /// Two distinct random points of the node.
    GeneralizedHyperplane,
    /// Random centre, median radius.
    BallShell,
}

impl Splitter {
    /// Parameter count `s` and operation count `t` of the threshold test in `ℝ^d`,
    /// evaluated on squared distances.
    pub fn goldberg_jerrum_params(&self, d: u64) -> (u64, u64) {
        match self {
            // Two squared distances (3d − 1 ops each) and one comparison.
            Splitter::GeneralizedHyperplane => (2 * d, 6 * d - 1),
            // One squared distance, squaring r, one comparison.
            Splitter::BallShell => (d + 1, 3 * d + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeConfig {
    pub splitter: Splitter,
    pub leaf_capacity: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl TreeConfig {
    pub fn new(splitter: Splitter, leaf_capacity: usize) -> Self {
        TreeConfig {
            splitter,
            leaf_capacity,
            max_depth: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Inner {
        pruner: Pruner,
        minus: usize,
        plus: usize,
    },
    Leaf {
        bin: Vec<usize>,
        overfull: bool,
    },
}

#[derive(Clone, Debug)]
pub struct MetricTree<'a> {
    dataset: &'a Dataset,
    nodes: Vec<Node>,
    addresses: Vec<String>,
    leaf_capacity: usize,
    max_depth: usize,
}

/// Cost of one tree search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TreeQueryStats {
    pub nodes_visited: usize,
    pub bins_scanned: usize,
    pub leaf_count: usize,
    pub distance_computations: usize,
}

impl TreeQueryStats {
    pub fn branching(&self) -> f64 {
        self.bins_scanned as f64 / self.leaf_count as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeDump {
    pub id: usize,
    pub address: String,
    #[serde(flatten)]
    pub body: NodeBody,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeBody {
    Inner {
        pruner: Pruner,
        minus: usize,
        plus: usize,
    },
    Leaf {
        bin_size: usize,
        overfull: bool,
    },
}

impl<'a> MetricTree<'a> {
    pub fn build(dataset: &'a Dataset, cfg: &TreeConfig) -> Result<Self> {
        let dom = dataset.domain();
        let splitter = cfg.splitter;
        Self::build_with(
            dataset,
            cfg.leaf_capacity,
            cfg.max_depth,
            cfg.seed,
            |members, _depth, r| match splitter {
                Splitter::GeneralizedHyperplane => {
                    if members.len() < 2 {
                        return None;
                    }
                    let i = r.random_range(0..members.len());
                    let mut j = r.random_range(0..members.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    Some(Pruner::GeneralizedHyperplane {
                        a: dataset.point(members[i]).clone(),
                        b: dataset.point(members[j]).clone(),
                    })
                }
                Splitter::BallShell => {
                    let c = dataset
                        .point(members[r.random_range(0..members.len())])
                        .clone();
                    let radii: Vec<f64> = members
                        .iter()
                        .map(|&m| dom.dist(&c, dataset.point(m)))
                        .collect();
                    Some(Pruner::BallShell {
                        c,
                        r: stats::lower_median(&radii),
                    })
                }
            },
        )
    }

    /// Builds with a caller-supplied choice of pruner per node. Returning `None` makes a leaf.
    pub fn build_with<F>(
        dataset: &'a Dataset,
        leaf_capacity: usize,
        max_depth: usize,
        seed: u64,
        mut choose: F,
    ) -> Result<Self>
    where
        F: FnMut(&[usize], usize, &mut rng::Rng) -> Option<Pruner>,
    {
        if dataset.is_empty() {
            return invalid("cannot build a tree on an empty dataset");
        }
        if leaf_capacity == 0 {
            return invalid("leaf capacity must be at least 1");
        }
        let mut tree = MetricTree {
            dataset,
            nodes: Vec::new(),
            addresses: Vec::new(),
            leaf_capacity,
            max_depth,
        };
        let mut r = rng::child(seed, "tree");
        let all: Vec<usize> = (0..dataset.len()).collect();
        tree.grow(all, String::new(), &mut r, &mut choose);
        Ok(tree)
    }

    fn grow<F>(
        &mut self,
        members: Vec<usize>,
        address: String,
        r: &mut rng::Rng,
        choose: &mut F,
    ) -> usize
    where
        F: FnMut(&[usize], usize, &mut rng::Rng) -> Option<Pruner>,
    {
        let id = self.nodes.len();
        let depth = address.chars().count();
        self.addresses.push(address.clone());
        if members.len() <= self.leaf_capacity || depth >= self.max_depth {
            let overfull = members.len() > self.leaf_capacity;
            self.nodes.push(Node::Leaf {
                bin: members,
                overfull,
            });
            return id;
        }
        let Some(pruner) = choose(&members, depth, r) else {
            self.nodes.push(Node::Leaf {
                bin: members,
                overfull: true,
            });
            return id;
        };
        let dom = self.dataset.domain();
        let (plus, minus): (Vec<usize>, Vec<usize>) = members
            .iter()
            .partition(|&&m| side(pruner.eval(dom, self.dataset.point(m))) > 0);
        if plus.is_empty() || minus.is_empty() {
            self.nodes.push(Node::Leaf {
                bin: members,
                overfull: true,
            });
            return id;
        }
        self.nodes.push(Node::Leaf {
            bin: Vec::new(),
            overfull: false,
        });
        let minus_id = self.grow(minus, format!("{address}-"), r, choose);
        let plus_id = self.grow(plus, format!("{address}+"), r, choose);
        self.nodes[id] = Node::Inner {
            pruner,
            minus: minus_id,
            plus: plus_id,
        };
        id
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn is_single_leaf(&self) -> bool {
        matches!(self.nodes[0], Node::Leaf { .. })
    }

    pub fn depth(&self) -> usize {
        self.addresses
            .iter()
            .map(|a| a.chars().count())
            .max()
            .unwrap_or(0)
    }

    /// Leaf bins in node order.
    pub fn bins(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { bin, .. } => Some(bin.as_slice()),
                Node::Inner { .. } => None,
            })
            .collect()
    }

    pub fn has_overfull_leaf(&self) -> bool {
        self.nodes
            .iter()
            .any(|n| matches!(n, Node::Leaf { overfull: true, .. }))
    }

    pub fn pruners(&self) -> impl Iterator<Item = &Pruner> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Inner { pruner, .. } => Some(pruner),
            Node::Leaf { .. } => None,
        })
    }

    /// Indices `x` with `ρ(q, x) < ε`, ascending.
    pub fn range_query(&self, q: &Point, eps: f64) -> Result<(Vec<usize>, TreeQueryStats)> {
        if !(eps > 0.0) {
            return invalid("range queries need ε > 0");
        }
        let dom = self.dataset.domain();
        let mut st = TreeQueryStats {
            leaf_count: self.leaf_count(),
            ..Default::default()
        };
        let mut hits = Vec::new();
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            st.nodes_visited += 1;
            match &self.nodes[id] {
                Node::Inner {
                    pruner,
                    minus,
                    plus,
                } => {
                    let f = pruner.eval(dom, q);
                    st.distance_computations += pruner.cost();
                    if f >= -eps {
                        stack.push(*plus);
                    }
                    if f <= eps {
                        stack.push(*minus);
                    }
                }
                Node::Leaf { bin, .. } => {
                    st.bins_scanned += 1;
                    st.distance_computations += bin.len();
                    hits.extend(
                        bin.iter()
                            .copied()
                            .filter(|&i| self.dataset.dist_to(q, i) < eps),
                    );
                }
            }
        }
        hits.sort_unstable();
        Ok((hits, st))
    }

    /// Number of true hits sitting in subtrees the search would prune. Zero for a sound tree.
    pub fn pruned_hits(&self, q: &Point, eps: f64) -> usize {
        let dom = self.dataset.domain();
        let mut missed = 0;
        let mut stack = vec![(0usize, false)];
        while let Some((id, pruned)) = stack.pop() {
            match &self.nodes[id] {
                Node::Inner {
                    pruner,
                    minus,
                    plus,
                } => {
                    let f = pruner.eval(dom, q);
                    stack.push((*plus, pruned || f < -eps));
                    stack.push((*minus, pruned || f > eps));
                }
                Node::Leaf { bin, .. } => {
                    if pruned {
                        missed += bin
                            .iter()
                            .filter(|&&i| self.dataset.dist_to(q, i) < eps)
                            .count();
                    }
                }
            }
        }
        missed
    }

    /// Leaf reached by routing `x` through every inner node.
    pub fn route(&self, x: &Point) -> usize {
        let dom = self.dataset.domain();
        let mut id = 0;
        while let Node::Inner {
            pruner,
            minus,
            plus,
        } = &self.nodes[id]
        {
            id = if side(pruner.eval(dom, x)) > 0 {
                *plus
            } else {
                *minus
            };
        }
        id
    }

    /// Coverage, routing consistency, depth and capacity.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = vec![false; self.dataset.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Leaf { bin, overfull } = node {
                if bin.len() > self.leaf_capacity && !overfull {
                    return Err(Error::InvalidState(format!(
                        "leaf {id} exceeds capacity without the flag"
                    )));
                }
                for &i in bin {
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(Error::InvalidState(format!("point {i} stored twice")));
                    }
                    if self.route(self.dataset.point(i)) != id {
                        return Err(Error::InvalidState(format!(
                            "point {i} does not route to leaf {id}"
                        )));
                    }
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidState(format!("point {i} is in no bin")));
        }
        if self.depth() > self.max_depth {
            return Err(Error::InvalidState(format!(
                "depth {} exceeds {}",
                self.depth(),
                self.max_depth
            )));
        }
        Ok(())
    }

    /// Largest `|f(x) − f(y)| − ρ(x, y)` over every pruner and `pairs` random datapoint pairs.
    pub fn lipschitz_excess(&self, pairs: usize, seed: u64) -> f64 {
        let dom = self.dataset.domain();
        let n = self.dataset.len();
        let mut r = rng::child(seed, "tree_lipschitz");
        let pairs: Vec<(usize, usize)> = (0..pairs)
            .map(|_| (r.random_range(0..n), r.random_range(0..n)))
            .collect();
        self.pruners()
            .flat_map(|p| {
                pairs.iter().map(move |&(i, j)| {
                    let (x, y) = (self.dataset.point(i), self.dataset.point(j));
                    (p.eval(dom, x) - p.eval(dom, y)).abs() - dom.dist(x, y)
                })
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn dump(&self) -> Vec<NodeDump> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeDump {
                id,
                address: self.addresses[id].clone(),
                body: match n {
                    Node::Inner {
                        pruner,
                        minus,
                        plus,
                    } => NodeBody::Inner {
                        pruner: pruner.clone(),
                        minus: *minus,
                        plus: *plus,
                    },
                    Node::Leaf { bin, overfull } => NodeBody::Leaf {
                        bin_size: bin.len(),
                        overfull: *overfull,
                    },
                },
            })
            .collect()
    }

    pub fn dump_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.dump())?)
    }
}

/// Mean fraction of bins scanned by range queries at fresh random points of `domain`.
pub fn branching_profile(
    tree: &MetricTree<'_>,
    domain: &Domain,
    query_count: usize,
    eps: f64,
    seed: u64,
) -> Result<f64> {
    if query_count == 0 {
        return invalid("need at least one query");
    }
    let fractions: Vec<f64> = (0..query_count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::rng(rng::derive_indexed(seed, "branching_query", i as u64));
            let q = domain.random_point(&mut r);
            tree.range_query(&q, eps).map(|(_, st)| st.branching())
        })
        .collect::<Result<_>>()?;
    Ok(stats::mean(&fractions))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: f64) -> Point {
        Point::Reals(vec![v])
    }

    fn hand_tree(ds: &Dataset) -> MetricTree<'_> {
        MetricTree::build_with(ds, 2, 8, 0, |_, depth, _| {
            (depth == 0).then(|| Pruner::GeneralizedHyperplane {
                a: x(0.0),
                b: x(7.0),
            })
        })
        .unwrap()
    }

    #[test]
    fn small_dataset_is_one_leaf() {
        let ds = Dataset::on_line(&[1.0, 2.0, 3.0]).unwrap();
        let t = MetricTree::build(&ds, &TreeConfig::new(Splitter::BallShell, 3)).unwrap();
        assert!(t.is_single_leaf());
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn hand_split_bins() {
        let ds = Dataset::on_line(&[0.0, 3.0, 7.0]).unwrap();
        let t = hand_tree(&ds);
        assert_eq!(t.bins(), vec![&[0, 1][..], &[2][..]]);
        t.check_invariants().unwrap();
        let dump = t.dump();
        assert_eq!(dump[1].address, "-");
        assert_eq!(dump[2].address, "+");
    }

    #[test]
    fn hand_query_prunes_minus_child() {
        let ds = Dataset::on_line(&[0.0, 3.0, 7.0]).unwrap();
        let t = hand_tree(&ds);
        let (hits, st) = t.range_query(&x(7.0), 1.0).unwrap();
        assert_eq!(hits, vec![2]);
        assert_eq!(st.bins_scanned, 1);
        let (hits, st) = t.range_query(&x(3.0), 100.0).unwrap();
        assert_eq!(hits, vec![0, 1, 2]);
        assert_eq!(st.bins_scanned, 2);
    }

    #[test]
    fn ball_shell_median_split_balances() {
        let vals: Vec<f64> = (0..9).map(|i| i as f64 * 1.3).collect();
        let ds = Dataset::on_line(&vals).unwrap();
        let t = MetricTree::build_with(&ds, 1, 1, 5, |m, _, _| {
            let c = ds.point(m[0]).clone();
            let radii: Vec<f64> = m.iter().map(|&i| ds.dist_to(&c, i)).collect();
            Some(Pruner::BallShell {
                c,
                r: stats::lower_median(&radii),
            })
        })
        .unwrap();
        let sizes: Vec<usize> = t.bins().iter().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![4, 5]);
    }

    #[test]
    fn duplicates_stop_splitting() {
        let ds = Dataset::on_line(&[1.0; 10]).unwrap();
        for s in [Splitter::GeneralizedHyperplane, Splitter::BallShell] {
            let t = MetricTree::build(&ds, &TreeConfig::new(s, 2)).unwrap();
            assert!(t.is_single_leaf());
            assert!(t.has_overfull_leaf());
            t.check_invariants().unwrap();
        }
    }

    #[test]
    fn empty_and_zero_capacity_rejected() {
        let ds = Dataset::on_line(&[1.0]).unwrap();
        assert!(MetricTree::build(&ds, &TreeConfig::new(Splitter::BallShell, 0)).is_err());
    }

    #[test]
    fn goldberg_jerrum_parameters() {
        assert_eq!(
            Splitter::GeneralizedHyperplane.goldberg_jerrum_params(2),
            (4, 11)
        );
        assert_eq!(Splitter::BallShell.goldberg_jerrum_params(2), (3, 7));
    }

    #[test]
    fn max_depth_is_respected() {
        let vals: Vec<f64> = (0..64).map(f64::from).collect();
        let ds = Dataset::on_line(&vals).unwrap();
        let mut cfg = TreeConfig::new(Splitter::BallShell, 1);
        cfg.max_depth = 3;
        let t = MetricTree::build(&ds, &cfg).unwrap();
        assert!(t.depth() <= 3);
        assert!(t.has_overfull_leaf());
        t.check_invariants().unwrap();
    }
}
