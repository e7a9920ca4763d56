//! A laboratory for exact and approximate similarity search in metric spaces
//! with measure.
//!
//! The crate bundles the objects needed to watch the curse of dimensionality
//! happen on synthetic workloads:
//!
//! - [`domain`]: Hamming cubes, Gaussian space, unit cube, sphere and finite
//!   metrics, with samplers, characteristic-size normalization and file loaders.
//! - [`concentration`]: concentration functions, Lipschitz deviation,
//!   nearest-neighbour distance curves and intrinsic-dimension estimators.
//! - [`vc`]: brute-force shattering, VC dimension of restricted concept
//!   classes, uniform Glivenko–Cantelli sample bounds.
//! - [`pivot`], [`tree`], [`graph`]: three families of distance-based indexes
//!   with per-query accounting.
//! - [`reduce`]: Johnson–Lindenstrauss projections, coordinate sampling and
//!   mod-2 random linear maps on the Hamming cube.
//! - [`adversary`]: Katětov functions and the adversarial distance oracle for
//!   black-box exact search.
//! - [`experiments`]: the CSV harness driven by the `simlab` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod adversary;
pub mod concentration;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod pivot;
pub mod reduce;
pub mod rng;
pub mod scan;
pub mod stats;
pub mod tree;
pub mod vc;

pub use domain::{Dataset, Domain, DomainKind, FiniteMetric, Point};
pub use error::{Error, Result};
