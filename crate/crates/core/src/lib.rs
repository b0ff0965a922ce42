//! Exact minimization of an ordered weighted average (OWA) over the
//! spanning trees of a graph whose edges carry several integer costs.
//!
//! The solver combines edge fixing by cut and cycle conditions, shaving
//! with lower bounds, and a depth-first branch-and-bound. A brute-force
//! [`oracle`] and an LP-format [`mip`] export are included for checking.

pub mod bounds;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod lp;
pub mod mip;
pub mod model;
pub mod mst;
pub mod oracle;
pub mod preprocess;
pub mod rational;
pub mod search;

pub use bounds::{BoundMethod, BoundResult, IdealPoint};
pub use error::{Error, Infeasibility, Result};
pub use model::{
    lorenz, owa, tree_image, CostVector, Edge, EdgeId, ImageVector, Instance, LorenzVector, OwaWeights, Solution,
    WeightClass,
};
pub use mst::{EdgeColoring, EdgeState, SpanningTree};
pub use rational::{format_rational, parse_rational, Rational};
pub use search::{solve, SearchConfig, SearchOutcome, SearchStats};
