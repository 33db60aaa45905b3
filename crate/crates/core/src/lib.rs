//! Approximation algorithms for min-max (multi-scenario) shortest path and
//! minimum spanning tree, built on an LP relaxation and rounding.
//!
//! Each instance carries `K` cost scenarios; the goal is a path or spanning
//! tree whose worst scenario cost is small. The crate provides:
//!
//! - [`model`]: instances, exact evaluation, canonical JSON;
//! - [`lp`]: the relaxation, its optimal bound `L*`, cut separation and flow
//!   post-processing;
//! - [`rounding`]: deterministic and randomized rounding for selection problems;
//! - [`sp`] and [`mst`]: the end-to-end approximation algorithms;
//! - [`gen`] and [`oracle`]: instance generators and exhaustive exact solvers.

pub mod error;
pub mod gen;
pub mod graph;
pub mod lp;
pub mod model;
pub mod mst;
pub mod oracle;
pub mod report;
pub mod rounding;
pub mod sp;

pub use error::{Error, Result};
pub use model::{evaluate, parse_instance, Cost, DiscreteSolution, Instance, Kind};
pub use report::RunReport;
