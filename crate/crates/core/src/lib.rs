//! Cluster descriptors: pick disjoint tag sets that explain each cluster.
//!
//! An [`Instance`] assigns every object to one of `k` clusters and gives it a
//! set of tags. A descriptor for cluster `ℓ` is a set of tags `X_ℓ`; it covers
//! the members of `C_ℓ` that carry at least one of those tags. The problems
//! solved here ask for disjoint descriptors that each cover at least `M_ℓ`
//! members, using as few tags as possible (or, with an overlap budget, with
//! some tags shared).
//!
//! Solver routes:
//!
//! - [`exact`]: branch-and-bound over the integer program, plus brute force
//!   for tiny instances.
//! - [`rounding`]: randomized rounding of the LP relaxation.
//! - [`dp`]: pseudo-polynomial dynamic program for two clusters.
//! - [`submodular`]: greedy matroid maximization with a budget search.
//!
//! ```
//! use cluster_describe::{Instance, Requirements, exact};
//!
//! let inst = Instance::new(2, 3, vec![(0, vec![0]), (0, vec![1]), (1, vec![2])])?;
//! let req = Requirements::new(vec![2, 1]);
//! let best = exact::branch_and_bound(&inst, &req, &Default::default())?;
//! assert_eq!(best.solution.unwrap().cost(), 3);
//! # Ok::<(), cluster_describe::Error>(())
//! ```

pub mod datagen;
pub mod dp;
mod error;
pub mod exact;
pub mod experiment;
pub mod io;
pub mod lp;
pub mod model;
pub mod report;
pub mod rounding;
pub mod submodular;

pub use error::{Error, Result};
pub use model::{
    coverage, stats, validate_solution, FeasibilityReport, Instance, InstanceStats, Object,
    Requirements, Solution,
};
