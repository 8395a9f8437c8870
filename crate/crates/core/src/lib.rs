//! Tree edit, segmental, bottom-up segmental and bottom-up distances between
//! unordered labeled trees, computed exactly through small 0-1 programs.

pub mod bounds;
pub mod cost;
pub mod dp;
pub mod harness;
pub mod ilp;
pub mod mapping;
pub mod matching;
pub mod solver;
pub mod tree;

pub use cost::{unit_cost, CostFunction};
pub use dp::{distance, DistanceResult, Method};
pub use mapping::{DistanceClass, Mapping};
pub use solver::SolverConfig;
pub use tree::{parse_bracket, render_bracket, Label, NodeId, Tree};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Tree(#[from] tree::TreeError),
    #[error(transparent)]
    Cost(#[from] cost::CostError),
    #[error(transparent)]
    Oracle(#[from] mapping::OracleError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error("naive model would need about {rows} rows (limit {cap})")]
    ModelTooLarge { rows: usize, cap: usize },
}
