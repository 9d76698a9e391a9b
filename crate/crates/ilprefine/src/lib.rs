//! Improves a balanced k-way graph partition by building a contracted model
//! around the cut, encoding block assignment as a binary program with
//! symmetry breaking and warm starts, solving it exactly (or best-effort
//! under a time limit) with a built-in branch-and-bound solver, and
//! projecting the result back to the input graph.
//!
//! The core is generic over the weight scalar via [`scalar::Weight`]
//! (`f32`/`f64`); the `F64` aliases below are what the CLI uses.

pub mod graph;
pub mod ilp;
pub mod io;
pub mod model;
pub mod partition;
pub mod refine;
pub mod report;
pub mod scalar;
pub mod selection;
pub mod solver;

pub use graph::{cut_value, l_max, Graph};
pub use ilp::{build_ilp, BoundMode, IlpInstance, IlpOptions, IlpPreset};
pub use model::{build_model, CoarseModel};
pub use partition::Partition;
pub use refine::{
    bootstrap_partition, default_nonzero_budget, default_strategies, evaluate, refine,
    EvaluateReport, RefineConfig, RunRecord,
};
pub use report::{report_performance, TIMED_OUT_RATIO};
pub use scalar::Weight;
pub use selection::{
    estimate_nonzeros, select, select_boundary, select_gain, select_top_vertices, KeptSet,
    SelectionStrategy, StrategyKind,
};
pub use solver::{
    solve, solve_exhaustive, solve_exhaustive_with_cap, BranchOrder, SolveResult, SolveStats,
    SolveStatus, SolverConfig,
};

/// Concrete aliases at the default precision.
pub type GraphF64 = Graph<f64>;
pub type PartitionF64 = Partition<f64>;
pub type CoarseModelF64 = CoarseModel<f64>;
pub type IlpInstanceF64 = IlpInstance<f64>;
pub type SolveResultF64 = SolveResult<f64>;
