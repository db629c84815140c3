//! MILP modelling layer and solver backends.
//!
//! Formulations are written against [`Model`]; a [`MilpBackend`] turns a
//! model into a [`MilpOutcome`]. The branch-and-bound backend supports
//! [`SearchHooks`] so that callers can inject heuristic solutions and veto
//! incumbents with lazy cuts.

pub mod backend;
pub mod bnb;
pub mod model;
pub mod native;

pub use backend::{
    backend_by_name, default_backend, relative_gap, BackendError, IncumbentDecision, Injection,
    MilpBackend, MilpOutcome, MilpStatus, SearchHooks, SearchStats, SolveParams, BACKEND_ENV,
    OPTIMALITY_GAP,
};
pub use bnb::BranchAndBound;
pub use model::{Constraint, Infeasibility, Model, Sense, VarId, VarKind, Variable};
pub use native::MicrolpMip;
