//! Home healthcare routing and scheduling with task-splitting.

pub mod fixtures;
pub mod formulation;
pub mod generator;
pub mod heuristics;
pub mod io;
pub mod metrics;
pub mod mode;
pub mod mtz;
pub mod model;
pub mod oracle;
pub mod par;
pub mod preprocess;
pub mod routing;
pub mod search;
pub mod solve;
pub mod stn;
pub mod sync;
pub mod timing;
pub mod ti_graph;
pub mod ti_model;
pub mod verify;

pub use model::{
    plan_cost, plan_travel_time, DependencySpec, ExecClass, Instance, InstanceError, Plan, PlanError, QualSet,
    Qualification, Route, Stop, Visit, VisitKind,
};
pub use sync::{sync_params, SyncType};
pub use mode::{Objective, SolveMode, SplitPolicy};
pub use verify::{check_plan, VerifyReport, Violation, ViolationClass};
