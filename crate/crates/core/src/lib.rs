//! Capacitated vehicle routing local search with a library of 17 classic
//! neighborhood operators, adaptive operator selection (probability
//! matching, adaptive pursuit), and local-optima-correlation analysis that
//! measures how operators get stuck together and uses that signal to steer
//! selection away from likely-trapped operators.

pub mod aos;
pub mod aos_loc;
pub mod error;
pub mod instance;
pub mod loc;
pub mod ops;
pub mod rng;
pub mod search;
pub mod solution;

pub use error::{InstanceError, LocError, PlanError};
pub use instance::{
    generate_uniform_instance, parse_cvrplib, write_cvrplib, Instance, UniformSpec,
};
pub use ops::{
    apply_move, enumerate_moves, improving_step, is_trapped, move_delta, ImproveMode, Move,
    OperatorId, OperatorKind,
};
pub use solution::{evaluate, initial_solution, DistanceMode, Evaluator, RoutePlan};
