//! Exact mixed-integer linear programming: a bounded-variable primal simplex
//! over arbitrary-precision rationals, and best-bound branch and bound.

mod branch;
mod model;
mod rational;
mod simplex;

pub use branch::{solve_milp, solve_milp_with_cuts, MilpOptions, MilpOutcome, DEFAULT_NODE_BUDGET, NODE_BUDGET_ENV};
pub use model::{Constraint, MilpModel, Relation, Sense, VarId, VarKind, Variable};
pub use rational::{ParseRationalError, Rational};
pub use simplex::{solve_lp, LpOutcome, LpSolution};
