//! Input and output: the principal expression language, JSON documents,
//! Graphviz rendering, formula parsing, reports and the command line.

pub mod cli;
mod document;
mod dsl;
mod formula;
mod report;

pub use document::{render_dot, AutomatonDocument, DocumentError, TransitionDocument};
pub use dsl::{compile, parse_expr, parse_principal, DslError, PrincipalExpr};
pub use formula::{parse_gamma, parse_pcl, parse_z, FormulaError};
pub use report::{Blame, Flagged, Principal, Report, Value};
