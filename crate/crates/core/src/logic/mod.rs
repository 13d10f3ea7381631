//! Two Horn-style contract logics and their automata. Provability is
//! decided through agreement of the translated automaton.

mod ill;
mod pcl;

pub use ill::{ill_honoured, translate_ill, Honoured, IllClause, IllFormula, Literal};
pub use pcl::{pcl_entails_lambda, pcl_weak_entails, translate_pcl, PclClause, PclFormula};

use crate::agreement::AgreementError;
use crate::automaton::AutomatonError;
use crate::weak::WeakError;

#[derive(Debug, thiserror::Error)]
pub enum LogicError {
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("weak agreement only decides formulas without `->`")]
    StandardImplicationPresent,
    #[error("negative atom {0}~ in the right-hand side")]
    NegativeAtomInZ(String),
    #[error(transparent)]
    Agreement(#[from] AgreementError),
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}
