//! Contract automata: composition, agreement checking and orchestration
//! synthesis, weak agreement decided through exact integer flow programs,
//! and the translation of two Horn-style contract logics into automata.

pub mod automaton;
pub mod milp;
pub mod agreement;
pub mod weak;
pub mod logic;
pub mod frontend;

pub use automaton::{
    a_product, complementary, concatenate, isomorphic, product, ActionKind, ActionVector,
    AutomatonError, BasicAction, ContractAutomaton, Observed, StateVector, Trace, Transition,
};
