//! Synthesis of single-output AND-Inverter Graphs from truth tables.
//!
//! The engine grows an AIG one AND node at a time, choosing each node with
//! PUCT tree search guided by a pluggable policy/value [`evaluator`]. The
//! crate also carries the data pipeline around it: cut extraction from
//! benchmark circuits into action-sequence datasets ([`cutgen`]), an exact
//! minimum-size oracle for small input counts ([`oracle`]) and an evaluation
//! harness ([`bench`]).

pub mod aig;
pub mod bench;
pub mod cutgen;
pub mod env;
pub mod evaluator;
pub mod oracle;
pub mod parallel;
pub mod search;
pub mod truthtable;

pub use aig::{Aig, AigError, AndNode, NodeId, Signal};
pub use env::{Action, EnvError, StepOutcome, SynthState};
pub use truthtable::{ConnectionType, RowPermutation, TruthTable, TruthTableError};
