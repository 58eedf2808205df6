//! Small quantum circuits: a text format, exact simulation with measurement
//! branches, channel equivalence, and a rewrite engine for the standard
//! CNOT/CZ/H identities and measurement-deferral rules.

pub mod circuit;
pub mod engine;
pub mod equivalence;
pub mod linalg;
pub mod rules;
pub mod scenarios;
pub mod sim;
pub mod text;

pub use circuit::{Cbit, CbitRole, Circuit, CircuitBuilder, CircuitError, Instruction, Prep, Qubit, Sink, WireRef};
pub use linalg::Matrix;
pub use sim::{Branch, Channel, SimError, StateVector};
pub use text::{parse, serialize, ParseError};
