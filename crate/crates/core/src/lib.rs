//! Quantifier raising: reductions from quantified boolean formulas to
//! explanation existence in propositional abduction, skeptical entailment
//! in Reiter default logic and plan existence in STRIPS with formula
//! preconditions, each built from a base reduction plus one merge gadget per
//! quantifier, together with the brute-force deciders used to check them.

pub mod abduction;
pub mod cli;
pub mod default_logic;
mod error;
mod format;
pub mod harness;
pub mod logic;
pub mod planning;

pub use error::{Error, Result};
pub use logic::{Formula, Qbf, Quantifier, Var};
