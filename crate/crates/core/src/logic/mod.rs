//! Propositional formulas, QBFs and the brute-force oracles every reduction
//! is checked against.

mod formula;
mod parse;
mod qbf;
mod semantics;
mod var;

pub use formula::{Assignment, Formula};
pub use parse::{parse_formula, parse_qbf, serialize_formula, serialize_qbf};
pub(crate) use parse::{parse_formula_at, parse_names_at};
pub use qbf::{qbf_valid, truth_table_valid, Qbf, Quantifier, QBF_CAP};
pub use semantics::{consistent, entails, equivalent, TruthTable, Universe, ENTAILMENT_CAP};
pub use var::Var;
