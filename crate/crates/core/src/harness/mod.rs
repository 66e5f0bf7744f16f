//! Verification engine: QBF generation, equivalence and lemma checks, and
//! growth measurement for the three reductions.

mod check;
mod generate;
mod growth;

pub use check::{
    check_equivalence, check_lemma, check_qbfs, reduce, solve, CaseOutcome, CheckKind, CheckReport,
    Counterexample, Decision, Fixture, Instance, SizeBucket, Target,
};
pub use generate::{
    generate_qbfs, matrix_templates, prefix_var, prefix_vars, quantifier_patterns, random_formula,
    truth_function_matrices, GenMode, PrefixPattern, QbfGenSpec, EXHAUSTIVE_VAR_CAP,
    TRUTH_FUNCTION_VAR_CAP,
};
pub use growth::{
    fit_quadratic, measure_growth, planning_growth_prefix, GrowthRow, GrowthTable,
    GROWTH_RAISE_CAP, PRECONDITION_SLACK,
};
