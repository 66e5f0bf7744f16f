//! Deterministic QBF generators: exhaustive template enumeration and seeded
//! random sampling.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::{truth_table_valid, Formula, Qbf, Quantifier, Var, QBF_CAP};

/// Exhaustive enumeration keeps one matrix per truth function, so it is
/// limited to small variable counts.
pub const EXHAUSTIVE_VAR_CAP: usize = 3;

/// `truth_function_matrices` enumerates all `2^(2^n)` functions.
pub const TRUTH_FUNCTION_VAR_CAP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrefixPattern {
    /// `∃*∀*`
    ExistsForall,
    /// `∀*∃*`
    ForallExists,
    /// any interleaving
    Arbitrary,
}

impl PrefixPattern {
    pub fn admits(self, quantifiers: &[Quantifier]) -> bool {
        let split = |outer, inner| {
            let first = quantifiers
                .iter()
                .position(|q| *q == inner)
                .unwrap_or(quantifiers.len());
            quantifiers[..first].iter().all(|q| *q == outer)
                && quantifiers[first..].iter().all(|q| *q == inner)
        };
        match self {
            PrefixPattern::ExistsForall => split(Quantifier::Exists, Quantifier::Forall),
            PrefixPattern::ForallExists => split(Quantifier::Forall, Quantifier::Exists),
            PrefixPattern::Arbitrary => true,
        }
    }

    /// Short name used on the command line.
    pub fn code(self) -> &'static str {
        match self {
            PrefixPattern::ExistsForall => "ea",
            PrefixPattern::ForallExists => "ae",
            PrefixPattern::Arbitrary => "any",
        }
    }

    pub fn from_code(s: &str) -> Option<PrefixPattern> {
        match s {
            "ea" => Some(PrefixPattern::ExistsForall),
            "ae" => Some(PrefixPattern::ForallExists),
            "any" => Some(PrefixPattern::Arbitrary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    Random { count: usize },
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QbfGenSpec {
    pub seed: u64,
    /// Upper bound on the prefix length; every length up to it is generated.
    pub num_vars: usize,
    pub pattern: PrefixPattern,
    pub mode: GenMode,
    pub matrix_depth: usize,
}

impl QbfGenSpec {
    pub fn random(seed: u64, num_vars: usize, pattern: PrefixPattern, count: usize) -> QbfGenSpec {
        QbfGenSpec {
            seed,
            num_vars,
            pattern,
            mode: GenMode::Random { count },
            matrix_depth: 4,
        }
    }

    pub fn exhaustive(num_vars: usize, pattern: PrefixPattern, matrix_depth: usize) -> QbfGenSpec {
        QbfGenSpec {
            seed: 0,
            num_vars,
            pattern,
            mode: GenMode::Exhaustive,
            matrix_depth,
        }
    }
}

/// Prefix variable `i`, named `x<i+1>`.
pub fn prefix_var(i: usize) -> Var {
    Var::new(&format!("x{}", i + 1)).expect("well-formed")
}

pub fn prefix_vars(n: usize) -> Vec<Var> {
    (0..n).map(prefix_var).collect()
}

/// Every quantifier sequence of length `n` admitted by `pattern`.
pub fn quantifier_patterns(n: usize, pattern: PrefixPattern) -> Vec<Vec<Quantifier>> {
    (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|i| {
                    if bits >> (n - 1 - i) & 1 == 1 {
                        Quantifier::Forall
                    } else {
                        Quantifier::Exists
                    }
                })
                .collect::<Vec<_>>()
        })
        .filter(|qs| pattern.admits(qs))
        .collect()
}

/// Truth table of `f` over `vars`: bit `r` is the value on row `r`, where
/// variable `i` takes bit `i` of `r`. `vars.len() <= 6`.
fn row_bits(f: &Formula, vars: &[Var]) -> u64 {
    let rows = 1usize << vars.len();
    let mut bits = 0;
    for r in 0..rows {
        let a = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), r >> i & 1 == 1))
            .collect();
        if f.evaluate(&a).expect("closed over vars") {
            bits |= 1 << r;
        }
    }
    bits
}

/// One matrix per truth function over `vars` that some formula of depth at
/// most `depth` expresses, built from constants, variables and all five
/// connectives. The first (shallowest) formula found for a function is kept.
pub fn matrix_templates(vars: &[Var], depth: usize) -> Result<Vec<Formula>> {
    Error::cap(
        "exhaustive matrix enumeration",
        EXHAUSTIVE_VAR_CAP,
        vars.len(),
    )?;
    let mut seen = HashSet::new();
    let mut found: Vec<(Formula, u64)> = Vec::new();
    let mut keep = |f: Formula, found: &mut Vec<(Formula, u64)>| {
        let bits = row_bits(&f, vars);
        if seen.insert(bits) {
            found.push((f, bits));
        }
    };
    for leaf in [Formula::t(), Formula::f()]
        .into_iter()
        .chain(vars.iter().map(Formula::var))
    {
        keep(leaf, &mut found);
    }
    for _ in 0..depth {
        let previous: Vec<Formula> = found.iter().map(|(f, _)| f.clone()).collect();
        for a in &previous {
            keep(Formula::not(a.clone()), &mut found);
        }
        for a in &previous {
            for b in &previous {
                keep(Formula::and(a.clone(), b.clone()), &mut found);
                keep(Formula::or(a.clone(), b.clone()), &mut found);
                keep(Formula::implies(a.clone(), b.clone()), &mut found);
                keep(Formula::iff(a.clone(), b.clone()), &mut found);
            }
        }
    }
    Ok(found.into_iter().map(|(f, _)| f).collect())
}

/// A matrix for every one of the `2^(2^n)` truth functions over `vars`,
/// written as a Shannon expansion on the variables in order.
pub fn truth_function_matrices(vars: &[Var]) -> Result<Vec<Formula>> {
    Error::cap(
        "truth function enumeration",
        TRUTH_FUNCTION_VAR_CAP,
        vars.len(),
    )?;
    let rows = 1usize << vars.len();
    Ok((0..1u64 << rows)
        .map(|table| shannon(table, rows, vars))
        .collect())
}

fn shannon(table: u64, rows: usize, vars: &[Var]) -> Formula {
    let full = if rows == 64 {
        u64::MAX
    } else {
        (1 << rows) - 1
    };
    if table == 0 {
        return Formula::f();
    }
    if table == full {
        return Formula::t();
    }
    // highest variable splits the rows into a low (false) and a high (true) half
    let (last, rest) = vars.split_last().expect("non-constant needs a variable");
    let half = rows / 2;
    let lo = table & ((1 << half) - 1);
    let hi = table >> half;
    let x = Formula::var(last);
    if lo == hi {
        return shannon(lo, half, rest);
    }
    let branch = |cofactor: u64, positive: bool| {
        let lit = Formula::literal(last, positive);
        match cofactor {
            0 => None,
            c if c == (1 << half) - 1 => Some(lit),
            c => Some(Formula::and(lit, shannon(c, half, rest))),
        }
    };
    match (branch(hi, true), branch(lo, false)) {
        (Some(h), Some(l)) => Formula::or(h, l),
        (Some(h), None) => h,
        (None, Some(l)) => l,
        (None, None) => {
            drop(x);
            Formula::f()
        }
    }
}

/// Generates the QBF stream described by `spec`. Same spec, same stream.
pub fn generate_qbfs(spec: &QbfGenSpec) -> Result<Vec<Qbf>> {
    match spec.mode {
        GenMode::Exhaustive => exhaustive(spec),
        GenMode::Random { count } => random(spec, count),
    }
}

fn exhaustive(spec: &QbfGenSpec) -> Result<Vec<Qbf>> {
    Error::cap("exhaustive generation", EXHAUSTIVE_VAR_CAP, spec.num_vars)?;
    let mut out = Vec::new();
    for n in 0..=spec.num_vars {
        let vars = prefix_vars(n);
        let templates = matrix_templates(&vars, spec.matrix_depth)?;
        for qs in quantifier_patterns(n, spec.pattern) {
            let prefix: Vec<(Quantifier, Var)> = qs.into_iter().zip(vars.iter().cloned()).collect();
            for m in &templates {
                out.push(Qbf::new(prefix.clone(), m.clone())?);
            }
        }
    }
    Ok(out)
}

fn random(spec: &QbfGenSpec, count: usize) -> Result<Vec<Qbf>> {
    Error::cap("random generation", QBF_CAP, spec.num_vars)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng.gen_range(0..=spec.num_vars);
        let vars = prefix_vars(n);
        let qs = random_quantifiers(&mut rng, n, spec.pattern);
        let prefix: Vec<(Quantifier, Var)> = qs.into_iter().zip(vars.iter().cloned()).collect();
        // steer toward an even split of valid and invalid formulas
        let want_valid = rng.gen_bool(0.5);
        let mut qbf = None;
        for _ in 0..32 {
            let matrix = random_formula(&mut rng, &vars, spec.matrix_depth);
            let candidate = Qbf::new(prefix.clone(), matrix)?;
            let hit = truth_table_valid(&candidate)? == want_valid;
            qbf = Some(candidate);
            if hit {
                break;
            }
        }
        out.push(qbf.expect("at least one attempt"));
    }
    Ok(out)
}

fn random_quantifiers(rng: &mut ChaCha8Rng, n: usize, pattern: PrefixPattern) -> Vec<Quantifier> {
    let split = rng.gen_range(0..=n);
    let (outer, inner) = match pattern {
        PrefixPattern::ExistsForall => (Quantifier::Exists, Quantifier::Forall),
        PrefixPattern::ForallExists => (Quantifier::Forall, Quantifier::Exists),
        PrefixPattern::Arbitrary => {
            return (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Quantifier::Exists
                    } else {
                        Quantifier::Forall
                    }
                })
                .collect()
        }
    };
    (0..n)
        .map(|i| if i < split { outer } else { inner })
        .collect()
}

/// Random formula of depth at most `depth` over `vars`. Leaves are mostly
/// variables, with some constants and, where depth allows, tautology or
/// contradiction fragments `v | !v` / `v & !v`.
pub fn random_formula<R: Rng>(rng: &mut R, vars: &[Var], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return random_leaf(rng, vars, depth);
    }
    let sub = |rng: &mut R| random_formula(rng, vars, depth - 1);
    match rng.gen_range(0..9) {
        0 | 1 => Formula::not(sub(rng)),
        2 | 3 => Formula::and(sub(rng), sub(rng)),
        4 | 5 => Formula::or(sub(rng), sub(rng)),
        6 | 7 => Formula::iff(sub(rng), sub(rng)),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

fn random_leaf<R: Rng>(rng: &mut R, vars: &[Var], depth: usize) -> Formula {
    let Some(v) = vars.choose(rng) else {
        return Formula::Const(rng.gen_bool(0.5));
    };
    match rng.gen_range(0..10) {
        0 => Formula::Const(rng.gen_bool(0.5)),
        1 if depth >= 2 => Formula::or(Formula::var(v), Formula::not(Formula::var(v))),
        2 if depth >= 2 => Formula::and(Formula::var(v), Formula::not(Formula::var(v))),
        _ => Formula::var(v),
    }
}
