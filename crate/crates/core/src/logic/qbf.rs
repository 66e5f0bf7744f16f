use std::collections::BTreeSet;
use std::fmt;

use super::formula::{Assignment, Formula};
use super::var::Var;
use crate::error::{Error, Result};

/// Largest prefix the QBF oracles will expand.
pub const QBF_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Quantifier::Exists => '∃',
            Quantifier::Forall => '∀',
        }
    }
}

/// Closed prenex QBF. The prefix is stored outermost first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Qbf {
    prefix: Vec<(Quantifier, Var)>,
    matrix: Formula,
}

impl Qbf {
    /// Rejects repeated prefix variables and matrix variables outside the prefix.
    pub fn new(prefix: Vec<(Quantifier, Var)>, matrix: Formula) -> Result<Qbf> {
        let mut bound = BTreeSet::new();
        for (_, v) in &prefix {
            if !bound.insert(v.clone()) {
                return Err(Error::DuplicatePrefixVariable(v.to_string()));
            }
        }
        if let Some(free) = matrix.vars().difference(&bound).next() {
            return Err(Error::FreeVariable(free.to_string()));
        }
        Ok(Qbf { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Quantifier, Var)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    pub fn num_vars(&self) -> usize {
        self.prefix.len()
    }

    /// Variables bound by `q`, outermost first.
    pub fn block(&self, q: Quantifier) -> Vec<Var> {
        self.prefix
            .iter()
            .filter(|(k, _)| *k == q)
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// The prefix has the form `outer* inner*`.
    pub fn has_shape(&self, outer: Quantifier, inner: Quantifier) -> bool {
        let first_inner = self
            .prefix
            .iter()
            .position(|(q, _)| *q == inner)
            .unwrap_or(self.prefix.len());
        self.prefix[first_inner..].iter().all(|(q, _)| *q == inner)
            && self.prefix[..first_inner].iter().all(|(q, _)| *q == outer)
    }

    /// Compact prefix signature such as `EEA`.
    pub fn shape(&self) -> String {
        self.prefix
            .iter()
            .map(|(q, _)| match q {
                Quantifier::Exists => 'E',
                Quantifier::Forall => 'A',
            })
            .collect()
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            write!(f, "{}{} ", q.symbol(), v)?;
        }
        write!(f, ". {}", self.matrix)
    }
}

impl fmt::Debug for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Qbf({self})")
    }
}

/// Decides validity by expanding the outermost quantifier on the
/// substituted matrices: `∃x.Q.F` is valid iff `Q.F|x=true` or `Q.F|x=false` is.
pub fn qbf_valid(q: &Qbf) -> Result<bool> {
    Error::cap("QBF expansion", QBF_CAP, q.num_vars())?;
    expand(q.prefix(), q.matrix())
}

fn expand(prefix: &[(Quantifier, Var)], matrix: &Formula) -> Result<bool> {
    let Some(((quant, x), rest)) = prefix.split_first() else {
        return matrix.evaluate(&Assignment::new());
    };
    let pos = expand(rest, &matrix.substitute(x, true))?;
    match (quant, pos) {
        (Quantifier::Exists, true) => Ok(true),
        (Quantifier::Forall, false) => Ok(false),
        _ => expand(rest, &matrix.substitute(x, false)),
    }
}

/// Second, independent validity oracle: evaluates the matrix on every row of
/// the full truth table, then folds the rows pairwise from the innermost
/// quantifier outwards.
pub fn truth_table_valid(q: &Qbf) -> Result<bool> {
    Error::cap("truth-table expansion", QBF_CAP, q.num_vars())?;
    let vars: Vec<&Var> = q.prefix().iter().map(|(_, v)| v).collect();
    let n = vars.len();
    // row r: prefix variable i takes bit (n - 1 - i) of r, so the innermost
    // variable is the lowest bit and adjacent rows differ only in it
    let mut rows = (0..1usize << n)
        .map(|r| {
            let a: Assignment = vars
                .iter()
                .enumerate()
                .map(|(i, v)| ((*v).clone(), (r >> (n - 1 - i)) & 1 == 1))
                .collect();
            q.matrix().evaluate(&a)
        })
        .collect::<Result<Vec<bool>>>()?;
    for (quant, _) in q.prefix().iter().rev() {
        rows = rows
            .chunks(2)
            .map(|pair| match quant {
                Quantifier::Exists => pair[0] || pair[1],
                Quantifier::Forall => pair[0] && pair[1],
            })
            .collect();
    }
    Ok(rows[0])
}
