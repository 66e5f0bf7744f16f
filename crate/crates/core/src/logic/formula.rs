use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::var::Var;
use crate::error::{Error, Result};

/// Propositional formula. The tree is kept exactly as built: nothing here
/// simplifies, so `substitute` leaves `!true` and friends in place.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Var(Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn t() -> Formula {
        Formula::Const(true)
    }

    pub fn f() -> Formula {
        Formula::Const(false)
    }

    pub fn var(v: &Var) -> Formula {
        Formula::Var(v.clone())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Positive or negative literal.
    pub fn literal(v: &Var, positive: bool) -> Formula {
        if positive {
            Formula::var(v)
        } else {
            Formula::not(Formula::var(v))
        }
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Const(true))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Const(_) => {}
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Not(a) => a.collect_vars(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Formula::Const(_) => false,
            Formula::Var(w) => w == v,
            Formula::Not(a) => a.mentions(v),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.mentions(v) || b.mentions(v),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of leaves (variable and constant occurrences).
    pub fn leaf_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 1,
            Formula::Not(a) => a.leaf_count(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 0,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Replaces every occurrence of `x` with the constant `value`.
    pub fn substitute(&self, x: &Var, value: bool) -> Formula {
        self.map_vars(&|v| (v == x).then_some(Formula::Const(value)))
    }

    /// Replaces each variable for which `f` returns `Some`.
    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Option<Formula>) -> Formula {
        let bin = |a: &Formula, b: &Formula| (Box::new(a.map_vars(f)), Box::new(b.map_vars(f)));
        match self {
            Formula::Const(c) => Formula::Const(*c),
            Formula::Var(v) => f(v).unwrap_or_else(|| Formula::Var(v.clone())),
            Formula::Not(a) => Formula::Not(Box::new(a.map_vars(f))),
            Formula::And(a, b) => {
                let (a, b) = bin(a, b);
                Formula::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = bin(a, b);
                Formula::Or(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = bin(a, b);
                Formula::Implies(a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = bin(a, b);
                Formula::Iff(a, b)
            }
        }
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        Ok(match self {
            Formula::Const(c) => *c,
            Formula::Var(v) => assignment
                .get(v)
                .ok_or_else(|| Error::UnboundVariable(v.to_string()))?,
            Formula::Not(a) => !a.evaluate(assignment)?,
            Formula::And(a, b) => a.evaluate(assignment)? & b.evaluate(assignment)?,
            Formula::Or(a, b) => a.evaluate(assignment)? | b.evaluate(assignment)?,
            Formula::Implies(a, b) => !a.evaluate(assignment)? | b.evaluate(assignment)?,
            Formula::Iff(a, b) => a.evaluate(assignment)? == b.evaluate(assignment)?,
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::parse::serialize_formula(self))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

/// Total map from a declared universe of variables to truth values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values.insert(v, value);
    }

    pub fn with(mut self, v: &Var, value: bool) -> Assignment {
        self.set(v.clone(), value);
        self
    }

    pub fn get(&self, v: &Var) -> Option<bool> {
        self.values.get(v).copied()
    }

    pub fn universe(&self) -> impl Iterator<Item = &Var> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, bool)> {
        self.values.iter().map(|(v, b)| (v, *b))
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}
