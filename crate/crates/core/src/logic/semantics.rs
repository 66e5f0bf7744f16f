//! Brute-force semantics over an explicit variable universe.
//!
//! A formula over `n` variables is compiled to its truth table: a bitset
//! with one bit per assignment, where bit `j` describes the assignment that
//! gives variable `i` the value `(j >> i) & 1`. Consistency and entailment
//! then reduce to word-wise bit operations.

use std::collections::{BTreeSet, HashMap};

use super::formula::Formula;
use super::var::Var;
use crate::error::{Error, Result};

/// Largest variable count for consistency and entailment checks.
pub const ENTAILMENT_CAP: usize = 22;

/// Ordered set of variables; position `i` is bit `i` of an assignment index.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
}

impl Universe {
    pub fn new<I: IntoIterator<Item = Var>>(vars: I) -> Universe {
        let mut u = Universe::default();
        for v in vars {
            u.insert(v);
        }
        u
    }

    pub fn of_formulas<'a, I: IntoIterator<Item = &'a Formula>>(fs: I) -> Universe {
        let mut set = BTreeSet::new();
        for f in fs {
            f.collect_vars(&mut set);
        }
        Universe::new(set)
    }

    pub fn insert(&mut self, v: Var) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        self.vars.push(v.clone());
        self.index.insert(v, self.vars.len() - 1);
        self.vars.len() - 1
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn position(&self, v: &Var) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn check_cap(&self, limit: usize, what: &'static str) -> Result<()> {
        Error::cap(what, limit, self.len())
    }

    pub fn table(&self, f: &Formula) -> Result<TruthTable> {
        TruthTable::compile(f, self)
    }
}

const VAR_WORDS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Set of models of a formula over a fixed universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    nvars: usize,
    words: Vec<u64>,
}

impl TruthTable {
    fn word_count(nvars: usize) -> usize {
        if nvars <= 6 {
            1
        } else {
            1 << (nvars - 6)
        }
    }

    fn tail_mask(nvars: usize) -> u64 {
        if nvars >= 6 {
            u64::MAX
        } else {
            (1u64 << (1 << nvars)) - 1
        }
    }

    pub fn constant(nvars: usize, value: bool) -> TruthTable {
        let fill = if value { Self::tail_mask(nvars) } else { 0 };
        TruthTable {
            nvars,
            words: vec![fill; Self::word_count(nvars)],
        }
    }

    /// Models of the positive literal at universe position `i`.
    pub fn variable(nvars: usize, i: usize) -> TruthTable {
        debug_assert!(i < nvars);
        let mask = Self::tail_mask(nvars);
        let words = (0..Self::word_count(nvars))
            .map(|w| {
                if i < 6 {
                    VAR_WORDS[i] & mask
                } else if (w >> (i - 6)) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                }
            })
            .collect();
        TruthTable { nvars, words }
    }

    pub fn compile(f: &Formula, universe: &Universe) -> Result<TruthTable> {
        let n = universe.len();
        Ok(match f {
            Formula::Const(c) => TruthTable::constant(n, *c),
            Formula::Var(v) => {
                let i = universe
                    .position(v)
                    .ok_or_else(|| Error::UnboundVariable(v.to_string()))?;
                TruthTable::variable(n, i)
            }
            Formula::Not(a) => TruthTable::compile(a, universe)?.not(),
            Formula::And(a, b) => {
                let mut t = TruthTable::compile(a, universe)?;
                t.and_assign(&TruthTable::compile(b, universe)?);
                t
            }
            Formula::Or(a, b) => {
                let mut t = TruthTable::compile(a, universe)?;
                t.or_assign(&TruthTable::compile(b, universe)?);
                t
            }
            Formula::Implies(a, b) => {
                let mut t = TruthTable::compile(a, universe)?.not();
                t.or_assign(&TruthTable::compile(b, universe)?);
                t
            }
            Formula::Iff(a, b) => {
                let mut t = TruthTable::compile(a, universe)?;
                let u = TruthTable::compile(b, universe)?;
                let mask = Self::tail_mask(n);
                for (x, y) in t.words.iter_mut().zip(&u.words) {
                    *x = !(*x ^ y) & mask;
                }
                t
            }
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(mut self) -> TruthTable {
        let mask = Self::tail_mask(self.nvars);
        for w in &mut self.words {
            *w = !*w & mask;
        }
        self
    }

    pub fn and_assign(&mut self, other: &TruthTable) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (x, y) in self.words.iter_mut().zip(&other.words) {
            *x &= y;
        }
    }

    pub fn or_assign(&mut self, other: &TruthTable) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (x, y) in self.words.iter_mut().zip(&other.words) {
            *x |= y;
        }
    }

    pub fn and(&self, other: &TruthTable) -> TruthTable {
        let mut t = self.clone();
        t.and_assign(other);
        t
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Every model of `self` is a model of `other`.
    pub fn is_subset(&self, other: &TruthTable) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(x, y)| x & !y == 0)
    }

    /// `self ∩ other` is nonempty.
    pub fn intersects(&self, other: &TruthTable) -> bool {
        self.words.iter().zip(&other.words).any(|(x, y)| x & y != 0)
    }

    pub fn get(&self, index: usize) -> bool {
        (self.words[index >> 6] >> (index & 63)) & 1 == 1
    }

    pub fn count_models(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Some assignment over `vars(fs)` satisfies every member of `fs`.
pub fn consistent(fs: &[Formula]) -> Result<bool> {
    let universe = Universe::of_formulas(fs);
    universe.check_cap(ENTAILMENT_CAP, "consistency check")?;
    let mut acc = TruthTable::constant(universe.len(), true);
    for f in fs {
        acc.and_assign(&universe.table(f)?);
    }
    Ok(!acc.is_empty())
}

/// Every assignment satisfying all of `fs` satisfies `goal`.
pub fn entails(fs: &[Formula], goal: &Formula) -> Result<bool> {
    let universe = Universe::of_formulas(fs.iter().chain(std::iter::once(goal)));
    universe.check_cap(ENTAILMENT_CAP, "entailment check")?;
    let mut acc = TruthTable::constant(universe.len(), true);
    for f in fs {
        acc.and_assign(&universe.table(f)?);
    }
    Ok(acc.is_subset(&universe.table(goal)?))
}

/// Logical equivalence of two formulas.
pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool> {
    let universe = Universe::of_formulas([a, b]);
    universe.check_cap(ENTAILMENT_CAP, "equivalence check")?;
    Ok(universe.table(a)? == universe.table(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Assignment};
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn consistency_examples() {
        assert!(!consistent(&[p("x"), p("!x")]).unwrap());
        assert!(consistent(&[]).unwrap());
        // ¬E ∨ a with E = y; by enumeration {y=0,a=*} and {y=1,a=1} satisfy it
        assert!(consistent(&[p("!y | a")]).unwrap());
    }

    #[test]
    fn entailment_examples() {
        assert!(entails(&[p("a")], &p("a")).unwrap());
        assert!(!entails(&[], &p("a")).unwrap());
        assert!(entails(&[p("!(y | !y) | a")], &p("a")).unwrap());
        assert!(!entails(&[p("!y | a")], &p("a")).unwrap());
    }

    #[test]
    fn cap_is_reported() {
        let big = Formula::conjunction(
            (0..=ENTAILMENT_CAP).map(|i| Formula::var(&Var::new(&format!("v{i}")).unwrap())),
        );
        assert!(matches!(
            consistent(std::slice::from_ref(&big)),
            Err(Error::CapExceeded {
                limit: ENTAILMENT_CAP,
                ..
            })
        ));
        assert!(entails(&[], &big).unwrap_err().is_resource());
    }

    #[test]
    fn table_matches_evaluate_for_wide_universe() {
        let vars: Vec<Var> = (0..8)
            .map(|i| Var::new(&format!("v{i}")).unwrap())
            .collect();
        let f = p("(v0 & !v7) | (v6 <-> v3) -> v1");
        let u = Universe::new(vars.clone());
        let t = u.table(&f).unwrap();
        for j in 0..256usize {
            let a: Assignment = vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), (j >> i) & 1 == 1))
                .collect();
            assert_eq!(t.get(j), f.evaluate(&a).unwrap(), "row {j}");
        }
        assert_eq!(TruthTable::constant(3, true).count_models(), 8);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            any::<bool>().prop_map(Formula::Const),
            (0..4usize).prop_map(|i| Formula::var(&Var::new(&format!("v{i}")).unwrap())),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn entails_iff_negation_inconsistent(
            fs in prop::collection::vec(arb_formula(), 0..4),
            g in arb_formula(),
        ) {
            let mut with_neg = fs.clone();
            with_neg.push(Formula::not(g.clone()));
            prop_assert_eq!(entails(&fs, &g).unwrap(), !consistent(&with_neg).unwrap());
        }

        #[test]
        fn substitution_removes_variable(f in arb_formula(), i in 0..4usize, value: bool) {
            let x = Var::new(&format!("v{i}")).unwrap();
            let g = f.substitute(&x, value);
            let mut rest = f.vars();
            rest.remove(&x);
            prop_assert!(!g.vars().contains(&x));
            prop_assert!(g.vars().is_subset(&rest));
        }

        #[test]
        fn formula_round_trip(f in arb_formula()) {
            let text = crate::logic::serialize_formula(&f);
            prop_assert_eq!(parse_formula(&text).unwrap(), f);
        }
    }
}
