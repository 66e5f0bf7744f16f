//! Propositional abduction: explanation existence for `⟨H, M, T⟩`, the
//! base reduction from `∀Y.F`, and the existential raise that merges the
//! instances for `F|x=true` and `F|x=false`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::format::{content_lines, keyed, syntax};
use crate::logic::{
    parse_formula_at, parse_names_at, serialize_formula, Formula, Qbf, Quantifier, TruthTable,
    Universe, Var, ENTAILMENT_CAP,
};

/// Largest hypothesis set `enumerate_explanations` will expand.
pub const HYPOTHESIS_CAP: usize = 14;

/// Name of the manifestation introduced by the base reduction.
pub const BASE_MANIFESTATION: &str = "a";

#[derive(Clone, PartialEq, Eq)]
pub struct AbductionInstance {
    hypotheses: BTreeSet<Var>,
    manifestations: BTreeSet<Var>,
    theory: Vec<Formula>,
}

/// A set of hypotheses that is consistent with the theory and, together
/// with it, entails every manifestation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Explanation(pub BTreeSet<Var>);

impl Explanation {
    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains(v)
    }
}

impl AbductionInstance {
    pub fn new(
        hypotheses: BTreeSet<Var>,
        manifestations: BTreeSet<Var>,
        theory: Vec<Formula>,
    ) -> Result<AbductionInstance> {
        if let Some(v) = hypotheses.intersection(&manifestations).next() {
            return Err(Error::Contract(format!(
                "{v} is both a hypothesis and a manifestation"
            )));
        }
        Ok(AbductionInstance {
            hypotheses,
            manifestations,
            theory,
        })
    }

    pub fn hypotheses(&self) -> &BTreeSet<Var> {
        &self.hypotheses
    }

    pub fn manifestations(&self) -> &BTreeSet<Var> {
        &self.manifestations
    }

    pub fn theory(&self) -> &[Formula] {
        &self.theory
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self
            .hypotheses
            .union(&self.manifestations)
            .cloned()
            .collect();
        for f in &self.theory {
            f.collect_vars(&mut out);
        }
        out
    }

    /// Total node count of the theory.
    pub fn theory_size(&self) -> usize {
        self.theory.iter().map(Formula::size).sum()
    }

    pub fn parse(text: &str) -> Result<AbductionInstance> {
        let mut h = BTreeSet::new();
        let mut m = BTreeSet::new();
        let mut t = Vec::new();
        for (line_no, line) in content_lines(text) {
            if let Some((rest, col)) = keyed(line, "H") {
                h.extend(parse_names_at(rest, line_no, col, true)?);
            } else if let Some((rest, col)) = keyed(line, "M") {
                m.extend(parse_names_at(rest, line_no, col, true)?);
            } else if let Some((rest, col)) = keyed(line, "T") {
                t.push(parse_formula_at(rest, line_no, col, true)?);
            } else {
                return Err(syntax(line_no, 1, "expected `H:`, `M:` or `T:`"));
            }
        }
        AbductionInstance::new(h, m, t)
    }

    pub fn to_text(&self) -> String {
        let names = |set: &BTreeSet<Var>| set.iter().map(|v| format!(" {v}")).collect::<String>();
        let mut out = format!(
            "H:{}\nM:{}\n",
            names(&self.hypotheses),
            names(&self.manifestations)
        );
        for f in &self.theory {
            out.push_str("T: ");
            out.push_str(&serialize_formula(f));
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for AbductionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "⟨H={:?}, M={:?}, T={:?}⟩",
            self.hypotheses, self.manifestations, self.theory
        )
    }
}

/// Theory compiled once over the instance universe.
struct Checker {
    theory: TruthTable,
    hypotheses: Vec<(Var, TruthTable)>,
    manifest: TruthTable,
}

impl Checker {
    fn new(i: &AbductionInstance) -> Result<Checker> {
        let universe = Universe::new(i.vars());
        universe.check_cap(ENTAILMENT_CAP, "abduction universe")?;
        let n = universe.len();
        let mut theory = TruthTable::constant(n, true);
        for f in &i.theory {
            theory.and_assign(&universe.table(f)?);
        }
        let lit = |v: &Var| TruthTable::variable(n, universe.position(v).expect("in universe"));
        let mut manifest = TruthTable::constant(n, true);
        for m in &i.manifestations {
            manifest.and_assign(&lit(m));
        }
        Ok(Checker {
            theory,
            hypotheses: i.hypotheses.iter().map(|h| (h.clone(), lit(h))).collect(),
            manifest,
        })
    }

    /// `mask` selects hypotheses by position in `self.hypotheses`.
    fn explains(&self, mask: u64) -> bool {
        let mut models = self.theory.clone();
        for (i, (_, t)) in self.hypotheses.iter().enumerate() {
            if mask >> i & 1 == 1 {
                models.and_assign(t);
            }
        }
        !models.is_empty() && models.is_subset(&self.manifest)
    }

    fn explanation(&self, mask: u64) -> Explanation {
        Explanation(
            self.hypotheses
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, (v, _))| v.clone())
                .collect(),
        )
    }
}

/// `s ∪ T` is consistent and entails every manifestation.
pub fn is_explanation(i: &AbductionInstance, s: &BTreeSet<Var>) -> Result<bool> {
    if let Some(v) = s.difference(&i.hypotheses).next() {
        return Err(Error::Contract(format!("{v} is not a hypothesis")));
    }
    let checker = Checker::new(i)?;
    let mask = checker
        .hypotheses
        .iter()
        .enumerate()
        .filter(|(_, (h, _))| s.contains(h))
        .fold(0u64, |m, (idx, _)| m | 1 << idx);
    Ok(checker.explains(mask))
}

fn subsets(i: &AbductionInstance) -> Result<(Checker, u64)> {
    Error::cap(
        "explanation enumeration",
        HYPOTHESIS_CAP,
        i.hypotheses.len(),
    )?;
    Ok((Checker::new(i)?, 1u64 << i.hypotheses.len()))
}

/// All explanations, by brute force over the subsets of `H`.
pub fn enumerate_explanations(i: &AbductionInstance) -> Result<BTreeSet<Explanation>> {
    let (checker, count) = subsets(i)?;
    Ok((0..count)
        .filter(|&mask| checker.explains(mask))
        .map(|mask| checker.explanation(mask))
        .collect())
}

pub fn has_explanation(i: &AbductionInstance) -> Result<bool> {
    let (checker, count) = subsets(i)?;
    Ok((0..count).any(|mask| checker.explains(mask)))
}

/// `⟨H, M, T|x=value⟩`.
pub fn substitute_theory(i: &AbductionInstance, x: &Var, value: bool) -> AbductionInstance {
    AbductionInstance {
        hypotheses: i.hypotheses.clone(),
        manifestations: i.manifestations.clone(),
        theory: i.theory.iter().map(|f| f.substitute(x, value)).collect(),
    }
}

fn base_instance(matrix: &Formula) -> Result<AbductionInstance> {
    let a = Var::new(BASE_MANIFESTATION)?;
    if matrix.mentions(&a) {
        return Err(Error::NameCollision(a.to_string()));
    }
    let clause = Formula::or(Formula::not(matrix.clone()), Formula::var(&a));
    AbductionInstance::new(BTreeSet::new(), BTreeSet::from([a]), vec![clause])
}

/// `⟨∅, {a}, {¬matrix ∨ a}⟩`, which has an explanation iff
/// `∀universal_vars. matrix` is valid.
pub fn base_reduction(matrix: &Formula, universal_vars: &[Var]) -> Result<AbductionInstance> {
    if let Some(v) = matrix.vars().iter().find(|v| !universal_vars.contains(v)) {
        return Err(Error::FreeVariable(v.to_string()));
    }
    if universal_vars
        .iter()
        .any(|v| v.name() == BASE_MANIFESTATION)
    {
        return Err(Error::NameCollision(BASE_MANIFESTATION.into()));
    }
    base_instance(matrix)
}

/// Merges the instances for `T|x=true` and `T|x=false` into one whose
/// explanations are those of the first tagged with `x+` and those of the
/// second tagged with `x-`. `k` numbers the fresh manifestation `_q<k>`.
pub fn raise_existential(i: &AbductionInstance, x: &Var, k: usize) -> Result<AbductionInstance> {
    if i.hypotheses.contains(x) || i.manifestations.contains(x) {
        return Err(Error::Contract(format!(
            "{x} occurs among the hypotheses or manifestations"
        )));
    }
    let pos = x.suffixed("+");
    let neg = x.suffixed("-");
    let q = Var::gadget('q', k);
    let used = i.vars();
    for fresh in [&pos, &neg, &q] {
        if used.contains(fresh) {
            return Err(Error::NameCollision(fresh.to_string()));
        }
    }
    let (fp, fn_, fq, fx) = (
        Formula::var(&pos),
        Formula::var(&neg),
        Formula::var(&q),
        Formula::var(x),
    );
    let mut theory = i.theory.clone();
    theory.extend([
        Formula::implies(fp.clone(), fq.clone()),
        Formula::implies(fn_.clone(), fq),
        Formula::implies(fp.clone(), fx.clone()),
        Formula::implies(fn_.clone(), Formula::not(fx)),
        Formula::or(Formula::not(fp), Formula::not(fn_)),
    ]);
    let mut hypotheses = i.hypotheses.clone();
    hypotheses.extend([pos, neg]);
    let mut manifestations = i.manifestations.clone();
    manifestations.insert(q);
    AbductionInstance::new(hypotheses, manifestations, theory)
}

/// Reduces an `∃X∀Y.F` formula: base reduction on the matrix, then one
/// existential raise per variable of `X`, innermost first.
pub fn reduce_qbf(q: &Qbf) -> Result<AbductionInstance> {
    if !q.has_shape(Quantifier::Exists, Quantifier::Forall) {
        return Err(Error::UnsupportedShape(format!(
            "abduction needs an ∃*∀* prefix, got {}",
            q.shape()
        )));
    }
    if q.prefix()
        .iter()
        .any(|(_, v)| v.name() == BASE_MANIFESTATION)
    {
        return Err(Error::NameCollision(BASE_MANIFESTATION.into()));
    }
    let mut instance = base_instance(q.matrix())?;
    for (k, x) in q.block(Quantifier::Exists).iter().rev().enumerate() {
        instance = raise_existential(&instance, x, k + 1)?;
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, parse_qbf, qbf_valid};

    fn v(n: &str) -> Var {
        Var::new(n).unwrap()
    }

    fn set(names: &[&str]) -> BTreeSet<Var> {
        names.iter().map(|n| v(n)).collect()
    }

    fn inst(h: &[&str], m: &[&str], t: &[&str]) -> AbductionInstance {
        AbductionInstance::new(
            set(h),
            set(m),
            t.iter().map(|f| parse_formula(f).unwrap()).collect(),
        )
        .unwrap()
    }

    fn expl(sets: &[&[&str]]) -> BTreeSet<Explanation> {
        sets.iter().map(|s| Explanation(set(s))).collect()
    }

    #[test]
    fn is_explanation_examples() {
        let valid = inst(&[], &["a"], &["!(y | !y) | a"]);
        assert!(is_explanation(&valid, &set(&[])).unwrap());
        let invalid = inst(&[], &["a"], &["!y | a"]);
        assert!(!is_explanation(&invalid, &set(&[])).unwrap());
        let inconsistent = inst(&["h"], &["a"], &["h -> a", "!h"]);
        assert!(!is_explanation(&inconsistent, &set(&["h"])).unwrap());
    }

    #[test]
    fn is_explanation_rejects_foreign_hypothesis() {
        let i = inst(&["h"], &["a"], &["h -> a"]);
        assert!(matches!(
            is_explanation(&i, &set(&["g"])),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn enumeration_examples() {
        let a = inst(&[], &["a"], &["a"]);
        assert_eq!(enumerate_explanations(&a).unwrap(), expl(&[&[]]));
        assert!(has_explanation(&a).unwrap());
        let b = inst(&["h"], &["a"], &["h -> a"]);
        assert_eq!(enumerate_explanations(&b).unwrap(), expl(&[&["h"]]));
        assert!(has_explanation(&b).unwrap());
        let c = inst(&[], &["a"], &["!a"]);
        assert!(enumerate_explanations(&c).unwrap().is_empty());
        assert!(!has_explanation(&c).unwrap());
    }

    #[test]
    fn hypothesis_cap() {
        let h: Vec<String> = (0..=HYPOTHESIS_CAP).map(|i| format!("h{i}")).collect();
        let h: Vec<&str> = h.iter().map(String::as_str).collect();
        let i = inst(&h, &["a"], &["a"]);
        assert!(enumerate_explanations(&i).unwrap_err().is_resource());
        assert!(has_explanation(&i).unwrap_err().is_resource());
    }

    #[test]
    fn overlapping_h_and_m_rejected() {
        assert!(AbductionInstance::new(set(&["a"]), set(&["a"]), vec![]).is_err());
    }

    #[test]
    fn base_reduction_examples() {
        let y = v("y");
        let taut =
            base_reduction(&parse_formula("y | !y").unwrap(), std::slice::from_ref(&y)).unwrap();
        assert_eq!(taut, inst(&[], &["a"], &["!(y | !y) | a"]));
        assert!(has_explanation(&taut).unwrap());
        let just_y =
            base_reduction(&parse_formula("y").unwrap(), std::slice::from_ref(&y)).unwrap();
        assert!(!has_explanation(&just_y).unwrap());
        let falsum = base_reduction(&Formula::f(), &[]).unwrap();
        assert!(!has_explanation(&falsum).unwrap());
    }

    #[test]
    fn base_reduction_collisions() {
        let a = v("a");
        assert_eq!(
            base_reduction(&Formula::var(&a), std::slice::from_ref(&a)).unwrap_err(),
            Error::NameCollision("a".into())
        );
        assert!(matches!(
            base_reduction(&parse_formula("z").unwrap(), &[]),
            Err(Error::FreeVariable(_))
        ));
    }

    #[test]
    fn raise_shape() {
        let base = inst(&[], &["a"], &["!x | a"]);
        let raised = raise_existential(&base, &v("x"), 1).unwrap();
        assert_eq!(raised.hypotheses(), &set(&["x+", "x-"]));
        assert_eq!(raised.manifestations(), &set(&["a", "_q1"]));
        assert_eq!(raised.theory().len(), 6);
        assert_eq!(
            raised.theory()[1..]
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>(),
            ["x+ -> _q1", "x- -> _q1", "x+ -> x", "x- -> !x", "!x+ | !x-"]
        );
    }

    #[test]
    fn raise_explanations() {
        // brute force: with x- the clause !x | a holds without a, so only x+ explains
        let base = inst(&[], &["a"], &["!x | a"]);
        let raised = raise_existential(&base, &v("x"), 1).unwrap();
        assert_eq!(enumerate_explanations(&raised).unwrap(), expl(&[&["x+"]]));
        let trivially = raise_existential(&inst(&[], &["a"], &["a"]), &v("x"), 1).unwrap();
        assert_eq!(
            enumerate_explanations(&trivially).unwrap(),
            expl(&[&["x+"], &["x-"]])
        );
    }

    #[test]
    fn raise_freshness() {
        let base = inst(&["x"], &["a"], &["x | a"]);
        assert!(matches!(
            raise_existential(&base, &v("x"), 1),
            Err(Error::Contract(_))
        ));
        let clash = inst(&[], &["a"], &["x+ | a"]);
        assert_eq!(
            raise_existential(&clash, &v("x"), 1).unwrap_err(),
            Error::NameCollision("x+".into())
        );
        let q_clash = raise_existential(&inst(&[], &["a"], &["a"]), &v("x"), 1).unwrap();
        assert_eq!(
            raise_existential(&q_clash, &v("y"), 1).unwrap_err(),
            Error::NameCollision("_q1".into())
        );
    }

    #[test]
    fn reduce_examples() {
        for (text, expected) in [
            ("exists x; forall y; : x | y", true),
            ("forall y; : y", false),
            ("exists x; : x <-> x", true),
            ("exists x; forall y; : x <-> y", false),
        ] {
            let q = parse_qbf(text).unwrap();
            assert_eq!(qbf_valid(&q).unwrap(), expected);
            assert_eq!(
                has_explanation(&reduce_qbf(&q).unwrap()).unwrap(),
                expected,
                "{text}"
            );
        }
    }

    #[test]
    fn reduce_rejects_other_shapes() {
        let q = parse_qbf("forall y; exists x; : x | y").unwrap();
        assert!(matches!(reduce_qbf(&q), Err(Error::UnsupportedShape(_))));
        let q = parse_qbf("exists a; : a").unwrap();
        assert_eq!(
            reduce_qbf(&q).unwrap_err(),
            Error::NameCollision("a".into())
        );
    }

    #[test]
    fn text_round_trip() {
        let q = parse_qbf("exists x z; forall y; : (x | y) & !z").unwrap();
        let i = reduce_qbf(&q).unwrap();
        let text = i.to_text();
        assert_eq!(AbductionInstance::parse(&text).unwrap(), i);
        assert!(text.starts_with("H: x+ x- z+ z-\nM: _q1 _q2 a\nT: "));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            AbductionInstance::parse("H: h\nX: nope\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
        match AbductionInstance::parse("H: h\nT: h &\n") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("{other:?}"),
        }
    }
}
