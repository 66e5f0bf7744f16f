//! Reiter default logic: extensions by generate-and-verify, skeptical
//! entailment, the base reduction from `∃Y.E`, and the universal raise that
//! merges the theories for `D|x=true` and `D|x=false`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::format::{content_lines, keyed, syntax};
use crate::logic::{
    parse_formula_at, parse_names_at, serialize_formula, Formula, Qbf, Quantifier, TruthTable,
    Universe, Var, ENTAILMENT_CAP,
};

/// Largest default set `extensions` will enumerate subsets of.
pub const DEFAULTS_CAP: usize = 12;

/// Name of the query variable introduced by the base reduction.
pub const BASE_QUERY: &str = "a";

/// `prerequisite : justification / consequence`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DefaultRule {
    pub prerequisite: Formula,
    pub justification: Formula,
    pub consequence: Formula,
}

impl DefaultRule {
    pub fn new(prerequisite: Formula, justification: Formula, consequence: Formula) -> DefaultRule {
        DefaultRule {
            prerequisite,
            justification,
            consequence,
        }
    }

    /// `:f / f`
    pub fn normal(f: Formula) -> DefaultRule {
        DefaultRule::new(Formula::t(), f.clone(), f)
    }

    pub fn size(&self) -> usize {
        self.prerequisite.size() + self.justification.size() + self.consequence.size()
    }

    fn substitute(&self, x: &Var, value: bool) -> DefaultRule {
        DefaultRule::new(
            self.prerequisite.substitute(x, value),
            self.justification.substitute(x, value),
            self.consequence.substitute(x, value),
        )
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.prerequisite.collect_vars(out);
        self.justification.collect_vars(out);
        self.consequence.collect_vars(out);
    }
}

impl fmt::Display for DefaultRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prerequisite != Formula::t() {
            write!(f, "{} ", self.prerequisite)?;
        }
        write!(f, ": {} / {}", self.justification, self.consequence)
    }
}

impl fmt::Debug for DefaultRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct DefaultTheory {
    defaults: Vec<DefaultRule>,
    background: Vec<Formula>,
}

/// An extension, identified by its generating defaults. The extension itself
/// is the deductive closure of `consequences`, never materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionDescriptor {
    pub generating: Vec<usize>,
    pub consequences: Vec<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkepticalAnswer {
    pub entailed: bool,
    /// No extension exists, so `entailed` holds vacuously.
    pub vacuous: bool,
    pub extensions: usize,
}

impl DefaultTheory {
    pub fn new(defaults: Vec<DefaultRule>, background: Vec<Formula>) -> DefaultTheory {
        DefaultTheory {
            defaults,
            background,
        }
    }

    pub fn defaults(&self) -> &[DefaultRule] {
        &self.defaults
    }

    pub fn background(&self) -> &[Formula] {
        &self.background
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for d in &self.defaults {
            d.collect_vars(&mut out);
        }
        for w in &self.background {
            w.collect_vars(&mut out);
        }
        out
    }

    /// Total node count over every default component and background formula.
    pub fn size(&self) -> usize {
        self.defaults.iter().map(DefaultRule::size).sum::<usize>()
            + self.background.iter().map(Formula::size).sum::<usize>()
    }

    /// `t|x=value`, applied to all three components of every default.
    pub fn substitute(&self, x: &Var, value: bool) -> DefaultTheory {
        DefaultTheory {
            defaults: self
                .defaults
                .iter()
                .map(|d| d.substitute(x, value))
                .collect(),
            background: self
                .background
                .iter()
                .map(|w| w.substitute(x, value))
                .collect(),
        }
    }

    /// Reads a theory file; the query line is optional.
    pub fn parse(text: &str) -> Result<(DefaultTheory, Option<Var>)> {
        let mut theory = DefaultTheory::default();
        let mut query = None;
        for (line_no, line) in content_lines(text) {
            if line.contains('/') {
                theory.defaults.push(parse_default(line, line_no)?);
            } else if let Some((rest, col)) = keyed(line, "W") {
                theory
                    .background
                    .push(parse_formula_at(rest, line_no, col, true)?);
            } else if let Some((rest, col)) = keyed(line, "query") {
                let names = parse_names_at(rest, line_no, col, true)?;
                if names.len() != 1 || query.is_some() {
                    return Err(syntax(line_no, col, "expected exactly one query variable"));
                }
                query = names.into_iter().next();
            } else {
                return Err(syntax(
                    line_no,
                    1,
                    "expected a default `alpha : beta / gamma`, `W:` or `query:`",
                ));
            }
        }
        Ok((theory, query))
    }

    pub fn to_text(&self, query: Option<&Var>) -> String {
        let mut out = String::new();
        for d in &self.defaults {
            out.push_str(&d.to_string());
            out.push('\n');
        }
        for w in &self.background {
            out.push_str("W: ");
            out.push_str(&serialize_formula(w));
            out.push('\n');
        }
        if let Some(q) = query {
            out.push_str(&format!("query: {q}\n"));
        }
        out
    }
}

fn parse_default(line: &str, line_no: usize) -> Result<DefaultRule> {
    let colon = line
        .find(':')
        .ok_or_else(|| syntax(line_no, 1, "default is missing `:`"))?;
    let slash = line[colon..]
        .find('/')
        .map(|i| colon + i)
        .ok_or_else(|| syntax(line_no, colon + 1, "default is missing `/`"))?;
    let (alpha, beta, gamma) = (&line[..colon], &line[colon + 1..slash], &line[slash + 1..]);
    let prerequisite = if alpha.trim().is_empty() {
        Formula::t()
    } else {
        parse_formula_at(alpha, line_no, 1, true)?
    };
    Ok(DefaultRule::new(
        prerequisite,
        parse_formula_at(beta, line_no, colon + 2, true)?,
        parse_formula_at(gamma, line_no, slash + 2, true)?,
    ))
}

impl fmt::Debug for DefaultTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{:?}, {:?}⟩", self.defaults, self.background)
    }
}

struct CompiledDefault {
    prerequisite: TruthTable,
    justification: TruthTable,
    consequence: TruthTable,
}

/// Theory compiled over a universe that also covers any query formulas.
struct Compiled {
    universe: Universe,
    background: TruthTable,
    defaults: Vec<CompiledDefault>,
}

impl Compiled {
    fn new<'a>(
        t: &DefaultTheory,
        extra: impl IntoIterator<Item = &'a Formula>,
    ) -> Result<Compiled> {
        let mut vars = t.vars();
        for f in extra {
            f.collect_vars(&mut vars);
        }
        let universe = Universe::new(vars);
        universe.check_cap(ENTAILMENT_CAP, "default theory universe")?;
        let mut background = TruthTable::constant(universe.len(), true);
        for w in &t.background {
            background.and_assign(&universe.table(w)?);
        }
        let defaults = t
            .defaults
            .iter()
            .map(|d| {
                Ok(CompiledDefault {
                    prerequisite: universe.table(&d.prerequisite)?,
                    justification: universe.table(&d.justification)?,
                    consequence: universe.table(&d.consequence)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Compiled {
            universe,
            background,
            defaults,
        })
    }

    /// Models of `W ∪ {γ : δ ∈ mask}`.
    fn models(&self, mask: u64) -> TruthTable {
        let mut e = self.background.clone();
        for (i, d) in self.defaults.iter().enumerate() {
            if mask >> i & 1 == 1 {
                e.and_assign(&d.consequence);
            }
        }
        e
    }

    /// Reiter's fixpoint test: starting from `W`, repeatedly apply every
    /// default whose prerequisite follows from what has been derived so far
    /// and whose justification is consistent with the guessed extension.
    /// The guess is an extension iff exactly `mask` ends up applied.
    fn is_extension(&self, mask: u64) -> bool {
        let guess = self.models(mask);
        let mut derived = self.background.clone();
        let mut applied = 0u64;
        loop {
            let mut changed = false;
            for (i, d) in self.defaults.iter().enumerate() {
                if applied >> i & 1 == 0
                    && derived.is_subset(&d.prerequisite)
                    && guess.intersects(&d.justification)
                {
                    applied |= 1 << i;
                    derived.and_assign(&d.consequence);
                    changed = true;
                }
            }
            if !changed {
                return applied == mask;
            }
        }
    }

    fn extension_masks(&self) -> Result<Vec<u64>> {
        Error::cap("extension enumeration", DEFAULTS_CAP, self.defaults.len())?;
        Ok((0..1u64 << self.defaults.len())
            .filter(|&m| self.is_extension(m))
            .collect())
    }
}

fn indices(mask: u64, len: usize) -> Vec<usize> {
    (0..len).filter(|i| mask >> i & 1 == 1).collect()
}

fn descriptor(t: &DefaultTheory, mask: u64) -> ExtensionDescriptor {
    let generating = indices(mask, t.defaults.len());
    let consequences = t
        .background
        .iter()
        .cloned()
        .chain(
            generating
                .iter()
                .map(|&i| t.defaults[i].consequence.clone()),
        )
        .collect();
    ExtensionDescriptor {
        generating,
        consequences,
    }
}

/// Whether the defaults indexed by `generating` form the generating set of
/// an extension of `t`.
pub fn verify_extension(t: &DefaultTheory, generating: &BTreeSet<usize>) -> Result<bool> {
    let mut mask = 0u64;
    for &i in generating {
        if i >= t.defaults.len() {
            return Err(Error::Contract(format!("no default with index {i}")));
        }
        mask |= 1 << i;
    }
    Ok(Compiled::new(t, [])?.is_extension(mask))
}

pub fn extensions(t: &DefaultTheory) -> Result<Vec<ExtensionDescriptor>> {
    let compiled = Compiled::new(t, [])?;
    Ok(compiled
        .extension_masks()?
        .into_iter()
        .map(|m| descriptor(t, m))
        .collect())
}

/// `f` follows from every extension of `t`.
pub fn skeptically_entails(t: &DefaultTheory, f: &Formula) -> Result<SkepticalAnswer> {
    let compiled = Compiled::new(t, [f])?;
    let goal = compiled.universe.table(f)?;
    let masks = compiled.extension_masks()?;
    Ok(SkepticalAnswer {
        entailed: masks.iter().all(|&m| compiled.models(m).is_subset(&goal)),
        vacuous: masks.is_empty(),
        extensions: masks.len(),
    })
}

/// Two consequence sets have the same deductive closure.
pub fn same_closure(a: &[Formula], b: &[Formula]) -> Result<bool> {
    let universe = Universe::of_formulas(a.iter().chain(b));
    universe.check_cap(ENTAILMENT_CAP, "extension comparison")?;
    let closure = |fs: &[Formula]| -> Result<TruthTable> {
        let mut t = TruthTable::constant(universe.len(), true);
        for f in fs {
            t.and_assign(&universe.table(f)?);
        }
        Ok(t)
    };
    Ok(closure(a)? == closure(b)?)
}

fn base_theory(matrix: &Formula) -> Result<(DefaultTheory, Var)> {
    let a = Var::new(BASE_QUERY)?;
    if matrix.mentions(&a) {
        return Err(Error::NameCollision(a.to_string()));
    }
    let body = Formula::and(Formula::var(&a), matrix.clone());
    Ok((
        DefaultTheory::new(vec![DefaultRule::normal(body)], vec![]),
        a,
    ))
}

/// `⟨{:a∧matrix / a∧matrix}, ∅⟩` with query `a`; the query is skeptically
/// entailed iff the matrix is satisfiable.
pub fn base_reduction(matrix: &Formula, existential_vars: &[Var]) -> Result<(DefaultTheory, Var)> {
    if let Some(v) = matrix.vars().iter().find(|v| !existential_vars.contains(v)) {
        return Err(Error::FreeVariable(v.to_string()));
    }
    if existential_vars.iter().any(|v| v.name() == BASE_QUERY) {
        return Err(Error::NameCollision(BASE_QUERY.into()));
    }
    base_theory(matrix)
}

/// Merges `D|x=true` and `D|x=false`: two mutually exclusive choice
/// defaults `:x∧p / x∧p` and `:¬x∧p / ¬x∧p`, and `p` conjoined in front of
/// every existing prerequisite. `p` is `_p<k>`.
pub fn raise_universal(t: &DefaultTheory, x: &Var, k: usize) -> Result<DefaultTheory> {
    if !t.background.is_empty() {
        return Err(Error::Contract(
            "the universal raise needs an empty background theory".into(),
        ));
    }
    let p = Var::gadget('p', k);
    if &p == x || t.vars().contains(&p) {
        return Err(Error::NameCollision(p.to_string()));
    }
    let guard = |f: Formula| Formula::and(f, Formula::var(&p));
    let mut defaults = vec![
        DefaultRule::normal(guard(Formula::var(x))),
        DefaultRule::normal(guard(Formula::not(Formula::var(x)))),
    ];
    defaults.extend(t.defaults.iter().map(|d| {
        DefaultRule::new(
            Formula::and(Formula::var(&p), d.prerequisite.clone()),
            d.justification.clone(),
            d.consequence.clone(),
        )
    }));
    Ok(DefaultTheory::new(defaults, vec![]))
}

/// Reduces a `∀X∃Y.F` formula: base reduction on the matrix, then one
/// universal raise per variable of `X`, innermost first.
pub fn reduce_qbf(q: &Qbf) -> Result<(DefaultTheory, Var)> {
    if !q.has_shape(Quantifier::Forall, Quantifier::Exists) {
        return Err(Error::UnsupportedShape(format!(
            "default logic needs a ∀*∃* prefix, got {}",
            q.shape()
        )));
    }
    if q.prefix().iter().any(|(_, v)| v.name() == BASE_QUERY) {
        return Err(Error::NameCollision(BASE_QUERY.into()));
    }
    let (mut theory, query) = base_theory(q.matrix())?;
    for (k, x) in q.block(Quantifier::Forall).iter().rev().enumerate() {
        theory = raise_universal(&theory, x, k + 1)?;
    }
    Ok((theory, query))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_qbf, qbf_valid};

    fn f(s: &str) -> Formula {
        crate::logic::parse_formula_at(s, 1, 1, true).unwrap()
    }

    fn v(n: &str) -> Var {
        Var::new(n).unwrap()
    }

    fn normal_theory(bodies: &[&str]) -> DefaultTheory {
        DefaultTheory::new(
            bodies.iter().map(|b| DefaultRule::normal(f(b))).collect(),
            vec![],
        )
    }

    fn gd(ix: &[usize]) -> BTreeSet<usize> {
        ix.iter().copied().collect()
    }

    #[test]
    fn verify_examples() {
        let t = normal_theory(&["a"]);
        assert!(verify_extension(&t, &gd(&[0])).unwrap());
        assert!(!verify_extension(&t, &gd(&[])).unwrap());
        let blocked = normal_theory(&["a & (y & !y)"]);
        assert!(verify_extension(&blocked, &gd(&[])).unwrap());
        assert!(!verify_extension(&blocked, &gd(&[0])).unwrap());
        assert!(matches!(
            verify_extension(&t, &gd(&[3])),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn extension_examples() {
        let two = normal_theory(&["x & p", "!x & p"]);
        let exts = extensions(&two).unwrap();
        assert_eq!(
            exts.iter()
                .map(|e| e.generating.clone())
                .collect::<Vec<_>>(),
            vec![vec![0], vec![1]]
        );
        let empty = DefaultTheory::default();
        let exts = extensions(&empty).unwrap();
        assert_eq!(exts.len(), 1);
        assert!(exts[0].generating.is_empty());
        let one = normal_theory(&["a & y"]);
        let exts = extensions(&one).unwrap();
        assert_eq!(exts.len(), 1);
        assert!(crate::logic::entails(&exts[0].consequences, &f("a")).unwrap());
    }

    #[test]
    fn prerequisites_are_grounded() {
        // b : c / c must not fire off its own consequence chain
        let t = DefaultTheory::new(
            vec![
                DefaultRule::new(f("b"), f("c"), f("c")),
                DefaultRule::new(f("c"), f("b"), f("b")),
            ],
            vec![],
        );
        let exts = extensions(&t).unwrap();
        assert_eq!(exts.len(), 1);
        assert!(exts[0].generating.is_empty());
    }

    #[test]
    fn inconsistent_background_has_single_trivial_extension() {
        let t = DefaultTheory::new(vec![DefaultRule::normal(f("a"))], vec![f("x & !x")]);
        let exts = extensions(&t).unwrap();
        assert_eq!(exts.len(), 1);
        assert!(exts[0].generating.is_empty());
    }

    #[test]
    fn no_extension_is_flagged() {
        // :!a / a has no extension
        let t = DefaultTheory::new(
            vec![DefaultRule::new(Formula::t(), f("!a"), f("a"))],
            vec![],
        );
        let ans = skeptically_entails(&t, &f("b")).unwrap();
        assert!(ans.entailed && ans.vacuous);
        assert_eq!(ans.extensions, 0);
    }

    #[test]
    fn skeptical_examples() {
        let a = f("a");
        assert!(
            skeptically_entails(&normal_theory(&["a & (y | !y)"]), &a)
                .unwrap()
                .entailed
        );
        assert!(
            !skeptically_entails(&normal_theory(&["a & (y & !y)"]), &a)
                .unwrap()
                .entailed
        );
        let ans = skeptically_entails(&DefaultTheory::default(), &Formula::t()).unwrap();
        assert!(ans.entailed && !ans.vacuous);
    }

    #[test]
    fn caps() {
        let many: Vec<String> = (0..=DEFAULTS_CAP).map(|i| format!("d{i}")).collect();
        let many: Vec<&str> = many.iter().map(String::as_str).collect();
        assert!(extensions(&normal_theory(&many)).unwrap_err().is_resource());
    }

    #[test]
    fn base_reduction_examples() {
        let y = v("y");
        let cases = [("y", true), ("y & !y", false), ("true", true)];
        for (m, expected) in cases {
            let (t, a) = base_reduction(&f(m), std::slice::from_ref(&y)).unwrap();
            assert_eq!(t.defaults().len(), 1);
            assert_eq!(
                skeptically_entails(&t, &Formula::var(&a)).unwrap().entailed,
                expected,
                "{m}"
            );
        }
        assert_eq!(
            base_reduction(&f("a"), &[v("a")]).unwrap_err(),
            Error::NameCollision("a".into())
        );
    }

    #[test]
    fn raise_examples() {
        let x = v("x");
        let a = f("a");
        let raised = raise_universal(&normal_theory(&["a & x"]), &x, 1).unwrap();
        assert_eq!(raised.defaults().len(), 3);
        assert_eq!(raised.defaults()[2].prerequisite, f("_p1 & true"));
        assert_eq!(
            raised.to_text(None).lines().next(),
            Some(": x & _p1 / x & _p1")
        );
        let exts = extensions(&raised).unwrap();
        assert_eq!(exts.len(), 2);
        let entailing: Vec<bool> = exts
            .iter()
            .map(|e| crate::logic::entails(&e.consequences, &a).unwrap())
            .collect();
        // in the ¬x branch the justification a ∧ x is blocked
        assert_eq!(
            exts.iter()
                .map(|e| e.generating.clone())
                .collect::<Vec<_>>(),
            vec![vec![1], vec![0, 2]]
        );
        assert_eq!(entailing, vec![false, true]);
        assert!(!skeptically_entails(&raised, &a).unwrap().entailed);

        let taut = raise_universal(&normal_theory(&["a & (x | !x)"]), &x, 1).unwrap();
        assert!(skeptically_entails(&taut, &a).unwrap().entailed);
    }

    #[test]
    fn raise_preconditions() {
        let t = DefaultTheory::new(vec![], vec![f("w")]);
        assert!(matches!(
            raise_universal(&t, &v("x"), 1),
            Err(Error::Contract(_))
        ));
        let t = normal_theory(&["_p1"]);
        assert_eq!(
            raise_universal(&t, &v("x"), 1).unwrap_err(),
            Error::NameCollision("_p1".into())
        );
    }

    #[test]
    fn reduce_examples() {
        for (text, expected) in [
            ("forall x; exists y; : x <-> y", true),
            ("forall x; exists y; : x & y", false),
            ("exists y; : y", true),
            ("forall x z; exists y; : (x | z) -> y", true),
        ] {
            let q = parse_qbf(text).unwrap();
            assert_eq!(qbf_valid(&q).unwrap(), expected);
            let (t, a) = reduce_qbf(&q).unwrap();
            assert_eq!(
                skeptically_entails(&t, &Formula::var(&a)).unwrap().entailed,
                expected,
                "{text}"
            );
        }
        let wrong = parse_qbf("exists y; forall x; : x <-> y").unwrap();
        assert!(matches!(
            reduce_qbf(&wrong),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let q = parse_qbf("forall x z; exists y; : (x | z) -> y").unwrap();
        let (t, a) = reduce_qbf(&q).unwrap();
        let text = t.to_text(Some(&a));
        assert_eq!(DefaultTheory::parse(&text).unwrap(), (t, Some(a)));
        let (t, q) = DefaultTheory::parse("b : c / d\nW: b\nquery: d\n").unwrap();
        assert_eq!(t.defaults()[0].prerequisite, f("b"));
        assert_eq!(t.background(), &[f("b")]);
        assert_eq!(q, Some(v("d")));
    }

    #[test]
    fn parse_errors() {
        match DefaultTheory::parse(": a & / a") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 7)),
            other => panic!("{other:?}"),
        }
        assert!(DefaultTheory::parse("a / b").is_err());
        assert!(DefaultTheory::parse("query: a b").is_err());
        assert!(DefaultTheory::parse("nonsense").is_err());
    }
}
