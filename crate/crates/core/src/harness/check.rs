//! Equivalence and lemma checks: every case is decided by the reduction
//! under test and compared against the QBF oracles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::generate::{generate_qbfs, prefix_vars, random_formula, PrefixPattern, QbfGenSpec};
use crate::abduction::{self, AbductionInstance, Explanation};
use crate::default_logic::{self, DefaultRule, DefaultTheory};
use crate::error::{Error, Result};
use crate::logic::{qbf_valid, serialize_qbf, truth_table_valid, Formula, Qbf, Quantifier, Var};
use crate::planning::{self, PlanningInstance, UniversalGadget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Abduction,
    Default,
    Planning,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Abduction, Target::Default, Target::Planning];

    pub fn name(self) -> &'static str {
        match self {
            Target::Abduction => "abduction",
            Target::Default => "default",
            Target::Planning => "planning",
        }
    }

    /// Widest prefix pattern the target's reduction accepts.
    pub fn pattern(self) -> PrefixPattern {
        match self {
            Target::Abduction => PrefixPattern::ExistsForall,
            Target::Default => PrefixPattern::ForallExists,
            Target::Planning => PrefixPattern::Arbitrary,
        }
    }

    pub fn supports(self, pattern: PrefixPattern) -> bool {
        self == Target::Planning || pattern == self.pattern()
    }

    /// File extension used for instance files of this target.
    pub fn extension(self) -> &'static str {
        match self {
            Target::Abduction => "abd",
            Target::Default => "dl",
            Target::Planning => "plan",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Target, String> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                format!("unknown target `{s}` (expected abduction, default or planning)")
            })
    }
}

/// An instance produced by one of the three reductions.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Abduction(AbductionInstance),
    Default(DefaultTheory, Var),
    Planning(PlanningInstance),
}

impl Instance {
    pub fn target(&self) -> Target {
        match self {
            Instance::Abduction(_) => Target::Abduction,
            Instance::Default(..) => Target::Default,
            Instance::Planning(_) => Target::Planning,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Instance::Abduction(i) => i.theory_size(),
            Instance::Default(t, _) => t.size(),
            Instance::Planning(i) => i.size(),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Instance::Abduction(i) => i.to_text(),
            Instance::Default(t, q) => t.to_text(Some(q)),
            Instance::Planning(i) => i.to_text(),
        }
    }

    pub fn parse(target: Target, text: &str) -> Result<Instance> {
        Ok(match target {
            Target::Abduction => Instance::Abduction(AbductionInstance::parse(text)?),
            Target::Default => {
                let (t, q) = DefaultTheory::parse(text)?;
                let q = q.ok_or_else(|| Error::Contract("theory has no `query:` line".into()))?;
                Instance::Default(t, q)
            }
            Target::Planning => Instance::Planning(PlanningInstance::parse(text)?),
        })
    }
}

pub fn reduce(target: Target, q: &Qbf) -> Result<Instance> {
    Ok(match target {
        Target::Abduction => Instance::Abduction(abduction::reduce_qbf(q)?),
        Target::Default => {
            let (t, a) = default_logic::reduce_qbf(q)?;
            Instance::Default(t, a)
        }
        Target::Planning => Instance::Planning(planning::reduce_qbf(q)?),
    })
}

/// Answer of the target's decision procedure, with a human-readable witness
/// where one exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub answer: bool,
    pub witness: Option<String>,
}

/// Explanation existence, skeptical entailment of the query, or plan
/// existence. A returned plan that fails independent replay is an error.
pub fn solve(instance: &Instance) -> Result<Decision> {
    match instance {
        Instance::Abduction(i) => {
            let found = abduction::enumerate_explanations(i)?;
            let witness = found.iter().next().map(|Explanation(s)| {
                let names: Vec<&str> = s.iter().map(Var::name).collect();
                format!("{{{}}}", names.join(", "))
            });
            Ok(Decision {
                answer: !found.is_empty(),
                witness,
            })
        }
        Instance::Default(t, q) => {
            let answer = default_logic::skeptically_entails(t, &Formula::var(q))?;
            Ok(Decision {
                answer: answer.entailed,
                witness: Some(format!(
                    "{} extension(s){}",
                    answer.extensions,
                    if answer.vacuous { ", vacuous" } else { "" }
                )),
            })
        }
        Instance::Planning(i) => match planning::plan_exists(i)? {
            Some(plan) => {
                if !planning::validate_plan(i, &plan)? {
                    return Err(Error::Contract(format!(
                        "plan {:?} fails replay",
                        plan.names(i)
                    )));
                }
                Ok(Decision {
                    answer: true,
                    witness: Some(plan.names(i).join(" ")),
                })
            }
            None => Ok(Decision {
                answer: false,
                witness: None,
            }),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Equivalence,
    Lemma,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Equivalence => "equivalence",
            CheckKind::Lemma => "lemma",
        }
    }
}

/// One checked case, in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub index: usize,
    pub input: String,
    pub expected: Option<bool>,
    pub actual: Option<bool>,
    pub size: Option<usize>,
    pub error: Option<String>,
}

impl CaseOutcome {
    pub fn agrees(&self) -> bool {
        self.error.is_none() && self.expected.is_some() && self.expected == self.actual
    }
}

/// A file that reproduces a failing case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub case: usize,
    pub qbf: Option<Qbf>,
    pub expected: Option<bool>,
    pub actual: Option<bool>,
    pub detail: String,
    pub fixture: Fixture,
}

/// Instance sizes bucketed by the number of raises that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeBucket {
    pub raises: usize,
    pub cases: usize,
    pub min_size: usize,
    pub max_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub target: Target,
    pub kind: CheckKind,
    pub total: usize,
    pub agreements: usize,
    pub counterexamples: Vec<Counterexample>,
    pub cases: Vec<CaseOutcome>,
    pub growth_stats: Vec<SizeBucket>,
}

impl CheckReport {
    fn assemble(
        target: Target,
        kind: CheckKind,
        results: Vec<(CaseOutcome, Option<Counterexample>, usize)>,
    ) -> CheckReport {
        let mut buckets: BTreeMap<usize, SizeBucket> = BTreeMap::new();
        let mut cases = Vec::with_capacity(results.len());
        let mut counterexamples = Vec::new();
        for (outcome, cx, raises) in results {
            if let Some(size) = outcome.size {
                let b = buckets.entry(raises).or_insert(SizeBucket {
                    raises,
                    cases: 0,
                    min_size: usize::MAX,
                    max_size: 0,
                });
                b.cases += 1;
                b.min_size = b.min_size.min(size);
                b.max_size = b.max_size.max(size);
            }
            counterexamples.extend(cx);
            cases.push(outcome);
        }
        CheckReport {
            target,
            kind,
            total: cases.len(),
            agreements: cases.iter().filter(|c| c.agrees()).count(),
            counterexamples,
            cases,
            growth_stats: buckets.into_values().collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.agreements == self.total
    }

    /// Summary line, one line per counterexample, and the size table.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{} {}: {} cases, {} agreements, {} counterexamples\n",
            self.target,
            self.kind.name(),
            self.total,
            self.agreements,
            self.counterexamples.len()
        );
        for cx in &self.counterexamples {
            let case = &self.cases[cx.case];
            out.push_str(&format!(
                "  FAIL case {}: {} expected={} actual={} ({})\n",
                cx.case,
                case.input,
                show(cx.expected),
                show(cx.actual),
                cx.detail
            ));
        }
        for b in &self.growth_stats {
            out.push_str(&format!(
                "  raises={} cases={} size={}..{}\n",
                b.raises, b.cases, b.min_size, b.max_size
            ));
        }
        out
    }

    /// One `key=value` line per case.
    pub fn render_machine(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&format!(
                "case={} target={} kind={} expected={} actual={} agree={} size={}",
                c.index,
                self.target,
                self.kind.name(),
                show(c.expected),
                show(c.actual),
                c.agrees(),
                c.size.map_or("-".to_string(), |s| s.to_string())
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!(" error={e:?}"));
            }
            out.push_str(&format!(" input={:?}\n", c.input));
        }
        out
    }

    /// Writes every counterexample fixture into `dir`, returning the paths.
    pub fn write_fixtures(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        if self.counterexamples.is_empty() {
            return Ok(Vec::new());
        }
        fs::create_dir_all(dir)?;
        self.counterexamples
            .iter()
            .map(|cx| {
                let path = dir.join(&cx.fixture.file_name);
                fs::write(&path, &cx.fixture.contents)?;
                Ok(path)
            })
            .collect()
    }
}

fn show(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "-",
    }
}

fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

/// Reduces `q` for `target`, solves the result and compares with both QBF
/// oracles.
fn check_qbf(
    target: Target,
    index: usize,
    q: &Qbf,
) -> (CaseOutcome, Option<Counterexample>, usize) {
    let mut outcome = CaseOutcome {
        index,
        input: q.to_string(),
        expected: None,
        actual: None,
        size: None,
        error: None,
    };
    let mut detail = Vec::new();
    match (qbf_valid(q), truth_table_valid(q)) {
        (Ok(a), Ok(b)) if a == b => outcome.expected = Some(a),
        (Ok(a), Ok(b)) => detail.push(format!("oracles disagree: recursive={a} truth-table={b}")),
        (Err(e), _) | (_, Err(e)) => detail.push(format!("oracle: {e}")),
    }
    match reduce(target, q).and_then(|i| {
        let size = i.size();
        solve(&i).map(|d| (size, d))
    }) {
        Ok((size, d)) => {
            outcome.size = Some(size);
            outcome.actual = Some(d.answer);
        }
        Err(e) => detail.push(format!("{}: {e}", e.code())),
    }
    if !detail.is_empty() {
        outcome.error = Some(detail.join("; "));
    }
    let cx = (!outcome.agrees()).then(|| {
        let reason = outcome
            .error
            .clone()
            .unwrap_or_else(|| "reduction disagrees with the oracle".into());
        let header = comment_block(&[
            format!("{target} counterexample, case {index}"),
            format!("expected={} actual={}", show(outcome.expected), show(outcome.actual)),
            reason.clone(),
            format!("replay: qraise reduce --target {target} <this file> | qraise solve --target {target} -"),
        ]);
        Counterexample {
            case: index,
            qbf: Some(q.clone()),
            expected: outcome.expected,
            actual: outcome.actual,
            detail: reason,
            fixture: Fixture {
                file_name: format!("{target}-case{index:05}.qbf"),
                contents: format!("{header}{}", serialize_qbf(q)),
            },
        }
    });
    (outcome, cx, q.num_vars())
}

/// Runs every generated QBF through `target`'s reduction and decision
/// procedure. Per-case failures, including resource caps, are recorded as
/// counterexamples rather than aborting the run.
pub fn check_equivalence(target: Target, spec: &QbfGenSpec) -> Result<CheckReport> {
    if !target.supports(spec.pattern) {
        return Err(Error::UnsupportedShape(format!(
            "{target} does not support the `{}` prefix pattern",
            spec.pattern.code()
        )));
    }
    let qbfs = generate_qbfs(spec)?;
    check_qbfs(target, &qbfs)
}

/// Equivalence check over an explicit list of QBFs.
pub fn check_qbfs(target: Target, qbfs: &[Qbf]) -> Result<CheckReport> {
    let results = qbfs
        .par_iter()
        .enumerate()
        .map(|(i, q)| check_qbf(target, i, q))
        .collect();
    Ok(CheckReport::assemble(
        target,
        CheckKind::Equivalence,
        results,
    ))
}

/// One lemma-level sample: the instance before the raise, the raised
/// variable, and the instance after it.
struct LemmaCase {
    input: String,
    fixture: Fixture,
    raises: usize,
    /// `Ok(None)` when the property holds, `Ok(Some(why))` when it fails.
    verdict: Result<Option<String>>,
    size: Option<usize>,
}

fn lemma_outcome(index: usize, case: LemmaCase) -> (CaseOutcome, Option<Counterexample>, usize) {
    let (error, holds) = match &case.verdict {
        Ok(None) => (None, true),
        Ok(Some(_)) => (None, false),
        Err(e) => (Some(format!("{}: {e}", e.code())), false),
    };
    let outcome = CaseOutcome {
        index,
        input: case.input.clone(),
        expected: Some(true),
        actual: if error.is_some() { None } else { Some(holds) },
        size: case.size,
        error,
    };
    let cx = (!outcome.agrees()).then(|| {
        let detail = match &case.verdict {
            Ok(Some(why)) => why.clone(),
            Err(e) => format!("{}: {e}", e.code()),
            Ok(None) => unreachable!("agreeing case"),
        };
        Counterexample {
            case: index,
            qbf: None,
            expected: outcome.expected,
            actual: outcome.actual,
            detail: detail.clone(),
            fixture: Fixture {
                file_name: case.fixture.file_name.clone(),
                contents: format!("{}{}", comment_block(&[detail]), case.fixture.contents),
            },
        }
    });
    (outcome, cx, case.raises)
}

/// Checks the per-quantifier merge property of `target` on `samples`
/// randomly drawn instances:
/// - abduction: the explanations of the raised instance are exactly the
///   tagged union of the explanations of the two substituted instances;
/// - default: the extensions of the raised theory correspond one-to-one to
///   those of the two substituted theories, extended by `x∧p` / `¬x∧p`, and
///   skeptical entailment of a query is the conjunction of the branches;
/// - planning: plan existence after an `∃` raise is the disjunction, after
///   a `∀` raise the conjunction, of plan existence in the two substituted
///   instances.
pub fn check_lemma(target: Target, seed: u64, samples: usize) -> Result<CheckReport> {
    let results = (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let case = match target {
                Target::Abduction => abduction_lemma_case(&mut rng, index),
                Target::Default => default_lemma_case(&mut rng, index),
                Target::Planning => planning_lemma_case(&mut rng, index),
            };
            lemma_outcome(index, case)
        })
        .collect();
    Ok(CheckReport::assemble(target, CheckKind::Lemma, results))
}

fn lemma_var() -> Var {
    Var::new("x").expect("well-formed")
}

fn pool(n: usize) -> Vec<Var> {
    (1..=n)
        .map(|i| Var::new(&format!("v{i}")).expect("well-formed"))
        .collect()
}

fn fixture_for(target: Target, index: usize, x: &Var, k: usize, body: String) -> Fixture {
    Fixture {
        file_name: format!("{target}-lemma{index:05}.{}", target.extension()),
        contents: format!("# raise {x} with gadget index {k}\n{body}"),
    }
}

/// Either a random instance over `v1..v4` and `x`, or a partial reduction
/// of a random `∃*∀*` QBF whose next existential is renamed `x`.
fn random_abduction_instance(rng: &mut ChaCha8Rng, index: usize) -> (AbductionInstance, usize) {
    let x = lemma_var();
    if index.is_multiple_of(2) {
        let vars = pool(4);
        let mut shuffled = vars.clone();
        shuffled.shuffle(rng);
        let nh = rng.gen_range(0..=2);
        let nm = rng.gen_range(1..=2);
        let hypotheses: BTreeSet<Var> = shuffled[..nh].iter().cloned().collect();
        let manifestations: BTreeSet<Var> = shuffled[nh..nh + nm].iter().cloned().collect();
        let mut all = vars;
        all.push(x);
        let theory = (0..rng.gen_range(1..=3))
            .map(|_| random_formula(rng, &all, 3))
            .collect();
        let i =
            AbductionInstance::new(hypotheses, manifestations, theory).expect("disjoint H and M");
        (i, 0)
    } else {
        // ∃ x ∃ inner... ∀ universal...: raise the inner existentials only
        let inner = rng.gen_range(0..=2);
        let universal = rng.gen_range(0..=2);
        let inner_vars = prefix_vars(inner);
        let universal_vars: Vec<Var> = (0..universal)
            .map(|i| Var::new(&format!("y{}", i + 1)).expect("well-formed"))
            .collect();
        let mut all = vec![x];
        all.extend(inner_vars.iter().cloned());
        all.extend(universal_vars.iter().cloned());
        let matrix = random_formula(rng, &all, 3);
        let mut i = abduction::base_reduction(&matrix, &all).expect("closed matrix");
        for (k, v) in inner_vars.iter().rev().enumerate() {
            i = abduction::raise_existential(&i, v, k + 1).expect("fresh gadget names");
        }
        (i, inner)
    }
}

fn abduction_lemma_case(rng: &mut ChaCha8Rng, index: usize) -> LemmaCase {
    let (i, raised) = random_abduction_instance(rng, index);
    let x = lemma_var();
    let k = raised + 1;
    let verdict = (|| -> Result<Option<String>> {
        let raised_instance = abduction::raise_existential(&i, &x, k)?;
        let actual = abduction::enumerate_explanations(&raised_instance)?;
        let mut expected = BTreeSet::new();
        for (value, tag) in [(true, "+"), (false, "-")] {
            let branch =
                abduction::enumerate_explanations(&abduction::substitute_theory(&i, &x, value))?;
            for Explanation(mut s) in branch {
                s.insert(x.suffixed(tag));
                expected.insert(Explanation(s));
            }
        }
        Ok((actual != expected).then(|| {
            format!(
                "raised instance has {} explanations, tagged union has {}",
                actual.len(),
                expected.len()
            )
        }))
    })();
    LemmaCase {
        input: format!("{} | raise {x}", i.to_text().trim_end().replace('\n', "; ")),
        fixture: fixture_for(Target::Abduction, index, &x, k, i.to_text()),
        raises: raised,
        size: Some(i.theory_size()),
        verdict,
    }
}

fn random_default(rng: &mut ChaCha8Rng, vars: &[Var]) -> DefaultRule {
    let prerequisite = if rng.gen_bool(0.4) {
        Formula::t()
    } else {
        random_formula(rng, vars, 2)
    };
    let consequence = random_formula(rng, vars, 2);
    if rng.gen_bool(0.5) {
        DefaultRule::new(prerequisite, consequence.clone(), consequence)
    } else {
        DefaultRule::new(prerequisite, random_formula(rng, vars, 2), consequence)
    }
}

/// Either a random theory of up to five defaults over `v1..v3` and `x`, or
/// a partial reduction of a random `∀*∃*` QBF whose next universal is `x`.
fn random_default_theory(rng: &mut ChaCha8Rng, index: usize) -> (DefaultTheory, Var, usize) {
    let x = lemma_var();
    if index.is_multiple_of(2) {
        let mut vars = pool(3);
        let query = vars.choose(rng).expect("nonempty").clone();
        vars.push(x);
        let defaults = (0..rng.gen_range(1..=5))
            .map(|_| random_default(rng, &vars))
            .collect();
        (DefaultTheory::new(defaults, vec![]), query, 0)
    } else {
        let inner = rng.gen_range(0..=2);
        let existential = rng.gen_range(0..=2);
        let inner_vars = prefix_vars(inner);
        let mut all = vec![x];
        all.extend(inner_vars.iter().cloned());
        all.extend(
            (0..existential).map(|i| Var::new(&format!("y{}", i + 1)).expect("well-formed")),
        );
        let matrix = random_formula(rng, &all, 3);
        let (mut t, a) = default_logic::base_reduction(&matrix, &all).expect("closed matrix");
        for (k, v) in inner_vars.iter().rev().enumerate() {
            t = default_logic::raise_universal(&t, v, k + 1).expect("fresh gadget names");
        }
        (t, a, inner)
    }
}

fn default_lemma_case(rng: &mut ChaCha8Rng, index: usize) -> LemmaCase {
    let (t, query, raised) = random_default_theory(rng, index);
    let x = lemma_var();
    let k = raised + 1;
    let verdict = (|| -> Result<Option<String>> {
        let p = Var::gadget('p', k);
        let raised_theory = default_logic::raise_universal(&t, &x, k)?;
        let actual = default_logic::extensions(&raised_theory)?;
        let mut expected = Vec::new();
        for value in [true, false] {
            let tag = Formula::and(Formula::literal(&x, value), Formula::var(&p));
            for e in default_logic::extensions(&t.substitute(&x, value))? {
                let mut c = e.consequences;
                c.push(tag.clone());
                expected.push(c);
            }
        }
        if actual.len() != expected.len() {
            return Ok(Some(format!(
                "raised theory has {} extensions, branches have {}",
                actual.len(),
                expected.len()
            )));
        }
        // match each raised extension to a distinct branch extension
        let mut unmatched = expected;
        for e in &actual {
            let mut hit = None;
            for (j, c) in unmatched.iter().enumerate() {
                if default_logic::same_closure(&e.consequences, c)? {
                    hit = Some(j);
                    break;
                }
            }
            match hit {
                Some(j) => {
                    unmatched.swap_remove(j);
                }
                None => {
                    return Ok(Some(format!(
                        "extension generated by {:?} has no branch counterpart",
                        e.generating
                    )))
                }
            }
        }
        let goal = Formula::var(&query);
        let merged = default_logic::skeptically_entails(&raised_theory, &goal)?.entailed;
        let branches = default_logic::skeptically_entails(&t.substitute(&x, true), &goal)?.entailed
            && default_logic::skeptically_entails(&t.substitute(&x, false), &goal)?.entailed;
        Ok((merged != branches).then(|| {
            format!("skeptical entailment of {query}: raised={merged}, branches={branches}")
        }))
    })();
    LemmaCase {
        input: format!(
            "{} | raise {x}",
            t.to_text(Some(&query)).trim_end().replace('\n', "; ")
        ),
        fixture: fixture_for(Target::Default, index, &x, k, t.to_text(Some(&query))),
        raises: raised,
        size: Some(t.size()),
        verdict,
    }
}

fn has_plan(i: &PlanningInstance) -> Result<bool> {
    match planning::plan_exists(i)? {
        Some(plan) => {
            if planning::validate_plan(i, &plan)? {
                Ok(true)
            } else {
                Err(Error::Contract(format!(
                    "plan {:?} fails replay",
                    plan.names(i)
                )))
            }
        }
        None => Ok(false),
    }
}

/// A random QBF with up to four prefix variables; a random suffix of its
/// prefix is raised, and the quantifier just outside it is the one checked.
fn planning_lemma_case(rng: &mut ChaCha8Rng, index: usize) -> LemmaCase {
    let n = rng.gen_range(1..=4);
    let vars = prefix_vars(n);
    let prefix: Vec<(Quantifier, Var)> = vars
        .iter()
        .map(|v| {
            let q = if rng.gen_bool(0.5) {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            (q, v.clone())
        })
        .collect();
    let matrix = random_formula(rng, &vars, 3);
    let split = rng.gen_range(0..n);
    let (quant, x) = prefix[split].clone();
    let inner = &prefix[split + 1..];
    let k = inner.len() + 1;
    let built = planning::partial_reduction(&matrix, &vars, inner, UniversalGadget::Resetting);
    let (input, fixture, size) = match &built {
        Ok(i) => (
            format!(
                "{} | raise {}{x}",
                i.to_text().trim_end().replace('\n', "; "),
                quant.symbol()
            ),
            fixture_for(Target::Planning, index, &x, k, i.to_text()),
            Some(i.size()),
        ),
        Err(_) => (
            format!("matrix {matrix} | raise {}{x}", quant.symbol()),
            fixture_for(
                Target::Planning,
                index,
                &x,
                k,
                format!("# matrix: {matrix}\n"),
            ),
            None,
        ),
    };
    let verdict = built.and_then(|i| {
        let raised = match quant {
            Quantifier::Exists => planning::raise_existential(&i, &x, k)?,
            Quantifier::Forall => {
                planning::raise_universal_with(&i, &x, k, UniversalGadget::Resetting)?
            }
        };
        let merged = has_plan(&raised)?;
        let on = has_plan(&i.substitute(&x, true)?)?;
        let off = has_plan(&i.substitute(&x, false)?)?;
        let combined = match quant {
            Quantifier::Exists => on || off,
            Quantifier::Forall => on && off,
        };
        Ok((merged != combined).then(|| {
            format!(
                "{} merge: raised={merged}, x=true branch={on}, x=false branch={off}",
                quant.keyword()
            )
        }))
    });
    LemmaCase {
        input,
        fixture,
        raises: inner.len(),
        size,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_qbf;

    #[test]
    fn target_names_round_trip() {
        for t in Target::ALL {
            assert_eq!(t.name().parse::<Target>().unwrap(), t);
        }
        assert!("sat".parse::<Target>().is_err());
    }

    #[test]
    fn small_exhaustive_runs_agree() {
        for target in Target::ALL {
            let spec = QbfGenSpec::exhaustive(2, target.pattern(), 2);
            let report = check_equivalence(target, &spec).unwrap();
            assert!(report.passed(), "{}", report.render_text());
            assert_eq!(report.agreements, report.total);
            assert_eq!(report.cases.len(), report.total);
        }
    }

    #[test]
    fn planning_exists_forall_random() {
        let spec = QbfGenSpec::random(3, 2, PrefixPattern::ExistsForall, 100);
        let report = check_equivalence(Target::Planning, &spec).unwrap();
        assert!(report.passed(), "{}", report.render_text());
    }

    #[test]
    fn unsupported_pattern_is_rejected() {
        let spec = QbfGenSpec::random(1, 2, PrefixPattern::ExistsForall, 10);
        assert!(matches!(
            check_equivalence(Target::Default, &spec),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn reports_are_deterministic() {
        let spec = QbfGenSpec::random(11, 3, PrefixPattern::Arbitrary, 40);
        let a = check_equivalence(Target::Planning, &spec).unwrap();
        let b = check_equivalence(Target::Planning, &spec).unwrap();
        assert_eq!(a.render_machine(), b.render_machine());
        let la = check_lemma(Target::Default, 5, 20).unwrap();
        let lb = check_lemma(Target::Default, 5, 20).unwrap();
        assert_eq!(la.render_machine(), lb.render_machine());
    }

    #[test]
    fn shape_errors_become_counterexamples_with_fixtures() {
        let q = parse_qbf("forall x; exists y; : x <-> y").unwrap();
        let report = check_qbfs(Target::Abduction, std::slice::from_ref(&q)).unwrap();
        assert_eq!(report.total, 1);
        assert_eq!(report.agreements, 0);
        let cx = &report.counterexamples[0];
        assert_eq!(cx.qbf.as_ref(), Some(&q));
        assert_eq!(cx.expected, Some(true));
        assert_eq!(cx.actual, None);
        assert!(cx.detail.starts_with("E_SHAPE"));
        let dir = tempfile::tempdir().unwrap();
        let paths = report.write_fixtures(dir.path()).unwrap();
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(parse_qbf(&text).unwrap(), q);
    }

    #[test]
    fn literal_gadget_fails_where_resetting_holds() {
        let q = parse_qbf("forall x; exists y; : x <-> y").unwrap();
        let literal = planning::reduce_qbf_with(&q, UniversalGadget::Literal).unwrap();
        assert!(!solve(&Instance::Planning(literal)).unwrap().answer);
        assert!(
            solve(&reduce(Target::Planning, &q).unwrap())
                .unwrap()
                .answer
        );
    }

    #[test]
    fn lemma_checks_hold() {
        for target in Target::ALL {
            let report = check_lemma(target, 42, 60).unwrap();
            assert!(report.passed(), "{}", report.render_text());
            assert_eq!(report.total, 60);
        }
    }

    #[test]
    fn machine_block_has_one_line_per_case() {
        let spec = QbfGenSpec::exhaustive(1, PrefixPattern::ExistsForall, 1);
        let report = check_equivalence(Target::Abduction, &spec).unwrap();
        let block = report.render_machine();
        assert_eq!(block.lines().count(), report.total);
        assert!(block
            .lines()
            .all(|l| l.starts_with("case=") && l.contains("agree=true")));
    }

    #[test]
    fn solve_reports_witnesses() {
        let q = parse_qbf("exists x; forall y; : x | y").unwrap();
        let d = solve(&reduce(Target::Abduction, &q).unwrap()).unwrap();
        assert_eq!(
            d,
            Decision {
                answer: true,
                witness: Some("{x+}".into())
            }
        );
        let p = solve(&reduce(Target::Planning, &q).unwrap()).unwrap();
        assert!(p.answer);
        assert!(p.witness.unwrap().contains("matrix"));
    }
}
