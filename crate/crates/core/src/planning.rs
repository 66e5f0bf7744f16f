//! STRIPS with formula preconditions: breadth-first plan existence, an
//! independent plan validator, the base reduction for quantifier-free
//! formulas, and the existential and universal raising gadgets.
//!
//! Every instance keeps track of its *control* fluents: the base goal plus
//! every fluent a gadget introduced. The resetting universal gadget clears
//! them between the two branches it simulates.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::format::{content_lines, keyed, syntax};
use crate::logic::{
    parse_formula_at, parse_names_at, Assignment, Formula, Qbf, Quantifier, TruthTable, Universe,
    Var,
};

/// Largest fluent set the state-space search will explore.
pub const FLUENT_CAP: usize = 18;

/// Goal fluent introduced by the base reduction.
pub const BASE_GOAL: &str = "a";

/// Name of the action carrying the matrix in the base reduction.
pub const MATRIX_ACTION: &str = "matrix";

#[derive(Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub precondition: Formula,
    pub effects: Vec<(Var, bool)>,
}

impl Action {
    pub fn new(name: &str, precondition: Formula, effects: Vec<(Var, bool)>) -> Result<Action> {
        Var::new(name).map_err(|_| Error::InvalidName(name.to_string()))?;
        let mut seen = BTreeSet::new();
        for (v, _) in &effects {
            if !seen.insert(v) {
                return Err(Error::Contract(format!(
                    "action {name} has two effects on {v}"
                )));
            }
        }
        Ok(Action {
            name: name.to_string(),
            precondition,
            effects,
        })
    }

    fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.precondition.vars();
        out.extend(self.effects.iter().map(|(v, _)| v.clone()));
        out
    }

    fn sets(&self, v: &Var, value: bool) -> bool {
        self.effects.iter().any(|(w, b)| w == v && *b == value)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} =>", self.name, self.precondition)?;
        for (v, b) in &self.effects {
            write!(f, " {}{}", if *b { "" } else { "!" }, v)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{self}⟩")
    }
}

/// Total assignment over an instance's fluents.
pub type State = Assignment;

pub fn all_false(fluents: &BTreeSet<Var>) -> State {
    fluents.iter().map(|v| (v.clone(), false)).collect()
}

/// The precondition holds in `s`.
pub fn executable(action: &Action, s: &State) -> Result<bool> {
    action.precondition.evaluate(s)
}

/// `s` with every effect literal made true.
pub fn apply(action: &Action, s: &State) -> State {
    let mut next = s.clone();
    for (v, b) in &action.effects {
        next.set(v.clone(), *b);
    }
    next
}

#[derive(Clone, PartialEq, Eq)]
pub struct PlanningInstance {
    fluents: BTreeSet<Var>,
    initial: State,
    goal: Var,
    actions: Vec<Action>,
    matrix_action: String,
    control: BTreeSet<Var>,
}

impl PlanningInstance {
    pub fn new(
        fluents: BTreeSet<Var>,
        initial: State,
        goal: Var,
        actions: Vec<Action>,
        matrix_action: &str,
        control: BTreeSet<Var>,
    ) -> Result<PlanningInstance> {
        if !fluents.contains(&goal) {
            return Err(Error::Contract(format!("goal {goal} is not a fluent")));
        }
        if initial.universe().ne(fluents.iter()) {
            return Err(Error::Contract(
                "initial state must assign exactly the fluents".into(),
            ));
        }
        if let Some(v) = control.difference(&fluents).next() {
            return Err(Error::Contract(format!(
                "control fluent {v} is not a fluent"
            )));
        }
        let mut names = BTreeSet::new();
        for a in &actions {
            if !names.insert(a.name.as_str()) {
                return Err(Error::Contract(format!("duplicate action name {}", a.name)));
            }
            if let Some(v) = a.vars().difference(&fluents).next() {
                return Err(Error::Contract(format!(
                    "action {} mentions {v}, which is not a fluent",
                    a.name
                )));
            }
        }
        if !names.contains(matrix_action) {
            return Err(Error::Contract(format!(
                "matrix action {matrix_action} does not exist"
            )));
        }
        Ok(PlanningInstance {
            fluents,
            initial,
            goal,
            actions,
            matrix_action: matrix_action.to_string(),
            control,
        })
    }

    pub fn fluents(&self) -> &BTreeSet<Var> {
        &self.fluents
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn goal(&self) -> &Var {
        &self.goal
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn control(&self) -> &BTreeSet<Var> {
        &self.control
    }

    pub fn matrix_action(&self) -> &Action {
        self.actions
            .iter()
            .find(|a| a.name == self.matrix_action)
            .expect("checked on construction")
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Actions that make the goal true.
    pub fn goal_setters(&self) -> Vec<&Action> {
        self.actions
            .iter()
            .filter(|a| a.sets(&self.goal, true))
            .collect()
    }

    /// Largest precondition, counted in leaves (variable and constant occurrences).
    pub fn max_precondition_leaves(&self) -> usize {
        self.actions
            .iter()
            .map(|a| a.precondition.leaf_count())
            .max()
            .unwrap_or(0)
    }

    /// Node count of all preconditions plus the number of effect literals.
    pub fn size(&self) -> usize {
        self.actions
            .iter()
            .map(|a| a.precondition.size() + a.effects.len())
            .sum()
    }

    /// `i|x=value`: `x` is replaced in every precondition, dropped from every
    /// effect list and removed from the fluents.
    pub fn substitute(&self, x: &Var, value: bool) -> Result<PlanningInstance> {
        let mut fluents = self.fluents.clone();
        fluents.remove(x);
        let initial = self
            .initial
            .iter()
            .filter(|(v, _)| *v != x)
            .map(|(v, b)| (v.clone(), b))
            .collect();
        let actions = self
            .actions
            .iter()
            .map(|a| Action {
                name: a.name.clone(),
                precondition: a.precondition.substitute(x, value),
                effects: a.effects.iter().filter(|(v, _)| v != x).cloned().collect(),
            })
            .collect();
        let mut control = self.control.clone();
        control.remove(x);
        PlanningInstance::new(
            fluents,
            initial,
            self.goal.clone(),
            actions,
            &self.matrix_action,
            control,
        )
    }

    pub fn parse(text: &str) -> Result<PlanningInstance> {
        let mut fluents = None;
        let mut init = Vec::new();
        let mut goal = None;
        let mut control = BTreeSet::new();
        let mut matrix = None;
        let mut actions = Vec::new();
        for (line_no, line) in content_lines(text) {
            if let Some(rest) = line.trim_start().strip_prefix("action ") {
                actions.push(parse_action(line, rest, line_no)?);
            } else if let Some((rest, col)) = keyed(line, "fluents") {
                fluents = Some(parse_names_at(rest, line_no, col, true)?);
            } else if let Some((rest, col)) = keyed(line, "init") {
                init.extend(parse_init(rest, line_no, col)?);
            } else if let Some((rest, col)) = keyed(line, "goal") {
                goal = Some(single_name(rest, line_no, col)?);
            } else if let Some((rest, col)) = keyed(line, "control") {
                control.extend(parse_names_at(rest, line_no, col, true)?);
            } else if let Some((rest, col)) = keyed(line, "matrix") {
                matrix = Some(single_name(rest, line_no, col)?);
            } else {
                return Err(syntax(line_no, 1, "unrecognized line"));
            }
        }
        let fluents: BTreeSet<Var> = fluents
            .ok_or_else(|| syntax(1, 1, "missing `fluents:` line"))?
            .into_iter()
            .collect();
        let goal = goal.ok_or_else(|| syntax(1, 1, "missing `goal:` line"))?;
        let mut initial = all_false(&fluents);
        for (v, b) in init {
            if !fluents.contains(&v) {
                return Err(Error::Contract(format!(
                    "init mentions {v}, which is not a fluent"
                )));
            }
            initial.set(v, b);
        }
        let matrix = match matrix {
            Some(m) => m.name().to_string(),
            None => actions
                .first()
                .map(|a: &Action| a.name.clone())
                .ok_or_else(|| syntax(1, 1, "instance has no actions"))?,
        };
        PlanningInstance::new(fluents, initial, goal, actions, &matrix, control)
    }

    pub fn to_text(&self) -> String {
        let names =
            |it: &mut dyn Iterator<Item = &Var>| it.map(|v| format!(" {v}")).collect::<String>();
        let mut out = format!("fluents:{}\n", names(&mut self.fluents.iter()));
        out.push_str("init:");
        for (v, b) in self.initial.iter() {
            out.push_str(&format!(" {v}={}", u8::from(b)));
        }
        out.push('\n');
        out.push_str(&format!("goal: {}\n", self.goal));
        out.push_str(&format!("control:{}\n", names(&mut self.control.iter())));
        out.push_str(&format!("matrix: {}\n", self.matrix_action));
        for a in &self.actions {
            out.push_str("action ");
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for PlanningInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn single_name(text: &str, line: usize, col: usize) -> Result<Var> {
    let names = parse_names_at(text, line, col, true)?;
    match <[Var; 1]>::try_from(names) {
        Ok([v]) => Ok(v),
        Err(_) => Err(syntax(line, col, "expected exactly one name")),
    }
}

fn parse_init(text: &str, line: usize, col: usize) -> Result<Vec<(Var, bool)>> {
    text.split_whitespace()
        .map(|tok| {
            let (name, value) = tok
                .split_once('=')
                .ok_or_else(|| syntax(line, col, format!("expected `var=0|1`, found `{tok}`")))?;
            let value = match value {
                "0" => false,
                "1" => true,
                _ => return Err(syntax(line, col, format!("bad value in `{tok}`"))),
            };
            Ok((Var::new(name)?, value))
        })
        .collect()
}

fn parse_action(line: &str, rest: &str, line_no: usize) -> Result<Action> {
    let start = line.len() - rest.len();
    let colon = rest.find(':').ok_or_else(|| {
        syntax(
            line_no,
            start + 1,
            "expected `action <name>: <formula> => <literals>`",
        )
    })?;
    let name = rest[..colon].trim();
    let body = &rest[colon + 1..];
    let arrow = body
        .find("=>")
        .ok_or_else(|| syntax(line_no, start + colon + 2, "action is missing `=>`"))?;
    let pre_col = start + colon + 2;
    let precondition = parse_formula_at(&body[..arrow], line_no, pre_col, true)?;
    let effects = body[arrow + 2..]
        .split_whitespace()
        .map(|lit| {
            let (positive, name) = match lit.strip_prefix('!') {
                Some(n) => (false, n),
                None => (true, lit),
            };
            Ok((Var::new(name)?, positive))
        })
        .collect::<Result<Vec<_>>>()?;
    Action::new(name, precondition, effects)
}

/// Sequence of action indices into `PlanningInstance::actions`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan(pub Vec<usize>);

impl Plan {
    pub fn names<'a>(&self, i: &'a PlanningInstance) -> Vec<&'a str> {
        self.0.iter().map(|&k| i.actions[k].name.as_str()).collect()
    }
}

/// Breadth-first search over the whole state space. Returns a shortest plan
/// reaching a state where the goal holds, or `None`.
pub fn plan_exists(i: &PlanningInstance) -> Result<Option<Plan>> {
    let universe = Universe::new(i.fluents.iter().cloned());
    universe.check_cap(FLUENT_CAP, "plan search")?;
    let bit = |v: &Var| 1u32 << universe.position(v).expect("fluent");
    let compiled = i
        .actions
        .iter()
        .map(|a| {
            let (mut set, mut clear) = (0u32, 0u32);
            for (v, b) in &a.effects {
                if *b {
                    set |= bit(v);
                } else {
                    clear |= bit(v);
                }
            }
            Ok((universe.table(&a.precondition)?, set, clear))
        })
        .collect::<Result<Vec<(TruthTable, u32, u32)>>>()?;
    let goal = bit(&i.goal);
    let start = i
        .initial
        .iter()
        .filter(|(_, b)| *b)
        .fold(0u32, |s, (v, _)| s | bit(v));

    // parent[s] = (predecessor, action); u32::MAX marks unvisited
    let mut parent = vec![(u32::MAX, 0usize); 1 << universe.len()];
    parent[start as usize] = (start, usize::MAX);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if s & goal != 0 {
            let mut steps = Vec::new();
            let mut cur = s;
            while cur != start {
                let (prev, act) = parent[cur as usize];
                steps.push(act);
                cur = prev;
            }
            steps.reverse();
            return Ok(Some(Plan(steps)));
        }
        for (k, (pre, set, clear)) in compiled.iter().enumerate() {
            if pre.get(s as usize) {
                let next = (s & !clear) | set;
                if parent[next as usize].0 == u32::MAX {
                    parent[next as usize] = (s, k);
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(None)
}

/// Replays `plan` from the initial state with the plain evaluator; true iff
/// every step is executable and the goal holds at the end.
pub fn validate_plan(i: &PlanningInstance, plan: &Plan) -> Result<bool> {
    let mut state = i.initial.clone();
    for &k in &plan.0 {
        let action = i
            .actions
            .get(k)
            .ok_or_else(|| Error::Contract(format!("plan step {k} is not an action")))?;
        if !executable(action, &state)? {
            return Ok(false);
        }
        state = apply(action, &state);
    }
    Ok(state.get(&i.goal) == Some(true))
}

fn base_instance(matrix: &Formula, extra_fluents: &[Var]) -> Result<PlanningInstance> {
    let a = Var::new(BASE_GOAL)?;
    if matrix.mentions(&a) || extra_fluents.contains(&a) {
        return Err(Error::NameCollision(a.to_string()));
    }
    let mut fluents = matrix.vars();
    fluents.extend(extra_fluents.iter().cloned());
    fluents.insert(a.clone());
    let action = Action::new(MATRIX_ACTION, matrix.clone(), vec![(a.clone(), true)])?;
    PlanningInstance::new(
        fluents.clone(),
        all_false(&fluents),
        a.clone(),
        vec![action],
        MATRIX_ACTION,
        BTreeSet::from([a]),
    )
}

/// One action `⟨matrix, {a}⟩` from the all-false state with goal `a`.
pub fn base_reduction(matrix: &Formula) -> Result<PlanningInstance> {
    base_instance(matrix, &[])
}

fn fresh(i: &PlanningInstance, x: &Var, names: &[&Var]) -> Result<()> {
    if !i.fluents.contains(x) {
        return Err(Error::Contract(format!("{x} is not a fluent")));
    }
    if i.control.contains(x) {
        return Err(Error::Contract(format!("{x} is a gadget fluent")));
    }
    for v in names {
        if i.fluents.contains(*v) {
            return Err(Error::NameCollision(v.to_string()));
        }
    }
    Ok(())
}

fn guarded_actions(i: &PlanningInstance, p: &Var) -> Vec<Action> {
    i.actions
        .iter()
        .map(|a| Action {
            name: a.name.clone(),
            precondition: Formula::and(a.precondition.clone(), Formula::var(p)),
            effects: a.effects.clone(),
        })
        .collect()
}

fn extended(
    i: &PlanningInstance,
    new_fluents: &[&Var],
    goal: Var,
    mut actions: Vec<Action>,
    gadget: Vec<Action>,
) -> Result<PlanningInstance> {
    let mut fluents = i.fluents.clone();
    let mut initial = i.initial.clone();
    let mut control = i.control.clone();
    for v in new_fluents {
        fluents.insert((*v).clone());
        initial.set((*v).clone(), false);
        control.insert((*v).clone());
    }
    actions.extend(gadget);
    PlanningInstance::new(fluents, initial, goal, actions, &i.matrix_action, control)
}

/// Lets the plan fix `x` once, either way: adds `p = _p<k>` (initially
/// false), the choice actions `⟨¬p, {x, p}⟩` and `⟨¬p, {¬x, p}⟩`, and `p` as
/// an extra precondition of every existing action.
pub fn raise_existential(i: &PlanningInstance, x: &Var, k: usize) -> Result<PlanningInstance> {
    let p = Var::gadget('p', k);
    fresh(i, x, &[&p])?;
    let not_p = Formula::not(Formula::var(&p));
    let gadget = vec![
        Action::new(
            &format!("exists{k}_true"),
            not_p.clone(),
            vec![(x.clone(), true), (p.clone(), true)],
        )?,
        Action::new(
            &format!("exists{k}_false"),
            not_p,
            vec![(x.clone(), false), (p.clone(), true)],
        )?,
    ];
    extended(i, &[&p], i.goal.clone(), guarded_actions(i, &p), gadget)
}

/// How the universal gadget's second action leaves the inner instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UniversalGadget {
    /// `a₂ = ⟨a ∧ x, {¬x, ¬a}⟩` exactly. Correct when the inner instance has
    /// no gadgets of its own; otherwise choices made for `x = true` stay
    /// locked for the `x = false` branch.
    Literal,
    /// `a₂` additionally falsifies every control fluent of the inner
    /// instance, so the inner instance restarts from a clean state.
    Resetting,
}

/// Forces the plan through both values of `x`: adds `b = _b<k>` and
/// `p = _p<k>` (initially false), makes `b` the goal, guards every existing
/// action with `p`, and adds
/// `a₁ = ⟨¬p, {x, p}⟩`, `a₂ = ⟨a ∧ x, {¬x, ¬a}⟩`, `a₃ = ⟨a ∧ ¬x, {b}⟩`
/// where `a` is the current goal.
pub fn raise_universal(i: &PlanningInstance, x: &Var, k: usize) -> Result<PlanningInstance> {
    raise_universal_with(i, x, k, UniversalGadget::Literal)
}

pub fn raise_universal_with(
    i: &PlanningInstance,
    x: &Var,
    k: usize,
    gadget: UniversalGadget,
) -> Result<PlanningInstance> {
    let b = Var::gadget('b', k);
    let p = Var::gadget('p', k);
    fresh(i, x, &[&b, &p])?;
    let setters = i.goal_setters().len();
    if setters != 1 {
        return Err(Error::Contract(format!(
            "goal {} must be achieved by exactly one action, found {setters}",
            i.goal
        )));
    }
    let a = i.goal.clone();
    let (fa, fx) = (Formula::var(&a), Formula::var(x));
    let mut reset = vec![(x.clone(), false), (a.clone(), false)];
    if gadget == UniversalGadget::Resetting {
        reset.extend(
            i.control
                .iter()
                .filter(|c| **c != a)
                .map(|c| (c.clone(), false)),
        );
    }
    let actions = vec![
        Action::new(
            &format!("forall{k}_a1"),
            Formula::not(Formula::var(&p)),
            vec![(x.clone(), true), (p.clone(), true)],
        )?,
        Action::new(
            &format!("forall{k}_a2"),
            Formula::and(fa.clone(), fx.clone()),
            reset,
        )?,
        Action::new(
            &format!("forall{k}_a3"),
            Formula::and(fa, Formula::not(fx)),
            vec![(b.clone(), true)],
        )?,
    ];
    extended(i, &[&b, &p], b.clone(), guarded_actions(i, &p), actions)
}

/// Base reduction, then one raise per prefix variable, innermost first,
/// using the resetting universal gadget.
pub fn reduce_qbf(q: &Qbf) -> Result<PlanningInstance> {
    reduce_qbf_with(q, UniversalGadget::Resetting)
}

pub fn reduce_qbf_with(q: &Qbf, gadget: UniversalGadget) -> Result<PlanningInstance> {
    let prefix_vars: Vec<Var> = q.prefix().iter().map(|(_, v)| v.clone()).collect();
    partial_reduction(q.matrix(), &prefix_vars, q.prefix(), gadget)
}

/// Base reduction of `matrix` with `fluents` added to the fluent set, then
/// one raise per entry of `prefix`, innermost first, numbered from 1.
/// Prefix variables left out of `prefix` stay ordinary fluents.
pub fn partial_reduction(
    matrix: &Formula,
    fluents: &[Var],
    prefix: &[(Quantifier, Var)],
    gadget: UniversalGadget,
) -> Result<PlanningInstance> {
    let mut instance = base_instance(matrix, fluents)?;
    for (k, (quant, x)) in prefix.iter().rev().enumerate() {
        instance = match quant {
            Quantifier::Exists => raise_existential(&instance, x, k + 1)?,
            Quantifier::Forall => raise_universal_with(&instance, x, k + 1, gadget)?,
        };
    }
    Ok(instance)
}
