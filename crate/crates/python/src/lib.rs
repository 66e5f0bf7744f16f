//! Python bindings for `qraise-core`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qraise_core::abduction as abd;
use qraise_core::default_logic as dl;
use qraise_core::harness::{self, Instance, PrefixPattern, QbfGenSpec, Target};
use qraise_core::logic::{self, Assignment};
use qraise_core::planning as pl;
use qraise_core::Var;

create_exception!(
    qraise,
    QraiseError,
    PyValueError,
    "Parse, contract or shape error; the message starts with its code."
);
create_exception!(
    qraise,
    CapError,
    QraiseError,
    "A brute-force resource cap was exceeded."
);

fn err(e: qraise_core::Error) -> PyErr {
    let message = format!("{}: {e}", e.code());
    if e.is_resource() {
        CapError::new_err(message)
    } else {
        QraiseError::new_err(message)
    }
}

fn target(name: &str) -> PyResult<Target> {
    name.parse().map_err(QraiseError::new_err)
}

fn var(name: &str) -> PyResult<Var> {
    Var::new(name).map_err(err)
}

type CounterexampleRow = (usize, String, Option<bool>, Option<bool>, String);
type GrowthRows = Vec<(usize, usize, usize, usize)>;

fn names(vars: &BTreeSet<Var>) -> Vec<String> {
    vars.iter().map(|v| v.to_string()).collect()
}

/// A propositional formula.
#[pyclass(module = "qraise", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Formula(logic::Formula);

#[pymethods]
impl Formula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        logic::parse_formula(text).map(Formula).map_err(err)
    }

    fn vars(&self) -> Vec<String> {
        names(&self.0.vars())
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    /// Value under `assignment`, a mapping from variable names to booleans.
    fn evaluate(&self, assignment: BTreeMap<String, bool>) -> PyResult<bool> {
        let mut a = Assignment::new();
        for (name, value) in assignment {
            a.set(var(&name)?, value);
        }
        self.0.evaluate(&a).map_err(err)
    }

    fn substitute(&self, name: &str, value: bool) -> PyResult<Formula> {
        Ok(Formula(self.0.substitute(&var(name)?, value)))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.0.to_string())
    }
}

/// A closed quantified boolean formula.
#[pyclass(module = "qraise", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Qbf(logic::Qbf);

#[pymethods]
impl Qbf {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        logic::parse_qbf(text).map(Qbf).map_err(err)
    }

    /// `(quantifier, variable)` pairs, outermost first; quantifiers are
    /// `"exists"` or `"forall"`.
    #[getter]
    fn prefix(&self) -> Vec<(String, String)> {
        self.0
            .prefix()
            .iter()
            .map(|(q, v)| (q.keyword().to_string(), v.to_string()))
            .collect()
    }

    #[getter]
    fn matrix(&self) -> Formula {
        Formula(self.0.matrix().clone())
    }

    #[getter]
    fn shape(&self) -> String {
        self.0.shape()
    }

    fn is_valid(&self) -> PyResult<bool> {
        logic::qbf_valid(&self.0).map_err(err)
    }

    fn to_text(&self) -> String {
        logic::serialize_qbf(&self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Qbf({:?})", self.0.to_string())
    }
}

/// A propositional abduction problem `⟨H, M, T⟩`.
#[pyclass(module = "qraise", frozen, skip_from_py_object)]
#[derive(Clone)]
struct AbductionInstance(abd::AbductionInstance);

#[pymethods]
impl AbductionInstance {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        abd::AbductionInstance::parse(text)
            .map(AbductionInstance)
            .map_err(err)
    }

    #[getter]
    fn hypotheses(&self) -> Vec<String> {
        names(self.0.hypotheses())
    }

    #[getter]
    fn manifestations(&self) -> Vec<String> {
        names(self.0.manifestations())
    }

    #[getter]
    fn theory(&self) -> Vec<Formula> {
        self.0.theory().iter().cloned().map(Formula).collect()
    }

    /// Every explanation, each as a sorted list of hypotheses.
    fn explanations(&self) -> PyResult<Vec<Vec<String>>> {
        Ok(abd::enumerate_explanations(&self.0)
            .map_err(err)?
            .into_iter()
            .map(|e| names(&e.0))
            .collect())
    }

    fn has_explanation(&self) -> PyResult<bool> {
        abd::has_explanation(&self.0).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

/// A Reiter default theory with an optional query variable.
#[pyclass(module = "qraise", frozen, skip_from_py_object)]
#[derive(Clone)]
struct DefaultTheory {
    theory: dl::DefaultTheory,
    query: Option<Var>,
}

#[pymethods]
impl DefaultTheory {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let (theory, query) = dl::DefaultTheory::parse(text).map_err(err)?;
        Ok(DefaultTheory { theory, query })
    }

    #[getter]
    fn query(&self) -> Option<String> {
        self.query.as_ref().map(Var::to_string)
    }

    #[getter]
    fn defaults(&self) -> Vec<String> {
        self.theory
            .defaults()
            .iter()
            .map(|d| d.to_string())
            .collect()
    }

    /// `(generating default indices, consequence formulas)` per extension.
    fn extensions(&self) -> PyResult<Vec<(Vec<usize>, Vec<Formula>)>> {
        Ok(dl::extensions(&self.theory)
            .map_err(err)?
            .into_iter()
            .map(|e| {
                (
                    e.generating,
                    e.consequences.into_iter().map(Formula).collect(),
                )
            })
            .collect())
    }

    /// Whether `formula` (the query when omitted) holds in every extension.
    #[pyo3(signature = (formula=None))]
    fn skeptically_entails(&self, formula: Option<&Formula>) -> PyResult<bool> {
        let goal = match (formula, &self.query) {
            (Some(f), _) => f.0.clone(),
            (None, Some(q)) => logic::Formula::var(q),
            (None, None) => return Err(QraiseError::new_err("E_CONTRACT: theory has no query")),
        };
        Ok(dl::skeptically_entails(&self.theory, &goal)
            .map_err(err)?
            .entailed)
    }

    fn to_text(&self) -> String {
        self.theory.to_text(self.query.as_ref())
    }
}

/// A STRIPS instance with formula preconditions.
#[pyclass(module = "qraise", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PlanningInstance(pl::PlanningInstance);

#[pymethods]
impl PlanningInstance {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        pl::PlanningInstance::parse(text)
            .map(PlanningInstance)
            .map_err(err)
    }

    #[getter]
    fn fluents(&self) -> Vec<String> {
        names(self.0.fluents())
    }

    #[getter]
    fn goal(&self) -> String {
        self.0.goal().to_string()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.0.actions().iter().map(|a| a.name.clone()).collect()
    }

    /// A shortest plan as a list of action names, or `None`.
    fn plan(&self) -> PyResult<Option<Vec<String>>> {
        Ok(pl::plan_exists(&self.0)
            .map_err(err)?
            .map(|p| p.names(&self.0).into_iter().map(str::to_string).collect()))
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

fn wrap(py: Python<'_>, instance: Instance) -> PyResult<Py<PyAny>> {
    Ok(match instance {
        Instance::Abduction(i) => AbductionInstance(i).into_pyobject(py)?.into_any().unbind(),
        Instance::Default(theory, q) => DefaultTheory {
            theory,
            query: Some(q),
        }
        .into_pyobject(py)?
        .into_any()
        .unbind(),
        Instance::Planning(i) => PlanningInstance(i).into_pyobject(py)?.into_any().unbind(),
    })
}

/// Reduces `qbf` to an instance of `target` (`"abduction"`, `"default"` or
/// `"planning"`).
#[pyfunction]
fn reduce(py: Python<'_>, target: &str, qbf: &Qbf) -> PyResult<Py<PyAny>> {
    wrap(
        py,
        harness::reduce(self::target(target)?, &qbf.0).map_err(err)?,
    )
}

/// Solves an instance given as file text; returns `(answer, witness)`.
#[pyfunction]
fn solve(target: &str, text: &str) -> PyResult<(bool, Option<String>)> {
    let instance = Instance::parse(self::target(target)?, text).map_err(err)?;
    let d = harness::solve(&instance).map_err(err)?;
    Ok((d.answer, d.witness))
}

/// Outcome of an equivalence or lemma check.
#[pyclass(module = "qraise", frozen)]
struct CheckReport(harness::CheckReport);

#[pymethods]
impl CheckReport {
    #[getter]
    fn total(&self) -> usize {
        self.0.total
    }

    #[getter]
    fn agreements(&self) -> usize {
        self.0.agreements
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.passed()
    }

    /// `(case, input, expected, actual, detail)` per counterexample.
    #[getter]
    fn counterexamples(&self) -> Vec<CounterexampleRow> {
        self.0
            .counterexamples
            .iter()
            .map(|c| {
                (
                    c.case,
                    self.0.cases[c.case].input.clone(),
                    c.expected,
                    c.actual,
                    c.detail.clone(),
                )
            })
            .collect()
    }

    fn text(&self) -> String {
        self.0.render_text()
    }

    fn machine(&self) -> String {
        self.0.render_machine()
    }

    fn write_fixtures(&self, dir: PathBuf) -> PyResult<Vec<String>> {
        let paths = self
            .0
            .write_fixtures(&dir)
            .map_err(|e| QraiseError::new_err(format!("E_IO: {e}")))?;
        Ok(paths.into_iter().map(|p| p.display().to_string()).collect())
    }
}

/// Runs the equivalence check for `target` on exhaustive or seeded random
/// QBFs. `pattern` is `"ea"`, `"ae"` or `"any"`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (target, seed=0, vars=3, pattern=None, count=500, exhaustive=false, depth=None))]
fn check(
    py: Python<'_>,
    target: &str,
    seed: u64,
    vars: usize,
    pattern: Option<&str>,
    count: usize,
    exhaustive: bool,
    depth: Option<usize>,
) -> PyResult<CheckReport> {
    let t = self::target(target)?;
    let pattern = match pattern {
        None => t.pattern(),
        Some(p) => PrefixPattern::from_code(p)
            .ok_or_else(|| QraiseError::new_err(format!("E_USAGE: unknown pattern `{p}`")))?,
    };
    let spec = if exhaustive {
        QbfGenSpec::exhaustive(vars, pattern, depth.unwrap_or(2))
    } else {
        QbfGenSpec {
            matrix_depth: depth.unwrap_or(4),
            ..QbfGenSpec::random(seed, vars, pattern, count)
        }
    };
    py.detach(|| harness::check_equivalence(t, &spec))
        .map(CheckReport)
        .map_err(err)
}

/// Checks the single-raise merge property of `target` on random instances.
#[pyfunction]
#[pyo3(signature = (target, seed=0, samples=200))]
fn check_lemma(py: Python<'_>, target: &str, seed: u64, samples: usize) -> PyResult<CheckReport> {
    let t = self::target(target)?;
    py.detach(|| harness::check_lemma(t, seed, samples))
        .map(CheckReport)
        .map_err(err)
}

/// Instance sizes after each of `raises` raises: returns
/// `(rows, verdict, detail)` with rows `(raise, vars, items, size)`.
#[pyfunction]
fn growth(target: &str, raises: usize) -> PyResult<(GrowthRows, bool, String)> {
    let table = harness::measure_growth(self::target(target)?, raises).map_err(err)?;
    let rows = table
        .rows
        .iter()
        .map(|r| (r.raise, r.vars, r.items, r.size))
        .collect();
    Ok((rows, table.verdict, table.detail))
}

#[pymodule]
fn qraise(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QraiseError", m.py().get_type::<QraiseError>())?;
    m.add("CapError", m.py().get_type::<CapError>())?;
    m.add_class::<Formula>()?;
    m.add_class::<Qbf>()?;
    m.add_class::<AbductionInstance>()?;
    m.add_class::<DefaultTheory>()?;
    m.add_class::<PlanningInstance>()?;
    m.add_class::<CheckReport>()?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(check_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(growth, m)?)?;
    Ok(())
}
