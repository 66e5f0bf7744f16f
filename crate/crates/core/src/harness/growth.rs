//! Instance size after each raise, checked against the growth class each
//! reduction is supposed to stay within.

use std::fmt::Write as _;

use super::check::Target;
use super::generate::prefix_vars;
use crate::abduction;
use crate::default_logic;
use crate::error::{Error, Result};
use crate::logic::{Formula, Quantifier, Var};
use crate::planning::{self, UniversalGadget};

/// Growth tables are built without solving, so only memory limits them.
pub const GROWTH_RAISE_CAP: usize = 64;

/// Slack allowed on top of `size(matrix) + n` for planning preconditions.
pub const PRECONDITION_SLACK: usize = 2;

/// Instance measurements after `raise` raises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthRow {
    pub raise: usize,
    /// Variables (abduction, default) or fluents (planning).
    pub vars: usize,
    /// Theory formulas, defaults or actions.
    pub items: usize,
    /// AST node count of the whole instance.
    pub size: usize,
    /// Length of the instance file.
    pub text_len: usize,
    /// Largest precondition, in variable and constant leaves (planning only).
    pub max_precondition: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    pub target: Target,
    pub matrix: Formula,
    pub rows: Vec<GrowthRow>,
    pub verdict: bool,
    pub detail: String,
}

impl GrowthTable {
    /// Differences of `(vars, items, size)` between consecutive rows.
    pub fn deltas(&self) -> Vec<(i64, i64, i64)> {
        self.rows
            .windows(2)
            .map(|w| {
                (
                    w[1].vars as i64 - w[0].vars as i64,
                    w[1].items as i64 - w[0].items as i64,
                    w[1].size as i64 - w[0].size as i64,
                )
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{} growth, matrix {}\n", self.target, self.matrix);
        out.push_str("raise  vars  items  size  text  d_vars  d_items  d_size  max_pre\n");
        let deltas = self.deltas();
        for (k, r) in self.rows.iter().enumerate() {
            let d = if k == 0 { None } else { Some(deltas[k - 1]) };
            let cell = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{:>5} {:>5} {:>6} {:>5} {:>5} {:>7} {:>8} {:>7} {:>8}",
                r.raise,
                r.vars,
                r.items,
                r.size,
                r.text_len,
                cell(d.map(|d| d.0)),
                cell(d.map(|d| d.1)),
                cell(d.map(|d| d.2)),
                r.max_precondition
                    .map_or("-".to_string(), |m| m.to_string()),
            );
        }
        let _ = writeln!(
            out,
            "verdict: {} ({})",
            if self.verdict { "pass" } else { "fail" },
            self.detail
        );
        out
    }
}

fn disjunction(vars: &[Var]) -> Formula {
    vars.iter()
        .map(Formula::var)
        .reduce(Formula::or)
        .unwrap_or_else(Formula::f)
}

fn inner_var() -> Var {
    Var::new("y").expect("well-formed")
}

/// Raises `n` quantifiers one at a time and records the instance after
/// each step. Abduction raises existentials over `∀y`, default logic
/// raises universals over `∃y`, and planning alternates `∃`/`∀` from the
/// inside out. The matrix is the disjunction of all prefix variables.
pub fn measure_growth(target: Target, n: usize) -> Result<GrowthTable> {
    Error::cap("growth measurement raises", GROWTH_RAISE_CAP, n)?;
    let xs = prefix_vars(n);
    let y = inner_var();
    let mut all = xs.clone();
    all.push(y.clone());
    let matrix = disjunction(&all);
    let mut rows = Vec::with_capacity(n + 1);
    match target {
        Target::Abduction => {
            let mut i = abduction::base_reduction(&matrix, &all)?;
            for k in 0..=n {
                if k > 0 {
                    i = abduction::raise_existential(&i, &xs[n - k], k)?;
                }
                rows.push(GrowthRow {
                    raise: k,
                    vars: i.vars().len(),
                    items: i.theory().len(),
                    size: i.theory_size(),
                    text_len: i.to_text().len(),
                    max_precondition: None,
                });
            }
        }
        Target::Default => {
            let (mut t, a) = default_logic::base_reduction(&matrix, &all)?;
            for k in 0..=n {
                if k > 0 {
                    t = default_logic::raise_universal(&t, &xs[n - k], k)?;
                }
                rows.push(GrowthRow {
                    raise: k,
                    vars: t.vars().len(),
                    items: t.defaults().len(),
                    size: t.size(),
                    text_len: t.to_text(Some(&a)).len(),
                    max_precondition: None,
                });
            }
        }
        Target::Planning => {
            let mut i =
                planning::partial_reduction(&matrix, &all, &[], UniversalGadget::Resetting)?;
            for k in 0..=n {
                if k > 0 {
                    let x = &xs[n - k];
                    i = if k % 2 == 1 {
                        planning::raise_existential(&i, x, k)?
                    } else {
                        planning::raise_universal_with(&i, x, k, UniversalGadget::Resetting)?
                    };
                }
                rows.push(GrowthRow {
                    raise: k,
                    vars: i.fluents().len(),
                    items: i.actions().len(),
                    size: i.size(),
                    text_len: i.to_text().len(),
                    max_precondition: Some(i.max_precondition_leaves()),
                });
            }
        }
    }
    let (verdict, detail) = match target {
        Target::Abduction => constant_deltas(&rows),
        Target::Default => quadratic_fit(&rows),
        Target::Planning => planning_bounds(&rows, matrix.leaf_count()),
    };
    Ok(GrowthTable {
        target,
        matrix,
        rows,
        verdict,
        detail,
    })
}

/// The prefix of an `n`-raise planning growth run, outermost first.
pub fn planning_growth_prefix(n: usize) -> Vec<(Quantifier, Var)> {
    prefix_vars(n)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            // raise k = n - i is existential when odd
            let q = if (n - i) % 2 == 1 {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            (q, v)
        })
        .collect()
}

fn constant_deltas(rows: &[GrowthRow]) -> (bool, String) {
    let table = GrowthTable {
        target: Target::Abduction,
        matrix: Formula::t(),
        rows: rows.to_vec(),
        verdict: true,
        detail: String::new(),
    };
    let deltas = table.deltas();
    match deltas.first() {
        None => (true, "no raises".into()),
        Some(first) => {
            let same = deltas.iter().all(|d| d == first);
            let detail = format!(
                "per-raise deltas {}: vars {:+}, formulas {:+}, nodes {:+}",
                if same { "constant" } else { "vary" },
                first.0,
                first.1,
                first.2
            );
            (same, detail)
        }
    }
}

/// Least-squares fit of `size = c0 + c1·n + c2·n²` on the rows; passes when
/// the fit is exact and `c2 > 0`.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Option<[f64; 3]> {
    if points.len() < 3 {
        return None;
    }
    // normal equations A^T A c = A^T y with A = [1, n, n²]
    let mut m = [[0.0f64; 4]; 3];
    for &(x, y) in points {
        let row = [1.0, x, x * x];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += row[r] * row[c];
            }
            m[r][3] += row[r] * y;
        }
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        m.swap(col, pivot);
        if m[col][col].abs() < 1e-12 {
            return None;
        }
        for r in 0..3 {
            if r != col {
                let factor = m[r][col] / m[col][col];
                let pivot_row = m[col];
                for (cell, p) in m[r].iter_mut().zip(pivot_row).skip(col) {
                    *cell -= factor * p;
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

fn quadratic_fit(rows: &[GrowthRow]) -> (bool, String) {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.raise as f64, r.size as f64))
        .collect();
    let Some([c0, c1, c2]) = fit_quadratic(&points) else {
        return (true, "fewer than three points, no fit".into());
    };
    let residual = points
        .iter()
        .map(|&(x, y)| (c0 + c1 * x + c2 * x * x - y).abs())
        .fold(0.0, f64::max);
    let ok = residual < 1e-6 && c2 > 0.0;
    (
        ok,
        format!("size = {c0:.3} + {c1:.3}·n + {c2:.3}·n², max residual {residual:.2e}"),
    )
}

fn planning_bounds(rows: &[GrowthRow], matrix_leaves: usize) -> (bool, String) {
    for r in rows {
        let n = r.raise;
        if r.items > 3 * n + 1 {
            return (
                false,
                format!("{} actions after {n} raises, bound {}", r.items, 3 * n + 1),
            );
        }
        let bound = matrix_leaves + n + PRECONDITION_SLACK;
        let pre = r.max_precondition.unwrap_or(0);
        if pre > bound {
            return (
                false,
                format!("precondition of {pre} leaves after {n} raises, bound {bound}"),
            );
        }
    }
    (
        true,
        format!(
            "actions ≤ 3n+1 and preconditions ≤ {matrix_leaves}+n+{PRECONDITION_SLACK} leaves at every raise"
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{qbf_valid, Qbf};

    #[test]
    fn abduction_deltas_are_constant() {
        let t = measure_growth(Target::Abduction, 5).unwrap();
        assert!(t.verdict, "{}", t.render());
        // x+, x-, _q per raise; five formulas of 18 nodes
        assert!(t.deltas().iter().all(|d| *d == (3, 5, 18)));
        assert_eq!(t.rows.len(), 6);
    }

    #[test]
    fn default_size_is_exactly_quadratic() {
        let t = measure_growth(Target::Default, 5).unwrap();
        assert!(t.verdict, "{}", t.render());
        assert!(t.deltas().iter().all(|d| d.1 == 2));
        let sizes: Vec<i64> = t.rows.iter().map(|r| r.size as i64).collect();
        let second: Vec<i64> = sizes.windows(3).map(|w| w[2] - 2 * w[1] + w[0]).collect();
        assert!(
            second.iter().all(|&s| s == second[0] && s > 0),
            "{second:?}"
        );
    }

    #[test]
    fn planning_within_bounds() {
        let t = measure_growth(Target::Planning, 5).unwrap();
        assert!(t.verdict, "{}", t.render());
        assert!(t.rows.last().unwrap().items <= 16);
    }

    #[test]
    fn planning_growth_prefix_matches_raise_order() {
        let prefix = planning_growth_prefix(3);
        let q = Qbf::new(prefix, disjunction(&prefix_vars(3))).unwrap();
        assert_eq!(q.shape(), "EAE");
        assert!(qbf_valid(&q).unwrap());
    }

    #[test]
    fn quadratic_fit_recovers_coefficients() {
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|n| (n as f64, 3.0 + 2.0 * n as f64 + 0.5 * (n * n) as f64))
            .collect();
        let [c0, c1, c2] = fit_quadratic(&pts).unwrap();
        assert!((c0 - 3.0).abs() < 1e-9 && (c1 - 2.0).abs() < 1e-9 && (c2 - 0.5).abs() < 1e-9);
        assert!(fit_quadratic(&pts[..2]).is_none());
    }

    #[test]
    fn zero_raises_and_cap() {
        for t in Target::ALL {
            let g = measure_growth(t, 0).unwrap();
            assert!(g.verdict);
            assert_eq!(g.rows.len(), 1);
        }
        assert!(measure_growth(Target::Default, GROWTH_RAISE_CAP + 1)
            .unwrap_err()
            .is_resource());
    }
}
