//! Linear relaxations of the descriptor problems and the solver behind them.
//!
//! [`build_relaxation`] and [`build_overlap_lp`] emit an [`LpModel`] with a
//! deterministic column order (assignments cluster-major, then covers, then
//! overlaps). [`solve_lp`] runs the in-crate dense simplex; models too large
//! for a dense tableau go to a sparse revised simplex instead.

mod export;
mod model;
pub(crate) mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use export::write_lp_format;
pub use model::{
    build_budgeted_coverage, build_overlap_lp, build_relaxation, Direction, Layout, LpModel, Row,
    Sense, VarKind, Variable,
};
pub use simplex::{BOUND_TOL, INFEASIBILITY_TOL, OPTIMALITY_TOL, ROW_TOL};

pub(crate) use simplex::{Outcome, Tableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// Dense tableau when it fits under [`DENSE_CELL_LIMIT`], sparse otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// Largest `rows × columns` (slacks included) handed to the dense tableau.
pub const DENSE_CELL_LIMIT: usize = 16_000_000;

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub backend: Backend,
    /// Pivot cap; defaults to `50·(rows + columns)`.
    pub iteration_limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the model's own sense; NaN unless optimal.
    pub objective: f64,
    pub values: Vec<f64>,
    pub activities: Vec<f64>,
    /// Row duals of the minimization form (`c - Aᵀy` are reduced costs;
    /// maximization models are read as `min -c·x`). Dense backend only.
    pub duals: Option<Vec<f64>>,
    /// Phase-one optimum: the artificial mass left when infeasible.
    pub phase_one: Option<f64>,
    pub iterations: usize,
    pub layout: Option<Layout>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `x_ℓ(j)`.
    pub fn assign(&self, cluster: usize, tag: usize) -> f64 {
        self.values[self.layout().assign(cluster, tag)]
    }

    /// `z(i)`.
    pub fn cover(&self, object: usize) -> f64 {
        self.values[self.layout().cover(object)]
    }

    /// `y(j)`.
    pub fn overlap(&self, tag: usize) -> f64 {
        self.values[self.layout().overlap(tag)]
    }

    fn layout(&self) -> Layout {
        self.layout
            .expect("solution of a hand-built model has no problem layout")
    }

    /// Largest violation of the optimality conditions implied by the duals:
    /// reduced-cost signs against where each column sits, row-dual signs
    /// against row senses, and complementary slackness on inactive rows.
    /// Recomputed from the sparse model, independent of the tableau.
    pub fn optimality_residual(&self, model: &LpModel) -> Option<f64> {
        let duals = self.duals.as_ref()?;
        let sign = match model.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let mut reduced: Vec<f64> = model.vars.iter().map(|v| sign * v.cost).collect();
        for (row, &y) in model.rows.iter().zip(duals) {
            for &(c, a) in &row.coeffs {
                reduced[c] -= a * y;
            }
        }
        let scale = 1e-6;
        let mut worst: f64 = 0.0;
        for ((v, &x), &d) in model.vars.iter().zip(&self.values).zip(&reduced) {
            let at_lower = (x - v.lower).abs() <= scale;
            let at_upper = (v.upper - x).abs() <= scale;
            let violation = match (at_lower, at_upper) {
                (true, true) => 0.0,
                (true, false) => (-d).max(0.0),
                (false, true) => d.max(0.0),
                (false, false) => d.abs(),
            };
            worst = worst.max(violation);
        }
        for ((row, &y), &act) in model.rows.iter().zip(duals).zip(&self.activities) {
            let slack = (act - row.rhs).abs();
            let sign_violation = match row.sense {
                Sense::Ge => (-y).max(0.0),
                Sense::Le => y.max(0.0),
                Sense::Eq => 0.0,
            };
            worst = worst.max(sign_violation);
            if slack > scale {
                worst = worst.max(y.abs());
            }
        }
        Some(worst)
    }
}

pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    solve_lp_with(model, SolveOptions::default())
}

pub fn solve_lp_with(model: &LpModel, options: SolveOptions) -> Result<LpSolution> {
    model.validate()?;
    let cells = model.num_rows() * (model.num_vars() + 2 * model.num_rows());
    let dense = match options.backend {
        Backend::Dense => true,
        Backend::Sparse => false,
        Backend::Auto => cells <= DENSE_CELL_LIMIT,
    };
    let solution = if dense {
        solve_dense(model, options.iteration_limit)?
    } else {
        solve_sparse(model)?
    };
    if solution.is_optimal() {
        let (bound, row) = model.max_violation(&solution.values);
        if bound > BOUND_TOL || row > ROW_TOL {
            return Err(Error::Numerical(format!(
                "optimal point violates bounds by {bound:e} and rows by {row:e}"
            )));
        }
    }
    Ok(solution)
}

fn solve_dense(model: &LpModel, iteration_limit: Option<usize>) -> Result<LpSolution> {
    let mut tableau = Tableau::new(model, iteration_limit);
    let (outcome, phase_one) = tableau.solve()?;
    Ok(tableau_solution(model, &tableau, outcome, Some(phase_one)))
}

pub(crate) fn tableau_solution(
    model: &LpModel,
    tableau: &Tableau,
    outcome: Outcome,
    phase_one: Option<f64>,
) -> LpSolution {
    let values = tableau.values();
    let status = match outcome {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Infeasible => LpStatus::Infeasible,
        Outcome::Unbounded => LpStatus::Unbounded,
    };
    let optimal = status == LpStatus::Optimal;
    LpSolution {
        status,
        objective: if optimal {
            tableau.objective()
        } else {
            f64::NAN
        },
        activities: model.activities(&values),
        values,
        duals: optimal.then(|| tableau.duals()),
        phase_one,
        iterations: tableau.iterations,
        layout: model.layout,
    }
}

fn solve_sparse(model: &LpModel) -> Result<LpSolution> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

    let direction = match model.direction {
        Direction::Minimize => OptimizationDirection::Minimize,
        Direction::Maximize => OptimizationDirection::Maximize,
    };
    let mut problem = Problem::new(direction);
    let columns: Vec<_> = model
        .vars
        .iter()
        .map(|v| problem.add_var(v.cost, (v.lower, v.upper)))
        .collect();
    for row in &model.rows {
        let op = match row.sense {
            Sense::Ge => ComparisonOp::Ge,
            Sense::Le => ComparisonOp::Le,
            Sense::Eq => ComparisonOp::Eq,
        };
        let expr: Vec<_> = row.coeffs.iter().map(|&(c, a)| (columns[c], a)).collect();
        problem.add_constraint(expr, op, row.rhs);
    }
    let failed = |status| LpSolution {
        status,
        objective: f64::NAN,
        values: model.vars.iter().map(|v| v.lower).collect(),
        activities: Vec::new(),
        duals: None,
        phase_one: None,
        iterations: 0,
        layout: model.layout,
    };
    match problem.solve() {
        Ok(SolveOutcome::Solution(solution)) => {
            let mut values: Vec<f64> = columns.iter().map(|&c| solution.var_value(c)).collect();
            for (x, v) in values.iter_mut().zip(&model.vars) {
                *x = x.clamp(v.lower, v.upper);
            }
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: model.objective_of(&values),
                activities: model.activities(&values),
                values,
                duals: None,
                phase_one: None,
                iterations: solution.stats().lp_iterations as usize,
                layout: model.layout,
            })
        }
        Ok(SolveOutcome::Interrupted(_)) => Err(Error::SolverStall {
            iterations: 0,
            diagnostics: "sparse backend interrupted".into(),
        }),
        Err(microlp::Error::Infeasible) => Ok(failed(LpStatus::Infeasible)),
        Err(microlp::Error::Unbounded) => Ok(failed(LpStatus::Unbounded)),
        Err(e) => Err(Error::Numerical(format!("sparse backend: {e}"))),
    }
}
