use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Requirements};

/// What an LP column stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    /// `x_ℓ(j)`: tag `tag` is placed in the descriptor of `cluster`.
    Assign { cluster: usize, tag: usize },
    /// `z(i)`: object `object` is covered.
    Cover { object: usize },
    /// `y(j)`: tag `tag` is shared by both descriptors.
    Overlap { tag: usize },
    /// A column with no problem meaning (hand-built models).
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Column layout of the models built from an instance, so solutions can be
/// read back by meaning rather than by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub has_overlap: bool,
}

impl Layout {
    pub fn assign(&self, cluster: usize, tag: usize) -> usize {
        cluster * self.m + tag
    }

    pub fn cover(&self, object: usize) -> usize {
        self.k * self.m + object
    }

    pub fn overlap(&self, tag: usize) -> usize {
        debug_assert!(self.has_overlap);
        self.k * self.m + self.n + tag
    }
}

/// A linear program over bounded columns with sparse rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub direction: Direction,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub layout: Option<Layout>,
}

impl LpModel {
    pub fn new(direction: Direction) -> Self {
        LpModel {
            direction,
            vars: Vec::new(),
            rows: Vec::new(),
            layout: None,
        }
    }

    pub fn add_var(&mut self, kind: VarKind, lower: f64, upper: f64, cost: f64) -> usize {
        self.vars.push(Variable {
            kind,
            lower,
            upper,
            cost,
        });
        self.vars.len() - 1
    }

    /// Adds a row. Coefficients on the same column are merged and zero
    /// entries dropped.
    pub fn add_row(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        let mut coeffs: Vec<(usize, f64)> = coeffs.into_iter().collect();
        coeffs.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (c, a) in coeffs {
            match merged.last_mut() {
                Some((last, acc)) if *last == c => *acc += a,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            coeffs: merged,
            sense,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    /// Checks the model invariants: rows reference declared columns without
    /// duplicates, and every column has `lower <= upper`.
    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::Precondition(format!(
                    "column {j} has bounds [{}, {}]",
                    v.lower, v.upper
                )));
            }
            if !v.lower.is_finite() {
                return Err(Error::Unsupported(format!(
                    "column {j} has an infinite lower bound"
                )));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let mut prev = None;
            for &(c, a) in &row.coeffs {
                if c >= self.vars.len() {
                    return Err(Error::Precondition(format!(
                        "row {r} references undeclared column {c}"
                    )));
                }
                if prev == Some(c) {
                    return Err(Error::Precondition(format!(
                        "row {r} has a duplicate entry for column {c}"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Precondition(format!("row {r} has coefficient {a}")));
                }
                prev = Some(c);
            }
        }
        Ok(())
    }

    /// Objective value of `values` in the model's own sense.
    pub fn objective_of(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.cost * x).sum()
    }

    /// Row activities `a_r · values`.
    pub fn activities(&self, values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(c, a)| a * values[c]).sum())
            .collect()
    }

    /// The largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> (f64, f64) {
        let bound = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        let row = self
            .rows
            .iter()
            .zip(self.activities(values))
            .map(|(r, act)| match r.sense {
                Sense::Ge => (r.rhs - act).max(0.0),
                Sense::Le => (act - r.rhs).max(0.0),
                Sense::Eq => (act - r.rhs).abs(),
            })
            .fold(0.0, f64::max);
        (bound, row)
    }
}

fn push_assign_and_cover(
    model: &mut LpModel,
    instance: &Instance,
    assign_cost: f64,
    cover_cost: f64,
) {
    for l in 0..instance.k() {
        for j in 0..instance.m() {
            model.add_var(
                VarKind::Assign { cluster: l, tag: j },
                0.0,
                1.0,
                assign_cost,
            );
        }
    }
    for i in 0..instance.n() {
        model.add_var(VarKind::Cover { object: i }, 0.0, 1.0, cover_cost);
    }
}

/// For every object: `Σ_{j ∈ t_i} x_ℓ(j) - z(i) >= 0`, where `ℓ` is the
/// object's own cluster. Emitted cluster-major, then by object index.
fn push_cover_rows(model: &mut LpModel, instance: &Instance, layout: Layout) {
    for l in 0..instance.k() {
        for i in instance.members(l) {
            let o = instance.object(i);
            let coeffs = o
                .tags
                .iter()
                .map(|&t| (layout.assign(l, t), 1.0))
                .chain(std::iter::once((layout.cover(i), -1.0)));
            model.add_row(coeffs, Sense::Ge, 0.0);
        }
    }
}

fn push_target_rows(model: &mut LpModel, instance: &Instance, layout: Layout, targets: &[usize]) {
    for (l, &target) in targets.iter().enumerate() {
        let coeffs = instance.members(l).map(|i| (layout.cover(i), 1.0));
        model.add_row(coeffs, Sense::Ge, target as f64);
    }
}

/// LP relaxation of the minimum-cost formulation:
///
/// ```text
/// min  Σ_ℓ Σ_j x_ℓ(j)
/// s.t. Σ_{j ∈ t_i} x_ℓ(j) >= z(i)      for every object i in C_ℓ
///      Σ_{i ∈ C_ℓ} z(i) >= M_ℓ          for every cluster
///      Σ_ℓ x_ℓ(j) <= 1                  for every tag
///      0 <= x, z <= 1
/// ```
///
/// The budget, if any, is ignored: cost is the objective.
pub fn build_relaxation(instance: &Instance, requirements: &Requirements) -> Result<LpModel> {
    requirements.validate(instance)?;
    let layout = Layout {
        k: instance.k(),
        m: instance.m(),
        n: instance.n(),
        has_overlap: false,
    };
    let mut model = LpModel::new(Direction::Minimize);
    model.layout = Some(layout);
    push_assign_and_cover(&mut model, instance, 1.0, 0.0);
    push_cover_rows(&mut model, instance, layout);
    push_target_rows(&mut model, instance, layout, &requirements.coverage);
    for j in 0..instance.m() {
        let coeffs = (0..instance.k()).map(|l| (layout.assign(l, j), 1.0));
        model.add_row(coeffs, Sense::Le, 1.0);
    }
    Ok(model)
}

/// LP for the two-cluster overlap variant: maximize total coverage under a
/// tag budget `B` while at most `B_o` tags (fractionally) sit in both
/// descriptors.
pub fn build_overlap_lp(instance: &Instance, requirements: &Requirements) -> Result<LpModel> {
    if instance.k() != 2 {
        return Err(Error::Unsupported(format!(
            "the overlap LP is defined for 2 clusters, got {}",
            instance.k()
        )));
    }
    requirements.validate(instance)?;
    let budget = requirements
        .budget
        .ok_or_else(|| Error::InvalidRequirements("the overlap LP needs a budget".into()))?;
    let overlap_budget = requirements.overlap_budget.ok_or_else(|| {
        Error::InvalidRequirements("the overlap LP needs an overlap budget".into())
    })?;
    let layout = Layout {
        k: 2,
        m: instance.m(),
        n: instance.n(),
        has_overlap: true,
    };
    let mut model = LpModel::new(Direction::Maximize);
    model.layout = Some(layout);
    push_assign_and_cover(&mut model, instance, 0.0, 1.0);
    for j in 0..instance.m() {
        model.add_var(VarKind::Overlap { tag: j }, 0.0, 1.0, 0.0);
    }
    push_cover_rows(&mut model, instance, layout);
    let all_assign = (0..2).flat_map(|l| (0..instance.m()).map(move |j| (l, j)));
    model.add_row(
        all_assign.map(|(l, j)| (layout.assign(l, j), 1.0)),
        Sense::Le,
        budget as f64,
    );
    push_target_rows(&mut model, instance, layout, &requirements.coverage);
    for j in 0..instance.m() {
        model.add_row(
            [
                (layout.assign(0, j), 1.0),
                (layout.assign(1, j), 1.0),
                (layout.overlap(j), -1.0),
            ],
            Sense::Le,
            1.0,
        );
    }
    model.add_row(
        (0..instance.m()).map(|j| (layout.overlap(j), 1.0)),
        Sense::Le,
        overlap_budget as f64,
    );
    Ok(model)
}

/// LP relaxation of the budgeted coverage problem with disjoint descriptors:
/// maximize `Σ_i z(i)` subject to `Σ x <= budget`, optionally with
/// per-cluster minimums. With no minimums this is the cover-or-forget LP.
pub fn build_budgeted_coverage(
    instance: &Instance,
    budget: usize,
    minimums: Option<&[usize]>,
) -> Result<LpModel> {
    if let Some(mins) = minimums {
        Requirements::new(mins.to_vec()).validate(instance)?;
    }
    let layout = Layout {
        k: instance.k(),
        m: instance.m(),
        n: instance.n(),
        has_overlap: false,
    };
    let mut model = LpModel::new(Direction::Maximize);
    model.layout = Some(layout);
    push_assign_and_cover(&mut model, instance, 0.0, 1.0);
    push_cover_rows(&mut model, instance, layout);
    if let Some(mins) = minimums {
        push_target_rows(&mut model, instance, layout, mins);
    }
    model.add_row(
        (0..layout.k * layout.m).map(|c| (c, 1.0)),
        Sense::Le,
        budget as f64,
    );
    for j in 0..instance.m() {
        let coeffs = (0..instance.k()).map(|l| (layout.assign(l, j), 1.0));
        model.add_row(coeffs, Sense::Le, 1.0);
    }
    Ok(model)
}
