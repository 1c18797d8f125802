//! Dense-tableau simplex over bounded columns.
//!
//! Every row gets a slack (or, when the slack cannot start feasible, an
//! artificial) column, so the starting basis is a signed identity. Phase one
//! minimizes the artificial mass; phase two the real objective. Nonbasic
//! columns sit at one of their bounds and may flip between them without a
//! pivot. The tableau also supports warm re-optimization after bound changes
//! through a dual simplex, which is what branch-and-bound uses.

use crate::error::{Error, Result};

use super::model::{LpModel, Sense};

pub const BOUND_TOL: f64 = 1e-9;
pub const ROW_TOL: f64 = 1e-7;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const INFEASIBILITY_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const BLAND_AFTER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub(crate) struct Tableau {
    rows: usize,
    cols: usize,
    structural: usize,
    /// `B⁻¹A`, row-major.
    a: Vec<f64>,
    x: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Phase-two costs of the minimization form.
    cost: Vec<f64>,
    /// Reduced costs for whichever phase is running.
    d: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    artificial: Vec<bool>,
    /// Column that formed the starting identity in each row and its sign.
    unit_col: Vec<usize>,
    unit_sign: Vec<f64>,
    /// Sparse rows of the standard form `[A | slacks | artificials] x = b`.
    orig_rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    pub(crate) iterations: usize,
    iteration_limit: usize,
    negate: bool,
}

impl Tableau {
    pub(crate) fn new(model: &LpModel, iteration_limit: Option<usize>) -> Self {
        let rows = model.num_rows();
        let structural = model.num_vars();
        let negate = matches!(model.direction, super::model::Direction::Maximize);

        let mut lower: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
        let mut cost: Vec<f64> = model
            .vars
            .iter()
            .map(|v| if negate { -v.cost } else { v.cost })
            .collect();
        let mut x: Vec<f64> = lower.clone();
        let mut artificial = vec![false; structural];
        let mut orig_rows: Vec<Vec<(usize, f64)>> =
            model.rows.iter().map(|r| r.coeffs.clone()).collect();
        let rhs: Vec<f64> = model.rows.iter().map(|r| r.rhs).collect();

        let mut unit_col = Vec::with_capacity(rows);
        let mut unit_sign = Vec::with_capacity(rows);
        let push_col = |lo: f64,
                        hi: f64,
                        art: bool,
                        lower: &mut Vec<f64>,
                        upper: &mut Vec<f64>,
                        cost: &mut Vec<f64>,
                        x: &mut Vec<f64>,
                        artificial: &mut Vec<bool>| {
            lower.push(lo);
            upper.push(hi);
            cost.push(0.0);
            x.push(0.0);
            artificial.push(art);
            lower.len() - 1
        };

        for (r, row) in model.rows.iter().enumerate() {
            let activity: f64 = row.coeffs.iter().map(|&(c, a)| a * x[c]).sum();
            let residual = row.rhs - activity;
            let slack_sign = match row.sense {
                Sense::Le => Some(1.0),
                Sense::Ge => Some(-1.0),
                Sense::Eq => None,
            };
            let mut unit = None;
            if let Some(sign) = slack_sign {
                let col = push_col(
                    0.0,
                    f64::INFINITY,
                    false,
                    &mut lower,
                    &mut upper,
                    &mut cost,
                    &mut x,
                    &mut artificial,
                );
                orig_rows[r].push((col, sign));
                let value = residual / sign;
                if value >= 0.0 {
                    x[col] = value;
                    unit = Some((col, sign));
                }
            }
            let (col, sign) = match unit {
                Some(u) => u,
                None => {
                    let sign = if residual < 0.0 { -1.0 } else { 1.0 };
                    let col = push_col(
                        0.0,
                        f64::INFINITY,
                        true,
                        &mut lower,
                        &mut upper,
                        &mut cost,
                        &mut x,
                        &mut artificial,
                    );
                    orig_rows[r].push((col, sign));
                    x[col] = residual.abs();
                    (col, sign)
                }
            };
            unit_col.push(col);
            unit_sign.push(sign);
        }

        let cols = lower.len();
        let mut a = vec![0.0; rows * cols];
        for (r, row) in orig_rows.iter().enumerate() {
            let sign = unit_sign[r];
            for &(c, v) in row {
                a[r * cols + c] = v * sign;
            }
        }
        let mut state: Vec<State> = (0..cols).map(|_| State::Lower).collect();
        for &c in &unit_col {
            state[c] = State::Basic;
        }
        Tableau {
            rows,
            cols,
            structural,
            a,
            x,
            lower,
            upper,
            cost,
            d: vec![0.0; cols],
            basis: unit_col.clone(),
            state,
            artificial,
            unit_col,
            unit_sign,
            orig_rows,
            rhs,
            iterations: 0,
            iteration_limit: iteration_limit.unwrap_or(50 * (rows + cols).max(1)),
            negate,
        }
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.d.copy_from_slice(costs);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.cols..(r + 1) * self.cols];
                for (d, &v) in self.d.iter_mut().zip(row) {
                    *d -= cb * v;
                }
            }
        }
        for r in 0..self.rows {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + q];
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..cols).filter(|&j| self.a[r * cols + j] != 0.0).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.a[r * cols + j]).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                row[j] -= f * v;
            }
            row[q] = 0.0;
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                self.d[j] -= dq * v;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = State::Basic;
        self.state[leaving] = if self.x[leaving] >= self.upper[leaving] {
            State::Upper
        } else {
            State::Lower
        };
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j] - self.lower[j] <= 0.0
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            let dir = match self.state[j] {
                State::Basic => continue,
                _ if self.is_fixed(j) => continue,
                State::Lower if self.d[j] < -OPTIMALITY_TOL => 1.0,
                State::Upper if self.d[j] > OPTIMALITY_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = self.d[j].abs();
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    fn stall(&self) -> Error {
        let infeasible = (0..self.rows)
            .filter(|&r| {
                let b = self.basis[r];
                self.x[b] < self.lower[b] - BOUND_TOL || self.x[b] > self.upper[b] + BOUND_TOL
            })
            .count();
        let art_in_basis = self.basis.iter().filter(|&&b| self.artificial[b]).count();
        Error::SolverStall {
            iterations: self.iterations,
            diagnostics: format!(
                "{} rows, {} columns, {} artificial columns basic, {} basic values out of bounds",
                self.rows, self.cols, art_in_basis, infeasible
            ),
        }
    }

    /// Primal simplex on the given costs from the current (primal feasible)
    /// basis.
    fn primal(&mut self, costs: &[f64]) -> Result<Outcome> {
        self.set_costs(costs);
        let cols = self.cols;
        let mut stalled = 0;
        let mut bland = false;
        loop {
            if self.iterations >= self.iteration_limit {
                return Err(self.stall());
            }
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Ok(Outcome::Optimal);
            };

            // First pass: the tightest step over all blocking basics.
            let flip = self.upper[q] - self.lower[q];
            let mut theta = f64::INFINITY;
            for r in 0..self.rows {
                let alpha = self.a[r * cols + q] * dir;
                if let Some(limit) = self.step_limit(r, alpha) {
                    theta = theta.min(limit);
                }
            }
            let leave = if flip <= theta {
                None
            } else {
                // Second pass: among near-ties, the largest pivot (Bland: the
                // lowest basic column).
                let mut pick: Option<(usize, f64)> = None;
                for r in 0..self.rows {
                    let alpha = self.a[r * cols + q] * dir;
                    let Some(limit) = self.step_limit(r, alpha) else {
                        continue;
                    };
                    if limit > theta + RATIO_TIE {
                        continue;
                    }
                    let better = match pick {
                        None => true,
                        Some((pr, pa)) => {
                            if bland {
                                self.basis[r] < self.basis[pr]
                            } else {
                                alpha.abs() > pa
                            }
                        }
                    };
                    if better {
                        pick = Some((r, alpha.abs()));
                    }
                }
                pick.map(|(r, _)| r)
            };
            let step = match leave {
                None => flip,
                Some(r) => {
                    let alpha = self.a[r * cols + q] * dir;
                    self.step_limit(r, alpha).unwrap_or(0.0)
                }
            };
            if step.is_infinite() {
                return Ok(Outcome::Unbounded);
            }

            let gain = step * self.d[q].abs();
            let delta = step * dir;
            self.x[q] += delta;
            if delta != 0.0 {
                for r in 0..self.rows {
                    let v = self.a[r * cols + q];
                    if v != 0.0 {
                        self.x[self.basis[r]] -= delta * v;
                    }
                }
            }
            match leave {
                None => {
                    if dir > 0.0 {
                        self.x[q] = self.upper[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = State::Lower;
                    }
                }
                Some(r) => {
                    let b = self.basis[r];
                    let alpha = self.a[r * cols + q] * dir;
                    self.x[b] = if alpha > 0.0 {
                        self.lower[b]
                    } else {
                        self.upper[b]
                    };
                    self.pivot(r, q);
                }
            }
            self.iterations += 1;

            if gain > 1e-12 {
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled >= BLAND_AFTER {
                    bland = true;
                }
            }
        }
    }

    /// How far the entering column may move before the basic in row `r` hits
    /// a bound, given that the basic moves by `-alpha` per unit step.
    fn step_limit(&self, r: usize, alpha: f64) -> Option<f64> {
        if alpha.abs() <= PIVOT_TOL {
            return None;
        }
        let b = self.basis[r];
        if alpha > 0.0 {
            Some((self.x[b] - self.lower[b]).max(0.0) / alpha)
        } else if self.upper[b].is_finite() {
            Some((self.upper[b] - self.x[b]).max(0.0) / -alpha)
        } else {
            None
        }
    }

    /// Dual simplex from a dual-feasible basis whose basic values may violate
    /// their bounds.
    fn dual(&mut self) -> Result<Outcome> {
        let cols = self.cols;
        loop {
            if self.iterations >= self.iteration_limit {
                return Err(self.stall());
            }
            let mut leave: Option<(usize, f64)> = None;
            let mut worst = BOUND_TOL;
            for r in 0..self.rows {
                let b = self.basis[r];
                let below = self.lower[b] - self.x[b];
                let above = self.x[b] - self.upper[b];
                if below > worst {
                    worst = below;
                    leave = Some((r, self.lower[b]));
                } else if above > worst {
                    worst = above;
                    leave = Some((r, self.upper[b]));
                }
            }
            let Some((r, target)) = leave else {
                return Ok(Outcome::Optimal);
            };
            let b = self.basis[r];
            let increase = target > self.x[b];

            let mut pick: Option<(usize, f64, f64)> = None;
            for j in 0..cols {
                if self.state[j] == State::Basic || self.is_fixed(j) {
                    continue;
                }
                let alpha = self.a[r * cols + j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_b moves by -alpha per unit increase of x_j.
                let eligible = match (self.state[j], increase) {
                    (State::Lower, true) => alpha < 0.0,
                    (State::Upper, true) => alpha > 0.0,
                    (State::Lower, false) => alpha > 0.0,
                    (State::Upper, false) => alpha < 0.0,
                    (State::Basic, _) => false,
                };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs() / alpha.abs();
                let better = match pick {
                    None => true,
                    Some((_, pr, pa)) => {
                        ratio < pr - RATIO_TIE || (ratio <= pr + RATIO_TIE && alpha.abs() > pa)
                    }
                };
                if better {
                    pick = Some((j, ratio, alpha.abs()));
                }
            }
            let Some((q, _, _)) = pick else {
                return Ok(Outcome::Infeasible);
            };
            let alpha = self.a[r * cols + q];
            let delta = (self.x[b] - target) / alpha;
            self.x[q] += delta;
            for i in 0..self.rows {
                let v = self.a[i * cols + q];
                if v != 0.0 {
                    self.x[self.basis[i]] -= delta * v;
                }
            }
            self.x[b] = target;
            self.pivot(r, q);
            self.iterations += 1;
        }
    }

    /// Recomputes basic values from the nonbasic ones through the explicit
    /// basis inverse held in the starting unit columns.
    fn recompute_basics(&mut self) {
        let cols = self.cols;
        let residual: Vec<f64> = self
            .orig_rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &b)| {
                b - row
                    .iter()
                    .filter(|&&(c, _)| self.state[c] != State::Basic)
                    .map(|&(c, v)| v * self.x[c])
                    .sum::<f64>()
            })
            .collect();
        for i in 0..self.rows {
            let value: f64 = (0..self.rows)
                .map(|r| self.a[i * cols + self.unit_col[r]] * self.unit_sign[r] * residual[r])
                .sum();
            let b = self.basis[i];
            let clamped = if value < self.lower[b] && value > self.lower[b] - BOUND_TOL {
                self.lower[b]
            } else if value > self.upper[b] && value < self.upper[b] + BOUND_TOL {
                self.upper[b]
            } else {
                value
            };
            self.x[b] = clamped;
        }
    }

    fn artificial_mass(&self) -> f64 {
        (0..self.cols)
            .filter(|&j| self.artificial[j])
            .map(|j| self.x[j])
            .sum()
    }

    /// Two-phase solve from the starting basis. Returns the outcome and the
    /// phase-one optimum.
    pub(crate) fn solve(&mut self) -> Result<(Outcome, f64)> {
        let phase_one: Vec<f64> = self
            .artificial
            .iter()
            .map(|&a| if a { 1.0 } else { 0.0 })
            .collect();
        let mut infeasibility = 0.0;
        if self.artificial.iter().any(|&a| a) {
            self.primal(&phase_one)?;
            infeasibility = self.artificial_mass();
            if infeasibility > INFEASIBILITY_TOL {
                return Ok((Outcome::Infeasible, infeasibility));
            }
            self.retire_artificials();
        }
        let cost = self.cost.clone();
        let outcome = self.primal(&cost)?;
        if outcome == Outcome::Optimal {
            self.recompute_basics();
            self.set_costs(&cost);
        }
        Ok((outcome, infeasibility))
    }

    /// Fixes every artificial column at zero and pivots basic ones out where
    /// some other column can take the row.
    fn retire_artificials(&mut self) {
        let cols = self.cols;
        for j in 0..cols {
            if self.artificial[j] {
                self.upper[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.x[j] = 0.0;
                    self.state[j] = State::Lower;
                }
            }
        }
        for r in 0..self.rows {
            let b = self.basis[r];
            if !self.artificial[b] {
                continue;
            }
            let mut pick = None;
            let mut best = 1e-7;
            for j in 0..cols {
                if self.state[j] == State::Basic || self.artificial[j] {
                    continue;
                }
                let v = self.a[r * cols + j].abs();
                if v > best {
                    best = v;
                    pick = Some(j);
                }
            }
            if let Some(q) = pick {
                self.x[b] = 0.0;
                self.pivot(r, q);
            }
        }
        self.recompute_basics();
    }

    /// Re-optimizes after bound changes on fixed-at-a-value columns.
    pub(crate) fn reoptimize(&mut self) -> Result<Outcome> {
        match self.dual()? {
            Outcome::Optimal => {}
            other => return Ok(other),
        }
        let cost = self.cost.clone();
        let outcome = self.primal(&cost)?;
        if outcome == Outcome::Optimal {
            self.recompute_basics();
            if (0..self.rows).any(|r| {
                let b = self.basis[r];
                self.x[b] < self.lower[b] - BOUND_TOL || self.x[b] > self.upper[b] + BOUND_TOL
            }) {
                return self.reoptimize();
            }
        }
        Ok(outcome)
    }

    /// Fixes structural column `j` at `value`.
    pub(crate) fn fix(&mut self, j: usize, value: f64) {
        let old = self.x[j];
        self.lower[j] = value;
        self.upper[j] = value;
        if self.state[j] == State::Basic {
            return;
        }
        let delta = value - old;
        self.x[j] = value;
        if delta != 0.0 {
            let cols = self.cols;
            for r in 0..self.rows {
                let v = self.a[r * cols + j];
                if v != 0.0 {
                    self.x[self.basis[r]] -= delta * v;
                }
            }
        }
    }

    /// Structural values.
    pub(crate) fn values(&self) -> Vec<f64> {
        self.x[..self.structural].to_vec()
    }

    /// Objective of the structural values in the model's own sense.
    pub(crate) fn objective(&self) -> f64 {
        let internal: f64 = self.x[..self.structural]
            .iter()
            .zip(&self.cost)
            .map(|(x, c)| x * c)
            .sum();
        if self.negate {
            -internal
        } else {
            internal
        }
    }

    /// Row duals `y` of the minimization form, so that `c - Aᵀy` are the
    /// reduced costs. Maximization models are handled as `min -c·x`.
    pub(crate) fn duals(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let col = self.unit_col[r];
                let c = if self.artificial[col] {
                    0.0
                } else {
                    self.cost[col]
                };
                (c - self.d[col]) / self.unit_sign[r]
            })
            .collect()
    }
}
