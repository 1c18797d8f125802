//! Exact solvers: LP-based branch-and-bound for the integer program, the
//! budgeted cover-or-forget baseline, and brute-force enumeration for tiny
//! instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{
    build_budgeted_coverage, build_relaxation, tableau_solution, Direction, LpModel, Outcome,
    Tableau, VarKind, BOUND_TOL, DENSE_CELL_LIMIT, ROW_TOL,
};
use crate::model::{coverage, Instance, Requirements, Solution};
use crate::rounding::{round_rng, BasicScheme};

/// Largest tag universe [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_TAGS: usize = 15;
/// A value within this of 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactStatus {
    Optimal,
    Infeasible,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub status: ExactStatus,
    /// Optimal solution, or the incumbent when the node budget ran out.
    pub solution: Option<Solution>,
    /// Cost for minimization, total coverage for cover-or-forget.
    pub objective: Option<usize>,
    /// LP solves (branch-and-bound) or assignments visited (brute force).
    pub nodes: u64,
    /// Root LP optimum.
    pub root_bound: Option<f64>,
}

impl ExactResult {
    fn infeasible(nodes: u64, root_bound: Option<f64>) -> Self {
        Self {
            status: ExactStatus::Infeasible,
            solution: None,
            objective: None,
            nodes,
            root_bound,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == ExactStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub node_limit: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            node_limit: 1_000_000,
        }
    }
}

/// Per-cluster coverage of every tag subset, indexed by bitmask.
pub(crate) fn subset_coverage(instance: &Instance) -> Vec<Vec<u32>> {
    let m = instance.m();
    let mut table = vec![vec![0u32; 1 << m]; instance.k()];
    for o in instance.objects() {
        let mask: usize = o.tags.iter().map(|&j| 1usize << j).sum();
        if mask == 0 {
            continue;
        }
        for (x, count) in table[o.cluster].iter_mut().enumerate() {
            if x & mask != 0 {
                *count += 1;
            }
        }
    }
    table
}

/// Calls `visit` with the descriptor masks of every disjoint assignment, in a
/// fixed order.
pub(crate) fn for_each_assignment(k: usize, m: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(l: usize, free: usize, masks: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if l + 1 == masks.len() {
            // The last cluster takes any subset of what is left.
            let mut sub = free;
            loop {
                masks[l] = sub;
                visit(masks);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
            return;
        }
        let mut sub = free;
        loop {
            masks[l] = sub;
            rec(l + 1, free & !sub, masks, visit);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    let mut masks = vec![0; k];
    rec(0, (1usize << m) - 1, &mut masks, &mut visit);
}

fn masks_to_solution(masks: &[usize], m: usize) -> Solution {
    Solution::new(
        masks
            .iter()
            .map(|&x| (0..m).filter(|j| x >> j & 1 == 1).collect())
            .collect(),
    )
}

fn brute_force_guard(instance: &Instance) -> Result<()> {
    if instance.m() > BRUTE_FORCE_MAX_TAGS {
        return Err(Error::TooLarge {
            what: "brute-force tag universe",
            size: instance.m() as u128,
            cap: BRUTE_FORCE_MAX_TAGS as u128,
        });
    }
    Ok(())
}

/// Minimum-cost disjoint descriptors by enumerating all `(k+1)^m`
/// assignments. Refused for `m > 15`.
pub fn brute_force(instance: &Instance, requirements: &Requirements) -> Result<ExactResult> {
    brute_force_guard(instance)?;
    requirements.validate(instance)?;
    let table = subset_coverage(instance);
    let m = instance.m();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut nodes = 0u64;
    for_each_assignment(instance.k(), m, |masks| {
        nodes += 1;
        let cost: usize = masks.iter().map(|x| x.count_ones() as usize).sum();
        if best.as_ref().is_some_and(|(c, _)| *c <= cost) {
            return;
        }
        let ok = masks
            .iter()
            .zip(&table)
            .zip(&requirements.coverage)
            .all(|((&x, t), &need)| t[x] as usize >= need);
        if ok {
            best = Some((cost, masks.to_vec()));
        }
    });
    Ok(match best {
        Some((cost, masks)) => ExactResult {
            status: ExactStatus::Optimal,
            solution: Some(masks_to_solution(&masks, m)),
            objective: Some(cost),
            nodes,
            root_bound: None,
        },
        None => ExactResult::infeasible(nodes, None),
    })
}

/// Maximum total coverage of disjoint descriptors with at most `budget` tags
/// (and at least `minimums[ℓ]` covered per cluster when given), by
/// enumeration. Refused for `m > 15`.
pub fn brute_force_coverage(
    instance: &Instance,
    budget: usize,
    minimums: Option<&[usize]>,
) -> Result<ExactResult> {
    brute_force_guard(instance)?;
    let table = subset_coverage(instance);
    let m = instance.m();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut nodes = 0u64;
    for_each_assignment(instance.k(), m, |masks| {
        nodes += 1;
        let cost: usize = masks.iter().map(|x| x.count_ones() as usize).sum();
        if cost > budget {
            return;
        }
        let covered: Vec<usize> = masks
            .iter()
            .zip(&table)
            .map(|(&x, t)| t[x] as usize)
            .collect();
        if let Some(min) = minimums {
            if covered.iter().zip(min).any(|(c, m)| c < m) {
                return;
            }
        }
        let total = covered.iter().sum();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, masks.to_vec()));
        }
    });
    Ok(match best {
        Some((total, masks)) => ExactResult {
            status: ExactStatus::Optimal,
            solution: Some(masks_to_solution(&masks, m)),
            objective: Some(total),
            nodes,
            root_bound: None,
        },
        None => ExactResult::infeasible(nodes, None),
    })
}

struct Node {
    fixes: Vec<(usize, f64)>,
    bound: f64,
}

struct Search<'a> {
    instance: &'a Instance,
    model: &'a LpModel,
    root: Tableau,
    direction: Direction,
    /// Assignment columns `(column, cluster, tag)`.
    assign: Vec<(usize, usize, usize)>,
    value: &'a dyn Fn(&Solution) -> usize,
    node_limit: u64,
    nodes: u64,
    best: Option<(usize, Solution)>,
}

impl Search<'_> {
    /// Whether a node with LP value `bound` cannot beat the incumbent.
    fn prune(&self, bound: f64) -> bool {
        let Some((best, _)) = &self.best else {
            return false;
        };
        match self.direction {
            Direction::Minimize => (bound - INTEGRALITY_TOL).ceil() >= *best as f64,
            Direction::Maximize => (bound + INTEGRALITY_TOL).floor() <= *best as f64,
        }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.direction {
            Direction::Minimize => a < b,
            Direction::Maximize => a > b,
        }
    }

    fn offer(&mut self, solution: Solution) {
        let v = (self.value)(&solution);
        let improves = match (&self.best, self.direction) {
            (None, _) => true,
            (Some((b, _)), Direction::Minimize) => v < *b,
            (Some((b, _)), Direction::Maximize) => v > *b,
        };
        if improves {
            self.best = Some((v, solution));
        }
    }

    /// Re-solves a node from scratch with the fixes applied as bounds; used
    /// when warm-started values drift past tolerance.
    fn cold_solve(&self, fixes: &[(usize, f64)]) -> Result<Option<Tableau>> {
        let mut model = self.model.clone();
        for &(c, v) in fixes {
            model.vars[c].lower = v;
            model.vars[c].upper = v;
        }
        let mut t = Tableau::new(&model, None);
        let (outcome, _) = t.solve()?;
        Ok((outcome == Outcome::Optimal).then_some(t))
    }

    /// Applies `fixes` on top of `t` and re-optimizes; `None` if infeasible.
    fn solve_child(
        &mut self,
        mut t: Tableau,
        fixes: &[(usize, f64)],
        new: usize,
    ) -> Result<Option<Tableau>> {
        self.nodes += 1;
        for &(c, v) in &fixes[new..] {
            t.fix(c, v);
        }
        let outcome = match t.reoptimize() {
            Ok(o) => o,
            Err(Error::SolverStall { .. }) => return self.cold_solve(fixes),
            Err(e) => return Err(e),
        };
        match outcome {
            Outcome::Optimal => {
                let values = t.values();
                let (b, r) = self.model.max_violation(&values);
                let drift = fixes
                    .iter()
                    .map(|&(c, v)| (values[c] - v).abs())
                    .fold(0.0, f64::max);
                if b.max(drift) > BOUND_TOL || r > ROW_TOL {
                    return self.cold_solve(fixes);
                }
                Ok(Some(t))
            }
            _ => Ok(None),
        }
    }

    fn branch_column(&self, values: &[f64]) -> Option<usize> {
        let mut pick: Option<(usize, f64)> = None;
        for &(c, _, _) in &self.assign {
            let v = values[c];
            if v > INTEGRALITY_TOL && v < 1.0 - INTEGRALITY_TOL {
                let dist = (v - 0.5).abs();
                if pick.is_none_or(|(_, d)| dist < d) {
                    pick = Some((c, dist));
                }
            }
        }
        pick.map(|(c, _)| c)
    }

    fn integral_solution(&self, values: &[f64]) -> Solution {
        let mut descriptors = vec![Vec::new(); self.instance.k()];
        for &(c, l, j) in &self.assign {
            if values[c] > 0.5 {
                descriptors[l].push(j);
            }
        }
        Solution::new(descriptors)
    }

    /// Depth-first search diving into the better child; the other child is
    /// kept as a list of fixes and rebuilt from the root when popped.
    fn run(&mut self) -> Result<bool> {
        let mut stack: Vec<Node> = Vec::new();
        let mut current: Option<(Tableau, Vec<(usize, f64)>)> =
            Some((self.root.clone(), Vec::new()));
        loop {
            let (t, fixes) = match current.take() {
                Some(c) => c,
                None => {
                    let Some(node) = stack.pop() else {
                        return Ok(true);
                    };
                    if self.prune(node.bound) {
                        continue;
                    }
                    if self.nodes >= self.node_limit {
                        return Ok(false);
                    }
                    match self.solve_child(self.root.clone(), &node.fixes, 0)? {
                        Some(t) => (t, node.fixes),
                        None => continue,
                    }
                }
            };
            let bound = t.objective();
            if self.prune(bound) {
                continue;
            }
            let values = t.values();
            let Some(col) = self.branch_column(&values) else {
                let solution = self.integral_solution(&values);
                self.offer(solution);
                continue;
            };
            if self.nodes + 2 > self.node_limit {
                return Ok(false);
            }
            let mut children = Vec::with_capacity(2);
            for v in [1.0, 0.0] {
                let mut f = fixes.clone();
                f.push((col, v));
                let n = fixes.len();
                if let Some(child) = self.solve_child(t.clone(), &f, n)? {
                    let obj = child.objective();
                    if !self.prune(obj) {
                        children.push((child, f, obj));
                    }
                }
            }
            if children.len() == 2 && self.better(children[1].2, children[0].2) {
                children.swap(0, 1);
            }
            let mut it = children.into_iter();
            if let Some(first) = it.next() {
                if let Some((_, f, obj)) = it.next() {
                    stack.push(Node {
                        fixes: f,
                        bound: obj,
                    });
                }
                current = Some((first.0, first.1));
            }
        }
    }
}

fn dense_guard(model: &LpModel) -> Result<()> {
    let cells = model.num_rows() * (model.num_vars() + 2 * model.num_rows());
    if cells > DENSE_CELL_LIMIT {
        return Err(Error::TooLarge {
            what: "branch-and-bound tableau cells",
            size: cells as u128,
            cap: DENSE_CELL_LIMIT as u128,
        });
    }
    Ok(())
}

fn assign_columns(model: &LpModel) -> Vec<(usize, usize, usize)> {
    model
        .vars
        .iter()
        .enumerate()
        .filter_map(|(c, v)| match v.kind {
            VarKind::Assign { cluster, tag } => Some((c, cluster, tag)),
            _ => None,
        })
        .collect()
}

/// Optimal MinConCD descriptors by LP-based branch-and-bound.
///
/// Branches on the most fractional assignment variable (ties to the lowest
/// `(ℓ, j)`), diving into the child with the better LP bound. The incumbent
/// starts from one basic-rounding draw of the root LP when that draw happens
/// to be feasible.
pub fn branch_and_bound(
    instance: &Instance,
    requirements: &Requirements,
    options: &ExactOptions,
) -> Result<ExactResult> {
    requirements.validate(instance)?;
    if !requirements.is_coverable(instance) {
        return Ok(ExactResult::infeasible(0, None));
    }
    let model = build_relaxation(instance, requirements)?;
    dense_guard(&model)?;
    let mut root = Tableau::new(&model, None);
    let (outcome, phase_one) = root.solve()?;
    if outcome != Outcome::Optimal {
        return Ok(ExactResult::infeasible(1, None));
    }
    let root_bound = root.objective();
    let value = |s: &Solution| s.cost();
    let mut search = Search {
        instance,
        model: &model,
        direction: Direction::Minimize,
        assign: assign_columns(&model),
        value: &value,
        node_limit: options.node_limit,
        nodes: 1,
        best: None,
        root,
    };
    let lp = tableau_solution(&model, &search.root, outcome, Some(phase_one));
    let draw = BasicScheme::new(&lp, instance)?.sample(&mut round_rng(0, 0));
    if coverage(instance, &draw)?
        .iter()
        .zip(&requirements.coverage)
        .all(|(c, m)| c >= m)
    {
        search.offer(draw);
    }
    finish(search, Some(root_bound))
}

fn finish(mut search: Search<'_>, root_bound: Option<f64>) -> Result<ExactResult> {
    let complete = search.run()?;
    let nodes = search.nodes;
    Ok(match (search.best.take(), complete) {
        (Some((v, s)), complete) => ExactResult {
            status: if complete {
                ExactStatus::Optimal
            } else {
                ExactStatus::BudgetExhausted
            },
            solution: Some(s),
            objective: Some(v),
            nodes,
            root_bound,
        },
        (None, true) => ExactResult::infeasible(nodes, root_bound),
        (None, false) => ExactResult {
            status: ExactStatus::BudgetExhausted,
            solution: None,
            objective: None,
            nodes,
            root_bound,
        },
    })
}

/// Greedy disjoint descriptors: repeatedly the `(ℓ, j)` adding the most newly
/// covered objects, ties to the lowest `(ℓ, j)`.
fn greedy_coverage(instance: &Instance, budget: usize) -> Solution {
    let (k, m) = (instance.k(), instance.m());
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, o) in instance.objects().iter().enumerate() {
        for &j in &o.tags {
            holders[j].push(i);
        }
    }
    let mut covered = vec![false; instance.n()];
    let mut used = vec![false; m];
    let mut descriptors = vec![Vec::new(); k];
    for _ in 0..budget {
        let mut pick: Option<(usize, usize, usize)> = None;
        for l in 0..k {
            for j in (0..m).filter(|&j| !used[j]) {
                let gain = holders[j]
                    .iter()
                    .filter(|&&i| !covered[i] && instance.object(i).cluster == l)
                    .count();
                if gain > 0 && pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, l, j));
                }
            }
        }
        let Some((_, l, j)) = pick else { break };
        used[j] = true;
        descriptors[l].push(j);
        for &i in &holders[j] {
            if instance.object(i).cluster == l {
                covered[i] = true;
            }
        }
    }
    Solution::new(descriptors)
}

fn maximize_coverage(
    instance: &Instance,
    budget: usize,
    minimums: Option<&[usize]>,
    options: &ExactOptions,
) -> Result<ExactResult> {
    if let Some(min) = minimums {
        Requirements::new(min.to_vec()).validate(instance)?;
        let coverable = instance.coverable_counts();
        if min.iter().zip(&coverable).any(|(m, c)| m > c) {
            return Ok(ExactResult::infeasible(0, None));
        }
    }
    let model = build_budgeted_coverage(instance, budget, minimums)?;
    dense_guard(&model)?;
    let mut root = Tableau::new(&model, None);
    let (outcome, _) = root.solve()?;
    if outcome != Outcome::Optimal {
        return Ok(ExactResult::infeasible(1, None));
    }
    let root_bound = root.objective();
    let value = |s: &Solution| coverage(instance, s).map(|c| c.iter().sum()).unwrap_or(0);
    let mut search = Search {
        instance,
        model: &model,
        direction: Direction::Maximize,
        assign: assign_columns(&model),
        value: &value,
        node_limit: options.node_limit,
        nodes: 1,
        best: None,
        root,
    };
    let greedy = greedy_coverage(instance, budget);
    let meets = match minimums {
        None => true,
        Some(min) => coverage(instance, &greedy)?
            .iter()
            .zip(min)
            .all(|(c, m)| c >= m),
    };
    if meets {
        search.offer(greedy);
    }
    finish(search, Some(root_bound))
}

/// The cover-or-forget baseline: disjoint descriptors with at most `budget`
/// tags maximizing the total number of covered objects, with no per-cluster
/// guarantee.
pub fn cover_or_forget(
    instance: &Instance,
    budget: usize,
    options: &ExactOptions,
) -> Result<ExactResult> {
    maximize_coverage(instance, budget, None, options)
}

/// Like [`cover_or_forget`], but every cluster must still cover at least
/// `minimums[ℓ]` objects; infeasible when no such descriptors fit in the
/// budget.
pub fn max_coverage_with_minimums(
    instance: &Instance,
    budget: usize,
    minimums: &[usize],
    options: &ExactOptions,
) -> Result<ExactResult> {
    maximize_coverage(instance, budget, Some(minimums), options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_solution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, p: f64) -> Instance {
        Instance::new(
            2,
            m,
            (0..n).map(|_| {
                let c = rng.gen_range(0..2);
                let tags: Vec<usize> = (0..m).filter(|_| rng.gen_bool(p)).collect();
                (c, tags)
            }),
        )
        .unwrap()
    }

    #[test]
    fn assignment_enumeration_counts() {
        let mut count = 0;
        for_each_assignment(2, 4, |masks| {
            assert_eq!(masks[0] & masks[1], 0);
            count += 1;
        });
        assert_eq!(count, 81);
        count = 0;
        for_each_assignment(3, 3, |_| count += 1);
        assert_eq!(count, 64);
    }

    #[test]
    fn zero_targets_cost_nothing() {
        let inst = Instance::new(2, 3, vec![(0, vec![0]), (1, vec![1, 2])]).unwrap();
        let req = Requirements::zeros(2);
        for r in [
            brute_force(&inst, &req).unwrap(),
            branch_and_bound(&inst, &req, &ExactOptions::default()).unwrap(),
        ] {
            assert_eq!(r.status, ExactStatus::Optimal);
            assert_eq!(r.objective, Some(0));
            assert_eq!(r.solution.unwrap().cost(), 0);
        }
    }

    #[test]
    fn shared_only_tag_is_infeasible() {
        let inst = Instance::new(2, 1, vec![(0, vec![0]), (1, vec![0])]).unwrap();
        let req = Requirements::new(vec![1, 1]);
        assert_eq!(
            brute_force(&inst, &req).unwrap().status,
            ExactStatus::Infeasible
        );
        assert_eq!(
            branch_and_bound(&inst, &req, &ExactOptions::default())
                .unwrap()
                .status,
            ExactStatus::Infeasible
        );
    }

    #[test]
    fn brute_force_refuses_large_universe() {
        let inst = Instance::new(2, 16, vec![(0, vec![0])]).unwrap();
        assert!(matches!(
            brute_force(&inst, &Requirements::zeros(2)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn disjoint_vocabularies_split_into_two_set_covers() {
        // Cluster 0 uses tags 0..4, cluster 1 tags 4..8.
        let inst = Instance::new(
            2,
            8,
            vec![
                (0, vec![0, 1]),
                (0, vec![1, 2]),
                (0, vec![2, 3]),
                (0, vec![3]),
                (1, vec![4]),
                (1, vec![4, 5]),
                (1, vec![6, 7]),
                (1, vec![5, 7]),
            ],
        )
        .unwrap();
        let req = Requirements::new(vec![4, 4]);
        let half = |l: usize| {
            let objs: Vec<(usize, Vec<usize>)> = inst
                .objects()
                .iter()
                .filter(|o| o.cluster == l)
                .map(|o| (0, o.tags.clone()))
                .collect();
            let one = Instance::new(2, 8, objs).unwrap();
            brute_force(&one, &Requirements::new(vec![4, 0]))
                .unwrap()
                .objective
                .unwrap()
        };
        let expected = half(0) + half(1);
        let got = branch_and_bound(&inst, &req, &ExactOptions::default()).unwrap();
        assert_eq!(got.objective, Some(expected));
        assert_eq!(expected, 4);
    }

    #[test]
    fn branch_and_bound_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let m = rng.gen_range(1..=8);
            let n = rng.gen_range(2..=12);
            let inst = random_instance(&mut rng, n, m, 0.3);
            let cov = inst.coverable_counts();
            let req = Requirements::new(cov.iter().map(|&c| rng.gen_range(0..=c)).collect());
            let bf = brute_force(&inst, &req).unwrap();
            let bb = branch_and_bound(&inst, &req, &ExactOptions::default()).unwrap();
            assert_eq!(bf.status, bb.status, "{inst:?} {req:?}");
            assert_eq!(bf.objective, bb.objective, "{inst:?} {req:?}");
            if let Some(sol) = &bb.solution {
                let report = validate_solution(&inst, &req, sol).unwrap();
                assert!(report.min_con_cd);
                if let Some(root) = bb.root_bound {
                    assert!(root <= sol.cost() as f64 + 1e-6);
                }
            }
        }
    }

    #[test]
    fn node_limit_reports_budget_exhausted() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = random_instance(&mut rng, 30, 12, 0.2);
        let req = Requirements::from_fraction(&inst, 0.7);
        let r = branch_and_bound(&inst, &req, &ExactOptions { node_limit: 1 }).unwrap();
        assert!(matches!(
            r.status,
            ExactStatus::BudgetExhausted | ExactStatus::Infeasible | ExactStatus::Optimal
        ));
        assert!(r.nodes <= 1);
    }

    #[test]
    fn cover_or_forget_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = random_instance(&mut rng, 20, 10, 0.2);
        let zero = cover_or_forget(&inst, 0, &ExactOptions::default()).unwrap();
        assert_eq!(zero.objective, Some(0));
        // A vacuous budget reaches the best disjoint coverage, which can fall
        // short of every coverable object when clusters compete for a tag.
        let all = cover_or_forget(&inst, 10, &ExactOptions::default()).unwrap();
        let best = brute_force_coverage(&inst, usize::MAX, None).unwrap();
        assert_eq!(all.objective, best.objective);
        let private = Instance::new(2, 4, (0..4).map(|i| (i % 2, vec![i]))).unwrap();
        let all = cover_or_forget(&private, 4, &ExactOptions::default()).unwrap();
        assert_eq!(all.objective, Some(4));
    }

    #[test]
    fn cover_or_forget_matches_enumeration_and_grows_with_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 20, 10, 0.15);
            let mut last = 0;
            for b in 0..=5 {
                let bb = cover_or_forget(&inst, b, &ExactOptions::default()).unwrap();
                let bf = brute_force_coverage(&inst, b, None).unwrap();
                assert_eq!(bb.objective, bf.objective);
                let v = bb.objective.unwrap();
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn minimums_variant_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 16, 9, 0.2);
            let min: Vec<usize> = inst.coverable_counts().iter().map(|c| c / 2).collect();
            for b in [2, 4, 6] {
                let bb =
                    max_coverage_with_minimums(&inst, b, &min, &ExactOptions::default()).unwrap();
                let bf = brute_force_coverage(&inst, b, Some(&min)).unwrap();
                assert_eq!(bb.status, bf.status);
                assert_eq!(bb.objective, bf.objective);
            }
        }
    }
}
