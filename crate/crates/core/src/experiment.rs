//! Parameter sweeps that produce CSV tables.
//!
//! | sweep | columns |
//! |---|---|
//! | coverage-vs-cost | `budget,cluster,covered,cluster_size,coverage_pct,method,seed,status` |
//! | cost-vs-coverage | `coverage_frac,min_cost,feasible,method,status` |
//! | approx-ratio | `budget,ratio,round_coverage_total,opt_coverage_total,seed,round_cost,status` |
//!
//! Grid points run on a thread pool; rows come back in grid order. A point
//! where the exact solver hits its node limit is kept and marked
//! `budget-exhausted`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{branch_and_bound, cover_or_forget, ExactOptions, ExactResult, ExactStatus};
use crate::lp::{build_overlap_lp, build_relaxation, solve_lp};
use crate::model::{coverage, Instance, Requirements, Solution};
use crate::report::coverage_pct;
use crate::rounding::{round_basic, round_rng, OverlapScheme, RoundingConfig};
use crate::submodular::{budget_search, descriptors_of, greedy_order};

/// Rounding draws per point in the approx-ratio sweep.
pub const EXPERIMENT_ROUNDS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` lets the pool decide.
    pub jobs: Option<usize>,
    pub exact: ExactOptions,
}

impl SweepOptions {
    fn run<T: Send>(&self, work: impl FnOnce() -> T + Send) -> Result<T> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            builder = builder.num_threads(j.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
        Ok(pool.install(work))
    }
}

/// `start, start+step, …` up to and including `end`.
pub fn grid(start: usize, end: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || start > end {
        return Err(Error::Precondition(format!(
            "empty grid {start}:{end}:{step}"
        )));
    }
    Ok((start..=end).step_by(step).collect())
}

fn status_of(r: &ExactResult) -> &'static str {
    match r.status {
        ExactStatus::Optimal => "optimal",
        ExactStatus::Infeasible => "infeasible",
        ExactStatus::BudgetExhausted => "budget-exhausted",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageRow {
    pub budget: usize,
    pub cluster: usize,
    pub covered: usize,
    pub cluster_size: usize,
    pub coverage_pct: f64,
    pub method: &'static str,
    pub seed: u64,
    pub status: &'static str,
}

fn coverage_rows(
    inst: &Instance,
    budget: usize,
    method: &'static str,
    solution: &Solution,
    seed: u64,
    status: &'static str,
) -> Result<Vec<CoverageRow>> {
    let covered = coverage(inst, solution)?;
    let pct = coverage_pct(&covered, inst.cluster_sizes());
    Ok((0..inst.k())
        .map(|l| CoverageRow {
            budget,
            cluster: l,
            covered: covered[l],
            cluster_size: inst.cluster_sizes()[l],
            coverage_pct: pct[l],
            method,
            seed,
            status,
        })
        .collect())
}

/// Per-cluster coverage of cover-or-forget and of saturation greedy (with
/// `targets`) at each budget.
pub fn coverage_vs_cost(
    inst: &Instance,
    budgets: &[usize],
    targets: &[usize],
    seed: u64,
    opts: &SweepOptions,
) -> Result<Vec<CoverageRow>> {
    let order = greedy_order(inst, targets)?;
    let points: Vec<Result<Vec<CoverageRow>>> = opts.run(|| {
        budgets
            .par_iter()
            .map(|&b| {
                let exact = cover_or_forget(inst, b, &opts.exact)?;
                let empty = Solution::empty(inst.k());
                let sol = exact.solution.as_ref().unwrap_or(&empty);
                let mut rows =
                    coverage_rows(inst, b, "cover-or-forget", sol, seed, status_of(&exact))?;
                let greedy = order.iter().take(b).copied().collect::<Vec<_>>();
                let sol = descriptors_of(&greedy, inst.k());
                rows.extend(coverage_rows(inst, b, "greedy", &sol, seed, "heuristic")?);
                Ok(rows)
            })
            .collect()
    })?;
    Ok(points.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostRow {
    pub coverage_frac: f64,
    pub min_cost: Option<usize>,
    pub feasible: bool,
    pub method: &'static str,
    pub status: &'static str,
}

/// Cost each method needs to reach `M_ℓ = ⌈f·|C_ℓ|⌉` for each fraction `f`:
/// the exact optimum, one basic rounding run and the greedy budget search.
pub fn cost_vs_coverage(
    inst: &Instance,
    fractions: &[f64],
    seed: u64,
    opts: &SweepOptions,
) -> Result<Vec<CostRow>> {
    let points: Vec<Result<Vec<CostRow>>> = opts.run(|| {
        fractions
            .par_iter()
            .map(|&f| {
                let req = Requirements::from_fraction(inst, f);
                let exact = branch_and_bound(inst, &req, &opts.exact)?;
                let mut rows = vec![CostRow {
                    coverage_frac: f,
                    min_cost: exact.objective,
                    feasible: exact.solution.is_some(),
                    method: "ilp",
                    status: status_of(&exact),
                }];
                let lp = solve_lp(&build_relaxation(inst, &req)?)?;
                let round = if lp.is_optimal() {
                    let out = round_basic(&lp, inst, &req, &RoundingConfig::with_seed(seed))?;
                    (
                        out.solution.as_ref().map(|s| s.cost()),
                        if out.is_accepted() {
                            "accepted"
                        } else {
                            "failure"
                        },
                    )
                } else {
                    (None, "infeasible")
                };
                rows.push(CostRow {
                    coverage_frac: f,
                    min_cost: round.0,
                    feasible: round.0.is_some(),
                    method: "round",
                    status: round.1,
                });
                let greedy = budget_search(inst, &req.coverage, 1.0)?;
                rows.push(CostRow {
                    coverage_frac: f,
                    min_cost: greedy.as_ref().map(|g| g.budget),
                    feasible: greedy.is_some(),
                    method: "greedy",
                    status: if greedy.is_some() {
                        "heuristic"
                    } else {
                        "failure"
                    },
                });
                Ok(rows)
            })
            .collect()
    })?;
    Ok(points.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub budget: usize,
    pub ratio: Option<f64>,
    pub round_coverage_total: Option<usize>,
    pub opt_coverage_total: Option<usize>,
    pub seed: u64,
    pub round_cost: Option<usize>,
    pub status: &'static str,
}

impl RatioRow {
    fn without_ratio(budget: usize, seed: u64, status: &'static str) -> Self {
        Self {
            budget,
            ratio: None,
            round_coverage_total: None,
            opt_coverage_total: None,
            seed,
            round_cost: None,
            status,
        }
    }
}

/// One approx-ratio point.
///
/// Solves the budgeted LP (targets `M_ℓ`, at most `budget` tags, disjoint
/// descriptors), draws [`EXPERIMENT_ROUNDS`] roundings of it and keeps the
/// accepted draw covering the most objects. The ratio divides that coverage
/// by the cover-or-forget optimum at the draw's own cost. Points where the
/// LP is infeasible are marked `infeasible` and carry no ratio.
pub fn ratio_point(
    inst: &Instance,
    targets: &Requirements,
    budget: usize,
    seed: u64,
    exact: &ExactOptions,
) -> Result<RatioRow> {
    if inst.k() != 2 {
        return Err(Error::Unsupported(format!(
            "approx-ratio sweep needs k = 2, got {}",
            inst.k()
        )));
    }
    let req = Requirements::new(targets.coverage.clone())
        .with_budget(budget)
        .with_overlap_budget(0);
    let lp = solve_lp(&build_overlap_lp(inst, &req)?)?;
    if !lp.is_optimal() {
        return Ok(RatioRow::without_ratio(budget, seed, "infeasible"));
    }
    let scheme = OverlapScheme::new(&lp, inst)?;
    let mut best: Option<(usize, usize)> = None;
    for round in 0..EXPERIMENT_ROUNDS {
        let s = scheme.sample(&mut round_rng(seed, round));
        let covered = coverage(inst, &s)?;
        if !OverlapScheme::accepts(&covered, s.cost(), s.overlap(), &req) {
            continue;
        }
        let total: usize = covered.iter().sum();
        if best.is_none_or(|(t, _)| total > t) {
            best = Some((total, s.cost()));
        }
    }
    let Some((total, cost)) = best else {
        return Ok(RatioRow::without_ratio(budget, seed, "failure"));
    };
    let opt = cover_or_forget(inst, cost, exact)?;
    let opt_total = opt.objective.unwrap_or(0);
    Ok(RatioRow {
        budget,
        ratio: Some(if opt_total == 0 {
            1.0
        } else {
            total as f64 / opt_total as f64
        }),
        round_coverage_total: Some(total),
        opt_coverage_total: opt.objective,
        seed,
        round_cost: Some(cost),
        status: status_of(&opt),
    })
}

/// [`ratio_point`] over every `(seed, budget)` pair, seeds outermost.
pub fn approx_ratio(
    inst: &Instance,
    targets: &Requirements,
    budgets: &[usize],
    seeds: &[u64],
    opts: &SweepOptions,
) -> Result<Vec<RatioRow>> {
    let points: Vec<(u64, usize)> = seeds
        .iter()
        .flat_map(|&s| budgets.iter().map(move |&b| (s, b)))
        .collect();
    opts.run(|| {
        points
            .par_iter()
            .map(|&(s, b)| ratio_point(inst, targets, b, s, &opts.exact))
            .collect()
    })?
}

/// Serializes rows with a header, even when there are none.
pub fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Precondition(format!("csv: {e}"))
}

pub const COVERAGE_HEADER: &[&str] = &[
    "budget",
    "cluster",
    "covered",
    "cluster_size",
    "coverage_pct",
    "method",
    "seed",
    "status",
];
pub const COST_HEADER: &[&str] = &["coverage_frac", "min_cost", "feasible", "method", "status"];
pub const RATIO_HEADER: &[&str] = &[
    "budget",
    "ratio",
    "round_coverage_total",
    "opt_coverage_total",
    "seed",
    "round_cost",
    "status",
];
