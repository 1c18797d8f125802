//! Method dispatch and run reports.
//!
//! [`solve`] runs one method on one instance and packages the outcome as a
//! [`RunReport`]. Every coverage and cost figure in a report is recomputed
//! from the reported solution.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dp::dp_solve;
use crate::error::{Error, Result};
use crate::exact::{branch_and_bound, ExactOptions, ExactStatus};
use crate::io::{serialize_instance, InstanceFile};
use crate::lp::{build_overlap_lp, build_relaxation, solve_lp, LpSolution};
use crate::model::{coverage, Instance, Requirements, Solution};
use crate::rounding::{round_basic, round_general, round_overlap, RoundingConfig, RoundingOutcome};
use crate::submodular::{budget_search, greedy_maximize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ilp,
    Round,
    RoundGeneral,
    RoundOverlap,
    Dp,
    Greedy,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Ilp,
        Method::Round,
        Method::RoundGeneral,
        Method::RoundOverlap,
        Method::Dp,
        Method::Greedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ilp => "ilp",
            Method::Round => "round",
            Method::RoundGeneral => "round-general",
            Method::RoundOverlap => "round-overlap",
            Method::Dp => "dp",
            Method::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub seed: u64,
    /// Rounding retries; `None` uses the default for `n`.
    pub rounds: Option<usize>,
    pub epsilon: f64,
    /// Coverage fraction for the greedy budget search.
    pub alpha: f64,
    pub node_limit: u64,
    /// Record wall time. Off by default so reports are reproducible.
    pub timing: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            rounds: None,
            epsilon: 0.1,
            alpha: 1.0,
            node_limit: ExactOptions::default().node_limit,
            timing: false,
        }
    }
}

impl SolveSettings {
    pub fn rounding(&self) -> RoundingConfig {
        RoundingConfig {
            seed: self.seed,
            rounds: self.rounds,
            epsilon: self.epsilon,
            ..RoundingConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    #[serde(rename = "solved")]
    Solved,
    #[serde(rename = "no feasible solution")]
    Infeasible,
    #[serde(rename = "failure")]
    Failure,
    #[serde(rename = "budget-exhausted")]
    BudgetExhausted,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Solved => "solved",
            RunStatus::Infeasible => "no feasible solution",
            RunStatus::Failure => "failure",
            RunStatus::BudgetExhausted => "budget-exhausted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    /// SHA-256 of the canonical instance serialization.
    pub fingerprint: String,
    pub requirements: Requirements,
    pub status: RunStatus,
    pub solution: Option<Solution>,
    pub cost: Option<usize>,
    pub coverage: Option<Vec<usize>>,
    pub coverage_pct: Option<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
    pub overlap: Option<usize>,
    /// Whether the solution meets every `M_ℓ`.
    pub meets_targets: Option<bool>,
    pub seed: u64,
    pub diagnostics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn has_solution(&self) -> bool {
        self.solution.is_some()
    }

    /// 0 with a solution, 2 without.
    pub fn exit_code(&self) -> i32 {
        if self.has_solution() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per cluster.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method",
            "fingerprint",
            "status",
            "cluster",
            "required",
            "covered",
            "cluster_size",
            "coverage_pct",
            "cost",
            "overlap",
            "seed",
        ])
        .expect("in-memory write");
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for (l, &size) in self.cluster_sizes.iter().enumerate() {
            let covered = self.coverage.as_ref().map(|c| c[l]);
            let pct = self.coverage_pct.as_ref().map(|p| format!("{:.4}", p[l]));
            w.write_record([
                self.method.name().to_string(),
                self.fingerprint.clone(),
                self.status.as_str().to_string(),
                l.to_string(),
                self.requirements.coverage[l].to_string(),
                opt(covered),
                size.to_string(),
                pct.unwrap_or_default(),
                opt(self.cost),
                opt(self.overlap),
                self.seed.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Content hash of an instance, independent of labels.
pub fn fingerprint(instance: &Instance) -> String {
    let text = serialize_instance(&InstanceFile::from_instance(instance.clone()));
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn coverage_pct(covered: &[usize], sizes: &[usize]) -> Vec<f64> {
    covered
        .iter()
        .zip(sizes)
        .map(|(&c, &s)| {
            if s == 0 {
                100.0
            } else {
                100.0 * c as f64 / s as f64
            }
        })
        .collect()
}

struct Outcome {
    status: RunStatus,
    solution: Option<Solution>,
    diagnostics: BTreeMap<String, Value>,
}

impl Outcome {
    fn new(status: RunStatus, solution: Option<Solution>) -> Self {
        Self {
            status,
            solution,
            diagnostics: BTreeMap::new(),
        }
    }

    fn note(mut self, key: &str, value: Value) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

fn need_budget(method: Method, requirements: &Requirements) -> Result<usize> {
    requirements
        .budget
        .ok_or_else(|| Error::Precondition(format!("method {method} needs --budget")))
}

fn lp_note(lp: &LpSolution) -> Value {
    json!({
        "status": lp.status,
        "objective": lp.objective,
        "iterations": lp.iterations,
    })
}

fn rounding_outcome(lp: &LpSolution, out: RoundingOutcome) -> Outcome {
    let status = if out.is_accepted() {
        RunStatus::Solved
    } else {
        RunStatus::Failure
    };
    Outcome::new(status, out.solution)
        .note("lp", lp_note(lp))
        .note("rounds_tried", json!(out.rounds.len()))
        .note("accepted_round", json!(out.accepted_round))
}

fn run(
    method: Method,
    instance: &Instance,
    req: &Requirements,
    settings: &SolveSettings,
) -> Result<Outcome> {
    let cfg = settings.rounding();
    Ok(match method {
        Method::Ilp => {
            let opts = ExactOptions {
                node_limit: settings.node_limit,
            };
            let r = branch_and_bound(instance, req, &opts)?;
            let status = match r.status {
                ExactStatus::Optimal => RunStatus::Solved,
                ExactStatus::Infeasible => RunStatus::Infeasible,
                ExactStatus::BudgetExhausted => RunStatus::BudgetExhausted,
            };
            Outcome::new(status, r.solution)
                .note("nodes", json!(r.nodes))
                .note("root_bound", json!(r.root_bound))
        }
        Method::Round | Method::RoundGeneral => {
            let lp = solve_lp(&build_relaxation(instance, req)?)?;
            if !lp.is_optimal() {
                return Ok(Outcome::new(RunStatus::Infeasible, None).note("lp", lp_note(&lp)));
            }
            let out = if method == Method::Round {
                round_basic(&lp, instance, req, &cfg)?
            } else {
                round_general(&lp, instance, req, &cfg)?
            };
            rounding_outcome(&lp, out)
        }
        Method::RoundOverlap => {
            need_budget(method, req)?;
            if req.overlap_budget.is_none() {
                return Err(Error::Precondition(format!(
                    "method {method} needs --overlap-budget"
                )));
            }
            let lp = solve_lp(&build_overlap_lp(instance, req)?)?;
            if !lp.is_optimal() {
                return Ok(Outcome::new(RunStatus::Infeasible, None).note("lp", lp_note(&lp)));
            }
            rounding_outcome(&lp, round_overlap(&lp, instance, req, &cfg)?)
        }
        Method::Dp => {
            let budget = need_budget(method, req)?;
            let r = dp_solve(instance, budget, req)?;
            let status = if r.feasible {
                RunStatus::Solved
            } else {
                RunStatus::Infeasible
            };
            Outcome::new(status, r.solution)
                .note("weights", json!(r.weights))
                .note("reachable_states", json!(r.reachable_states))
        }
        Method::Greedy => match req.budget {
            Some(budget) => {
                let r = greedy_maximize(instance, &req.coverage, budget)?;
                Outcome::new(RunStatus::Solved, Some(r.solution(instance.k())))
                    .note("saturation", json!(r.eval.total))
            }
            None => match budget_search(instance, &req.coverage, settings.alpha)? {
                Some(s) => Outcome::new(RunStatus::Solved, Some(s.run.solution(instance.k())))
                    .note("saturation", json!(s.run.eval.total))
                    .note("searched_budget", json!(s.budget))
                    .note("probes", json!(s.probes)),
                None => Outcome::new(RunStatus::Failure, None),
            },
        },
    })
}

/// Runs `method` and reports the outcome. Usage errors (missing budget,
/// unsupported `k`, guard refusals) are returned as errors.
pub fn solve(
    method: Method,
    instance: &Instance,
    requirements: &Requirements,
    settings: &SolveSettings,
) -> Result<RunReport> {
    requirements.validate(instance)?;
    let start = Instant::now();
    let out = run(method, instance, requirements, settings)?;
    let elapsed = start.elapsed();
    let covered = out
        .solution
        .as_ref()
        .map(|s| coverage(instance, s))
        .transpose()?;
    let sizes = instance.cluster_sizes().to_vec();
    Ok(RunReport {
        method,
        fingerprint: fingerprint(instance),
        requirements: requirements.clone(),
        status: out.status,
        cost: out.solution.as_ref().map(Solution::cost),
        overlap: out.solution.as_ref().map(Solution::overlap),
        coverage_pct: covered.as_ref().map(|c| coverage_pct(c, &sizes)),
        meets_targets: covered
            .as_ref()
            .map(|c| c.iter().zip(&requirements.coverage).all(|(a, b)| a >= b)),
        coverage: covered,
        cluster_sizes: sizes,
        solution: out.solution,
        seed: settings.seed,
        diagnostics: out.diagnostics,
        wall_time_ms: settings.timing.then_some(elapsed.as_secs_f64() * 1e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance() -> Instance {
        Instance::new(
            2,
            4,
            vec![(0, vec![0]), (0, vec![1]), (1, vec![2]), (1, vec![2, 3])],
        )
        .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_value(m).unwrap(), json!(m.name()));
        }
        assert!("simplex".parse::<Method>().is_err());
    }

    #[test]
    fn zero_targets_cost_nothing() {
        let r = solve(
            Method::Ilp,
            &instance(),
            &Requirements::zeros(2),
            &SolveSettings::default(),
        )
        .unwrap();
        assert_eq!(r.status, RunStatus::Solved);
        assert_eq!(r.cost, Some(0));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn infeasible_rounding_is_reported() {
        let inst = Instance::new(2, 2, vec![(0, vec![0]), (0, vec![]), (1, vec![1])]).unwrap();
        let r = solve(
            Method::Round,
            &inst,
            &Requirements::new(vec![2, 1]),
            &SolveSettings::default(),
        )
        .unwrap();
        assert_eq!(r.status, RunStatus::Infeasible);
        assert_eq!(r.exit_code(), 2);
        assert!(r.to_json().contains("\"no feasible solution\""));
    }

    #[test]
    fn missing_budget_is_an_error() {
        let err = solve(
            Method::Dp,
            &instance(),
            &Requirements::new(vec![1, 1]),
            &SolveSettings::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("--budget"));
    }

    #[test]
    fn figures_come_from_the_solution() {
        let req = Requirements::new(vec![2, 2]).with_budget(4);
        for m in [Method::Ilp, Method::Dp, Method::Greedy, Method::Round] {
            let r = solve(m, &instance(), &req, &SolveSettings::default()).unwrap();
            if let Some(s) = &r.solution {
                assert_eq!(
                    r.coverage.as_ref().unwrap(),
                    &coverage(&instance(), s).unwrap()
                );
                assert_eq!(r.cost, Some(s.cost()));
            }
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let req = Requirements::new(vec![2, 2]);
        let a = solve(Method::Round, &instance(), &req, &SolveSettings::default()).unwrap();
        let b = solve(Method::Round, &instance(), &req, &SolveSettings::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_csv().lines().count(), 3);
    }

    #[test]
    fn fingerprint_ignores_labels() {
        let f = fingerprint(&instance());
        assert_eq!(f.len(), 64);
        assert_ne!(
            f,
            fingerprint(&Instance::new(2, 4, vec![(0, vec![0])]).unwrap())
        );
    }
}
