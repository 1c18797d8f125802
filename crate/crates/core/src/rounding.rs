//! Randomized rounding of LP optima into descriptors.
//!
//! Three schemes share one retry loop: [`round_basic`] halves the relaxation
//! optimum and assigns each tag by one categorical draw, [`round_general`]
//! first samples a sub-cluster by `z*` and rescales `x*` against it, and
//! [`round_overlap`] rounds the two-cluster overlap LP with a four-way draw
//! per tag. Each round draws from its own stream of a seeded ChaCha
//! generator, so any round can be replayed on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LpSolution;
use crate::model::{coverage, stats, Instance, Requirements, Solution};

/// Slack allowed on probabilities before they count as out of range.
pub const PROBABILITY_SLACK: f64 = 1e-9;
/// Slack on the cost test against the fractional LP objective.
pub const COST_SLACK: f64 = 1e-7;

pub type RoundRng = ChaCha8Rng;

/// Generator for round `round` of a run seeded with `seed`.
pub fn round_rng(seed: u64, round: usize) -> RoundRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    rng
}

/// Default retry count: `⌈4 ln n⌉`, never below 8.
pub fn default_rounds(n: usize) -> usize {
    let r = (4.0 * (n.max(1) as f64).ln()).ceil() as usize;
    r.max(8)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingConfig {
    pub seed: u64,
    /// Retry count; `None` means [`default_rounds`].
    pub rounds: Option<usize>,
    /// ε of the arbitrary-target scheme.
    pub epsilon: f64,
    /// Acceptance fraction `c` of the arbitrary-target scheme; `None` means
    /// `0.14·(1 − ε)`.
    pub accept_fraction: Option<f64>,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            rounds: None,
            epsilon: 0.1,
            accept_fraction: None,
        }
    }
}

impl RoundingConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn rounds_for(&self, n: usize) -> usize {
        self.rounds.unwrap_or_else(|| default_rounds(n))
    }

    pub fn accept_fraction(&self) -> f64 {
        self.accept_fraction.unwrap_or(0.14 * (1.0 - self.epsilon))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == Some(0) {
            return Err(Error::Precondition("rounds must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Precondition(format!(
                "epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        let c = self.accept_fraction();
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Precondition(format!(
                "acceptance fraction {c} outside (0, 1]"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundStatus {
    Accepted,
    Failure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Covered count `Z_ℓ` per cluster.
    pub covered: Vec<usize>,
    pub cost: usize,
    pub overlap: usize,
    pub accepted: bool,
}

impl RoundRecord {
    /// Uncovered count `Y_ℓ = |C_ℓ| − Z_ℓ`.
    pub fn uncovered(&self, instance: &Instance) -> Vec<usize> {
        instance
            .cluster_sizes()
            .iter()
            .zip(&self.covered)
            .map(|(s, z)| s - z)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub status: RoundStatus,
    pub solution: Option<Solution>,
    pub accepted_round: Option<usize>,
    pub rounds: Vec<RoundRecord>,
}

impl RoundingOutcome {
    pub fn is_accepted(&self) -> bool {
        self.status == RoundStatus::Accepted
    }
}

fn check_probability(p: f64, what: &str) -> Result<f64> {
    if !p.is_finite() || !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::Numerical(format!(
            "{what} probability {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn require_optimal(lp: &LpSolution, instance: &Instance) -> Result<()> {
    if !lp.is_optimal() {
        return Err(Error::Precondition(format!(
            "rounding needs an optimal LP, got {:?}",
            lp.status
        )));
    }
    match lp.layout {
        Some(l) if l.k == instance.k() && l.m == instance.m() && l.n == instance.n() => Ok(()),
        _ => Err(Error::Precondition(
            "LP layout does not match the instance".into(),
        )),
    }
}

/// One categorical draw over clusters plus "unassigned"; `probs[ℓ]` already
/// validated and summing to at most one.
fn categorical(rng: &mut RoundRng, probs: impl Iterator<Item = f64>) -> Option<usize> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (l, p) in probs.enumerate() {
        acc += p;
        if u < acc {
            return Some(l);
        }
    }
    None
}

/// Per-tag assignment probabilities `p[j·k + ℓ]`, checked to form a
/// sub-distribution.
fn assignment_table(k: usize, m: usize, value: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
    let mut p = vec![0.0; k * m];
    for j in 0..m {
        let mut total = 0.0;
        for l in 0..k {
            let v = check_probability(value(l, j), "assignment")?;
            p[j * k + l] = v;
            total += v;
        }
        if total > 1.0 + PROBABILITY_SLACK {
            return Err(Error::Numerical(format!(
                "assignment probabilities of tag {j} sum to {total}"
            )));
        }
    }
    Ok(p)
}

fn draw_assignment(rng: &mut RoundRng, k: usize, m: usize, p: &[f64]) -> Solution {
    let mut descriptors = vec![Vec::new(); k];
    for j in 0..m {
        if let Some(l) = categorical(rng, p[j * k..(j + 1) * k].iter().copied()) {
            descriptors[l].push(j);
        }
    }
    Solution::new(descriptors)
}

/// Algorithm-1 rounding: tag `j` goes to cluster `ℓ` with probability
/// `x*_ℓ(j)/2`, and to no cluster otherwise.
#[derive(Clone, Debug)]
pub struct BasicScheme {
    k: usize,
    m: usize,
    probs: Vec<f64>,
    lp_cost: f64,
}

impl BasicScheme {
    pub fn new(lp: &LpSolution, instance: &Instance) -> Result<Self> {
        require_optimal(lp, instance)?;
        let (k, m) = (instance.k(), instance.m());
        let probs = assignment_table(k, m, |l, j| lp.assign(l, j) / 2.0)?;
        Ok(Self {
            k,
            m,
            probs,
            lp_cost: lp.objective,
        })
    }

    /// Probability that tag `j` is assigned to cluster `ℓ`.
    pub fn probability(&self, cluster: usize, tag: usize) -> f64 {
        self.probs[tag * self.k + cluster]
    }

    /// LP optimum `B`.
    pub fn lp_cost(&self) -> f64 {
        self.lp_cost
    }

    pub fn sample(&self, rng: &mut RoundRng) -> Solution {
        draw_assignment(rng, self.k, self.m, &self.probs)
    }

    /// `Z_ℓ ≥ M_ℓ/8` for every ℓ and cost `≤ 2B`.
    pub fn accepts(&self, covered: &[usize], cost: usize, requirements: &Requirements) -> bool {
        covered
            .iter()
            .zip(&requirements.coverage)
            .all(|(&z, &m)| 8 * z >= m)
            && cost as f64 <= 2.0 * self.lp_cost + COST_SLACK
    }
}

/// Arbitrary-target rounding: sample `Z(i)` with probability `z*(i)`, rescale
/// `x*` by the largest `1/z*` among sampled objects carrying each tag, then
/// round categorically.
#[derive(Clone, Debug)]
pub struct GeneralScheme {
    k: usize,
    m: usize,
    x_star: Vec<f64>,
    z_star: Vec<f64>,
    lp_cost: f64,
    eta: usize,
    accept_fraction: f64,
}

impl GeneralScheme {
    /// Applies the tightening pass `z*(i) ← min(1, Σ_{j∈t_i} x*_ℓ(j))`.
    pub fn new(lp: &LpSolution, instance: &Instance, cfg: &RoundingConfig) -> Result<Self> {
        require_optimal(lp, instance)?;
        cfg.validate()?;
        let (k, m) = (instance.k(), instance.m());
        let mut x_star = vec![0.0; k * m];
        for l in 0..k {
            for j in 0..m {
                x_star[l * m + j] = check_probability(lp.assign(l, j), "x*")?;
            }
        }
        let z_star = instance
            .objects()
            .iter()
            .map(|o| {
                let s: f64 = o.tags.iter().map(|&j| x_star[o.cluster * m + j]).sum();
                s.min(1.0)
            })
            .collect();
        Ok(Self {
            k,
            m,
            x_star,
            z_star,
            lp_cost: lp.objective,
            eta: stats(instance).eta,
            accept_fraction: cfg.accept_fraction(),
        })
    }

    pub fn tightened_cover(&self) -> &[f64] {
        &self.z_star
    }

    pub fn x_star(&self, cluster: usize, tag: usize) -> f64 {
        self.x_star[cluster * self.m + tag]
    }

    /// `Z(i)` draws; values of `z*` below [`PROBABILITY_SLACK`] count as 0.
    pub fn sample_objects(&self, rng: &mut RoundRng) -> Vec<bool> {
        self.z_star
            .iter()
            .map(|&z| {
                let u: f64 = rng.gen();
                z >= PROBABILITY_SLACK && u < z
            })
            .collect()
    }

    /// `x′_ℓ(j)`, cluster-major, for the sampled objects.
    pub fn scaled_assignment(&self, instance: &Instance, sampled: &[bool]) -> Vec<f64> {
        let m = self.m;
        let mut best = vec![0.0f64; self.k * m];
        for (i, o) in instance.objects().iter().enumerate() {
            if sampled[i] {
                let inv = 1.0 / self.z_star[i];
                for &j in &o.tags {
                    let b = &mut best[o.cluster * m + j];
                    *b = b.max(inv);
                }
            }
        }
        best.iter()
            .zip(&self.x_star)
            .map(|(&b, &x)| (x / 2.0 * b).clamp(0.0, 0.5))
            .collect()
    }

    /// One full round; `x′` is returned alongside for inspection.
    pub fn sample(&self, instance: &Instance, rng: &mut RoundRng) -> Result<(Solution, Vec<f64>)> {
        let sampled = self.sample_objects(rng);
        let scaled = self.scaled_assignment(instance, &sampled);
        let probs = assignment_table(self.k, self.m, |l, j| scaled[l * self.m + j])?;
        Ok((draw_assignment(rng, self.k, self.m, &probs), scaled))
    }

    /// `Z′_ℓ ≥ c·M_ℓ` for every ℓ and cost `≤ η·B`.
    pub fn accepts(&self, covered: &[usize], cost: usize, requirements: &Requirements) -> bool {
        covered
            .iter()
            .zip(&requirements.coverage)
            .all(|(&z, &m)| z as f64 >= self.accept_fraction * m as f64 - PROBABILITY_SLACK)
            && cost as f64 <= self.eta as f64 * self.lp_cost + COST_SLACK
    }
}

/// Two-cluster overlap rounding: per tag, both / only 1 / only 2 / neither
/// with probabilities `y′, x₁−y′, x₂−y′, 1−x₁−x₂+y′` where
/// `y′ = min(y, x₁, x₂)`.
#[derive(Clone, Debug)]
pub struct OverlapScheme {
    m: usize,
    /// `[both, only1, only2]` per tag.
    probs: Vec<[f64; 3]>,
}

impl OverlapScheme {
    pub fn new(lp: &LpSolution, instance: &Instance) -> Result<Self> {
        if instance.k() != 2 {
            return Err(Error::Unsupported(format!(
                "overlap rounding needs k = 2, got {}",
                instance.k()
            )));
        }
        require_optimal(lp, instance)?;
        if !lp.layout.is_some_and(|l| l.has_overlap) {
            return Err(Error::Precondition(
                "overlap rounding needs a solution of the overlap LP".into(),
            ));
        }
        let probs = (0..instance.m())
            .map(|j| {
                let x1 = check_probability(lp.assign(0, j), "x₁")?;
                let x2 = check_probability(lp.assign(1, j), "x₂")?;
                let y = check_probability(lp.overlap(j), "y")?.min(x1).min(x2);
                let both = y;
                let only1 = check_probability(x1 - y, "only-1")?;
                let only2 = check_probability(x2 - y, "only-2")?;
                check_probability(1.0 - x1 - x2 + y, "neither")?;
                Ok([both, only1, only2])
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            m: instance.m(),
            probs,
        })
    }

    /// `[both, only-1, only-2]` for tag `j`.
    pub fn probabilities(&self, tag: usize) -> [f64; 3] {
        self.probs[tag]
    }

    pub fn sample(&self, rng: &mut RoundRng) -> Solution {
        let mut x1 = Vec::new();
        let mut x2 = Vec::new();
        for j in 0..self.m {
            match categorical(rng, self.probs[j].iter().copied()) {
                Some(0) => {
                    x1.push(j);
                    x2.push(j);
                }
                Some(1) => x1.push(j),
                Some(2) => x2.push(j),
                _ => {}
            }
        }
        Solution::new(vec![x1, x2])
    }

    /// `Z_ℓ ≥ M_ℓ/8`, cost `≤ 3B` and overlap `≤ 3B_o`.
    pub fn accepts(
        covered: &[usize],
        cost: usize,
        overlap: usize,
        requirements: &Requirements,
    ) -> bool {
        let budget = requirements.budget.unwrap_or(0);
        let overlap_budget = requirements.overlap_budget.unwrap_or(0);
        covered
            .iter()
            .zip(&requirements.coverage)
            .all(|(&z, &m)| 8 * z >= m)
            && cost <= 3 * budget
            && overlap <= 3 * overlap_budget
    }
}

fn retry(
    instance: &Instance,
    cfg: &RoundingConfig,
    mut attempt: impl FnMut(&mut RoundRng) -> Result<Solution>,
    accepts: impl Fn(&[usize], usize, usize) -> bool,
) -> Result<RoundingOutcome> {
    cfg.validate()?;
    let mut rounds = Vec::new();
    for round in 0..cfg.rounds_for(instance.n()) {
        let mut rng = round_rng(cfg.seed, round);
        let solution = attempt(&mut rng)?;
        let covered = coverage(instance, &solution)?;
        let cost = solution.cost();
        let overlap = solution.overlap();
        let accepted = accepts(&covered, cost, overlap);
        rounds.push(RoundRecord {
            round,
            covered,
            cost,
            overlap,
            accepted,
        });
        if accepted {
            return Ok(RoundingOutcome {
                status: RoundStatus::Accepted,
                solution: Some(solution),
                accepted_round: Some(round),
                rounds,
            });
        }
    }
    Ok(RoundingOutcome {
        status: RoundStatus::Failure,
        solution: None,
        accepted_round: None,
        rounds,
    })
}

/// Rounds an optimum of [`build_relaxation`](crate::lp::build_relaxation)
/// into disjoint descriptors covering `M_ℓ/8` per cluster at cost `≤ 2B`.
pub fn round_basic(
    lp: &LpSolution,
    instance: &Instance,
    requirements: &Requirements,
    cfg: &RoundingConfig,
) -> Result<RoundingOutcome> {
    let scheme = BasicScheme::new(lp, instance)?;
    retry(
        instance,
        cfg,
        |rng| Ok(scheme.sample(rng)),
        |z, cost, _| scheme.accepts(z, cost, requirements),
    )
}

/// Rounding for arbitrary targets: accepts `Z′_ℓ ≥ c·M_ℓ` at cost `≤ η·B`.
pub fn round_general(
    lp: &LpSolution,
    instance: &Instance,
    requirements: &Requirements,
    cfg: &RoundingConfig,
) -> Result<RoundingOutcome> {
    let scheme = GeneralScheme::new(lp, instance, cfg)?;
    retry(
        instance,
        cfg,
        |rng| scheme.sample(instance, rng).map(|(s, _)| s),
        |z, cost, _| scheme.accepts(z, cost, requirements),
    )
}

/// Rounds an optimum of [`build_overlap_lp`](crate::lp::build_overlap_lp);
/// accepted descriptors may share at most `3B_o` tags.
pub fn round_overlap(
    lp: &LpSolution,
    instance: &Instance,
    requirements: &Requirements,
    cfg: &RoundingConfig,
) -> Result<RoundingOutcome> {
    let scheme = OverlapScheme::new(lp, instance)?;
    if requirements.budget.is_none() || requirements.overlap_budget.is_none() {
        return Err(Error::Precondition(
            "overlap rounding needs a budget and an overlap budget".into(),
        ));
    }
    retry(
        instance,
        cfg,
        |rng| Ok(scheme.sample(rng)),
        |z, cost, overlap| OverlapScheme::accepts(z, cost, overlap, requirements),
    )
}
