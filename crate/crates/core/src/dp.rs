//! Reachability dynamic program for two clusters.
//!
//! State `(j, ℓ, w₁, w₂)` records that some disjoint choice among the first
//! `j` tags uses exactly `ℓ` tags and reaches weights `w₁, w₂`, where the
//! weight of a descriptor is `w_d(X) = Σ_{j∈X} |E_d(j)|` (objects of cluster
//! `d` carrying `j`). Weights saturate at the targets. A state with both
//! targets met yields descriptors covering at least `M_d/γ` objects each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Requirements, Solution};

/// Largest table `(m+1)·(B+1)·(M₁+1)·(M₂+1)` that is built.
pub const DP_STATE_CAP: u128 = 100_000_000;

/// Reachable states of every layer, one bitset per layer.
#[derive(Clone, Debug)]
pub struct DpTable {
    m: usize,
    budget: usize,
    targets: [usize; 2],
    /// `|E_d(j)|` per tag.
    weights: Vec<[usize; 2]>,
    layers: Vec<Vec<u64>>,
}

impl DpTable {
    /// Fills the table for `budget` tags and targets `requirements.coverage`.
    pub fn build(instance: &Instance, budget: usize, requirements: &Requirements) -> Result<Self> {
        if instance.k() != 2 {
            return Err(Error::Unsupported(format!(
                "the dynamic program handles k = 2, got {}",
                instance.k()
            )));
        }
        requirements.validate(instance)?;
        let m = instance.m();
        let budget = budget.min(m);
        let targets = [requirements.coverage[0], requirements.coverage[1]];
        let size = (m as u128 + 1)
            * (budget as u128 + 1)
            * (targets[0] as u128 + 1)
            * (targets[1] as u128 + 1);
        if size > DP_STATE_CAP {
            return Err(Error::TooLarge {
                what: "dynamic-program states",
                size,
                cap: DP_STATE_CAP,
            });
        }
        let counts = instance.cluster_tag_counts();
        let weights = (0..m).map(|j| [counts[0][j], counts[1][j]]).collect();
        let mut table = Self {
            m,
            budget,
            targets,
            weights,
            layers: Vec::with_capacity(m + 1),
        };
        let words = table.states().div_ceil(64);
        let mut first = vec![0u64; words];
        set(&mut first, table.index(0, 0, 0));
        table.layers.push(first);
        for j in 1..=m {
            let next = table.step(j);
            table.layers.push(next);
        }
        Ok(table)
    }

    fn states(&self) -> usize {
        (self.budget + 1) * (self.targets[0] + 1) * (self.targets[1] + 1)
    }

    fn index(&self, count: usize, w1: usize, w2: usize) -> usize {
        (count * (self.targets[0] + 1) + w1) * (self.targets[1] + 1) + w2
    }

    fn unpack(&self, idx: usize) -> (usize, usize, usize) {
        let w2 = idx % (self.targets[1] + 1);
        let rest = idx / (self.targets[1] + 1);
        (
            rest / (self.targets[0] + 1),
            rest % (self.targets[0] + 1),
            w2,
        )
    }

    /// Layer `j` from layer `j−1`: skip tag `j`, or add it to either side.
    fn step(&self, j: usize) -> Vec<u64> {
        let prev = &self.layers[j - 1];
        let mut next = prev.clone();
        let [e1, e2] = self.weights[j - 1];
        let [t1, t2] = self.targets;
        for (word_idx, &word) in prev.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let idx = word_idx * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let (count, w1, w2) = self.unpack(idx);
                if count == self.budget {
                    continue;
                }
                set(&mut next, self.index(count + 1, (w1 + e1).min(t1), w2));
                set(&mut next, self.index(count + 1, w1, (w2 + e2).min(t2)));
            }
        }
        next
    }

    /// `S(j, ℓ, w₁, w₂)` for `j ∈ [0, m]`; layer 0 holds only the empty
    /// choice. Weights are saturated values, so `w_d ≤ M_d`.
    pub fn reachable(&self, j: usize, count: usize, w1: usize, w2: usize) -> bool {
        if j > self.m || count > self.budget || w1 > self.targets[0] || w2 > self.targets[1] {
            return false;
        }
        get(&self.layers[j], self.index(count, w1, w2))
    }

    /// Fewest tags at which both targets are met, if any.
    pub fn min_count(&self) -> Option<usize> {
        let [t1, t2] = self.targets;
        (0..=self.budget).find(|&c| self.reachable(self.m, c, t1, t2))
    }

    pub fn reachable_states(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.iter().map(|w| w.count_ones() as usize).sum::<usize>())
            .sum()
    }

    /// Walks back from the cheapest target state, preferring skip, then
    /// cluster 1, then cluster 2 at each tag.
    pub fn reconstruct(&self) -> Option<Solution> {
        let mut count = self.min_count()?;
        let [t1, t2] = self.targets;
        let (mut w1, mut w2) = (t1, t2);
        let mut x = [Vec::new(), Vec::new()];
        for j in (1..=self.m).rev() {
            if self.reachable(j - 1, count, w1, w2) {
                continue;
            }
            let [e1, e2] = self.weights[j - 1];
            let before1 =
                predecessors(w1, e1, t1).find(|&p| self.reachable(j - 1, count - 1, p, w2));
            if let Some(p) = before1 {
                x[0].push(j - 1);
                w1 = p;
            } else {
                let p = predecessors(w2, e2, t2)
                    .find(|&p| self.reachable(j - 1, count - 1, w1, p))
                    .expect("reachable state without predecessor");
                x[1].push(j - 1);
                w2 = p;
            }
            count -= 1;
        }
        debug_assert_eq!((count, w1, w2), (0, 0, 0));
        Some(Solution::new(x.into()))
    }
}

/// Weights `p` with `min(p + e, target) = w`, smallest first.
fn predecessors(w: usize, e: usize, target: usize) -> impl Iterator<Item = usize> {
    (0..=w).filter(move |&p| (p + e).min(target) == w)
}

fn set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn get(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpResult {
    pub feasible: bool,
    pub solution: Option<Solution>,
    /// Unsaturated `w_d(X_d)` of the reconstructed descriptors.
    pub weights: Option<[usize; 2]>,
    pub reachable_states: usize,
}

/// Disjoint `(X₁, X₂)` with `|X₁|+|X₂| ≤ budget` and `w_d(X_d) ≥ M_d`, using
/// as few tags as the table allows; infeasible when no state meets both
/// targets.
pub fn dp_solve(
    instance: &Instance,
    budget: usize,
    requirements: &Requirements,
) -> Result<DpResult> {
    let table = DpTable::build(instance, budget, requirements)?;
    let solution = table.reconstruct();
    let weights = solution.as_ref().map(|s| {
        let w = |d: usize| s.descriptors[d].iter().map(|&j| table.weights[j][d]).sum();
        [w(0), w(1)]
    });
    Ok(DpResult {
        feasible: solution.is_some(),
        solution,
        weights,
        reachable_states: table.reachable_states(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coverage, stats};

    fn instance() -> Instance {
        Instance::new(
            2,
            4,
            vec![
                (0, vec![0, 1]),
                (0, vec![0]),
                (0, vec![2]),
                (1, vec![1, 3]),
                (1, vec![3]),
                (1, vec![0, 2]),
            ],
        )
        .unwrap()
    }

    /// Every disjoint pair over the first `j` tags, as saturated states.
    fn enumerate_states(table: &DpTable, j: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut assign = vec![0u8; j];
        loop {
            let mut count = 0;
            let (mut w1, mut w2) = (0, 0);
            for (t, &a) in assign.iter().enumerate() {
                match a {
                    1 => {
                        count += 1;
                        w1 += table.weights[t][0];
                    }
                    2 => {
                        count += 1;
                        w2 += table.weights[t][1];
                    }
                    _ => {}
                }
            }
            if count <= table.budget {
                out.push((count, w1.min(table.targets[0]), w2.min(table.targets[1])));
            }
            let mut p = 0;
            while p < j && assign[p] == 2 {
                assign[p] = 0;
                p += 1;
            }
            if p == j {
                return out;
            }
            assign[p] += 1;
        }
    }

    #[test]
    fn first_tag_initialization() {
        let inst = instance();
        let table = DpTable::build(&inst, 2, &Requirements::new(vec![3, 3])).unwrap();
        // Tag 0 reaches two objects of cluster 0 and one of cluster 1.
        assert!(table.reachable(1, 0, 0, 0));
        assert!(table.reachable(1, 1, 2, 0));
        assert!(table.reachable(1, 1, 0, 1));
        assert!(!table.reachable(1, 1, 1, 0));
        assert!(!table.reachable(1, 2, 2, 1));
    }

    #[test]
    fn zero_targets_zero_budget() {
        let r = dp_solve(&instance(), 0, &Requirements::zeros(2)).unwrap();
        assert!(r.feasible);
        assert_eq!(r.solution.unwrap().cost(), 0);
    }

    #[test]
    fn table_equals_enumeration() {
        let inst = instance();
        for budget in 0..=4 {
            for t in [[0, 0], [2, 1], [3, 3], [1, 3]] {
                let table = DpTable::build(&inst, budget, &Requirements::new(t.to_vec())).unwrap();
                for j in 0..=4 {
                    let states = enumerate_states(&table, j);
                    for c in 0..=table.budget {
                        for w1 in 0..=t[0] {
                            for w2 in 0..=t[1] {
                                assert_eq!(
                                    table.reachable(j, c, w1, w2),
                                    states.contains(&(c, w1, w2)),
                                    "{budget} {t:?} {j} {c} {w1} {w2}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reconstruction_meets_targets_and_gamma_bound() {
        let inst = instance();
        let gamma = stats(&inst).gamma;
        assert!(
            !dp_solve(&inst, 3, &Requirements::new(vec![3, 3]))
                .unwrap()
                .feasible
        );
        let r = dp_solve(&inst, 4, &Requirements::new(vec![3, 3])).unwrap();
        let sol = r.solution.unwrap();
        assert!(sol.is_disjoint());
        assert_eq!(sol.cost(), 4);
        let [w1, w2] = r.weights.unwrap();
        assert!(w1 >= 3 && w2 >= 3);
        let cov = coverage(&inst, &sol).unwrap();
        assert!(cov[0] * gamma >= 3 && cov[1] * gamma >= 3);
    }

    #[test]
    fn refusals() {
        let three = Instance::new(3, 1, vec![(0, vec![0])]).unwrap();
        assert!(matches!(
            dp_solve(&three, 1, &Requirements::zeros(3)),
            Err(Error::Unsupported(_))
        ));
        let big = Instance::new(2, 2000, (0..4000).map(|i| (i % 2, vec![i / 2]))).unwrap();
        assert!(matches!(
            dp_solve(&big, 2000, &Requirements::new(vec![2000, 2000])),
            Err(Error::TooLarge { .. })
        ));
    }
}
