//! Saturation maximization over the tag-assignment matroid.
//!
//! The ground set holds one element per (cluster, tag) pair, meaning "tag `j`
//! describes cluster `ℓ`". A set is independent when no tag appears twice and
//! it has at most `B` elements. The objective
//! `F(A) = Σ_ℓ min(|V_ℓ(X^A)|/M_ℓ, 1)` is monotone submodular, and lazy greedy
//! reaches at least half of its maximum over independent sets.
//!
//! ```
//! use cluster_describe::{Instance, submodular::{greedy_maximize, Element}};
//!
//! let inst = Instance::new(2, 3, vec![(0, vec![0]), (0, vec![0, 1]), (1, vec![2])])?;
//! let run = greedy_maximize(&inst, &[2, 1], 2)?;
//! assert_eq!(run.elements, vec![Element::new(0, 0), Element::new(1, 2)]);
//! assert_eq!(run.eval.total, 2.0);
//! # Ok::<(), cluster_describe::Error>(())
//! ```

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{for_each_assignment, subset_coverage, BRUTE_FORCE_MAX_TAGS};
use crate::model::{coverage, Instance, Solution};

/// Assign `tag` to `cluster`. Ordered by cluster, then tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Element {
    pub cluster: usize,
    pub tag: usize,
}

impl Element {
    pub fn new(cluster: usize, tag: usize) -> Self {
        Self { cluster, tag }
    }
}

/// No tag used twice and at most `budget` elements.
pub fn is_independent(elements: &[Element], budget: usize) -> bool {
    if elements.len() > budget {
        return false;
    }
    let mut tags: Vec<usize> = elements.iter().map(|e| e.tag).collect();
    tags.sort_unstable();
    tags.windows(2).all(|w| w[0] != w[1])
}

/// `X^A`: the tags each cluster receives.
pub fn descriptors_of(elements: &[Element], k: usize) -> Solution {
    let mut d = vec![Vec::new(); k];
    for e in elements {
        if e.cluster < k {
            d[e.cluster].push(e.tag);
        }
    }
    Solution::new(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationEval {
    /// `F_ℓ = min(|V_ℓ|/M_ℓ, 1)`, or 1 when `M_ℓ = 0`.
    pub per_cluster: Vec<f64>,
    pub total: f64,
}

fn saturation(covered: &[usize], targets: &[usize]) -> SaturationEval {
    let per_cluster: Vec<f64> = covered
        .iter()
        .zip(targets)
        .map(|(&v, &m)| {
            if m == 0 {
                1.0
            } else {
                (v.min(m)) as f64 / m as f64
            }
        })
        .collect();
    SaturationEval {
        total: per_cluster.iter().sum(),
        per_cluster,
    }
}

fn check_targets(instance: &Instance, targets: &[usize]) -> Result<()> {
    if targets.len() != instance.k() {
        return Err(Error::InvalidRequirements(format!(
            "{} targets for {} clusters",
            targets.len(),
            instance.k()
        )));
    }
    Ok(())
}

/// `F(A)` and its per-cluster terms.
pub fn saturation_value(
    elements: &[Element],
    instance: &Instance,
    targets: &[usize],
) -> Result<SaturationEval> {
    check_targets(instance, targets)?;
    if let Some(e) = elements.iter().find(|e| e.cluster >= instance.k()) {
        return Err(Error::InvalidInstance(format!(
            "element cluster {} out of range",
            e.cluster
        )));
    }
    let covered = coverage(instance, &descriptors_of(elements, instance.k()))?;
    Ok(saturation(&covered, targets))
}

/// Exact marginal gain `num/den` of one element.
#[derive(Clone, Copy, Debug)]
struct Gain {
    num: usize,
    den: usize,
}

impl Gain {
    const ZERO: Gain = Gain { num: 0, den: 1 };

    fn is_zero(self) -> bool {
        self.num == 0
    }
}

impl PartialEq for Gain {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Gain {}

impl PartialOrd for Gain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gain {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyRun {
    /// Selected elements in selection order.
    pub elements: Vec<Element>,
    pub eval: SaturationEval,
    /// `|V_ℓ(X^A)|`.
    pub covered: Vec<usize>,
}

impl GreedyRun {
    pub fn solution(&self, k: usize) -> Solution {
        descriptors_of(&self.elements, k)
    }
}

/// Full lazy-greedy selection order with no budget: each step adds the
/// element of largest marginal gain (ties to the lowest `(ℓ, j)`), stopping
/// when no element gains anything. Truncating the order at `B` gives the
/// budget-`B` greedy run.
pub fn greedy_order(instance: &Instance, targets: &[usize]) -> Result<Vec<Element>> {
    check_targets(instance, targets)?;
    let (k, m) = (instance.k(), instance.m());
    let mut holders: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); m]; k];
    for (i, o) in instance.objects().iter().enumerate() {
        for &j in &o.tags {
            holders[o.cluster][j].push(i);
        }
    }
    let mut covered = vec![false; instance.n()];
    let mut count = vec![0usize; k];
    let mut used = vec![false; m];
    let gain = |l: usize, j: usize, covered: &[bool], count: &[usize]| {
        let target = targets[l];
        if target == 0 || count[l] >= target {
            return Gain::ZERO;
        }
        let fresh = holders[l][j].iter().filter(|&&i| !covered[i]).count();
        Gain {
            num: (count[l] + fresh).min(target) - count[l],
            den: target,
        }
    };
    // Entries carry the step at which their gain was computed.
    let mut heap: BinaryHeap<(Gain, Reverse<Element>, usize)> = BinaryHeap::new();
    for l in 0..k {
        for j in 0..m {
            let g = gain(l, j, &covered, &count);
            if !g.is_zero() {
                heap.push((g, Reverse(Element::new(l, j)), 0));
            }
        }
    }
    let mut order = Vec::new();
    while let Some((g, Reverse(e), stamp)) = heap.pop() {
        if used[e.tag] {
            continue;
        }
        if stamp != order.len() {
            let fresh = gain(e.cluster, e.tag, &covered, &count);
            if !fresh.is_zero() {
                heap.push((fresh, Reverse(e), order.len()));
            }
            continue;
        }
        debug_assert!(!g.is_zero());
        used[e.tag] = true;
        for &i in &holders[e.cluster][e.tag] {
            if !covered[i] {
                covered[i] = true;
                count[e.cluster] += 1;
            }
        }
        order.push(e);
    }
    Ok(order)
}

/// Greedy independent set with at most `budget` elements.
pub fn greedy_maximize(instance: &Instance, targets: &[usize], budget: usize) -> Result<GreedyRun> {
    let mut elements = greedy_order(instance, targets)?;
    elements.truncate(budget);
    run_of(instance, targets, elements)
}

fn run_of(instance: &Instance, targets: &[usize], elements: Vec<Element>) -> Result<GreedyRun> {
    let covered = coverage(instance, &descriptors_of(&elements, instance.k()))?;
    Ok(GreedyRun {
        eval: saturation(&covered, targets),
        covered,
        elements,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetSearch {
    pub budget: usize,
    pub run: GreedyRun,
    /// Budgets probed, in order.
    pub probes: Vec<usize>,
}

/// Smallest budget in `[1, m]` at which greedy covers `α·M_ℓ` in every
/// cluster, found by binary search; `None` if budget `m` falls short.
pub fn budget_search(
    instance: &Instance,
    targets: &[usize],
    alpha: f64,
) -> Result<Option<BudgetSearch>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha {alpha} outside (0, 1]")));
    }
    let order = greedy_order(instance, targets)?;
    let k = instance.k();
    // Coverage after each prefix of the order.
    let mut prefix = vec![vec![0usize; k]];
    {
        let mut covered = vec![false; instance.n()];
        let mut count = vec![0usize; k];
        for e in &order {
            for (i, o) in instance.objects().iter().enumerate() {
                if o.cluster == e.cluster && !covered[i] && o.tags.binary_search(&e.tag).is_ok() {
                    covered[i] = true;
                    count[e.cluster] += 1;
                }
            }
            prefix.push(count.clone());
        }
    }
    let meets = |b: usize| {
        let c = &prefix[b.min(order.len())];
        c.iter()
            .zip(targets)
            .all(|(&v, &t)| v as f64 >= alpha * t as f64 - 1e-9)
    };
    let (mut lo, mut hi) = (1usize, instance.m().max(1));
    let mut probes = vec![hi];
    if !meets(hi) {
        return Ok(None);
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        probes.push(mid);
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut elements = order;
    elements.truncate(lo);
    Ok(Some(BudgetSearch {
        budget: lo,
        run: run_of(instance, targets, elements)?,
        probes,
    }))
}

/// Largest `F` over all independent sets, by enumeration. Refused for
/// `m > 15`.
pub fn brute_force_max(instance: &Instance, targets: &[usize], budget: usize) -> Result<f64> {
    check_targets(instance, targets)?;
    if instance.m() > BRUTE_FORCE_MAX_TAGS {
        return Err(Error::TooLarge {
            what: "brute-force tag universe",
            size: instance.m() as u128,
            cap: BRUTE_FORCE_MAX_TAGS as u128,
        });
    }
    let table = subset_coverage(instance);
    let mut best = 0.0f64;
    let mut covered = vec![0usize; instance.k()];
    for_each_assignment(instance.k(), instance.m(), |masks| {
        let cost: u32 = masks.iter().map(|x| x.count_ones()).sum();
        if cost as usize > budget {
            return;
        }
        for (l, &x) in masks.iter().enumerate() {
            covered[l] = table[l][x] as usize;
        }
        best = best.max(saturation(&covered, targets).total);
    });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Instance {
        Instance::new(
            2,
            m,
            (0..n).map(|_| {
                let c = rng.gen_range(0..2);
                (c, (0..m).filter(|_| rng.gen_bool(0.25)).collect::<Vec<_>>())
            }),
        )
        .unwrap()
    }

    #[test]
    fn independence_examples() {
        assert!(!is_independent(
            &[Element::new(0, 1), Element::new(1, 1)],
            5
        ));
        assert!(is_independent(&[Element::new(0, 1), Element::new(1, 2)], 2));
        assert!(!is_independent(
            &[Element::new(0, 1), Element::new(1, 2)],
            1
        ));
    }

    #[test]
    fn saturation_examples() {
        let inst = Instance::new(2, 3, vec![(0, vec![0]), (0, vec![1]), (1, vec![2])]).unwrap();
        assert_eq!(saturation_value(&[], &inst, &[2, 1]).unwrap().total, 0.0);
        let all = [Element::new(0, 0), Element::new(0, 1)];
        let eval = saturation_value(&all, &inst, &[2, 0]).unwrap();
        assert_eq!(eval.per_cluster, vec![1.0, 1.0]);
        assert_eq!(eval.total, 2.0);
    }

    #[test]
    fn zero_budget_is_empty() {
        let inst = Instance::new(2, 2, vec![(0, vec![0]), (1, vec![1])]).unwrap();
        assert!(greedy_maximize(&inst, &[1, 1], 0)
            .unwrap()
            .elements
            .is_empty());
    }

    #[test]
    fn unique_tags_saturate() {
        let inst = Instance::new(2, 10, (0..10).map(|i| (i % 2, vec![i]))).unwrap();
        let run = greedy_maximize(&inst, &[3, 2], 5).unwrap();
        assert_eq!(run.eval.total, 2.0);
        let found = budget_search(&inst, &[3, 2], 1.0).unwrap().unwrap();
        assert_eq!(found.budget, 5);
    }

    #[test]
    fn zero_effective_requirement_gives_budget_one() {
        let inst = Instance::new(2, 4, (0..4).map(|i| (i % 2, vec![i]))).unwrap();
        let found = budget_search(&inst, &[0, 0], 0.5).unwrap().unwrap();
        assert_eq!(found.budget, 1);
    }

    #[test]
    fn lazy_greedy_matches_plain_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, 20, 8);
            let targets: Vec<usize> = inst.cluster_sizes().iter().map(|s| s * 2 / 3).collect();
            // Plain greedy with exact rational comparison.
            let mut plain: Vec<Element> = Vec::new();
            loop {
                let base = saturation_value(&plain, &inst, &targets).unwrap().total;
                let mut best: Option<(f64, Element)> = None;
                for l in 0..2 {
                    for j in 0..8 {
                        if plain.iter().any(|e| e.tag == j) {
                            continue;
                        }
                        let mut with = plain.clone();
                        with.push(Element::new(l, j));
                        let g = saturation_value(&with, &inst, &targets).unwrap().total - base;
                        if g > 1e-12 && best.is_none_or(|(b, _)| g > b + 1e-12) {
                            best = Some((g, Element::new(l, j)));
                        }
                    }
                }
                match best {
                    Some((_, e)) => plain.push(e),
                    None => break,
                }
            }
            assert_eq!(greedy_order(&inst, &targets).unwrap(), plain);
        }
    }

    #[test]
    fn greedy_is_half_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let inst = random_instance(&mut rng, 16, 7);
            let targets: Vec<usize> = inst.cluster_sizes().iter().map(|s| s / 2).collect();
            for b in 0..=4 {
                let g = greedy_maximize(&inst, &targets, b).unwrap();
                assert!(is_independent(&g.elements, b));
                let best = brute_force_max(&inst, &targets, b).unwrap();
                assert!(g.eval.total >= 0.5 * best - 1e-12);
            }
        }
    }

    #[test]
    fn budget_search_is_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let inst = random_instance(&mut rng, 24, 10);
            let targets: Vec<usize> = inst.cluster_sizes().iter().map(|s| s * 3 / 4).collect();
            let alpha = 0.6;
            let ok = |b: usize| {
                let run = greedy_maximize(&inst, &targets, b).unwrap();
                run.covered
                    .iter()
                    .zip(&targets)
                    .all(|(&v, &t)| v as f64 >= alpha * t as f64 - 1e-9)
            };
            match budget_search(&inst, &targets, alpha).unwrap() {
                Some(found) => {
                    assert!(ok(found.budget));
                    assert!(found.budget == 1 || !ok(found.budget - 1));
                }
                None => assert!(!ok(10)),
            }
        }
    }
}
