//! The problem model: objects carrying tag sets, a fixed partition into
//! clusters, per-cluster coverage targets, and candidate descriptors.
//!
//! An object is *covered* by a solution when its tag set meets the descriptor
//! of its own cluster. Everything else in the crate is phrased in terms of the
//! [`coverage`] counts defined here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One object: the cluster it belongs to and its sorted, deduplicated tags.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Object {
    pub cluster: usize,
    pub tags: Vec<usize>,
}

/// Objects with tag sets, partitioned into `k >= 2` clusters over a universe
/// of `m` tags. Object and tag ids are dense indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    k: usize,
    m: usize,
    objects: Vec<Object>,
    cluster_sizes: Vec<usize>,
}

impl Instance {
    /// Builds an instance from `(cluster, tags)` pairs. Tag lists are sorted
    /// and deduplicated.
    pub fn new<I, T>(k: usize, m: usize, objects: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, T)>,
        T: IntoIterator<Item = usize>,
    {
        if k < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 clusters, got {k}"
            )));
        }
        let mut cluster_sizes = vec![0; k];
        let mut out = Vec::new();
        for (i, (cluster, tags)) in objects.into_iter().enumerate() {
            if cluster >= k {
                return Err(Error::InvalidInstance(format!(
                    "object {i} is in cluster {cluster}, but k = {k}"
                )));
            }
            let mut tags: Vec<usize> = tags.into_iter().collect();
            tags.sort_unstable();
            tags.dedup();
            if let Some(&t) = tags.last() {
                if t >= m {
                    return Err(Error::TagOutOfRange {
                        tag: t,
                        universe: m,
                    });
                }
            }
            cluster_sizes[cluster] += 1;
            out.push(Object { cluster, tags });
        }
        Ok(Instance {
            k,
            m,
            objects: out,
            cluster_sizes,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> &[Object] {
        &self.objects
    }

    pub fn object(&self, i: usize) -> &Object {
        &self.objects[i]
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    /// Indices of the objects in cluster `cluster`, ascending.
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.objects
            .iter()
            .enumerate()
            .filter(move |(_, o)| o.cluster == cluster)
            .map(|(i, _)| i)
    }

    /// `E(j)` for every tag: the objects carrying tag `j`, ascending.
    pub fn tag_reach(&self) -> Vec<Vec<usize>> {
        let mut reach = vec![Vec::new(); self.m];
        for (i, o) in self.objects.iter().enumerate() {
            for &t in &o.tags {
                reach[t].push(i);
            }
        }
        reach
    }

    /// `|E_ℓ(j)|`: for each cluster and tag, how many objects of that cluster
    /// carry the tag. Indexed `[cluster][tag]`.
    pub fn cluster_tag_counts(&self) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; self.m]; self.k];
        for o in &self.objects {
            for &t in &o.tags {
                counts[o.cluster][t] += 1;
            }
        }
        counts
    }

    /// Objects per cluster that carry at least one tag.
    pub fn coverable_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for o in &self.objects {
            if !o.tags.is_empty() {
                counts[o.cluster] += 1;
            }
        }
        counts
    }

    /// Total number of (object, tag) incidences.
    pub fn incidences(&self) -> usize {
        self.objects.iter().map(|o| o.tags.len()).sum()
    }
}

/// Per-cluster coverage targets `M_ℓ` plus the optional cost budget `B` and
/// overlap budget `B_o`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Requirements {
    pub coverage: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_budget: Option<usize>,
}

impl Requirements {
    pub fn new(coverage: Vec<usize>) -> Self {
        Requirements {
            coverage,
            budget: None,
            overlap_budget: None,
        }
    }

    pub fn zeros(k: usize) -> Self {
        Self::new(vec![0; k])
    }

    /// `M_ℓ = ⌈f·|C_ℓ|⌉` for every cluster.
    pub fn from_fraction(instance: &Instance, fraction: f64) -> Self {
        let coverage = instance
            .cluster_sizes()
            .iter()
            .map(|&size| {
                // Guard against 0.7 * 100 = 70.00000000000001 style noise.
                let target = (fraction * size as f64 - 1e-9).ceil().max(0.0) as usize;
                target.min(size)
            })
            .collect();
        Self::new(coverage)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_overlap_budget(mut self, overlap_budget: usize) -> Self {
        self.overlap_budget = Some(overlap_budget);
        self
    }

    /// Checks the structural invariants against an instance: one target per
    /// cluster and `M_ℓ <= |C_ℓ|`.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.coverage.len() != instance.k() {
            return Err(Error::InvalidRequirements(format!(
                "{} coverage targets for {} clusters",
                self.coverage.len(),
                instance.k()
            )));
        }
        for (l, (&target, &size)) in self
            .coverage
            .iter()
            .zip(instance.cluster_sizes())
            .enumerate()
        {
            if target > size {
                return Err(Error::InvalidRequirements(format!(
                    "cluster {l} requires {target} covered objects but has only {size}"
                )));
            }
        }
        Ok(())
    }

    /// True when every target is reachable by the objects that carry at least
    /// one tag. Failing this makes every method report infeasibility.
    pub fn is_coverable(&self, instance: &Instance) -> bool {
        self.coverage
            .iter()
            .zip(instance.coverable_counts())
            .all(|(&target, coverable)| target <= coverable)
    }

    pub fn total(&self) -> usize {
        self.coverage.iter().sum()
    }
}

/// One descriptor (tag set) per cluster. Descriptors are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Solution {
    pub descriptors: Vec<Vec<usize>>,
}

impl Solution {
    pub fn new(descriptors: Vec<Vec<usize>>) -> Self {
        let descriptors = descriptors
            .into_iter()
            .map(|mut d| {
                d.sort_unstable();
                d.dedup();
                d
            })
            .collect();
        Solution { descriptors }
    }

    pub fn empty(k: usize) -> Self {
        Solution {
            descriptors: vec![Vec::new(); k],
        }
    }

    pub fn k(&self) -> usize {
        self.descriptors.len()
    }

    /// `Σ_ℓ |X_ℓ|`.
    pub fn cost(&self) -> usize {
        self.descriptors.iter().map(Vec::len).sum()
    }

    /// `Σ_{ℓ<ℓ'} |X_ℓ ∩ X_ℓ'|`: every unordered pair of clusters sharing a tag
    /// counts once.
    pub fn overlap(&self) -> usize {
        let mut total = 0;
        for a in 0..self.descriptors.len() {
            for b in a + 1..self.descriptors.len() {
                total += sorted_intersection_len(&self.descriptors[a], &self.descriptors[b]);
            }
        }
        total
    }

    pub fn is_disjoint(&self) -> bool {
        self.overlap() == 0
    }

    fn check_range(&self, m: usize) -> Result<()> {
        for d in &self.descriptors {
            if let Some(&t) = d.last() {
                if t >= m {
                    return Err(Error::TagOutOfRange {
                        tag: t,
                        universe: m,
                    });
                }
            }
        }
        Ok(())
    }
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `|V_ℓ(X)|` for every cluster: objects of `C_ℓ` whose tags meet `X_ℓ`.
/// Disjointness is not required.
pub fn coverage(instance: &Instance, solution: &Solution) -> Result<Vec<usize>> {
    if solution.k() != instance.k() {
        return Err(Error::InvalidInstance(format!(
            "solution has {} descriptors for {} clusters",
            solution.k(),
            instance.k()
        )));
    }
    solution.check_range(instance.m())?;
    let mut chosen = vec![false; instance.k() * instance.m()];
    for (l, d) in solution.descriptors.iter().enumerate() {
        for &t in d {
            chosen[l * instance.m() + t] = true;
        }
    }
    let mut covered = vec![0; instance.k()];
    for o in instance.objects() {
        let row = &chosen[o.cluster * instance.m()..(o.cluster + 1) * instance.m()];
        if o.tags.iter().any(|&t| row[t]) {
            covered[o.cluster] += 1;
        }
    }
    Ok(covered)
}

/// Structural statistics that appear in the approximation guarantees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceStats {
    /// η: the most objects any single tag reaches.
    pub eta: usize,
    /// γ: the most tags on any single object.
    pub gamma: usize,
    /// Δ: the largest dependence degree.
    pub delta: usize,
    /// `|E(j)|` per tag.
    pub per_tag_reach: Vec<usize>,
    /// `Δ(i)` per object: objects (itself included) sharing a tag with `i`.
    pub per_object_dependence: Vec<usize>,
}

pub fn stats(instance: &Instance) -> InstanceStats {
    let reach = instance.tag_reach();
    let per_tag_reach: Vec<usize> = reach.iter().map(Vec::len).collect();
    let mut stamp = vec![usize::MAX; instance.n()];
    let per_object_dependence: Vec<usize> = instance
        .objects()
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let mut count = 0;
            for &t in &o.tags {
                for &other in &reach[t] {
                    if stamp[other] != i {
                        stamp[other] = i;
                        count += 1;
                    }
                }
            }
            count
        })
        .collect();
    InstanceStats {
        eta: per_tag_reach.iter().copied().max().unwrap_or(0),
        gamma: instance
            .objects()
            .iter()
            .map(|o| o.tags.len())
            .max()
            .unwrap_or(0),
        delta: per_object_dependence.iter().copied().max().unwrap_or(0),
        per_tag_reach,
        per_object_dependence,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointnessViolation {
    pub tag: usize,
    pub clusters: Vec<usize>,
}

/// Everything needed to judge a candidate solution against both problem
/// variants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<DisjointnessViolation>,
    pub coverage: Vec<usize>,
    pub required: Vec<usize>,
    pub cost: usize,
    pub overlap: usize,
    /// Whether the cost fits the budget, when one was given.
    pub within_budget: Option<bool>,
    pub min_con_cd: bool,
    pub min_con_cdo: bool,
}

impl FeasibilityReport {
    pub fn meets_coverage(&self) -> bool {
        self.coverage
            .iter()
            .zip(&self.required)
            .all(|(c, r)| c >= r)
    }
}

pub fn validate_solution(
    instance: &Instance,
    requirements: &Requirements,
    solution: &Solution,
) -> Result<FeasibilityReport> {
    requirements.validate(instance)?;
    let covered = coverage(instance, solution)?;

    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); instance.m()];
    for (l, d) in solution.descriptors.iter().enumerate() {
        for &t in d {
            owners[t].push(l);
        }
    }
    let violations: Vec<DisjointnessViolation> = owners
        .into_iter()
        .enumerate()
        .filter(|(_, ls)| ls.len() > 1)
        .map(|(tag, clusters)| DisjointnessViolation { tag, clusters })
        .collect();

    let meets = covered
        .iter()
        .zip(&requirements.coverage)
        .all(|(c, r)| c >= r);
    let overlap = solution.overlap();
    let cost = solution.cost();
    Ok(FeasibilityReport {
        min_con_cd: meets && violations.is_empty(),
        min_con_cdo: meets && overlap <= requirements.overlap_budget.unwrap_or(0),
        violations,
        coverage: covered,
        required: requirements.coverage.clone(),
        cost,
        overlap,
        within_budget: requirements.budget.map(|b| cost <= b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cluster() -> Instance {
        // C1 = {s1: {0}, s2: {1}}, C2 = {s3: {0, 2}}
        Instance::new(2, 3, vec![(0, vec![0]), (0, vec![1]), (1, vec![0, 2])]).unwrap()
    }

    fn brute_coverage(instance: &Instance, solution: &Solution) -> Vec<usize> {
        let mut out = vec![0; instance.k()];
        for o in instance.objects() {
            let mut hit = false;
            for &t in &o.tags {
                for &x in &solution.descriptors[o.cluster] {
                    hit |= t == x;
                }
            }
            out[o.cluster] += hit as usize;
        }
        out
    }

    #[test]
    fn empty_descriptors_cover_nothing() {
        let inst = two_cluster();
        assert_eq!(coverage(&inst, &Solution::empty(2)).unwrap(), vec![0, 0]);
    }

    #[test]
    fn full_universe_covers_cluster_sizes() {
        let inst = two_cluster();
        let all = Solution::new(vec![(0..3).collect(), (0..3).collect()]);
        assert_eq!(coverage(&inst, &all).unwrap(), inst.cluster_sizes());
    }

    #[test]
    fn hand_checked_coverage() {
        let inst = two_cluster();
        let x = Solution::new(vec![vec![0], vec![2]]);
        assert_eq!(brute_coverage(&inst, &x), vec![1, 1]);
        assert_eq!(coverage(&inst, &x).unwrap(), vec![1, 1]);
    }

    #[test]
    fn out_of_range_tag_is_rejected() {
        let inst = two_cluster();
        let x = Solution::new(vec![vec![3], vec![]]);
        assert!(matches!(
            coverage(&inst, &x),
            Err(Error::TagOutOfRange {
                tag: 3,
                universe: 3
            })
        ));
        assert!(validate_solution(&inst, &Requirements::zeros(2), &x).is_err());
    }

    #[test]
    fn instance_rejects_bad_input() {
        assert!(Instance::new(1, 2, vec![(0, vec![0])]).is_err());
        assert!(Instance::new(2, 2, vec![(2, vec![0])]).is_err());
        assert!(Instance::new(2, 2, vec![(0, vec![2])]).is_err());
        let inst = Instance::new(2, 4, vec![(0, vec![3, 1, 3])]).unwrap();
        assert_eq!(inst.object(0).tags, vec![1, 3]);
    }

    #[test]
    fn stats_single_object() {
        let inst = Instance::new(2, 1, vec![(0, vec![0])]).unwrap();
        let s = stats(&inst);
        assert_eq!((s.eta, s.gamma, s.delta), (1, 1, 1));
    }

    #[test]
    fn stats_three_objects() {
        let inst = Instance::new(2, 3, vec![(0, vec![0, 1]), (0, vec![1]), (1, vec![2])]).unwrap();
        let s = stats(&inst);
        // Pairwise intersections by hand: {0,1}∩{1} ≠ ∅, the rest are empty.
        assert_eq!((s.eta, s.gamma, s.delta), (2, 2, 2));
        assert_eq!(s.per_object_dependence, vec![2, 2, 1]);
        assert_eq!(s.per_tag_reach, vec![1, 2, 1]);
    }

    #[test]
    fn stats_of_tagless_instance() {
        let inst = Instance::new(2, 5, vec![(0, vec![]), (1, vec![])]).unwrap();
        let s = stats(&inst);
        assert_eq!((s.eta, s.gamma, s.delta), (0, 0, 0));
    }

    #[test]
    fn genome_shape_is_accepted() {
        // n = 248, m = 4632, |C1| = 73, |C2| = 175.
        let objects = (0..248).map(|i| (usize::from(i >= 73), vec![(i * 17) % 4632]));
        let inst = Instance::new(2, 4632, objects).unwrap();
        assert_eq!(inst.cluster_sizes(), &[73, 175]);
        let s = stats(&inst);
        assert_eq!(s.per_tag_reach.len(), 4632);
        assert_eq!(s.per_object_dependence.len(), 248);
    }

    #[test]
    fn disjoint_and_covering_is_feasible() {
        let inst = two_cluster();
        let x = Solution::new(vec![vec![0, 1], vec![2]]);
        let r = validate_solution(&inst, &Requirements::new(vec![2, 1]), &x).unwrap();
        assert!(r.min_con_cd);
        assert_eq!(r.cost, 3);
        assert_eq!(r.overlap, 0);
    }

    #[test]
    fn shared_tag_is_feasible_only_with_overlap_budget() {
        let inst = two_cluster();
        let x = Solution::new(vec![vec![0], vec![0]]);
        let req = Requirements::new(vec![1, 1]).with_overlap_budget(1);
        let r = validate_solution(&inst, &req, &x).unwrap();
        assert!(!r.min_con_cd);
        assert!(r.min_con_cdo);
        assert_eq!(r.overlap, 1);
        assert_eq!(
            r.violations,
            vec![DisjointnessViolation {
                tag: 0,
                clusters: vec![0, 1]
            }]
        );
    }

    #[test]
    fn short_coverage_is_infeasible() {
        let inst = two_cluster();
        let x = Solution::new(vec![vec![0], vec![2]]);
        let r = validate_solution(&inst, &Requirements::new(vec![2, 1]), &x).unwrap();
        assert_eq!(r.coverage, vec![1, 1]);
        assert!(!r.min_con_cd);
    }

    #[test]
    fn requirements_fraction_rounds_up() {
        let inst = Instance::new(2, 1, (0..10).map(|i| (i % 2, vec![0]))).unwrap();
        assert_eq!(Requirements::from_fraction(&inst, 0.7).coverage, vec![4, 4]);
        assert_eq!(Requirements::from_fraction(&inst, 1.0).coverage, vec![5, 5]);
        assert!(Requirements::new(vec![6, 0]).validate(&inst).is_err());
    }
}
