//! Synthetic instances and instance transforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Solution};

/// Largest `m(m+1)/2` that [`extend_pairs`] accepts.
pub const PAIR_EXTENSION_CAP: u128 = 1_000_000;

/// `n` objects over `m` tags; each object joins a uniformly random cluster
/// and holds each tag independently with probability `p`.
pub fn gen_synthetic(n: usize, m: usize, k: usize, p: f64, seed: u64) -> Result<Instance> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("p = {p} outside [0, 1]")));
    }
    if n == 0 || m == 0 {
        return Err(Error::Precondition("n and m must be at least 1".into()));
    }
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k}, need at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects: Vec<(usize, Vec<usize>)> = (0..n)
        .map(|_| {
            let cluster = rng.gen_range(0..k);
            let tags = (0..m).filter(|_| rng.gen_bool(p)).collect();
            (cluster, tags)
        })
        .collect();
    Instance::new(k, m, objects)
}

/// An extended tag: an original tag or an unordered pair of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtTag {
    Single(usize),
    Pair(usize, usize),
}

/// Numbering of the extended universe: ids `0..m` are the original tags,
/// then pairs `(j, j′)`, `j < j′`, in lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairExtensionMap {
    pub m: usize,
}

impl PairExtensionMap {
    /// `m + m(m−1)/2`.
    pub fn len(&self) -> usize {
        self.m + self.m * self.m.saturating_sub(1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn pair_id(&self, a: usize, b: usize) -> usize {
        let (j, jp) = if a < b { (a, b) } else { (b, a) };
        debug_assert!(j < jp && jp < self.m);
        self.m + j * self.m - j * (j + 1) / 2 + (jp - j - 1)
    }

    pub fn get(&self, id: usize) -> Option<ExtTag> {
        if id < self.m {
            return Some(ExtTag::Single(id));
        }
        if id >= self.len() {
            return None;
        }
        let mut rest = id - self.m;
        for j in 0..self.m {
            let row = self.m - j - 1;
            if rest < row {
                return Some(ExtTag::Pair(j, j + 1 + rest));
            }
            rest -= row;
        }
        None
    }

    /// Descriptors over the extended universe as original tags and pairs.
    pub fn translate(&self, solution: &Solution) -> Vec<Vec<ExtTag>> {
        solution
            .descriptors
            .iter()
            .map(|d| d.iter().filter_map(|&id| self.get(id)).collect())
            .collect()
    }

    /// Labels for the extended universe, joining pair members with `&`.
    pub fn labels(&self, original: Option<&[String]>) -> Vec<String> {
        let name = |j: usize| match original {
            Some(l) => l[j].clone(),
            None => j.to_string(),
        };
        (0..self.len())
            .map(|id| match self.get(id).expect("id in range") {
                ExtTag::Single(j) => name(j),
                ExtTag::Pair(a, b) => format!("{}&{}", name(a), name(b)),
            })
            .collect()
    }
}

/// Coverage of translated descriptors: an object is covered by a single tag
/// it holds, or by a pair whose both members it holds.
pub fn pair_coverage(instance: &Instance, descriptors: &[Vec<ExtTag>]) -> Vec<usize> {
    let mut counts = vec![0; instance.k()];
    for o in instance.objects() {
        let holds = |j: usize| o.tags.binary_search(&j).is_ok();
        let covered = descriptors.get(o.cluster).is_some_and(|d| {
            d.iter().any(|t| match *t {
                ExtTag::Single(j) => holds(j),
                ExtTag::Pair(a, b) => holds(a) && holds(b),
            })
        });
        if covered {
            counts[o.cluster] += 1;
        }
    }
    counts
}

/// Adds every tag pair `(j, j′)` to the universe; each object gains the pairs
/// contained in its own tag set.
pub fn extend_pairs(instance: &Instance) -> Result<(Instance, PairExtensionMap)> {
    let m = instance.m() as u128;
    if m * (m + 1) / 2 > PAIR_EXTENSION_CAP {
        return Err(Error::TooLarge {
            what: "pair-extended tag universe",
            size: m * (m + 1) / 2,
            cap: PAIR_EXTENSION_CAP,
        });
    }
    let map = PairExtensionMap { m: instance.m() };
    let objects: Vec<(usize, Vec<usize>)> = instance
        .objects()
        .iter()
        .map(|o| {
            let mut tags = o.tags.clone();
            for (x, &a) in o.tags.iter().enumerate() {
                for &b in &o.tags[x + 1..] {
                    tags.push(map.pair_id(a, b));
                }
            }
            (o.cluster, tags)
        })
        .collect();
    Ok((Instance::new(instance.k(), map.len(), objects)?, map))
}

/// Merges clusters: `groups[g]` lists the old clusters that form new cluster
/// `g`. The groups must partition `0..k` into at least two parts.
pub fn merge_clusters(instance: &Instance, groups: &[Vec<usize>]) -> Result<Instance> {
    let k = instance.k();
    if groups.len() < 2 {
        return Err(Error::Precondition(
            "merging needs at least two groups".into(),
        ));
    }
    let mut target = vec![None; k];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::Precondition(format!("group {g} is empty")));
        }
        for &l in group {
            match target.get_mut(l) {
                None => {
                    return Err(Error::Precondition(format!("cluster {l} out of range")));
                }
                Some(Some(_)) => {
                    return Err(Error::Precondition(format!("cluster {l} listed twice")));
                }
                Some(slot) => *slot = Some(g),
            }
        }
    }
    if let Some(l) = target.iter().position(Option::is_none) {
        return Err(Error::Precondition(format!("cluster {l} is in no group")));
    }
    Instance::new(
        groups.len(),
        instance.m(),
        instance
            .objects()
            .iter()
            .map(|o| (target[o.cluster].unwrap(), o.tags.clone())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coverage, stats};

    #[test]
    fn extreme_probabilities() {
        let empty = gen_synthetic(20, 7, 2, 0.0, 1).unwrap();
        assert!(empty.objects().iter().all(|o| o.tags.is_empty()));
        let full = gen_synthetic(20, 7, 3, 1.0, 1).unwrap();
        let s = stats(&full);
        assert_eq!((s.gamma, s.eta), (7, 20));
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(
            gen_synthetic(50, 30, 2, 0.1, 9).unwrap(),
            gen_synthetic(50, 30, 2, 0.1, 9).unwrap()
        );
        assert_ne!(
            gen_synthetic(50, 30, 2, 0.1, 9).unwrap(),
            gen_synthetic(50, 30, 2, 0.1, 10).unwrap()
        );
        assert!(gen_synthetic(5, 5, 2, 1.5, 0).is_err());
    }

    #[test]
    fn pair_ids_are_a_bijection() {
        let map = PairExtensionMap { m: 5 };
        assert_eq!(map.len(), 15);
        for id in 0..15 {
            match map.get(id).unwrap() {
                ExtTag::Single(j) => assert_eq!(j, id),
                ExtTag::Pair(a, b) => {
                    assert!(a < b);
                    assert_eq!(map.pair_id(a, b), id);
                }
            }
        }
        assert_eq!(map.get(15), None);
        assert_eq!(map.labels(None)[5], "0&1");
    }

    #[test]
    fn extension_examples() {
        let inst = Instance::new(2, 3, vec![(0, vec![0, 1]), (1, vec![2]), (1, vec![])]).unwrap();
        let (ext, map) = extend_pairs(&inst).unwrap();
        assert_eq!(ext.m(), 6);
        assert_eq!(ext.object(0).tags, vec![0, 1, map.pair_id(0, 1)]);
        assert_eq!(ext.object(1).tags, vec![2]);
        assert!(ext.object(2).tags.is_empty());
    }

    #[test]
    fn translated_coverage_matches() {
        let inst = gen_synthetic(40, 6, 2, 0.4, 3).unwrap();
        let (ext, map) = extend_pairs(&inst).unwrap();
        let sol = Solution::new(vec![
            vec![0, map.pair_id(1, 2), map.pair_id(3, 5)],
            vec![4, map.pair_id(0, 5)],
        ]);
        assert_eq!(
            coverage(&ext, &sol).unwrap(),
            pair_coverage(&inst, &map.translate(&sol))
        );
    }

    #[test]
    fn extension_guard() {
        let inst = Instance::new(2, 1500, vec![(0, vec![0])]).unwrap();
        assert!(matches!(extend_pairs(&inst), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn merge_sums_sizes() {
        let inst = gen_synthetic(100, 10, 4, 0.1, 2).unwrap();
        let merged = merge_clusters(&inst, &[vec![0, 1], vec![2, 3]]).unwrap();
        let s = inst.cluster_sizes();
        assert_eq!(merged.cluster_sizes(), &[s[0] + s[1], s[2] + s[3]]);
        assert!(merge_clusters(&inst, &[vec![0, 1], vec![2]]).is_err());
        assert!(merge_clusters(&inst, &[vec![0, 1, 2, 3]]).is_err());
        assert!(merge_clusters(&inst, &[vec![0, 1], vec![1, 2, 3]]).is_err());
    }
}
