//! Reduction from coverage set systems to single-element-per-action instances.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::error::{Error, Result};
use crate::model::{Action, Instance};
use crate::num::{exp_neg_bounds, from_usize, rat, Rational};
use crate::rewards::RewardSpec;

/// Universe `0..universe`, target size `k`, one set per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    pub universe: usize,
    pub k: usize,
    pub sets: Vec<Vec<usize>>,
}

impl SetSystem {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.universe == 0 || !self.universe.is_multiple_of(self.k) {
            return Err(Error::Precondition("k must divide a nonempty universe".into()));
        }
        let size = self.universe / self.k;
        for set in &self.sets {
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != set.len() || s.len() != size || s.iter().any(|u| *u >= self.universe) {
                return Err(Error::Precondition("every set needs universe/k distinct elements".into()));
            }
        }
        Ok(())
    }

    /// Number of elements covered by the sets picked in `mask`.
    pub fn covered(&self, mask: u64) -> usize {
        let mut hit = vec![false; self.universe];
        for (i, set) in self.sets.iter().enumerate() {
            if mask & 1 << i != 0 {
                for &u in set {
                    hit[u] = true;
                }
            }
        }
        hit.iter().filter(|h| **h).count()
    }
}

/// Agent `i` gets one action per element of set `i`; each action covers its
/// element, costs `1 / (2 k |U|)`, and the reward is the covered fraction.
pub fn gen_matroid_reduction(system: &SetSystem) -> Result<Instance> {
    system.validate()?;
    let u = from_usize(system.universe);
    let cost = Rational::one() / (from_usize(2 * system.k) * &u);
    let mut actions = Vec::new();
    let mut covers = Vec::new();
    for (i, set) in system.sets.iter().enumerate() {
        let mut s = set.clone();
        s.sort_unstable();
        for e in s {
            actions.push(Action { agent: i, cost: cost.clone() });
            covers.push(vec![e]);
        }
    }
    let reward = RewardSpec::Coverage { universe: vec![Rational::one(); system.universe], covers, normalizer: u };
    Instance::new(system.sets.len(), actions, reward)
}

/// Four elements, `k = 2`, sets `{0,1}`, `{2,3}`, `{0,2}`: two disjoint sets cover everything.
pub fn matroid_good_case() -> SetSystem {
    SetSystem { universe: 4, k: 2, sets: vec![vec![0, 1], vec![2, 3], vec![0, 2]] }
}

/// Sixteen elements, `k = 8`, five pairs sharing element 0: any `b` sets cover
/// only `b + 1` elements.
pub fn matroid_bad_case() -> SetSystem {
    SetSystem { universe: 16, k: 8, sets: (1..=5).map(|e| vec![0, e]).collect() }
}

/// A subfamily of at most `2k` sets covering more than
/// `1 - exp(-|B|/k) + 1/100` of the universe, if one exists.
pub fn bad_case_violation(system: &SetSystem) -> Option<u64> {
    let r = system.sets.len();
    assert!(r <= 20, "exhaustive check is limited to 20 sets");
    let u = from_usize(system.universe);
    for mask in 0u64..1 << r {
        let b = mask.count_ones() as usize;
        if b > 2 * system.k {
            continue;
        }
        let (_, exp_hi) = exp_neg_bounds(&Rational::new(b.into(), system.k.into()));
        let bound = Rational::one() - exp_hi + rat(1, 100);
        if from_usize(system.covered(mask)) / &u > bound {
            return Some(mask);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_shape() {
        let inst = gen_matroid_reduction(&matroid_good_case()).unwrap();
        assert_eq!((inst.n(), inst.m()), (3, 6));
        assert_eq!(*inst.cost(0), rat(1, 16));
        let all: crate::profile::ActionProfile = (0..6).collect();
        assert_eq!(inst.value(&all), Rational::one());
    }

    #[test]
    fn bad_case_meets_its_coverage_bound() {
        let sys = matroid_bad_case();
        sys.validate().unwrap();
        assert_eq!(bad_case_violation(&sys), None);
        // The good case is far from it: two disjoint sets cover everything.
        assert!(bad_case_violation(&matroid_good_case()).is_some());
    }

    #[test]
    fn rejects_wrong_set_size() {
        let sys = SetSystem { universe: 4, k: 2, sets: vec![vec![0]] };
        assert!(gen_matroid_reduction(&sys).is_err());
    }
}
