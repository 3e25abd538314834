//! Reward classes, value oracles and demand queries.

mod demand;
mod probe;
mod regularized;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

pub use demand::{demand, exhaustive_argmax, Price, PriceVector};
pub use probe::{probe_submodular, submodular_exhaustive, SubmodularViolation};
pub use regularized::{approx_demand_regularized, Regularized};

use crate::error::{Error, Result};
use crate::num::{from_usize, Rational};
use crate::profile::ActionProfile;

/// Anything that can evaluate a set function on action sets.
pub trait ValueOracle {
    fn value(&self, s: &ActionProfile) -> Rational;

    /// `f(S + j) - f(S - j)`.
    fn marginal(&self, j: usize, s: &ActionProfile) -> Rational {
        let mut with = s.clone();
        with.insert(j);
        let mut without = s.clone();
        without.remove(j);
        self.value(&with) - self.value(&without)
    }
}

/// Reward function families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewardSpec {
    /// `f(S) = sum of weights[j]`.
    Additive { weights: Vec<Rational> },
    /// Weighted coverage of a ground universe, divided by `normalizer`.
    Coverage { universe: Vec<Rational>, covers: Vec<Vec<usize>>, normalizer: Rational },
    /// `unit` times the number of parts touched.
    PartitionMatroid { parts: Vec<Vec<usize>>, unit: Rational },
    /// Maximum over additive clauses.
    Xos { clauses: Vec<Vec<Rational>> },
    /// Explicit table indexed by the bitmask of the action set.
    Table { values: Vec<Rational> },
    /// Hard family on `ell^7` agents with `ell^3` actions each and a planted
    /// set of agents; `with_planted = false` drops the planted term.
    HardnessXos { ell: usize, planted: Vec<usize>, with_planted: bool },
    /// Symmetric subadditive reward on `n` single-action agents (`n` a square).
    SubadditivePoe { n: usize },
}

impl RewardSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            RewardSpec::Additive { .. } => "additive",
            RewardSpec::Coverage { .. } => "coverage",
            RewardSpec::PartitionMatroid { .. } => "partition_matroid",
            RewardSpec::Xos { .. } => "xos",
            RewardSpec::Table { .. } => "table",
            RewardSpec::HardnessXos { .. } => "hardness_xos",
            RewardSpec::SubadditivePoe { .. } => "subadditive_poe",
        }
    }

    /// Known to be submodular by construction.
    pub fn is_submodular_class(&self) -> bool {
        matches!(self, RewardSpec::Additive { .. } | RewardSpec::Coverage { .. } | RewardSpec::PartitionMatroid { .. })
    }

    /// Known to be XOS by construction.
    pub fn is_xos_class(&self) -> bool {
        self.is_submodular_class() || matches!(self, RewardSpec::Xos { .. } | RewardSpec::HardnessXos { .. })
    }

    /// Known to satisfy gross substitutes by construction.
    pub fn is_gs_class(&self) -> bool {
        matches!(self, RewardSpec::Additive { .. } | RewardSpec::PartitionMatroid { .. })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            RewardSpec::Additive { weights } => weights.len(),
            RewardSpec::Coverage { covers, .. } => covers.len(),
            RewardSpec::PartitionMatroid { parts, .. } => parts.iter().map(Vec::len).sum(),
            RewardSpec::Xos { clauses } => clauses.first().map_or(0, Vec::len),
            RewardSpec::Table { values } => values.len().trailing_zeros() as usize,
            RewardSpec::HardnessXos { ell, .. } => ell.pow(10),
            RewardSpec::SubadditivePoe { n } => *n,
        }
    }

    pub(crate) fn check_shape(&self, m: usize) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidInstance(msg));
        let neg = |v: &[Rational]| v.iter().any(Signed::is_negative);
        match self {
            RewardSpec::Additive { weights } => {
                if weights.len() != m {
                    return bad(format!("{} additive weights for {m} actions", weights.len()));
                }
                if neg(weights) {
                    return bad("negative additive weight".into());
                }
            }
            RewardSpec::Coverage { universe, covers, normalizer } => {
                if covers.len() != m {
                    return bad(format!("{} cover lists for {m} actions", covers.len()));
                }
                if neg(universe) || !normalizer.is_positive() {
                    return bad("coverage weights must be nonnegative and the normalizer positive".into());
                }
                if covers.iter().flatten().any(|u| *u >= universe.len()) {
                    return bad("cover list names an element outside the universe".into());
                }
            }
            RewardSpec::PartitionMatroid { parts, unit } => {
                let mut seen = vec![false; m];
                for &j in parts.iter().flatten() {
                    if j >= m || seen[j] {
                        return bad("parts must partition the actions".into());
                    }
                    seen[j] = true;
                }
                if seen.iter().any(|s| !s) || unit.is_negative() {
                    return bad("parts must partition the actions with a nonnegative unit".into());
                }
            }
            RewardSpec::Xos { clauses } => {
                if clauses.iter().any(|c| c.len() != m || neg(c)) {
                    return bad("every clause needs one nonnegative weight per action".into());
                }
            }
            RewardSpec::Table { values } => {
                if m >= 32 || values.len() != 1usize << m {
                    return bad(format!("table needs 2^{m} entries"));
                }
                if !values[0].is_zero() {
                    return bad("table value of the empty set must be 0".into());
                }
            }
            RewardSpec::HardnessXos { ell, planted, .. } => {
                if *ell == 0 || m != ell.pow(10) {
                    return bad("hardness family needs ell^10 actions".into());
                }
                let agents = ell.pow(7);
                if planted.windows(2).any(|w| w[0] >= w[1]) || planted.iter().any(|g| *g >= agents) {
                    return bad("planted agents must be sorted, distinct and in range".into());
                }
            }
            RewardSpec::SubadditivePoe { n } => {
                let r = isqrt(*n);
                if *n < 4 || r * r != *n || m != *n {
                    return bad("subadditive family needs a square n >= 4 with one action per agent".into());
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, s: &ActionProfile) -> Rational {
        match self {
            RewardSpec::Additive { weights } => s.iter().fold(Rational::zero(), |acc, j| acc + &weights[j]),
            RewardSpec::Coverage { universe, covers, normalizer } => {
                let mut hit = ActionProfile::new();
                for j in s.iter() {
                    hit.extend(covers[j].iter().copied());
                }
                hit.iter().fold(Rational::zero(), |acc, u| acc + &universe[u]) / normalizer
            }
            RewardSpec::PartitionMatroid { parts, unit } => {
                let touched = parts.iter().filter(|p| p.iter().any(|j| s.contains(*j))).count();
                unit * from_usize(touched)
            }
            RewardSpec::Xos { clauses } => clauses
                .iter()
                .map(|c| s.iter().fold(Rational::zero(), |acc, j| acc + &c[j]))
                .max()
                .unwrap_or_else(Rational::zero),
            RewardSpec::Table { values } => {
                let mask = s.to_mask().expect("table rewards index actions below 64");
                values[mask as usize].clone()
            }
            RewardSpec::HardnessXos { ell, planted, with_planted } => hardness_value(*ell, planted, *with_planted, s),
            RewardSpec::SubadditivePoe { n } => subadditive_value(*n, s.len()),
        }
    }

    /// `f(S + j) - f(S - j)`.
    pub fn marginal(&self, j: usize, s: &ActionProfile) -> Rational {
        ValueOracle::marginal(self, j, s)
    }

    /// Value of `{j}` for every action.
    pub fn singleton_values(&self, m: usize) -> Vec<Rational> {
        (0..m).map(|j| self.value(&ActionProfile::from_ids([j]))).collect()
    }

    /// Exhaustive check that `f(empty) = 0` and `f` is monotone; returns a
    /// violating pair `(S, j)` with `f(S + j) < f(S)`.
    pub fn monotone_violation(&self, m: usize) -> Option<(ActionProfile, usize)> {
        let ground: Vec<usize> = (0..m).collect();
        if !self.value(&ActionProfile::new()).is_zero() {
            return Some((ActionProfile::new(), usize::MAX));
        }
        let table: Vec<Rational> =
            (0..1u64 << m).map(|mask| self.value(&ActionProfile::from_mask(mask, &ground))).collect();
        for mask in 0..1u64 << m {
            for j in 0..m {
                if mask & (1 << j) == 0 && table[(mask | 1 << j) as usize] < table[mask as usize] {
                    return Some((ActionProfile::from_mask(mask, &ground), j));
                }
            }
        }
        None
    }
}

impl ValueOracle for RewardSpec {
    fn value(&self, s: &ActionProfile) -> Rational {
        RewardSpec::value(self, s)
    }
}

pub fn isqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn hardness_value(ell: usize, planted: &[usize], with_planted: bool, s: &ActionProfile) -> Rational {
    if s.is_empty() {
        return Rational::zero();
    }
    let per_agent = ell.pow(3);
    let mut agents = 0usize;
    let mut last = usize::MAX;
    let mut in_planted = 0usize;
    for j in s.iter() {
        let owner = j / per_agent;
        if owner != last {
            agents += 1;
            last = owner;
        }
        if with_planted && planted.binary_search(&owner).is_ok() {
            in_planted += 1;
        }
    }
    let mut best = from_usize(agents.max(per_agent));
    if with_planted {
        let planted_term = Rational::new(in_planted.into(), ell.into());
        if planted_term > best {
            best = planted_term;
        }
    }
    best
}

fn subadditive_value(n: usize, size: usize) -> Rational {
    let root = from_usize(isqrt(n));
    let n_r = from_usize(n);
    if size == 0 {
        Rational::zero()
    } else if size < n {
        Rational::one() / &root + from_usize(size) / &n_r
    } else {
        from_usize(2) / &root + from_usize(n - 1) / &n_r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn ids(v: &[usize]) -> ActionProfile {
        ActionProfile::from_ids(v.iter().copied())
    }

    #[test]
    fn coverage_counts_each_element_once() {
        let f = RewardSpec::Coverage {
            universe: vec![rat(1, 1), rat(2, 1), rat(3, 1)],
            covers: vec![vec![0, 1], vec![1, 2]],
            normalizer: rat(6, 1),
        };
        assert_eq!(f.value(&ids(&[0])), rat(1, 2));
        assert_eq!(f.value(&ids(&[0, 1])), rat(1, 1));
        assert_eq!(f.marginal(1, &ids(&[0])), rat(1, 2));
    }

    #[test]
    fn matroid_and_xos_values() {
        let pm = RewardSpec::PartitionMatroid { parts: vec![vec![0, 2], vec![1]], unit: rat(1, 2) };
        assert_eq!(pm.value(&ids(&[0, 2])), rat(1, 2));
        assert_eq!(pm.value(&ids(&[0, 1])), rat(1, 1));
        let xos = RewardSpec::Xos { clauses: vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 2)]] };
        assert_eq!(xos.value(&ids(&[0])), rat(1, 1));
        assert_eq!(xos.value(&ids(&[0, 1])), rat(1, 1));
        assert_eq!(xos.value(&ids(&[1])), rat(1, 2));
    }

    #[test]
    fn hardness_closed_form() {
        // ell = 1: one agent, one action.
        let f = RewardSpec::HardnessXos { ell: 1, planted: vec![0], with_planted: true };
        assert_eq!(f.value(&ids(&[0])), rat(1, 1));
        assert_eq!(f.value(&ActionProfile::new()), rat(0, 1));
        // ell = 2 values without materializing the instance.
        let g = RewardSpec::HardnessXos { ell: 2, planted: vec![0, 1, 2, 3], with_planted: true };
        let h = RewardSpec::HardnessXos { ell: 2, planted: vec![0, 1, 2, 3], with_planted: false };
        let one = ids(&[5]);
        assert_eq!(g.value(&one), rat(8, 1));
        let all_planted: ActionProfile = (0..32).collect();
        assert_eq!(g.value(&all_planted), rat(16, 1));
        assert_eq!(h.value(&all_planted), rat(8, 1));
        let spread: ActionProfile = (0..20).map(|i| i * 8).collect();
        assert_eq!(g.value(&spread), rat(20, 1));
    }

    #[test]
    fn subadditive_values() {
        let f = RewardSpec::SubadditivePoe { n: 16 };
        assert_eq!(f.value(&ids(&[3])), rat(1, 4) + rat(1, 16));
        let all: ActionProfile = (0..16).collect();
        assert_eq!(f.value(&all), rat(1, 2) + rat(15, 16));
    }

    #[test]
    fn monotone_check_finds_table_violation() {
        let good = RewardSpec::Table { values: vec![rat(0, 1), rat(1, 2), rat(1, 2), rat(1, 1)] };
        assert!(good.monotone_violation(2).is_none());
        let bad = RewardSpec::Table { values: vec![rat(0, 1), rat(1, 1), rat(1, 2), rat(1, 2)] };
        let (s, j) = bad.monotone_violation(2).unwrap();
        assert_eq!((s.to_vec(), j), (vec![0], 1));
    }

    #[test]
    fn shape_checks() {
        let pm = RewardSpec::PartitionMatroid { parts: vec![vec![0], vec![0, 1]], unit: rat(1, 1) };
        assert!(pm.check_shape(2).is_err());
        assert!(RewardSpec::SubadditivePoe { n: 15 }.check_shape(15).is_err());
        assert!(RewardSpec::SubadditivePoe { n: 16 }.check_shape(16).is_ok());
    }
}
