//! The planted XOS family used to show that demand queries rarely find the planted agents.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{checked, Witness};
use crate::error::{Error, Result};
use crate::model::{eqcontract, Action, Contract, Instance};
use crate::num::{binomial, from_usize, Rational};
use crate::profile::ActionProfile;
use crate::rewards::{Price, RewardSpec};

/// Sizes of the family at parameter `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardnessShape {
    pub ell: usize,
    pub agents: usize,
    pub actions_per_agent: usize,
    pub planted: usize,
}

impl HardnessShape {
    pub fn new(ell: usize) -> Self {
        Self { ell, agents: ell.pow(7), actions_per_agent: ell.pow(3), planted: ell * ell }
    }
}

/// Uniformly random planted set of `ell^2` agents.
pub fn sample_planted(ell: usize, seed: u64) -> Vec<usize> {
    let shape = HardnessShape::new(ell);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g: Vec<usize> = sample(&mut rng, shape.agents, shape.planted).into_vec();
    g.sort_unstable();
    g
}

/// Materializes the family for `ell <= 3`: every action costs `1 / (2 ell^3)`.
/// `with_planted = false` gives the variant without the planted term.
pub fn gen_xos_hardness(ell: usize, planted: &[usize], with_planted: bool) -> Result<Instance> {
    if ell == 0 || ell > 3 {
        return Err(Error::Precondition("the hardness family is materialized for 1 <= ell <= 3 only".into()));
    }
    let shape = HardnessShape::new(ell);
    let mut g = planted.to_vec();
    g.sort_unstable();
    g.dedup();
    if g.len() != shape.planted || g.iter().any(|i| *i >= shape.agents) {
        return Err(Error::Precondition("planted set must hold ell^2 distinct agents".into()));
    }
    let cost = Rational::new(1.into(), (2 * shape.actions_per_agent).into());
    let actions = (0..shape.agents * shape.actions_per_agent)
        .map(|j| Action { agent: j / shape.actions_per_agent, cost: cost.clone() })
        .collect();
    let reward = RewardSpec::HardnessXos { ell, planted: g, with_planted };
    Instance::with_scale(shape.agents, actions, reward, from_usize(shape.agents))
}

/// Equal pay `1 / (2 ell^2)` to the planted agents, who then take all their actions.
pub fn hardness_witness(inst: &Instance, ell: usize, planted: &[usize]) -> Result<Witness> {
    let level = Rational::new(1.into(), (2 * ell * ell).into());
    let contract = eqcontract(inst.n(), &level, planted)?;
    let profile = planted.iter().flat_map(|i| inst.actions_of(*i).iter().copied()).collect();
    checked(inst, Witness { contract, profile })
}

/// Agents owning an action priced at most `1/ell`, from `(action, price)` pairs.
pub fn cheap_agents<'a, I>(entries: I, ell: usize) -> BTreeSet<usize>
where
    I: IntoIterator<Item = (usize, &'a Price)>,
{
    let per_agent = ell.pow(3);
    let limit = Rational::new(1.into(), ell.into());
    entries
        .into_iter()
        .filter(|(_, p)| matches!(p, Price::Finite(x) if *x <= limit))
        .map(|(j, _)| j / per_agent)
        .collect()
}

/// Whether a query at prices with cheap-agent set `cheap` can tell the
/// planted instance apart: fewer than `2 ell^4` cheap agents and more than
/// `ell` of them planted.
pub fn classify_query_informative(cheap: &BTreeSet<usize>, planted: &[usize], ell: usize) -> bool {
    let hits = planted.iter().filter(|g| cheap.contains(g)).count();
    cheap.len() < 2 * ell.pow(4) && hits > ell
}

/// More than `ell` planted agents receive at least `1 / (2 ell^2)` and the
/// payments sum to at most 1.
pub fn classify_contract_aligned(alpha: &Contract, planted: &[usize], ell: usize) -> bool {
    let level = Rational::new(1.into(), (2 * ell * ell).into());
    let hits = planted.iter().filter(|g| *alpha.get(**g) >= level).count();
    hits > ell && alpha.total() <= Rational::from_integer(1.into())
}

/// Exact probability that a uniformly random planted set of `ell^2` agents
/// among `ell^7` makes a query with `cheap_count` cheap agents informative.
pub fn informative_probability_exact(cheap_count: usize, ell: usize) -> Rational {
    let shape = HardnessShape::new(ell);
    if cheap_count >= 2 * ell.pow(4) {
        return Rational::zero();
    }
    let (total, draws, l) = (shape.agents as u64, shape.planted as u64, cheap_count as u64);
    let mut hits = BigInt::zero();
    for x in (ell as u64 + 1)..=draws.min(l) {
        if draws - x > total - l {
            continue;
        }
        hits += binomial(l, x) * binomial(total - l, draws - x);
    }
    Rational::new(hits, binomial(total, draws))
}

/// Planted agents with a nonempty action set in `s`.
pub fn planted_active(inst: &Instance, s: &ActionProfile, planted: &[usize]) -> usize {
    inst.active_agents(s).iter().filter(|i| planted.binary_search(i).is_ok()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::is_nash;
    use crate::model::profit;
    use crate::num::rat;

    #[test]
    fn witness_at_ell_two() {
        let g = sample_planted(2, 11);
        assert_eq!(g.len(), 4);
        let inst = gen_xos_hardness(2, &g, true).unwrap();
        assert_eq!((inst.n(), inst.m()), (128, 1024));
        let w = hardness_witness(&inst, 2, &g).unwrap();
        assert!(is_nash(&inst, &w.contract, &w.profile, 20).unwrap().is_stable());
        assert_eq!(inst.value(&w.profile), rat(16, 1));
        assert_eq!(profit(&inst, &w.contract, &w.profile), rat(8, 1));
        assert!(classify_contract_aligned(&w.contract, &g, 2));
    }

    #[test]
    fn tail_matches_direct_count_for_ell_one() {
        // ell = 1: one agent, planted set of size 1; a query needs |L| < 2 and one hit above 1, impossible.
        assert_eq!(informative_probability_exact(1, 1), Rational::zero());
    }

    #[test]
    fn tail_is_a_probability_and_monotone() {
        let mut last = Rational::zero();
        for l in [0, 3, 10, 20, 31] {
            let p = informative_probability_exact(l, 2);
            assert!(p >= last && p <= rat(1, 1));
            last = p;
        }
        assert_eq!(informative_probability_exact(32, 2), Rational::zero());
        // |L| = 3 at ell = 2: all three must be planted among 4 of 128.
        let expect = Rational::new(binomial(3, 3) * binomial(125, 1), binomial(128, 4));
        assert_eq!(informative_probability_exact(3, 2), expect);
    }

    #[test]
    fn informative_classification() {
        let g = [0, 1, 2, 3];
        let cheap: BTreeSet<usize> = [0, 1, 2, 9].into_iter().collect();
        assert!(classify_query_informative(&cheap, &g, 2));
        let cheap: BTreeSet<usize> = [0, 1, 9].into_iter().collect();
        assert!(!classify_query_informative(&cheap, &g, 2));
        let many: BTreeSet<usize> = (0..32).collect();
        assert!(!classify_query_informative(&many, &g, 2));
    }
}
