//! Seeded random instances. The same arguments always produce the same instance.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Action, Instance};
use crate::num::{from_usize, rat, Rational};
use crate::rewards::RewardSpec;

/// Shape of a random coverage instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageParams {
    pub agents: usize,
    pub actions_per_agent: usize,
    pub universe: usize,
    /// Probability that an action covers a given element, as `num / den`.
    pub density: (u32, u32),
    /// Costs are drawn from `{0, 1/64, ..., max_cost_64ths/64}`.
    pub max_cost_64ths: u32,
}

/// Weighted coverage with integer element weights in `1..=4`, normalized to
/// total 1, and costs on a grid of multiples of `1/64`.
pub fn gen_random_coverage(params: &CoverageParams, seed: u64) -> Result<Instance> {
    let CoverageParams { agents, actions_per_agent, universe, density, max_cost_64ths } = *params;
    if universe == 0 || density.1 == 0 || density.0 > density.1 {
        return Err(Error::Precondition("need a nonempty universe and a density in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Rational> = (0..universe).map(|_| from_usize(rng.gen_range(1..=4))).collect();
    let total = weights.iter().fold(Rational::zero(), |a, w| a + w);
    let mut actions = Vec::new();
    let mut covers = Vec::new();
    for i in 0..agents {
        for _ in 0..actions_per_agent {
            let cover: Vec<usize> = (0..universe).filter(|_| rng.gen_ratio(density.0, density.1)).collect();
            covers.push(cover);
            actions.push(Action { agent: i, cost: rat(rng.gen_range(0..=max_cost_64ths) as i64, 64) });
        }
    }
    Instance::new(agents, actions, RewardSpec::Coverage { universe: weights, covers, normalizer: total })
}

/// `m` actions spread over `n` agents (each agent gets at least one when
/// `m >= n`), weights in `{1/16, ..., 1/2}` and costs in `{0, 1/64, ..., 1/8}`.
pub fn gen_random_additive(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Precondition("need at least one agent".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owners: Vec<usize> = (0..m).map(|j| j % n).collect();
    owners.shuffle(&mut rng);
    let mut actions = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for owner in owners {
        weights.push(rat(rng.gen_range(1..=8), 16));
        actions.push(Action { agent: owner, cost: rat(rng.gen_range(0..=8), 64) });
    }
    let scale = weights.iter().fold(Rational::zero(), |a, w| a + w).max(rat(1, 1));
    Instance::with_scale(n, actions, RewardSpec::Additive { weights }, scale)
}

/// One action per agent, `clauses` additive clauses with weights in
/// `{0, 1/16, ..., 1/2}` and costs in `{0, 1/128, ..., 1/16}`.
pub fn gen_random_xos_binary(n: usize, clauses: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clause_list: Vec<Vec<Rational>> =
        (0..clauses).map(|_| (0..n).map(|_| rat(rng.gen_range(0..=8), 16)).collect()).collect();
    let actions = (0..n).map(|i| Action { agent: i, cost: rat(rng.gen_range(0..=8), 128) }).collect();
    let scale = from_usize(n.max(1));
    Instance::with_scale(n, actions, RewardSpec::Xos { clauses: clause_list }, scale)
}

/// Partition matroid rank on random parts, `actions_per_agent` actions per
/// agent and costs in `{0, 1/64, ..., 1/8}`; every part is worth `1/parts`.
pub fn gen_random_partition_matroid(n: usize, actions_per_agent: usize, parts: usize, seed: u64) -> Result<Instance> {
    if parts == 0 {
        return Err(Error::Precondition("need at least one part".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = n * actions_per_agent;
    let mut part_list = vec![Vec::new(); parts];
    let mut actions = Vec::with_capacity(m);
    for j in 0..m {
        part_list[rng.gen_range(0..parts)].push(j);
        actions.push(Action { agent: j / actions_per_agent.max(1), cost: rat(rng.gen_range(0..=8), 64) });
    }
    part_list.retain(|p| !p.is_empty());
    let unit = Rational::new(1.into(), parts.into());
    Instance::new(n, actions, RewardSpec::PartitionMatroid { parts: part_list, unit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_deterministic() {
        let p = CoverageParams { agents: 3, actions_per_agent: 2, universe: 6, density: (1, 3), max_cost_64ths: 8 };
        assert_eq!(gen_random_coverage(&p, 5).unwrap(), gen_random_coverage(&p, 5).unwrap());
        assert_ne!(gen_random_coverage(&p, 5).unwrap(), gen_random_coverage(&p, 6).unwrap());
        assert_eq!(gen_random_additive(4, 9, 1).unwrap(), gen_random_additive(4, 9, 1).unwrap());
    }

    #[test]
    fn zero_density_gives_zero_reward() {
        let p = CoverageParams { agents: 2, actions_per_agent: 2, universe: 4, density: (0, 1), max_cost_64ths: 4 };
        let inst = gen_random_coverage(&p, 3).unwrap();
        let all: crate::profile::ActionProfile = (0..4).collect();
        assert!(inst.value(&all).is_zero());
    }

    #[test]
    fn additive_gives_every_agent_an_action() {
        let inst = gen_random_additive(5, 12, 9).unwrap();
        assert!((0..5).all(|i| !inst.actions_of(i).is_empty()));
        assert_eq!(inst.m(), 12);
    }
}
