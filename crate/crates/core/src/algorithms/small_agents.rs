use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{finish, single_agent_exact, zero_contract, Branch, SolveResult, Trace};
use crate::equilibrium::{br_dynamics, find_equilibrium, EquilibriumMode};
use crate::error::{Error, Result};
use crate::model::{eqcontract, Contract, Instance, Objective};
use crate::num::{from_usize, Rational};
use crate::profile::ActionProfile;
use crate::rewards::{approx_demand_regularized, PriceVector, Regularized, ValueOracle};

/// An agent counts as large when it alone generates more than this share of the reward.
pub const LARGE_AGENT_SHARE: (i64, i64) = (1, 16);
/// Loss factor when combining the small-agent and single-agent cases.
pub const SMALL_AGENT_COMBINATION: i64 = 1120;

/// How the returned equilibrium was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumSource {
    /// Worst equilibrium by exhaustive enumeration.
    ExhaustiveWorst,
    /// Best-response dynamics started from the chosen set.
    Dynamics,
    /// No round ran; the zero contract with free actions.
    NotRun,
}

/// One iteration of the small-agent algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alg1Round {
    pub k: usize,
    /// `c_j * k / 2` for every action.
    pub prices: Vec<Rational>,
    /// Approximate demand set after pruning.
    pub demand: ActionProfile,
    pub branch: Branch,
    pub chosen: ActionProfile,
    pub contract: Contract,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alg1Trace {
    pub rounds: Vec<Alg1Round>,
    pub k_star: Option<usize>,
    pub source: EquilibriumSource,
}

/// Equal-pay contract for submodular rewards when no agent is large.
///
/// For each target size `k` the reward is discounted by `min(1, k / |A(S)|)`,
/// an approximate demand set is taken at prices `c_j k / 2` and pruned of
/// actions whose discounted marginal falls below their price. If few enough
/// agents remain they are all paid `4/k`; otherwise `floor(k/8)` agents are
/// picked greedily. The `k` with the largest reward wins.
pub fn submodular_equal_pay_small_agents(inst: &Instance, cap: usize) -> Result<SolveResult> {
    if !inst.reward().is_submodular_class() {
        return Err(Error::NonSubmodularClass);
    }
    let n = inst.n();
    if n < 8 {
        let (contract, free) = zero_contract(inst);
        let trace =
            Trace::SmallAgents(Alg1Trace { rounds: Vec::new(), k_star: None, source: EquilibriumSource::NotRun });
        return finish(inst, &Objective::Profit, contract, free, Branch::ZeroContract, trace, cap);
    }
    let owners = inst.owners();
    let half = Rational::new(1.into(), 2.into());
    let mut rounds = Vec::with_capacity(n - 7);
    for k in 8..=n {
        let kr = from_usize(k);
        let prices: Vec<Rational> = (0..inst.m()).map(|j| inst.cost(j) * &kr / from_usize(2)).collect();
        let surrogate = Regularized { reward: inst.reward(), owners: &owners, k };
        let mut q = approx_demand_regularized(inst.reward(), &owners, &PriceVector::finite(prices.clone()), k);
        prune(&surrogate, &mut q, &prices);
        let active: Vec<usize> = inst.active_agents(&q);
        let (branch, chosen, paid) = if 8 * active.len() <= k {
            (Branch::Alg1SmallQ { k }, q.clone(), active)
        } else {
            let (v, picked) = greedy_agents(inst, &q, &active, k / 8);
            (Branch::Alg1GreedyV { k }, v, picked)
        };
        let contract = eqcontract(n, &(from_usize(4) / &kr), &paid)?;
        if contract.total() > half {
            return Err(Error::AssertionFailed("small-agent round pays more than 1/2".into()));
        }
        rounds.push(Alg1Round { k, prices, demand: q, branch, chosen, contract });
    }
    let mut star = 0;
    for (idx, r) in rounds.iter().enumerate() {
        if inst.value(&r.chosen) > inst.value(&rounds[star].chosen) {
            star = idx;
        }
    }
    let round = &rounds[star];
    let (equilibrium, source) = if inst.m() <= cap {
        (
            find_equilibrium(inst, &round.contract, EquilibriumMode::ExhaustiveWorst, cap)?,
            EquilibriumSource::ExhaustiveWorst,
        )
    } else {
        (br_dynamics(inst, &round.contract, &round.chosen, cap)?, EquilibriumSource::Dynamics)
    };
    let contract = round.contract.clone();
    let branch = round.branch.clone();
    let floor = inst.value(&round.chosen) / from_usize(4);
    let k_star = round.k;
    let trace = Trace::SmallAgents(Alg1Trace { rounds, k_star: Some(k_star), source });
    let out = finish(inst, &Objective::Profit, contract, equilibrium, branch, trace, cap)?;
    if out.objective_value < floor {
        return Err(Error::AssertionFailed("equilibrium profit fell below a quarter of the chosen reward".into()));
    }
    Ok(out)
}

/// Drops, one at a time and lowest id first, actions whose discounted
/// marginal is below their price. Such a marginal also bounds the plain one.
fn prune(surrogate: &Regularized<'_>, q: &mut ActionProfile, prices: &[Rational]) {
    loop {
        let total = surrogate.value(q);
        let victim = q.iter().find(|&j| {
            let mut rest = q.clone();
            rest.remove(j);
            &total - surrogate.value(&rest) < prices[j]
        });
        match victim {
            Some(j) => {
                q.remove(j);
            }
            None => return,
        }
    }
}

/// Greedily adds `count` agents of `active`, each maximizing the reward of
/// the chosen agents' parts of `q`; ties go to the lower id.
fn greedy_agents(inst: &Instance, q: &ActionProfile, active: &[usize], count: usize) -> (ActionProfile, Vec<usize>) {
    let mut v = ActionProfile::new();
    let mut chosen = BTreeSet::new();
    for _ in 0..count {
        let mut best: Option<(Rational, usize)> = None;
        for &i in active {
            if chosen.contains(&i) {
                continue;
            }
            let value = inst.value(&v.union(&inst.agent_part(q, i)));
            if best.as_ref().is_none_or(|b| value > b.0) {
                best = Some((value, i));
            }
        }
        let Some((_, i)) = best else { break };
        chosen.insert(i);
        v = v.union(&inst.agent_part(q, i));
    }
    (v, chosen.into_iter().collect())
}

/// Best of the small-agent algorithm, the best single-agent contract and the
/// zero contract, by exact profit.
pub fn equal_pay_constant_approx(inst: &Instance, cap: usize) -> Result<SolveResult> {
    if !inst.reward().is_submodular_class() {
        return Err(Error::NonSubmodularClass);
    }
    let (zero, free) = zero_contract(inst);
    let candidates = [
        submodular_equal_pay_small_agents(inst, cap)?,
        single_agent_exact(inst, cap)?,
        finish(inst, &Objective::Profit, zero, free, Branch::ZeroContract, Trace::None, cap)?,
    ];
    let mut best: Option<SolveResult> = None;
    for c in candidates {
        if best.as_ref().is_none_or(|b| c.objective_value > b.objective_value) {
            best = Some(c);
        }
    }
    Ok(best.expect("three candidates"))
}

/// Every active agent of `s` generates at most the large-agent share of `f(s)` on its own.
pub fn no_large_agent(inst: &Instance, s: &ActionProfile) -> bool {
    let (num, den) = LARGE_AGENT_SHARE;
    let cap = inst.value(s) * Rational::new(num.into(), den.into());
    inst.active_agents(s).into_iter().all(|i| inst.value(&inst.agent_part(s, i)) <= cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_intro_example, gen_random_coverage, CoverageParams};
    use crate::num::rat;
    use num_traits::Zero;

    fn coverage(seed: u64) -> Instance {
        let p = CoverageParams { agents: 10, actions_per_agent: 1, universe: 12, density: (1, 4), max_cost_64ths: 2 };
        gen_random_coverage(&p, seed).unwrap()
    }

    #[test]
    fn zero_costs_pay_at_most_half() {
        let p = CoverageParams { agents: 9, actions_per_agent: 1, universe: 10, density: (1, 3), max_cost_64ths: 0 };
        let inst = gen_random_coverage(&p, 4).unwrap();
        let r = submodular_equal_pay_small_agents(&inst, 20).unwrap();
        let Trace::SmallAgents(t) = &r.trace else { panic!("missing trace") };
        assert!(t.rounds.iter().all(|r| r.contract.total() <= rat(1, 2)));
        assert!(t.rounds.iter().any(|r| !inst.value(&r.chosen).is_zero()));
    }

    #[test]
    fn worst_equilibrium_keeps_a_quarter() {
        let inst = coverage(11);
        let r = submodular_equal_pay_small_agents(&inst, 20).unwrap();
        let Trace::SmallAgents(t) = &r.trace else { panic!("missing trace") };
        let k = t.k_star.unwrap();
        let round = t.rounds.iter().find(|x| x.k == k).unwrap();
        assert_eq!(t.source, EquilibriumSource::ExhaustiveWorst);
        assert!(r.objective_value * from_usize(4) >= inst.value(&round.chosen));
    }

    #[test]
    fn intro_falls_back_to_single_agent() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let r = equal_pay_constant_approx(&inst, 20).unwrap();
        assert_eq!((r.objective_value, r.branch), (rat(1, 4), Branch::SingleAgent));
    }

    #[test]
    fn all_free_uses_the_zero_contract() {
        let p = CoverageParams { agents: 3, actions_per_agent: 2, universe: 6, density: (1, 2), max_cost_64ths: 0 };
        let inst = gen_random_coverage(&p, 2).unwrap();
        let r = equal_pay_constant_approx(&inst, 20).unwrap();
        let all: ActionProfile = (0..inst.m()).collect();
        assert_eq!(r.objective_value, inst.value(&all));
        assert!(r.contract.total().is_zero());
    }

    #[test]
    fn large_agent_share_check() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        assert!(!no_large_agent(&inst, &ActionProfile::from_ids([0, 2])));
    }
}
