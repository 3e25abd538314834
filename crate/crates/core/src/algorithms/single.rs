use num_traits::{One, Zero};

use super::{check_input_pair, dominant_agent, finish, input_profit, solo, Branch, SolveResult, Trace};
use crate::error::{Error, Result};
use crate::model::{Contract, Instance, Objective};
use crate::num::{from_usize, Rational};
use crate::oracle::{min_incentive_interval, IncentiveMode};
use crate::profile::ActionProfile;

/// Best contract paying a single agent, by exhaustive search over that
/// agent's action sets with everyone else idle.
///
/// For each set the payment is the least one making it a best response.
/// Ties keep the earlier agent and the earlier set in mask order.
pub fn single_agent_exact(inst: &Instance, cap: usize) -> Result<SolveResult> {
    let zero = Contract::zero(inst.n());
    let mut best: Option<(Rational, usize, Rational, ActionProfile)> = None;
    for i in 0..inst.n() {
        let pool = inst.actions_of(i);
        if pool.len() > cap || pool.len() > 40 {
            return Err(Error::CapExceeded { needed: pool.len(), cap });
        }
        for mask in 1u64..1 << pool.len() {
            let set = ActionProfile::from_mask(mask, pool);
            let iv = min_incentive_interval(inst, &set, i, IncentiveMode::Individual, cap)?;
            if !iv.feasible || iv.lo > Rational::one() {
                continue;
            }
            let profit = (Rational::one() - &iv.lo) * inst.value(&set);
            if best.as_ref().is_none_or(|b| profit > b.0) {
                best = Some((profit, i, iv.lo, set));
            }
        }
    }
    match best {
        Some((profit, i, pay, set)) if !profit.is_zero() => {
            let contract = Contract::zero(inst.n()).with_payment(i, pay)?;
            finish(inst, &Objective::Profit, contract, set, Branch::SingleAgent, Trace::None, cap)
        }
        _ => finish(inst, &Objective::Profit, zero, ActionProfile::new(), Branch::ZeroContract, Trace::None, cap),
    }
}

/// Single-agent contract within a factor `80 n` of the input pair's profit
/// for any monotone subadditive reward.
///
/// A dominant agent is paid halfway between its payment and 1. Otherwise
/// the small agent generating the most reward on its own is paid `3/4`.
pub fn single_agent_subadditive_baseline(
    inst: &Instance,
    alpha: &Contract,
    s: &ActionProfile,
    cap: usize,
) -> Result<SolveResult> {
    check_input_pair(inst, alpha, s, cap)?;
    let input = input_profit(inst, alpha, s);
    let half = Rational::new(1.into(), 2.into());
    let (branch, (contract, profile)) = if let Some(z) = dominant_agent(inst, alpha, s) {
        (Branch::LargeAgent, solo(inst, z, (alpha.get(z) + Rational::one()) * &half, cap)?)
    } else {
        let pick = inst
            .active_agents(s)
            .into_iter()
            .filter(|&i| *alpha.get(i) <= half)
            .map(|i| (inst.value(&inst.agent_part(s, i)), i))
            .fold(None::<(Rational, usize)>, |acc, x| match acc {
                Some(a) if a.0 >= x.0 => Some(a),
                _ => Some(x),
            });
        match pick {
            Some((_, k)) => (Branch::SingleAgent, solo(inst, k, Rational::new(3.into(), 4.into()), cap)?),
            None => (Branch::ZeroContract, (Contract::zero(inst.n()), ActionProfile::new())),
        }
    };
    let out = finish(inst, &Objective::Profit, contract, profile, branch, Trace::None, cap)?;
    let floor = input / (from_usize(80) * from_usize(inst.n().max(1)));
    if out.objective_value < floor {
        return Err(Error::AssertionFailed("single-agent baseline fell below 1/(80 n) of the input profit".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_coverage_gap, gen_intro_example, gen_subadditive_poe};
    use crate::num::rat;
    use alloc::vec;

    #[test]
    fn intro_single_agent() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let r = single_agent_exact(&inst, 20).unwrap();
        assert_eq!(r.objective_value, rat(1, 4));
        assert_eq!(r.contract.as_slice(), [rat(1, 2), rat(0, 1)]);
        assert_eq!(r.equilibrium.to_vec(), [0, 1]);
    }

    #[test]
    fn coverage_gap_prefers_the_helper() {
        // Paying the helper `eps^3 / 2` earns `(1 - eps^3/2) * 2 eps`, more
        // than paying agent 0 a half for its cheap action.
        let eps = rat(1, 10);
        let inst = gen_coverage_gap(&eps).unwrap();
        let r = single_agent_exact(&inst, 20).unwrap();
        assert_eq!(r.objective_value, rat(1999, 10000));
        assert_eq!(r.contract.as_slice(), [rat(0, 1), rat(1, 2000)]);
        let agent0 = (Rational::one() - rat(1, 2)) * rat(1, 5);
        assert!(r.objective_value > agent0);
    }

    #[test]
    fn all_free_pays_nothing() {
        let inst = gen_intro_example(&rat(0, 1)).unwrap().with_costs(vec![rat(0, 1); 4]).unwrap();
        let r = single_agent_exact(&inst, 20).unwrap();
        assert_eq!(r.contract.total(), rat(0, 1));
        assert_eq!(r.objective_value, rat(1, 2));
    }

    #[test]
    fn baseline_bounds() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let alpha = Contract::new(vec![rat(1, 2), rat(0, 1)]).unwrap();
        let s = ActionProfile::from_ids([0, 1]);
        let r = single_agent_subadditive_baseline(&inst, &alpha, &s, 20).unwrap();
        assert!(r.objective_value >= rat(1, 160) * rat(1, 4));

        let (inst, w) = gen_subadditive_poe(16).unwrap();
        let r = single_agent_subadditive_baseline(&inst, &w.contract, &w.profile, 20).unwrap();
        assert!(r.objective_value >= rat(1, 1280) * rat(207, 512));
    }
}
