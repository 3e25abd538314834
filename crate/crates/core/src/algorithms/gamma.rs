use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, ToPrimitive, Zero};

use super::{check_input_pair, dominant_agent, finish, input_profit, raise_to, solo, Branch, SolveResult, Trace};
use crate::equilibrium::scale_for_existence;
use crate::error::{Error, Result};
use crate::model::{Contract, Instance, Objective};
use crate::num::{from_usize, rat, Rational};
use crate::profile::ActionProfile;

/// Equal-pay contract from a contract whose nonzero payments are within a
/// factor `gamma` of each other, keeping a `1/640` share of its profit for
/// `gamma <= 4` and a `1/(640 gamma)` share beyond that.
///
/// After the dominant-agent and free-agent cases, an agent producing at
/// least `1/(4 gamma)` of the paid agents' reward is hired alone at `3/4`.
/// Otherwise the paid agents are dealt round-robin into `ceil(4 gamma)`
/// groups, each small enough that paying it `3/2` times the largest input
/// payment stays within `3/4`, and the most rewarding group is hired.
pub fn gamma_to_equal_pay(
    inst: &Instance,
    gamma: &Rational,
    alpha: &Contract,
    s: &ActionProfile,
    cap: usize,
) -> Result<SolveResult> {
    if !inst.reward().is_xos_class() {
        return Err(Error::NonXosClass);
    }
    if *gamma < Rational::one() {
        return Err(Error::Precondition("gamma must be at least 1".into()));
    }
    if alpha.dispersion() > *gamma {
        return Err(Error::NotGammaEqualPay(format!("{gamma} (payments spread by {})", alpha.dispersion())));
    }
    check_input_pair(inst, alpha, s, cap)?;
    let input = input_profit(inst, alpha, s);
    let floor = if *gamma <= from_usize(4) { &input / from_usize(640) } else { &input / (from_usize(640) * gamma) };

    let out = if let Some(z) = dominant_agent(inst, alpha, s) {
        let (contract, eq) = solo(inst, z, (alpha.get(z) + Rational::one()) / from_usize(2), cap)?;
        finish(inst, &Objective::Profit, contract, eq, Branch::LargeAgent, Trace::None, cap)?
    } else {
        let half = rat(1, 2);
        let active = inst.active_agents(s);
        let large: Vec<usize> = active.iter().copied().filter(|&i| *alpha.get(i) > half).collect();
        let free: Vec<usize> = active.iter().copied().filter(|&i| alpha.get(i).is_zero()).collect();
        let rest: Vec<usize> = active.iter().copied().filter(|i| !large.contains(i)).collect();
        let free_part = inst.restrict(s, &free);
        if inst.value(&free_part) * from_usize(2) >= inst.value(&inst.restrict(s, &rest)) {
            finish(inst, &Objective::Profit, Contract::zero(inst.n()), free_part, Branch::FreeAgents, Trace::None, cap)?
        } else {
            let paid: Vec<usize> = rest.iter().copied().filter(|i| !free.contains(i)).collect();
            let paid_value = inst.value(&inst.restrict(s, &paid));
            let four_gamma = from_usize(4) * gamma;
            let star = paid
                .iter()
                .map(|&i| (inst.value(&inst.agent_part(s, i)), i))
                .fold(None::<(Rational, usize)>, |acc, x| match acc {
                    Some(a) if a.0 >= x.0 => Some(a),
                    _ => Some(x),
                })
                .filter(|(v, _)| v * &four_gamma >= paid_value);
            if let Some((_, i)) = star {
                let (contract, eq) = solo(inst, i, rat(3, 4), cap)?;
                finish(inst, &Objective::Profit, contract, eq, Branch::DominantAgent, Trace::None, cap)?
            } else {
                let groups = four_gamma
                    .ceil()
                    .to_integer()
                    .to_usize()
                    .ok_or_else(|| Error::Precondition("gamma too large".into()))?;
                let mut split: Vec<Vec<usize>> = alloc::vec![Vec::new(); groups];
                for (pos, &i) in paid.iter().enumerate() {
                    split[pos % groups].push(i);
                }
                let mut best = 0;
                let mut best_value = inst.value(&inst.restrict(s, &split[0]));
                for (j, g) in split.iter().enumerate().skip(1) {
                    let v = inst.value(&inst.restrict(s, g));
                    if v > best_value {
                        best = j;
                        best_value = v;
                    }
                }
                let top = paid.iter().map(|i| alpha.get(*i).clone()).max().unwrap_or_default();
                let raised = raise_to(alpha, &split[best], &top)?;
                let (contract, eq) = scale_for_existence(inst, &raised, s, &split[best], &rat(3, 2), cap)?;
                if contract.total() > rat(3, 4) {
                    return Err(Error::AssertionFailed("group contract pays more than 3/4".into()));
                }
                finish(inst, &Objective::Profit, contract, eq, Branch::Group(best + 1), Trace::None, cap)?
            }
        }
    };
    if out.objective_value < floor {
        return Err(Error::AssertionFailed(
            "equal-pay output fell below its guaranteed share of the input profit".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_harmonic;
    use crate::model::Action;
    use crate::rewards::RewardSpec;
    use alloc::vec;

    #[test]
    fn equal_pay_input_keeps_its_share() {
        let (inst, _) = gen_harmonic(4).unwrap();
        let alpha = Contract::new(vec![rat(6, 25), rat(6, 25), rat(0, 1), rat(0, 1)]).unwrap();
        let s = ActionProfile::from_ids([0, 1]);
        let r = gamma_to_equal_pay(&inst, &rat(1, 1), &alpha, &s, 20).unwrap();
        assert!(r.objective_value * from_usize(640) >= rat(39, 50));
        assert!(r.contract.is_equal_pay());
    }

    #[test]
    fn free_agents_keep_working_unpaid() {
        let inst = Instance::new(
            3,
            vec![
                Action { agent: 0, cost: rat(0, 1) },
                Action { agent: 1, cost: rat(0, 1) },
                Action { agent: 2, cost: rat(1, 100) },
            ],
            RewardSpec::Additive { weights: vec![rat(1, 3), rat(1, 3), rat(1, 10)] },
        )
        .unwrap();
        let alpha = Contract::new(vec![rat(0, 1), rat(0, 1), rat(1, 5)]).unwrap();
        let s = ActionProfile::from_ids([0, 1, 2]);
        let r = gamma_to_equal_pay(&inst, &rat(1, 1), &alpha, &s, 20).unwrap();
        assert_eq!(r.branch, Branch::FreeAgents);
        assert!(r.contract.total().is_zero());
        assert!(r.objective_value * from_usize(10) >= inst.value(&s));
    }

    #[test]
    fn single_active_agent_is_hired_alone() {
        let (inst, _) = gen_harmonic(4).unwrap();
        let alpha = Contract::new(vec![rat(6, 25), rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap();
        let s = ActionProfile::from_ids([0]);
        let r = gamma_to_equal_pay(&inst, &rat(1, 1), &alpha, &s, 20).unwrap();
        assert_eq!(r.branch, Branch::DominantAgent);
        assert_eq!(r.contract.paid(), [0]);
    }

    #[test]
    fn rejects_spread_payments() {
        let (inst, _) = gen_harmonic(4).unwrap();
        let alpha = Contract::new(vec![rat(1, 2), rat(1, 10), rat(0, 1), rat(0, 1)]).unwrap();
        let s = ActionProfile::from_ids([0, 1]);
        assert!(matches!(gamma_to_equal_pay(&inst, &rat(2, 1), &alpha, &s, 20), Err(Error::NotGammaEqualPay(_))));
    }
}
