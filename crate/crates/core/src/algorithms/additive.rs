use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{finish, Branch, SolveResult, Trace};
use crate::error::{Error, Result};
use crate::model::{eqcontract, Instance, Objective};
use crate::num::{from_usize, Rational};
use crate::profile::ActionProfile;
use crate::rewards::RewardSpec;

/// Optimal equal-pay contract for an additive reward.
///
/// An action is worth taking exactly when the payment reaches its
/// cost-to-weight ratio, so only those ratios (and 0) are candidate levels.
/// At a fixed level every agent contributes independently and the best paid
/// set of each size is a prefix of the agents sorted by contribution.
/// Ties go to the lower level and then the smaller paid set. Payments are
/// kept within budget (`level * |paid| <= 1`) for every objective.
pub fn solve_additive_exact(inst: &Instance, objective: &Objective, cap: usize) -> Result<SolveResult> {
    let weights = match inst.reward() {
        RewardSpec::Additive { weights } => weights,
        _ => return Err(Error::NonAdditiveReward),
    };
    if !matches!(objective, Objective::Profit | Objective::Reward | Objective::Welfare) {
        return Err(Error::Precondition("exact additive solver supports profit, reward and welfare".into()));
    }
    let mut levels: Vec<Rational> = (0..inst.m())
        .filter(|&j| weights[j].is_positive())
        .map(|j| inst.cost(j) / &weights[j])
        .filter(|r| *r <= Rational::one())
        .collect();
    levels.push(Rational::zero());
    levels.sort();
    levels.dedup();

    // Free actions are taken by everyone, paid or not.
    let free_value: Rational =
        (0..inst.m()).filter(|&j| inst.cost(j).is_zero()).fold(Rational::zero(), |acc, j| acc + &weights[j]);

    let mut best: Option<(Rational, Rational, Vec<usize>)> = None;
    for level in &levels {
        let mut gains: Vec<(Rational, usize)> = (0..inst.n())
            .map(|i| {
                let gain = inst
                    .actions_of(i)
                    .iter()
                    .filter(|&&j| !inst.cost(j).is_zero() && *inst.cost(j) <= level * &weights[j])
                    .fold(Rational::zero(), |acc, &j| match objective {
                        Objective::Welfare => acc + &weights[j] - inst.cost(j),
                        _ => acc + &weights[j],
                    });
                (gain, i)
            })
            .filter(|(g, _)| !g.is_zero())
            .collect();
        gains.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut total = free_value.clone();
        for size in 0..=gains.len() {
            if size > 0 {
                total += &gains[size - 1].0;
            }
            let spent = level * from_usize(size);
            if spent > Rational::one() {
                break;
            }
            let value = match objective {
                Objective::Profit => (Rational::one() - &spent) * &total,
                _ => total.clone(),
            };
            if best.as_ref().is_none_or(|b| value > b.0) {
                let paid = gains[..size].iter().map(|g| g.1).collect();
                best = Some((value, level.clone(), paid));
            }
        }
    }
    let (_, level, mut paid) = best.expect("the zero level is always a candidate");
    paid.sort_unstable();
    let level = if paid.is_empty() { Rational::zero() } else { level };
    let mut taken = inst.free_actions();
    for &i in &paid {
        for &j in inst.actions_of(i) {
            if *inst.cost(j) <= &level * &weights[j] && !weights[j].is_zero() {
                taken.insert(j);
            }
        }
    }
    let taken: ActionProfile = taken;
    let contract = eqcontract(inst.n(), &level, &paid)?;
    let branch = if paid.is_empty() { Branch::ZeroContract } else { Branch::Exact };
    finish(inst, objective, contract, taken, branch, Trace::None, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_harmonic, gen_intro_example};
    use crate::model::Action;
    use crate::num::rat;
    use crate::oracle::brute_optimal_equal_pay;
    use alloc::vec;

    #[test]
    fn harmonic_four() {
        let (inst, _) = gen_harmonic(4).unwrap();
        let r = solve_additive_exact(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(r.objective_value, rat(39, 50));
        assert_eq!(r.contract.as_slice(), [rat(6, 25), rat(6, 25), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn intro_pays_one_agent_half() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let r = solve_additive_exact(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(r.objective_value, rat(1, 4));
        assert_eq!(r.contract.as_slice(), [rat(1, 2), rat(0, 1)]);
    }

    #[test]
    fn free_single_action() {
        let inst = Instance::new(
            1,
            vec![Action { agent: 0, cost: rat(0, 1) }],
            RewardSpec::Additive { weights: vec![rat(2, 3)] },
        )
        .unwrap();
        let r = solve_additive_exact(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!((r.objective_value, r.branch), (rat(2, 3), Branch::ZeroContract));
        assert!(r.contract.total().is_zero());
    }

    #[test]
    fn agrees_with_brute_force_for_every_objective() {
        for seed in 0..12 {
            let inst = crate::instances::gen_random_additive(4, 8, seed).unwrap();
            for obj in [Objective::Profit, Objective::Reward, Objective::Welfare] {
                let fast = solve_additive_exact(&inst, &obj, 20).unwrap();
                let slow = brute_optimal_equal_pay(&inst, &obj, 20).unwrap();
                assert_eq!(fast.objective_value, slow.value, "seed {seed} {}", obj.name());
            }
        }
    }
}
