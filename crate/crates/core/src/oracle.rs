//! Exhaustive optimal contracts, used as ground truth on small instances.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::equilibrium::is_nash;
use crate::error::{Error, Result};
use crate::model::{eqcontract, Contract, Instance, Objective};
use crate::num::{from_usize, Rational};
use crate::profile::ActionProfile;
use crate::rewards::{isqrt, RewardSpec};
use crate::table::ValueTable;

/// Which payment the interval constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncentiveMode {
    /// The agent's own payment, unbounded above.
    Individual,
    /// A level shared by all paid agents, so it must also be at most 1.
    SharedLevel,
}

/// Payments `x` in `[lo, hi]` make the agent's current set a best response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleInterval {
    pub lo: Rational,
    /// `None` means unbounded.
    pub hi: Option<Rational>,
    pub feasible: bool,
}

impl FeasibleInterval {
    pub fn contains(&self, x: &Rational) -> bool {
        self.feasible && *x >= self.lo && self.hi.as_ref().is_none_or(|h| x <= h)
    }
}

/// Folds the constraint `x * gap >= dc` for every deviation.
fn fold_interval<I>(deviations: I, mode: IncentiveMode) -> FeasibleInterval
where
    I: IntoIterator<Item = (Rational, Rational)>,
{
    let mut lo = Rational::zero();
    let mut hi: Option<Rational> = (mode == IncentiveMode::SharedLevel).then(Rational::one);
    let mut feasible = true;
    for (gap, dc) in deviations {
        match gap.cmp(&Rational::zero()) {
            Ordering::Greater => {
                let b = dc / gap;
                if b > lo {
                    lo = b;
                }
            }
            Ordering::Less => {
                let b = dc / gap;
                if hi.as_ref().is_none_or(|h| b < *h) {
                    hi = Some(b);
                }
            }
            Ordering::Equal => {
                if dc.is_positive() {
                    feasible = false;
                }
            }
        }
    }
    if let Some(h) = &hi {
        if *h < lo {
            feasible = false;
        }
    }
    FeasibleInterval { lo, hi, feasible }
}

/// Payments for which agent `agent`'s part of `s` is a best response to the rest.
pub fn min_incentive_interval(
    inst: &Instance,
    s: &ActionProfile,
    agent: usize,
    mode: IncentiveMode,
    cap: usize,
) -> Result<FeasibleInterval> {
    if agent >= inst.n() {
        return Err(Error::UnknownAgent(agent));
    }
    inst.check_profile(s)?;
    let pool = inst.actions_of(agent);
    if pool.len() > cap || pool.len() > 40 {
        return Err(Error::CapExceeded { needed: pool.len(), cap });
    }
    let own = inst.agent_part(s, agent);
    let rest = inst.without_agent(s, agent);
    let value = inst.value(s);
    let cost = inst.cost_of(&own);
    let devs = (0..1u64 << pool.len()).map(|mask| {
        let alt = ActionProfile::from_mask(mask, pool);
        (&value - inst.value(&alt.union(&rest)), &cost - inst.cost_of(&alt))
    });
    Ok(fold_interval(devs, mode))
}

fn table_interval(table: &ValueTable, mask: u64, agent: usize, mode: IncentiveMode) -> FeasibleInterval {
    let own_mask = table.agent_masks[agent];
    let own = mask & own_mask;
    let rest = mask & !own_mask;
    let value = table.value(mask);
    let cost = table.cost(own);
    let mut devs = Vec::new();
    let mut sub = own_mask;
    loop {
        devs.push((value - table.value(rest | sub), cost - table.cost(sub)));
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & own_mask;
    }
    fold_interval(devs, mode)
}

/// An optimal contract with the equilibrium it is evaluated at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub contract: Contract,
    pub profile: ActionProfile,
    pub value: Rational,
}

/// Upper bound on the objective from the reward alone, when one is known.
fn reward_bounds_objective(objective: &Objective) -> bool {
    matches!(objective, Objective::Profit | Objective::Reward | Objective::Welfare)
}

fn masks_by_value(table: &ValueTable) -> Vec<u64> {
    let mut masks: Vec<u64> = (0..1u64 << table.m).collect();
    masks.sort_by(|a, b| table.value(*b).cmp(table.value(*a)).then(a.cmp(b)));
    masks
}

fn confirm(inst: &Instance, best: Optimum, cap: usize) -> Result<Optimum> {
    if !is_nash(inst, &best.contract, &best.profile, cap)?.is_stable() {
        return Err(Error::AssertionFailed("oracle optimum failed the equilibrium recheck".into()));
    }
    Ok(best)
}

/// Best contract overall: for each profile the cheapest payments inducing it,
/// restricted to total payment at most 1.
pub fn brute_optimal_contract(inst: &Instance, objective: &Objective, cap: usize) -> Result<Optimum> {
    if !objective.decreasing_in_payments() {
        return Err(Error::NonMonotoneObjective);
    }
    let table = ValueTable::new(inst, cap)?;
    let prune = reward_bounds_objective(objective);
    let mut best: Option<Optimum> = None;
    'profiles: for mask in masks_by_value(&table) {
        if let Some(b) = &best {
            if prune && *table.value(mask) < b.value {
                break;
            }
        }
        let mut pay = vec![Rational::zero(); inst.n()];
        // An idle unpaid agent is always content, so only active agents are checked.
        for (i, own) in table.agent_masks.iter().enumerate() {
            if mask & own == 0 {
                continue;
            }
            let iv = table_interval(&table, mask, i, IncentiveMode::Individual);
            if !iv.feasible {
                continue 'profiles;
            }
            pay[i] = iv.lo;
        }
        let total = pay.iter().fold(Rational::zero(), |a, p| a + p);
        if total > Rational::one() || pay.iter().any(|p| *p > Rational::one()) {
            continue;
        }
        let contract = Contract::new(pay)?;
        let profile = table.profile(mask);
        let value = objective.eval_parts(inst, &contract, &profile, table.value(mask), table.cost(mask))?;
        let better = match &best {
            None => true,
            Some(b) => value.cmp(&b.value).then(b.contract.total().cmp(&total)) == Ordering::Greater,
        };
        if better {
            best = Some(Optimum { contract, profile, value });
        }
    }
    let best = best.ok_or_else(|| Error::AssertionFailed("no budget-feasible profile".into()))?;
    confirm(inst, best, cap)
}

/// Best equal-pay contract. For each profile the level is the largest minimal
/// payment among active agents that need one; agents whose current set is
/// already a best response unpaid stay unpaid.
pub fn brute_optimal_equal_pay(inst: &Instance, objective: &Objective, cap: usize) -> Result<Optimum> {
    if !objective.decreasing_in_payments() {
        return Err(Error::NonMonotoneObjective);
    }
    let table = ValueTable::new(inst, cap)?;
    let prune = reward_bounds_objective(objective);
    let mut best: Option<(Optimum, Rational, usize)> = None;
    'profiles: for mask in masks_by_value(&table) {
        if let Some((b, _, _)) = &best {
            if prune && *table.value(mask) < b.value {
                break;
            }
        }
        let mut intervals = Vec::new();
        let mut paid = Vec::new();
        let mut level = Rational::zero();
        for (i, own) in table.agent_masks.iter().enumerate() {
            if mask & own == 0 {
                continue;
            }
            let iv = table_interval(&table, mask, i, IncentiveMode::SharedLevel);
            if !iv.feasible {
                continue 'profiles;
            }
            if iv.lo.is_positive() {
                paid.push(i);
                if iv.lo > level {
                    level = iv.lo.clone();
                }
                intervals.push(iv);
            }
        }
        if intervals.iter().any(|iv| !iv.contains(&level)) {
            continue;
        }
        if &level * from_usize(paid.len()) > Rational::one() {
            continue;
        }
        let contract = eqcontract(inst.n(), &level, &paid)?;
        let profile = table.profile(mask);
        let value = objective.eval_parts(inst, &contract, &profile, table.value(mask), table.cost(mask))?;
        let better = match &best {
            None => true,
            Some((b, t, g)) => value.cmp(&b.value).then(t.cmp(&level)).then(g.cmp(&paid.len())) == Ordering::Greater,
        };
        if better {
            best = Some((Optimum { contract, profile, value }, level, paid.len()));
        }
    }
    let (best, _, _) = best.ok_or_else(|| Error::AssertionFailed("no budget-feasible profile".into()))?;
    confirm(inst, best, cap)
}

/// `unconstrained / equal_pay`, infinite when only the numerator is positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Ratio {
    pub fn of(num: &Rational, den: &Rational) -> Self {
        if den.is_zero() {
            if num.is_zero() {
                Ratio::Finite(Rational::one())
            } else {
                Ratio::Infinite
            }
        } else {
            Ratio::Finite(num / den)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoeReport {
    pub unconstrained: Optimum,
    pub equal_pay: Optimum,
    pub ratio: Ratio,
}

/// Price of equality by exhaustive search on both sides.
pub fn price_of_equality(inst: &Instance, objective: &Objective, cap: usize) -> Result<PoeReport> {
    let unconstrained = brute_optimal_contract(inst, objective, cap)?;
    let equal_pay = brute_optimal_equal_pay(inst, objective, cap)?;
    let ratio = Ratio::of(&unconstrained.value, &equal_pay.value);
    Ok(PoeReport { unconstrained, equal_pay, ratio })
}

/// Profit-optimal equal-pay contract on the harmonic family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicEqualPay {
    /// 1-based index of the cheapest-to-incentivize paid agent; 0 for the zero contract.
    pub first: usize,
    /// Number of paid agents, `first..first + count`.
    pub count: usize,
    pub level: Rational,
    pub profit: Rational,
    pub reward: Rational,
}

/// Equal-pay profit optimum of the harmonic family of size `n` without enumeration.
///
/// At level `1 / (2 j H_n)` exactly the agents `j..n` are willing to work, so
/// the optimum pays a contiguous block starting at some `j`, and for a fixed
/// start the profit is unimodal in the block length. A floating-point pass
/// finds each start's best length; every block within a relative `1e-9` of
/// the best is then compared exactly, scaled by `lcm(1..n)` to stay in
/// integers. Ties go to the larger start (the lower level), then the shorter block.
pub fn harmonic_equal_pay(n: usize) -> HarmonicEqualPay {
    let mut prefix = vec![0.0f64; n + 1];
    for i in 1..=n {
        prefix[i] = prefix[i - 1] + 1.0 / i as f64;
    }
    let h = prefix[n];
    let approx = |j: usize, s: usize| (1.0 - s as f64 / (2.0 * j as f64 * h)) * (prefix[j + s - 1] - prefix[j - 1]);
    let mut shortlist: Vec<(f64, usize, usize)> = Vec::new();
    for j in 1..=n {
        let longest = n - j + 1;
        let (mut lo, mut hi) = (1, longest);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if approx(j, mid + 1) > approx(j, mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        for s in lo.saturating_sub(2).max(1)..=(lo + 2).min(longest) {
            shortlist.push((approx(j, s), j, s));
        }
    }
    let top = shortlist.iter().map(|c| c.0).fold(0.0f64, f64::max);
    if top <= 0.0 {
        return HarmonicEqualPay {
            first: 0,
            count: 0,
            level: Rational::zero(),
            profit: Rational::zero(),
            reward: Rational::zero(),
        };
    }
    let mut lcm = BigInt::one();
    for i in 1..=n {
        lcm = lcm.lcm(&BigInt::from(i));
    }
    let parts: Vec<BigInt> = (0..=n).map(|i| if i == 0 { BigInt::zero() } else { &lcm / BigInt::from(i) }).collect();
    let h_scaled: BigInt = parts.iter().sum();
    // profit(j, s) = (2 j HL - s L) * W / (2 j HL L) with W the scaled block weight.
    let mut best: Option<(Rational, usize, usize)> = None;
    for &(_, j, s) in shortlist.iter().filter(|c| c.0 >= top - 1e-9 * top) {
        let two_j_h = BigInt::from(2 * j) * &h_scaled;
        let slack = &two_j_h - BigInt::from(s) * &lcm;
        if !slack.is_positive() {
            continue;
        }
        let w: BigInt = parts[j..j + s].iter().sum();
        let profit = Rational::new(slack * w, two_j_h * &lcm);
        let better = match &best {
            None => true,
            Some((b, bj, bs)) => match profit.cmp(b) {
                Ordering::Greater => true,
                Ordering::Equal => j > *bj || (j == *bj && s < *bs),
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((profit, j, s));
        }
    }
    let (profit, j, s) = best.expect("the best block has positive profit");
    let w: BigInt = parts[j..j + s].iter().sum();
    HarmonicEqualPay {
        first: j,
        count: s,
        level: Rational::new(lcm.clone(), BigInt::from(2 * j) * &h_scaled),
        profit,
        reward: Rational::new(w, lcm),
    }
}

/// Equal-pay optimum of the symmetric subadditive family without enumeration.
///
/// A profile is described by how many cheap agents work and whether the
/// expensive last agent works; the lowest-id cheap agents are used.
pub fn subadditive_equal_pay(inst: &Instance, objective: &Objective, cap: usize) -> Result<Optimum> {
    let n = match inst.reward() {
        RewardSpec::SubadditivePoe { n } => *n,
        _ => return Err(Error::Precondition("expects the symmetric subadditive family".into())),
    };
    if !matches!(objective, Objective::Profit | Objective::Reward) {
        return Err(Error::Precondition("closed-form search supports profit and reward".into()));
    }
    let root = from_usize(isqrt(n));
    let nr = from_usize(n);
    let f = |k: usize| -> Rational {
        if k == 0 {
            Rational::zero()
        } else if k < n {
            Rational::one() / &root + from_usize(k) / &nr
        } else {
            from_usize(2) / &root + from_usize(n - 1) / &nr
        }
    };
    let cheap = inst.cost(0).clone();
    let dear = inst.cost(n - 1).clone();
    let mut best: Option<(Rational, Rational, usize, usize, bool)> = None;
    for with_last in [false, true] {
        for s in 0..n {
            let k = s + usize::from(with_last);
            let level = if k == 0 {
                Rational::zero()
            } else {
                let gain = f(k) - f(k - 1);
                let need = if with_last {
                    dear.clone().max(if s > 0 { cheap.clone() } else { Rational::zero() })
                } else {
                    cheap.clone()
                };
                need / gain
            };
            if level > Rational::one() || &level * from_usize(k) > Rational::one() {
                continue;
            }
            let value = match objective {
                Objective::Profit => ((Rational::one() - &level * from_usize(k)) * f(k)).max(Rational::zero()),
                _ => f(k),
            };
            let better = match &best {
                None => true,
                Some((bv, bt, bk, _, _)) => value.cmp(bv).then(bt.cmp(&level)).then(bk.cmp(&k)) == Ordering::Greater,
            };
            if better {
                best = Some((value, level, k, s, with_last));
            }
        }
    }
    let (value, level, _, s, with_last) = best.expect("the empty profile is always feasible");
    let mut paid: Vec<usize> = (0..s).collect();
    if with_last {
        paid.push(n - 1);
    }
    let profile: ActionProfile = paid.iter().copied().collect();
    let paid = if level.is_zero() { Vec::new() } else { paid };
    let contract = eqcontract(n, &level, &paid)?;
    confirm(inst, Optimum { contract, profile, value }, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_coverage_gap, gen_harmonic, gen_intro_example};
    use crate::num::{harmonic, rat};

    #[test]
    fn intro_optimum_and_intervals() {
        let eps = rat(1, 100);
        let inst = gen_intro_example(&eps).unwrap();
        let opt = brute_optimal_contract(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(opt.value, rat(1, 4));
        assert_eq!(opt.contract.as_slice(), [rat(1, 2), Rational::zero()]);
        assert_eq!(opt.profile.to_vec(), [0, 1]);
        let s = ActionProfile::from_ids([0, 2]);
        let a = min_incentive_interval(&inst, &s, 0, IncentiveMode::Individual, 20).unwrap();
        let b = min_incentive_interval(&inst, &s, 1, IncentiveMode::Individual, 20).unwrap();
        assert_eq!(a.lo + b.lo, Rational::one() - rat(4, 1) * &eps);
        let both = ActionProfile::from_ids([0, 1]);
        let iv = min_incentive_interval(&inst, &both, 0, IncentiveMode::Individual, 20).unwrap();
        assert_eq!((iv.lo, iv.hi, iv.feasible), (rat(1, 2), None, true));
    }

    #[test]
    fn coverage_gap_interval() {
        let eps = rat(1, 10);
        let inst = gen_coverage_gap(&eps).unwrap();
        let s = ActionProfile::from_ids([0, 2]);
        let iv = min_incentive_interval(&inst, &s, 0, IncentiveMode::Individual, 20).unwrap();
        assert_eq!(iv.lo, (Rational::one() + &eps / rat(3, 1)) / (Rational::one() + &eps));
        assert!(iv.contains(&(Rational::one() - &eps * &eps)));
    }

    /// Full scan over every start, stopping each at its first decrease.
    fn scan_reference(n: usize) -> HarmonicEqualPay {
        let mut lcm = BigInt::one();
        for i in 1..=n {
            lcm = lcm.lcm(&BigInt::from(i));
        }
        let parts: Vec<BigInt> =
            (0..=n).map(|i| if i == 0 { BigInt::zero() } else { &lcm / BigInt::from(i) }).collect();
        let h_scaled: BigInt = parts.iter().sum();
        // profit(j, s) = (2 j HL - s L) * W / (2 j HL L) with W the scaled block weight.
        let mut best: Option<(BigInt, BigInt, usize, usize)> = None;
        for j in 1..=n {
            let two_j_h = BigInt::from(2 * j) * &h_scaled;
            let den = &two_j_h * &lcm;
            let mut w = BigInt::zero();
            let mut local: Option<(BigInt, usize)> = None;
            for s in 1..=(n - j + 1) {
                w += &parts[j + s - 1];
                let slack = &two_j_h - BigInt::from(s) * &lcm;
                if !slack.is_positive() {
                    break;
                }
                let num = slack * &w;
                match &local {
                    Some((b, _)) if num <= *b => {
                        if num < *b {
                            break;
                        }
                    }
                    _ => local = Some((num, s)),
                }
            }
            if let Some((num, s)) = local {
                let better = match &best {
                    None => true,
                    // Larger j means a lower level, which wins ties.
                    Some((bn, bd, _, _)) => (&num * bd).cmp(&(bn * &den)) != Ordering::Less,
                };
                if better {
                    best = Some((num, den, j, s));
                }
            }
        }
        match best {
            None => HarmonicEqualPay {
                first: 0,
                count: 0,
                level: Rational::zero(),
                profit: Rational::zero(),
                reward: Rational::zero(),
            },
            Some((num, den, j, s)) => {
                let w: BigInt = parts[j..j + s].iter().sum();
                HarmonicEqualPay {
                    first: j,
                    count: s,
                    level: Rational::new(lcm.clone(), BigInt::from(2 * j) * &h_scaled),
                    profit: Rational::new(num, den),
                    reward: Rational::new(w, lcm),
                }
            }
        }
    }

    #[test]
    fn harmonic_fast_path_matches_full_scan() {
        for n in (1..=40).chain([64, 100, 150]) {
            assert_eq!(harmonic_equal_pay(n), scan_reference(n), "n = {n}");
        }
    }

    #[test]
    fn harmonic_four_by_every_route() {
        let (inst, _) = gen_harmonic(4).unwrap();
        let eq = brute_optimal_equal_pay(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(eq.value, rat(39, 50));
        assert_eq!(eq.contract.as_slice(), [rat(6, 25), rat(6, 25), Rational::zero(), Rational::zero()]);
        let un = brute_optimal_contract(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(un.value, harmonic(4) / rat(2, 1));
        let fast = harmonic_equal_pay(4);
        assert_eq!((fast.first, fast.count, fast.profit), (1, 2, rat(39, 50)));
        let poe = price_of_equality(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(poe.ratio, Ratio::Finite(rat(625, 468)));
    }

    #[test]
    fn zero_reward_ratio_conventions() {
        assert_eq!(Ratio::of(&Rational::zero(), &Rational::zero()), Ratio::Finite(Rational::one()));
        assert_eq!(Ratio::of(&Rational::one(), &Rational::zero()), Ratio::Infinite);
    }

    #[test]
    fn all_free_actions_need_no_payment() {
        let inst = crate::model::Instance::new(
            2,
            vec![
                crate::model::Action { agent: 0, cost: Rational::zero() },
                crate::model::Action { agent: 1, cost: Rational::zero() },
            ],
            RewardSpec::Additive { weights: vec![rat(1, 3), rat(1, 3)] },
        )
        .unwrap();
        let eq = brute_optimal_equal_pay(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(eq.value, rat(2, 3));
        assert!(eq.contract.total().is_zero());
    }

    #[test]
    fn welfare_objective_is_accepted_and_custom_antitone_is_enforced() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        assert!(brute_optimal_contract(&inst, &Objective::Welfare, 20).is_ok());
        let custom = Objective::Custom(crate::model::CustomObjective {
            name: "payments".into(),
            eval: alloc::sync::Arc::new(|_, a, _| Ok(a.total())),
            decreasing_in_payments: false,
            best: false,
        });
        assert_eq!(brute_optimal_contract(&inst, &custom, 20), Err(Error::NonMonotoneObjective));
    }

    #[test]
    fn subadditive_closed_form_matches_brute_force() {
        let (inst, _) = crate::instances::gen_subadditive_poe(16).unwrap();
        for obj in [Objective::Profit, Objective::Reward] {
            let fast = subadditive_equal_pay(&inst, &obj, 20).unwrap();
            let slow = brute_optimal_equal_pay(&inst, &obj, 20).unwrap();
            assert_eq!(fast.value, slow.value, "{}", obj.name());
        }
        let reward = subadditive_equal_pay(&inst, &Objective::Reward, 20).unwrap();
        // Eight cheap agents at level 1/8 spend the whole budget.
        assert_eq!(reward.value, rat(3, 4));
        assert_eq!(reward.contract.total(), Rational::one());
        let profit = subadditive_equal_pay(&inst, &Objective::Profit, 20).unwrap();
        assert_eq!(profit.value, rat(39, 128));
    }
}
