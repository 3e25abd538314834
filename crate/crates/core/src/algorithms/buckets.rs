use alloc::vec::Vec;

use num_traits::{One, ToPrimitive, Zero};

use super::{
    check_input_pair, dominant_agent, finish, float_bound_holds, input_profit, loglog_ratio, raise_to, solo, Branch,
    SolveResult, Trace,
};
use crate::equilibrium::{payment_prices, scale_for_existence};
use crate::error::{Error, Result};
use crate::model::{eqcontract, Contract, Instance, Objective};
use crate::num::{from_usize, rat, Rational};
use crate::profile::ActionProfile;
use crate::rewards::{demand, Price, PriceVector};

/// Which bucket was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketChoice {
    /// Agents paid less than `1/(2n)`.
    Tail,
    /// The `h`-th run (1-based).
    Run(usize),
    /// The agent closing the `h`-th run (1-based).
    Closer(usize),
}

/// Partition of the active agents by payment.
///
/// Middle agents are sorted by decreasing payment and cut into runs: a run
/// starting at an agent paid `a` holds at most `floor(1/(2a))` agents, so
/// paying all of them that much costs at most `1/2`. The agent right after
/// each run is kept apart as its closer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketPlan {
    /// The agent paid more than `1/2`, set aside.
    pub large: Option<usize>,
    pub tail: Vec<usize>,
    pub runs: Vec<Vec<usize>>,
    pub closers: Vec<Option<usize>>,
    pub chosen: BucketChoice,
    /// Largest input payment inside the chosen bucket.
    pub level: Rational,
}

impl BucketPlan {
    pub fn chosen_agents(&self) -> Vec<usize> {
        match self.chosen {
            BucketChoice::Tail => self.tail.clone(),
            BucketChoice::Run(h) => self.runs[h - 1].clone(),
            BucketChoice::Closer(h) => self.closers[h - 1].into_iter().collect(),
        }
    }

    /// `1 + 2h` buckets for `h` runs.
    pub fn bucket_count(&self) -> usize {
        2 * self.runs.len() + 1
    }

    pub fn branch(&self) -> Branch {
        match self.chosen {
            BucketChoice::Tail => Branch::BucketX,
            BucketChoice::Run(h) => Branch::BucketB(h),
            BucketChoice::Closer(h) => Branch::BucketBPrime(h),
        }
    }
}

/// Buckets `agents` by their payments in `alpha` and picks the bucket whose
/// part of `s` has the largest reward; ties keep the tail, then earlier runs,
/// then earlier closers.
fn plan_buckets(
    inst: &Instance,
    alpha: &Contract,
    s: &ActionProfile,
    agents: &[usize],
    large: Option<usize>,
) -> Result<BucketPlan> {
    let tiny = Rational::one() / from_usize(2 * inst.n());
    let (tail, mut middle): (Vec<usize>, Vec<usize>) = agents.iter().partition(|&&i| *alpha.get(i) < tiny);
    middle.sort_by(|a, b| alpha.get(*b).cmp(alpha.get(*a)).then(a.cmp(b)));
    let k = middle.len();
    let mut runs = Vec::new();
    let mut closers = Vec::new();
    let mut start = 1;
    while start <= k {
        let head = alpha.get(middle[start - 1]);
        let width = (Rational::one() / (from_usize(2) * head))
            .floor()
            .to_integer()
            .to_usize()
            .ok_or_else(|| Error::AssertionFailed("bucket width overflow".into()))?;
        let end = (start + width).min(k + 1);
        runs.push(middle[start - 1..end - 1].to_vec());
        closers.push(if end <= k { Some(middle[end - 1]) } else { None });
        start = end + 1;
    }
    let worth = |group: &[usize]| inst.value(&inst.restrict(s, group));
    let mut chosen = BucketChoice::Tail;
    let mut best = worth(&tail);
    for (h, run) in runs.iter().enumerate() {
        let v = worth(run);
        if v > best {
            best = v;
            chosen = BucketChoice::Run(h + 1);
        }
    }
    for (h, c) in closers.iter().enumerate() {
        if let Some(c) = c {
            let v = worth(&[*c]);
            if v > best {
                best = v;
                chosen = BucketChoice::Closer(h + 1);
            }
        }
    }
    let mut plan = BucketPlan { large, tail, runs, closers, chosen, level: Rational::zero() };
    plan.level = plan.chosen_agents().iter().map(|i| alpha.get(*i).clone()).max().unwrap_or_default();
    if let Some(bound) = bucket_count_bound(inst.n()) {
        if plan.bucket_count() as f64 > bound {
            return Err(Error::AssertionFailed("too many buckets".into()));
        }
    }
    Ok(plan)
}

/// `33 ln n / ln ln n`, the most buckets a budget-feasible contract can need.
pub fn bucket_count_bound(n: usize) -> Option<f64> {
    loglog_ratio(n).map(|r| 33.0 / r)
}

/// Equal-pay contract keeping a `ln ln n / ln n` share of an arbitrary
/// contract's profit for XOS rewards.
///
/// A dominant agent is paid halfway between its payment and 1. Otherwise the
/// other active agents are bucketed by payment and the most rewarding bucket
/// is paid `3/2` times its largest payment.
pub fn poe_transform_xos(inst: &Instance, alpha: &Contract, s: &ActionProfile, cap: usize) -> Result<SolveResult> {
    if !inst.reward().is_xos_class() {
        return Err(Error::NonXosClass);
    }
    check_input_pair(inst, alpha, s, cap)?;
    let input = input_profit(inst, alpha, s);
    if let Some(z) = dominant_agent(inst, alpha, s) {
        let (contract, eq) = solo(inst, z, (alpha.get(z) + Rational::one()) / from_usize(2), cap)?;
        let out = finish(inst, &Objective::Profit, contract, eq, Branch::LargeAgent, Trace::None, cap)?;
        if out.objective_value < rat(2, 9) * &input {
            return Err(Error::AssertionFailed("large-agent branch kept less than 2/9 of the input profit".into()));
        }
        return Ok(out);
    }
    let half = rat(1, 2);
    let large = inst.active_agents(s).into_iter().find(|&i| *alpha.get(i) > half);
    let agents: Vec<usize> = inst.active_agents(s).into_iter().filter(|&i| Some(i) != large).collect();
    let plan = plan_buckets(inst, alpha, s, &agents, large)?;
    let bucket = plan.chosen_agents();
    let raised = raise_to(alpha, &bucket, &plan.level)?;
    let (contract, eq) = scale_for_existence(inst, &raised, s, &bucket, &rat(3, 2), cap)?;
    debug_assert_eq!(contract, eqcontract(inst.n(), &(rat(3, 2) * &plan.level), &bucket)?);
    if contract.total() > rat(3, 4) {
        return Err(Error::AssertionFailed("bucket contract pays more than 3/4".into()));
    }
    let branch = plan.branch();
    let out = finish(inst, &Objective::Profit, contract, eq, branch, Trace::Buckets(plan), cap)?;
    if let Some(r) = loglog_ratio(inst.n()) {
        if !float_bound_holds(&out.objective_value, &input, r / 1980.0) {
            return Err(Error::AssertionFailed("bucket branch fell below its guaranteed share".into()));
        }
    }
    Ok(out)
}

/// Equal-pay contract keeping a `ln ln n / ln n` share of any BEST objective
/// for gross-substitutes rewards.
///
/// Compares the agent paid more than `1/2` alone (at its own payment,
/// responding to the restricted demand) with the most rewarding bucket of the
/// others paid `3/2` times its largest payment.
pub fn gs_best_transform(
    inst: &Instance,
    objective: &Objective,
    alpha: &Contract,
    s: &ActionProfile,
    cap: usize,
) -> Result<SolveResult> {
    if !inst.reward().is_gs_class() {
        return Err(Error::NonGsClass);
    }
    if !objective.is_verified_best() {
        return Err(Error::Precondition("objective does not satisfy the BEST properties".into()));
    }
    check_input_pair(inst, alpha, s, cap)?;
    let input = objective.eval(inst, alpha, s)?;
    let half = rat(1, 2);
    let large = (0..inst.n()).find(|&i| *alpha.get(i) > half);

    let single = match large {
        Some(i) => {
            let pay = alpha.get(i).clone();
            let prices = PriceVector(
                (0..inst.m())
                    .map(|j| {
                        if inst.owner(j) == i {
                            Price::cost_over_payment(inst.cost(j), &pay)
                        } else {
                            Price::Infinite
                        }
                    })
                    .collect(),
            );
            let set = demand(inst.reward(), &prices, cap)?;
            let contract = Contract::zero(inst.n()).with_payment(i, pay)?;
            let value = objective.eval(inst, &contract, &set)?;
            Some((contract, set, value))
        }
        None => None,
    };

    let agents: Vec<usize> = inst.active_agents(s).into_iter().filter(|&i| Some(i) != large).collect();
    let plan = plan_buckets(inst, alpha, s, &agents, large)?;
    let bucket = plan.chosen_agents();
    let contract = eqcontract(inst.n(), &(rat(3, 2) * &plan.level), &bucket)?;
    let set = demand(inst.reward(), &payment_prices(inst, &contract), cap)?;
    let value = objective.eval(inst, &contract, &set)?;

    let out = match single {
        Some((c, st, v)) if v > value => finish(inst, objective, c, st, Branch::LargeAgent, Trace::Buckets(plan), cap)?,
        _ => {
            let branch = plan.branch();
            finish(inst, objective, contract, set, branch, Trace::Buckets(plan), cap)?
        }
    };
    if let Some(r) = loglog_ratio(inst.n()) {
        if !float_bound_holds(&out.objective_value, &input, r / 132.0) {
            return Err(Error::AssertionFailed("gross-substitutes transform fell below its guaranteed share".into()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_harmonic;
    use alloc::vec;

    #[test]
    fn harmonic_four_takes_the_tail() {
        let (inst, w) = gen_harmonic(4).unwrap();
        let r = poe_transform_xos(&inst, &w.contract, &w.profile, 20).unwrap();
        assert_eq!(r.branch, Branch::BucketX);
        assert_eq!(r.contract.as_slice(), [rat(0, 1), rat(9, 50), rat(9, 50), rat(9, 50)]);
        assert_eq!(r.objective_value, rat(299, 600));
        let Trace::Buckets(plan) = &r.trace else { panic!("missing plan") };
        assert_eq!(plan.tail, [1, 2, 3]);
        assert_eq!(plan.runs, [vec![0]]);
        assert_eq!(plan.closers, [None]);
    }

    #[test]
    fn harmonic_four_reward() {
        let (inst, w) = gen_harmonic(4).unwrap();
        let r = gs_best_transform(&inst, &Objective::Reward, &w.contract, &w.profile, 20).unwrap();
        assert_eq!(r.objective_value, rat(13, 12));
        assert_eq!(r.branch, Branch::BucketX);
    }

    #[test]
    fn large_agent_branch_pays_halfway() {
        // One agent paid 3/4 produces almost everything.
        let inst = Instance::new(
            2,
            vec![
                crate::model::Action { agent: 0, cost: rat(1, 2) },
                crate::model::Action { agent: 1, cost: rat(0, 1) },
            ],
            crate::rewards::RewardSpec::Additive { weights: vec![rat(2, 3), rat(1, 100)] },
        )
        .unwrap();
        let alpha = Contract::new(vec![rat(3, 4), rat(0, 1)]).unwrap();
        let s = ActionProfile::from_ids([0, 1]);
        let r = poe_transform_xos(&inst, &alpha, &s, 20).unwrap();
        assert_eq!(r.branch, Branch::LargeAgent);
        assert_eq!(r.contract.as_slice(), [rat(7, 8), rat(0, 1)]);
    }

    #[test]
    fn runs_never_cost_more_than_half() {
        let inst = crate::instances::gen_random_additive(6, 6, 3).unwrap();
        let alpha = Contract::new(vec![rat(2, 5), rat(3, 10), rat(1, 5), rat(1, 20), rat(0, 1), rat(0, 1)]).unwrap();
        let agents = [0, 1, 2, 3];
        let all: ActionProfile = (0..6).collect();
        let plan = plan_buckets(&inst, &alpha, &all, &agents, None).unwrap();
        for run in &plan.runs {
            let p = run.iter().map(|i| alpha.get(*i).clone()).max().unwrap();
            assert!(p * from_usize(run.len()) <= rat(1, 2));
        }
        let covered: usize =
            plan.runs.iter().map(|r| r.len()).sum::<usize>() + plan.closers.iter().flatten().count() + plan.tail.len();
        assert_eq!(covered, agents.len());
    }
}
