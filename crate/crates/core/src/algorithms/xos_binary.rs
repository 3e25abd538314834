use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{finish, Branch, SolveResult, Trace};
use crate::equilibrium::scale_for_existence;
use crate::error::{Error, Result};
use crate::model::{eqcontract, Contract, Instance, Objective};
use crate::num::{from_usize, Rational};
use crate::profile::ActionProfile;
use crate::rewards::{demand, PriceVector};

/// Equal-pay contract for XOS rewards with one action per agent, within a
/// constant factor of the best equal-pay contract under any BEST objective.
///
/// The candidates are every single agent paid exactly its cost-to-value
/// ratio, the zero contract with the free agents working, and for each
/// target size `k` and reward guess `y` a demand set at prices
/// `max(c k / 2, y / (2k))`, cut down to `floor(k/8)` agents and rescaled
/// to an equilibrium paying `4/k`. The best candidate by the objective wins;
/// ties keep the earlier one.
pub fn xos_binary_equal_pay(inst: &Instance, objective: &Objective, cap: usize) -> Result<SolveResult> {
    if !inst.is_binary() {
        return Err(Error::NotBinaryActions);
    }
    if !inst.reward().is_xos_class() {
        return Err(Error::NonXosClass);
    }
    if !objective.is_verified_best() {
        return Err(Error::Precondition("objective does not satisfy the BEST properties".into()));
    }
    let n = inst.n();
    let action = |i: usize| inst.actions_of(i)[0];
    let single = |i: usize| inst.value(&ActionProfile::from_ids([action(i)]));

    let mut best: Option<SolveResult> = None;
    let mut count = 0;
    let mut consider = |r: SolveResult| {
        count += 1;
        if best.as_ref().is_none_or(|b| r.objective_value > b.objective_value) {
            best = Some(r);
        }
    };

    for i in 0..n {
        let (c, v) = (inst.cost(action(i)), single(i));
        let pay = if v.is_zero() {
            if !c.is_zero() {
                continue;
            }
            Rational::zero()
        } else {
            c / &v
        };
        if pay > Rational::one() {
            continue;
        }
        let contract = Contract::zero(n).with_payment(i, pay)?;
        let s = ActionProfile::from_ids([action(i)]);
        consider(finish(inst, objective, contract, s, Branch::SingleAgent, Trace::None, cap)?);
    }
    let free: ActionProfile = (0..n).map(action).filter(|&j| inst.cost(j).is_zero()).collect();
    consider(finish(inst, objective, Contract::zero(n), free, Branch::ZeroContract, Trace::None, cap)?);

    let half = Rational::new(1.into(), 2.into());
    let top = (0..n)
        .filter(|&i| {
            let v = single(i);
            !v.is_zero() && inst.cost(action(i)) / &v <= half
        })
        .map(single)
        .max();
    if let Some(top) = top {
        let two = from_usize(2);
        for k in 8..=n {
            let kr = from_usize(k);
            for j in 0..=n.ilog2() {
                let y = &top * from_usize(1 << j);
                let floor_price = &y / (&two * &kr);
                let prices: Vec<Rational> = (0..inst.m())
                    .map(|a| {
                        let p = inst.cost(a) * &kr / &two;
                        if p > floor_price {
                            p
                        } else {
                            floor_price.clone()
                        }
                    })
                    .collect();
                let t = demand(inst.reward(), &PriceVector::finite(prices), cap)?;
                let t_agents = inst.active_agents(&t);
                let u: Vec<usize> = t_agents.iter().copied().take(k / 8).collect();
                let start = eqcontract(n, &(&two / &kr), &t_agents)?;
                let (scaled, v) = scale_for_existence(inst, &start, &t, &u, &two, cap)?;
                let contract = scaled.restricted(&inst.active_agents(&v));
                consider(finish(
                    inst,
                    objective,
                    contract,
                    v,
                    Branch::Candidate { k, j: j as usize },
                    Trace::None,
                    cap,
                )?);
            }
        }
    }
    let mut out = best.expect("the zero contract is always a candidate");
    out.trace = Trace::Candidates(count);
    Ok(out)
}
