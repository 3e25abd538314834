//! Constructive algorithms. Each returns a contract, an equilibrium of it
//! that has been rechecked exactly, and a record of the path taken.

mod additive;
mod buckets;
mod gamma;
mod single;
mod small_agents;
mod xos_binary;

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

pub use additive::solve_additive_exact;
pub use buckets::{bucket_count_bound, gs_best_transform, poe_transform_xos, BucketChoice, BucketPlan};
pub use gamma::gamma_to_equal_pay;
pub use single::{single_agent_exact, single_agent_subadditive_baseline};
pub use small_agents::{
    equal_pay_constant_approx, no_large_agent, submodular_equal_pay_small_agents, Alg1Round, Alg1Trace,
    EquilibriumSource, LARGE_AGENT_SHARE, SMALL_AGENT_COMBINATION,
};
pub use xos_binary::xos_binary_equal_pay;

use crate::equilibrium::{best_response, is_nash, Stability};
use crate::error::{Error, Result};
use crate::model::{Contract, Instance, Objective};
use crate::num::{ln, to_f64, Rational};
use crate::profile::ActionProfile;

/// Which path of an algorithm produced the result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    /// Exact optimum of a closed-form or exhaustive solver.
    Exact,
    /// Exhaustive search over all profiles.
    Brute,
    /// One paid agent, everyone else idle.
    SingleAgent,
    /// Nobody is paid; only free actions are taken.
    ZeroContract,
    /// Small-agent algorithm kept the approximate demand set.
    Alg1SmallQ { k: usize },
    /// Small-agent algorithm kept a greedy subset of agents.
    Alg1GreedyV { k: usize },
    /// A dominant agent is paid above its original payment.
    LargeAgent,
    /// The bucket of agents with tiny payments.
    BucketX,
    /// The `h`-th run of consecutive middle agents (1-based).
    BucketB(usize),
    /// The single agent closing the `h`-th run (1-based).
    BucketBPrime(usize),
    /// Agents that were already working for free.
    FreeAgents,
    /// One agent generating a large share of the reward, paid `3/4`.
    DominantAgent,
    /// The `j`-th group of the round-robin split (1-based).
    Group(usize),
    /// A demand-based candidate for target size `k` and scale index `j`.
    Candidate { k: usize, j: usize },
}

impl Branch {
    pub fn tag(&self) -> String {
        use alloc::format;
        match self {
            Branch::Exact => "exact".into(),
            Branch::Brute => "brute".into(),
            Branch::SingleAgent => "single_agent".into(),
            Branch::ZeroContract => "zero_contract".into(),
            Branch::Alg1SmallQ { k } => format!("alg1_small_Q(k={k})"),
            Branch::Alg1GreedyV { k } => format!("alg1_greedy_V(k={k})"),
            Branch::LargeAgent => "large_agent".into(),
            Branch::BucketX => "bucket_X".into(),
            Branch::BucketB(h) => format!("bucket_B{h}"),
            Branch::BucketBPrime(h) => format!("bucket_B'{h}"),
            Branch::FreeAgents => "free_agents".into(),
            Branch::DominantAgent => "dominant_agent".into(),
            Branch::Group(j) => format!("group_{j}"),
            Branch::Candidate { k, j } => format!("candidate(k={k},j={j})"),
        }
    }
}

/// Extra detail recorded by some algorithms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Trace {
    #[default]
    None,
    SmallAgents(Alg1Trace),
    Buckets(BucketPlan),
    /// Number of candidate pairs compared.
    Candidates(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub contract: Contract,
    pub equilibrium: ActionProfile,
    pub objective_value: Rational,
    pub branch: Branch,
    pub trace: Trace,
}

/// Packs a result after rechecking the equilibrium exactly.
pub(crate) fn finish(
    inst: &Instance,
    objective: &Objective,
    contract: Contract,
    equilibrium: ActionProfile,
    branch: Branch,
    trace: Trace,
    cap: usize,
) -> Result<SolveResult> {
    if let Stability::Unstable(d) = is_nash(inst, &contract, &equilibrium, cap)? {
        return Err(Error::AssertionFailed(alloc::format!(
            "{} returned a profile where agent {} gains {} by deviating",
            branch.tag(),
            d.agent,
            d.gain
        )));
    }
    let objective_value = objective.eval(inst, &contract, &equilibrium)?;
    Ok(SolveResult { contract, equilibrium, objective_value, branch, trace })
}

/// Rejects inputs that are not a budget-feasible equilibrium pair.
pub(crate) fn check_input_pair(inst: &Instance, alpha: &Contract, s: &ActionProfile, cap: usize) -> Result<()> {
    inst.check_contract(alpha)?;
    inst.check_profile(s)?;
    if alpha.total() >= Rational::one() {
        return Err(Error::Precondition("input payments must total less than 1".into()));
    }
    if let Stability::Unstable(d) = is_nash(inst, alpha, s, cap)? {
        return Err(Error::Precondition(alloc::format!(
            "input profile is not an equilibrium (agent {} deviates)",
            d.agent
        )));
    }
    Ok(())
}

/// Pays only `agent`, who best-responds to everyone else being idle.
pub(crate) fn solo(inst: &Instance, agent: usize, payment: Rational, cap: usize) -> Result<(Contract, ActionProfile)> {
    let s = best_response(inst, agent, &payment, &ActionProfile::new(), cap)?;
    let contract = Contract::zero(inst.n()).with_payment(agent, payment)?;
    Ok((contract, s))
}

/// The zero contract with every free action taken.
pub(crate) fn zero_contract(inst: &Instance) -> (Contract, ActionProfile) {
    (Contract::zero(inst.n()), inst.free_actions())
}

/// The dominant paid agent, if one earns at least four times the rest:
/// `alpha_z > 1/2` and `(1 - alpha_z) f(S_z) >= 4 f(S_-z)`.
pub(crate) fn dominant_agent(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Option<usize> {
    let half = Rational::new(1.into(), 2.into());
    inst.active_agents(s).into_iter().find(|&z| {
        let a = alpha.get(z);
        *a > half
            && (Rational::one() - a) * inst.value(&inst.agent_part(s, z))
                >= Rational::from_integer(4.into()) * inst.value(&inst.without_agent(s, z))
    })
}

/// `ln ln n / ln n` for `n >= 3`; smaller `n` has no meaningful bound.
pub(crate) fn loglog_ratio(n: usize) -> Option<f64> {
    if n < 3 {
        return None;
    }
    let l = ln(n as f64);
    Some(ln(l) / l)
}

/// `out >= factor * input`, compared in floating point with a relative
/// slack of `1e-9` since the factor is irrational.
pub(crate) fn float_bound_holds(out: &Rational, input: &Rational, factor: f64) -> bool {
    let rhs = factor * to_f64(input);
    to_f64(out) >= rhs - 1e-9 * rhs.abs()
}

/// Profit of the input pair, `(1 - sum(alpha)) f(S)`.
pub(crate) fn input_profit(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Rational {
    let p = inst.principal_utility(alpha, s);
    if p < Rational::zero() {
        Rational::zero()
    } else {
        p
    }
}

/// `alpha` with the payments of `agents` raised to at least `level`.
pub(crate) fn raise_to(alpha: &Contract, agents: &[usize], level: &Rational) -> Result<Contract> {
    let mut pay: Vec<Rational> = alpha.as_slice().to_vec();
    for &i in agents {
        if pay[i] < *level {
            pay[i] = level.clone();
        }
    }
    Contract::new(pay)
}
