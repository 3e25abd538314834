//! Best responses, stability checks and equilibrium construction.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::num::Rational;
use crate::profile::ActionProfile;
use crate::rewards::{demand, Price, PriceVector, RewardSpec};
use crate::table::ValueTable;

/// A profitable unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub agent: usize,
    /// The deviating agent's new action set.
    pub to: ActionProfile,
    pub gain: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable(Deviation),
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumMode {
    /// Round-robin best-response dynamics from the empty profile.
    BrDynamics,
    /// Equilibrium with the largest reward, by enumeration.
    ExhaustiveBest,
    /// Equilibrium with the smallest reward, by enumeration.
    ExhaustiveWorst,
}

/// `payment * value - cost` as an unreduced fraction. Scores are only
/// compared, and cross-multiplying is much cheaper than the gcd a reduced
/// product needs once the numbers grow large.
struct Score {
    numer: BigInt,
    /// Always positive.
    denom: BigInt,
}

impl Score {
    fn new(payment: &Rational, value: &Rational, cost: &Rational) -> Self {
        let numer = payment.numer() * value.numer() * cost.denom() - cost.numer() * payment.denom() * value.denom();
        Self { numer, denom: payment.denom() * value.denom() * cost.denom() }
    }

    fn cmp(&self, other: &Score) -> Ordering {
        (&self.numer * &other.denom).cmp(&(&other.numer * &self.denom))
    }
}

struct Candidate {
    set: ActionProfile,
    utility: Score,
    value: Rational,
    cost: Rational,
}

impl Candidate {
    /// Higher utility first, then larger reward, lower cost, lexicographic set.
    fn beats(&self, other: &Candidate) -> bool {
        self.utility
            .cmp(&other.utility)
            .then(self.value.cmp(&other.value))
            .then(other.cost.cmp(&self.cost))
            .then(other.set.cmp(&self.set))
            == Ordering::Greater
    }
}

/// Candidate sets for `agent`: every subset of `pool`, or one set per size
/// when the reward only sees how many of the agent's equally priced actions
/// are taken.
fn candidate_sets(inst: &Instance, agent: usize, pool: &[usize], cap: usize) -> Result<Vec<ActionProfile>> {
    let symmetric = matches!(inst.reward(), RewardSpec::HardnessXos { .. })
        && pool.windows(2).all(|w| inst.cost(w[0]) == inst.cost(w[1]))
        && pool.len() == inst.actions_of(agent).len();
    if symmetric {
        return Ok((0..=pool.len()).map(|k| pool[..k].iter().copied().collect()).collect());
    }
    if pool.len() > cap || pool.len() > 40 {
        return Err(Error::CapExceeded { needed: pool.len(), cap });
    }
    Ok((0..1u64 << pool.len()).map(|mask| ActionProfile::from_mask(mask, pool)).collect())
}

fn is_additive(inst: &Instance) -> bool {
    matches!(inst.reward(), RewardSpec::Additive { .. })
}

/// Best of `sets` for an agent facing `rest`. Additive rewards split, so
/// there `value` and `utility` leave out the rest of the profile, which
/// shifts every score equally.
fn best_among(inst: &Instance, payment: &Rational, rest: &ActionProfile, sets: Vec<ActionProfile>) -> Candidate {
    let additive = is_additive(inst);
    let mut best: Option<Candidate> = None;
    for set in sets {
        let value = if additive { inst.value(&set) } else { inst.value(&set.union(rest)) };
        let cost = inst.cost_of(&set);
        let utility = Score::new(payment, &value, &cost);
        let cand = Candidate { set, utility, value, cost };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    }
    best.expect("the empty set is always a candidate")
}

/// What the agent gains by switching from `own` to `best.set`; zero unless positive.
fn gain_over(
    inst: &Instance,
    payment: &Rational,
    rest: &ActionProfile,
    own: &ActionProfile,
    best: &Candidate,
) -> Rational {
    let own_value = if is_additive(inst) { inst.value(own) } else { inst.value(&own.union(rest)) };
    let own_score = Score::new(payment, &own_value, &inst.cost_of(own));
    if best.utility.cmp(&own_score) != Ordering::Greater {
        return Rational::zero();
    }
    payment * (&best.value - own_value) - (&best.cost - inst.cost_of(own))
}

/// Best response of `agent` at payment `payment` to the other agents' actions.
///
/// Among utility maximizers the response with the larger reward wins, then
/// the cheaper one, then the lexicographically smaller set.
pub fn best_response(
    inst: &Instance,
    agent: usize,
    payment: &Rational,
    others: &ActionProfile,
    cap: usize,
) -> Result<ActionProfile> {
    if agent >= inst.n() {
        return Err(Error::UnknownAgent(agent));
    }
    inst.check_profile(others)?;
    let rest = inst.without_agent(others, agent);
    let pool = inst.actions_of(agent);
    let sets = candidate_sets(inst, agent, pool, cap)?;
    Ok(best_among(inst, payment, &rest, sets).set)
}

fn check_inputs(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Result<()> {
    inst.check_contract(alpha)?;
    inst.check_profile(s)
}

fn stability(
    inst: &Instance,
    alpha: &Contract,
    s: &ActionProfile,
    cap: usize,
    pool_of: impl Fn(usize, &ActionProfile) -> Vec<usize>,
    subsets_only: bool,
) -> Result<Stability> {
    check_inputs(inst, alpha, s)?;
    for i in 0..inst.n() {
        let own = inst.agent_part(s, i);
        let pool = pool_of(i, &own);
        let rest = inst.without_agent(s, i);
        let sets = if subsets_only {
            if pool.len() > cap || pool.len() > 40 {
                return Err(Error::CapExceeded { needed: pool.len(), cap });
            }
            (0..1u64 << pool.len()).map(|mask| ActionProfile::from_mask(mask, &pool)).collect()
        } else {
            candidate_sets(inst, i, &pool, cap)?
        };
        let best = best_among(inst, alpha.get(i), &rest, sets);
        let gain = gain_over(inst, alpha.get(i), &rest, &own, &best);
        if gain.is_positive() {
            return Ok(Stability::Unstable(Deviation { agent: i, to: best.set, gain }));
        }
    }
    Ok(Stability::Stable)
}

/// Every agent plays a best response. The witness is the first unstable
/// agent together with its best response.
pub fn is_nash(inst: &Instance, alpha: &Contract, s: &ActionProfile, cap: usize) -> Result<Stability> {
    stability(inst, alpha, s, cap, |i, _| inst.actions_of(i).to_vec(), false)
}

/// No agent gains by dropping to a subset of its own actions.
pub fn is_subset_stable(inst: &Instance, alpha: &Contract, s: &ActionProfile, cap: usize) -> Result<Stability> {
    stability(inst, alpha, s, cap, |_, own| own.to_vec(), true)
}

/// No agent gains by dropping all of its actions.
pub fn is_dropout_stable(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Result<Stability> {
    check_inputs(inst, alpha, s)?;
    let value = inst.value(s);
    for i in inst.active_agents(s) {
        let own = inst.agent_part(s, i);
        let rest = inst.without_agent(s, i);
        let gain = alpha.get(i) * (inst.value(&rest) - &value) + inst.cost_of(&own);
        if gain > Rational::zero() {
            return Ok(Stability::Unstable(Deviation { agent: i, to: ActionProfile::new(), gain }));
        }
    }
    Ok(Stability::Stable)
}

/// Update budget for best-response dynamics: `10 * n * 2^(max actions per agent)`.
pub fn dynamics_budget(inst: &Instance) -> usize {
    let width = inst.max_actions_per_agent().min(40) as u32;
    10usize.saturating_mul(inst.n().max(1)).saturating_mul(1usize.checked_shl(width).unwrap_or(usize::MAX))
}

pub fn find_equilibrium(inst: &Instance, alpha: &Contract, mode: EquilibriumMode, cap: usize) -> Result<ActionProfile> {
    inst.check_contract(alpha)?;
    match mode {
        EquilibriumMode::BrDynamics => br_dynamics(inst, alpha, &ActionProfile::new(), cap),
        EquilibriumMode::ExhaustiveBest | EquilibriumMode::ExhaustiveWorst => {
            let table = ValueTable::new(inst, cap)?;
            let eq = table.equilibria(alpha);
            let pick = table.extreme(&eq, mode == EquilibriumMode::ExhaustiveBest);
            let mask = pick.ok_or(Error::NoEquilibrium)?;
            Ok(table.profile(mask))
        }
    }
}

/// Round-robin best-response dynamics from `start`. An agent only moves when
/// its best response is strictly better than its current set.
pub fn br_dynamics(inst: &Instance, alpha: &Contract, start: &ActionProfile, cap: usize) -> Result<ActionProfile> {
    inst.check_contract(alpha)?;
    inst.check_profile(start)?;
    let budget = dynamics_budget(inst);
    let mut s = start.clone();
    let mut steps = 0usize;
    loop {
        let mut moved = false;
        for i in 0..inst.n() {
            steps += 1;
            if steps > budget {
                return Err(Error::NoConvergence { steps: budget });
            }
            let own = inst.agent_part(&s, i);
            let rest = inst.without_agent(&s, i);
            let sets = candidate_sets(inst, i, inst.actions_of(i), cap)?;
            let best = best_among(inst, alpha.get(i), &rest, sets);
            if gain_over(inst, alpha.get(i), &rest, &own, &best).is_positive() {
                s = rest.union(&best.set);
                moved = true;
            }
        }
        if !moved {
            return Ok(s);
        }
    }
}

/// Prices `c_j / alpha_i` for the owner `i` of each action.
pub fn payment_prices(inst: &Instance, alpha: &Contract) -> PriceVector {
    PriceVector((0..inst.m()).map(|j| Price::cost_over_payment(inst.cost(j), alpha.get(inst.owner(j)))).collect())
}

/// Scales the payments of `subset` by `gamma`, drops everyone else and returns
/// the demand set at prices `c_j / alpha'_i`, which is an equilibrium of the
/// scaled contract.
///
/// Checks that `s` is dropout stable for `alpha` beforehand, and that the
/// result is an equilibrium keeping a `1 - 1/gamma` share of `f(S|subset)`.
pub fn scale_for_existence(
    inst: &Instance,
    alpha: &Contract,
    s: &ActionProfile,
    subset: &[usize],
    gamma: &Rational,
    cap: usize,
) -> Result<(Contract, ActionProfile)> {
    if *gamma <= Rational::one() {
        return Err(Error::Precondition("scaling factor must exceed 1".into()));
    }
    if let Stability::Unstable(d) = is_dropout_stable(inst, alpha, s)? {
        return Err(Error::Precondition(format!("profile is not dropout stable (agent {})", d.agent)));
    }
    let mut scaled = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let a = if subset.contains(&i) { gamma * alpha.get(i) } else { Rational::zero() };
        if a > Rational::one() {
            return Err(Error::PaymentOverflow { agent: i });
        }
        scaled.push(a);
    }
    let scaled = Contract::new(scaled)?;
    let out = demand(inst.reward(), &payment_prices(inst, &scaled), cap)?;
    if let Stability::Unstable(d) = is_nash(inst, &scaled, &out, cap)? {
        return Err(Error::AssertionFailed(format!("scaled demand set is not an equilibrium (agent {})", d.agent)));
    }
    let floor = (Rational::one() - Rational::one() / gamma) * inst.value(&inst.restrict(s, subset));
    if inst.value(&out) < floor {
        return Err(Error::AssertionFailed("scaled equilibrium lost more than the 1 - 1/gamma share".into()));
    }
    Ok((scaled, out))
}

/// `2 * alpha`, valid for a subset-stable profile of a submodular reward in
/// which unpaid agents are idle.
pub fn double_contract(inst: &Instance, alpha: &Contract, s: &ActionProfile, cap: usize) -> Result<Contract> {
    if !inst.reward().is_submodular_class() {
        return Err(Error::NonSubmodularClass);
    }
    if let Stability::Unstable(d) = is_subset_stable(inst, alpha, s, cap)? {
        return Err(Error::Precondition(format!("profile is not subset stable (agent {})", d.agent)));
    }
    for i in inst.active_agents(s) {
        if alpha.get(i).is_zero() {
            return Err(Error::Precondition(format!("unpaid agent {i} is active")));
        }
    }
    let two = Rational::from_integer(2.into());
    let mut out = Vec::with_capacity(alpha.len());
    for (i, a) in alpha.as_slice().iter().enumerate() {
        let d = &two * a;
        if d > Rational::one() {
            return Err(Error::PaymentOverflow { agent: i });
        }
        out.push(d);
    }
    Contract::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_coverage_gap, gen_intro_example};
    use crate::num::rat;
    use alloc::vec;

    fn ids(v: &[usize]) -> ActionProfile {
        ActionProfile::from_ids(v.iter().copied())
    }

    #[test]
    fn coverage_gap_best_response_prefers_b() {
        let inst = gen_coverage_gap(&rat(1, 10)).unwrap();
        let br = best_response(&inst, 0, &Rational::one(), &ActionProfile::new(), 20).unwrap();
        assert_eq!(br.to_vec(), [1]);
    }

    #[test]
    fn intro_stability_examples() {
        let eps = rat(1, 100);
        let inst = gen_intro_example(&eps).unwrap();
        let alpha = Contract::new(vec![rat(1, 2), Rational::zero()]).unwrap();
        match is_nash(&inst, &alpha, &ids(&[0, 2]), 20).unwrap() {
            Stability::Unstable(d) => {
                assert_eq!(d.agent, 1);
                assert!(d.to.is_empty());
                assert_eq!(d.gain, rat(1, 8));
            }
            Stability::Stable => panic!("expected a deviation"),
        }
        let alpha = Contract::new(vec![rat(1, 2) - rat(2, 1) * &eps, Rational::zero()]).unwrap();
        assert!(is_nash(&inst, &alpha, &ids(&[0]), 20).unwrap().is_stable());
        assert!(!is_nash(&inst, &alpha, &ids(&[0, 1]), 20).unwrap().is_stable());
    }

    #[test]
    fn coverage_gap_unique_equilibrium() {
        let eps = rat(1, 10);
        let inst = gen_coverage_gap(&eps).unwrap();
        let alpha = Contract::new(vec![Rational::one() - &eps * &eps, eps.clone()]).unwrap();
        let table = ValueTable::new(&inst, 20).unwrap();
        let eq = table.equilibria(&alpha);
        assert_eq!(eq.len(), 1);
        assert_eq!(table.profile(eq[0]).to_vec(), [0, 2]);
        assert_eq!(inst.value(&table.profile(eq[0])), rat(13, 10));
        let dyn_eq = find_equilibrium(&inst, &alpha, EquilibriumMode::BrDynamics, 20).unwrap();
        assert_eq!(dyn_eq.to_vec(), [0, 2]);
    }

    #[test]
    fn stability_chain_on_intro() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let alpha = Contract::new(vec![rat(1, 2), Rational::zero()]).unwrap();
        let s = ids(&[0, 1]);
        assert!(is_nash(&inst, &alpha, &s, 20).unwrap().is_stable());
        assert!(is_subset_stable(&inst, &alpha, &s, 20).unwrap().is_stable());
        assert!(is_dropout_stable(&inst, &alpha, &s).unwrap().is_stable());
    }

    #[test]
    fn doubling_rejects_overflow_and_unpaid_workers() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let alpha = Contract::new(vec![rat(1, 2), Rational::zero()]).unwrap();
        let d = double_contract(&inst, &alpha, &ids(&[0, 1]), 20).unwrap();
        assert_eq!(d.as_slice(), [Rational::one(), Rational::zero()]);
        let alpha = Contract::new(vec![rat(3, 5), Rational::zero()]).unwrap();
        assert_eq!(double_contract(&inst, &alpha, &ids(&[0, 1]), 20), Err(Error::PaymentOverflow { agent: 0 }));
    }

    #[test]
    fn exhaustive_matches_pointwise_nash() {
        let inst = gen_coverage_gap(&rat(1, 10)).unwrap();
        let table = ValueTable::new(&inst, 20).unwrap();
        for alpha in
            [vec![rat(1, 2), rat(1, 2)], vec![Rational::one(), Rational::zero()], vec![rat(1, 10), rat(1, 1000)]]
        {
            let alpha = Contract::new(alpha).unwrap();
            let eq = table.equilibria(&alpha);
            for mask in 0..8u64 {
                let nash = is_nash(&inst, &alpha, &table.profile(mask), 20).unwrap().is_stable();
                assert_eq!(nash, eq.contains(&mask), "mask {mask:b}");
            }
        }
    }
}
