//! Instances, contracts, action profiles and objectives.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::Rational;
use crate::profile::ActionProfile;
use crate::rewards::RewardSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub agent: usize,
    pub cost: Rational,
}

/// Agents, their disjoint action sets, action costs and the shared reward.
///
/// Action ids are positions in `actions`. `scale` bounds the reward from
/// above; rescaled families that exceed 1 record their maximum there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    actions: Vec<Action>,
    reward: RewardSpec,
    scale: Rational,
    by_agent: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(n: usize, actions: Vec<Action>, reward: RewardSpec) -> Result<Self> {
        Self::with_scale(n, actions, reward, Rational::one())
    }

    pub fn with_scale(n: usize, actions: Vec<Action>, reward: RewardSpec, scale: Rational) -> Result<Self> {
        let mut by_agent = vec![Vec::new(); n];
        for (id, a) in actions.iter().enumerate() {
            if a.agent >= n {
                return Err(Error::UnknownAgent(a.agent));
            }
            if a.cost.is_negative() {
                return Err(Error::InvalidInstance(format!("action {id} has a negative cost")));
            }
            by_agent[a.agent].push(id);
        }
        if !scale.is_positive() {
            return Err(Error::InvalidInstance("scale must be positive".into()));
        }
        reward.check_shape(actions.len())?;
        Ok(Self { n, actions, reward, scale, by_agent })
    }

    /// Same instance with every action cost replaced.
    pub fn with_costs(&self, costs: Vec<Rational>) -> Result<Self> {
        if costs.len() != self.m() {
            return Err(Error::InvalidInstance("cost vector has the wrong length".into()));
        }
        let actions = self.actions.iter().zip(costs).map(|(a, cost)| Action { agent: a.agent, cost }).collect();
        Self::with_scale(self.n, actions, self.reward.clone(), self.scale.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn reward(&self) -> &RewardSpec {
        &self.reward
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn owner(&self, action: usize) -> usize {
        self.actions[action].agent
    }

    pub fn owners(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.agent).collect()
    }

    pub fn cost(&self, action: usize) -> &Rational {
        &self.actions[action].cost
    }

    pub fn actions_of(&self, agent: usize) -> &[usize] {
        &self.by_agent[agent]
    }

    pub fn max_actions_per_agent(&self) -> usize {
        self.by_agent.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Every agent owns exactly one action.
    pub fn is_binary(&self) -> bool {
        self.by_agent.iter().all(|t| t.len() == 1)
    }

    pub fn value(&self, s: &ActionProfile) -> Rational {
        self.reward.value(s)
    }

    pub fn cost_of(&self, s: &ActionProfile) -> Rational {
        s.iter().fold(Rational::zero(), |acc, j| acc + &self.actions[j].cost)
    }

    pub fn check_profile(&self, s: &ActionProfile) -> Result<()> {
        match s.max_id() {
            Some(j) if j >= self.m() => Err(Error::UnknownAction(j)),
            _ => Ok(()),
        }
    }

    pub fn check_contract(&self, alpha: &Contract) -> Result<()> {
        if alpha.len() != self.n {
            return Err(Error::InvalidContract(format!("contract has {} entries for {} agents", alpha.len(), self.n)));
        }
        Ok(())
    }

    /// Agents with at least one action in `s`, ascending.
    pub fn active_agents(&self, s: &ActionProfile) -> Vec<usize> {
        let set: BTreeSet<usize> = s.iter().map(|j| self.owner(j)).collect();
        set.into_iter().collect()
    }

    /// Actions of `s` that belong to `agent`.
    pub fn agent_part(&self, s: &ActionProfile, agent: usize) -> ActionProfile {
        self.by_agent[agent].iter().copied().filter(|j| s.contains(*j)).collect()
    }

    /// Actions of `s` whose owner is in `agents`.
    pub fn restrict(&self, s: &ActionProfile, agents: &[usize]) -> ActionProfile {
        let mut out = ActionProfile::new();
        for &i in agents {
            out.extend(self.by_agent[i].iter().copied().filter(|j| s.contains(*j)));
        }
        out
    }

    /// `s` with the actions of `agent` removed.
    pub fn without_agent(&self, s: &ActionProfile, agent: usize) -> ActionProfile {
        let mut out = s.clone();
        for &j in &self.by_agent[agent] {
            out.remove(j);
        }
        out
    }

    /// `alpha_i * f(S) - c(S_i)`.
    pub fn agent_utility(&self, alpha: &Contract, s: &ActionProfile, agent: usize) -> Rational {
        alpha.get(agent) * self.value(s) - self.cost_of(&self.agent_part(s, agent))
    }

    /// `(1 - sum(alpha)) * f(S)`; may be negative.
    pub fn principal_utility(&self, alpha: &Contract, s: &ActionProfile) -> Rational {
        (Rational::one() - alpha.total()) * self.value(s)
    }

    /// Free actions: the reward from every zero-cost action is available at the zero contract.
    pub fn free_actions(&self) -> ActionProfile {
        (0..self.m()).filter(|j| self.cost(*j).is_zero()).collect()
    }
}

/// Linear contract: agent `i` receives `alpha[i]` of the realized reward.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Contract(Vec<Rational>);

impl Contract {
    pub fn new(payments: Vec<Rational>) -> Result<Self> {
        for (i, a) in payments.iter().enumerate() {
            if a.is_negative() || *a > Rational::one() {
                return Err(Error::InvalidContract(format!("payment of agent {i} is outside [0, 1]")));
            }
        }
        Ok(Self(payments))
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![Rational::zero(); n])
    }

    pub fn get(&self, agent: usize) -> &Rational {
        &self.0[agent]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, a| acc + a)
    }

    /// Agents with a positive payment.
    pub fn paid(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|i| self.0[*i].is_positive()).collect()
    }

    pub fn max_payment(&self) -> Rational {
        self.0.iter().cloned().max().unwrap_or_else(Rational::zero)
    }

    /// All positive payments are equal.
    pub fn is_equal_pay(&self) -> bool {
        let mut pos = self.0.iter().filter(|a| a.is_positive());
        match pos.next() {
            None => true,
            Some(first) => pos.all(|a| a == first),
        }
    }

    /// Ratio of the largest to the smallest positive payment (1 if none).
    pub fn dispersion(&self) -> Rational {
        let pos: Vec<&Rational> = self.0.iter().filter(|a| a.is_positive()).collect();
        match (pos.iter().max(), pos.iter().min()) {
            (Some(hi), Some(lo)) => *hi / *lo,
            _ => Rational::one(),
        }
    }

    /// Keeps the payments of `agents` and zeroes the rest.
    pub fn restricted(&self, agents: &[usize]) -> Self {
        let mut out = Self::zero(self.0.len());
        for &i in agents {
            out.0[i] = self.0[i].clone();
        }
        out
    }

    pub fn with_payment(&self, agent: usize, payment: Rational) -> Result<Self> {
        let mut v = self.0.clone();
        v[agent] = payment;
        Self::new(v)
    }
}

/// Pays `level` to every agent in `paid` and nothing to anyone else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualPayContract {
    pub level: Rational,
    pub paid: BTreeSet<usize>,
}

impl EqualPayContract {
    pub fn new<I: IntoIterator<Item = usize>>(level: Rational, paid: I) -> Self {
        Self { level, paid: paid.into_iter().collect() }
    }

    pub fn to_contract(&self, n: usize) -> Result<Contract> {
        let mut v = vec![Rational::zero(); n];
        for &i in &self.paid {
            if i >= n {
                return Err(Error::UnknownAgent(i));
            }
            v[i] = self.level.clone();
        }
        Contract::new(v)
    }

    pub fn total(&self) -> Rational {
        &self.level * Rational::from_integer(self.paid.len().into())
    }
}

/// `level` paid to each agent in `paid`.
pub fn eqcontract(n: usize, level: &Rational, paid: &[usize]) -> Result<Contract> {
    EqualPayContract::new(level.clone(), paid.iter().copied()).to_contract(n)
}

type CustomFn = dyn Fn(&Instance, &Contract, &ActionProfile) -> Result<Rational> + Send + Sync;

/// A user-supplied objective with attestations the solvers rely on.
#[derive(Clone)]
pub struct CustomObjective {
    pub name: String,
    pub eval: Arc<CustomFn>,
    /// The objective never increases when payments increase.
    pub decreasing_in_payments: bool,
    /// The caller vouches for the BEST properties.
    pub best: bool,
}

impl fmt::Debug for CustomObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomObjective")
            .field("name", &self.name)
            .field("decreasing_in_payments", &self.decreasing_in_payments)
            .field("best", &self.best)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Objective {
    /// `max(0, (1 - sum(alpha)) * f(S))`.
    Profit,
    /// `f(S)`.
    Reward,
    /// `f(S) - c(S)`; not covered by the BEST guarantees.
    Welfare,
    Custom(CustomObjective),
}

impl Objective {
    pub fn name(&self) -> &str {
        match self {
            Objective::Profit => "profit",
            Objective::Reward => "reward",
            Objective::Welfare => "welfare",
            Objective::Custom(c) => &c.name,
        }
    }

    /// Profit and reward satisfy the BEST properties; custom objectives only by attestation.
    pub fn is_verified_best(&self) -> bool {
        match self {
            Objective::Profit | Objective::Reward => true,
            Objective::Welfare => false,
            Objective::Custom(c) => c.best,
        }
    }

    pub fn decreasing_in_payments(&self) -> bool {
        match self {
            Objective::Custom(c) => c.decreasing_in_payments,
            _ => true,
        }
    }

    pub fn eval(&self, inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Result<Rational> {
        match self {
            Objective::Profit => Ok(profit(inst, alpha, s)),
            Objective::Reward => Ok(inst.value(s)),
            Objective::Welfare => Ok(inst.value(s) - inst.cost_of(s)),
            Objective::Custom(c) => (c.eval)(inst, alpha, s),
        }
    }

    /// Evaluation from precomputed reward and cost totals.
    pub(crate) fn eval_parts(
        &self,
        inst: &Instance,
        alpha: &Contract,
        s: &ActionProfile,
        value: &Rational,
        cost: &Rational,
    ) -> Result<Rational> {
        match self {
            Objective::Profit => Ok(clamp_profit((Rational::one() - alpha.total()) * value)),
            Objective::Reward => Ok(value.clone()),
            Objective::Welfare => Ok(value - cost),
            Objective::Custom(c) => (c.eval)(inst, alpha, s),
        }
    }
}

fn clamp_profit(p: Rational) -> Rational {
    if p.is_negative() {
        Rational::zero()
    } else {
        p
    }
}

/// Principal utility clamped at zero.
pub fn profit(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Rational {
    clamp_profit(inst.principal_utility(alpha, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn toy() -> Instance {
        let actions = vec![
            Action { agent: 0, cost: rat(1, 8) },
            Action { agent: 0, cost: rat(1, 8) },
            Action { agent: 1, cost: rat(1, 4) },
        ];
        let reward = RewardSpec::Additive { weights: vec![rat(1, 4), rat(1, 4), rat(1, 2)] };
        Instance::new(2, actions, reward).unwrap()
    }

    #[test]
    fn utilities_and_restrictions() {
        let inst = toy();
        let s = ActionProfile::from_ids([0, 2]);
        let alpha = Contract::new(vec![rat(1, 2), rat(1, 4)]).unwrap();
        assert_eq!(inst.active_agents(&s), [0, 1]);
        assert_eq!(inst.restrict(&s, &[1]).to_vec(), [2]);
        assert_eq!(inst.agent_utility(&alpha, &s, 0), rat(3, 8) - rat(1, 8));
        assert_eq!(inst.principal_utility(&alpha, &s), rat(1, 4) * rat(3, 4));
        assert_eq!(Objective::Welfare.eval(&inst, &alpha, &s).unwrap(), rat(3, 8));
    }

    #[test]
    fn profit_is_clamped() {
        let inst = toy();
        let s = ActionProfile::from_ids([0, 1, 2]);
        let alpha = Contract::new(vec![Rational::one(), rat(1, 2)]).unwrap();
        assert!(inst.principal_utility(&alpha, &s).is_negative());
        assert_eq!(profit(&inst, &alpha, &s), Rational::zero());
    }

    #[test]
    fn contract_validation_and_shape() {
        assert!(Contract::new(vec![rat(3, 2)]).is_err());
        assert!(Contract::new(vec![rat(-1, 2)]).is_err());
        let c = eqcontract(4, &rat(1, 5), &[1, 3]).unwrap();
        assert!(c.is_equal_pay());
        assert_eq!(c.paid(), [1, 3]);
        assert_eq!(c.total(), rat(2, 5));
        let d = Contract::new(vec![rat(1, 10), rat(3, 10), Rational::zero()]).unwrap();
        assert_eq!(d.dispersion(), rat(3, 1));
    }

    #[test]
    fn rejects_bad_owner() {
        let actions = vec![Action { agent: 3, cost: rat(0, 1) }];
        let reward = RewardSpec::Additive { weights: vec![rat(1, 1)] };
        assert_eq!(Instance::new(2, actions, reward), Err(Error::UnknownAgent(3)));
    }
}
