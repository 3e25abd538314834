use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::{checked, Witness};
use crate::error::{Error, Result};
use crate::model::{Action, Contract, Instance};
use crate::num::{from_usize, harmonic, rat, Rational};
use crate::profile::ActionProfile;
use crate::rewards::{isqrt, RewardSpec};

/// Two agents with two actions each and reward `|S| / 4`; agent 0's first
/// action is `eps` cheaper and agent 1's second action `eps` dearer than `1/8`.
pub fn gen_intro_example(eps: &Rational) -> Result<Instance> {
    if eps.is_negative() || *eps >= rat(1, 8) {
        return Err(Error::Precondition("need 0 <= eps < 1/8".into()));
    }
    let eighth = rat(1, 8);
    let costs = [&eighth - eps, eighth.clone(), eighth.clone(), &eighth + eps];
    let actions = costs.iter().enumerate().map(|(j, c)| Action { agent: j / 2, cost: c.clone() }).collect();
    Instance::new(2, actions, RewardSpec::Additive { weights: vec![rat(1, 4); 4] })
}

/// `n` single-action agents; agent `i` (0-based) contributes `1/(i+1)` at cost
/// `1 / (2 (i+1)^2 H_n)`. The reward is left unnormalized with scale `H_n`.
///
/// The witness pays `1 / (2 (i+1) H_n)` and everyone works.
pub fn gen_harmonic(n: usize) -> Result<(Instance, Witness)> {
    if n == 0 {
        return Err(Error::Precondition("harmonic family needs n >= 1".into()));
    }
    let h = harmonic(n);
    let mut actions = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut pay = Vec::with_capacity(n);
    for i in 1..=n {
        let k = i as u64;
        actions.push(Action { agent: i - 1, cost: inverse_times(&h, 2 * k * k) });
        weights.push(rat(1, i as i64));
        pay.push(inverse_times(&h, 2 * k));
    }
    let inst = Instance::with_scale(n, actions, RewardSpec::Additive { weights }, h)?;
    let witness = checked(&inst, Witness { contract: Contract::new(pay)?, profile: (0..n).collect() })?;
    Ok((inst, witness))
}

/// `1 / (k x)` for a reduced `x`; only a gcd with the small `k` is needed.
fn inverse_times(x: &Rational, k: u64) -> Rational {
    let (p, q) = (x.numer(), x.denom());
    let r = (q % BigInt::from(k)).to_u64().expect("remainder below k");
    let g = BigInt::from(r.gcd(&k));
    Rational::new_raw(q / &g, p * (BigInt::from(k) / &g))
}

/// Symmetric subadditive family on `n` single-action agents (`n` a square
/// with `n >= 16`). The last agent is the expensive one.
pub fn gen_subadditive_poe(n: usize) -> Result<(Instance, Witness)> {
    let root = isqrt(n);
    if n < 16 || root * root != n {
        return Err(Error::Precondition("need a perfect square n >= 16".into()));
    }
    let r = from_usize(root);
    let nr = from_usize(n);
    let cheap = Rational::one() / (from_usize(2) * &nr * &r);
    let dear = Rational::one() / (from_usize(4) * &r);
    let actions =
        (0..n).map(|i| Action { agent: i, cost: if i + 1 < n { cheap.clone() } else { dear.clone() } }).collect();
    let scale = from_usize(2) / &r + from_usize(n - 1) / &nr;
    let inst = Instance::with_scale(n, actions, RewardSpec::SubadditivePoe { n }, scale)?;
    let mut pay = vec![Rational::one() / (from_usize(2) * &nr); n];
    pay[n - 1] = rat(1, 4);
    let witness = checked(&inst, Witness { contract: Contract::new(pay)?, profile: (0..n).collect() })?;
    Ok((inst, witness))
}

/// Action ids of the coverage gap gadget.
pub mod gap_ids {
    /// Agent 0's expensive, high-value action.
    pub const GOOD: usize = 0;
    /// Agent 0's cheap action.
    pub const BAD: usize = 1;
    /// Agent 1's only action.
    pub const HELPER: usize = 2;
}

/// Two-agent coverage gadget separating unconstrained from equal-pay reward.
///
/// Universe weights `(1, eps, eps, eps)`; `GOOD` covers the first two
/// elements, `BAD` the middle two, `HELPER` the last two.
pub fn gen_coverage_gap(eps: &Rational) -> Result<Instance> {
    if !eps.is_positive() || *eps > rat(1, 10) {
        return Err(Error::Precondition("need 0 < eps <= 1/10".into()));
    }
    let actions = vec![
        Action { agent: 0, cost: Rational::one() + eps / from_usize(3) },
        Action { agent: 0, cost: eps.clone() },
        Action { agent: 1, cost: eps * eps * eps * eps },
    ];
    let reward = RewardSpec::Coverage {
        universe: vec![Rational::one(), eps.clone(), eps.clone(), eps.clone()],
        covers: vec![vec![0, 1], vec![1, 2], vec![2, 3]],
        normalizer: Rational::one(),
    };
    let scale = Rational::one() + from_usize(3) * eps;
    Instance::with_scale(2, actions, reward, scale)
}

/// The gadget's high-reward contract `(1 - eps^2, eps)` with profile `{GOOD, HELPER}`.
pub fn coverage_gap_witness(eps: &Rational) -> Result<Witness> {
    let inst = gen_coverage_gap(eps)?;
    let witness = Witness {
        contract: Contract::new(vec![Rational::one() - eps * eps, eps.clone()])?,
        profile: ActionProfile::from_ids([gap_ids::GOOD, gap_ids::HELPER]),
    };
    checked(&inst, witness)
}
