use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{PriceVector, RewardSpec, ValueOracle};
use crate::num::{from_usize, pow, Rational};
use crate::profile::ActionProfile;

/// `f(S) * min(1, k / |A(S)|)`: the reward discounted once more than `k`
/// agents are active.
pub struct Regularized<'a> {
    pub reward: &'a RewardSpec,
    pub owners: &'a [usize],
    pub k: usize,
}

impl Regularized<'_> {
    pub fn active_count(&self, s: &ActionProfile) -> usize {
        s.iter().map(|j| self.owners[j]).collect::<BTreeSet<_>>().len()
    }
}

impl ValueOracle for Regularized<'_> {
    fn value(&self, s: &ActionProfile) -> Rational {
        let f = self.reward.value(s);
        let active = self.active_count(s);
        if active <= self.k {
            f
        } else {
            f * from_usize(self.k) / from_usize(active)
        }
    }
}

/// Distorted greedy for `max g(S) - p(S)` where `g` is the regularized reward.
///
/// Runs one round per finitely priced action; in round `i` the candidate
/// maximizing `(1 - 1/r)^(r - i - 1) * g(e | S) - p(e)` is added when that
/// quantity is positive. Ties go to the lowest id.
pub fn approx_demand_regularized(
    reward: &RewardSpec,
    owners: &[usize],
    prices: &PriceVector,
    k: usize,
) -> ActionProfile {
    let g = Regularized { reward, owners, k };
    let ground: Vec<(usize, Rational)> =
        prices.finite_support().into_iter().map(|j| (j, prices.get(j).finite().cloned().unwrap_or_default())).collect();
    let r = ground.len();
    let mut s = ActionProfile::new();
    if r == 0 {
        return s;
    }
    let shrink = Rational::one() - Rational::one() / from_usize(r);
    let mut current = g.value(&s);
    for i in 0..r {
        let factor = pow(&shrink, r - i - 1);
        let mut best: Option<(Rational, usize, Rational)> = None;
        for (j, p) in &ground {
            if s.contains(*j) {
                continue;
            }
            let mut with = s.clone();
            with.insert(*j);
            let v = g.value(&with);
            let score = &factor * (&v - &current) - p;
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, *j, v));
            }
        }
        match best {
            Some((score, j, v)) if score > Rational::zero() => {
                s.insert(j);
                current = v;
            }
            _ => {}
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use alloc::vec;

    #[test]
    fn regularized_discounts_many_agents() {
        let f = RewardSpec::Additive { weights: vec![rat(1, 1); 4] };
        let owners = [0, 1, 2, 2];
        let g = Regularized { reward: &f, owners: &owners, k: 2 };
        assert_eq!(g.value(&ActionProfile::from_ids([0, 1])), rat(2, 1));
        assert_eq!(g.value(&ActionProfile::from_ids([0, 1, 2])), rat(2, 1));
        assert_eq!(g.value(&ActionProfile::from_ids([2, 3])), rat(2, 1));
        assert_eq!(g.value(&ActionProfile::from_ids([0, 1, 2, 3])), rat(8, 3));
    }

    #[test]
    fn greedy_skips_overpriced() {
        let f = RewardSpec::Additive { weights: vec![rat(1, 2), rat(1, 10)] };
        let owners = [0, 1];
        let p = PriceVector::finite(vec![rat(1, 10), rat(1, 2)]);
        let q = approx_demand_regularized(&f, &owners, &p, 4);
        assert_eq!(q.to_vec(), [0]);
    }
}
