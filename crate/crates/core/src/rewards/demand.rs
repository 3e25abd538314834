use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Zero;

use super::RewardSpec;
use crate::error::{Error, Result};
use crate::num::Rational;
use crate::profile::{mask_lex_cmp, ActionProfile};

/// Per-action price; `Infinite` never gets bought.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Price {
    Finite(Rational),
    Infinite,
}

impl Price {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Price::Finite(p) => Some(p),
            Price::Infinite => None,
        }
    }

    /// `cost / payment` with `c / 0 = inf` for `c > 0` and `0 / 0 = 0`.
    pub fn cost_over_payment(cost: &Rational, payment: &Rational) -> Self {
        if payment.is_zero() {
            if cost.is_zero() {
                Price::Finite(Rational::zero())
            } else {
                Price::Infinite
            }
        } else {
            Price::Finite(cost / payment)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceVector(pub Vec<Price>);

impl PriceVector {
    pub fn finite(prices: Vec<Rational>) -> Self {
        Self(prices.into_iter().map(Price::Finite).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> &Price {
        &self.0[j]
    }

    /// Actions with a finite price, ascending.
    pub fn finite_support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|j| self.0[*j] != Price::Infinite).collect()
    }

    /// Total price of `s`; `None` if it contains an infinitely priced action.
    pub fn total(&self, s: &ActionProfile) -> Option<Rational> {
        let mut acc = Rational::zero();
        for j in s.iter() {
            acc += self.0[j].finite()?;
        }
        Some(acc)
    }
}

/// Maximizer of `score` over all subsets of `ground`, breaking ties toward
/// fewer elements and then the lexicographically smallest set.
pub fn exhaustive_argmax<F>(ground: &[usize], cap: usize, mut score: F) -> Result<(ActionProfile, Rational)>
where
    F: FnMut(&ActionProfile) -> Rational,
{
    if ground.len() > cap || ground.len() > 40 {
        return Err(Error::CapExceeded { needed: ground.len(), cap });
    }
    let mut best_mask = 0u64;
    let mut best = score(&ActionProfile::new());
    for mask in 1u64..1 << ground.len() {
        let v = score(&ActionProfile::from_mask(mask, ground));
        let better = match v.cmp(&best) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match mask.count_ones().cmp(&best_mask.count_ones()) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => mask_lex_cmp(mask, best_mask) == Ordering::Less,
            },
        };
        if better {
            best = v;
            best_mask = mask;
        }
    }
    Ok((ActionProfile::from_mask(best_mask, ground), best))
}

/// Exact demand set: a maximizer of `f(S) - p(S)`, preferring fewer actions
/// and then the lexicographically smallest set among maximizers found.
///
/// Additive, partition matroid, XOS and the symmetric subadditive family are
/// solved in closed form; other classes search the finitely priced actions
/// exhaustively up to `cap`.
pub fn demand(reward: &RewardSpec, prices: &PriceVector, cap: usize) -> Result<ActionProfile> {
    let m = prices.len();
    match reward {
        RewardSpec::Additive { weights } => {
            Ok((0..m).filter(|j| matches!(prices.get(*j), Price::Finite(p) if weights[*j] > *p)).collect())
        }
        RewardSpec::PartitionMatroid { parts, unit } => {
            let mut out = ActionProfile::new();
            for part in parts {
                let cheapest = part.iter().filter_map(|j| prices.get(*j).finite().map(|p| (p, *j))).min();
                if let Some((p, j)) = cheapest {
                    if unit > p {
                        out.insert(j);
                    }
                }
            }
            Ok(out)
        }
        RewardSpec::Xos { clauses } => {
            let mut best: Option<(Rational, ActionProfile)> = None;
            for clause in clauses {
                let mut set = ActionProfile::new();
                let mut surplus = Rational::zero();
                for (j, weight) in clause.iter().enumerate().take(m) {
                    if let Price::Finite(p) = prices.get(j) {
                        if weight > p {
                            set.insert(j);
                            surplus += weight - p;
                        }
                    }
                }
                let replace = match &best {
                    None => true,
                    Some((b, bs)) => match surplus.cmp(b) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => (set.len(), &set) < (bs.len(), bs),
                    },
                };
                if replace {
                    best = Some((surplus, set));
                }
            }
            Ok(best.map(|b| b.1).unwrap_or_default())
        }
        RewardSpec::SubadditivePoe { .. } => {
            let mut order: Vec<(Rational, usize)> =
                (0..m).filter_map(|j| prices.get(j).finite().map(|p| (p.clone(), j))).collect();
            order.sort();
            let mut best = (Rational::zero(), 0usize);
            let mut spent = Rational::zero();
            let mut set = ActionProfile::new();
            for (size, (p, j)) in order.iter().enumerate() {
                spent += p;
                set.insert(*j);
                let surplus = reward.value(&set) - &spent;
                if surplus > best.0 {
                    best = (surplus, size + 1);
                }
            }
            let mut chosen: Vec<usize> = order[..best.1].iter().map(|x| x.1).collect();
            chosen.sort_unstable();
            Ok(chosen.into_iter().collect())
        }
        _ => {
            let ground = prices.finite_support();
            let (set, _) =
                exhaustive_argmax(&ground, cap, |s| reward.value(s) - prices.total(s).expect("finite support"))?;
            Ok(set)
        }
    }
}
