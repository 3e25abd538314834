//! Precomputed reward and cost tables for exhaustive work on small instances.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::num::Rational;
use crate::profile::{mask_lex_cmp, ActionProfile};

/// `f` and `c` for every subset of the actions, indexed by bitmask.
pub struct ValueTable {
    pub m: usize,
    pub values: Vec<Rational>,
    pub costs: Vec<Rational>,
    /// Bitmask of each agent's actions.
    pub agent_masks: Vec<u64>,
}

impl ValueTable {
    pub fn new(inst: &Instance, cap: usize) -> Result<Self> {
        let m = inst.m();
        if m > cap || m > 30 {
            return Err(Error::CapExceeded { needed: m, cap });
        }
        let ground: Vec<usize> = (0..m).collect();
        let values = (0..1u64 << m).map(|mask| inst.value(&ActionProfile::from_mask(mask, &ground))).collect();
        let mut costs = vec![Rational::zero(); 1 << m];
        for mask in 1usize..1 << m {
            let low = mask.trailing_zeros() as usize;
            costs[mask] = &costs[mask & (mask - 1)] + inst.cost(low);
        }
        let agent_masks = (0..inst.n()).map(|i| inst.actions_of(i).iter().fold(0u64, |acc, j| acc | 1 << j)).collect();
        Ok(Self { m, values, costs, agent_masks })
    }

    pub fn profile(&self, mask: u64) -> ActionProfile {
        let ground: Vec<usize> = (0..self.m).collect();
        ActionProfile::from_mask(mask, &ground)
    }

    pub fn value(&self, mask: u64) -> &Rational {
        &self.values[mask as usize]
    }

    pub fn cost(&self, mask: u64) -> &Rational {
        &self.costs[mask as usize]
    }

    /// Agents with an action in `mask`.
    pub fn active(&self, mask: u64) -> Vec<usize> {
        (0..self.agent_masks.len()).filter(|i| self.agent_masks[*i] & mask != 0).collect()
    }

    /// Bitmask of every pure Nash equilibrium of `alpha`, ascending.
    pub fn equilibria(&self, alpha: &Contract) -> Vec<u64> {
        let full = 1u64 << self.m;
        let mut ok = vec![true; full as usize];
        for (i, &own) in self.agent_masks.iter().enumerate() {
            if own == 0 {
                continue;
            }
            let a = alpha.get(i);
            if a.is_zero() {
                // Unpaid agents only tolerate zero-cost action sets.
                for mask in 0..full {
                    if !self.costs[(mask & own) as usize].is_zero() {
                        ok[mask as usize] = false;
                    }
                }
                continue;
            }
            let mut utils: Vec<(u64, Rational)> = Vec::with_capacity(1 << own.count_ones());
            for rest in 0..full {
                if rest & own != 0 {
                    continue;
                }
                utils.clear();
                let mut sub = own;
                loop {
                    let u = a * &self.values[(rest | sub) as usize] - &self.costs[sub as usize];
                    utils.push((sub, u));
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & own;
                }
                let best = utils.iter().map(|x| &x.1).max().cloned().unwrap_or_default();
                for (sub, u) in &utils {
                    if *u < best {
                        ok[(rest | sub) as usize] = false;
                    }
                }
            }
        }
        (0..full).filter(|mask| ok[*mask as usize]).collect()
    }

    /// Among `masks`, the one with the largest (or smallest) reward, ties to
    /// fewer actions and then the lexicographically smallest set.
    pub fn extreme(&self, masks: &[u64], largest: bool) -> Option<u64> {
        masks.iter().copied().min_by(|a, b| {
            let by_value = self.values[*a as usize].cmp(&self.values[*b as usize]);
            let by_value = if largest { by_value.reverse() } else { by_value };
            by_value.then(a.count_ones().cmp(&b.count_ones())).then_with(|| {
                if a == b {
                    Ordering::Equal
                } else {
                    mask_lex_cmp(*a, *b)
                }
            })
        })
    }
}
