use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ValueOracle;
use crate::num::Rational;
use crate::profile::ActionProfile;

/// `f(j | small) < f(j | large)` with `small` inside `large`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmodularViolation {
    pub small: ActionProfile,
    pub large: ActionProfile,
    pub action: usize,
    pub small_gain: Rational,
    pub large_gain: Rational,
}

fn gain<F: ValueOracle + ?Sized>(f: &F, j: usize, s: &ActionProfile) -> Rational {
    let mut with = s.clone();
    with.insert(j);
    f.value(&with) - f.value(s)
}

fn check<F: ValueOracle + ?Sized>(
    f: &F,
    small: &ActionProfile,
    large: &ActionProfile,
    j: usize,
) -> Option<SubmodularViolation> {
    let small_gain = gain(f, j, small);
    let large_gain = gain(f, j, large);
    (small_gain < large_gain).then(|| SubmodularViolation {
        small: small.clone(),
        large: large.clone(),
        action: j,
        small_gain,
        large_gain,
    })
}

/// Random search for a diminishing-returns violation over `ground`.
pub fn probe_submodular<F: ValueOracle + ?Sized>(
    f: &F,
    ground: &[usize],
    samples: usize,
    seed: u64,
) -> Option<SubmodularViolation> {
    if ground.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let j = ground[rng.gen_range(0..ground.len())];
        let mut small = ActionProfile::new();
        let mut large = ActionProfile::new();
        for &e in ground {
            if e == j {
                continue;
            }
            match rng.gen_range(0..3u8) {
                0 => {
                    small.insert(e);
                    large.insert(e);
                }
                1 => {
                    large.insert(e);
                }
                _ => {}
            }
        }
        if let Some(v) = check(f, &small, &large, j) {
            return Some(v);
        }
    }
    None
}

/// Checks every `S` inside `T` and `j` outside `T` over a small ground set.
pub fn submodular_exhaustive<F: ValueOracle + ?Sized>(f: &F, ground: &[usize]) -> Option<SubmodularViolation> {
    let r = ground.len();
    assert!(r <= 16, "exhaustive submodularity check is limited to 16 actions");
    let sets: Vec<ActionProfile> = (0..1u64 << r).map(|m| ActionProfile::from_mask(m, ground)).collect();
    let values: Vec<Rational> = sets.iter().map(|s| f.value(s)).collect();
    for t in 0..1usize << r {
        for (k, &j) in ground.iter().enumerate() {
            if t & 1 << k != 0 {
                continue;
            }
            let large_gain = &values[t | 1 << k] - &values[t];
            let mut s = t;
            loop {
                let small_gain = &values[s | 1 << k] - &values[s];
                if small_gain < large_gain {
                    return Some(SubmodularViolation {
                        small: sets[s].clone(),
                        large: sets[t].clone(),
                        action: j,
                        small_gain,
                        large_gain,
                    });
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use crate::rewards::RewardSpec;
    use alloc::vec;

    #[test]
    fn coverage_passes_and_supermodular_table_fails() {
        let cov = RewardSpec::Coverage {
            universe: vec![rat(1, 1); 3],
            covers: vec![vec![0, 1], vec![1, 2], vec![2]],
            normalizer: rat(3, 1),
        };
        assert!(submodular_exhaustive(&cov, &[0, 1, 2]).is_none());
        assert!(probe_submodular(&cov, &[0, 1, 2], 200, 7).is_none());
        let sup = RewardSpec::Table { values: vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)] };
        let v = submodular_exhaustive(&sup, &[0, 1]).unwrap();
        assert!(v.small_gain < v.large_gain);
        assert!(probe_submodular(&sup, &[0, 1], 200, 7).is_some());
    }
}
