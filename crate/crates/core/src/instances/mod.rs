//! Instance families: worked examples, lower-bound gadgets, the planted hard
//! family, the coverage reduction and seeded random generators.

mod families;
pub mod hardness;
pub mod matroid;
pub mod random;

pub use families::{
    coverage_gap_witness, gap_ids, gen_coverage_gap, gen_harmonic, gen_intro_example, gen_subadditive_poe,
};
pub use hardness::{
    classify_contract_aligned, classify_query_informative, gen_xos_hardness, informative_probability_exact,
};
pub use matroid::{bad_case_violation, gen_matroid_reduction, matroid_bad_case, matroid_good_case, SetSystem};
pub use random::{
    gen_random_additive, gen_random_coverage, gen_random_partition_matroid, gen_random_xos_binary, CoverageParams,
};

use alloc::format;

use crate::equilibrium::{is_nash, Stability};
use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::profile::ActionProfile;

/// A contract together with an equilibrium of it, shipped with a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub contract: Contract,
    pub profile: ActionProfile,
}

/// Largest per-agent action pool enumerated when rechecking a witness.
const WITNESS_CAP: usize = 20;

/// Hands out `witness` only after confirming it is an equilibrium of `inst`.
pub(crate) fn checked(inst: &Instance, witness: Witness) -> Result<Witness> {
    match is_nash(inst, &witness.contract, &witness.profile, WITNESS_CAP)? {
        Stability::Stable => Ok(witness),
        Stability::Unstable(d) => {
            Err(Error::AssertionFailed(format!("generated witness is not an equilibrium (agent {} deviates)", d.agent)))
        }
    }
}
