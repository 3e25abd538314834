//! Equal-pay linear contracts for principals hiring several agents.
//!
//! Every quantity is an exact rational. The crate is `no_std` and only needs
//! an allocator.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod equilibrium;
pub mod error;
pub mod instances;
pub mod model;
pub mod num;
pub mod oracle;
pub mod profile;
pub mod rewards;
pub mod table;

pub use error::{Error, Result};
pub use model::{eqcontract, Action, Contract, CustomObjective, EqualPayContract, Instance, Objective};
pub use num::{rat, Rational};
pub use profile::ActionProfile;
pub use rewards::{Price, PriceVector, RewardSpec};

/// Default limit on the number of actions searched exhaustively.
pub const DEFAULT_BRUTE_CAP: usize = 20;
/// Hard ceiling for any configured brute-force cap.
pub const MAX_BRUTE_CAP: usize = 24;
