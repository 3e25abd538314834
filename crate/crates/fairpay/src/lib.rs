//! File formats, experiment drivers and the command-line front end for
//! `fairpay-core`.

pub mod cli;
pub mod config;
pub mod json;
pub mod poe;
pub mod verify;
