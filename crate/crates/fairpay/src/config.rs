//! Settings shared by every subcommand.

use clap::{Args, ValueEnum};

/// Exhaustive searches never go beyond this many items, whatever the flag says.
pub const MAX_BRUTE_CAP: usize = 24;
pub const DEFAULT_BRUTE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct RunConfig {
    /// Largest number of actions (or per-agent actions) searched exhaustively.
    #[arg(long, global = true, env = "FAIRPAY_BRUTE_CAP", default_value_t = DEFAULT_BRUTE_CAP, value_parser = parse_cap)]
    pub brute_cap: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also print rounded decimals with this many digits. Exact values are never rounded.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { brute_cap: DEFAULT_BRUTE_CAP, seed: 1, format: None, precision: None }
    }
}

fn parse_cap(text: &str) -> Result<usize, String> {
    let cap: usize = text.parse().map_err(|_| format!("not a number: {text}"))?;
    if cap > MAX_BRUTE_CAP {
        return Err(format!("brute-force cap {cap} is above the limit {MAX_BRUTE_CAP}"));
    }
    Ok(cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_is_bounded() {
        assert_eq!(parse_cap("24"), Ok(24));
        assert!(parse_cap("25").is_err());
        assert!(parse_cap("many").is_err());
    }
}
