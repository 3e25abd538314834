//! The `fairpay` command line.
//!
//! Exit codes: 0 success, 1 a failed check or broken guarantee, 2 the
//! brute-force cap was hit, 3 an algorithm's precondition does not hold,
//! 4 unreadable input, 64 bad usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fairpay_core::algorithms::{
    equal_pay_constant_approx, gamma_to_equal_pay, gs_best_transform, poe_transform_xos, single_agent_exact,
    single_agent_subadditive_baseline, solve_additive_exact, submodular_equal_pay_small_agents, xos_binary_equal_pay,
};
use fairpay_core::instances::hardness::{hardness_witness, sample_planted};
use fairpay_core::instances::{
    coverage_gap_witness, gen_coverage_gap, gen_harmonic, gen_intro_example, gen_matroid_reduction,
    gen_random_additive, gen_random_coverage, gen_random_partition_matroid, gen_random_xos_binary, gen_subadditive_poe,
    gen_xos_hardness, matroid_bad_case, matroid_good_case, CoverageParams, SetSystem, Witness,
};
use fairpay_core::model::{Instance, Objective};
use fairpay_core::num::{rat, to_f64};
use fairpay_core::oracle::{brute_optimal_contract, brute_optimal_equal_pay};
use fairpay_core::Error;

use crate::config::{Format, RunConfig};
use crate::json::{InstanceJson, SetSystemJson, SolveResultJson, Q};
use crate::poe::{self, PoeRow};
use crate::verify::{self, Suite};

pub mod exit {
    pub const OK: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const CAP: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    pub const INPUT: i32 = 4;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Parser)]
#[command(name = "fairpay", version, about = "Equal-pay contracts for teams: solvers, exact oracles and experiments")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm on an instance file.
    Solve(SolveArgs),
    /// Tabulate the best unconstrained value against the best equal-pay value.
    Poe(PoeArgs),
    /// Run a property suite and print its report; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Print a generated instance as JSON.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ObjectiveArg {
    Profit,
    Reward,
    Welfare,
}

impl ObjectiveArg {
    pub fn objective(self) -> Objective {
        match self {
            Self::Profit => Objective::Profit,
            Self::Reward => Objective::Reward,
            Self::Welfare => Objective::Welfare,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    AdditiveExact,
    EqualPayConst,
    Alg1,
    PoeXos,
    Gamma,
    XosBinary,
    GsBest,
    SingleAgent,
    SingleAgentBaseline,
    Brute,
    BruteEqualPay,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Profit)]
    pub objective: ObjectiveArg,
    /// Payment spread allowed for `gamma`; defaults to the input contract's own.
    #[arg(long)]
    pub gamma: Option<Q>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PoeFamily {
    Harmonic,
    Subadditive,
    CoverageGap,
    File,
}

#[derive(Debug, Args)]
pub struct PoeArgs {
    #[arg(long, value_enum)]
    pub family: PoeFamily,
    /// Sizes: `7`, `4,8,16` or the inclusive range `4..16`.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value = "1/10")]
    pub eps: Q,
    /// Instance for `--family file`.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Profit)]
    pub objective: ObjectiveArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Run the toolbox checks on this instance instead of random ones.
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum GenFamily {
    Intro,
    Harmonic,
    Subadditive,
    CoverageGap,
    RandomAdditive,
    RandomCoverage,
    RandomXosBinary,
    RandomPartitionMatroid,
    Matroid,
    SetSystem,
    Hardness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Good,
    Bad,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: GenFamily,
    /// Number of agents.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of actions (random_additive).
    #[arg(long)]
    pub m: Option<usize>,
    /// Cost perturbation (intro, coverage_gap).
    #[arg(long)]
    pub eps: Option<Q>,
    #[arg(long)]
    pub actions_per_agent: Option<usize>,
    /// Coverage universe size.
    #[arg(long)]
    pub universe: Option<usize>,
    /// Clauses of a binary XOS reward.
    #[arg(long)]
    pub clauses: Option<usize>,
    /// Parts of a partition matroid.
    #[arg(long)]
    pub parts: Option<usize>,
    /// Hardness size parameter.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Built-in set system for matroid and set_system.
    #[arg(long, value_enum)]
    pub case: Option<Case>,
    /// Set-system JSON file for matroid.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match run(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Maps an error to its exit code.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::CapExceeded { .. }) => exit::CAP,
        Some(
            Error::Precondition(_)
            | Error::NonSubmodularClass
            | Error::NonXosClass
            | Error::NonGsClass
            | Error::NonAdditiveReward
            | Error::NotBinaryActions
            | Error::NotGammaEqualPay(_)
            | Error::NonMonotoneObjective
            | Error::PaymentOverflow { .. },
        ) => exit::PRECONDITION,
        Some(
            Error::InvalidInstance(_) | Error::UnknownAction(_) | Error::UnknownAgent(_) | Error::InvalidContract(_),
        ) => exit::INPUT,
        Some(_) => exit::VIOLATION,
        None => exit::INPUT,
    }
}

/// Runs a parsed command, writing results to `out` and notes to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Solve(a) => {
            let (inst, witness) = load_instance(&a.instance)?;
            let result = solve(&inst, witness, a, cfg.brute_cap)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&result)?)?;
                    if let Some(p) = cfg.precision {
                        writeln!(err, "objective value ~ {:.p$}", to_f64(&result.objective_value.0))?;
                    }
                }
                Format::Csv => write!(out, "{}", solve_csv(&result, cfg.precision))?,
            }
            Ok(exit::OK)
        }
        Command::Poe(a) => {
            let rows = poe_rows(a, cfg.brute_cap)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => write!(out, "{}", poe::to_csv(&rows, cfg.precision))?,
                Format::Json => writeln!(out, "{}", poe::to_json(&rows))?,
            }
            Ok(exit::OK)
        }
        Command::Verify(a) => {
            let fixture = match &a.instance {
                Some(path) if a.suite != Suite::Toolbox => {
                    return Err(Error::Precondition(format!(
                        "--instance ({}) only applies to the toolbox suite",
                        path.display()
                    ))
                    .into())
                }
                Some(path) => Some(load_instance(path)?.0),
                None => None,
            };
            let report = verify::run(a.suite, cfg.seed, cfg.brute_cap, fixture.as_ref());
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            for c in &report.checks {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                writeln!(err, "{tag} {} ({} runs, {} skipped)", c.name, c.runs, c.skipped)?;
            }
            Ok(if report.passed { exit::OK } else { exit::VIOLATION })
        }
        Command::Gen(a) => {
            let text = generate(a, cfg.seed)?;
            match &a.out {
                Some(path) => {
                    std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?
                }
                None => writeln!(out, "{text}")?,
            }
            Ok(exit::OK)
        }
    }
}

fn load_instance(path: &Path) -> anyhow::Result<(Instance, Option<Witness>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: InstanceJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inst = parsed.to_instance()?;
    let witness = parsed.to_witness()?;
    Ok((inst, witness))
}

fn solve(inst: &Instance, witness: Option<Witness>, a: &SolveArgs, cap: usize) -> anyhow::Result<SolveResultJson> {
    let objective = a.objective.objective();
    let profit_only = |name: &str| -> anyhow::Result<()> {
        if a.objective != ObjectiveArg::Profit {
            bail!(Error::Precondition(format!("{name} optimizes profit only")));
        }
        Ok(())
    };
    // Transforms start from the file's shipped pair, else from the brute-force optimum.
    let input_pair = |objective: &Objective| -> anyhow::Result<Witness> {
        match &witness {
            Some(w) => Ok(w.clone()),
            None => {
                let o = brute_optimal_contract(inst, objective, cap)?;
                Ok(Witness { contract: o.contract, profile: o.profile })
            }
        }
    };
    let result = match a.algorithm {
        Algorithm::AdditiveExact => solve_additive_exact(inst, &objective, cap)?,
        Algorithm::EqualPayConst => {
            profit_only("equal_pay_const")?;
            equal_pay_constant_approx(inst, cap)?
        }
        Algorithm::Alg1 => {
            profit_only("alg1")?;
            submodular_equal_pay_small_agents(inst, cap)?
        }
        Algorithm::PoeXos => {
            profit_only("poe_xos")?;
            let w = input_pair(&Objective::Profit)?;
            poe_transform_xos(inst, &w.contract, &w.profile, cap)?
        }
        Algorithm::Gamma => {
            profit_only("gamma")?;
            let w = input_pair(&Objective::Profit)?;
            let gamma = a.gamma.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| w.contract.dispersion());
            gamma_to_equal_pay(inst, &gamma, &w.contract, &w.profile, cap)?
        }
        Algorithm::XosBinary => xos_binary_equal_pay(inst, &objective, cap)?,
        Algorithm::GsBest => {
            let w = input_pair(&objective)?;
            gs_best_transform(inst, &objective, &w.contract, &w.profile, cap)?
        }
        Algorithm::SingleAgent => {
            profit_only("single_agent")?;
            single_agent_exact(inst, cap)?
        }
        Algorithm::SingleAgentBaseline => {
            profit_only("single_agent_baseline")?;
            let w = input_pair(&Objective::Profit)?;
            single_agent_subadditive_baseline(inst, &w.contract, &w.profile, cap)?
        }
        Algorithm::Brute => return Ok(SolveResultJson::from_optimum(&brute_optimal_contract(inst, &objective, cap)?)),
        Algorithm::BruteEqualPay => {
            return Ok(SolveResultJson::from_optimum(&brute_optimal_equal_pay(inst, &objective, cap)?))
        }
    };
    Ok((&result).into())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn solve_csv(r: &SolveResultJson, precision: Option<usize>) -> String {
    let mut out = String::from("objective_value,branch,contract,equilibrium");
    if precision.is_some() {
        out.push_str(",objective_value_approx");
    }
    out.push('\n');
    out.push_str(&format!("{},{},{},{}", r.objective_value, r.branch, join(&r.contract), join(&r.equilibrium)));
    if let Some(p) = precision {
        out.push_str(&format!(",{:.p$}", to_f64(&r.objective_value.0)));
    }
    out.push('\n');
    out
}

fn poe_rows(a: &PoeArgs, cap: usize) -> anyhow::Result<Vec<PoeRow>> {
    let objective = a.objective.objective();
    let sizes = |default: &str| poe::parse_sizes(a.n.as_deref().unwrap_or(default));
    match a.family {
        PoeFamily::Harmonic => sizes("4,8,16")?.into_iter().map(|n| poe::harmonic_row(n, &objective, cap)).collect(),
        PoeFamily::Subadditive => {
            sizes("16,25")?.into_iter().map(|n| poe::subadditive_row(n, &objective, cap)).collect()
        }
        PoeFamily::CoverageGap => Ok(vec![poe::coverage_gap_row(&a.eps.0, &objective, cap)?]),
        PoeFamily::File => {
            let path = a
                .instance
                .as_ref()
                .ok_or_else(|| anyhow!(Error::Precondition("--family file needs --instance".into())))?;
            let (inst, _) = load_instance(path)?;
            Ok(vec![poe::file_row(&inst, &objective, cap)?])
        }
    }
}

fn instance_text(inst: &Instance, witness: Option<&Witness>) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(&InstanceJson::new(inst, witness))?)
}

fn set_system(a: &GenArgs) -> anyhow::Result<SetSystem> {
    if let Some(path) = &a.system {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed: SetSystemJson =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(parsed.into());
    }
    Ok(match a.case.unwrap_or(Case::Good) {
        Case::Good => matroid_good_case(),
        Case::Bad => matroid_bad_case(),
    })
}

fn generate(a: &GenArgs, seed: u64) -> anyhow::Result<String> {
    let eps = |default: (i64, i64)| a.eps.as_ref().map(|e| e.0.clone()).unwrap_or_else(|| rat(default.0, default.1));
    match a.family {
        GenFamily::Intro => instance_text(&gen_intro_example(&eps((1, 100)))?, None),
        GenFamily::Harmonic => {
            let (inst, w) = gen_harmonic(a.n.unwrap_or(4))?;
            instance_text(&inst, Some(&w))
        }
        GenFamily::Subadditive => {
            let (inst, w) = gen_subadditive_poe(a.n.unwrap_or(16))?;
            instance_text(&inst, Some(&w))
        }
        GenFamily::CoverageGap => {
            let eps = eps((1, 10));
            instance_text(&gen_coverage_gap(&eps)?, Some(&coverage_gap_witness(&eps)?))
        }
        GenFamily::RandomAdditive => {
            let n = a.n.unwrap_or(4);
            instance_text(&gen_random_additive(n, a.m.unwrap_or(2 * n), seed)?, None)
        }
        GenFamily::RandomCoverage => {
            let params = CoverageParams {
                agents: a.n.unwrap_or(4),
                actions_per_agent: a.actions_per_agent.unwrap_or(2),
                universe: a.universe.unwrap_or(8),
                density: (1, 3),
                max_cost_64ths: 6,
            };
            instance_text(&gen_random_coverage(&params, seed)?, None)
        }
        GenFamily::RandomXosBinary => {
            instance_text(&gen_random_xos_binary(a.n.unwrap_or(6), a.clauses.unwrap_or(3), seed)?, None)
        }
        GenFamily::RandomPartitionMatroid => instance_text(
            &gen_random_partition_matroid(
                a.n.unwrap_or(4),
                a.actions_per_agent.unwrap_or(2),
                a.parts.unwrap_or(3),
                seed,
            )?,
            None,
        ),
        GenFamily::Matroid => instance_text(&gen_matroid_reduction(&set_system(a)?)?, None),
        GenFamily::SetSystem => Ok(serde_json::to_string_pretty(&SetSystemJson::from(&set_system(a)?))?),
        GenFamily::Hardness => {
            let ell = a.ell.unwrap_or(2);
            let planted = sample_planted(ell, seed);
            let inst = gen_xos_hardness(ell, &planted, true)?;
            let w = hardness_witness(&inst, ell, &planted)?;
            instance_text(&inst, Some(&w))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (anyhow::Result<i32>, String) {
        let cli = Cli::try_parse_from(std::iter::once("fairpay").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let result = run(&cli, &mut out, &mut Vec::new());
        (result, String::from_utf8(out).unwrap())
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::CapExceeded { needed: 30, cap: 20 }.into()), exit::CAP);
        assert_eq!(exit_code(&Error::NonXosClass.into()), exit::PRECONDITION);
        assert_eq!(exit_code(&Error::AssertionFailed("x".into()).into()), exit::VIOLATION);
        assert_eq!(exit_code(&anyhow!("file not found")), exit::INPUT);
        let wrapped = anyhow::Error::from(Error::NotBinaryActions).context("while solving");
        assert_eq!(exit_code(&wrapped), exit::PRECONDITION);
    }

    #[test]
    fn generated_instances_are_reproducible() {
        let args = ["--seed", "7", "gen", "random_coverage", "--n", "3"];
        let (code, first) = run_args(&args);
        assert_eq!(code.unwrap(), exit::OK);
        assert_eq!(first, run_args(&args).1);
        let back: InstanceJson = serde_json::from_str(&first).unwrap();
        assert_eq!(back.to_instance().unwrap().n(), 3);
    }

    #[test]
    fn harmonic_poe_csv() {
        let (code, text) = run_args(&["poe", "--family", "harmonic", "--n", "4"]);
        assert_eq!(code.unwrap(), exit::OK);
        assert_eq!(text.lines().nth(1).unwrap().split(',').nth(3), Some("625/468"));
    }

    #[test]
    fn usage_errors_are_not_cap_errors() {
        assert_eq!(main_with_args(["fairpay", "solve", "--algorithm", "nonsense"]), exit::USAGE);
        assert_eq!(main_with_args(["fairpay", "--brute-cap", "99", "verify", "matroid"]), exit::USAGE);
    }
}
