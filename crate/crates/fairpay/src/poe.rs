//! Price-of-equality tables: one row per instance size, comparing the best
//! unconstrained value with the best equal-pay value.

use anyhow::{bail, Context};
use fairpay_core::algorithms::solve_additive_exact;
use fairpay_core::instances::{coverage_gap_witness, gen_coverage_gap, gen_harmonic, gen_subadditive_poe};
use fairpay_core::model::{Instance, Objective};
use fairpay_core::num::{to_f64, Rational};
use fairpay_core::oracle::{
    brute_optimal_contract, harmonic_equal_pay, price_of_equality, subadditive_equal_pay, Ratio,
};
use serde::Serialize;

use crate::json::{q, RatioJson, Q};

/// Where the unconstrained column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// The family's shipped contract; a lower bound on the optimum.
    Witness,
    /// Exhaustive search over budget-feasible contracts.
    Brute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoeRow {
    pub n: usize,
    pub unconstrained: Rational,
    pub equal_pay: Rational,
    pub ratio: Ratio,
    pub source: Source,
}

impl PoeRow {
    fn new(n: usize, unconstrained: Rational, equal_pay: Rational, source: Source) -> Self {
        let ratio = Ratio::of(&unconstrained, &equal_pay);
        Self { n, unconstrained, equal_pay, ratio, source }
    }
}

#[derive(Serialize)]
struct RowJson {
    n: usize,
    unconstrained: Q,
    equal_pay: Q,
    ratio: RatioJson,
    unconstrained_source: Source,
}

/// Harmonic family of size `n`. The unconstrained column is the shipped
/// contract paying every agent its own threshold; profit uses the
/// contiguous-block fast path and other objectives the exact additive solver.
pub fn harmonic_row(n: usize, objective: &Objective, cap: usize) -> anyhow::Result<PoeRow> {
    let (inst, w) = gen_harmonic(n)?;
    let unconstrained = objective.eval(&inst, &w.contract, &w.profile)?;
    let equal_pay = match objective {
        Objective::Profit => harmonic_equal_pay(n).profit,
        _ => solve_additive_exact(&inst, objective, cap)?.objective_value,
    };
    Ok(PoeRow::new(n, unconstrained, equal_pay, Source::Witness))
}

/// Symmetric subadditive family (`n` a square, at least 16).
pub fn subadditive_row(n: usize, objective: &Objective, cap: usize) -> anyhow::Result<PoeRow> {
    let (inst, w) = gen_subadditive_poe(n)?;
    let unconstrained = objective.eval(&inst, &w.contract, &w.profile)?;
    let equal_pay = subadditive_equal_pay(&inst, objective, cap)?.value;
    Ok(PoeRow::new(n, unconstrained, equal_pay, Source::Witness))
}

/// Two-agent coverage gadget. The shipped contract overspends the budget,
/// so the unconstrained column keeps whichever of it and the budget-feasible
/// optimum is larger.
pub fn coverage_gap_row(eps: &Rational, objective: &Objective, cap: usize) -> anyhow::Result<PoeRow> {
    let inst = gen_coverage_gap(eps)?;
    let w = coverage_gap_witness(eps)?;
    let shipped = objective.eval(&inst, &w.contract, &w.profile)?;
    let brute = brute_optimal_contract(&inst, objective, cap)?.value;
    let (unconstrained, source) = if shipped >= brute { (shipped, Source::Witness) } else { (brute, Source::Brute) };
    let equal_pay = fairpay_core::oracle::brute_optimal_equal_pay(&inst, objective, cap)?.value;
    Ok(PoeRow::new(inst.n(), unconstrained, equal_pay, source))
}

/// Any instance, both sides by exhaustive search.
pub fn file_row(inst: &Instance, objective: &Objective, cap: usize) -> anyhow::Result<PoeRow> {
    let r = price_of_equality(inst, objective, cap)?;
    Ok(PoeRow {
        n: inst.n(),
        unconstrained: r.unconstrained.value,
        equal_pay: r.equal_pay.value,
        ratio: r.ratio,
        source: Source::Brute,
    })
}

/// Parses `7`, `4,8,16` or the inclusive range `4..16`.
pub fn parse_sizes(text: &str) -> anyhow::Result<Vec<usize>> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().context("range start")?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().context("range end")?;
        if lo > hi {
            bail!("empty range {text}");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|x| x.trim().parse::<usize>().with_context(|| format!("bad size {x:?}"))).collect()
}

fn ratio_text(r: &Ratio) -> String {
    match r {
        Ratio::Finite(x) => q(x).to_string(),
        Ratio::Infinite => "inf".into(),
    }
}

fn ratio_decimal(r: &Ratio, precision: usize) -> String {
    match r {
        Ratio::Finite(x) => format!("{:.precision$}", to_f64(x)),
        Ratio::Infinite => "inf".into(),
    }
}

/// CSV with exact `p/q` columns; `precision` appends rounded decimal copies.
pub fn to_csv(rows: &[PoeRow], precision: Option<usize>) -> String {
    let mut out = String::from("n,unconstrained,equal_pay,ratio");
    if precision.is_some() {
        out.push_str(",unconstrained_approx,equal_pay_approx,ratio_approx");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}", r.n, q(&r.unconstrained), q(&r.equal_pay), ratio_text(&r.ratio)));
        if let Some(p) = precision {
            out.push_str(&format!(
                ",{:.p$},{:.p$},{}",
                to_f64(&r.unconstrained),
                to_f64(&r.equal_pay),
                ratio_decimal(&r.ratio, p)
            ));
        }
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[PoeRow]) -> String {
    let rows: Vec<RowJson> = rows
        .iter()
        .map(|r| RowJson {
            n: r.n,
            unconstrained: q(&r.unconstrained),
            equal_pay: q(&r.equal_pay),
            ratio: (&r.ratio).into(),
            unconstrained_source: r.source,
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

/// `ratio` never decreases along `rows`.
pub fn nondecreasing(rows: &[PoeRow]) -> bool {
    rows.windows(2).all(|w| match (&w[0].ratio, &w[1].ratio) {
        (_, Ratio::Infinite) => true,
        (Ratio::Infinite, Ratio::Finite(_)) => false,
        (Ratio::Finite(a), Ratio::Finite(b)) => a <= b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairpay_core::num::{harmonic, rat};
    use fairpay_core::oracle::brute_optimal_equal_pay;

    #[test]
    fn harmonic_fast_path_agrees_with_the_oracles() {
        for n in 1..=14 {
            let (inst, _) = gen_harmonic(n).unwrap();
            let fast = harmonic_equal_pay(n).profit;
            let exact = solve_additive_exact(&inst, &Objective::Profit, 20).unwrap().objective_value;
            assert_eq!(fast, exact, "n = {n}");
            if n <= 10 {
                assert_eq!(fast, brute_optimal_equal_pay(&inst, &Objective::Profit, 20).unwrap().value, "n = {n}");
            }
        }
    }

    #[test]
    fn harmonic_rows_grow() {
        let rows: Vec<PoeRow> = [4, 8, 16].iter().map(|n| harmonic_row(*n, &Objective::Profit, 20).unwrap()).collect();
        assert!(nondecreasing(&rows));
        assert_eq!(rows[0].unconstrained, harmonic(4) / rat(2, 1));
        assert_eq!(rows[0].ratio, Ratio::Finite(rat(625, 468)));
    }

    #[test]
    fn coverage_gap_reward_ratio() {
        let row = coverage_gap_row(&rat(1, 10), &Objective::Reward, 20).unwrap();
        assert_eq!(row.source, Source::Witness);
        assert_eq!(row.unconstrained, rat(13, 10));
        match row.ratio {
            Ratio::Finite(r) => assert!(r >= rat(13, 3)),
            Ratio::Infinite => {}
        }
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("4..6").unwrap(), [4, 5, 6]);
        assert_eq!(parse_sizes("4..=6").unwrap(), [4, 5, 6]);
        assert_eq!(parse_sizes("4, 8,16").unwrap(), [4, 8, 16]);
        assert!(parse_sizes("9..3").is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = [PoeRow::new(2, rat(1, 2), rat(0, 1), Source::Brute)];
        assert_eq!(to_csv(&rows, None), "n,unconstrained,equal_pay,ratio\n2,1/2,0/1,inf\n");
        let with = to_csv(&rows, Some(2));
        assert!(with.ends_with("2,1/2,0/1,inf,0.50,0.00,inf\n"), "{with}");
    }
}
