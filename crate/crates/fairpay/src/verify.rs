//! Property suites run by `fairpay verify`. Each suite draws its cases from
//! a seed, checks them against exhaustive enumeration and tallies the
//! outcome per property, keeping the first counterexample it meets.

use std::collections::BTreeMap;

use fairpay_core::algorithms::{
    bucket_count_bound, no_large_agent, poe_transform_xos, single_agent_subadditive_baseline,
    submodular_equal_pay_small_agents, xos_binary_equal_pay, Branch, Trace,
};
use fairpay_core::equilibrium::{
    br_dynamics, double_contract, is_dropout_stable, is_nash, is_subset_stable, scale_for_existence,
};
use fairpay_core::error::Error;
use fairpay_core::instances::hardness::{cheap_agents, hardness_witness, sample_planted, HardnessShape};
use fairpay_core::instances::{
    bad_case_violation, classify_contract_aligned, classify_query_informative, coverage_gap_witness, gen_coverage_gap,
    gen_harmonic, gen_intro_example, gen_matroid_reduction, gen_random_additive, gen_random_coverage,
    gen_random_partition_matroid, gen_random_xos_binary, gen_subadditive_poe, gen_xos_hardness,
    informative_probability_exact, matroid_bad_case, matroid_good_case, CoverageParams, SetSystem, Witness,
};
use fairpay_core::model::{eqcontract, Action, Contract, Instance, Objective};
use fairpay_core::num::{exp_neg_bounds, from_usize, ln, one_minus_inv_e_upper, rat, to_f64, Rational};
use fairpay_core::oracle::{
    brute_optimal_contract, brute_optimal_equal_pay, min_incentive_interval, subadditive_equal_pay, IncentiveMode,
};
use fairpay_core::profile::ActionProfile;
use fairpay_core::rewards::{demand, isqrt, Price, PriceVector};
use fairpay_core::table::ValueTable;
use num_traits::Zero;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::json::{q, InstanceJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Stability notions, restriction, doubling and scaling on small random instances.
    Toolbox,
    /// The small-agent equal-pay algorithm on random coverage instances.
    Alg1,
    /// The bucketing transform on the harmonic family and random instances.
    Buckets,
    /// The planted XOS family and its query statistics.
    #[value(name = "hardness_xos")]
    HardnessXos,
    /// The coverage reduction's good and bad set systems.
    Matroid,
    /// The coverage and subadditive gadgets, the single-agent baseline and the binary XOS algorithm.
    Appendices,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Toolbox, Suite::Alg1, Suite::Buckets, Suite::HardnessXos, Suite::Matroid, Suite::Appendices];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Toolbox => "toolbox",
            Suite::Alg1 => "alg1",
            Suite::Buckets => "buckets",
            Suite::HardnessXos => "hardness_xos",
            Suite::Matroid => "matroid",
            Suite::Appendices => "appendices",
        }
    }
}

/// Tally of one property.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub runs: usize,
    pub failures: usize,
    /// Cases where the property's hypothesis did not hold.
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Reference values computed along the way, keyed by name.
    pub facts: BTreeMap<String, Value>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64) -> Self {
        Self { suite: suite.name().into(), seed, passed: true, checks: Vec::new(), facts: BTreeMap::new() }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn fact(&self, key: &str) -> Option<&Value> {
        self.facts.get(key)
    }

    fn entry(&mut self, name: &str) -> &mut Check {
        let pos = match self.checks.iter().position(|c| c.name == name) {
            Some(p) => p,
            None => {
                self.checks.push(Check { name: name.into(), runs: 0, failures: 0, skipped: 0, counterexample: None });
                self.checks.len() - 1
            }
        };
        &mut self.checks[pos]
    }

    fn record(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> Value) {
        let c = self.entry(name);
        c.runs += 1;
        if !ok {
            c.failures += 1;
            if c.counterexample.is_none() {
                c.counterexample = Some(witness());
            }
        }
    }

    fn fail(&mut self, name: &str, witness: Value) {
        self.record(name, false, || witness);
    }

    fn skip(&mut self, name: &str) {
        self.entry(name).skipped += 1;
    }

    fn set_fact(&mut self, key: &str, value: Value) {
        self.facts.insert(key.into(), value);
    }

    fn done(mut self) -> Self {
        self.passed = self.checks.iter().all(Check::passed);
        self
    }
}

/// Runs `suite`. The toolbox suite checks `fixture` instead of random
/// instances when one is given.
pub fn run(suite: Suite, seed: u64, cap: usize, fixture: Option<&Instance>) -> SuiteReport {
    match suite {
        Suite::Toolbox => toolbox(seed, cap, fixture),
        Suite::Alg1 => alg1(seed, cap),
        Suite::Buckets => buckets(seed, cap),
        Suite::HardnessXos => hardness(seed, cap),
        Suite::Matroid => matroid(cap),
        Suite::Appendices => appendices(seed, cap),
    }
}

fn pair_json(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Value {
    let w = Witness { contract: alpha.clone(), profile: s.clone() };
    serde_json::to_value(InstanceJson::new(inst, Some(&w))).expect("instance serializes")
}

fn error_json(inst: &Instance, alpha: &Contract, s: &ActionProfile, e: &Error) -> Value {
    json!({ "error": e.to_string(), "input": pair_json(inst, alpha, s) })
}

fn decimal(r: &Rational) -> Value {
    json!(to_f64(r))
}

/// `(1 - sum alpha) f(S)`, floored at zero.
fn input_profit(inst: &Instance, alpha: &Contract, s: &ActionProfile) -> Rational {
    let p = inst.principal_utility(alpha, s);
    if p < Rational::zero() {
        Rational::zero()
    } else {
        p
    }
}

fn mask_of(s: &ActionProfile) -> u64 {
    s.to_mask().expect("exhaustive suites use at most 64 actions")
}

/// Every submask of `set`, `set` itself first and the empty mask last.
fn submasks(set: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(set);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & set) };
        Some(cur)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Deviations {
    /// Any set of the agent's own actions.
    Any,
    /// Subsets of the current set.
    Subsets,
    /// Only dropping everything.
    Dropout,
}

/// Stability read straight off the tables, written independently of the
/// library checkers so the two can be compared.
fn table_stable(table: &ValueTable, alpha: &Contract, mask: u64, kind: Deviations) -> bool {
    let value = table.value(mask);
    table.agent_masks.iter().enumerate().all(|(i, &own)| {
        let a = alpha.get(i);
        let mine = mask & own;
        let rest = mask & !own;
        let current = a * value - table.cost(mine);
        let pool = match kind {
            Deviations::Any => own,
            Deviations::Subsets => mine,
            Deviations::Dropout => 0,
        };
        submasks(pool).all(|sub| a * table.value(rest | sub) - table.cost(sub) <= current)
    })
}

fn random_payments(rng: &mut ChaCha8Rng, n: usize) -> Contract {
    let pay =
        (0..n).map(|_| if rng.gen_ratio(1, 4) { Rational::zero() } else { rat(rng.gen_range(1..=8), 16) }).collect();
    Contract::new(pay).expect("payments lie in [0, 1/2]")
}

fn agent_subsets(agents: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..1u64 << agents.len())
        .map(move |bits| agents.iter().enumerate().filter(|(k, _)| bits >> k & 1 == 1).map(|(_, i)| *i).collect())
}

const TOOLBOX_TRIPLES: usize = 200;
/// Largest instance the toolbox suite enumerates.
pub const TOOLBOX_MAX_ACTIONS: usize = 14;

fn toolbox_instance(t: usize, seed: u64) -> Instance {
    match t % 4 {
        0 => gen_random_additive(5, 10, seed),
        1 => {
            let p = CoverageParams { agents: 5, actions_per_agent: 2, universe: 8, density: (1, 3), max_cost_64ths: 6 };
            gen_random_coverage(&p, seed)
        }
        2 => gen_random_partition_matroid(4, 3, 3, seed),
        _ => gen_random_xos_binary(6, 3, seed),
    }
    .expect("toolbox generator arguments are valid")
}

fn toolbox(seed: u64, cap: usize, fixture: Option<&Instance>) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Toolbox, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = cap.min(TOOLBOX_MAX_ACTIONS);
    if let Some(inst) = fixture {
        if inst.m() > limit {
            rep.fail("instance_fits", json!({ "actions": inst.m(), "limit": limit }));
            return rep.done();
        }
    }
    let gammas = [rat(3, 2), rat(2, 1), rat(3, 1)];
    for t in 0..TOOLBOX_TRIPLES {
        let inst = match fixture {
            Some(f) => f.clone(),
            None => toolbox_instance(t, rng.gen()),
        };
        let m = inst.m();
        if fixture.is_none() || t == 0 {
            let violation = inst.reward().monotone_violation(m);
            rep.record("reward_is_monotone", violation.is_none(), || {
                let (set, added) = violation.clone().expect("violation");
                json!({
                    "instance": InstanceJson::new(&inst, None),
                    "set": set.to_vec(),
                    "added_action": (added != usize::MAX).then_some(added),
                })
            });
        }
        let table = ValueTable::new(&inst, cap).expect("instance fits the cap");
        let alpha = random_payments(&mut rng, inst.n());
        let equilibria = table.equilibria(&alpha);
        let full = (1u64 << m) - 1;
        let mask = match t % 3 {
            0 => rng.gen::<u64>() & full,
            1 if !equilibria.is_empty() => equilibria[rng.gen_range(0..equilibria.len())],
            _ => (0..64)
                .map(|_| rng.gen::<u64>() & full)
                .find(|mk| table_stable(&table, &alpha, *mk, Deviations::Subsets))
                .unwrap_or(0),
        };
        let s = table.profile(mask);

        let lib = (
            is_nash(&inst, &alpha, &s, cap).map(|x| x.is_stable()),
            is_subset_stable(&inst, &alpha, &s, cap).map(|x| x.is_stable()),
            is_dropout_stable(&inst, &alpha, &s).map(|x| x.is_stable()),
        );
        let (nash, subset, dropout) = match lib {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (a, b, c) => {
                let e = a.err().or(b.err()).or(c.err()).expect("one checker failed");
                rep.fail("stability_matches_enumeration", error_json(&inst, &alpha, &s, &e));
                continue;
            }
        };
        let by_table = (
            table_stable(&table, &alpha, mask, Deviations::Any),
            table_stable(&table, &alpha, mask, Deviations::Subsets),
            table_stable(&table, &alpha, mask, Deviations::Dropout),
        );
        rep.record("stability_matches_enumeration", (nash, subset, dropout) == by_table, || {
            json!({
                "library": [nash, subset, dropout],
                "enumeration": [by_table.0, by_table.1, by_table.2],
                "input": pair_json(&inst, &alpha, &s),
            })
        });
        rep.record("equilibria_list_matches_checker", equilibria.binary_search(&mask).is_ok() == nash, || {
            pair_json(&inst, &alpha, &s)
        });
        rep.record("nash_implies_subset_implies_dropout", (!nash || subset) && (!subset || dropout), || {
            pair_json(&inst, &alpha, &s)
        });

        let submodular = inst.reward().is_submodular_class();
        let active = inst.active_agents(&s);

        if submodular && subset {
            let mut bad = None;
            for g in agent_subsets(&(0..inst.n()).collect::<Vec<_>>()) {
                let restricted = alpha.restricted(&g);
                let part = mask_of(&inst.restrict(&s, &g));
                if !table_stable(&table, &restricted, part, Deviations::Subsets) {
                    bad = Some(g);
                    break;
                }
            }
            rep.record(
                "restriction_keeps_subset_stability",
                bad.is_none(),
                || json!({ "agents": bad, "input": pair_json(&inst, &alpha, &s) }),
            );
        } else {
            rep.skip("restriction_keeps_subset_stability");
        }

        let unpaid_idle = active.iter().all(|i| !alpha.get(*i).is_zero());
        if submodular && subset && unpaid_idle {
            match double_contract(&inst, &alpha, &s, cap) {
                Ok(doubled) => {
                    let two = rat(2, 1);
                    let expected: Vec<Rational> = alpha.as_slice().iter().map(|a| &two * a).collect();
                    let half = table.value(mask) / &two;
                    let worst = table.equilibria(&doubled).into_iter().find(|e| *table.value(*e) < half);
                    let ok = doubled.as_slice() == expected.as_slice() && worst.is_none();
                    rep.record("doubling_keeps_half_the_reward", ok, || {
                        json!({
                            "doubled": doubled.as_slice().iter().map(q).collect::<Vec<_>>(),
                            "low_equilibrium": worst.map(|e| table.profile(e).to_vec()),
                            "input": pair_json(&inst, &alpha, &s),
                        })
                    });
                }
                Err(Error::PaymentOverflow { .. }) => rep.skip("doubling_keeps_half_the_reward"),
                Err(e) => rep.fail("doubling_keeps_half_the_reward", error_json(&inst, &alpha, &s, &e)),
            }
        } else {
            rep.skip("doubling_keeps_half_the_reward");
        }

        let dropout_stable = table_stable(&table, &alpha, mask, Deviations::Dropout);
        if inst.reward().is_xos_class() && dropout_stable && active.len() <= 6 {
            let gamma = &gammas[t % gammas.len()];
            for sub in agent_subsets(&active) {
                match scale_for_existence(&inst, &alpha, &s, &sub, gamma, cap) {
                    Ok((scaled, out)) => {
                        let expected = Contract::new(
                            (0..inst.n())
                                .map(|i| if sub.contains(&i) { gamma * alpha.get(i) } else { Rational::zero() })
                                .collect(),
                        )
                        .expect("scaled payments were accepted by the library");
                        let out_mask = mask_of(&out);
                        let floor = (Rational::from_integer(1.into()) - gamma.recip())
                            * table.value(mask_of(&inst.restrict(&s, &sub)));
                        let ok = scaled == expected
                            && table_stable(&table, &scaled, out_mask, Deviations::Any)
                            && *table.value(out_mask) >= floor;
                        rep.record("scaling_keeps_its_share", ok, || {
                            json!({
                                "gamma": q(gamma),
                                "subgroup": sub,
                                "returned": out.to_vec(),
                                "input": pair_json(&inst, &alpha, &s),
                            })
                        });
                    }
                    Err(Error::PaymentOverflow { .. }) => rep.skip("scaling_keeps_its_share"),
                    Err(e) => rep.fail("scaling_keeps_its_share", error_json(&inst, &alpha, &s, &e)),
                }
            }
        } else {
            rep.skip("scaling_keeps_its_share");
        }
    }
    rep.done()
}

const ALG1_INSTANCES: usize = 20;

/// Coverage instance with `n` agents and `m` actions dealt round-robin.
fn alg1_instance(n: usize, m: usize, seed: u64) -> Instance {
    let p = CoverageParams { agents: m, actions_per_agent: 1, universe: 12, density: (1, 4), max_cost_64ths: 3 };
    let spread = gen_random_coverage(&p, seed).expect("coverage arguments are valid");
    let actions =
        spread.actions().iter().enumerate().map(|(j, a)| Action { agent: j % n, cost: a.cost.clone() }).collect();
    Instance::new(n, actions, spread.reward().clone()).expect("same reward over the same actions")
}

/// `((1 - 1/e) / 32) (1/2 - 1/e)` rounded up, so a pass is a pass for the exact constant.
fn alg1_share_upper() -> Rational {
    let u = one_minus_inv_e_upper();
    &u / from_usize(32) * (&u - rat(1, 2))
}

fn alg1(seed: u64, cap: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Alg1, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let share = alg1_share_upper();
    rep.set_fact("reward_share_constant", decimal(&share));
    for t in 0..ALG1_INSTANCES {
        let n = 8 + t % 3;
        let m = rng.gen_range(n..=14);
        let inst = alg1_instance(n, m, rng.gen());
        let empty = (Contract::zero(n), ActionProfile::new());
        let r = match submodular_equal_pay_small_agents(&inst, cap) {
            Ok(r) => r,
            Err(e) => {
                rep.fail("algorithm_runs", error_json(&inst, &empty.0, &empty.1, &e));
                continue;
            }
        };
        rep.record("algorithm_runs", true, || Value::Null);
        let Trace::SmallAgents(trace) = &r.trace else {
            rep.fail("algorithm_runs", json!({ "error": "missing trace", "instance": InstanceJson::new(&inst, None) }));
            continue;
        };
        let heavy = trace.rounds.iter().find(|x| x.contract.total() > rat(1, 2));
        rep.record(
            "round_payments_at_most_half",
            heavy.is_none(),
            || json!({ "k": heavy.map(|x| x.k), "instance": InstanceJson::new(&inst, None) }),
        );
        let Some(round) = trace.rounds.iter().find(|x| Some(x.k) == trace.k_star) else {
            rep.fail("worst_equilibrium_keeps_a_quarter", json!({ "error": "no chosen round" }));
            continue;
        };
        let table = ValueTable::new(&inst, cap).expect("instance fits the cap");
        let quarter = inst.value(&round.chosen) / from_usize(4);
        let paid = round.contract.total();
        let low = table
            .equilibria(&round.contract)
            .into_iter()
            .find(|e| (Rational::from_integer(1.into()) - &paid) * table.value(*e) < quarter);
        rep.record("worst_equilibrium_keeps_a_quarter", low.is_none(), || {
            json!({
                "k": round.k,
                "low_equilibrium": low.map(|e| table.profile(e).to_vec()),
                "input": pair_json(&inst, &round.contract, &round.chosen),
            })
        });
        match brute_optimal_equal_pay(&inst, &Objective::Profit, cap) {
            Ok(best) => {
                let target = inst.value(&best.profile);
                if !target.is_zero() && no_large_agent(&inst, &best.profile) {
                    let got = inst.value(&round.chosen);
                    rep.record("reward_share_without_large_agents", got >= &share * &target, || {
                        json!({ "chosen_reward": q(&got), "optimum": pair_json(&inst, &best.contract, &best.profile) })
                    });
                } else {
                    rep.skip("reward_share_without_large_agents");
                }
            }
            Err(e) => rep.fail("reward_share_without_large_agents", error_json(&inst, &empty.0, &empty.1, &e)),
        }
    }
    rep.done()
}

const BUCKET_RANDOM_PAIRS: usize = 20;
/// Relative slack for comparisons against an irrational factor.
pub const FLOAT_SLACK: f64 = 1e-9;

fn loglog_share(n: usize) -> Option<f64> {
    (n >= 3).then(|| {
        let l = ln(n as f64);
        ln(l) / l
    })
}

fn buckets(seed: u64, cap: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Buckets, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(String, Instance, Contract, ActionProfile)> = Vec::new();
    for n in [4, 8, 16, 32, 64] {
        let (inst, w) = gen_harmonic(n).expect("harmonic family");
        pairs.push((format!("harmonic(n={n})"), inst, w.contract, w.profile));
    }
    for t in 0..BUCKET_RANDOM_PAIRS {
        let s: u64 = rng.gen();
        let (label, inst) = if t % 2 == 0 {
            let n = 3 + (t / 2) % 4;
            (format!("additive(n={n},seed={s})"), gen_random_additive(n, 2 * n, s).expect("additive"))
        } else {
            let p = CoverageParams { agents: 4, actions_per_agent: 2, universe: 8, density: (1, 3), max_cost_64ths: 6 };
            (format!("coverage(seed={s})"), gen_random_coverage(&p, s).expect("coverage"))
        };
        match brute_optimal_contract(&inst, &Objective::Profit, cap) {
            Ok(best) => pairs.push((label, inst, best.contract, best.profile)),
            Err(e) => rep.fail("transform_runs", json!({ "case": label, "error": e.to_string() })),
        }
    }
    let mut branches: BTreeMap<String, usize> = BTreeMap::new();
    for (label, inst, alpha, s) in &pairs {
        if alpha.total() >= Rational::from_integer(1.into()) {
            rep.skip("transform_runs");
            continue;
        }
        let n = inst.n();
        let input = input_profit(inst, alpha, s);
        let r = match poe_transform_xos(inst, alpha, s, cap) {
            Ok(r) => r,
            Err(e) => {
                rep.fail(
                    "transform_runs",
                    json!({ "case": label, "error": e.to_string(), "input": pair_json(inst, alpha, s) }),
                );
                continue;
            }
        };
        rep.record("transform_runs", true, || Value::Null);
        *branches.entry(r.branch.tag()).or_default() += 1;
        let nash = is_nash(inst, &r.contract, &r.equilibrium, cap).map(|x| x.is_stable()).unwrap_or(false);
        rep.record(
            "output_is_equal_pay_equilibrium",
            nash && r.contract.is_equal_pay(),
            || json!({ "case": label, "output": pair_json(inst, &r.contract, &r.equilibrium) }),
        );
        if matches!(r.branch, Branch::BucketX | Branch::BucketB(_) | Branch::BucketBPrime(_)) {
            let total = r.contract.total();
            rep.record("bucket_payment_below_three_quarters", total < rat(3, 4), || {
                json!({ "case": label, "branch": r.branch.tag(), "total": q(&total), "input": pair_json(inst, alpha, s) })
            });
            rep.record("bucket_payment_at_most_three_quarters", total <= rat(3, 4), || {
                json!({ "case": label, "branch": r.branch.tag(), "total": q(&total), "input": pair_json(inst, alpha, s) })
            });
        } else {
            rep.skip("bucket_payment_below_three_quarters");
            rep.skip("bucket_payment_at_most_three_quarters");
        }
        match (&r.trace, bucket_count_bound(n)) {
            (Trace::Buckets(plan), Some(bound)) => {
                let count = plan.bucket_count();
                rep.record(
                    "bucket_count_within_bound",
                    count as f64 <= bound,
                    || json!({ "case": label, "buckets": count, "bound": bound }),
                );
            }
            _ => rep.skip("bucket_count_within_bound"),
        }
        match loglog_share(n) {
            Some(share) => {
                let need = share / 1980.0 * to_f64(&input);
                let got = to_f64(&r.objective_value);
                rep.record("keeps_loglog_share", got >= need * (1.0 - FLOAT_SLACK), || {
                    json!({ "case": label, "output": q(&r.objective_value), "input_profit": q(&input), "needed": need })
                });
            }
            None => rep.skip("keeps_loglog_share"),
        }
    }
    rep.set_fact("branches", json!(branches));
    rep.done()
}

const HARDNESS_ELL: usize = 2;
const UNALIGNED_CONTRACTS: usize = 100;
const OVERLAP_SAMPLES: usize = 200;
const UNINFORMATIVE_QUERIES: usize = 200;
/// Demand windows stay this small so the exhaustive demand query is quick.
const QUERY_WINDOW: usize = 12;
const TAIL_ELL: usize = 5;
const TAIL_QUERIES: usize = 20;

/// Random contract with total at most 1 that is not aligned with `planted`.
fn unaligned_contract(rng: &mut ChaCha8Rng, n: usize, planted: &[usize], ell: usize) -> Contract {
    let level = rat(1, (2 * ell * ell) as i64);
    loop {
        let mut pay = vec![Rational::zero(); n];
        let others: Vec<usize> = (0..n).filter(|i| planted.binary_search(i).is_err()).collect();
        let spread = |pay: &mut Vec<Rational>, rng: &mut ChaCha8Rng, budget: Rational| {
            let k = rng.gen_range(1..=24);
            let each = budget / from_usize(k);
            for idx in sample(rng, others.len(), k) {
                pay[others[idx]] = each.clone();
            }
        };
        match rng.gen_range(0..3) {
            0 => {
                let k = rng.gen_range(1..=32);
                let each = rat(rng.gen_range(1..=4), 4 * k as i64);
                for i in sample(rng, n, k) {
                    pay[i] = each.clone();
                }
            }
            1 => {
                let top = rng.gen_range(0..=ell);
                let mut used = Rational::zero();
                for idx in sample(rng, planted.len(), top) {
                    let p = rat(rng.gen_range(1..=4), (4 * ell) as i64);
                    used += &p;
                    pay[planted[idx]] = p;
                }
                spread(&mut pay, rng, Rational::from_integer(1.into()) - used);
            }
            _ => {
                let below = &level - rat(1, 64);
                for g in planted {
                    pay[*g] = below.clone();
                }
                let used = &below * from_usize(planted.len());
                spread(&mut pay, rng, Rational::from_integer(1.into()) - used);
            }
        }
        let c = Contract::new(pay).expect("payments lie in [0, 1]");
        if c.total() <= Rational::from_integer(1.into()) && !classify_contract_aligned(&c, planted, ell) {
            return c;
        }
    }
}

/// A random profile over `agents`, each taking a nonempty random subset of its actions.
fn random_profile(rng: &mut ChaCha8Rng, inst: &Instance, agents: &[usize]) -> ActionProfile {
    let mut s = ActionProfile::new();
    for &i in agents {
        let pool = inst.actions_of(i);
        let bits = rng.gen_range(1..1u64 << pool.len());
        s.extend(ActionProfile::from_mask(bits, pool).iter());
    }
    s
}

fn hardness(seed: u64, cap: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::HardnessXos, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ell = HARDNESS_ELL;
    let shape = HardnessShape::new(ell);
    let planted = sample_planted(ell, rng.gen());
    let with = gen_xos_hardness(ell, &planted, true).expect("ell = 2 is materialized");
    let without = gen_xos_hardness(ell, &planted, false).expect("ell = 2 is materialized");
    rep.set_fact("planted", json!(planted));

    let level = rat(1, (2 * ell * ell) as i64);
    match hardness_witness(&with, ell, &planted) {
        Ok(w) => {
            let expected = eqcontract(with.n(), &level, &planted).expect("valid level");
            let nash = is_nash(&with, &w.contract, &w.profile, cap).map(|x| x.is_stable()).unwrap_or(false);
            let utility = input_profit(&with, &w.contract, &w.profile);
            let target = from_usize(ell.pow(4)) / from_usize(2);
            rep.record(
                "planted_contract_utility",
                nash && w.contract == expected && utility == target,
                || json!({ "nash": nash, "utility": q(&utility), "expected": q(&target) }),
            );
            rep.set_fact("planted_contract_utility", json!(q(&utility)));
            rep.set_fact("planted_contract_reward", json!(q(&with.value(&w.profile))));
        }
        Err(e) => rep.fail("planted_contract_utility", json!({ "error": e.to_string() })),
    }

    let ceiling = from_usize(2 * ell.pow(3));
    let mut largest = Rational::zero();
    for _ in 0..UNALIGNED_CONTRACTS {
        let alpha = unaligned_contract(&mut rng, with.n(), &planted, ell);
        let s = match br_dynamics(&with, &alpha, &ActionProfile::new(), cap) {
            Ok(s) => s,
            Err(e) => {
                rep.fail(
                    "unaligned_equilibria_stay_small",
                    json!({ "error": e.to_string(), "contract": alpha.as_slice().iter().map(q).collect::<Vec<_>>() }),
                );
                continue;
            }
        };
        let nash = is_nash(&with, &alpha, &s, cap).map(|x| x.is_stable()).unwrap_or(false);
        let value = with.value(&s);
        if value > largest {
            largest = value.clone();
        }
        rep.record("unaligned_equilibria_stay_small", nash && value <= ceiling, || {
            json!({
                "nash": nash,
                "reward": q(&value),
                "contract": alpha.as_slice().iter().map(q).collect::<Vec<_>>(),
                "profile": s.to_vec(),
            })
        });
    }
    rep.set_fact("largest_unaligned_reward", json!(q(&largest)));

    for _ in 0..OVERLAP_SAMPLES {
        let k = rng.gen_range(1..=24);
        let mut agents: Vec<usize> = sample(&mut rng, with.n(), k).into_vec();
        if rng.gen_bool(0.5) {
            agents.extend(planted.iter().copied());
        }
        agents.sort_unstable();
        agents.dedup();
        let s = random_profile(&mut rng, &with, &agents);
        let overlap = s.iter().filter(|j| planted.binary_search(&with.owner(*j)).is_ok()).count();
        let allowed = ell * with.active_agents(&s).len().max(shape.actions_per_agent);
        if overlap <= allowed {
            let (a, b) = (with.value(&s), without.value(&s));
            rep.record(
                "planted_term_hidden_on_small_overlap",
                a == b,
                || json!({ "profile": s.to_vec(), "with_planted": q(&a), "without": q(&b) }),
            );
        } else {
            rep.skip("planted_term_hidden_on_small_overlap");
        }
    }

    let grid = [rat(1, 16), rat(1, 8), rat(1, 4), rat(1, 2), rat(1, 1), rat(2, 1)];
    let mut informative = 0usize;
    let mut done = 0usize;
    while done < UNINFORMATIVE_QUERIES {
        let mut window: Vec<usize> = Vec::new();
        let k = rng.gen_range(1..=QUERY_WINDOW);
        let mut agents: Vec<usize> = sample(&mut rng, with.n(), k).into_vec();
        let extra = rng.gen_range(0..=planted.len());
        agents.extend(planted.iter().take(extra));
        for i in agents {
            let pool = with.actions_of(i);
            let take = rng.gen_range(1..=3);
            for idx in sample(&mut rng, pool.len(), take) {
                if window.len() < QUERY_WINDOW && !window.contains(&pool[idx]) {
                    window.push(pool[idx]);
                }
            }
        }
        let mut prices = vec![Price::Infinite; with.m()];
        for &j in &window {
            prices[j] = Price::Finite(grid[rng.gen_range(0..grid.len())].clone());
        }
        let prices = PriceVector(prices);
        let cheap = cheap_agents(prices.0.iter().enumerate(), ell);
        if classify_query_informative(&cheap, &planted, ell) {
            informative += 1;
            continue;
        }
        done += 1;
        let answers = (demand(with.reward(), &prices, cap), demand(without.reward(), &prices, cap));
        match answers {
            (Ok(a), Ok(b)) => rep.record(
                "uninformative_queries_agree",
                a == b,
                || json!({ "window": window, "with_planted": a.to_vec(), "without": b.to_vec() }),
            ),
            (a, b) => {
                let e = a.err().or(b.err()).expect("one query failed");
                rep.fail("uninformative_queries_agree", json!({ "error": e.to_string(), "window": window }));
            }
        }
    }
    rep.set_fact("informative_windows_skipped", json!(informative));

    let tail = TailReport::run(&mut rng);
    for (cheap_count, p) in &tail.cases {
        rep.record(
            "informative_probability_below_exp",
            *p <= tail.bound,
            || json!({ "cheap_agents": cheap_count, "probability": to_f64(p) }),
        );
    }
    rep.set_fact("largest_informative_probability", json!(tail.largest()));
    rep.set_fact("exp_bound_lower", decimal(&tail.bound));
    rep.done()
}

/// Exact informative-query probabilities at `ell = 5` for random sparse
/// price vectors with fewer than `2 ell^4` cheap agents.
struct TailReport {
    cases: Vec<(usize, Rational)>,
    /// A rational just below `exp(-ell)`.
    bound: Rational,
}

impl TailReport {
    fn run(rng: &mut ChaCha8Rng) -> Self {
        let ell = TAIL_ELL;
        let shape = HardnessShape::new(ell);
        let limit = 2 * ell.pow(4);
        let per_agent = shape.actions_per_agent;
        let grid = [rat(1, 10), rat(1, 5), rat(1, 4), rat(1, 2), rat(1, 1)];
        let (bound, _) = exp_neg_bounds(&from_usize(ell));
        let mut cases = Vec::with_capacity(TAIL_QUERIES);
        while cases.len() < TAIL_QUERIES {
            let k = rng.gen_range(1..limit + limit / 4);
            let mut entries: Vec<(usize, Price)> = Vec::new();
            for agent in sample(rng, shape.agents, k) {
                let take = rng.gen_range(1..=3);
                for offset in sample(rng, per_agent, take) {
                    let p = grid[rng.gen_range(0..grid.len())].clone();
                    entries.push((agent * per_agent + offset, Price::Finite(p)));
                }
            }
            let cheap = cheap_agents(entries.iter().map(|(j, p)| (*j, p)), ell);
            if cheap.len() >= limit {
                continue;
            }
            cases.push((cheap.len(), informative_probability_exact(cheap.len(), ell)));
        }
        Self { cases, bound }
    }

    fn largest(&self) -> f64 {
        self.cases.iter().map(|(_, p)| to_f64(p)).fold(0.0, f64::max)
    }
}

fn matroid(cap: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Matroid, 0);
    let cases: [(&str, SetSystem); 2] = [("good", matroid_good_case()), ("bad", matroid_bad_case())];
    let bad_violation = bad_case_violation(&cases[1].1);
    rep.record("bad_case_covers_little", bad_violation.is_none(), || json!({ "sets": bad_violation }));
    for (label, system) in &cases {
        let inst = match gen_matroid_reduction(system) {
            Ok(i) => i,
            Err(e) => {
                rep.fail("reduction_builds", json!({ "case": label, "error": e.to_string() }));
                continue;
            }
        };
        match brute_optimal_contract(&inst, &Objective::Profit, cap) {
            Ok(best) => {
                rep.set_fact(&format!("{label}_case_profit"), json!(q(&best.value)));
                let ok = if *label == "good" { best.value == rat(1, 2) } else { best.value < rat(35, 100) };
                let name = if *label == "good" { "good_case_profit_is_half" } else { "bad_case_profit_below_0.35" };
                rep.record(name, ok, || pair_json(&inst, &best.contract, &best.profile));
            }
            Err(e) => rep.fail("reduction_builds", json!({ "case": label, "error": e.to_string() })),
        }
        let need = rat(1, (2 * system.k) as i64);
        let ground: Vec<usize> = (0..inst.m()).collect();
        for mask in 0..1u64 << inst.m() {
            let s = ActionProfile::from_mask(mask, &ground);
            for i in inst.active_agents(&s) {
                match min_incentive_interval(&inst, &s, i, IncentiveMode::Individual, cap) {
                    Ok(iv) if iv.feasible => rep.record(
                        "incentive_needs_one_over_2k",
                        iv.lo >= need,
                        || json!({ "case": label, "profile": s.to_vec(), "agent": i, "payment": q(&iv.lo) }),
                    ),
                    Ok(_) => rep.skip("incentive_needs_one_over_2k"),
                    Err(e) => rep.fail("incentive_needs_one_over_2k", json!({ "case": label, "error": e.to_string() })),
                }
            }
        }
    }
    rep.done()
}

const BASELINE_RANDOM_PAIRS: usize = 20;
const XOS_BINARY_INSTANCES: usize = 20;

fn baseline_instance(t: usize, seed: u64) -> Instance {
    match t % 4 {
        0 => gen_random_additive(4, 8, seed),
        1 => {
            let p = CoverageParams { agents: 4, actions_per_agent: 2, universe: 8, density: (1, 3), max_cost_64ths: 6 };
            gen_random_coverage(&p, seed)
        }
        2 => gen_random_partition_matroid(4, 2, 3, seed),
        _ => gen_random_xos_binary(6, 3, seed),
    }
    .expect("baseline generator arguments are valid")
}

fn appendices(seed: u64, cap: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Appendices, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let eps = rat(1, 10);
    match (gen_coverage_gap(&eps), coverage_gap_witness(&eps)) {
        (Ok(inst), Ok(w)) => {
            let reward = inst.value(&w.profile);
            rep.record("coverage_gap_witness_reward", reward == rat(13, 10), || json!({ "reward": q(&reward) }));
            rep.set_fact("coverage_gap_witness_reward", json!(q(&reward)));
            match brute_optimal_equal_pay(&inst, &Objective::Reward, cap) {
                Ok(eq) => {
                    rep.record("coverage_gap_equal_pay_reward", eq.value <= rat(3, 10), || {
                        pair_json(&inst, &eq.contract, &eq.profile)
                    });
                    let ratio_ok = eq.value.is_zero() || &reward / &eq.value >= rat(13, 3);
                    rep.record("coverage_gap_reward_ratio", ratio_ok, || json!({ "equal_pay_reward": q(&eq.value) }));
                    rep.set_fact("coverage_gap_equal_pay_reward", json!(q(&eq.value)));
                }
                Err(e) => rep.fail("coverage_gap_equal_pay_reward", json!({ "error": e.to_string() })),
            }
        }
        (a, b) => {
            let e = a.err().or(b.err()).expect("one generator failed");
            rep.fail("coverage_gap_witness_reward", json!({ "error": e.to_string() }));
        }
    }

    let mut pairs: Vec<(String, Instance, Contract, ActionProfile)> = Vec::new();
    for n in [16, 25] {
        let (inst, w) = match gen_subadditive_poe(n) {
            Ok(x) => x,
            Err(e) => {
                rep.fail("subadditive_witness_profit", json!({ "n": n, "error": e.to_string() }));
                continue;
            }
        };
        let profit = input_profit(&inst, &w.contract, &w.profile);
        rep.record("subadditive_witness_profit", profit >= rat(1, 8), || json!({ "n": n, "profit": q(&profit) }));
        if n == 16 {
            rep.record("subadditive_witness_profit_n16", profit == rat(207, 512), || json!({ "profit": q(&profit) }));
        }
        rep.set_fact(&format!("subadditive_witness_profit_n{n}"), json!(q(&profit)));
        let ceiling = rat(2, isqrt(n) as i64);
        match subadditive_equal_pay(&inst, &Objective::Reward, cap) {
            Ok(eq) => {
                rep.record("subadditive_equal_pay_reward", eq.value <= ceiling, || {
                    json!({ "n": n, "equal_pay_reward": q(&eq.value), "ceiling": q(&ceiling), "optimum": pair_json(&inst, &eq.contract, &eq.profile) })
                });
                rep.set_fact(&format!("subadditive_equal_pay_reward_n{n}"), json!(q(&eq.value)));
            }
            Err(e) => rep.fail("subadditive_equal_pay_reward", json!({ "n": n, "error": e.to_string() })),
        }
        if let Ok(eq) = subadditive_equal_pay(&inst, &Objective::Profit, cap) {
            rep.set_fact(&format!("subadditive_equal_pay_profit_n{n}"), json!(q(&eq.value)));
            rep.set_fact(&format!("subadditive_equal_pay_profit_reward_n{n}"), json!(q(&inst.value(&eq.profile))));
        }
        pairs.push((format!("subadditive(n={n})"), inst, w.contract, w.profile));
    }

    for n in [4, 8, 16] {
        let (inst, w) = gen_harmonic(n).expect("harmonic family");
        pairs.push((format!("harmonic(n={n})"), inst, w.contract, w.profile));
    }
    let intro = gen_intro_example(&rat(1, 100)).expect("intro example");
    let mut randoms = vec![("intro".to_string(), intro)];
    for t in 0..BASELINE_RANDOM_PAIRS {
        let s: u64 = rng.gen();
        randoms.push((format!("random(class={},seed={s})", t % 4), baseline_instance(t, s)));
    }
    for (label, inst) in randoms {
        match brute_optimal_contract(&inst, &Objective::Profit, cap) {
            Ok(best) => pairs.push((label, inst, best.contract, best.profile)),
            Err(e) => rep.fail("single_agent_baseline_share", json!({ "case": label, "error": e.to_string() })),
        }
    }
    for (label, inst, alpha, s) in &pairs {
        let input = input_profit(inst, alpha, s);
        match single_agent_subadditive_baseline(inst, alpha, s, cap) {
            Ok(r) => {
                let ok = &r.objective_value * from_usize(80 * inst.n()) >= input;
                rep.record(
                    "single_agent_baseline_share",
                    ok,
                    || json!({ "case": label, "output": q(&r.objective_value), "input_profit": q(&input) }),
                );
            }
            Err(Error::Precondition(_)) => rep.skip("single_agent_baseline_share"),
            Err(e) => rep.fail("single_agent_baseline_share", error_json(inst, alpha, s, &e)),
        }
    }

    for t in 0..XOS_BINARY_INSTANCES {
        let n = 8 + t % 5;
        let inst = gen_random_xos_binary(n, 3, rng.gen()).expect("xos generator");
        let got = xos_binary_equal_pay(&inst, &Objective::Profit, cap);
        let best = brute_optimal_equal_pay(&inst, &Objective::Profit, cap);
        match (got, best) {
            (Ok(r), Ok(best)) => {
                rep.record("xos_binary_within_512", &r.objective_value * from_usize(512) >= best.value, || {
                    json!({
                        "output": q(&r.objective_value),
                        "optimum": pair_json(&inst, &best.contract, &best.profile),
                    })
                });
            }
            (a, b) => {
                let e = a.err().or(b.err()).expect("one side failed");
                rep.fail(
                    "xos_binary_within_512",
                    json!({ "error": e.to_string(), "instance": InstanceJson::new(&inst, None) }),
                );
            }
        }
    }
    rep.done()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submasks_cover_every_subset_once() {
        let all: Vec<u64> = submasks(0b1011).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all.first(), Some(&0b1011));
        assert_eq!(all.last(), Some(&0));
    }

    #[test]
    fn table_stability_on_the_intro_example() {
        let inst = gen_intro_example(&rat(1, 100)).unwrap();
        let table = ValueTable::new(&inst, 20).unwrap();
        let alpha = Contract::new(vec![rat(3, 4), rat(0, 1)]).unwrap();
        assert!(table_stable(&table, &alpha, 0b0011, Deviations::Any));
        assert!(!table_stable(&table, &alpha, 0b0001, Deviations::Any));
        assert!(table_stable(&table, &alpha, 0b0001, Deviations::Subsets));
    }

    #[test]
    fn matroid_suite_passes() {
        let rep = run(Suite::Matroid, 0, 20, None);
        assert!(rep.passed, "{}", serde_json::to_string_pretty(&rep).unwrap());
        assert_eq!(rep.fact("good_case_profit"), Some(&json!("1/2")));
    }

    #[test]
    fn reports_are_reproducible() {
        let a = serde_json::to_string(&run(Suite::Alg1, 3, 20, None)).unwrap();
        let b = serde_json::to_string(&run(Suite::Alg1, 3, 20, None)).unwrap();
        assert_eq!(a, b);
    }
}
