//! JSON formats. Every rational is a `"p/q"` string so values survive a round
//! trip bit for bit; zero is written `"0/1"`.

use std::fmt;
use std::str::FromStr;

use fairpay_core::algorithms::{Alg1Trace, BucketChoice, BucketPlan, EquilibriumSource, SolveResult, Trace};
use fairpay_core::instances::{SetSystem, Witness};
use fairpay_core::model::{Action, Contract, Instance};
use fairpay_core::num::Rational;
use fairpay_core::oracle::{Optimum, PoeReport, Ratio};
use fairpay_core::profile::ActionProfile;
use fairpay_core::rewards::RewardSpec;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

/// A rational that serializes as `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q(pub Rational);

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("not a rational: {0:?}")]
pub struct BadRational(String);

impl FromStr for Q {
    type Err = BadRational;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadRational(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| bad())?;
        let den = BigInt::from_str(den).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Q(Rational::new(num, den)))
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

pub fn q(r: &Rational) -> Q {
    Q(r.clone())
}

fn qs(v: &[Rational]) -> Vec<Q> {
    v.iter().map(q).collect()
}

fn unq(v: Vec<Q>) -> Vec<Rational> {
    v.into_iter().map(|x| x.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionJson {
    pub id: usize,
    pub agent: usize,
    pub cost: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardJson {
    Additive { weights: Vec<Q> },
    Coverage { universe: Vec<Q>, covers: Vec<Vec<usize>>, normalizer: Q },
    PartitionMatroid { parts: Vec<Vec<usize>>, unit: Q },
    Xos { clauses: Vec<Vec<Q>> },
    Table { values: Vec<Q> },
    HardnessXos { ell: usize, planted: Vec<usize>, with_planted: bool },
    SubadditivePoe { n: usize },
}

impl From<&RewardSpec> for RewardJson {
    fn from(r: &RewardSpec) -> Self {
        match r {
            RewardSpec::Additive { weights } => RewardJson::Additive { weights: qs(weights) },
            RewardSpec::Coverage { universe, covers, normalizer } => {
                RewardJson::Coverage { universe: qs(universe), covers: covers.clone(), normalizer: q(normalizer) }
            }
            RewardSpec::PartitionMatroid { parts, unit } => {
                RewardJson::PartitionMatroid { parts: parts.clone(), unit: q(unit) }
            }
            RewardSpec::Xos { clauses } => RewardJson::Xos { clauses: clauses.iter().map(|c| qs(c)).collect() },
            RewardSpec::Table { values } => RewardJson::Table { values: qs(values) },
            RewardSpec::HardnessXos { ell, planted, with_planted } => {
                RewardJson::HardnessXos { ell: *ell, planted: planted.clone(), with_planted: *with_planted }
            }
            RewardSpec::SubadditivePoe { n } => RewardJson::SubadditivePoe { n: *n },
        }
    }
}

impl From<RewardJson> for RewardSpec {
    fn from(r: RewardJson) -> Self {
        match r {
            RewardJson::Additive { weights } => RewardSpec::Additive { weights: unq(weights) },
            RewardJson::Coverage { universe, covers, normalizer } => {
                RewardSpec::Coverage { universe: unq(universe), covers, normalizer: normalizer.0 }
            }
            RewardJson::PartitionMatroid { parts, unit } => RewardSpec::PartitionMatroid { parts, unit: unit.0 },
            RewardJson::Xos { clauses } => RewardSpec::Xos { clauses: clauses.into_iter().map(unq).collect() },
            RewardJson::Table { values } => RewardSpec::Table { values: unq(values) },
            RewardJson::HardnessXos { ell, planted, with_planted } => {
                RewardSpec::HardnessXos { ell, planted, with_planted }
            }
            RewardJson::SubadditivePoe { n } => RewardSpec::SubadditivePoe { n },
        }
    }
}

/// A contract with one of its equilibria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub contract: Vec<Q>,
    pub profile: Vec<usize>,
}

impl PairJson {
    pub fn new(contract: &Contract, profile: &ActionProfile) -> Self {
        Self { contract: qs(contract.as_slice()), profile: profile.to_vec() }
    }

    pub fn to_witness(&self) -> anyhow::Result<Witness> {
        Ok(Witness {
            contract: Contract::new(self.contract.iter().map(|x| x.0.clone()).collect())?,
            profile: ActionProfile::from_ids(self.profile.iter().copied()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub actions: Vec<ActionJson>,
    pub reward: RewardJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Q>,
    /// Optional input pair for the transforms that start from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairJson>,
}

impl InstanceJson {
    pub fn new(inst: &Instance, witness: Option<&Witness>) -> Self {
        Self {
            n: inst.n(),
            actions: inst
                .actions()
                .iter()
                .enumerate()
                .map(|(id, a)| ActionJson { id, agent: a.agent, cost: q(&a.cost) })
                .collect(),
            reward: inst.reward().into(),
            scale: (!inst.scale().is_one()).then(|| q(inst.scale())),
            witness: witness.map(|w| PairJson::new(&w.contract, &w.profile)),
        }
    }

    pub fn to_instance(&self) -> anyhow::Result<Instance> {
        for (pos, a) in self.actions.iter().enumerate() {
            anyhow::ensure!(a.id == pos, "action ids must be 0..m-1 in order (found {} at position {pos})", a.id);
        }
        let actions = self.actions.iter().map(|a| Action { agent: a.agent, cost: a.cost.0.clone() }).collect();
        let scale = self.scale.as_ref().map_or_else(Rational::one, |s| s.0.clone());
        Ok(Instance::with_scale(self.n, actions, self.reward.clone().into(), scale)?)
    }

    pub fn to_witness(&self) -> anyhow::Result<Option<Witness>> {
        self.witness.as_ref().map(PairJson::to_witness).transpose()
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceJson::new(inst, None)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> anyhow::Result<Instance> {
    serde_json::from_str::<InstanceJson>(text)?.to_instance()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSystemJson {
    pub universe: usize,
    pub k: usize,
    pub sets: Vec<Vec<usize>>,
}

impl From<&SetSystem> for SetSystemJson {
    fn from(s: &SetSystem) -> Self {
        Self { universe: s.universe, k: s.k, sets: s.sets.clone() }
    }
}

impl From<SetSystemJson> for SetSystem {
    fn from(s: SetSystemJson) -> Self {
        SetSystem { universe: s.universe, k: s.k, sets: s.sets }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResultJson {
    pub contract: Vec<Q>,
    pub equilibrium: Vec<usize>,
    pub objective_value: Q,
    pub branch: String,
    #[serde(default)]
    pub trace: Value,
}

impl From<&SolveResult> for SolveResultJson {
    fn from(r: &SolveResult) -> Self {
        Self {
            contract: qs(r.contract.as_slice()),
            equilibrium: r.equilibrium.to_vec(),
            objective_value: q(&r.objective_value),
            branch: r.branch.tag(),
            trace: trace_summary(&r.trace),
        }
    }
}

impl SolveResultJson {
    /// An oracle optimum has no algorithm path; its branch is `brute`.
    pub fn from_optimum(o: &Optimum) -> Self {
        Self {
            contract: qs(o.contract.as_slice()),
            equilibrium: o.profile.to_vec(),
            objective_value: q(&o.value),
            branch: "brute".into(),
            trace: Value::Null,
        }
    }
}

fn source_tag(s: EquilibriumSource) -> &'static str {
    match s {
        EquilibriumSource::ExhaustiveWorst => "exhaustive_worst",
        EquilibriumSource::Dynamics => "br_dynamics",
        EquilibriumSource::NotRun => "not_run",
    }
}

fn small_agents_summary(t: &Alg1Trace) -> Value {
    let rounds: Vec<Value> = t
        .rounds
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "branch": r.branch.tag(),
                "demand": r.demand.to_vec(),
                "chosen": r.chosen.to_vec(),
                "paid": r.contract.paid(),
                "total_payment": q(&r.contract.total()),
            })
        })
        .collect();
    json!({ "k_star": t.k_star, "equilibrium_source": source_tag(t.source), "rounds": rounds })
}

fn bucket_summary(p: &BucketPlan) -> Value {
    let chosen = match p.chosen {
        BucketChoice::Tail => "X".to_string(),
        BucketChoice::Run(h) => format!("B{h}"),
        BucketChoice::Closer(h) => format!("B'{h}"),
    };
    json!({
        "large": p.large,
        "tail": p.tail,
        "runs": p.runs,
        "closers": p.closers,
        "chosen": chosen,
        "level": q(&p.level),
        "bucket_count": p.bucket_count(),
    })
}

pub fn trace_summary(t: &Trace) -> Value {
    match t {
        Trace::None => Value::Null,
        Trace::SmallAgents(a) => small_agents_summary(a),
        Trace::Buckets(b) => bucket_summary(b),
        Trace::Candidates(c) => json!({ "candidates": c }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatioJson {
    Finite(Q),
    Infinite,
}

impl Serialize for RatioJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            RatioJson::Finite(x) => x.serialize(serializer),
            RatioJson::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RatioJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == "inf" {
            Ok(RatioJson::Infinite)
        } else {
            s.parse().map(RatioJson::Finite).map_err(D::Error::custom)
        }
    }
}

impl From<&Ratio> for RatioJson {
    fn from(r: &Ratio) -> Self {
        match r {
            Ratio::Finite(x) => RatioJson::Finite(q(x)),
            Ratio::Infinite => RatioJson::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoeReportJson {
    pub unconstrained: SolveResultJson,
    pub equal_pay: SolveResultJson,
    pub ratio: RatioJson,
}

impl From<&PoeReport> for PoeReportJson {
    fn from(r: &PoeReport) -> Self {
        Self {
            unconstrained: SolveResultJson::from_optimum(&r.unconstrained),
            equal_pay: SolveResultJson::from_optimum(&r.equal_pay),
            ratio: (&r.ratio).into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairpay_core::algorithms::poe_transform_xos;
    use fairpay_core::instances::{
        gen_coverage_gap, gen_harmonic, gen_intro_example, gen_random_coverage, gen_random_partition_matroid,
        gen_random_xos_binary, gen_subadditive_poe, matroid_good_case, CoverageParams,
    };
    use fairpay_core::model::Objective;
    use fairpay_core::num::rat;
    use fairpay_core::oracle::price_of_equality;

    #[test]
    fn rationals_print_with_denominator() {
        assert_eq!(q(&rat(0, 5)).to_string(), "0/1");
        assert_eq!(q(&rat(-6, 4)).to_string(), "-3/2");
        assert_eq!("7".parse::<Q>().unwrap(), Q(rat(7, 1)));
        assert_eq!(" 2 / 4".parse::<Q>().unwrap(), Q(rat(1, 2)));
        assert!("1/0".parse::<Q>().is_err());
        assert!("x".parse::<Q>().is_err());
    }

    #[test]
    fn instances_round_trip() {
        let cov = CoverageParams { agents: 3, actions_per_agent: 2, universe: 6, density: (1, 2), max_cost_64ths: 4 };
        let all = [
            gen_intro_example(&rat(1, 100)).unwrap(),
            gen_harmonic(5).unwrap().0,
            gen_subadditive_poe(16).unwrap().0,
            gen_coverage_gap(&rat(1, 10)).unwrap(),
            gen_random_coverage(&cov, 3).unwrap(),
            gen_random_partition_matroid(3, 2, 2, 1).unwrap(),
            gen_random_xos_binary(4, 2, 9).unwrap(),
        ];
        for inst in all {
            let text = instance_to_json(&inst);
            assert_eq!(instance_from_json(&text).unwrap(), inst);
        }
    }

    #[test]
    fn witness_travels_with_the_instance() {
        let (inst, w) = gen_harmonic(4).unwrap();
        let text = serde_json::to_string(&InstanceJson::new(&inst, Some(&w))).unwrap();
        let back: InstanceJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_witness().unwrap(), Some(w));
    }

    #[test]
    fn out_of_order_ids_are_rejected() {
        let text =
            r#"{"n":1,"actions":[{"id":1,"agent":0,"cost":"0/1"}],"reward":{"kind":"additive","weights":["1/2"]}}"#;
        assert!(instance_from_json(text).is_err());
    }

    #[test]
    fn set_system_format() {
        let s = matroid_good_case();
        let text = serde_json::to_string(&SetSystemJson::from(&s)).unwrap();
        assert!(text.starts_with(r#"{"universe":"#));
        let back: SetSystem = serde_json::from_str::<SetSystemJson>(&text).unwrap().into();
        assert_eq!(back, s);
    }

    #[test]
    fn results_and_reports_round_trip() {
        let (inst, w) = gen_harmonic(4).unwrap();
        let r = poe_transform_xos(&inst, &w.contract, &w.profile, 20).unwrap();
        let j = SolveResultJson::from(&r);
        assert_eq!(j.branch, "bucket_X");
        assert_eq!(j.trace["chosen"], "X");
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(serde_json::from_str::<SolveResultJson>(&text).unwrap(), j);

        let rep = price_of_equality(&inst, &Objective::Profit, 20).unwrap();
        let j = PoeReportJson::from(&rep);
        assert_eq!(j.ratio, RatioJson::Finite(Q(rat(625, 468))));
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains(r#""ratio":"625/468""#));
        assert_eq!(serde_json::from_str::<PoeReportJson>(&text).unwrap(), j);
        assert_eq!(serde_json::to_string(&RatioJson::Infinite).unwrap(), r#""inf""#);
    }
}
