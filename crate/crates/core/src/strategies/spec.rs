//! Serializable strategy descriptions.
//!
//! A spec is the JSON document `{"kind": <name>, "params": {...}}`; `params`
//! may be omitted when every parameter has a default. Named presets cover
//! every strategy in the library.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{ColorSpace, KSchedule};
use crate::plan::{generate_plan_for_targets, generate_plan_with, PlanOptions, TeamMode, TeamPlan};
use crate::rational::Rational;

use super::blocks::{BlockSchedule, Blocks};
use super::mixed::{MixedStrategy, TargetLaw, DEFAULT_NOISE_BITS};
use super::rules::{ContinuumRule, PositiveLaw};
use super::team::TeamStrategy;
use super::Strategy;

pub const SPEC_SCHEMA_VERSION: u32 = 1;

fn half() -> Rational {
    Rational::half()
}
fn default_teams() -> u64 {
    12
}
fn default_group() -> u64 {
    10
}
fn default_noise_bits() -> u32 {
    DEFAULT_NOISE_BITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum StrategySpec {
    Constant {
        #[serde(default)]
        color: u64,
        /// Number of colors; 2 when absent.
        #[serde(default)]
        k: Option<u64>,
    },
    IndependentRandom {
        #[serde(default)]
        k: Option<u64>,
    },
    EvenOdd {
        #[serde(default = "default_group")]
        group: u64,
    },
    Pairs,
    ModKSum {
        k: u64,
        #[serde(default)]
        residue: u64,
        group: u64,
    },
    ModKGroups {
        k: u64,
    },
    Block {
        #[serde(default)]
        schedule: BlockSchedule,
    },
    /// Team strategy for targets `(lower, upper)`; the mode follows from the
    /// targets unless given.
    Team {
        upper: Rational,
        #[serde(default = "half")]
        lower: Rational,
        #[serde(default = "default_teams")]
        teams: u64,
        #[serde(default)]
        mode: Option<TeamMode>,
    },
    /// Team strategy from an explicit plan.
    TeamPlan {
        plan: TeamPlan,
    },
    Mixed {
        law: TargetLaw,
        #[serde(default = "default_noise_bits")]
        noise_bits: u32,
        #[serde(default = "default_teams")]
        teams: u64,
    },
    CountableUniform {
        schedule: KSchedule,
    },
    CountablePositive {
        schedule: KSchedule,
        law: PositiveLaw,
    },
    Continuum {
        #[serde(default)]
        rule: ContinuumRule,
    },
}

impl StrategySpec {
    pub fn build(&self) -> Result<Strategy> {
        Ok(match self {
            StrategySpec::Constant { color, k } => {
                let k = k.unwrap_or(2);
                if k < 2 || *color >= k {
                    return Err(invalid(format!("constant color {color} invalid for {k} colors")));
                }
                Strategy::Constant { color: *color, space: ColorSpace::FiniteK { k }.normalized() }
            }
            StrategySpec::IndependentRandom { k } => {
                let k = k.unwrap_or(2);
                if !(2..=256).contains(&k) {
                    return Err(invalid("independent random needs 2 <= K <= 256"));
                }
                Strategy::IndependentRandom { space: ColorSpace::FiniteK { k }.normalized() }
            }
            StrategySpec::EvenOdd { group } => {
                if *group == 0 {
                    return Err(invalid("even-odd group must be nonempty"));
                }
                Strategy::EvenOdd { group: *group }
            }
            StrategySpec::Pairs => Strategy::Pairs,
            StrategySpec::ModKSum { k, residue, group } => {
                if *k < 2 {
                    return Err(invalid("mod-K strategies need K >= 2"));
                }
                if *group == 0 {
                    return Err(invalid("mod-K group must be nonempty"));
                }
                Strategy::ModKSum { k: *k, residue: residue % k, group: *group }
            }
            StrategySpec::ModKGroups { k } => {
                if *k < 2 {
                    return Err(invalid("mod-K strategies need K >= 2"));
                }
                Strategy::ModKGroups { k: *k }
            }
            StrategySpec::Block { schedule } => Strategy::Blocks(Blocks::new(schedule)?),
            StrategySpec::Team { upper, lower, teams, mode } => {
                let plan = match mode {
                    None => generate_plan_for_targets(lower, upper, *teams)?,
                    Some(m) => generate_plan_with(upper, lower, *m, *teams, &PlanOptions::default())?,
                };
                Strategy::Team(TeamStrategy::new(plan)?)
            }
            StrategySpec::TeamPlan { plan } => Strategy::Team(TeamStrategy::new(plan.clone())?),
            StrategySpec::Mixed { law, noise_bits, teams } => {
                Strategy::Mixed(Box::new(MixedStrategy::new(law.clone(), *noise_bits, *teams)?))
            }
            StrategySpec::CountableUniform { schedule } => {
                schedule.colors_for(1)?;
                Strategy::CountableUniform { schedule: schedule.clone() }
            }
            StrategySpec::CountablePositive { schedule, law } => {
                schedule.colors_for(1)?;
                law.validate()?;
                Strategy::CountablePositive { schedule: schedule.clone(), law: law.clone() }
            }
            StrategySpec::Continuum { rule } => {
                if let ContinuumRule::MeanOfVisible { count: 0 } = rule {
                    return Err(invalid("mean-of-visible needs at least one hat"));
                }
                Strategy::Continuum(rule.clone())
            }
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(obj) = v.as_object_mut() {
            let unit = obj.get("kind").and_then(|k| k.as_str()) == Some("pairs");
            if !unit && !obj.contains_key("params") {
                obj.insert("params".into(), serde_json::Value::Object(Default::default()));
            }
        }
        serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("specs serialize")
    }

    /// Named preset. Group-based presets use `n` as the group size when
    /// given, so that `even-odd` with `n` players is one group.
    pub fn preset(name: &str, n: Option<u64>) -> Result<Self> {
        let frac = |p, q| Rational::frac(p, q);
        let team = |l: Rational, u: Rational| StrategySpec::Team { upper: u, lower: l, teams: default_teams(), mode: None };
        Ok(match name {
            "constant" => StrategySpec::Constant { color: 0, k: None },
            "independent-random" => StrategySpec::IndependentRandom { k: None },
            "even-odd" => StrategySpec::EvenOdd { group: n.unwrap_or(default_group()) },
            "pairs" => StrategySpec::Pairs,
            "mod-3-sum" => StrategySpec::ModKSum { k: 3, residue: 0, group: n.unwrap_or(3) },
            "mod-3-groups" => StrategySpec::ModKGroups { k: 3 },
            "block" | "block-geometric" => StrategySpec::Block { schedule: BlockSchedule::default() },
            "block-factorial" => StrategySpec::Block { schedule: BlockSchedule::Factorial },
            "team-2/3" => team(half(), frac(2, 3)),
            "team" | "team-3/4" => team(half(), frac(3, 4)),
            "team-9/10" => team(half(), frac(9, 10)),
            "team-1" => team(half(), Rational::one()),
            "lose-1/4" => team(frac(1, 4), half()),
            "alternating" => team(Rational::zero(), Rational::one()),
            "alternating-1/4-3/4" => team(frac(1, 4), frac(3, 4)),
            "mixed" => StrategySpec::Mixed {
                law: TargetLaw::two_point(),
                noise_bits: DEFAULT_NOISE_BITS,
                teams: default_teams(),
            },
            "countable-uniform" => StrategySpec::CountableUniform {
                schedule: KSchedule::UnionBound { epsilon: frac(1, 10) },
            },
            "countable-poisson" => StrategySpec::CountablePositive {
                schedule: KSchedule::UnionBound { epsilon: frac(1, 10) },
                law: PositiveLaw::Poisson { lambda: 1.0 },
            },
            "continuum" => StrategySpec::Continuum { rule: ContinuumRule::default() },
            "continuum-constant" => StrategySpec::Continuum { rule: ContinuumRule::Constant { value: 0.5 } },
            other => return Err(invalid(format!("unknown strategy preset '{other}'"))),
        })
    }

    /// A preset name, or an inline JSON spec, or `@path` to a JSON file.
    pub fn parse(arg: &str, n: Option<u64>) -> Result<Self> {
        let trimmed = arg.trim_start();
        if trimmed.starts_with('{') {
            StrategySpec::from_json(arg)
        } else if let Some(path) = arg.strip_prefix('@') {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
            StrategySpec::from_json(&text)
        } else {
            StrategySpec::preset(arg, n)
        }
    }
}

/// Preset names of the binary strategies in the library.
pub const LIBRARY: &[&str] = &[
    "constant",
    "independent-random",
    "even-odd",
    "pairs",
    "block",
    "team-2/3",
    "team-3/4",
    "team-9/10",
    "team-1",
    "lose-1/4",
    "alternating",
    "alternating-1/4-3/4",
    "mixed",
];

/// The binary strategies of the library, built with their preset parameters.
pub fn library_strategies() -> Result<Vec<(&'static str, Strategy)>> {
    LIBRARY.iter().map(|&name| Ok((name, StrategySpec::preset(name, None)?.build()?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        for name in LIBRARY.iter().chain(["mod-3-sum", "countable-uniform", "continuum"].iter()) {
            let spec = StrategySpec::preset(name, None).unwrap();
            let back = StrategySpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(spec, back, "{name}");
        }
    }

    #[test]
    fn params_may_be_omitted() {
        assert_eq!(StrategySpec::from_json(r#"{"kind":"pairs"}"#).unwrap(), StrategySpec::Pairs);
        assert_eq!(
            StrategySpec::from_json(r#"{"kind":"even-odd"}"#).unwrap(),
            StrategySpec::EvenOdd { group: 10 }
        );
        let t = StrategySpec::from_json(r#"{"kind":"team","params":{"upper":"3/4","teams":5}}"#).unwrap();
        assert!(matches!(t.build().unwrap(), Strategy::Team(_)));
        assert!(StrategySpec::from_json(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn construction_validation() {
        assert!(StrategySpec::ModKGroups { k: 1 }.build().is_err());
        assert!(StrategySpec::Constant { color: 2, k: None }.build().is_err());
        assert!(StrategySpec::Block { schedule: BlockSchedule::Explicit { bounds: vec![3, 3] } }.build().is_err());
        assert!(StrategySpec::Team { upper: Rational::frac(1, 4), lower: half(), teams: 3, mode: None }
            .build()
            .is_err());
    }

    #[test]
    fn library_builds() {
        let lib = library_strategies().unwrap();
        assert_eq!(lib.len(), LIBRARY.len());
        assert!(lib.iter().all(|(_, s)| s.is_binary()));
    }
}
