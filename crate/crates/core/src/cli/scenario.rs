//! Scenario files: JSON descriptions of the objects the commands act on.
//!
//! Complex numbers are `[re, im]` pairs throughout. The payload is exactly
//! one of an inner-function sequence, a covering tower, or a component list;
//! options hold numeric knobs that a separate config file may override.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::innerseq::{BlaschkeMap, MapSequence, SequenceRule};
use crate::orbitrel::RelationVerdict;
use crate::powertower::{CoveringTower, DegreeRule};
use crate::teichreport::{ComponentKind, ComponentReport};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    pub payload: PayloadSpec,
    #[serde(default)]
    pub options: Options,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadSpec {
    InnerSequence(InnerSequenceSpec),
    CoveringTower(TowerSpec),
    ComponentList(ComponentListSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSequenceSpec {
    pub rule: RuleSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Constant { map: MapSpec },
    Periodic { head: Vec<MapSpec>, cycle: Vec<MapSpec> },
    Finite { maps: Vec<MapSpec> },
    PowerDeficit { c: f64, alpha: f64 },
    RotationTail { head: Vec<MapSpec>, angle: f64 },
}

fn unit_rotation() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default)]
    pub zeros: Vec<[f64; 2]>,
    #[serde(default = "unit_rotation")]
    pub rotation: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpec {
    pub kind: TowerKindSpec,
    /// Base modulus; required for annulus towers, forbidden otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    pub degrees: DegreeRuleSpec,
    /// Rotation angles `α_n` of a rotated-power family over the same
    /// degrees, for conjugacy verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotations: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerKindSpec {
    Annulus,
    PuncturedDisc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DegreeRuleSpec {
    Constant(u32),
    Periodic { head: Vec<u32>, cycle: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentListSpec {
    pub components: Vec<ComponentSpec>,
    /// True when the listed components stand in for an infinite family.
    #[serde(default)]
    pub infinite_family: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub kind: ComponentKindSpec,
    pub relation: RelationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentKindSpec {
    FiniteModulusAnnulus { modulus: f64 },
    PuncturedDisc,
    SimplyConnectedPiece,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationSpec {
    Discrete,
    Indiscrete,
    Undetermined,
}

/// Numeric knobs. Every field is optional; resolution order is
/// defaults < scenario options < config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// How many maps contribute critical values to the quotient model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked_horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Family index `n` for linearization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_index: Option<usize>,
    /// Base point for grand-orbit sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<[f64; 2]>,
    /// Depth schedule for grand-orbit sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_floor: Option<f64>,
    /// Number of levels tabulated by inj-decay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_len: Option<usize>,
    /// Start point for tower commands (level 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub radius: f64,
    pub count: usize,
}

fn to_complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl MapSpec {
    /// Builds the Blaschke map, prefixing validation errors with `context`
    /// so diagnostics name the offending map and zero.
    pub fn build(&self, context: &str) -> Result<BlaschkeMap> {
        BlaschkeMap::new(
            self.zeros.iter().copied().map(to_complex).collect(),
            to_complex(self.rotation),
        )
        .map_err(|e| Error::Scenario(format!("{context}: {e}")))
    }
}

impl InnerSequenceSpec {
    pub fn build(&self) -> Result<MapSequence> {
        let rule = match &self.rule {
            RuleSpec::Constant { map } => SequenceRule::Constant(map.build("constant map")?),
            RuleSpec::Periodic { head, cycle } => {
                let build_all = |specs: &[MapSpec], what: &str| -> Result<Vec<BlaschkeMap>> {
                    specs
                        .iter()
                        .enumerate()
                        .map(|(i, s)| s.build(&format!("{what} map {i}")))
                        .collect()
                };
                SequenceRule::Periodic {
                    head: build_all(head, "head")?,
                    cycle: build_all(cycle, "cycle")?,
                }
            }
            RuleSpec::Finite { maps } => SequenceRule::Finite(
                maps.iter()
                    .enumerate()
                    .map(|(i, s)| s.build(&format!("map {i}")))
                    .collect::<Result<_>>()?,
            ),
            RuleSpec::PowerDeficit { c, alpha } => SequenceRule::PowerDeficit {
                c: *c,
                alpha: *alpha,
            },
            RuleSpec::RotationTail { head, angle } => SequenceRule::RotationTail {
                head: head
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.build(&format!("head map {i}")))
                    .collect::<Result<_>>()?,
                angle: *angle,
            },
        };
        MapSequence::new(rule)
    }
}

impl DegreeRuleSpec {
    fn build(&self) -> DegreeRule {
        match self {
            DegreeRuleSpec::Constant(d) => DegreeRule::Constant(*d),
            DegreeRuleSpec::Periodic { head, cycle } => DegreeRule::Periodic {
                head: head.clone(),
                cycle: cycle.clone(),
            },
        }
    }
}

impl TowerSpec {
    pub fn build(&self) -> Result<CoveringTower> {
        match self.kind {
            TowerKindSpec::Annulus => {
                let mu0 = self.mu0.ok_or_else(|| {
                    Error::Scenario("annulus tower needs a base modulus mu0".into())
                })?;
                CoveringTower::annulus(mu0, self.degrees.build())
            }
            TowerKindSpec::PuncturedDisc => {
                if self.mu0.is_some() {
                    return Err(Error::Scenario(
                        "punctured-disc towers carry no modulus; drop mu0".into(),
                    ));
                }
                CoveringTower::punctured_disc(self.degrees.build())
            }
        }
    }
}

impl ComponentSpec {
    pub fn build(&self, default_source: &str) -> Result<ComponentReport> {
        let kind = match self.kind {
            ComponentKindSpec::FiniteModulusAnnulus { modulus } => {
                ComponentKind::FiniteModulusAnnulus(modulus)
            }
            ComponentKindSpec::PuncturedDisc => ComponentKind::PuncturedDisc,
            ComponentKindSpec::SimplyConnectedPiece => ComponentKind::SimplyConnectedPiece,
            ComponentKindSpec::Other => ComponentKind::Other,
        };
        let relation = match self.relation {
            RelationSpec::Discrete => RelationVerdict::Discrete,
            RelationSpec::Indiscrete => RelationVerdict::Indiscrete,
            RelationSpec::Undetermined => RelationVerdict::Undetermined,
        };
        ComponentReport::new(kind, relation, self.source.as_deref().unwrap_or(default_source))
    }
}

impl ScenarioFile {
    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Scenario(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.name.trim().is_empty() {
            return Err(Error::Scenario("scenario name must not be empty".into()));
        }
        Ok(())
    }
}

/// Reads, parses (with line/column diagnostics), and validates a scenario.
/// Returns the scenario together with the raw bytes for hashing.
pub fn ingest(path: &Path) -> Result<(ScenarioFile, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let scenario: ScenarioFile =
        serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            detail: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
    scenario.validate()?;
    // Building the payload eagerly surfaces invariant violations (zero
    // moduli, degree rules, component kinds) at ingest time with field
    // context, as scenario errors rather than later math errors.
    match &scenario.payload {
        PayloadSpec::InnerSequence(spec) => {
            spec.build()?;
        }
        PayloadSpec::CoveringTower(spec) => {
            spec.build()?;
        }
        PayloadSpec::ComponentList(spec) => {
            for (i, c) in spec.components.iter().enumerate() {
                c.build(&format!("{} component {i}", scenario.name))?;
            }
        }
    }
    Ok((scenario, bytes))
}

/// Reads an optional config file with the same option grammar.
pub fn read_config(path: &Path) -> Result<Options> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: format!("line {}, column {}: {e}", e.line(), e.column()),
    })
}

/// Serializes a scenario as pretty JSON (the inverse of [`ingest`]).
pub fn serialize(scenario: &ScenarioFile) -> String {
    serde_json::to_string_pretty(scenario).expect("scenario DTOs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_constant_scenario_round_trips() {
        let text = r#"{
            "schema_version": 1,
            "name": "constant",
            "payload": {
                "inner_sequence": {
                    "rule": { "constant": { "map": { "zeros": [[0.0, 0.0], [0.5, 0.0]] } } }
                }
            }
        }"#;
        let f = write_temp(text);
        let (scenario, _) = ingest(f.path()).unwrap();
        assert_eq!(scenario.name, "constant");
        let f2 = write_temp(&serialize(&scenario));
        let (again, _) = ingest(f2.path()).unwrap();
        assert_eq!(scenario, again);
    }

    #[test]
    fn tower_scenario_builds_a_tower() {
        let text = r#"{
            "schema_version": 1,
            "name": "tower",
            "payload": {
                "covering_tower": { "kind": "annulus", "mu0": 0.3, "degrees": { "constant": 2 } }
            }
        }"#;
        let f = write_temp(text);
        let (scenario, _) = ingest(f.path()).unwrap();
        match &scenario.payload {
            PayloadSpec::CoveringTower(spec) => {
                let tower = spec.build().unwrap();
                assert_eq!(tower.push_modulus(1).unwrap(), 0.6);
            }
            _ => panic!("wrong payload"),
        }
    }

    #[test]
    fn malformed_zero_names_its_index() {
        let text = r#"{
            "schema_version": 1,
            "name": "bad",
            "payload": {
                "inner_sequence": {
                    "rule": { "constant": { "map": { "zeros": [[0.0, 0.0], [1.2, 0.0]] } } }
                }
            }
        }"#;
        let f = write_temp(text);
        let err = ingest(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("zero #1"), "diagnostic was: {msg}");
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let f = write_temp("{\n  \"schema_version\": 1,\n  oops\n}");
        let err = ingest(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "diagnostic was: {msg}");
    }

    #[test]
    fn unsupported_schema_version_is_rejected() {
        let text = r#"{
            "schema_version": 99,
            "name": "future",
            "payload": { "component_list": { "components": [] } }
        }"#;
        let f = write_temp(text);
        assert!(matches!(ingest(f.path()), Err(Error::Scenario(_))));
    }

    #[test]
    fn punctured_disc_towers_reject_a_modulus() {
        let spec = TowerSpec {
            kind: TowerKindSpec::PuncturedDisc,
            mu0: Some(0.3),
            degrees: DegreeRuleSpec::Constant(2),
            rotations: None,
        };
        assert!(spec.build().is_err());
    }
}
