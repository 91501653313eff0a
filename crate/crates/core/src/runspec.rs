//! The JSON run-spec file: a scenario plus output options.
//!
//! Every field except the airplanes' ids, starts and goals may be omitted and
//! then takes the reference value. Unknown keys are rejected. The schema in
//! `schema/run_spec.schema.json` documents the format and its defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{AngleRad, HeadingMode, Vec2};
use crate::opinion::OpinionParams;
use crate::safety::SafetyParams;
use crate::sim::{desired_heading, AirplaneSpec, Scenario};

pub const SCHEMA_VERSION: &str = "1";

/// JSON schema of the run-spec file.
pub const SCHEMA: &str = include_str!("../schema/run_spec.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub emit_csv: bool,
    pub emit_svg: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("."), emit_csv: true, emit_svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirplaneEntry {
    pub id: u32,
    pub start: Vec2,
    pub goal: Vec2,
    /// Points at the goal when omitted.
    #[serde(default)]
    pub heading0: Option<AngleRad>,
    #[serde(default)]
    pub bias: f64,
}

/// On-disk layout. Use [`parse_run_spec`] to get a validated [`RunSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpecFile {
    pub schema_version: String,
    pub name: String,
    pub airplanes: Vec<AirplaneEntry>,
    pub safety: SafetyParams,
    pub opinion: OpinionParams,
    pub dt: f64,
    pub t_max: f64,
    pub goal_radius: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub opinion_enabled: bool,
    pub heading_mode: HeadingMode,
    pub output: OutputOptions,
}

impl Default for RunSpecFile {
    fn default() -> Self {
        Self::from_scenario(&Scenario::with_defaults("run"), &OutputOptions::default())
    }
}

impl RunSpecFile {
    pub fn from_scenario(scenario: &Scenario, output: &OutputOptions) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            name: scenario.name.clone(),
            airplanes: scenario
                .airplanes
                .iter()
                .map(|a| AirplaneEntry {
                    id: a.id,
                    start: a.start,
                    goal: a.goal,
                    heading0: Some(a.heading0),
                    bias: a.bias,
                })
                .collect(),
            safety: scenario.safety,
            opinion: scenario.opinion,
            dt: scenario.dt,
            t_max: scenario.t_max,
            goal_radius: scenario.goal_radius,
            noise_std: scenario.noise_std,
            seed: scenario.seed,
            opinion_enabled: scenario.opinion_enabled,
            heading_mode: scenario.heading_mode,
            output: output.clone(),
        }
    }

    fn into_spec(self) -> Result<RunSpec> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "schema_version: expected \"{SCHEMA_VERSION}\", got \"{}\"",
                self.schema_version
            )));
        }
        let airplanes = self
            .airplanes
            .into_iter()
            .map(|a| AirplaneSpec {
                id: a.id,
                start: a.start,
                heading0: a.heading0.or_else(|| desired_heading(a.start, a.goal)).unwrap_or(AngleRad::ZERO),
                goal: a.goal,
                bias: a.bias,
            })
            .collect();
        let scenario = Scenario {
            name: self.name,
            airplanes,
            safety: self.safety,
            opinion: self.opinion,
            dt: self.dt,
            t_max: self.t_max,
            goal_radius: self.goal_radius,
            noise_std: self.noise_std,
            seed: self.seed,
            opinion_enabled: self.opinion_enabled,
            heading_mode: self.heading_mode,
        };
        scenario.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(RunSpec { scenario, output: self.output })
    }
}

/// A validated run spec.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: Scenario,
    pub output: OutputOptions,
}

impl RunSpec {
    pub fn to_json(&self) -> String {
        let file = RunSpecFile::from_scenario(&self.scenario, &self.output);
        serde_json::to_string_pretty(&file).expect("run spec serializes")
    }
}

/// Parses and validates a run spec. Syntax errors and unknown keys report
/// the line and column; validation errors name the offending key.
pub fn parse_run_spec(text: &str) -> Result<RunSpec> {
    let file: RunSpecFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_spec()
}

pub fn load_run_spec(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_run_spec(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
