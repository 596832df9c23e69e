//! Command-line flags, the JSON config document, and their merge.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrf_core::{DecodeMethod, ScenarioId};
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Parser, Debug)]
#[command(name = "qrf", version, about = "Bounded quantum reference frames: channels, verification, sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub options: Options,
    /// Read the run configuration from a JSON document; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub json_config: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Build the effective channel of one scenario and write it as JSON.
    Channel,
    /// Check the generic codec against the closed forms over a grid.
    Verify,
    /// Tabulate a metric over a range of token sizes.
    Sweep,
    /// Sample the post-selected decoder.
    Postselect,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Phase,
    Cartesian,
    Direction,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Relational,
    Integral,
}

impl From<Method> for DecodeMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Relational => DecodeMethod::Relational,
            Method::Integral => DecodeMethod::Integral,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[value(name = "mixing_p")]
    #[serde(rename = "mixing_p")]
    MixingP,
    #[value(name = "entanglement_fidelity")]
    #[serde(rename = "entanglement_fidelity")]
    EntanglementFidelity,
    #[value(name = "p_perfect")]
    #[serde(rename = "p_perfect")]
    PPerfect,
}

/// Every option is optional here so that a JSON config can fill the gaps.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    #[arg(long, global = true, value_enum)]
    pub scenario: Option<ScenarioKind>,
    /// Phase reference size N_R.
    #[arg(long, global = true)]
    pub nr: Option<u32>,
    /// Cartesian frame spin j_R (integer).
    #[arg(long, global = true)]
    pub jr: Option<u32>,
    /// Doubled spin 2 j_R.
    #[arg(long = "two-jr", global = true)]
    #[serde(rename = "two_jr")]
    pub two_jr: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    /// Quadrature order for the integral method.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    pub metric: Option<Metric>,
    /// First size of a sweep (N_R, j_R, or 2 j_R for direction).
    #[arg(long, global = true)]
    pub from: Option<u32>,
    /// Last size of a sweep, inclusive.
    #[arg(long, global = true)]
    pub to: Option<u32>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Input amplitudes as JSON `[[re, im], [re, im]]`.
    #[arg(long, global = true)]
    pub input: Option<String>,
}

/// A complete run description; the shape accepted by `--json-config`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Option<Command>,
    #[serde(flatten)]
    pub options: Options,
}

impl RunConfig {
    /// Parse a config document; unknown keys are rejected.
    pub fn from_json(s: &str) -> Result<Self, UsageError> {
        let bad = |e: serde_json::Error| UsageError(format!("invalid JSON config: {e}"));
        let mut doc: serde_json::Map<String, serde_json::Value> = serde_json::from_str(s).map_err(bad)?;
        let command = doc.remove("command").map(serde_json::from_value).transpose().map_err(bad)?;
        let options = serde_json::from_value(serde_json::Value::Object(doc)).map_err(bad)?;
        Ok(Self { command, options })
    }
}

impl Options {
    /// Fields set here win; the rest come from `base`.
    pub fn merged_over(self, base: Options) -> Options {
        Options {
            scenario: self.scenario.or(base.scenario),
            nr: self.nr.or(base.nr),
            jr: self.jr.or(base.jr),
            two_jr: self.two_jr.or(base.two_jr),
            method: self.method.or(base.method),
            order: self.order.or(base.order),
            tol: self.tol.or(base.tol),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            metric: self.metric.or(base.metric),
            from: self.from.or(base.from),
            to: self.to.or(base.to),
            samples: self.samples.or(base.samples),
            input: self.input.or(base.input),
        }
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if let Some(t) = self.tol {
            if t.is_nan() || t <= 0.0 {
                return Err(UsageError("--tol must be positive".into()));
            }
        }
        if self.order == Some(0) {
            return Err(UsageError("--order must be at least 1".into()));
        }
        Ok(())
    }

    /// The single scenario named by `--scenario` and its size flag.
    pub fn scenario_id(&self) -> Result<ScenarioId, UsageError> {
        let kind = self.scenario.ok_or_else(|| UsageError("--scenario is required".into()))?;
        let id = match kind {
            ScenarioKind::Phase => ScenarioId::PhaseReference {
                n_r: self.nr.ok_or_else(|| UsageError("--nr is required for phase".into()))?,
            },
            ScenarioKind::Cartesian => match (self.jr, self.two_jr) {
                (Some(j_r), _) => ScenarioId::CartesianFrame { j_r },
                (None, Some(t)) => ScenarioId::cartesian_from_two_j(t).map_err(|e| UsageError(e.to_string()))?,
                (None, None) => return Err(UsageError("--jr is required for cartesian".into())),
            },
            ScenarioKind::Direction => match (self.two_jr, self.jr) {
                (Some(two_j_r), _) => ScenarioId::DirectionIndicator { two_j_r },
                (None, Some(j)) => ScenarioId::DirectionIndicator { two_j_r: 2 * j },
                (None, None) => return Err(UsageError("--two-jr is required for direction".into())),
            },
        };
        id.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(id)
    }
}

pub fn scenario_at(kind: ScenarioKind, size: u32) -> ScenarioId {
    match kind {
        ScenarioKind::Phase => ScenarioId::PhaseReference { n_r: size },
        ScenarioKind::Cartesian => ScenarioId::CartesianFrame { j_r: size },
        ScenarioKind::Direction => ScenarioId::DirectionIndicator { two_j_r: size },
    }
}

/// Default verification grid.
pub fn default_grid(kind: ScenarioKind) -> std::ops::RangeInclusive<u32> {
    match kind {
        ScenarioKind::Phase => 1..=8,
        ScenarioKind::Cartesian => 1..=4,
        ScenarioKind::Direction => 1..=8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let cfg = RunConfig::from_json(r#"{"command": "verify", "scenario": "phase", "nr": 2, "tol": 1e-9}"#).unwrap();
        assert_eq!(cfg.command, Some(Command::Verify));
        let cli = Options { nr: Some(5), ..Options::default() };
        let m = cli.merged_over(cfg.options);
        assert_eq!((m.scenario, m.nr, m.tol), (Some(ScenarioKind::Phase), Some(5), Some(1e-9)));
        assert_eq!(m.scenario_id().unwrap(), ScenarioId::PhaseReference { n_r: 5 });
    }

    #[test]
    fn config_round_trips() {
        let cfg =
            RunConfig::from_json(r#"{"command": "sweep", "metric": "entanglement_fidelity", "two_jr": 3}"#).unwrap();
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(RunConfig::from_json(r#"{"command": "nope"}"#).is_err());
    }

    #[test]
    fn size_flags_per_scenario() {
        let o = |s, jr, two_jr| Options { scenario: Some(s), jr, two_jr, ..Options::default() };
        assert_eq!(
            o(ScenarioKind::Direction, Some(2), None).scenario_id().unwrap(),
            ScenarioId::DirectionIndicator { two_j_r: 4 }
        );
        assert_eq!(
            o(ScenarioKind::Cartesian, None, Some(4)).scenario_id().unwrap(),
            ScenarioId::CartesianFrame { j_r: 2 }
        );
        assert!(o(ScenarioKind::Cartesian, None, Some(5)).scenario_id().is_err());
        assert!(o(ScenarioKind::Cartesian, Some(0), None).scenario_id().is_err());
        assert!(Options { tol: Some(0.0), ..Options::default() }.validate().is_err());
        assert!(Options { order: Some(0), ..Options::default() }.validate().is_err());
    }
}
