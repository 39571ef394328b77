//! Scenario configuration: a TOML file overlaid by command-line flags.
//!
//! ```toml
//! scenario = "sweep-zeta"
//!
//! [grid]
//! min = 0.01
//! max = 100.0
//! points = 201
//! spacing = "log"        # or "linear"
//!
//! [parameters]
//! g2_aa = 0.25
//! g2_bb = 1.0
//! g2_ab = 1.0
//!
//! [input]                # state scenarios
//! a = "fock(1)"
//! b = "coherent(0.5+0i)"
//! record = "record.kv"   # state-run only, instead of a and b
//!
//! [output]
//! path = "zeta.csv"
//! format = "csv"         # or "kv" (alias "keyvalue")
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::format::OutputFormat;
use crate::grid::Spacing;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SweepG2auto,
    SweepZeta,
    HomDip,
    FringeScan,
    StateRun,
    PaperCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::SweepG2auto,
        Scenario::SweepZeta,
        Scenario::HomDip,
        Scenario::FringeScan,
        Scenario::StateRun,
        Scenario::PaperCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SweepG2auto => "sweep-g2auto",
            Scenario::SweepZeta => "sweep-zeta",
            Scenario::HomDip => "hom-dip",
            Scenario::FringeScan => "fringe-scan",
            Scenario::StateRun => "state-run",
            Scenario::PaperCheck => "paper-check",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CliError::Config(format!("unknown scenario `{name}`")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub zeta: Option<f64>,
    pub g2_aa: Option<f64>,
    pub g2_bb: Option<f64>,
    pub g2_ab: Option<f64>,
    pub cutoff: Option<usize>,
    pub tail_tol: Option<f64>,
    pub seed: Option<u64>,
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub a: Option<String>,
    pub b: Option<String>,
    pub record: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<String>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn pick<T: Clone>(over: &Option<T>, base: &Option<T>) -> Option<T> {
    over.clone().or_else(|| base.clone())
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        if let Some(name) = &cfg.scenario {
            Scenario::from_name(name)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Field-wise overlay: every value set in `over` wins.
    pub fn overlay(&self, over: &ScenarioConfig) -> ScenarioConfig {
        let (b, o) = (self, over);
        ScenarioConfig {
            scenario: pick(&o.scenario, &b.scenario),
            grid: GridConfig {
                min: pick(&o.grid.min, &b.grid.min),
                max: pick(&o.grid.max, &b.grid.max),
                points: pick(&o.grid.points, &b.grid.points),
                spacing: pick(&o.grid.spacing, &b.grid.spacing),
            },
            parameters: Parameters {
                zeta: pick(&o.parameters.zeta, &b.parameters.zeta),
                g2_aa: pick(&o.parameters.g2_aa, &b.parameters.g2_aa),
                g2_bb: pick(&o.parameters.g2_bb, &b.parameters.g2_bb),
                g2_ab: pick(&o.parameters.g2_ab, &b.parameters.g2_ab),
                cutoff: pick(&o.parameters.cutoff, &b.parameters.cutoff),
                tail_tol: pick(&o.parameters.tail_tol, &b.parameters.tail_tol),
                seed: pick(&o.parameters.seed, &b.parameters.seed),
                order: pick(&o.parameters.order, &b.parameters.order),
            },
            input: InputConfig {
                a: pick(&o.input.a, &b.input.a),
                b: pick(&o.input.b, &b.input.b),
                record: pick(&o.input.record, &b.input.record),
            },
            output: OutputConfig {
                path: pick(&o.output.path, &b.output.path),
                format: pick(&o.output.format, &b.output.format),
            },
        }
    }

    /// Fails if the file names a different scenario than the one being run.
    pub fn check_scenario(&self, running: Scenario) -> Result<()> {
        match &self.scenario {
            Some(name) if Scenario::from_name(name)? != running => Err(CliError::Config(format!(
                "config is for `{name}` but `{}` was requested",
                running.name()
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
scenario = "sweep-zeta"
[grid]
min = 0.1
points = 11
spacing = "linear"
[parameters]
g2_aa = 0.5
[output]
format = "kv"
"#;

    #[test]
    fn parses_and_overlays() {
        let cfg = ScenarioConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.grid.points, Some(11));
        assert_eq!(cfg.grid.spacing, Some(Spacing::Linear));
        assert_eq!(cfg.output.format, Some(OutputFormat::Kv));

        let flags = ScenarioConfig {
            grid: GridConfig {
                points: Some(5),
                ..Default::default()
            },
            ..Default::default()
        };
        let merged = cfg.overlay(&flags);
        assert_eq!(merged.grid.points, Some(5));
        assert_eq!(merged.grid.min, Some(0.1));
        assert_eq!(merged.parameters.g2_aa, Some(0.5));
        assert!(merged.check_scenario(Scenario::SweepZeta).is_ok());
        assert!(merged.check_scenario(Scenario::HomDip).is_err());
    }

    #[test]
    fn keyvalue_is_kv() {
        let cfg = ScenarioConfig::parse("[output]\nformat = \"keyvalue\"").unwrap();
        assert_eq!(cfg.output.format, Some(OutputFormat::Kv));
    }

    #[test]
    fn rejects_unknown_keys_and_scenarios() {
        assert!(ScenarioConfig::parse("bogus = 1").is_err());
        assert!(ScenarioConfig::parse("[grid]\nstep = 2").is_err());
        assert!(ScenarioConfig::parse("scenario = \"nope\"").is_err());
        assert!(ScenarioConfig::parse("[grid]\nspacing = \"cubic\"").is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_name(s.name()).unwrap(), s);
        }
    }
}
