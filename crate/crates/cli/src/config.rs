//! Scenario configuration files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phonon_blockade::model::{map_physical_params, PhysicalParams, ReducedParams};
use phonon_blockade::qpd::PhaseSpaceGrid;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "PHONON_BLOCKADE_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3a")]
    Fig3a,
    #[serde(rename = "fig3b")]
    Fig3b,
    #[serde(rename = "fig4a")]
    Fig4a,
    #[serde(rename = "fig4b")]
    Fig4b,
    #[serde(rename = "fig5a")]
    Fig5a,
    #[serde(rename = "fig5b")]
    Fig5b,
    #[serde(rename = "full-model-check")]
    FullModelCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Fig2,
        Scenario::Fig3a,
        Scenario::Fig3b,
        Scenario::Fig4a,
        Scenario::Fig4b,
        Scenario::Fig5a,
        Scenario::Fig5b,
        Scenario::FullModelCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3a => "fig3a",
            Scenario::Fig3b => "fig3b",
            Scenario::Fig4a => "fig4a",
            Scenario::Fig4b => "fig4b",
            Scenario::Fig5a => "fig5a",
            Scenario::Fig5b => "fig5b",
            Scenario::FullModelCheck => "full-model-check",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown scenario '{s}' (known: {})", known_names())))
    }
}

fn known_names() -> String {
    Scenario::ALL.map(Scenario::name).join(", ")
}

/// Kerr-model parameters as written in a config file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrBlock {
    pub kappa: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub nbar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McwfConfig {
    pub n_traj: usize,
    pub master_seed: u64,
}

/// Output sampling of a time evolution: `samples` points on [0, t_max].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples - 1;
        (0..=n).map(|k| self.t_max * k as f64 / n as f64).collect()
    }
}

/// Values of the swept parameter, either listed or as an inclusive linear range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    List { values: Vec<f64> },
    Range { start: f64, stop: f64, points: usize },
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::List { values } => values.clone(),
            Sweep::Range { start, stop, points } => {
                if *points == 1 {
                    return vec![*start];
                }
                let n = (*points - 1) as f64;
                (0..*points).map(|k| start + (stop - start) * k as f64 / n).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<KerrBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcwf: Option<McwfConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PhaseSpaceGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        match (&self.reduced, &self.physical) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either 'reduced' or 'physical' parameters, not both".into())),
            (None, None) => return Err(CliError::Config("missing parameter block: 'reduced' or 'physical'".into())),
            _ => {}
        }
        if self.scenario == Scenario::FullModelCheck && self.physical.is_none() {
            return Err(CliError::Config("full-model-check needs a 'physical' parameter block".into()));
        }
        if let Some(p) = &self.physical {
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(dim) = self.dim {
            if dim < 2 {
                return Err(CliError::Config(format!("dim = {dim} is below 2")));
            }
        }
        if let Some(m) = &self.mcwf {
            if m.n_traj == 0 {
                return Err(CliError::Config("mcwf.n_traj must be positive".into()));
            }
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(t) = &self.times {
            if !(t.t_max > 0.0) || !t.t_max.is_finite() || t.samples < 2 {
                return Err(CliError::Config("times needs t_max > 0 and at least 2 samples".into()));
            }
        }
        if let Some(s) = &self.sweep {
            let v = s.values();
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Config("sweep values must be finite and non-empty".into()));
            }
            if let Sweep::Range { points: 0, .. } = s {
                return Err(CliError::Config("sweep range needs at least one point".into()));
            }
        }
        self.reduced_params()?;
        Ok(())
    }

    /// Kerr parameters, mapped from the device block when that is what was given.
    pub fn reduced_params(&self) -> CliResult<ReducedParams> {
        let r = match (&self.reduced, &self.physical) {
            (Some(k), _) => ReducedParams::kerr(k.kappa, k.epsilon, k.gamma, k.nbar),
            (None, Some(p)) => map_physical_params(p),
            (None, None) => return Err(CliError::Config("missing parameter block".into())),
        };
        r.map_err(|e| CliError::Config(e.to_string()))
    }

    /// Output directory: explicit override, then the config, then `$PHONON_BLOCKADE_OUT/<scenario>`,
    /// then `results/<scenario>`.
    pub fn resolve_output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_override {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        let root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"));
        root.join(self.scenario.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"{
        "scenario": "fig2",
        "reduced": {"kappa": 30, "epsilon": 3, "gamma": 1, "nbar": 0.01}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ScenarioConfig::from_json(FIG2).unwrap();
        assert_eq!(cfg.scenario, Scenario::Fig2);
        let r = cfg.reduced_params().unwrap();
        assert_eq!((r.kappa, r.epsilon, r.gamma, r.nbar), (30.0, 3.0, 1.0, 0.01));
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = ScenarioConfig::from_json(FIG2).unwrap();
        cfg.sweep = Some(Sweep::Range { start: 0.5, stop: 8.0, points: 41 });
        cfg.mcwf = Some(McwfConfig { n_traj: 10, master_seed: 3 });
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_both_or_neither_parameter_block() {
        let neither = r#"{"scenario": "fig2"}"#;
        assert!(matches!(ScenarioConfig::from_json(neither), Err(CliError::Config(_))));
        let both = r#"{
            "scenario": "fig2",
            "reduced": {"kappa": 30, "epsilon": 3, "gamma": 1, "nbar": 0.01},
            "physical": {"charging_energy": 0.05, "cooper_pair_number": 1, "zero_point_amplitude": 1,
                         "distance": 1, "magnetic_field": 0, "probe_current": 0, "length": 1,
                         "omega": 1, "omega_qubit": 2, "rabi": 0.8, "omega_probe": 1,
                         "temperature": 0, "gamma": 0.01}
        }"#;
        assert!(matches!(ScenarioConfig::from_json(both), Err(CliError::Config(_))));
    }

    #[test]
    fn rejects_unknown_scenario_and_fields() {
        let bad = r#"{"scenario": "fig9", "reduced": {"kappa": 1, "epsilon": 0.1, "gamma": 1, "nbar": 0}}"#;
        assert!(ScenarioConfig::from_json(bad).is_err());
        let extra = r#"{"scenario": "fig2", "reduced": {"kappa": 1, "epsilon": 0.1, "gamma": 1, "nbar": 0}, "colour": 1}"#;
        assert!(ScenarioConfig::from_json(extra).is_err());
        assert!("fig9".parse::<Scenario>().is_err());
        assert_eq!("full-model-check".parse::<Scenario>().unwrap(), Scenario::FullModelCheck);
    }

    #[test]
    fn full_model_check_requires_device_parameters() {
        let cfg = r#"{"scenario": "full-model-check", "reduced": {"kappa": 1, "epsilon": 0.1, "gamma": 1, "nbar": 0}}"#;
        assert!(ScenarioConfig::from_json(cfg).is_err());
    }

    #[test]
    fn sweep_ranges_include_both_ends() {
        let v = Sweep::Range { start: 1.0, stop: 60.0, points: 40 }.values();
        assert_eq!(v.len(), 40);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[39], 60.0);
        let t = TimeGrid { t_max: 10.0, samples: 41 }.times();
        assert_eq!(t[40], 10.0);
        assert_eq!(t[1], 0.25);
    }

    #[test]
    fn output_dir_precedence() {
        let mut cfg = ScenarioConfig::from_json(FIG2).unwrap();
        assert_eq!(cfg.resolve_output_dir(Some(Path::new("x"))), PathBuf::from("x"));
        cfg.output_dir = Some(PathBuf::from("y"));
        assert_eq!(cfg.resolve_output_dir(None), PathBuf::from("y"));
    }
}
