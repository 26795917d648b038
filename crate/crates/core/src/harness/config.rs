use crate::domain::{ScenarioConfig, ScenarioKind, Variant};
use crate::error::{Error, Result};
use crate::human_model::{CautiousExpert, DemoCounts, GpHyperparams, SyntheticDriverParams};
use crate::planner::{PlannerConfig, PolicyKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Near-miss rate observed in daily traffic, used as a reference line.
pub const NEAR_MISS_REFERENCE: f64 = 0.35;

/// Which scenario cells to run, plus optional replacements for presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kinds: Vec<ScenarioKind>,
    pub variants: Vec<Variant>,
    /// Full scenario definitions replacing the preset with the same kind
    /// and variant.
    #[serde(default, rename = "override", skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ScenarioConfig>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            kinds: ScenarioKind::ALL.to_vec(),
            variants: Variant::ALL.to_vec(),
            overrides: Vec::new(),
        }
    }
}

/// History length, kernel hyperparameters and the study grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSection {
    /// History length k used by the planner and the policy table.
    pub k: usize,
    pub ell_d: f64,
    pub ell_v: f64,
    pub ell_a: f64,
    pub sigma_n: f64,
    pub max_points: usize,
    /// History lengths compared by the held-out study.
    pub study_k: Vec<usize>,
}

impl Default for GpSection {
    fn default() -> Self {
        let h = GpHyperparams::default();
        GpSection {
            k: 2,
            ell_d: h.ell_d,
            ell_v: h.ell_v,
            ell_a: h.ell_a,
            sigma_n: h.sigma_n,
            max_points: h.max_points,
            study_k: vec![0, 1, 2, 3],
        }
    }
}

impl GpSection {
    pub fn hyper(&self) -> GpHyperparams {
        GpHyperparams {
            ell_d: self.ell_d,
            ell_v: self.ell_v,
            ell_a: self.ell_a,
            sigma_n: self.sigma_n,
            max_points: self.max_points,
        }
    }
}

/// Batch protocol settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    /// Episodes per (scenario, variant, policy) cell.
    pub runs: usize,
    /// Master seed; every episode seed derives from it.
    pub seed: u64,
    pub policies: Vec<PolicyKind>,
    /// An episode is a near-miss if any step's TMTC is below this (s).
    pub near_miss_tmtc: f64,
    /// β values tried by the sweep.
    pub beta_grid: Vec<f64>,
    /// Seed for demonstration generation.
    pub demo_seed: u64,
    pub demos: DemoCounts,
    pub expert: CautiousExpert,
    /// Worker threads for episode fan-out; 0 uses every core.
    pub threads: usize,
    /// Directory holding prebuilt tables; unset builds them in memory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<PathBuf>,
}

impl Default for SuiteSection {
    fn default() -> Self {
        SuiteSection {
            runs: 200,
            seed: 2024,
            policies: PolicyKind::SUITE.to_vec(),
            near_miss_tmtc: 1.0,
            beta_grid: vec![0.1, 0.3, 1.0, 3.0, 10.0],
            demo_seed: 11,
            demos: DemoCounts::default(),
            expert: CautiousExpert::default(),
            threads: 0,
            tables: None,
        }
    }
}

/// Complete configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub gp: GpSection,
    #[serde(default, rename = "synthetic-human")]
    pub synthetic_human: SyntheticDriverParams,
    #[serde(default)]
    pub suite: SuiteSection,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<SuiteConfig> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SuiteConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("suite config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.kinds.is_empty() || self.scenario.variants.is_empty() {
            return Err(Error::Config("scenario kinds and variants must be non-empty".into()));
        }
        for o in &self.scenario.overrides {
            o.validate()?;
        }
        self.planner.validate()?;
        self.gp.hyper().validate()?;
        if self.gp.study_k.is_empty() {
            return Err(Error::Config("gp.study_k must be non-empty".into()));
        }
        self.synthetic_human.validate()?;
        let s = &self.suite;
        if s.runs == 0 {
            return Err(Error::Config("suite.runs must be positive".into()));
        }
        if s.policies.is_empty() {
            return Err(Error::Config("suite.policies must be non-empty".into()));
        }
        if !(s.near_miss_tmtc > 0.0 && s.near_miss_tmtc.is_finite()) {
            return Err(Error::Config("suite.near_miss_tmtc must be positive".into()));
        }
        if s.beta_grid.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(Error::Config("suite.beta_grid entries must be non-negative".into()));
        }
        if s.demos.participants == 0 || s.demos.per_intention == 0 {
            return Err(Error::Config("suite.demos counts must be positive".into()));
        }
        Ok(())
    }

    /// Scenario definition for one cell: the override if given, else the
    /// preset.
    pub fn scenario(&self, kind: ScenarioKind, variant: Variant) -> ScenarioConfig {
        self.scenario
            .overrides
            .iter()
            .find(|o| o.kind == kind && o.variant == variant)
            .cloned()
            .unwrap_or_else(|| ScenarioConfig::preset(kind, variant))
    }

    /// Configured cells in kind-major order.
    pub fn cells(&self) -> Vec<(ScenarioKind, Variant)> {
        self.scenario
            .kinds
            .iter()
            .flat_map(|&k| self.scenario.variants.iter().map(move |&v| (k, v)))
            .collect()
    }
}

/// Reads a single scenario definition.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ScenarioConfig = toml::from_str(&text).map_err(|e| toml_error(&text, e))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn scenario_to_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("scenario config serializes")
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Parse {
        line,
        message: e.message().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = SuiteConfig::default();
        let text = cfg.to_toml();
        assert_eq!(SuiteConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SuiteConfig::from_toml("").unwrap(), SuiteConfig::default());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(
            SuiteConfig::from_toml("[suite]\nbogus = 1\n"),
            Err(Error::Parse { .. })
        ));
        let mut cfg = SuiteConfig::default();
        cfg.suite.runs = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(SuiteConfig::from_toml("[suite]\npolicies = [\"nope\"]\n").is_err());
    }
}
