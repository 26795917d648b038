use super::config::SuiteConfig;
use crate::domain::ScenarioKind;
use crate::error::{Error, Result};
use crate::guided::SafeProbTable;
use crate::human_model::{
    cell_query_points, generate_demonstrations, human_bin_representatives, GpModel, GuideDemo,
    HumanDemo, PolicyTable,
};
use std::fs;
use std::path::{Path, PathBuf};

/// Learned tables for one scenario kind, shared by both variants.
#[derive(Debug, Clone)]
pub struct ScenarioTables {
    pub kind: ScenarioKind,
    pub policy: PolicyTable,
    pub safe: SafeProbTable,
}

/// Demonstrations for `kind` as configured.
pub fn demonstrations(cfg: &SuiteConfig, kind: ScenarioKind) -> Result<(Vec<HumanDemo>, Vec<GuideDemo>)> {
    generate_demonstrations(
        kind,
        cfg.suite.demos,
        &cfg.synthetic_human,
        cfg.suite.expert,
        cfg.suite.demo_seed,
    )
}

/// Fits both intention models and discretizes them into tables.
pub fn tables_from_demos(
    cfg: &SuiteConfig,
    kind: ScenarioKind,
    human: &[HumanDemo],
    guide: &[GuideDemo],
) -> Result<ScenarioTables> {
    let human: Vec<HumanDemo> = human.iter().filter(|d| d.kind == kind).cloned().collect();
    let guide: Vec<GuideDemo> = guide.iter().filter(|d| d.kind == kind).cloned().collect();
    let [agg, con] = GpModel::fit_intentions(&human, cfg.gp.k, &cfg.gp.hyper())?;
    let a = cfg.scenario(kind, cfg.scenario.variants[0]).robot_accel;
    let robot_reps = [-a, 0.0, a];
    let human_reps = human_bin_representatives(&human, robot_reps);
    let policy = PolicyTable::build(&agg, &con, robot_reps, human_reps, &cell_query_points(&human))?;
    let mut safe = SafeProbTable::new(kind);
    safe.update(&guide)?;
    Ok(ScenarioTables { kind, policy, safe })
}

/// Tables for every configured kind: read from `suite.tables` when set,
/// otherwise regenerated from synthetic demonstrations.
pub fn prepare_tables(cfg: &SuiteConfig) -> Result<Vec<ScenarioTables>> {
    cfg.scenario
        .kinds
        .iter()
        .map(|&kind| match &cfg.suite.tables {
            Some(dir) => read_tables(dir, kind),
            None => {
                let (h, g) = demonstrations(cfg, kind)?;
                tables_from_demos(cfg, kind, &h, &g)
            }
        })
        .collect()
}

pub fn policy_table_path(dir: &Path, kind: ScenarioKind) -> PathBuf {
    dir.join(format!("{kind}.policy.txt"))
}

pub fn safe_table_path(dir: &Path, kind: ScenarioKind) -> PathBuf {
    dir.join(format!("{kind}.safe.txt"))
}

pub fn write_tables(dir: &Path, t: &ScenarioTables) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(policy_table_path(dir, t.kind), t.policy.to_text())?;
    fs::write(safe_table_path(dir, t.kind), t.safe.to_text())?;
    Ok(())
}

/// Reads both tables for `kind`; a missing file is a configuration error.
pub fn read_tables(dir: &Path, kind: ScenarioKind) -> Result<ScenarioTables> {
    let read = |p: PathBuf| -> Result<String> {
        if !p.is_file() {
            return Err(Error::Config(format!("missing table {}", p.display())));
        }
        Ok(fs::read_to_string(p)?)
    };
    let policy = PolicyTable::parse(&read(policy_table_path(dir, kind))?)?;
    let safe = SafeProbTable::parse(&read(safe_table_path(dir, kind))?)?;
    if safe.kind() != kind {
        return Err(Error::Config(format!("safe table in {} is for {}", dir.display(), safe.kind())));
    }
    Ok(ScenarioTables { kind, policy, safe })
}
