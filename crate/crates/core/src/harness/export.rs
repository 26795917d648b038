use super::evaluate::{CellReport, MetricsReport};
use crate::domain::{ScenarioKind, Variant};
use crate::error::{Error, Result};
use crate::planner::PolicyKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Metric names, one exported row each per cell.
pub const METRICS: [&str; 7] = [
    "mean_time_s",
    "se_time_s",
    "near_miss_rate",
    "collision_rate",
    "timeouts",
    "runs",
    "above_reference",
];

pub const CSV_HEADER: &str = "scenario,variant,policy,metric,value";
pub const STEPS_HEADER: &str = "scenario,variant,policy,step,time_s,p_conservative,p_correct,d_goal";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Option<ExportFormat> {
        match s {
            "csv" => Some(ExportFormat::Csv),
            "json" => Some(ExportFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub scenario: ScenarioKind,
    pub variant: Variant,
    pub policy: PolicyKind,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub master_seed: u64,
    pub runs: usize,
    pub beta: f64,
    pub near_miss_tmtc: f64,
    pub near_miss_reference: f64,
    /// Episode seeds per `scenario-variant`, shared by all policies.
    pub seeds: BTreeMap<String, Vec<u64>>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<MetricRow>,
}

fn metric_value(c: &CellReport, metric: &str, reference: f64) -> f64 {
    match metric {
        "mean_time_s" => c.mean_time_s,
        "se_time_s" => c.se_time_s,
        "near_miss_rate" => c.near_miss_rate,
        "collision_rate" => c.collision_rate,
        "timeouts" => c.timeouts as f64,
        "runs" => c.runs as f64,
        "above_reference" => f64::from(u8::from(c.near_miss_rate > reference)),
        _ => unreachable!("unknown metric {metric}"),
    }
}

pub fn report_rows(report: &MetricsReport) -> Vec<MetricRow> {
    report
        .cells
        .iter()
        .flat_map(|c| {
            METRICS.iter().map(move |m| MetricRow {
                scenario: c.kind,
                variant: c.variant,
                policy: c.policy,
                metric: m.to_string(),
                value: metric_value(c, m, report.near_miss_reference),
            })
        })
        .collect()
}

pub fn to_csv(report: &MetricsReport) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in report_rows(report) {
        let _ = writeln!(s, "{},{},{},{},{}", r.scenario, r.variant, r.policy, r.metric, r.value);
    }
    s
}

/// Reads rows written by [`to_csv`].
pub fn read_csv(text: &str) -> Result<Vec<MetricRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header '{CSV_HEADER}'"))),
    }
    lines
        .map(|(i, l)| {
            let n = i + 1;
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != 5 {
                return Err(Error::parse(n, "expected five fields"));
            }
            Ok(MetricRow {
                scenario: ScenarioKind::parse(f[0]).ok_or_else(|| Error::parse(n, "unknown scenario"))?,
                variant: Variant::parse(f[1]).ok_or_else(|| Error::parse(n, "unknown variant"))?,
                policy: PolicyKind::parse(f[2]).ok_or_else(|| Error::parse(n, "unknown policy"))?,
                metric: METRICS
                    .iter()
                    .find(|m| **m == f[3])
                    .ok_or_else(|| Error::parse(n, format!("unknown metric '{}'", f[3])))?
                    .to_string(),
                value: f[4].parse().map_err(|_| Error::parse(n, "invalid value"))?,
            })
        })
        .collect()
}

pub fn to_json(report: &MetricsReport) -> String {
    let mut seeds = BTreeMap::new();
    for c in &report.cells {
        seeds
            .entry(format!("{}-{}", c.kind, c.variant))
            .or_insert_with(|| c.seeds.clone());
    }
    let doc = JsonReport {
        metadata: ReportMetadata {
            master_seed: report.master_seed,
            runs: report.runs,
            beta: report.beta,
            near_miss_tmtc: report.near_miss_tmtc,
            near_miss_reference: report.near_miss_reference,
            seeds,
            flags: report.flags.clone(),
        },
        rows: report_rows(report),
    };
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

pub fn read_json(text: &str) -> Result<JsonReport> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
}

/// Per-step belief and distance trajectories, one row per cell and step.
pub fn steps_csv(report: &MetricsReport, dt: impl Fn(ScenarioKind, Variant) -> f64) -> String {
    let mut s = format!("{STEPS_HEADER}\n");
    for c in &report.cells {
        let dt = dt(c.kind, c.variant);
        for t in 0..c.p_conservative.len() {
            let _ = writeln!(
                s,
                "{},{},{},{t},{},{},{},{}",
                c.kind,
                c.variant,
                c.policy,
                t as f64 * dt,
                c.p_conservative[t],
                c.p_correct[t],
                c.d_goal[t]
            );
        }
    }
    s
}

/// Companion path for the per-step file: `<stem>.steps.csv`.
pub fn steps_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.steps.csv"))
}

/// Writes the report and its per-step companion file.
pub fn export_report(
    report: &MetricsReport,
    path: &Path,
    format: ExportFormat,
    dt: impl Fn(ScenarioKind, Variant) -> f64,
) -> Result<()> {
    let body = match format {
        ExportFormat::Csv => to_csv(report),
        ExportFormat::Json => to_json(report),
    };
    fs::write(path, body)?;
    fs::write(steps_path(path), steps_csv(report, dt))?;
    Ok(())
}
