use super::config::SuiteConfig;
use super::evaluate::{evaluate_cells, CellReport};
use super::pipeline::ScenarioTables;
use crate::domain::Variant;
use crate::error::{Error, Result};
use crate::planner::PolicyKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    /// Mean T(goal) averaged over the safe cells (all cells if none).
    pub safe_mean_time_s: f64,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub selected_beta: f64,
}

impl SweepReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("beta       safe T(goal)  unsafe near-miss\n");
        for r in &self.rows {
            let unsafe_cells: Vec<&CellReport> = r.cells.iter().filter(|c| c.variant == Variant::Unsafe).collect();
            let nm = if unsafe_cells.is_empty() {
                f64::NAN
            } else {
                unsafe_cells.iter().map(|c| c.near_miss_rate).sum::<f64>() / unsafe_cells.len() as f64
            };
            s.push_str(&format!("{:<10} {:>12.3}  {:>16.3}\n", r.beta, r.safe_mean_time_s, nm));
        }
        s.push_str(&format!("selected beta {}\n", self.selected_beta));
        s
    }
}

/// Evaluates IPL for every β in `grid` and selects the β with the smallest
/// mean time to goal over safe cells; ties go to the earlier grid entry.
pub fn sweep_beta(cfg: &SuiteConfig, tables: &[ScenarioTables], grid: &[f64]) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::Config("beta grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &beta in grid {
        let mut planner = cfg.planner;
        planner.beta = beta;
        let cells = evaluate_cells(cfg, tables, &[PolicyKind::Ipl], &planner)?;
        let safe: Vec<&CellReport> = cells.iter().filter(|c| c.variant == Variant::Safe).collect();
        let pool: Vec<&CellReport> = if safe.is_empty() { cells.iter().collect() } else { safe };
        let safe_mean_time_s = pool.iter().map(|c| c.mean_time_s).sum::<f64>() / pool.len() as f64;
        rows.push(SweepRow {
            beta,
            safe_mean_time_s,
            cells,
        });
    }
    let best = rows
        .iter()
        .fold(None::<&SweepRow>, |acc, r| match acc {
            Some(a) if a.safe_mean_time_s <= r.safe_mean_time_s => Some(a),
            _ => Some(r),
        })
        .expect("grid is non-empty");
    Ok(SweepReport {
        selected_beta: best.beta,
        rows,
    })
}
