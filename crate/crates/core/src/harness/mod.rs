//! Batch evaluation: suite configuration, table pipeline, episode fan-out,
//! metric aggregation, significance tests, export and the β sweep.

mod config;
mod evaluate;
mod export;
mod pipeline;
mod stats;
mod sweep;

pub use config::{
    load_scenario, scenario_to_toml, GpSection, ScenarioSection, SuiteConfig, SuiteSection,
    NEAR_MISS_REFERENCE,
};
pub use evaluate::{
    episode_seeds, evaluate, evaluate_cells, run_seeded_episode, CellReport, EpisodeSummary,
    MetricsReport,
};
pub use export::{
    export_report, read_csv, read_json, report_rows, steps_csv, steps_path, to_csv, to_json,
    ExportFormat, JsonReport, MetricRow, ReportMetadata, CSV_HEADER, METRICS, STEPS_HEADER,
};
pub use pipeline::{
    demonstrations, policy_table_path, prepare_tables, read_tables, safe_table_path,
    tables_from_demos, write_tables, ScenarioTables,
};
pub use stats::{mean_and_se, two_proportion_z_test, welch_from_summary, welch_t_test, TestResult};
pub use sweep::{sweep_beta, SweepReport, SweepRow};
