use ipl_core::domain::{ScenarioKind, Variant};
use ipl_core::harness::{
    evaluate, evaluate_cells, export_report, prepare_tables, read_csv, read_json, read_tables, report_rows,
    steps_path, sweep_beta, to_csv, to_json, write_tables, ExportFormat, ScenarioTables, SuiteConfig, METRICS,
    NEAR_MISS_REFERENCE, STEPS_HEADER,
};
use ipl_core::planner::PolicyKind;
use ipl_core::Error;
use std::sync::OnceLock;

fn small_config() -> SuiteConfig {
    let mut cfg = SuiteConfig::default();
    cfg.scenario.kinds = vec![ScenarioKind::Intersection];
    cfg.suite.runs = 4;
    cfg.suite.seed = 99;
    // No wall-clock cut-offs, so repeated runs match exactly.
    cfg.planner.budget_s = 0.0;
    cfg
}

fn tables() -> &'static Vec<ScenarioTables> {
    static T: OnceLock<Vec<ScenarioTables>> = OnceLock::new();
    T.get_or_init(|| prepare_tables(&small_config()).unwrap())
}

#[test]
fn report_shape_and_exports() {
    let cfg = small_config();
    let report = evaluate(&cfg, tables()).unwrap();
    assert_eq!(report.cells.len(), 2 * 4);
    for c in &report.cells {
        assert_eq!(c.runs, 4);
        assert_eq!(c.seeds.len(), 4);
        assert!((0.0..=1.0).contains(&c.near_miss_rate));
        assert!(c.mean_time_s > 0.0);
        assert_eq!(c.p_conservative.len(), c.d_goal.len());
        assert_eq!(c.p_conservative.first(), Some(&0.5));
    }
    // Same seeds for every policy of a scenario cell.
    let seeds: Vec<&Vec<u64>> = report
        .cells
        .iter()
        .filter(|c| c.variant == Variant::Safe)
        .map(|c| &c.seeds)
        .collect();
    assert!(seeds.windows(2).all(|w| w[0] == w[1]));

    let rows = report_rows(&report);
    assert_eq!(rows.len(), 1 * 2 * 4 * METRICS.len());
    assert_eq!(read_csv(&to_csv(&report)).unwrap(), rows);

    let json = to_json(&report);
    let doc = read_json(&json).unwrap();
    assert_eq!(doc.metadata.near_miss_reference, 0.35);
    assert_eq!(doc.metadata.near_miss_reference, NEAR_MISS_REFERENCE);
    assert_eq!(doc.rows, rows);
    assert!(json.contains("\"near_miss_reference\": 0.35"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    export_report(&report, &path, ExportFormat::Csv, |k, v| cfg.scenario(k, v).dt).unwrap();
    assert_eq!(read_csv(&std::fs::read_to_string(&path).unwrap()).unwrap(), rows);
    let steps = std::fs::read_to_string(steps_path(&path)).unwrap();
    assert!(steps.starts_with(STEPS_HEADER));
    let expected: usize = report.cells.iter().map(|c| c.p_conservative.len()).sum();
    assert_eq!(steps.lines().count(), expected + 1);
    let bad = dir.path().join("missing").join("report.json");
    assert!(matches!(
        export_report(&report, &bad, ExportFormat::Json, |_, _| 0.33),
        Err(Error::Io(_))
    ));
}

#[test]
fn evaluation_is_deterministic() {
    let cfg = small_config();
    let a = evaluate(&cfg, tables()).unwrap();
    let b = evaluate(&cfg, tables()).unwrap();
    assert_eq!(to_json(&a), to_json(&b));
    assert_eq!(to_csv(&a), to_csv(&b));
    let mut other = cfg.clone();
    other.suite.seed += 1;
    let c = evaluate(&other, tables()).unwrap();
    assert_ne!(a.cells[0].seeds, c.cells[0].seeds);
}

#[test]
fn zero_beta_sweep_entry_reproduces_myopic() {
    let mut cfg = small_config();
    cfg.suite.runs = 3;
    let sweep = sweep_beta(&cfg, tables(), &[0.0, 1.0]).unwrap();
    let myopic = evaluate_cells(&cfg, tables(), &[PolicyKind::Myopic], &cfg.planner).unwrap();
    for (s, m) in sweep.rows[0].cells.iter().zip(&myopic) {
        assert_eq!(s.mean_time_s, m.mean_time_s);
        assert_eq!(s.near_miss_rate, m.near_miss_rate);
        assert_eq!(s.p_conservative, m.p_conservative);
    }
    let best = sweep
        .rows
        .iter()
        .map(|r| r.safe_mean_time_s)
        .fold(f64::INFINITY, f64::min);
    let chosen = sweep.rows.iter().find(|r| r.beta == sweep.selected_beta).unwrap();
    assert_eq!(chosen.safe_mean_time_s, best);
    assert!(sweep_beta(&cfg, tables(), &[]).is_err());
}

#[test]
fn tables_round_trip_and_missing_tables_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let t = &tables()[0];
    write_tables(dir.path(), t).unwrap();
    let back = read_tables(dir.path(), ScenarioKind::Intersection).unwrap();
    assert_eq!(back.policy, t.policy);
    assert_eq!(back.safe, t.safe);
    let err = read_tables(dir.path(), ScenarioKind::LaneMerge).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    let mut cfg = small_config();
    cfg.scenario.kinds = vec![ScenarioKind::LaneMerge];
    assert!(matches!(evaluate(&cfg, tables()), Err(Error::Config(_))));
    cfg.suite.tables = Some(dir.path().to_path_buf());
    assert!(matches!(prepare_tables(&cfg), Err(Error::Config(_))));
}
