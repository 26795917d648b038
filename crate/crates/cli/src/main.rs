use clap::{Parser, Subcommand};
use ipl_core::domain::{ScenarioConfig, ScenarioKind, Variant};
use ipl_core::harness::{
    demonstrations, evaluate, export_report, load_scenario, prepare_tables, read_tables, run_seeded_episode,
    sweep_beta, tables_from_demos, write_tables, ExportFormat, ScenarioTables, SuiteConfig,
};
use ipl_core::human_model::{history_length_study, read_demo_dir, write_demo_dir, GuideDemo, HumanDemo};
use ipl_core::planner::toy::{lemma_beta, optimism_guidance, optimism_toy, verify_optimism};
use ipl_core::planner::PolicyKind;
use ipl_core::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ipl", version, about = "Intention-aware planning with guided exploration")]
struct Cli {
    /// Suite configuration (TOML); defaults apply to missing keys.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate human and expert demonstrations.
    DemoGen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the human model and run the history-length study.
    Fit {
        /// Demonstration directory; regenerated when omitted.
        #[arg(long)]
        demos: Option<PathBuf>,
    },
    /// Build the policy and safe-probability tables.
    Table {
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one verbose episode.
    Simulate {
        #[arg(long, default_value = "intersection")]
        scenario: String,
        #[arg(long, default_value = "safe")]
        variant: String,
        /// Scenario definition file replacing the preset.
        #[arg(long)]
        scenario_file: Option<PathBuf>,
        #[arg(long, default_value = "ipl")]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Write the episode log as newline-delimited JSON.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run the batch suite.
    Evaluate {
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Evaluate IPL over the configured β grid.
    SweepBeta {
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the optimism bound on the bundled toy instance.
    VerifyOptimism {
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        /// Bonus weight; the lemma's value when omitted.
        #[arg(long)]
        beta: Option<f64>,
        /// Machine-readable summary (JSON).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<ScenarioKind> {
    ScenarioKind::parse(s).ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
}

fn parse_variant(s: &str) -> Result<Variant> {
    Variant::parse(s).ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
}

fn load_tables(cfg: &SuiteConfig, dir: Option<PathBuf>) -> Result<Vec<ScenarioTables>> {
    let mut cfg = cfg.clone();
    if dir.is_some() {
        cfg.suite.tables = dir;
    }
    prepare_tables(&cfg)
}

fn demos_for(cfg: &SuiteConfig, dir: Option<&Path>, kind: ScenarioKind) -> Result<(Vec<HumanDemo>, Vec<GuideDemo>)> {
    match dir {
        Some(d) => {
            let (h, g) = read_demo_dir(d)?;
            let h: Vec<_> = h.into_iter().filter(|x| x.kind == kind).collect();
            let g: Vec<_> = g.into_iter().filter(|x| x.kind == kind).collect();
            if h.is_empty() {
                return Err(Error::Config(format!("no {kind} demonstrations in {}", d.display())));
            }
            Ok((h, g))
        }
        None => demonstrations(cfg, kind),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    };
    match cli.command {
        Command::DemoGen { out } => {
            for &kind in &cfg.scenario.kinds {
                let (h, g) = demonstrations(&cfg, kind)?;
                let steps: usize = h.iter().map(|d| d.rows.len()).sum();
                write_demo_dir(&out, &h, &g)?;
                println!("{kind}: {} episodes, {steps} steps", h.len());
            }
        }
        Command::Fit { demos } => {
            for &kind in &cfg.scenario.kinds {
                let (h, _) = demos_for(&cfg, demos.as_deref(), kind)?;
                let rows = history_length_study(&h, &cfg.gp.study_k, &cfg.gp.hyper())?;
                println!("{kind}");
                println!("  k  train MSE  held-out MSE");
                for r in rows {
                    println!("  {}  {:9.5}  {:12.5}", r.k, r.train_mse, r.test_mse);
                }
            }
        }
        Command::Table { demos, out } => {
            for &kind in &cfg.scenario.kinds {
                let (h, g) = demos_for(&cfg, demos.as_deref(), kind)?;
                let t = tables_from_demos(&cfg, kind, &h, &g)?;
                write_tables(&out, &t)?;
                println!(
                    "{kind}: {} policy rows, phi {:.6}, human bin means {:?}",
                    t.policy.len(),
                    t.safe.phi(),
                    t.policy.human_reps
                );
            }
        }
        Command::Simulate {
            scenario,
            variant,
            scenario_file,
            policy,
            seed,
            tables,
            log,
        } => {
            let sc: ScenarioConfig = match scenario_file {
                Some(p) => load_scenario(&p)?,
                None => cfg.scenario(parse_kind(&scenario)?, parse_variant(&variant)?),
            };
            let policy =
                PolicyKind::parse(&policy).ok_or_else(|| Error::Config(format!("unknown policy '{policy}'")))?;
            let t = match tables {
                Some(d) => read_tables(&d, sc.kind)?,
                None => {
                    let (h, g) = demonstrations(&cfg, sc.kind)?;
                    tables_from_demos(&cfg, sc.kind, &h, &g)?
                }
            };
            let ep = run_seeded_episode(&cfg, &sc, &t, &cfg.planner, policy, seed)?;
            println!("{} {} seed {} intention {}", sc.name(), policy, seed, ep.intention.name());
            println!("   t     d_h     d_r    v_h    v_r  action       a_h  P(con)   TMTC");
            for r in &ep.records {
                println!(
                    "{:>4} {:>7.2} {:>7.2} {:>6.2} {:>6.2}  {:<11} {:>5.2} {:>7.3} {:>6.2}",
                    r.t,
                    r.state.d_h,
                    r.state.d_r,
                    r.state.v_h,
                    r.state.v_r,
                    r.robot_action.name(),
                    r.human_accel,
                    r.p_conservative,
                    r.tmtc
                );
            }
            println!(
                "outcome {:?} after {} steps, near-miss {}, collision steps {}",
                ep.outcome,
                ep.records.len(),
                ep.near_miss(cfg.suite.near_miss_tmtc),
                ep.collisions
            );
            if let Some(p) = log {
                ep.write_ndjson(std::fs::File::create(p)?)?;
            }
        }
        Command::Evaluate {
            tables,
            runs,
            seed,
            out,
            format,
        } => {
            let mut cfg = cfg;
            if let Some(n) = runs {
                cfg.suite.runs = n;
            }
            if let Some(s) = seed {
                cfg.suite.seed = s;
            }
            let format =
                ExportFormat::parse(&format).ok_or_else(|| Error::Config(format!("unknown format '{format}'")))?;
            let t = load_tables(&cfg, tables)?;
            let report = evaluate(&cfg, &t)?;
            print!("{}", report.to_text());
            if let Some(p) = out {
                export_report(&report, &p, format, |k, v| cfg.scenario(k, v).dt)?;
            }
        }
        Command::SweepBeta { tables, runs, out } => {
            let mut cfg = cfg;
            if let Some(n) = runs {
                cfg.suite.runs = n;
            }
            let t = load_tables(&cfg, tables)?;
            let report = sweep_beta(&cfg, &t, &cfg.suite.beta_grid)?;
            print!("{}", report.to_text());
            if let Some(p) = out {
                let json = serde_json_string(&report)?;
                std::fs::write(p, json)?;
            }
        }
        Command::VerifyOptimism {
            epsilon,
            points,
            horizon,
            gamma,
            beta,
            summary,
        } => {
            let model = optimism_toy();
            let guide = optimism_guidance();
            let beta = beta.unwrap_or_else(|| lemma_beta(model.n_states(), model.actions.len(), guide.phi(), gamma));
            let report = verify_optimism(&model, &guide, gamma, horizon, epsilon, beta, points)?;
            print!("{}", report.to_text());
            if let Some(p) = summary {
                std::fs::write(p, serde_json_string(&report)?)?;
            }
            if !report.violations.is_empty() {
                return Err(Error::Numeric(format!("{} optimism violations", report.violations.len())));
            }
        }
    }
    Ok(())
}

fn serde_json_string<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Numeric(e.to_string()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
