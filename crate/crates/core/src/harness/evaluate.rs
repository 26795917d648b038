use super::config::{SuiteConfig, NEAR_MISS_REFERENCE};
use super::pipeline::ScenarioTables;
use super::stats::mean_and_se;
use crate::domain::{EpisodeLog, EpisodeOutcome, Intention, ScenarioConfig, ScenarioKind, Variant};
use crate::error::{Error, Result};
use crate::planner::{make_policy, PlannerConfig, PlanningContext, PolicyKind};
use crate::simulator::{
    draw_intention, run_episode, BeliefTracker, EpisodeSetup, SyntheticHuman, TrafficState,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Observer-side metrics of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub intention: Intention,
    /// Time to goal (s); the timeout duration when the goal was missed.
    pub time_s: f64,
    pub timed_out: bool,
    pub near_miss: bool,
    pub collided: bool,
    /// Belief held at each step.
    pub p_conservative: Vec<f64>,
    /// Robot distance left until it has cleared the zone (m).
    pub d_goal: Vec<f64>,
}

impl EpisodeSummary {
    pub fn from_log(log: &EpisodeLog, cfg: &ScenarioConfig, near_miss_tmtc: f64) -> EpisodeSummary {
        let length = cfg.geometry.vehicle_length;
        let timed_out = log.outcome == EpisodeOutcome::Timeout;
        let steps = log.steps_to_goal.unwrap_or(cfg.timeout_steps);
        EpisodeSummary {
            seed: log.seed,
            intention: log.intention,
            time_s: steps as f64 * cfg.dt,
            timed_out,
            near_miss: log.near_miss(near_miss_tmtc),
            collided: log.collisions > 0,
            p_conservative: log.records.iter().map(|r| r.p_conservative).collect(),
            d_goal: log.records.iter().map(|r| (r.state.d_r + length).max(0.0)).collect(),
        }
    }

    /// Belief mass on the true intention at each step.
    pub fn p_correct(&self) -> Vec<f64> {
        self.p_conservative
            .iter()
            .map(|&p| match self.intention {
                Intention::Conservative => p,
                Intention::Aggressive => 1.0 - p,
            })
            .collect()
    }
}

/// Per-step mean over series of unequal length, each extended with its
/// last value.
fn carried_mean<'a>(series: impl Iterator<Item = &'a [f64]> + Clone, len: usize) -> Vec<f64> {
    let n = series.clone().count() as f64;
    (0..len)
        .map(|t| series.clone().map(|v| v.get(t).or(v.last()).copied().unwrap_or(0.5)).sum::<f64>() / n)
        .collect()
}

/// Aggregates of one (scenario, variant, policy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub kind: ScenarioKind,
    pub variant: Variant,
    pub policy: PolicyKind,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub mean_time_s: f64,
    pub se_time_s: f64,
    pub near_misses: usize,
    pub near_miss_rate: f64,
    pub collision_rate: f64,
    pub timeouts: usize,
    /// Seeds of episodes that hit the timeout.
    pub timeout_seeds: Vec<u64>,
    /// Per-step means; finished episodes carry their last value forward.
    pub p_conservative: Vec<f64>,
    pub p_correct: Vec<f64>,
    pub d_goal: Vec<f64>,
}

impl CellReport {
    pub fn from_episodes(
        kind: ScenarioKind,
        variant: Variant,
        policy: PolicyKind,
        episodes: &[EpisodeSummary],
    ) -> Result<CellReport> {
        if episodes.is_empty() {
            return Err(Error::Config("cannot aggregate an empty cell".into()));
        }
        let n = episodes.len();
        let times: Vec<f64> = episodes.iter().map(|e| e.time_s).collect();
        let (mean_time_s, se_time_s) = mean_and_se(&times);
        let near_misses = episodes.iter().filter(|e| e.near_miss).count();
        let collided = episodes.iter().filter(|e| e.collided).count();
        let timeout_seeds: Vec<u64> = episodes.iter().filter(|e| e.timed_out).map(|e| e.seed).collect();
        let len = episodes.iter().map(|e| e.p_conservative.len()).max().unwrap_or(0);
        let p_correct: Vec<Vec<f64>> = episodes.iter().map(EpisodeSummary::p_correct).collect();
        Ok(CellReport {
            kind,
            variant,
            policy,
            runs: n,
            seeds: episodes.iter().map(|e| e.seed).collect(),
            mean_time_s,
            se_time_s,
            near_misses,
            near_miss_rate: near_misses as f64 / n as f64,
            collision_rate: collided as f64 / n as f64,
            timeouts: timeout_seeds.len(),
            timeout_seeds,
            p_conservative: carried_mean(episodes.iter().map(|e| e.p_conservative.as_slice()), len),
            p_correct: carried_mean(p_correct.iter().map(Vec::as_slice), len),
            // Finished episodes have reached the goal.
            d_goal: (0..len)
                .map(|t| episodes.iter().map(|e| e.d_goal.get(t).copied().unwrap_or(0.0)).sum::<f64>() / n as f64)
                .collect(),
        })
    }
}

/// Result of a batch evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub master_seed: u64,
    pub runs: usize,
    pub near_miss_tmtc: f64,
    pub near_miss_reference: f64,
    pub beta: f64,
    pub cells: Vec<CellReport>,
    /// Deviations worth a reader's attention.
    pub flags: Vec<String>,
}

impl MetricsReport {
    pub fn cell(&self, kind: ScenarioKind, variant: Variant, policy: PolicyKind) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.variant == variant && c.policy == policy)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} runs per cell, master seed {}, beta {}, near-miss below {} s (reference rate {})\n",
            self.runs, self.master_seed, self.beta, self.near_miss_tmtc, self.near_miss_reference
        );
        s.push_str(&format!(
            "{:<14}{:<8}{:<13}{:>9}{:>8}{:>11}{:>10}{:>10}\n",
            "scenario", "variant", "policy", "T(goal)", "se", "near-miss", "collide", "timeouts"
        ));
        for c in &self.cells {
            s.push_str(&format!(
                "{:<14}{:<8}{:<13}{:>9.3}{:>8.3}{:>11.3}{:>10.3}{:>10}\n",
                c.kind.name(),
                c.variant.name(),
                c.policy.name(),
                c.mean_time_s,
                c.se_time_s,
                c.near_miss_rate,
                c.collision_rate,
                c.timeouts
            ));
        }
        for f in &self.flags {
            s.push_str(&format!("flag: {f}\n"));
        }
        s
    }
}

/// Episode seeds of one scenario cell. Every policy sees the same seeds,
/// hence the same intentions, participants and starting states.
pub fn episode_seeds(master: u64, kind: ScenarioKind, variant: Variant, runs: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(1 + kind as u64 * 2 + variant as u64);
    (0..runs).map(|_| rng.next_u64()).collect()
}

fn tables_for(tables: &[ScenarioTables], kind: ScenarioKind, k: usize) -> Result<&ScenarioTables> {
    let t = tables
        .iter()
        .find(|t| t.kind == kind)
        .ok_or_else(|| Error::Config(format!("no tables for {kind}")))?;
    if t.policy.k() != k {
        return Err(Error::Config(format!(
            "{kind} policy table has history length {}, config asks for {k}",
            t.policy.k()
        )));
    }
    Ok(t)
}

/// Runs one episode for `policy` from `seed`.
pub fn run_seeded_episode(
    cfg: &SuiteConfig,
    scenario: &ScenarioConfig,
    tables: &ScenarioTables,
    planner: &PlannerConfig,
    policy: PolicyKind,
    seed: u64,
) -> Result<EpisodeLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intention = draw_intention(&mut rng);
    let driver = SyntheticHuman(cfg.synthetic_human.participant(&mut rng));
    let start = TrafficState::sample(scenario, &mut rng);
    let ctx = PlanningContext {
        scenario,
        table: &tables.policy,
        safe: Some(&tables.safe),
        planner,
    };
    let setup = EpisodeSetup {
        cfg: scenario,
        k: cfg.gp.k,
        beliefs: Some(BeliefTracker { table: &tables.policy }),
        seed,
    };
    let mut pol = make_policy(policy, ctx)?;
    run_episode(&setup, start, intention, pol.as_mut(), &driver, &mut rng)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every configured cell for `policies` under `planner`.
pub fn evaluate_cells(
    cfg: &SuiteConfig,
    tables: &[ScenarioTables],
    policies: &[PolicyKind],
    planner: &PlannerConfig,
) -> Result<Vec<CellReport>> {
    cfg.validate()?;
    planner.validate()?;
    with_pool(cfg.suite.threads, || {
        let mut cells = Vec::new();
        for (kind, variant) in cfg.cells() {
            let scenario = cfg.scenario(kind, variant);
            let t = tables_for(tables, kind, cfg.gp.k)?;
            let seeds = episode_seeds(cfg.suite.seed, kind, variant, cfg.suite.runs);
            for &policy in policies {
                let episodes = seeds
                    .par_iter()
                    .map(|&seed| {
                        let log = run_seeded_episode(cfg, &scenario, t, planner, policy, seed)?;
                        Ok(EpisodeSummary::from_log(&log, &scenario, cfg.suite.near_miss_tmtc))
                    })
                    .collect::<Result<Vec<_>>>()?;
                cells.push(CellReport::from_episodes(kind, variant, policy, &episodes)?);
            }
        }
        Ok(cells)
    })?
}

/// Batch evaluation of the configured suite.
pub fn evaluate(cfg: &SuiteConfig, tables: &[ScenarioTables]) -> Result<MetricsReport> {
    let cells = evaluate_cells(cfg, tables, &cfg.suite.policies, &cfg.planner)?;
    let mut flags = Vec::new();
    for c in &cells {
        if c.timeouts > 0 {
            flags.push(format!(
                "{}-{} {}: {} of {} episodes timed out and count as {} s",
                c.kind,
                c.variant,
                c.policy,
                c.timeouts,
                c.runs,
                cfg.scenario(c.kind, c.variant).timeout_steps as f64 * cfg.scenario(c.kind, c.variant).dt
            ));
        }
        if c.variant == Variant::Unsafe && c.policy == PolicyKind::Ipl && c.near_miss_rate <= NEAR_MISS_REFERENCE {
            flags.push(format!(
                "{}-{} ipl: near-miss rate {:.3} does not exceed the daily-traffic reference {}",
                c.kind, c.variant, c.near_miss_rate, NEAR_MISS_REFERENCE
            ));
        }
    }
    Ok(MetricsReport {
        master_seed: cfg.suite.seed,
        runs: cfg.suite.runs,
        near_miss_tmtc: cfg.suite.near_miss_tmtc,
        near_miss_reference: NEAR_MISS_REFERENCE,
        beta: cfg.planner.beta,
        cells,
        flags,
    })
}
