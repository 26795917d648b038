use super::dynamics::{conflict_frame_accel, step_traffic, tmtc, TrafficState};
use crate::domain::{
    AccelBin, Belief, BoundedHistory, EpisodeLog, EpisodeOutcome, HumanAction, Intention,
    RobotAction, ScenarioConfig, StepRecord, WorldState,
};
use crate::error::Result;
use crate::human_model::{synth_human_step, GpModel, PolicyTable, SyntheticDriverParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// What a robot policy observes before acting.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub t: usize,
    pub cfg: &'a ScenarioConfig,
    pub traffic: &'a TrafficState,
    pub belief: Belief,
    /// Planner history (conflict-frame robot accel, human accel).
    pub history: &'a BoundedHistory,
    pub last_human_bin: Option<AccelBin>,
}

pub trait RobotPolicy {
    fn name(&self) -> String;
    fn select(&mut self, obs: &Observation<'_>) -> Result<RobotAction>;
}

/// Source of human actions in closed loop.
pub trait HumanDriver {
    /// History length the driver conditions on.
    fn memory(&self) -> usize;
    fn act(
        &self,
        x: &WorldState,
        tmtc: f64,
        h: &BoundedHistory,
        i: Intention,
        rng: &mut ChaCha8Rng,
    ) -> Result<HumanAction>;
}

/// Rule-based ground-truth driver.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticHuman(pub SyntheticDriverParams);

impl HumanDriver for SyntheticHuman {
    fn memory(&self) -> usize {
        self.0.memory()
    }

    fn act(
        &self,
        x: &WorldState,
        tmtc: f64,
        h: &BoundedHistory,
        i: Intention,
        rng: &mut ChaCha8Rng,
    ) -> Result<HumanAction> {
        synth_human_step(&self.0, x, tmtc, h, i, rng)
    }
}

/// Driver sampling from the learned GP predictive distributions.
#[derive(Debug, Clone)]
pub struct LearnedHuman {
    pub aggressive: GpModel,
    pub conservative: GpModel,
}

impl HumanDriver for LearnedHuman {
    fn memory(&self) -> usize {
        self.aggressive.k
    }

    fn act(
        &self,
        x: &WorldState,
        _tmtc: f64,
        h: &BoundedHistory,
        i: Intention,
        rng: &mut ChaCha8Rng,
    ) -> Result<HumanAction> {
        let m = match i {
            Intention::Aggressive => &self.aggressive,
            Intention::Conservative => &self.conservative,
        };
        let (mean, std) = m.predict_state(x, h)?;
        let n = Normal::new(mean, std).map_err(|e| crate::Error::Numeric(e.to_string()))?;
        HumanAction::new(n.sample(rng))
    }
}

/// Belief maintenance inside an episode.
#[derive(Debug, Clone, Copy)]
pub struct BeliefTracker<'a> {
    pub table: &'a PolicyTable,
}

impl BeliefTracker<'_> {
    pub fn update(
        &self,
        b: Belief,
        x: &WorldState,
        h: &BoundedHistory,
        a: &HumanAction,
    ) -> Result<Belief> {
        let o = self.table.index(x, h)?;
        let agg = self.table.likelihood(o, Intention::Aggressive, a.bin)?;
        let con = self.table.likelihood(o, Intention::Conservative, a.bin)?;
        b.posterior([agg, con])
    }
}

/// Everything an episode needs besides the policy and the human.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeSetup<'a> {
    pub cfg: &'a ScenarioConfig,
    /// Planner history length.
    pub k: usize,
    /// Table used for belief updates; `None` leaves the belief uniform.
    pub beliefs: Option<BeliefTracker<'a>>,
    pub seed: u64,
}

/// Draws the intention with probability one half each.
pub fn draw_intention<R: Rng + ?Sized>(rng: &mut R) -> Intention {
    if rng.gen_bool(0.5) {
        Intention::Conservative
    } else {
        Intention::Aggressive
    }
}

/// Runs one closed-loop episode from `start` until the goal or the timeout.
pub fn run_episode(
    setup: &EpisodeSetup<'_>,
    start: TrafficState,
    intention: Intention,
    policy: &mut dyn RobotPolicy,
    human: &dyn HumanDriver,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeLog> {
    let cfg = setup.cfg;
    cfg.validate()?;
    let length = cfg.geometry.vehicle_length;
    let mut traffic = start;
    let mut belief = Belief::uniform();
    let mut history = BoundedHistory::new(setup.k);
    let mut human_history = BoundedHistory::new(human.memory());
    let mut last_bin = None;
    let mut records = Vec::new();
    let mut collisions = 0;
    let mut outcome = EpisodeOutcome::Timeout;
    let mut steps_to_goal = None;

    for t in 0..cfg.timeout_steps {
        let x = traffic.world();
        let ttc = tmtc(&traffic, length);
        let obs = Observation {
            t,
            cfg,
            traffic: &traffic,
            belief,
            history: &history,
            last_human_bin: last_bin,
        };
        let action = policy.select(&obs)?;
        let commanded = human.act(&x, ttc, &human_history, intention, rng)?;
        let signal = conflict_frame_accel(&traffic, action, cfg.robot_accel);
        let (next, collided) = step_traffic(cfg, &traffic, action, commanded.accel)?;
        // The observable action is the acceleration actually achieved, which
        // differs from the command once the speed limits bind.
        let human_action = HumanAction::new((next.v_h - traffic.v_h) / cfg.dt)?;
        records.push(StepRecord {
            t,
            state: x,
            robot_action: action,
            robot_accel: signal,
            human_accel: human_action.accel,
            p_conservative: belief.p_conservative(),
            tmtc: ttc,
        });
        collisions += usize::from(collided);
        if let Some(tracker) = &setup.beliefs {
            belief = tracker.update(belief, &x, &history, &human_action)?;
        }
        history.push(signal, human_action.accel);
        human_history.push(signal, human_action.accel);
        last_bin = Some(human_action.bin);
        traffic = next;
        if traffic.goal_reached(length) {
            outcome = EpisodeOutcome::GoalReached;
            steps_to_goal = Some(t + 1);
            break;
        }
    }
    Ok(EpisodeLog {
        intention,
        kind: cfg.kind,
        variant: cfg.variant,
        policy: policy.name(),
        seed: setup.seed,
        outcome,
        steps_to_goal,
        collisions,
        records,
    })
}

/// Re-simulates a log's robot and human actions from its first state and
/// returns the visited world states.
pub fn replay(cfg: &ScenarioConfig, log: &EpisodeLog) -> Result<Vec<WorldState>> {
    let Some(first) = log.records.first() else {
        return Ok(Vec::new());
    };
    let mut traffic = TrafficState::initial(cfg, first.state);
    let mut states = Vec::with_capacity(log.records.len());
    for r in &log.records {
        states.push(traffic.world());
        traffic = step_traffic(cfg, &traffic, r.robot_action, r.human_accel)?.0;
    }
    Ok(states)
}
