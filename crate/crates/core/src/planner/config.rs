use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Robot reward terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardParams {
    /// Reward on reaching the goal.
    pub goal: f64,
    /// Cost added every step (negative).
    pub step: f64,
    /// Penalty when both cars share the collision zone (negative).
    pub collision: f64,
    /// Penalty when the successor's TMTC is below `near_miss_tmtc`.
    pub near_miss: f64,
    /// TMTC threshold (s) for the near-miss penalty.
    pub near_miss_tmtc: f64,
    /// Cost charged for every step the robot accelerates (negative).
    #[serde(default)]
    pub accel_cost: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            goal: 10.0,
            step: -0.1,
            collision: -20.0,
            near_miss: -1.0,
            near_miss_tmtc: 1.0,
            accel_cost: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    /// Discount factor γ in (0, 1).
    pub gamma: f64,
    /// Exploration bonus weight β.
    pub beta: f64,
    /// Lookahead depth in layers.
    pub horizon: usize,
    /// Simulation steps each lookahead layer holds the robot action and the
    /// human bin for.
    pub action_repeat: usize,
    /// Wall-clock budget per plan (s); zero disables the check.
    pub budget_s: f64,
    /// Lookahead stops growing once a layer holds more nodes than this.
    pub max_layer_nodes: usize,
    /// Human bins below this mixture probability are not expanded; the rest
    /// are renormalized. Zero expands every bin with positive probability.
    pub min_branch_prob: f64,
    /// Position grid (m) for merging lookahead nodes.
    pub merge_position: f64,
    /// Speed grid (m/s) for merging lookahead nodes.
    pub merge_speed: f64,
    #[serde(default)]
    pub rewards: RewardParams,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            gamma: 0.95,
            beta: 0.1,
            horizon: 5,
            action_repeat: 2,
            budget_s: 0.33,
            max_layer_nodes: 4000,
            min_branch_prob: 0.02,
            merge_position: 2.0,
            merge_speed: 1.0,
            rewards: RewardParams::default(),
        }
    }
}

impl PlannerConfig {
    /// Exact expansion settings for small enumerable models.
    pub fn exact(gamma: f64, beta: f64, horizon: usize) -> Self {
        PlannerConfig {
            gamma,
            beta,
            horizon,
            action_repeat: 1,
            budget_s: 0.0,
            max_layer_nodes: usize::MAX,
            min_branch_prob: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma = {} must lie in (0, 1)", self.gamma)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta = {} must be non-negative", self.beta)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.action_repeat == 0 {
            return Err(Error::Config("action_repeat must be at least 1".into()));
        }
        if !(self.budget_s >= 0.0) {
            return Err(Error::Config("budget_s must be non-negative".into()));
        }
        if self.max_layer_nodes == 0 {
            return Err(Error::Config("max_layer_nodes must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.min_branch_prob) {
            return Err(Error::Config("min_branch_prob must lie in [0, 0.5)".into()));
        }
        if !(self.merge_position > 0.0 && self.merge_speed > 0.0) {
            return Err(Error::Config("merge grids must be positive".into()));
        }
        Ok(())
    }
}
