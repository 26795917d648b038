//! Belief updates, the fixed-belief bonus-augmented planner, its guided
//! variant, the Bayes-optimal oracle and the compared robot policies.

mod config;
mod driving;
mod model;
mod oracle;
mod policy;
mod solver;
pub mod toy;

pub use config::{PlannerConfig, RewardParams};
pub use driving::{DrivingKey, DrivingModel, DrivingState, SafeGuidance};
pub use model::{
    belief_update, expected_belief_change, human_rows, mean_reward, mean_transition, mixture,
    posterior, reward_bonus, state_information, ConstantGuidance, Guidance, InteractionModel,
    Unguided,
};
pub use oracle::{bayes_optimal_value, ORACLE_CAP};
pub use policy::{
    make_policy, plan, HeuristicPolicy, PlannerPolicy, PlanningContext, PolicyKind,
};
pub use solver::{solve_bonus_mdp, Plan};
