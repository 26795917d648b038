//! One-dimensional interaction dynamics, lane-switch geometry, TMTC and
//! the closed-loop episode driver.

mod dynamics;
mod episode;

pub use dynamics::{
    apply_lane_switch, conflict_frame_accel, step_dynamics, step_traffic, step_vehicle, tmtc,
    tmtc_positions, LaneStatus, TrafficState,
};
pub use episode::{
    draw_intention, replay, run_episode, BeliefTracker, EpisodeSetup, HumanDriver, LearnedHuman,
    Observation, RobotPolicy, SyntheticHuman,
};
