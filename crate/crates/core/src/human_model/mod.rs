//! Learned intention-conditioned human model, its discretized policy table
//! and the synthetic driver standing in for human participants.

mod demos;
mod generate;
mod gp;
mod policy_table;
mod synthetic;

pub use demos::{
    read_demo_dir, write_demo_dir, GuideDemo, GuideRecord, HumanDemo, HumanRecord, GUIDE_COLUMNS,
    HUMAN_COLUMNS,
};
pub use generate::{demos_from_log, generate_demonstrations, CautiousExpert, DemoCounts};
pub use gp::{
    feature_vector, history_length_study, is_test_episode, rbf_kernel, training_pairs,
    GpHyperparams, GpModel, HistoryStudyRow,
};
pub use policy_table::{bin_probabilities, cell_query_points, human_bin_representatives, PolicyTable, LIKELIHOOD_FLOOR};
pub use synthetic::{synth_human_step, synth_mean_accel, DriverProfile, SyntheticDriverParams};
