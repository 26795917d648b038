//! Small enumerable planning instances used as oracles.

use super::config::PlannerConfig;
use super::model::{check_distribution, Guidance, InteractionModel};
use super::oracle::{bayes_optimal_value, ORACLE_CAP};
use super::solver::solve_bonus_mdp;
use crate::domain::{AccelBin, Belief, Intention, RobotAction};
use crate::error::{Error, Result};
use crate::guided::beta_posterior_mean;
use serde::Serialize;

/// Finite model given by explicit tables. States are indices.
#[derive(Debug, Clone)]
pub struct TabularModel {
    pub actions: Vec<RobotAction>,
    pub terminal: Vec<bool>,
    /// Per state: `[aggressive, conservative]` bin distributions.
    pub human: Vec<[[f64; 3]; 2]>,
    /// Per state and action index: successor for each bin.
    pub next: Vec<Vec<[usize; 3]>>,
    /// Per state and action index: reward for each bin.
    pub reward: Vec<Vec<[f64; 3]>>,
}

impl TabularModel {
    pub fn n_states(&self) -> usize {
        self.terminal.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_states();
        if self.human.len() != n || self.next.len() != n || self.reward.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: self.human.len().min(self.next.len()).min(self.reward.len()),
            });
        }
        for s in 0..n {
            for d in &self.human[s] {
                check_distribution(d)?;
            }
            if self.next[s].len() != self.actions.len() || self.reward[s].len() != self.actions.len() {
                return Err(Error::Shape {
                    expected: self.actions.len(),
                    got: self.next[s].len(),
                });
            }
            if self.next[s].iter().flatten().any(|&t| t >= n) {
                return Err(Error::InvalidState(format!("successor out of range at state {s}")));
            }
        }
        Ok(())
    }

    fn action_index(&self, a: RobotAction) -> Result<usize> {
        self.actions
            .iter()
            .position(|&x| x == a)
            .ok_or_else(|| Error::InvalidAction(format!("{a} not in toy action set")))
    }
}

impl InteractionModel for TabularModel {
    type State = usize;
    type Key = usize;

    fn key(&self, s: &usize) -> usize {
        *s
    }

    fn actions(&self, _s: &usize) -> Vec<RobotAction> {
        self.actions.clone()
    }

    fn is_terminal(&self, s: &usize) -> bool {
        self.terminal[*s]
    }

    fn human_distribution(&self, s: &usize, i: Intention) -> Result<[f64; 3]> {
        Ok(self.human[*s][i.index()])
    }

    fn step(&self, s: &usize, a: RobotAction, bin: AccelBin) -> Result<(usize, f64)> {
        let ai = self.action_index(a)?;
        Ok((self.next[*s][ai][bin.index()], self.reward[*s][ai][bin.index()]))
    }
}

/// Per state–action weights for tabular models.
#[derive(Debug, Clone)]
pub struct TabularGuidance {
    pub actions: Vec<RobotAction>,
    pub weights: Vec<Vec<f64>>,
}

impl TabularGuidance {
    /// Smallest weight over the table.
    pub fn phi(&self) -> f64 {
        self.weights.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Guidance<usize> for TabularGuidance {
    fn weight(&self, s: &usize, a: RobotAction) -> Result<f64> {
        let ai = self
            .actions
            .iter()
            .position(|&x| x == a)
            .ok_or_else(|| Error::InvalidAction(format!("{a} not in toy action set")))?;
        Ok(self.weights[*s][ai])
    }
}

const KEEP: [f64; 3] = [0.0, 1.0, 0.0];
const DEC: [f64; 3] = [1.0, 0.0, 0.0];
const ACC: [f64; 3] = [0.0, 0.0, 1.0];

/// Two cells whose successors depend only on the robot action.
pub fn chain_toy() -> TabularModel {
    use RobotAction::*;
    // Decelerate stays, Keep toggles, Accelerate goes to cell 1.
    let next = vec![vec![[0; 3], [1; 3], [1; 3]], vec![[1; 3], [0; 3], [1; 3]]];
    let r = |v: f64| [v; 3];
    let reward = vec![
        vec![r(0.0), r(1.0), r(-0.5)],
        vec![r(2.0), r(0.3), r(-1.0)],
    ];
    TabularModel {
        actions: vec![Decelerate, Keep, Accelerate],
        terminal: vec![false, false],
        human: vec![[KEEP, KEEP]; 2],
        next,
        reward,
    }
}

/// Two actions, two observable human bins, one informative state.
///
/// State 0 reveals the intention (aggressive accelerates, conservative
/// decelerates); state 1 is ambiguous; state 2 terminal.
pub fn two_bin_toy() -> TabularModel {
    use RobotAction::*;
    let mixed_a = [0.3, 0.0, 0.7];
    let mixed_c = [0.6, 0.0, 0.4];
    TabularModel {
        actions: vec![Decelerate, Accelerate],
        terminal: vec![false, false, true],
        human: vec![[ACC, DEC], [mixed_a, mixed_c], [KEEP, KEEP]],
        next: vec![
            vec![[1, 1, 0], [2, 2, 1]],
            vec![[1, 1, 0], [2, 2, 2]],
            vec![[2; 3], [2; 3]],
        ],
        reward: vec![
            vec![[-0.1, 0.0, -0.2], [4.0, 0.0, -6.0]],
            vec![[0.0, 0.0, 0.5], [3.0, 0.0, -5.0]],
            vec![[0.0; 3], [0.0; 3]],
        ],
    }
}

/// Cells of the optimism instance.
pub const OPT_START: usize = 0;
pub const OPT_PROBED: usize = 1;
pub const OPT_DECISION: usize = 2;
pub const OPT_GOAL: usize = 3;

/// Probe-then-commit instance where information pays off only if gathered
/// before committing. Actions: Decelerate waits, Keep probes, Accelerate
/// goes.
pub fn optimism_toy() -> TabularModel {
    use RobotAction::*;
    let c = |v: f64| [v; 3];
    let to = |s: usize| [s; 3];
    TabularModel {
        actions: vec![Decelerate, Keep, Accelerate],
        terminal: vec![false, false, false, true],
        human: vec![[KEEP, KEEP], [ACC, DEC], [ACC, DEC], [KEEP, KEEP]],
        next: vec![
            vec![to(OPT_START), to(OPT_PROBED), to(OPT_DECISION)],
            vec![to(OPT_DECISION), to(OPT_PROBED), to(OPT_DECISION)],
            vec![
                to(OPT_DECISION),
                to(OPT_DECISION),
                [OPT_GOAL, OPT_START, OPT_START],
            ],
            vec![to(OPT_GOAL); 3],
        ],
        reward: vec![
            vec![c(-0.1); 3],
            vec![c(-0.1); 3],
            vec![c(-0.1), c(-0.1), [10.0, -20.0, -20.0]],
            vec![c(0.0); 3],
        ],
    }
}

/// Demonstration counts of the optimism instance turned into Beta-mean
/// weights with the default prior.
pub fn optimism_guidance() -> TabularGuidance {
    let counts: [[u64; 3]; 4] = [[10, 10, 0], [5, 5, 5], [10, 2, 3], [0, 0, 0]];
    TabularGuidance {
        actions: vec![RobotAction::Decelerate, RobotAction::Keep, RobotAction::Accelerate],
        weights: counts
            .iter()
            .map(|row| row.iter().map(|&n| beta_posterior_mean(0.05, 5.0, n)).collect())
            .collect(),
    }
}

/// Bonus weight that makes the guided value optimistic:
/// `|X|² |A| / (φ (1 − γ)²)`.
pub fn lemma_beta(n_states: usize, n_actions: usize, phi: f64, gamma: f64) -> f64 {
    (n_states * n_states * n_actions) as f64 / (phi * (1.0 - gamma).powi(2))
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimismViolation {
    pub state: usize,
    pub p_conservative: f64,
    pub guided_value: f64,
    pub bayes_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimismReport {
    pub beta: f64,
    pub phi: f64,
    pub gamma: f64,
    pub horizon: usize,
    pub epsilon: f64,
    pub checked: usize,
    /// Smallest `Ṽ^G − V*` over the sweep.
    pub min_slack: f64,
    pub violations: Vec<OptimismViolation>,
}

impl OptimismReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "optimism check: beta {:.6e}, phi {:.6}, gamma {}, horizon {}, epsilon {:e}\n\
             checked {} (belief, state) pairs, min slack {:.6}, violations {}\n",
            self.beta,
            self.phi,
            self.gamma,
            self.horizon,
            self.epsilon,
            self.checked,
            self.min_slack,
            self.violations.len()
        );
        for v in &self.violations {
            s.push_str(&format!(
                "  state {} p_conservative {:.2}: guided {:.6} < bayes {:.6}\n",
                v.state, v.p_conservative, v.guided_value, v.bayes_value
            ));
        }
        s
    }
}

/// Compares the guided fixed-belief value against the Bayes-optimal value
/// on every non-terminal state for `belief_points` evenly spaced beliefs.
pub fn verify_optimism(
    model: &TabularModel,
    guide: &TabularGuidance,
    gamma: f64,
    horizon: usize,
    epsilon: f64,
    beta: f64,
    belief_points: usize,
) -> Result<OptimismReport> {
    model.validate()?;
    if belief_points < 2 {
        return Err(Error::Config("belief sweep needs at least two points".into()));
    }
    let cfg = PlannerConfig::exact(gamma, beta, horizon);
    let mut checked = 0;
    let mut min_slack = f64::INFINITY;
    let mut violations = Vec::new();
    for j in 0..belief_points {
        let p = j as f64 / (belief_points - 1) as f64;
        let b = Belief::new(p)?;
        for s in (0..model.n_states()).filter(|&s| !model.terminal[s]) {
            let guided = solve_bonus_mdp(model, b, &s, &cfg, guide)?.value;
            let bayes = bayes_optimal_value(model, b, &s, horizon, gamma, ORACLE_CAP)?;
            let slack = guided - bayes;
            min_slack = min_slack.min(slack);
            checked += 1;
            if slack < -epsilon {
                violations.push(OptimismViolation {
                    state: s,
                    p_conservative: p,
                    guided_value: guided,
                    bayes_value: bayes,
                });
            }
        }
    }
    Ok(OptimismReport {
        beta,
        phi: guide.phi(),
        gamma,
        horizon,
        epsilon,
        checked,
        min_slack,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toys_are_well_formed() {
        chain_toy().validate().unwrap();
        two_bin_toy().validate().unwrap();
        optimism_toy().validate().unwrap();
    }

    #[test]
    fn lemma_beta_formula() {
        let b = lemma_beta(4, 3, 0.05 / 5.05, 0.9);
        assert!((b - 48.0 / ((0.05 / 5.05) * 0.01)).abs() < 1e-6 * b);
    }
}
