use crate::domain::{AccelBin, Belief, Intention, RobotAction};
use crate::error::{Error, Result};
use std::hash::Hash;

/// A planning model: robot actions, intention-conditioned human action
/// distributions over the three accel bins and a transition that depends
/// on the robot action and the human's bin.
pub trait InteractionModel {
    type State: Clone;
    /// Nodes at equal depth with equal keys are merged.
    type Key: Hash + Eq;

    fn key(&self, s: &Self::State) -> Self::Key;

    fn actions(&self, s: &Self::State) -> Vec<RobotAction>;

    fn is_terminal(&self, s: &Self::State) -> bool;

    /// `P(bin | s, i)` as stored by the model; sums to one.
    fn human_distribution(&self, s: &Self::State, i: Intention) -> Result<[f64; 3]>;

    /// Likelihood used by Bayes updates. Defaults to the distribution.
    fn likelihood(&self, s: &Self::State, i: Intention, bin: AccelBin) -> Result<f64> {
        Ok(self.human_distribution(s, i)?[bin.index()])
    }

    /// Successor and immediate robot reward.
    fn step(&self, s: &Self::State, a: RobotAction, bin: AccelBin) -> Result<(Self::State, f64)>;

    /// Value estimate past the planning horizon.
    fn leaf_value(&self, _s: &Self::State) -> f64 {
        0.0
    }

    /// Simulation steps covered by one call to `step`; the solver discounts
    /// each layer by `γ` to this power.
    fn steps_per_transition(&self) -> usize {
        1
    }
}

/// Per state–action exploration weight `p^G`.
pub trait Guidance<S> {
    fn weight(&self, s: &S, a: RobotAction) -> Result<f64>;
}

/// Weight one everywhere: the unguided bonus.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unguided;

impl<S> Guidance<S> for Unguided {
    fn weight(&self, _s: &S, _a: RobotAction) -> Result<f64> {
        Ok(1.0)
    }
}

/// Constant weight, mainly for tests of the reduction to the unguided
/// planner.
#[derive(Debug, Clone, Copy)]
pub struct ConstantGuidance(pub f64);

impl<S> Guidance<S> for ConstantGuidance {
    fn weight(&self, _s: &S, _a: RobotAction) -> Result<f64> {
        Ok(self.0)
    }
}

/// Belief-weighted human action distribution.
pub fn mixture(b: Belief, dists: &[[f64; 3]; 2]) -> [f64; 3] {
    let [pa, pc] = b.as_array();
    std::array::from_fn(|j| pa * dists[0][j] + pc * dists[1][j])
}

/// Posterior after observing `bin` given per-intention likelihood rows.
pub fn posterior(b: Belief, liks: &[[f64; 3]; 2], bin: AccelBin) -> Result<Belief> {
    b.posterior([liks[0][bin.index()], liks[1][bin.index()]])
}

/// Expected L1 belief change for one observation of the human: the sum
/// over bins of `P_mix(bin) · ‖τ(b, bin) − b‖₁`. Bins with zero predicted
/// probability contribute nothing.
pub fn expected_belief_change(b: Belief, dists: &[[f64; 3]; 2], liks: &[[f64; 3]; 2]) -> Result<f64> {
    let p = mixture(b, dists);
    let mut total = 0.0;
    for bin in AccelBin::ALL {
        let w = p[bin.index()];
        if w > 0.0 {
            total += w * posterior(b, liks, bin)?.l1_distance(&b);
        }
    }
    Ok(total)
}

/// Per-intention distributions and likelihoods of a state.
pub fn human_rows<M: InteractionModel>(m: &M, s: &M::State) -> Result<([[f64; 3]; 2], [[f64; 3]; 2])> {
    let dists = [
        m.human_distribution(s, Intention::Aggressive)?,
        m.human_distribution(s, Intention::Conservative)?,
    ];
    let mut liks = [[0.0; 3]; 2];
    for i in Intention::ALL {
        for bin in AccelBin::ALL {
            liks[i.index()][bin.index()] = m.likelihood(s, i, bin)?;
        }
    }
    Ok((dists, liks))
}

/// Bayes update `τ(b, s, bin)` under the model's likelihoods.
pub fn belief_update<M: InteractionModel>(m: &M, b: Belief, s: &M::State, bin: AccelBin) -> Result<Belief> {
    let la = m.likelihood(s, Intention::Aggressive, bin)?;
    let lc = m.likelihood(s, Intention::Conservative, bin)?;
    b.posterior([la, lc])
}

/// Information carried by the human's action at `s`: the expected L1
/// belief change, zero at terminal states.
pub fn state_information<M: InteractionModel>(m: &M, b: Belief, s: &M::State) -> Result<f64> {
    if m.is_terminal(s) {
        return Ok(0.0);
    }
    let (dists, liks) = human_rows(m, s)?;
    expected_belief_change(b, &dists, &liks)
}

/// Reward bonus of taking `a` at `s`: the expected information revealed by
/// the human's response, i.e. the belief change expected at the successor
/// states reached through `a`.
pub fn reward_bonus<M: InteractionModel>(m: &M, b: Belief, s: &M::State, a: RobotAction) -> Result<f64> {
    if m.is_terminal(s) {
        return Ok(0.0);
    }
    let (dists, _) = human_rows(m, s)?;
    let p = mixture(b, &dists);
    let mut total = 0.0;
    for bin in AccelBin::ALL {
        if p[bin.index()] > 0.0 {
            let (next, _) = m.step(s, a, bin)?;
            total += p[bin.index()] * state_information(m, b, &next)?;
        }
    }
    Ok(total)
}

/// Expected immediate reward under the belief mixture.
pub fn mean_reward<M: InteractionModel>(m: &M, b: Belief, s: &M::State, a: RobotAction) -> Result<f64> {
    let (dists, _) = human_rows(m, s)?;
    let p = mixture(b, &dists);
    let mut total = 0.0;
    for bin in AccelBin::ALL {
        if p[bin.index()] > 0.0 {
            total += p[bin.index()] * m.step(s, a, bin)?.1;
        }
    }
    Ok(total)
}

/// Successor distribution under the belief mixture, one entry per bin with
/// positive probability.
pub fn mean_transition<M: InteractionModel>(
    m: &M,
    b: Belief,
    s: &M::State,
    a: RobotAction,
) -> Result<Vec<(M::State, f64)>> {
    let (dists, _) = human_rows(m, s)?;
    let p = mixture(b, &dists);
    let mut out = Vec::with_capacity(3);
    for bin in AccelBin::ALL {
        if p[bin.index()] > 0.0 {
            out.push((m.step(s, a, bin)?.0, p[bin.index()]));
        }
    }
    Ok(out)
}

pub(crate) fn check_distribution(p: &[f64; 3]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|v| !(0.0..=1.0 + 1e-12).contains(v)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Numeric(format!("invalid human distribution {p:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEC: [f64; 3] = [1.0, 0.0, 0.0];
    const ACC: [f64; 3] = [0.0, 0.0, 1.0];

    #[test]
    fn belief_change_closed_forms() {
        let half = Belief::uniform();
        let disjoint = [ACC, DEC];
        assert!((expected_belief_change(half, &disjoint, &disjoint).unwrap() - 1.0).abs() < 1e-12);
        let same = [[0.2, 0.3, 0.5]; 2];
        assert_eq!(expected_belief_change(half, &same, &same).unwrap(), 0.0);
        for vertex in [Belief::certain(Intention::Aggressive), Belief::certain(Intention::Conservative)] {
            assert_eq!(expected_belief_change(vertex, &disjoint, &disjoint).unwrap(), 0.0);
        }
    }

    #[test]
    fn posterior_arithmetic() {
        let liks = [[0.2, 0.5, 0.3], [0.8, 0.1, 0.1]];
        let b = posterior(Belief::uniform(), &liks, AccelBin::Decelerate).unwrap();
        assert!((b.p_conservative() - 0.8).abs() < 1e-12);
    }
}
