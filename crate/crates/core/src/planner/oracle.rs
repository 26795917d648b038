use super::model::{belief_update, human_rows, mixture, InteractionModel};
use crate::domain::{AccelBin, Belief};
use crate::error::{Error, Result};

/// Default cap on the number of belief-tree leaves the oracle may visit.
pub const ORACLE_CAP: f64 = 1e6;

/// Exact finite-horizon expectimax over the belief MDP: the belief is
/// updated by Bayes rule on every branch. Horizon zero returns the model's
/// leaf value.
pub fn bayes_optimal_value<M: InteractionModel>(
    m: &M,
    b: Belief,
    s: &M::State,
    horizon: usize,
    gamma: f64,
    cap: f64,
) -> Result<f64> {
    let branching = (m.actions(s).len() * AccelBin::ALL.len()) as f64;
    let size = branching.powi(horizon as i32);
    if size > cap {
        return Err(Error::TooLarge(format!(
            "belief tree with branching {branching} and horizon {horizon} has {size:.3e} leaves (cap {cap:.3e})"
        )));
    }
    expectimax(m, b, s, horizon, gamma)
}

fn expectimax<M: InteractionModel>(m: &M, b: Belief, s: &M::State, h: usize, gamma: f64) -> Result<f64> {
    if m.is_terminal(s) {
        return Ok(0.0);
    }
    if h == 0 {
        return Ok(m.leaf_value(s));
    }
    let (dists, _) = human_rows(m, s)?;
    let p = mixture(b, &dists);
    let discount = gamma.powi(m.steps_per_transition() as i32);
    let mut best = f64::NEG_INFINITY;
    for a in m.actions(s) {
        let mut q = 0.0;
        for bin in AccelBin::ALL {
            let w = p[bin.index()];
            if w > 0.0 {
                let (next, r) = m.step(s, a, bin)?;
                let b2 = belief_update(m, b, s, bin)?;
                q += w * (r + discount * expectimax(m, b2, &next, h - 1, gamma)?);
            }
        }
        best = best.max(q);
    }
    Ok(best)
}
