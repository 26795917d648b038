use super::config::PlannerConfig;
use super::model::{expected_belief_change, human_rows, mixture, Guidance, InteractionModel};
use crate::domain::{AccelBin, Belief, Intention, RobotAction};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// Result of one planner invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub action: RobotAction,
    pub value: f64,
    /// Action values at the root, in action order.
    pub q: Vec<(RobotAction, f64)>,
    /// Depth of the deepest layer that was backed up.
    pub depth: usize,
    /// True when the budget or the node cap cut the lookahead short.
    pub truncated: bool,
    pub nodes: usize,
}

struct Branch {
    prob: f64,
    child: usize,
    reward: f64,
}

struct Edge {
    action: RobotAction,
    weight: f64,
    branches: Vec<Branch>,
}

struct Node<S> {
    state: S,
    terminal: bool,
    /// Expected belief change from observing the human here.
    info: f64,
    edges: Vec<Edge>,
}

/// Kept human bins with renormalized probabilities.
fn branch_bins(p: &[f64; 3], min_prob: f64) -> Vec<(AccelBin, f64)> {
    let mut kept: Vec<(AccelBin, f64)> = AccelBin::ALL
        .into_iter()
        .filter(|b| p[b.index()] > min_prob)
        .map(|b| (b, p[b.index()]))
        .collect();
    if kept.is_empty() {
        let best = AccelBin::ALL
            .into_iter()
            .fold(AccelBin::Decelerate, |acc, b| if p[b.index()] > p[acc.index()] { b } else { acc });
        kept.push((best, p[best.index()]));
    }
    let z: f64 = kept.iter().map(|(_, q)| q).sum();
    if min_prob > 0.0 && z > 0.0 {
        for (_, q) in kept.iter_mut() {
            *q /= z;
        }
    }
    kept
}

/// Finite-horizon value of the mean MDP with the belief held fixed, plus
/// the exploration bonus `β · p^G(s, a) · r^B(b, s, a)` at every step.
///
/// The lookahead is expanded layer by layer from `s0`; nodes of one layer
/// sharing a model key are merged. Nodes of the last layer take the
/// model's leaf value. Ties between actions go to the earliest action in
/// the canonical order.
pub fn solve_bonus_mdp<M, G>(
    m: &M,
    b: Belief,
    s0: &M::State,
    cfg: &PlannerConfig,
    guide: &G,
) -> Result<Plan>
where
    M: InteractionModel,
    G: Guidance<M::State> + ?Sized,
{
    cfg.validate()?;
    let started = Instant::now();
    let budget = (cfg.budget_s > 0.0).then(|| Duration::from_secs_f64(cfg.budget_s));
    let with_bonus = cfg.beta != 0.0;
    let discount = cfg.gamma.powi(m.steps_per_transition() as i32);

    let make_node = |state: M::State| -> Result<Node<M::State>> {
        let terminal = m.is_terminal(&state);
        let info = if with_bonus && !terminal {
            let (dists, liks) = human_rows(m, &state)?;
            expected_belief_change(b, &dists, &liks)?
        } else {
            0.0
        };
        Ok(Node {
            state,
            terminal,
            info,
            edges: Vec::new(),
        })
    };

    let mut layers: Vec<Vec<Node<M::State>>> = vec![vec![make_node(s0.clone())?]];
    let mut truncated = false;
    for depth in 0..cfg.horizon {
        let mut next: Vec<Node<M::State>> = Vec::new();
        // Terminal successors never share a node with live ones.
        let mut index: HashMap<(bool, M::Key), usize> = HashMap::new();
        let layer = layers.last_mut().expect("non-empty");
        for node in layer.iter_mut().filter(|n| !n.terminal) {
            let dists = [
                m.human_distribution(&node.state, Intention::Aggressive)?,
                m.human_distribution(&node.state, Intention::Conservative)?,
            ];
            let bins = branch_bins(&mixture(b, &dists), cfg.min_branch_prob);
            let mut actions = m.actions(&node.state);
            actions.sort();
            for a in actions {
                let weight = if with_bonus { guide.weight(&node.state, a)? } else { 1.0 };
                let mut branches = Vec::with_capacity(bins.len());
                for &(bin, prob) in &bins {
                    let (succ, reward) = m.step(&node.state, a, bin)?;
                    let key = (m.is_terminal(&succ), m.key(&succ));
                    let child = match index.get(&key) {
                        Some(&c) => c,
                        None => {
                            next.push(make_node(succ)?);
                            index.insert(key, next.len() - 1);
                            next.len() - 1
                        }
                    };
                    branches.push(Branch { prob, child, reward });
                }
                node.edges.push(Edge {
                    action: a,
                    weight,
                    branches,
                });
            }
        }
        let done = next.is_empty();
        let oversized = next.len() > cfg.max_layer_nodes;
        layers.push(next);
        if done {
            break;
        }
        let late = budget.is_some_and(|d| started.elapsed() > d);
        if (oversized || late) && depth + 1 < cfg.horizon {
            truncated = true;
            break;
        }
    }

    // Backward induction; the last layer holds leaves.
    let nodes = layers.iter().map(Vec::len).sum();
    let depth = layers.len() - 1;
    let mut values: Vec<f64> = layers[depth]
        .iter()
        .map(|n| if n.terminal { 0.0 } else { m.leaf_value(&n.state) })
        .collect();
    let mut root_q = Vec::new();
    for d in (0..depth).rev() {
        let children = &layers[d + 1];
        let mut current = Vec::with_capacity(layers[d].len());
        for node in &layers[d] {
            if node.terminal {
                current.push(0.0);
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for e in &node.edges {
                let mut q = 0.0;
                let mut bonus = 0.0;
                for br in &e.branches {
                    q += br.prob * (br.reward + discount * values[br.child]);
                    bonus += br.prob * children[br.child].info;
                }
                if with_bonus {
                    q += cfg.beta * e.weight * bonus;
                }
                if d == 0 {
                    root_q.push((e.action, q));
                }
                if q > best {
                    best = q;
                }
            }
            current.push(best);
        }
        values = current;
    }
    let root = &layers[0][0];
    if root.terminal || root_q.is_empty() {
        return Err(Error::InvalidState("planning from a terminal state".into()));
    }
    let (action, value) = root_q
        .iter()
        .copied()
        .fold(None, |acc: Option<(RobotAction, f64)>, (a, q)| match acc {
            Some((_, bq)) if q <= bq => acc,
            _ => Some((a, q)),
        })
        .expect("root has actions");
    if !value.is_finite() {
        return Err(Error::Numeric(format!("non-finite plan value {value}")));
    }
    Ok(Plan {
        action,
        value,
        q: root_q,
        depth,
        truncated,
        nodes,
    })
}
