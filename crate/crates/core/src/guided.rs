//! Beta-posterior safe-probability table learned from expert
//! demonstrations.

use crate::domain::{discretize_state, RobotAction, ScenarioKind, WorldState, STATE_CELLS};
use crate::error::{Error, Result};
use crate::human_model::GuideDemo;
use std::fmt::Write as _;

/// Prior pseudo-count for "demonstrated".
pub const PRIOR_ALPHA: f64 = 0.05;
/// Prior pseudo-count for "not demonstrated".
pub const PRIOR_BETA: f64 = 5.0;

/// Posterior mean `(α + n) / (α + β + n)`.
pub fn beta_posterior_mean(alpha: f64, beta: f64, n: u64) -> f64 {
    let n = n as f64;
    (alpha + n) / (alpha + beta + n)
}

/// Demonstration counts per (state bins, robot action).
#[derive(Debug, Clone, PartialEq)]
pub struct SafeProbTable {
    kind: ScenarioKind,
    alpha: f64,
    beta: f64,
    actions: Vec<RobotAction>,
    counts: Vec<u64>,
}

impl SafeProbTable {
    /// Uniform prior, one column per action available in `kind`.
    pub fn new(kind: ScenarioKind) -> Self {
        Self::with_prior(kind, PRIOR_ALPHA, PRIOR_BETA).expect("default prior is valid")
    }

    pub fn with_prior(kind: ScenarioKind, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Config(format!("Beta prior ({alpha}, {beta}) must be positive")));
        }
        let actions = RobotAction::for_scenario(kind).to_vec();
        Ok(SafeProbTable {
            kind,
            alpha,
            beta,
            counts: vec![0; STATE_CELLS * actions.len()],
            actions,
        })
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn actions(&self) -> &[RobotAction] {
        &self.actions
    }

    fn column(&self, a: RobotAction) -> Result<usize> {
        self.actions.iter().position(|&x| x == a).ok_or_else(|| {
            Error::InvalidAction(format!("{a} has no column in the {} table", self.kind))
        })
    }

    fn slot(&self, x: &WorldState, a: RobotAction) -> Result<usize> {
        Ok(discretize_state(x)?.ordinal() * self.actions.len() + self.column(a)?)
    }

    /// Adds one count per demonstrated (state, action) pair.
    pub fn update(&mut self, demos: &[GuideDemo]) -> Result<()> {
        for d in demos {
            if d.kind != self.kind {
                return Err(Error::Config(format!(
                    "{} demonstration fed to the {} table",
                    d.kind, self.kind
                )));
            }
            for r in &d.rows {
                let slot = self.slot(&r.state, r.action)?;
                self.counts[slot] += 1;
            }
        }
        Ok(())
    }

    pub fn count(&self, x: &WorldState, a: RobotAction) -> Result<u64> {
        Ok(self.counts[self.slot(x, a)?])
    }

    pub fn count_at(&self, state_ordinal: usize, a: RobotAction) -> Result<u64> {
        if state_ordinal >= STATE_CELLS {
            return Err(Error::Lookup(format!("state ordinal {state_ordinal}")));
        }
        Ok(self.counts[state_ordinal * self.actions.len() + self.column(a)?])
    }

    /// Posterior mean safe probability of taking `a` in `x`.
    pub fn safe_prob(&self, x: &WorldState, a: RobotAction) -> Result<f64> {
        Ok(beta_posterior_mean(self.alpha, self.beta, self.count(x, a)?))
    }

    pub fn prob_at(&self, state_ordinal: usize, a: RobotAction) -> Result<f64> {
        Ok(beta_posterior_mean(self.alpha, self.beta, self.count_at(state_ordinal, a)?))
    }

    /// Smallest safe probability over the table.
    pub fn phi(&self) -> f64 {
        let n = self.counts.iter().copied().min().unwrap_or(0);
        beta_posterior_mean(self.alpha, self.beta, n)
    }

    /// Flat text form keyed by state ordinal, one count column per action.
    pub fn to_text(&self) -> String {
        let names: Vec<&str> = self.actions.iter().map(|a| a.name()).collect();
        let mut s = format!(
            "safe-table {}\nprior {} {}\nstate,{}\n",
            self.kind,
            self.alpha,
            self.beta,
            names.join(",")
        );
        for (o, row) in self.counts.chunks(self.actions.len()).enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "{o},{}", cells.join(","));
        }
        s
    }

    pub fn parse(text: &str) -> Result<SafeProbTable> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (n, l) = lines.next().ok_or_else(|| Error::parse(1, "empty table"))?;
        let kind = l
            .strip_prefix("safe-table ")
            .and_then(ScenarioKind::parse)
            .ok_or_else(|| Error::parse(n, "expected 'safe-table <scenario>'"))?;
        let (n, l) = lines.next().ok_or_else(|| Error::parse(n + 1, "missing prior line"))?;
        let prior: Vec<f64> = l
            .strip_prefix("prior ")
            .map(|r| r.split_whitespace().filter_map(|t| t.parse().ok()).collect())
            .unwrap_or_default();
        if prior.len() != 2 {
            return Err(Error::parse(n, "expected 'prior <alpha> <beta>'"));
        }
        let mut table =
            SafeProbTable::with_prior(kind, prior[0], prior[1]).map_err(|e| Error::parse(n, e.to_string()))?;
        let (n, l) = lines.next().ok_or_else(|| Error::parse(n + 1, "missing column line"))?;
        let header: Vec<&str> = l.split(',').collect();
        let expected: Vec<&str> = std::iter::once("state")
            .chain(table.actions.iter().map(|a| a.name()))
            .collect();
        if header != expected {
            return Err(Error::parse(n, format!("expected columns {}", expected.join(","))));
        }
        let width = table.actions.len();
        let mut rows = 0;
        for (n, l) in lines {
            let v: Vec<u64> = l
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::parse(n, format!("invalid count '{t}'"))))
                .collect::<Result<_>>()?;
            if v.len() != width + 1 || v[0] != rows as u64 || rows >= STATE_CELLS {
                return Err(Error::parse(n, "expected 'state' ordinal in order plus one count per action"));
            }
            table.counts[rows * width..(rows + 1) * width].copy_from_slice(&v[1..]);
            rows += 1;
        }
        if rows != STATE_CELLS {
            return Err(Error::parse(0, format!("expected {STATE_CELLS} rows, found {rows}")));
        }
        Ok(table)
    }
}
