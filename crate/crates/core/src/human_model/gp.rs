use super::demos::HumanDemo;
use crate::domain::{pad_history, BoundedHistory, Intention, WorldState};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const JITTER: f64 = 1e-8;

/// RBF length scales and observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpHyperparams {
    /// Distance length scale (m).
    pub ell_d: f64,
    /// Speed length scale (m/s).
    pub ell_v: f64,
    /// History acceleration length scale (m/s²).
    pub ell_a: f64,
    /// Observation noise standard deviation (m/s²).
    pub sigma_n: f64,
    /// Training points kept per fit; larger sets are thinned with an even
    /// stride so the cubic factorization stays affordable.
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_max_points() -> usize {
    600
}

impl Default for GpHyperparams {
    fn default() -> Self {
        GpHyperparams {
            ell_d: 8.0,
            ell_v: 3.0,
            ell_a: 4.0,
            sigma_n: 0.15,
            max_points: default_max_points(),
        }
    }
}

impl GpHyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ell_d", self.ell_d),
            ("ell_v", self.ell_v),
            ("ell_a", self.ell_a),
            ("sigma_n", self.sigma_n),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if self.max_points == 0 {
            return Err(Error::Config("max_points must be positive".into()));
        }
        Ok(())
    }

    fn scale(&self, dim: usize) -> f64 {
        match dim {
            0 | 1 => self.ell_d,
            2 | 3 => self.ell_v,
            _ => self.ell_a,
        }
    }
}

/// `[d_h, d_r, v_h, v_r, aR_0, aH_0, ..., aR_{k-1}, aH_{k-1}]`.
pub fn feature_vector(x: &WorldState, h: &BoundedHistory) -> Vec<f64> {
    let mut f = vec![x.d_h, x.d_r, x.v_h, x.v_r];
    f.extend(h.flat());
    f
}

/// Squared-exponential kernel with per-group length scales, unit prefactor.
pub fn rbf_kernel(a: &[f64], b: &[f64], h: &GpHyperparams) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(kernel_unchecked(a, b, h))
}

fn kernel_unchecked(a: &[f64], b: &[f64], h: &GpHyperparams) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let z = (x - y) / h.scale(i);
            z * z
        })
        .sum();
    (-0.5 * s).exp()
}

/// Training pairs (feature vector, human acceleration) of one episode.
pub fn training_pairs(demo: &HumanDemo, k: usize) -> Vec<(Vec<f64>, f64)> {
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(demo.rows.len());
    let mut out = Vec::with_capacity(demo.rows.len());
    for r in &demo.rows {
        let h = pad_history(&raw, k);
        out.push((feature_vector(&r.state, &h), r.human_accel));
        raw.push((r.robot_accel, r.human_accel));
    }
    out
}

/// Fitted GP regressor of human acceleration for one intention.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub intention: Intention,
    pub k: usize,
    pub hyper: GpHyperparams,
    /// Constant prior mean: the arithmetic mean of the training targets
    /// (pooled over both intentions when fitted together).
    pub prior_mean: f64,
    inputs: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    /// Inverse of the noisy Gram matrix, for predictive variances.
    k_inv: DMatrix<f64>,
}

impl GpModel {
    /// Fits on all episodes, which must share one intention label.
    pub fn fit(demos: &[HumanDemo], k: usize, hyper: &GpHyperparams) -> Result<GpModel> {
        let first = demos
            .first()
            .ok_or_else(|| Error::Fit("no demonstration episodes".into()))?;
        if let Some(bad) = demos.iter().find(|d| d.intention != first.intention) {
            return Err(Error::Fit(format!(
                "mixed intention labels ({} and {})",
                first.intention, bad.intention
            )));
        }
        let pairs: Vec<_> = demos.iter().flat_map(|d| training_pairs(d, k)).collect();
        Self::fit_pairs(first.intention, k, pairs, hyper)
    }

    /// Fits both intention models with one shared prior mean, the mean
    /// target over all episodes, so that far from the data the two models
    /// agree. Returns `[aggressive, conservative]`.
    pub fn fit_intentions(demos: &[HumanDemo], k: usize, hyper: &GpHyperparams) -> Result<[GpModel; 2]> {
        let pairs = |i: Intention| -> Vec<_> {
            demos
                .iter()
                .filter(|d| d.intention == i)
                .flat_map(|d| training_pairs(d, k))
                .collect()
        };
        let (agg, con) = (pairs(Intention::Aggressive), pairs(Intention::Conservative));
        if agg.is_empty() || con.is_empty() {
            return Err(Error::Fit("both intentions need demonstrations".into()));
        }
        let all = thin(agg.clone(), hyper.max_points)
            .into_iter()
            .chain(thin(con.clone(), hyper.max_points));
        let (sum, n) = all.fold((0.0, 0usize), |(s, n), (_, y)| (s + y, n + 1));
        let mean = sum / n as f64;
        Ok([
            Self::fit_with_mean(Intention::Aggressive, k, agg, hyper, Some(mean))?,
            Self::fit_with_mean(Intention::Conservative, k, con, hyper, Some(mean))?,
        ])
    }

    pub fn fit_pairs(
        intention: Intention,
        k: usize,
        pairs: Vec<(Vec<f64>, f64)>,
        hyper: &GpHyperparams,
    ) -> Result<GpModel> {
        Self::fit_with_mean(intention, k, pairs, hyper, None)
    }

    /// `prior_mean: None` uses the mean of the (thinned) targets.
    fn fit_with_mean(
        intention: Intention,
        k: usize,
        pairs: Vec<(Vec<f64>, f64)>,
        hyper: &GpHyperparams,
        prior_mean: Option<f64>,
    ) -> Result<GpModel> {
        hyper.validate()?;
        if pairs.is_empty() {
            return Err(Error::Fit("no training pairs".into()));
        }
        let dim = 4 + 2 * k;
        if let Some((f, _)) = pairs.iter().find(|(f, _)| f.len() != dim) {
            return Err(Error::Shape {
                expected: dim,
                got: f.len(),
            });
        }
        let pairs = thin(pairs, hyper.max_points);
        let n = pairs.len();
        let prior_mean = prior_mean.unwrap_or_else(|| pairs.iter().map(|(_, y)| y).sum::<f64>() / n as f64);
        let noise = hyper.sigma_n * hyper.sigma_n + JITTER;
        let gram = DMatrix::from_fn(n, n, |i, j| {
            kernel_unchecked(&pairs[i].0, &pairs[j].0, hyper) + if i == j { noise } else { 0.0 }
        });
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Numeric("kernel matrix is not positive definite".into()))?;
        let y = DVector::from_iterator(n, pairs.iter().map(|(_, y)| y - prior_mean));
        let alpha = chol.solve(&y);
        let k_inv = chol.inverse();
        if alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite GP weights".into()));
        }
        Ok(GpModel {
            intention,
            k,
            hyper: *hyper,
            prior_mean,
            inputs: pairs.into_iter().map(|(f, _)| f).collect(),
            alpha,
            k_inv,
        })
    }

    pub fn dim(&self) -> usize {
        4 + 2 * self.k
    }

    pub fn n_points(&self) -> usize {
        self.inputs.len()
    }

    /// Predictive mean and standard deviation of the observed acceleration.
    pub fn predict(&self, f: &[f64]) -> Result<(f64, f64)> {
        if f.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: f.len(),
            });
        }
        let ks = DVector::from_iterator(
            self.inputs.len(),
            self.inputs.iter().map(|x| kernel_unchecked(x, f, &self.hyper)),
        );
        let mean = self.prior_mean + ks.dot(&self.alpha);
        let explained = (&self.k_inv * &ks).dot(&ks);
        let var = (1.0 - explained).max(0.0) + self.hyper.sigma_n * self.hyper.sigma_n;
        Ok((mean, var.sqrt()))
    }

    /// Predictive mean only, skipping the quadratic variance term.
    pub fn predict_mean(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: f.len(),
            });
        }
        let dot: f64 = self
            .inputs
            .iter()
            .zip(self.alpha.iter())
            .map(|(x, a)| kernel_unchecked(x, f, &self.hyper) * a)
            .sum();
        Ok(self.prior_mean + dot)
    }

    pub fn predict_state(&self, x: &WorldState, h: &BoundedHistory) -> Result<(f64, f64)> {
        self.predict(&feature_vector(x, h))
    }
}

/// Keeps at most `max` pairs, taken at an even stride.
fn thin<T>(pairs: Vec<T>, max: usize) -> Vec<T> {
    let n = pairs.len();
    if n <= max {
        return pairs;
    }
    let mut next = 0;
    let mut picked = 0;
    let mut out = Vec::with_capacity(max);
    for (i, p) in pairs.into_iter().enumerate() {
        if picked < max && i == next {
            out.push(p);
            picked += 1;
            next = picked * n / max;
        }
    }
    out
}

/// One row of the history-length study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryStudyRow {
    pub k: usize,
    pub train_mse: f64,
    pub test_mse: f64,
}

/// Episodes whose index is 4 mod 5 form the test split.
pub fn is_test_episode(index: usize) -> bool {
    index % 5 == 4
}

/// Fits per-intention models for each `k` on 80% of the episodes and
/// reports train and held-out MSE pooled over both intentions.
pub fn history_length_study(
    demos: &[HumanDemo],
    k_values: &[usize],
    hyper: &GpHyperparams,
) -> Result<Vec<HistoryStudyRow>> {
    if k_values.is_empty() {
        return Err(Error::Config("history study needs at least one k".into()));
    }
    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let (mut train_se, mut train_n, mut test_se, mut test_n) = (0.0, 0usize, 0.0, 0usize);
        for intention in Intention::ALL {
            let eps: Vec<&HumanDemo> = demos.iter().filter(|d| d.intention == intention).collect();
            if eps.is_empty() {
                continue;
            }
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, d) in eps.iter().enumerate() {
                let pairs = training_pairs(d, k);
                if is_test_episode(i) {
                    test.extend(pairs);
                } else {
                    train.extend(pairs);
                }
            }
            let model = GpModel::fit_pairs(intention, k, train.clone(), hyper)?;
            for (f, y) in &train {
                train_se += (model.predict_mean(f)? - y).powi(2);
                train_n += 1;
            }
            for (f, y) in &test {
                test_se += (model.predict_mean(f)? - y).powi(2);
                test_n += 1;
            }
        }
        if train_n == 0 || test_n == 0 {
            return Err(Error::Fit("history study needs at least five episodes".into()));
        }
        rows.push(HistoryStudyRow {
            k,
            train_mse: train_se / train_n as f64,
            test_mse: test_se / test_n as f64,
        });
    }
    Ok(rows)
}
