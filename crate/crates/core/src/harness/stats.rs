use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Outcome of a two-sample test of "a is smaller than b".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Degrees of freedom; `None` for normal-approximation tests.
    pub df: Option<f64>,
    /// One-sided p-value for the alternative `a < b`.
    pub p_less: f64,
    pub p_two_sided: f64,
}

impl TestResult {
    pub fn less_at(&self, alpha: f64) -> bool {
        self.p_less < alpha
    }
}

/// Sample mean and standard error of the mean (n − 1 denominator).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

// Zero standard error: the comparison is decided by the means alone.
fn degenerate(diff: f64) -> (f64, f64, f64) {
    if diff < 0.0 {
        (f64::NEG_INFINITY, 0.0, 0.0)
    } else if diff > 0.0 {
        (f64::INFINITY, 1.0, 0.0)
    } else {
        (0.0, 1.0, 1.0)
    }
}

/// Welch's unequal-variance t-test from per-sample means and standard
/// errors.
pub fn welch_from_summary(
    mean_a: f64,
    se_a: f64,
    n_a: usize,
    mean_b: f64,
    se_b: f64,
    n_b: usize,
) -> Result<TestResult> {
    if n_a < 2 || n_b < 2 {
        return Err(Error::Numeric("welch test needs two samples per group".into()));
    }
    let (va, vb) = (se_a * se_a, se_b * se_b);
    let se = (va + vb).sqrt();
    if se == 0.0 {
        let (statistic, p_less, p_two_sided) = degenerate(mean_a - mean_b);
        return Ok(TestResult {
            statistic,
            df: None,
            p_less,
            p_two_sided,
        });
    }
    let df = (va + vb).powi(2) / (va * va / (n_a - 1) as f64 + vb * vb / (n_b - 1) as f64);
    let t = (mean_a - mean_b) / se;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(TestResult {
        statistic: t,
        df: Some(df),
        p_less: dist.cdf(t),
        p_two_sided: 2.0 * dist.cdf(-t.abs()),
    })
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let (ma, sa) = mean_and_se(a);
    let (mb, sb) = mean_and_se(b);
    welch_from_summary(ma, sa, a.len(), mb, sb, b.len())
}

/// Pooled two-proportion z-test of `x_a / n_a < x_b / n_b`.
pub fn two_proportion_z_test(x_a: usize, n_a: usize, x_b: usize, n_b: usize) -> Result<TestResult> {
    if n_a == 0 || n_b == 0 || x_a > n_a || x_b > n_b {
        return Err(Error::Numeric(format!("invalid proportions {x_a}/{n_a} and {x_b}/{n_b}")));
    }
    let (pa, pb) = (x_a as f64 / n_a as f64, x_b as f64 / n_b as f64);
    let pooled = (x_a + x_b) as f64 / (n_a + n_b) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    if se == 0.0 {
        let (statistic, p_less, p_two_sided) = degenerate(pa - pb);
        return Ok(TestResult {
            statistic,
            df: None,
            p_less,
            p_two_sided,
        });
    }
    let z = (pa - pb) / se;
    let dist = Normal::new(0.0, 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(TestResult {
        statistic: z,
        df: None,
        p_less: dist.cdf(z),
        p_two_sided: 2.0 * dist.cdf(-z.abs()),
    })
}
