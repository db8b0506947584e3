//! Ordinary least squares by Householder QR.

use super::student_t::student_t_sf;
use super::{AnalysisError, UserDayPoint};

/// A column is treated as linearly dependent on the preceding ones when its
/// orthogonalized norm falls below this fraction of its original norm.
const RANK_TOL: f64 = 1e-10;

/// Plain OLS fit of `y` on the given named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub n_obs: usize,
    pub degrees_of_freedom: usize,
}

/// Fits `y ~ columns` by Householder QR. `columns[j]` has one entry per
/// observation; `names[j]` labels it in singularity errors.
#[allow(clippy::needless_range_loop)]
pub fn least_squares(columns: &[Vec<f64>], names: &[&str], y: &[f64]) -> Result<LeastSquaresFit, AnalysisError> {
    let n = y.len();
    let p = columns.len();
    debug_assert_eq!(names.len(), p);
    if n < p {
        return Err(AnalysisError::TooFewObservations { n_obs: n, min: p });
    }
    if y.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite {
            what: "regression input",
        });
    }

    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    for j in 0..p {
        let original = a[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if original == 0.0 || norm <= RANK_TOL * original {
            return Err(AnalysisError::Singular {
                column: names[j].to_owned(),
            });
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut qty[j..]);
    }

    // back substitution on R beta = (Q^T y)[..p]
    let r = |i: usize, j: usize| a[j][i];
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|k| r(i, k) * beta[k]).sum();
        beta[i] = (qty[i] - s) / r(i, i);
    }

    // R^{-1}, upper triangular; diag of (X'X)^{-1} = row sums of squares
    let mut rinv = vec![vec![0.0; p]; p];
    for i in 0..p {
        rinv[i][i] = 1.0 / r(i, i);
        for j in (i + 1)..p {
            let s: f64 = (i..j).map(|k| rinv[i][k] * r(k, j)).sum();
            rinv[i][j] = -s / r(j, j);
        }
    }

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - columns.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    let rss: f64 = qty[p..].iter().map(|v| v * v).sum();
    let dof = n - p;
    // NaN standard errors when the fit is exactly determined
    let sigma2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    let standard_errors = (0..p)
        .map(|j| (sigma2 * rinv[j][j..].iter().map(|v| v * v).sum::<f64>()).sqrt())
        .collect();

    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if tss > 0.0 {
        1.0 - rss / tss
    } else if rss == 0.0 {
        1.0
    } else {
        0.0
    };

    Ok(LeastSquaresFit {
        coefficients: beta,
        standard_errors,
        residuals,
        rss,
        r_squared,
        n_obs: n,
        degrees_of_freedom: dof,
    })
}

pub const INTERACTION_TERMS: [&str; 4] = ["intercept", "popularity", "performance", "interaction"];

/// Interaction regression of next-day popularity change on popularity,
/// performance and their product.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    /// Intercept, popularity, performance, popularity x performance.
    pub coefficients: [f64; 4],
    pub standard_errors: [f64; 4],
    pub t_stats: [f64; 4],
    pub p_values: [f64; 4],
    pub n_obs: usize,
    pub degrees_of_freedom: usize,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    pub fn interaction(&self) -> (f64, f64) {
        (self.coefficients[3], self.p_values[3])
    }

    pub fn popularity(&self) -> (f64, f64) {
        (self.coefficients[1], self.p_values[1])
    }
}

fn t_and_p(coef: f64, se: f64, dof: usize) -> Result<(f64, f64), AnalysisError> {
    if se == 0.0 {
        return Ok(if coef == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(coef), 0.0)
        });
    }
    let t = coef / se;
    Ok((t, student_t_sf(t, dof as u64)?))
}

/// Design columns `1, n, q, n * q` for the given points, in the given order.
pub fn interaction_design(points: &[UserDayPoint]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let pop: Vec<f64> = points.iter().map(|p| f64::from(p.popularity)).collect();
    let perf: Vec<f64> = points.iter().map(|p| p.performance).collect();
    let inter = pop.iter().zip(&perf).map(|(a, b)| a * b).collect();
    let y = points.iter().map(|p| p.delta as f64).collect();
    (vec![vec![1.0; points.len()], pop, perf, inter], y)
}

/// Fits the interaction model. Points are ordered by `(trader_id, day)` first
/// so the result is independent of input order.
pub fn ols_interaction_fit(points: &[UserDayPoint]) -> Result<RegressionResult, AnalysisError> {
    if points.len() < 5 {
        return Err(AnalysisError::TooFewObservations {
            n_obs: points.len(),
            min: 5,
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| (&a.trader_id, a.day).cmp(&(&b.trader_id, b.day)));
    let (columns, y) = interaction_design(&sorted);
    let fit = least_squares(&columns, &INTERACTION_TERMS, &y)?;

    let mut result = RegressionResult {
        coefficients: [0.0; 4],
        standard_errors: [0.0; 4],
        t_stats: [0.0; 4],
        p_values: [0.0; 4],
        n_obs: fit.n_obs,
        degrees_of_freedom: fit.degrees_of_freedom,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
    };
    for j in 0..4 {
        let (t, p) = t_and_p(fit.coefficients[j], fit.standard_errors[j], fit.degrees_of_freedom)?;
        result.coefficients[j] = fit.coefficients[j];
        result.standard_errors[j] = fit.standard_errors[j];
        result.t_stats[j] = t;
        result.p_values[j] = p;
    }
    Ok(result)
}
