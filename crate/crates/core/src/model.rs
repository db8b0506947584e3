//! The probability-matching popularity model.
//!
//! Agents take an action with probability equal to their belief that it is
//! good. Because of that, last step's (smoothed) adoption share stands in for
//! the prior, and one step of Bayesian updating becomes
//!
//! ```text
//! p_t = f(q) * (n + alpha) / (N + alpha)
//! ```
//!
//! where `f` is the likelihood ratio of the newest quality signal. The
//! expected change in popularity then follows `(f - 1) * n + f * alpha`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("popularity {popularity} outside [0, {population}]")]
    PopularityOutOfRange { popularity: u32, population: u32 },
    #[error("prior {0} outside [0, 1]")]
    PriorOutOfRange(f64),
    #[error("f value must be nonnegative and finite, got {0}")]
    InvalidF(f64),
}

/// How the likelihood ratio `f` is obtained from a performance value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FSpec {
    /// `clamp(c0 + c1 * q, clamp_min, clamp_max)`.
    Linear {
        c0: f64,
        c1: f64,
        clamp_min: f64,
        clamp_max: f64,
    },
    /// Gaussian likelihood ratio against the running popularity prior.
    ExactBayes,
}

impl FSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if let FSpec::Linear {
            c0,
            c1,
            clamp_min,
            clamp_max,
        } = *self
        {
            for (name, v) in [
                ("c0", c0),
                ("c1", c1),
                ("clamp_min", clamp_min),
                ("clamp_max", clamp_max),
            ] {
                if !v.is_finite() {
                    return Err(ModelError::NonFinite { name, value: v });
                }
            }
            if clamp_min < 0.0 {
                return Err(ModelError::InvalidParam {
                    field: "clamp_min",
                    reason: format!("must be >= 0, got {clamp_min}"),
                });
            }
            if clamp_max <= clamp_min {
                return Err(ModelError::InvalidParam {
                    field: "clamp_max",
                    reason: format!("must exceed clamp_min ({clamp_min}), got {clamp_max}"),
                });
            }
        }
        Ok(())
    }
}

/// Two-hypothesis Gaussian signal model. Daily returns are in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub mu_good: f64,
    pub mu_bad: f64,
    pub sigma: f64,
}

impl SignalModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("mu_good", self.mu_good),
            ("mu_bad", self.mu_bad),
            ("sigma", self.sigma),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite { name, value: v });
            }
        }
        if self.sigma <= 0.0 {
            return Err(ModelError::InvalidParam {
                field: "sigma",
                reason: format!("must be > 0, got {}", self.sigma),
            });
        }
        Ok(())
    }

    pub fn mean(&self, good: bool) -> f64 {
        if good {
            self.mu_good
        } else {
            self.mu_bad
        }
    }
}

fn default_window_len() -> usize {
    5
}

/// Parameters of a single trader's popularity process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Size of the pool of potential copiers (N).
    pub population_size: u32,
    /// Smoothing constant added to counts; must satisfy `0 < alpha < N`.
    pub alpha: f64,
    pub f_spec: FSpec,
    pub signal_model: SignalModel,
    /// Number of business-day steps; trajectories hold `horizon + 1` days.
    pub horizon: u32,
    pub initial_popularity: u32,
    #[serde(default)]
    pub seed: u64,
    /// Business days in the rolling performance window.
    #[serde(default = "default_window_len")]
    pub window_len: usize,
    /// Probability that the trader closes no trades on a given day.
    #[serde(default)]
    pub inactive_day_prob: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.population_size == 0 {
            return Err(ModelError::InvalidParam {
                field: "population_size",
                reason: "must be positive".into(),
            });
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha >= f64::from(self.population_size) {
            return Err(ModelError::InvalidParam {
                field: "alpha",
                reason: format!(
                    "must satisfy 0 < alpha < population_size ({}), got {}",
                    self.population_size, self.alpha
                ),
            });
        }
        if self.horizon == 0 {
            return Err(ModelError::InvalidParam {
                field: "horizon",
                reason: "must be positive".into(),
            });
        }
        if self.initial_popularity > self.population_size {
            return Err(ModelError::InvalidParam {
                field: "initial_popularity",
                reason: format!(
                    "must be <= population_size ({}), got {}",
                    self.population_size, self.initial_popularity
                ),
            });
        }
        if self.window_len == 0 {
            return Err(ModelError::InvalidParam {
                field: "window_len",
                reason: "must be >= 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.inactive_day_prob) {
            return Err(ModelError::InvalidParam {
                field: "inactive_day_prob",
                reason: format!("must lie in [0, 1], got {}", self.inactive_day_prob),
            });
        }
        self.f_spec.validate()?;
        self.signal_model.validate()
    }

    /// Smoothed popularity share `(n + alpha) / (N + alpha)`.
    pub fn smoothed_share(&self, popularity: u32) -> f64 {
        (f64::from(popularity) + self.alpha) / (f64::from(self.population_size) + self.alpha)
    }

    fn check_popularity(&self, popularity: u32) -> Result<(), ModelError> {
        if popularity > self.population_size {
            return Err(ModelError::PopularityOutOfRange {
                popularity,
                population: self.population_size,
            });
        }
        Ok(())
    }
}

/// Popularity entering a step together with the belief it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorState {
    pub popularity: u32,
    pub posterior: f64,
}

impl PosteriorState {
    pub fn advance(params: &ModelParams, popularity: u32, f_value: f64) -> Result<Self, ModelError> {
        Ok(PosteriorState {
            popularity,
            posterior: posterior_step(popularity, params, f_value)?,
        })
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}

fn check_f(f_value: f64) -> Result<(), ModelError> {
    if f_value.is_finite() && f_value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidF(f_value))
    }
}

/// Linear approximation of the likelihood ratio, clamped to `[clamp_min, clamp_max]`.
///
/// Passing [`FSpec::ExactBayes`] is a contract violation and is reported as an
/// invalid parameter.
pub fn linear_f(q: f64, spec: &FSpec) -> Result<f64, ModelError> {
    check_finite("q", q)?;
    match *spec {
        FSpec::Linear {
            c0,
            c1,
            clamp_min,
            clamp_max,
        } => Ok((c0 + c1 * q).clamp(clamp_min, clamp_max)),
        FSpec::ExactBayes => Err(ModelError::InvalidParam {
            field: "f_spec",
            reason: "linear_f requires the Linear variant".into(),
        }),
    }
}

fn gaussian_density(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Likelihood ratio `P(q | good) / P(q)` for Gaussian signals, where `P(q)`
/// mixes the two hypotheses with weight `prior` on "good".
///
/// If both densities underflow, the signal carries no usable information and
/// the ratio is 1.
pub fn exact_f(q: f64, prior: f64, model: &SignalModel) -> Result<f64, ModelError> {
    check_finite("q", q)?;
    if !(0.0..=1.0).contains(&prior) {
        return Err(ModelError::PriorOutOfRange(prior));
    }
    model.validate()?;
    if prior == 1.0 || model.mu_good == model.mu_bad {
        return Ok(1.0);
    }
    let good = gaussian_density(q, model.mu_good, model.sigma);
    let bad = gaussian_density(q, model.mu_bad, model.sigma);
    let evidence = prior * good + (1.0 - prior) * bad;
    if evidence == 0.0 {
        return Ok(1.0);
    }
    Ok(good / evidence)
}

/// Evaluates `f` for the given spec. `ExactBayes` uses the smoothed
/// popularity share as its prior.
pub fn evaluate_f(q: f64, popularity: u32, params: &ModelParams) -> Result<f64, ModelError> {
    match params.f_spec {
        FSpec::Linear { .. } => linear_f(q, &params.f_spec),
        FSpec::ExactBayes => {
            let prior = params.smoothed_share(popularity).min(1.0);
            exact_f(q, prior, &params.signal_model)
        }
    }
}

/// Adoption probability for the next step: `f * (n + alpha) / (N + alpha)`,
/// clamped to `[0, 1]`.
pub fn posterior_step(prev_popularity: u32, params: &ModelParams, f_value: f64) -> Result<f64, ModelError> {
    check_f(f_value)?;
    params.check_popularity(prev_popularity)?;
    Ok((f_value * params.smoothed_share(prev_popularity)).clamp(0.0, 1.0))
}

/// Approximate expected one-step change `(f - 1) * n + f * alpha`. Unclamped.
pub fn expected_delta_approx(popularity: u32, alpha: f64, f_value: f64) -> Result<f64, ModelError> {
    check_finite("alpha", alpha)?;
    check_finite("f_value", f_value)?;
    let n = f64::from(popularity);
    Ok((f_value - 1.0) * n + f_value * alpha)
}

/// Exact expected change under binomial adoption: `N * p - n`.
pub fn expected_delta_exact(popularity: u32, params: &ModelParams, f_value: f64) -> Result<f64, ModelError> {
    let p = posterior_step(popularity, params, f_value)?;
    Ok(f64::from(params.population_size) * p - f64::from(popularity))
}

/// Gap between the exact and approximate expectation when no clamp binds:
/// `f * alpha * (n + alpha) / (N + alpha)`.
pub fn approximation_gap(popularity: u32, params: &ModelParams, f_value: f64) -> f64 {
    f_value * params.alpha * params.smoothed_share(popularity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn linear(c0: f64, c1: f64, lo: f64, hi: f64) -> FSpec {
        FSpec::Linear {
            c0,
            c1,
            clamp_min: lo,
            clamp_max: hi,
        }
    }

    fn params(n: u32, alpha: f64) -> ModelParams {
        ModelParams {
            population_size: n,
            alpha,
            f_spec: linear(1.0, 0.01, 0.0, 10.0),
            signal_model: SignalModel {
                mu_good: 1.0,
                mu_bad: -1.0,
                sigma: 1.0,
            },
            horizon: 10,
            initial_popularity: 0,
            seed: 0,
            window_len: 5,
            inactive_day_prob: 0.0,
        }
    }

    #[test]
    fn linear_f_examples() {
        let spec = linear(1.0, 0.01, 0.0, 10.0);
        assert_eq!(linear_f(0.0, &spec).unwrap(), 1.0);
        assert_eq!(linear_f(-200.0, &spec).unwrap(), 0.0);
        assert_relative_eq!(linear_f(50.0, &spec).unwrap(), 1.5, epsilon = 1e-15);
        assert!(linear_f(f64::NAN, &spec).is_err());
        assert!(linear_f(f64::INFINITY, &spec).is_err());
        assert!(linear_f(0.0, &FSpec::ExactBayes).is_err());
    }

    #[test]
    fn exact_f_examples() {
        let same = SignalModel {
            mu_good: 0.3,
            mu_bad: 0.3,
            sigma: 2.0,
        };
        assert_eq!(exact_f(5.0, 0.2, &same).unwrap(), 1.0);
        let m = SignalModel {
            mu_good: 1.0,
            mu_bad: -1.0,
            sigma: 1.0,
        };
        assert_eq!(exact_f(-3.0, 1.0, &m).unwrap(), 1.0);
        // 2 / (1 + e^-2), pinned from a 40-digit evaluation
        assert_relative_eq!(exact_f(1.0, 0.5, &m).unwrap(), 1.761_594_155_955_764_9, epsilon = 1e-9);
        assert!(matches!(exact_f(0.0, 1.5, &m), Err(ModelError::PriorOutOfRange(_))));
        assert!(exact_f(0.0, -0.1, &m).is_err());
    }

    #[test]
    fn exact_f_underflow_is_uninformative() {
        let m = SignalModel {
            mu_good: 0.0,
            mu_bad: 1.0,
            sigma: 0.01,
        };
        assert_eq!(exact_f(1e6, 0.5, &m).unwrap(), 1.0);
    }

    #[test]
    fn posterior_step_examples() {
        let p = params(99, 1.0);
        assert_relative_eq!(posterior_step(0, &p, 1.0).unwrap(), 0.01, epsilon = 1e-15);
        assert_eq!(posterior_step(99, &p, 1.0).unwrap(), 1.0);
        assert_eq!(posterior_step(10, &p, 10.0).unwrap(), 1.0);
        assert!(posterior_step(0, &p, -0.1).is_err());
        assert!(posterior_step(0, &p, f64::NAN).is_err());
        assert!(posterior_step(100, &p, 1.0).is_err());
    }

    #[test]
    fn expected_delta_examples() {
        assert_relative_eq!(expected_delta_approx(10, 0.5, 1.0).unwrap(), 0.5);
        assert_relative_eq!(expected_delta_approx(100, 1.0, 1.5).unwrap(), 51.5);
        assert_relative_eq!(expected_delta_approx(0, 1.0, 0.5).unwrap(), 0.5);
        assert!(expected_delta_approx(0, f64::NAN, 0.5).is_err());

        let p = params(99, 1.0);
        assert_relative_eq!(expected_delta_exact(0, &p, 1.0).unwrap(), 0.99, epsilon = 1e-12);
        assert_eq!(expected_delta_exact(99, &p, 1.0).unwrap(), 0.0);

        let big = params(10_000, 1.0);
        let exact = expected_delta_exact(100, &big, 1.5).unwrap();
        // 10000 * 1.5 * 101 / 10001 - 100
        assert_relative_eq!(exact, 51.484_851_514_848_515, max_relative = 1e-12);
        assert_relative_eq!(51.5 - exact, 0.015_148_485_151_484_852, max_relative = 1e-9);
    }

    #[test]
    fn params_validation() {
        let mut p = params(100, 1.0);
        assert!(p.validate().is_ok());
        p.alpha = 100.0;
        assert!(matches!(
            p.validate(),
            Err(ModelError::InvalidParam { field: "alpha", .. })
        ));
        p.alpha = 0.0;
        assert!(p.validate().is_err());
        p.alpha = 1.0;
        p.initial_popularity = 101;
        assert!(p.validate().is_err());
        p.initial_popularity = 0;
        p.f_spec = linear(1.0, 0.1, -0.5, 2.0);
        assert!(matches!(
            p.validate(),
            Err(ModelError::InvalidParam { field: "clamp_min", .. })
        ));
        p.f_spec = linear(1.0, 0.1, 1.0, 1.0);
        assert!(p.validate().is_err());
        p.f_spec = FSpec::ExactBayes;
        p.signal_model.sigma = 0.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn posterior_in_unit_interval(
            n_pop in 1u32..100_000,
            frac in 0.0f64..=1.0,
            alpha_frac in 1e-6f64..0.999,
            f in 0.0f64..1e3,
        ) {
            let mut p = params(n_pop, 1.0);
            p.alpha = alpha_frac * f64::from(n_pop);
            let n = (frac * f64::from(n_pop)).floor() as u32;
            let post = posterior_step(n, &p, f).unwrap();
            prop_assert!((0.0..=1.0).contains(&post));
        }

        #[test]
        fn approximation_identity_when_unclamped(
            n_pop in 10u32..100_000,
            frac in 0.0f64..=1.0,
            alpha in 0.01f64..5.0,
            f in 0.0f64..3.0,
        ) {
            let mut p = params(n_pop, alpha.min(f64::from(n_pop) / 2.0));
            p.alpha = alpha.min(f64::from(n_pop) / 2.0);
            let n = (frac * f64::from(n_pop)).floor() as u32;
            prop_assume!(f * p.smoothed_share(n) <= 1.0);
            let exact = expected_delta_exact(n, &p, f).unwrap();
            let approx = expected_delta_approx(n, p.alpha, f).unwrap();
            let gap = approximation_gap(n, &p, f);
            let diff = (approx - exact).abs();
            prop_assert!((diff - gap).abs() <= 1e-12 * (approx.abs() + exact.abs()).max(1.0));
        }

        #[test]
        fn approx_monotone_in_q(
            n in 0u32..10_000,
            alpha in 0.01f64..5.0,
            c1 in 1e-4f64..1.0,
            q1 in -50.0f64..50.0,
            dq in 0.0f64..50.0,
        ) {
            let spec = linear(1.0, c1, 0.0, 1e9);
            let f1 = linear_f(q1, &spec).unwrap();
            let f2 = linear_f(q1 + dq, &spec).unwrap();
            prop_assume!(f1 > 0.0);
            let d1 = expected_delta_approx(n, alpha, f1).unwrap();
            let d2 = expected_delta_approx(n, alpha, f2).unwrap();
            prop_assert!(d2 >= d1);
        }
    }
}
