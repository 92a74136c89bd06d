//! Posterior sample chains shared by the white-noise and diffusion samplers.

use crate::basis::TrueFunction;
use crate::stats;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    WhiteNoise,
    Diffusion,
    /// Exact-posterior draws from a grid oracle rather than an MCMC kernel.
    GridOracle,
}

/// One sampler state: truncation level, scale, and the J coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainState {
    pub j: usize,
    pub s2: f64,
    pub coeffs: Vec<f64>,
}

/// A sampled posterior chain with seed provenance. Every state satisfies
/// `J ≥ 1`, `s² > 0`, `coeffs.len() = J`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub states: Vec<ChainState>,
    pub seed: u64,
    pub burn_in: usize,
    pub model: ModelTag,
}

impl PosteriorChain {
    /// States past burn-in.
    pub fn kept(&self) -> &[ChainState] {
        &self.states[self.burn_in.min(self.states.len())..]
    }

    /// Largest truncation level among kept states.
    pub fn max_level(&self) -> usize {
        self.kept().iter().map(|s| s.j).max().unwrap_or(0)
    }

    /// Mean of coefficient `j` (1-based) over kept states, counting states
    /// with `J < j` as zero.
    pub fn coeff_mean(&self, j: usize) -> f64 {
        let kept = self.kept();
        kept.iter()
            .map(|s| if j <= s.j { s.coeffs[j - 1] } else { 0.0 })
            .sum::<f64>()
            / kept.len() as f64
    }

    /// Autocorrelation-adjusted standard error of `coeff_mean(j)`.
    pub fn coeff_mean_se(&self, j: usize) -> f64 {
        let series: Vec<f64> = self
            .kept()
            .iter()
            .map(|s| if j <= s.j { s.coeffs[j - 1] } else { 0.0 })
            .collect();
        stats::chain_se(&series)
    }

    /// Posterior-mean coefficient vector, padded to the largest level seen.
    pub fn mean_coeffs(&self) -> Vec<f64> {
        let dim = self.max_level();
        (1..=dim).map(|j| self.coeff_mean(j)).collect()
    }

    /// Empirical `P(J = j)` over kept states.
    pub fn level_marginal(&self, j_max: usize) -> Vec<f64> {
        let kept = self.kept();
        let mut counts = vec![0usize; j_max + 1];
        for s in kept {
            if s.j <= j_max {
                counts[s.j] += 1;
            }
        }
        counts
            .into_iter()
            .skip(1)
            .map(|c| c as f64 / kept.len() as f64)
            .collect()
    }

    pub fn s2_series(&self) -> Vec<f64> {
        self.kept().iter().map(|s| s.s2).collect()
    }
}

/// Posterior error statistics against a known truth.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// `‖E[f|data] - f0‖₂`.
    pub post_mean_l2_err: f64,
    /// Median over states of `‖f - f0‖₂`.
    pub median_l2_err: f64,
    /// 90th percentile of `‖f - f0‖₂` (empirical contraction radius).
    pub radius_90: f64,
}

/// L² distance in coefficient space between a state and the truth,
/// including the truth's tail beyond the state's level.
pub fn state_l2_error(coeffs: &[f64], f0: &TrueFunction, f0_suffix: &[f64]) -> f64 {
    let j = coeffs.len();
    let mut d2 = f0_suffix[j.min(f0_suffix.len() - 1)];
    for (i, c) in coeffs.iter().enumerate() {
        let t = c - f0.coeff(i + 1);
        d2 += t * t;
    }
    d2.sqrt()
}

/// Summarize a chain against the truth `f0`.
pub fn posterior_summary(chain: &PosteriorChain, f0: &TrueFunction) -> PosteriorSummary {
    let kept = chain.kept();
    assert!(!kept.is_empty(), "no post-burn-in states");
    let suffix = f0.suffix_square_sums();
    let errs: Vec<f64> = kept
        .iter()
        .map(|s| state_l2_error(&s.coeffs, f0, &suffix))
        .collect();
    let mean_coeffs = chain.mean_coeffs();
    PosteriorSummary {
        post_mean_l2_err: state_l2_error(&mean_coeffs, f0, &suffix),
        median_l2_err: stats::quantile(&errs, 0.5),
        radius_90: stats::quantile(&errs, 0.9),
    }
}
