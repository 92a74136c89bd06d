//! Gaussian white noise model in sequence form.
//!
//! Observing `dX_t = f0(t)dt + n^{-1/2}dW_t` on `[0,1]` is equivalent to
//! observing the basis coefficients `x_j = f0_j + z_j/√n`, `z_j` iid standard
//! normal. The prior is conjugate given `(J, s²)`:
//!
//! * coefficients: independent Gaussians with precision `n + τ_j^{-2}`,
//!   `τ_j² = s²·j^{-1-2α}`;
//! * scale: inverse gamma with shape `a + J/2`,
//!   rate `b + ½·Σ_{j≤J} j^{1+2α} f_j²`;
//! * level: a closed-form marginal over `{1..J_max}`,
//!   so the Gibbs sweep never needs trans-dimensional proposals.
//!
//! The same conjugacy yields an exact grid posterior over `(J, s²)` with the
//! coefficients analytically marginalized, used as the oracle the sampler is
//! checked against.

use crate::basis::TrueFunction;
use crate::chain::{ChainState, ModelTag, PosteriorChain};
use crate::prior::{PriorSpec, ScalePrior};
use crate::rng::CounterRng;
use crate::stats::{self, ln_normal_pdf};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

/// Observed coefficients `x_j = ⟨dX, ψ_j⟩`, `j = 1..=j_max`, at noise level
/// `1/√n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhiteNoiseData {
    pub n: u64,
    pub x: Vec<f64>,
}

impl WhiteNoiseData {
    pub fn j_max(&self) -> usize {
        self.x.len()
    }
}

/// Simulate `x_j = f0_j + z_j/√n`; coefficients of `f0` beyond its stored
/// resolution are zero.
pub fn simulate_wn(f0: &TrueFunction, n: u64, j_max: usize, seed: u64) -> WhiteNoiseData {
    let mut rng = CounterRng::new(seed);
    let sd = 1.0 / (n as f64).sqrt();
    let x = (1..=j_max)
        .map(|j| {
            let z: f64 = rng.sample(StandardNormal);
            f0.coeff(j) + sd * z
        })
        .collect();
    WhiteNoiseData { n, x }
}

/// Per-coefficient Gaussian posterior given `(J, s²)`.
#[derive(Clone, Debug)]
pub struct CoeffPosterior {
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
}

/// Posterior law of `(f_1..f_J)` given `(J, s², data)`: with
/// `τ_j² = s²·j^{-1-2α}`, `var_j = 1/(n + τ_j^{-2})` and
/// `mean_j = n·x_j·var_j`.
pub fn coeff_posterior(
    data: &WhiteNoiseData,
    j_level: usize,
    s2: f64,
    alpha: f64,
) -> Result<CoeffPosterior> {
    if j_level > data.j_max() {
        return Err(Error::invalid("j_level", "exceeds data j_max"));
    }
    let n = data.n as f64;
    let mut means = Vec::with_capacity(j_level);
    let mut vars = Vec::with_capacity(j_level);
    for j in 1..=j_level {
        let tau2 = s2 * (j as f64).powf(-1.0 - 2.0 * alpha);
        let var = 1.0 / (n + 1.0 / tau2);
        means.push(n * data.x[j - 1] * var);
        vars.push(var);
    }
    Ok(CoeffPosterior { means, vars })
}

/// Conjugate update of the inverse-gamma scale prior given coefficients:
/// `a' = a + J/2`, `b' = b + ½·Σ_{j≤J} j^{1+2α}·f_j²`.
pub fn scale_conditional(coeffs: &[f64], alpha: f64, scale: &ScalePrior) -> Result<(f64, f64)> {
    let ScalePrior::InverseGamma { shape, rate } = scale else {
        return Err(Error::UnsupportedConjugacy);
    };
    let weighted: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| ((i + 1) as f64).powf(1.0 + 2.0 * alpha) * c * c)
        .sum();
    Ok((shape + coeffs.len() as f64 / 2.0, rate + 0.5 * weighted))
}

/// Log evidence of the data given `(J, s²)` with coefficients marginalized:
/// `Σ_{j≤J} log N(x_j; 0, τ_j² + 1/n) + Σ_{J<j≤j_max} log N(x_j; 0, 1/n)`.
pub fn log_marginal(data: &WhiteNoiseData, j_level: usize, s2: f64, alpha: f64) -> Result<f64> {
    if j_level > data.j_max() {
        return Err(Error::invalid("j_level", "exceeds data j_max"));
    }
    let noise_var = 1.0 / data.n as f64;
    let mut total = 0.0;
    for j in 1..=data.j_max() {
        let var = if j <= j_level {
            s2 * (j as f64).powf(-1.0 - 2.0 * alpha) + noise_var
        } else {
            noise_var
        };
        total += ln_normal_pdf(data.x[j - 1], 0.0, var);
    }
    Ok(total)
}

/// `Δ_j(s²) = log N(x_j; 0, τ_j²+1/n) − log N(x_j; 0, 1/n)` for
/// `j = 1..=j_max_infer`; the level conditional is `ln p(J) + Σ_{j≤J} Δ_j`.
fn signal_log_ratios(data: &WhiteNoiseData, j_max_infer: usize, s2: f64, alpha: f64) -> Vec<f64> {
    let noise_var = 1.0 / data.n as f64;
    (1..=j_max_infer)
        .map(|j| {
            let x = data.x[j - 1];
            let var = s2 * (j as f64).powf(-1.0 - 2.0 * alpha) + noise_var;
            ln_normal_pdf(x, 0.0, var) - ln_normal_pdf(x, 0.0, noise_var)
        })
        .collect()
}

/// Default cap on the truncation levels the posterior enumerates:
/// `4·⌈n^{1/(1+2α)}⌉`, clamped to the data resolution. Posterior mass at the
/// cap is flagged by the grid oracle.
pub fn default_j_max(n: u64, alpha: f64, j_max_data: usize) -> usize {
    let oracle = (n as f64).powf(1.0 / (1.0 + 2.0 * alpha)).ceil() as usize;
    (4 * oracle).clamp(1, j_max_data)
}

/// Exact posterior over `(J, s²-cell)` with coefficients marginalized.
#[derive(Clone, Debug)]
pub struct GridPosterior {
    /// Cell centers, log-spaced.
    pub s2_centers: Vec<f64>,
    /// Cell edges, length `s2_centers.len() + 1`.
    pub s2_edges: Vec<f64>,
    /// Normalized log weights, indexed `[J-1][cell]`.
    pub log_weights: Vec<Vec<f64>>,
    /// Gaussian coefficient laws per `(J, cell)`.
    pub coeff_laws: Vec<Vec<CoeffPosterior>>,
    pub j_max: usize,
    pub alpha: f64,
    /// Set when the s² boundary cells carry > 1e-4 posterior mass (grid too
    /// short) or `P(J = J_max) > 1e-3` (level cap binding).
    pub warnings: Vec<String>,
}

/// Default s² grid bounds and size used by the harness.
pub const S2_GRID_LO: f64 = 1e-6;
pub const S2_GRID_HI: f64 = 1e6;

/// Compute the exact grid posterior. Weights are
/// `log p(J) + log g(s²) + log Δs² + log_marginal(J, s²)`, normalized by
/// log-sum-exp.
pub fn grid_posterior(
    data: &WhiteNoiseData,
    spec: &PriorSpec,
    s2_grid_size: usize,
    j_max_infer: usize,
) -> Result<GridPosterior> {
    if s2_grid_size < 2 {
        return Err(Error::invalid("s2_grid_size", "must be >= 2"));
    }
    if j_max_infer == 0 || j_max_infer > data.j_max() {
        return Err(Error::invalid("j_max_infer", "must lie in 1..=data j_max"));
    }
    let (lo, hi) = (S2_GRID_LO.ln(), S2_GRID_HI.ln());
    let m = s2_grid_size;
    let s2_edges: Vec<f64> = (0..=m)
        .map(|k| (lo + (hi - lo) * k as f64 / m as f64).exp())
        .collect();
    let s2_centers: Vec<f64> = (0..m)
        .map(|k| (s2_edges[k] * s2_edges[k + 1]).sqrt())
        .collect();

    let noise_var = 1.0 / data.n as f64;
    // Base: all-noise log likelihood, shared by every (J, s²).
    let base: f64 = data
        .x
        .iter()
        .map(|&x| ln_normal_pdf(x, 0.0, noise_var))
        .sum();

    let mut log_weights = vec![vec![0.0f64; m]; j_max_infer];
    let mut coeff_laws: Vec<Vec<CoeffPosterior>> =
        (0..j_max_infer).map(|_| Vec::with_capacity(m)).collect();
    let ln_prior_j: Vec<f64> = (1..=j_max_infer).map(|j| spec.trunc.ln_pmf(j)).collect();

    for (k, (&center, w)) in s2_centers.iter().zip(s2_edges.windows(2)).enumerate() {
        let ln_g = spec.scale.ln_density(center);
        let ln_width = (w[1] - w[0]).ln();
        let deltas = signal_log_ratios(data, j_max_infer, center, spec.alpha);
        let mut cum = 0.0;
        for j in 1..=j_max_infer {
            cum += deltas[j - 1];
            log_weights[j - 1][k] = ln_prior_j[j - 1] + ln_g + ln_width + base + cum;
        }
        for j in 1..=j_max_infer {
            coeff_laws[j - 1].push(coeff_posterior(data, j, center, spec.alpha)?);
        }
    }

    // Normalize.
    let flat: Vec<f64> = log_weights.iter().flatten().cloned().collect();
    let lse = stats::log_sum_exp(&flat);
    for row in &mut log_weights {
        for w in row.iter_mut() {
            *w -= lse;
        }
    }

    let mut warnings = Vec::new();
    let boundary_mass: f64 = (0..j_max_infer)
        .map(|ji| log_weights[ji][0].exp() + log_weights[ji][m - 1].exp())
        .sum();
    if boundary_mass > 1e-4 {
        warnings.push(format!(
            "s2 grid boundary cells carry posterior mass {boundary_mass:.3e} > 1e-4"
        ));
    }
    let cap_mass: f64 = log_weights[j_max_infer - 1].iter().map(|w| w.exp()).sum();
    if cap_mass > 1e-3 && j_max_infer > 1 {
        warnings.push(format!(
            "level cap J_max = {j_max_infer} carries posterior mass {cap_mass:.3e} > 1e-3"
        ));
    }

    Ok(GridPosterior {
        s2_centers,
        s2_edges,
        log_weights,
        coeff_laws,
        j_max: j_max_infer,
        alpha: spec.alpha,
        warnings,
    })
}

impl GridPosterior {
    /// Total posterior mass (should be 1 after normalization).
    pub fn total_mass(&self) -> f64 {
        self.log_weights
            .iter()
            .flatten()
            .map(|w| w.exp())
            .sum()
    }

    /// Posterior `P(J = j)` for `j = 1..=j_max`.
    pub fn level_marginal(&self) -> Vec<f64> {
        self.log_weights
            .iter()
            .map(|row| row.iter().map(|w| w.exp()).sum())
            .collect()
    }

    /// Exact posterior mean of each coefficient, length `j_max`.
    pub fn posterior_mean_coeffs(&self) -> Vec<f64> {
        let mut means = vec![0.0f64; self.j_max];
        for (ji, row) in self.log_weights.iter().enumerate() {
            for (k, lw) in row.iter().enumerate() {
                let w = lw.exp();
                let law = &self.coeff_laws[ji][k];
                for (j, m) in law.means.iter().enumerate() {
                    means[j] += w * m;
                }
            }
        }
        means
    }

    /// Exact iid draws from the grid posterior (cell by weight, then the
    /// cell's Gaussian coefficient law), packaged as a chain so the same
    /// summaries apply.
    pub fn sample_states(&self, n_draws: usize, seed: u64) -> PosteriorChain {
        let mut rng = CounterRng::new(seed);
        let flat: Vec<f64> = self.log_weights.iter().flatten().cloned().collect();
        let m = self.s2_centers.len();
        let states = (0..n_draws)
            .map(|_| {
                let idx = stats::sample_categorical_log(&mut rng, &flat);
                let (ji, k) = (idx / m, idx % m);
                let law = &self.coeff_laws[ji][k];
                let coeffs: Vec<f64> = law
                    .means
                    .iter()
                    .zip(&law.vars)
                    .map(|(&mean, &var)| {
                        let z: f64 = rng.sample(StandardNormal);
                        mean + var.sqrt() * z
                    })
                    .collect();
                ChainState {
                    j: ji + 1,
                    s2: self.s2_centers[k],
                    coeffs,
                }
            })
            .collect();
        PosteriorChain {
            states,
            seed,
            burn_in: 0,
            model: ModelTag::GridOracle,
        }
    }
}

/// One Gibbs sweep: coefficients given `(J, s²)`, scale given coefficients,
/// then the level from its closed-form conditional with coefficients redrawn.
pub(crate) fn gibbs_sweep_wn(
    state: &mut ChainState,
    data: &WhiteNoiseData,
    spec: &PriorSpec,
    j_max_infer: usize,
    s2_grid: Option<&[f64]>,
    rng: &mut CounterRng,
) -> Result<()> {
    // 1. coefficients | J, s².
    let law = coeff_posterior(data, state.j, state.s2, spec.alpha)?;
    state.coeffs = law
        .means
        .iter()
        .zip(&law.vars)
        .map(|(&m, &v)| {
            let z: f64 = rng.sample(StandardNormal);
            m + v.sqrt() * z
        })
        .collect();

    // 2. s² | coefficients: conjugate inverse gamma, or a grid draw from the
    //    exact conditional when the scale prior is not inverse gamma.
    match scale_conditional(&state.coeffs, spec.alpha, &spec.scale) {
        Ok((a_post, b_post)) => {
            let gamma = Gamma::new(a_post, 1.0 / b_post).expect("valid posterior parameters");
            let y: f64 = gamma.sample(rng);
            state.s2 = 1.0 / y.max(f64::MIN_POSITIVE);
        }
        Err(Error::UnsupportedConjugacy) => {
            let grid = s2_grid.expect("grid fallback requires s2 grid");
            let log_w: Vec<f64> = grid
                .iter()
                .map(|&s2| {
                    let mut lw = spec.scale.ln_density(s2);
                    for (i, c) in state.coeffs.iter().enumerate() {
                        let var = s2 * ((i + 1) as f64).powf(-1.0 - 2.0 * spec.alpha);
                        lw += ln_normal_pdf(*c, 0.0, var);
                    }
                    lw
                })
                .collect();
            state.s2 = grid[stats::sample_categorical_log(rng, &log_w)];
        }
        Err(e) => return Err(e),
    }

    // 3. J | s², data: enumerate the marginal over 1..=J_max, then redraw
    //    the coefficients at the new level.
    let deltas = signal_log_ratios(data, j_max_infer, state.s2, spec.alpha);
    let mut log_w = Vec::with_capacity(j_max_infer);
    let mut cum = 0.0;
    for j in 1..=j_max_infer {
        cum += deltas[j - 1];
        log_w.push(spec.trunc.ln_pmf(j) + cum);
    }
    state.j = 1 + stats::sample_categorical_log(rng, &log_w);
    let law = coeff_posterior(data, state.j, state.s2, spec.alpha)?;
    state.coeffs = law
        .means
        .iter()
        .zip(&law.vars)
        .map(|(&m, &v)| {
            let z: f64 = rng.sample(StandardNormal);
            m + v.sqrt() * z
        })
        .collect();
    Ok(())
}

fn log_spaced_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..m)
        .map(|k| (llo + (lhi - llo) * (k as f64 + 0.5) / m as f64).exp())
        .collect()
}

/// Conjugate Gibbs sampler with the default level cap.
pub fn gibbs_wn(
    data: &WhiteNoiseData,
    spec: &PriorSpec,
    iters: usize,
    burn_in: usize,
    seed: u64,
) -> Result<PosteriorChain> {
    let j_max = default_j_max(data.n, spec.alpha, data.j_max());
    gibbs_wn_with_level_cap(data, spec, iters, burn_in, j_max, seed)
}

/// Conjugate Gibbs sampler with an explicit level cap.
pub fn gibbs_wn_with_level_cap(
    data: &WhiteNoiseData,
    spec: &PriorSpec,
    iters: usize,
    burn_in: usize,
    j_max_infer: usize,
    seed: u64,
) -> Result<PosteriorChain> {
    if iters <= burn_in {
        return Err(Error::invalid("iters", "must exceed burn_in"));
    }
    if j_max_infer == 0 || j_max_infer > data.j_max() {
        return Err(Error::invalid("j_max_infer", "must lie in 1..=data j_max"));
    }
    let mut rng = CounterRng::new(seed);
    let s2_grid = if spec.scale.is_conjugate() {
        None
    } else {
        Some(log_spaced_grid(S2_GRID_LO, S2_GRID_HI, 400))
    };
    let mut state = ChainState {
        j: 1,
        s2: 1.0,
        coeffs: vec![0.0],
    };
    let mut states = Vec::with_capacity(iters);
    for _ in 0..iters {
        gibbs_sweep_wn(
            &mut state,
            data,
            spec,
            j_max_infer,
            s2_grid.as_deref(),
            &mut rng,
        )?;
        states.push(state.clone());
    }
    Ok(PosteriorChain {
        states,
        seed,
        burn_in,
        model: ModelTag::WhiteNoise,
    })
}
