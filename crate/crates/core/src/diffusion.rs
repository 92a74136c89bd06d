//! Drift estimation for an ergodic one-dimensional diffusion.
//!
//! The process solves `dX_t = b(X_t)dt + σ(X_t)dW_t`, `X_0 = 0`, with known
//! `σ` bounded away from zero. The drift equals a finite series on `[0,1]`
//! and a mean-reverting pull `-κ(x - ½)` outside, blended linearly over
//! narrow buffers so `b` stays continuous. Only the restriction of the drift
//! to `[0,1]` is estimated: the log likelihood from the path reduces to the
//! quadratic form
//!
//! ```text
//! ℓ(f) = fᵀμ - ½ fᵀΣf,
//! μ_j   = Σ_k ψ_j(X_k)/σ²(X_k)·ΔX_k,      (X_k ∈ [0,1])
//! Σ_ij  = Σ_k ψ_i(X_k)ψ_j(X_k)/σ²(X_k)·dt,
//! ```
//!
//! left-point Itô sums on the simulation grid. Gibbs inference then mirrors
//! the white-noise sampler: Gaussian coefficients with precision
//! `Σ_J + D_J/s²`, the conjugate inverse-gamma scale step, and an enumerated
//! level conditional with closed-form Gaussian marginals.

use crate::basis::{fill_fourier_row, SeriesFunction};
use crate::chain::{ChainState, ModelTag, PosteriorChain};
use crate::prior::PriorSpec;
use crate::rng::CounterRng;
use crate::stats;
use crate::whitenoise::scale_conditional;
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

/// Known diffusion coefficient.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSpec {
    Constant { value: f64 },
    /// Piecewise-linear positive function sampled on a grid, extended
    /// constantly outside the grid range.
    Grid { xs: Vec<f64>, values: Vec<f64> },
}

impl SigmaSpec {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::invalid("sigma", "must be positive and finite"));
        }
        Ok(SigmaSpec::Constant { value })
    }

    pub fn grid(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::invalid("sigma grid", "need >= 2 matching knots"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sigma grid", "xs must be increasing"));
        }
        let spec = SigmaSpec::Grid { xs, values };
        spec.validate_min(1e-8)?;
        Ok(spec)
    }

    /// σ(x).
    pub fn value(&self, x: f64) -> f64 {
        match self {
            SigmaSpec::Constant { value } => *value,
            SigmaSpec::Grid { xs, values } => {
                if x <= xs[0] {
                    return values[0];
                }
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return values[last];
                }
                let idx = xs.partition_point(|&gx| gx <= x) - 1;
                let w = (x - xs[idx]) / (xs[idx + 1] - xs[idx]);
                values[idx] * (1.0 - w) + values[idx + 1] * w
            }
        }
    }

    /// Check `σ(x) ≥ σ_min > 0` on a dense grid spanning the knots.
    pub fn validate_min(&self, sigma_min: f64) -> Result<()> {
        match self {
            SigmaSpec::Constant { value } => {
                if *value < sigma_min {
                    return Err(Error::invalid("sigma", "below sigma_min"));
                }
            }
            SigmaSpec::Grid { xs, .. } => {
                let lo = xs[0] - 1.0;
                let hi = xs[xs.len() - 1] + 1.0;
                for i in 0..=4096 {
                    let x = lo + (hi - lo) * i as f64 / 4096.0;
                    if self.value(x) < sigma_min {
                        return Err(Error::invalid(
                            "sigma",
                            format!("drops below sigma_min at x = {x}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Width of the continuity blend zones just outside `[0,1]`.
pub const DRIFT_BUFFER: f64 = 0.05;

/// Drift model: series on `[0,1]`, mean reversion `-κ(x - ½)` outside,
/// linear blend over `[-buffer, 0]` and `[1, 1+buffer]`.
#[derive(Clone, Debug)]
pub struct SdeModel {
    pub drift_inside: SeriesFunction,
    pub kappa: f64,
    pub sigma: SigmaSpec,
    pub t_horizon: f64,
}

impl SdeModel {
    pub fn new(drift_inside: SeriesFunction, kappa: f64, sigma: SigmaSpec, t_horizon: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::invalid("kappa", "must be positive and finite"));
        }
        if !t_horizon.is_finite() || t_horizon <= 0.0 {
            return Err(Error::invalid("t_horizon", "must be positive and finite"));
        }
        sigma.validate_min(1e-8)?;
        Ok(SdeModel {
            drift_inside,
            kappa,
            sigma,
            t_horizon,
        })
    }

    fn outside(&self, x: f64) -> f64 {
        -self.kappa * (x - 0.5)
    }

    /// Continuous drift on all of ℝ.
    pub fn drift(&self, x: f64) -> f64 {
        if (0.0..=1.0).contains(&x) {
            self.drift_inside.eval_at(x)
        } else if (-DRIFT_BUFFER..0.0).contains(&x) {
            let t = (x + DRIFT_BUFFER) / DRIFT_BUFFER; // 0 at -buffer, 1 at 0
            (1.0 - t) * self.outside(x) + t * self.drift_inside.eval_at(0.0)
        } else if x > 1.0 && x <= 1.0 + DRIFT_BUFFER {
            let t = (x - 1.0) / DRIFT_BUFFER; // 0 at 1, 1 at 1+buffer
            (1.0 - t) * self.drift_inside.eval_at(1.0) + t * self.outside(x)
        } else {
            self.outside(x)
        }
    }
}

/// An Euler–Maruyama path on the grid `0, dt, …, T`.
#[derive(Clone, Debug)]
pub struct DiffusionPath {
    pub dt: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl DiffusionPath {
    pub fn t_horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }
}

/// Euler–Maruyama integration of `dX = b(X)dt + σ(X)dW` from `X_0 = 0`:
/// `X_{k+1} = X_k + b(X_k)dt + σ(X_k)√dt·z_k`.
pub fn simulate_with_drift<F: Fn(f64) -> f64>(
    drift: F,
    sigma: &SigmaSpec,
    t_horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<DiffusionPath> {
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::invalid("dt", "must lie in (0, 1e-3]"));
    }
    let steps = (t_horizon / dt).floor() as usize;
    if steps as f64 > 1e8 {
        return Err(Error::invalid("dt", "T/dt exceeds 1e8 steps"));
    }
    let mut rng = CounterRng::new(seed);
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0f64;
    values.push(x);
    for step in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        x += drift(x) * dt + sigma.value(x) * sqrt_dt * z;
        if !x.is_finite() {
            return Err(Error::SimulationDiverged { step, value: x });
        }
        values.push(x);
    }
    Ok(DiffusionPath { dt, values, seed })
}

/// Simulate the drift model by Euler–Maruyama.
pub fn simulate_sde(model: &SdeModel, dt: f64, seed: u64) -> Result<DiffusionPath> {
    simulate_with_drift(|x| model.drift(x), &model.sigma, model.t_horizon, dt, seed)
}

/// Girsanov sufficient statistics of a path for drift inference on `[0,1]`:
/// score vector `μ`, information matrix `Σ`, and the occupation time.
#[derive(Clone, Debug)]
pub struct DriftSufficientStats {
    pub mu: Vec<f64>,
    /// Row-major `j_max × j_max`, symmetric positive semidefinite.
    pub sigma: Vec<f64>,
    pub j_max: usize,
    pub time_in: f64,
}

impl DriftSufficientStats {
    pub fn sigma_entry(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.j_max + j]
    }

    /// Leading `j×j` block of Σ as a dense matrix.
    pub fn sigma_block(&self, j: usize) -> DMatrix<f64> {
        DMatrix::from_fn(j, j, |r, c| self.sigma_entry(r, c))
    }

    pub fn mu_block(&self, j: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.mu[..j])
    }

    /// Smallest eigenvalue (for PSD diagnostics).
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.sigma_block(self.j_max);
        m.symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> f64 {
        (0..self.j_max).map(|i| self.sigma_entry(i, i)).sum()
    }
}

/// Per-block accumulator: μ, packed upper triangle of Σ/dt, occupation time.
struct StatsBlock {
    mu: Vec<f64>,
    upper: Vec<f64>,
    time_in: f64,
}

impl StatsBlock {
    fn zero(j_max: usize) -> Self {
        StatsBlock {
            mu: vec![0.0; j_max],
            upper: vec![0.0; j_max * (j_max + 1) / 2],
            time_in: 0.0,
        }
    }

    fn merge(mut self, other: &StatsBlock) -> StatsBlock {
        for (a, b) in self.mu.iter_mut().zip(&other.mu) {
            *a += b;
        }
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += b;
        }
        self.time_in += other.time_in;
        self
    }
}

/// Pairwise tree reduction in a fixed order, independent of how the blocks
/// were produced.
fn tree_reduce(mut blocks: Vec<StatsBlock>, j_max: usize) -> StatsBlock {
    if blocks.is_empty() {
        return StatsBlock::zero(j_max);
    }
    while blocks.len() > 1 {
        let mut next = Vec::with_capacity(blocks.len().div_ceil(2));
        let mut it = blocks.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.merge(&b)),
                None => next.push(a),
            }
        }
        blocks = next;
    }
    blocks.pop().unwrap()
}

const STATS_BLOCK_STEPS: usize = 65_536;

/// Accumulate Riemann–Itô sums over the steps with `X_k ∈ [0,1]` (boundary
/// points count as inside). Blocks of fixed size are reduced by a pairwise
/// tree, so the result is identical for any worker count.
pub fn sufficient_stats(
    path: &DiffusionPath,
    sigma: &SigmaSpec,
    j_max: usize,
) -> Result<DriftSufficientStats> {
    if j_max == 0 {
        return Err(Error::invalid("j_max", "must be >= 1"));
    }
    let n_steps = path.values.len() - 1;
    let dt = path.dt;
    let ranges: Vec<(usize, usize)> = (0..n_steps)
        .step_by(STATS_BLOCK_STEPS)
        .map(|lo| (lo, (lo + STATS_BLOCK_STEPS).min(n_steps)))
        .collect();

    use rayon::prelude::*;
    let blocks: Vec<StatsBlock> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut block = StatsBlock::zero(j_max);
            let mut psi = vec![0.0f64; j_max];
            for k in lo..hi {
                let x = path.values[k];
                if !(0.0..=1.0).contains(&x) {
                    continue;
                }
                let dx = path.values[k + 1] - x;
                let s = sigma.value(x);
                let w = 1.0 / (s * s);
                fill_fourier_row(x, &mut psi);
                let wdx = w * dx;
                for (j, &p) in psi.iter().enumerate() {
                    block.mu[j] += p * wdx;
                }
                let mut idx = 0;
                for i in 0..j_max {
                    let pi_w = psi[i] * w;
                    for &pj in &psi[i..] {
                        block.upper[idx] += pi_w * pj;
                        idx += 1;
                    }
                }
                block.time_in += dt;
            }
            block
        })
        .collect();

    let total = tree_reduce(blocks, j_max);
    if total.time_in <= 0.0 {
        return Err(Error::DegenerateData);
    }
    let mut sigma_mat = vec![0.0f64; j_max * j_max];
    let mut idx = 0;
    for i in 0..j_max {
        for j in i..j_max {
            let v = total.upper[idx] * dt;
            sigma_mat[i * j_max + j] = v;
            sigma_mat[j * j_max + i] = v;
            idx += 1;
        }
    }
    Ok(DriftSufficientStats {
        mu: total.mu,
        sigma: sigma_mat,
        j_max,
        time_in: total.time_in,
    })
}

/// Girsanov log likelihood of drift `f` (leading coordinates):
/// `fᵀμ - ½ fᵀΣf`.
pub fn drift_loglik(stats: &DriftSufficientStats, f: &SeriesFunction) -> f64 {
    let j = f.truncation_level();
    assert!(j <= stats.j_max, "drift has more coefficients than stats");
    let c = f.coeffs();
    let mut lin = 0.0;
    let mut quad = 0.0;
    for i in 0..j {
        lin += c[i] * stats.mu[i];
        for k in 0..j {
            quad += c[i] * stats.sigma_entry(i, k) * c[k];
        }
    }
    lin - 0.5 * quad
}

/// Cholesky with a jitter-retry policy: add `1e-10·trace` to the diagonal,
/// at most `max_retries` times.
fn cholesky_with_jitter(
    mut m: DMatrix<f64>,
    max_retries: usize,
) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let jitter = 1e-10 * m.trace().abs().max(1e-300);
    for retry in 0..=max_retries {
        match Cholesky::new(m.clone()) {
            Some(c) => return Ok(c),
            None => {
                if retry == max_retries {
                    break;
                }
                for i in 0..m.nrows() {
                    m[(i, i)] += jitter;
                }
            }
        }
    }
    Err(Error::NumericalDegeneracy {
        retries: max_retries,
    })
}

/// Level weights and, for the chosen level, the posterior Gaussian pieces.
/// For level `J` with prior coefficient precision `D_J/s²`,
/// `D_J = diag(j^{1+2α})`:
///
/// ```text
/// log w(J) = log p(J) + ½ μ_Jᵀ P_J^{-1} μ_J − ½ log det(I + s² D^{-1/2} Σ_J D^{-1/2}),
/// P_J = Σ_J + D_J/s².
/// ```
fn level_log_weight(
    stats: &DriftSufficientStats,
    spec: &PriorSpec,
    s2: f64,
    j: usize,
) -> Result<(f64, Cholesky<f64, nalgebra::Dyn>, DVector<f64>)> {
    let mut p = stats.sigma_block(j);
    let mut ln_det_d_over_s2 = 0.0;
    for i in 0..j {
        let d = ((i + 1) as f64).powf(1.0 + 2.0 * spec.alpha);
        p[(i, i)] += d / s2;
        ln_det_d_over_s2 += (d / s2).ln();
    }
    let chol = cholesky_with_jitter(p, 3)?;
    let mu = stats.mu_block(j);
    let solved = chol.solve(&mu);
    let quad = mu.dot(&solved);
    // det(I + s² D^{-1/2} Σ D^{-1/2}) = det(P) / det(D/s²).
    let l = chol.l_dirty();
    let ln_det_p: f64 = (0..j).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    let log_w = spec.trunc.ln_pmf(j) + 0.5 * quad - 0.5 * (ln_det_p - ln_det_d_over_s2);
    Ok((log_w, chol, solved))
}

fn draw_coeffs_from(
    chol: &Cholesky<f64, nalgebra::Dyn>,
    mean: &DVector<f64>,
    rng: &mut CounterRng,
) -> Vec<f64> {
    let j = mean.len();
    let z = DVector::from_fn(j, |_, _| {
        let v: f64 = rng.sample(StandardNormal);
        v
    });
    // P = LLᵀ ⇒ f = mean + L^{-T} z has covariance P^{-1}.
    let l = chol.l();
    let lt = l.transpose();
    let spread = lt
        .solve_upper_triangular(&z)
        .expect("cholesky factor is invertible");
    (mean + spread).iter().cloned().collect()
}

/// One Gibbs sweep for the drift posterior.
pub(crate) fn gibbs_sweep_sde(
    state: &mut ChainState,
    stats_in: &DriftSufficientStats,
    spec: &PriorSpec,
    j_max: usize,
    rng: &mut CounterRng,
) -> Result<()> {
    // 1. f | J, s²: Gaussian with precision Σ_J + D_J/s².
    let (_, chol, mean) = level_log_weight(stats_in, spec, state.s2, state.j)?;
    state.coeffs = draw_coeffs_from(&chol, &mean, rng);

    // 2. s² | f: conjugate inverse gamma.
    let (a_post, b_post) = scale_conditional(&state.coeffs, spec.alpha, &spec.scale)?;
    let gamma = Gamma::new(a_post, 1.0 / b_post).expect("valid posterior parameters");
    let y: f64 = gamma.sample(rng);
    state.s2 = 1.0 / y.max(f64::MIN_POSITIVE);

    // 3. J | s²: enumerate closed-form marginals, then redraw coefficients.
    let mut log_w = Vec::with_capacity(j_max);
    let mut pieces = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let (lw, chol, mean) = level_log_weight(stats_in, spec, state.s2, j)?;
        log_w.push(lw);
        pieces.push((chol, mean));
    }
    let pick = stats::sample_categorical_log(rng, &log_w);
    state.j = pick + 1;
    let (chol, mean) = &pieces[pick];
    state.coeffs = draw_coeffs_from(chol, mean, rng);
    Ok(())
}

/// Conjugate Gibbs sampler for the drift restricted to `[0,1]`.
pub fn gibbs_sde(
    stats_in: &DriftSufficientStats,
    spec: &PriorSpec,
    iters: usize,
    burn_in: usize,
    j_max: usize,
    seed: u64,
) -> Result<PosteriorChain> {
    if iters <= burn_in {
        return Err(Error::invalid("iters", "must exceed burn_in"));
    }
    if !spec.scale.is_conjugate() {
        return Err(Error::UnsupportedConjugacy);
    }
    if j_max == 0 || j_max > stats_in.j_max {
        return Err(Error::invalid("j_max", "must lie in 1..=stats j_max"));
    }
    let mut rng = CounterRng::new(seed);
    let mut state = ChainState {
        j: 1,
        s2: 1.0,
        coeffs: vec![0.0],
    };
    let mut states = Vec::with_capacity(iters);
    for _ in 0..iters {
        gibbs_sweep_sde(&mut state, stats_in, spec, j_max, &mut rng)?;
        states.push(state.clone());
    }
    Ok(PosteriorChain {
        states,
        seed,
        burn_in,
        model: ModelTag::Diffusion,
    })
}

/// Pointwise posterior mean and 5–95% band of the drift on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct DriftBand {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q95: Vec<f64>,
}

impl DriftBand {
    /// Average band width over the grid.
    pub fn mean_width(&self) -> f64 {
        self.q05
            .iter()
            .zip(&self.q95)
            .map(|(lo, hi)| hi - lo)
            .sum::<f64>()
            / self.x.len() as f64
    }

    /// L² error of the posterior mean against a reference drift, by the
    /// trapezoid rule on the band's grid.
    pub fn mean_l2_error_against<F: Fn(f64) -> f64>(&self, truth: F) -> f64 {
        let m = self.x.len();
        let mut acc = 0.0;
        for i in 0..m - 1 {
            let d0 = self.mean[i] - truth(self.x[i]);
            let d1 = self.mean[i + 1] - truth(self.x[i + 1]);
            acc += 0.5 * (d0 * d0 + d1 * d1) * (self.x[i + 1] - self.x[i]);
        }
        acc.sqrt()
    }
}

/// Synthesize every kept state on `x_grid` and return pointwise mean and
/// 5/95 quantiles.
pub fn recover_drift(chain: &PosteriorChain, x_grid: &[f64]) -> DriftBand {
    let kept = chain.kept();
    assert!(!kept.is_empty(), "no post-burn-in states");
    let m = x_grid.len();
    let mut columns = vec![Vec::with_capacity(kept.len()); m];
    let max_j = kept.iter().map(|s| s.j).max().unwrap_or(1);
    let mut psi = vec![0.0f64; max_j];
    for (col, &x) in columns.iter_mut().zip(x_grid) {
        fill_fourier_row(x, &mut psi);
        for s in kept {
            let v: f64 = s.coeffs.iter().zip(&psi).map(|(c, p)| c * p).sum();
            col.push(v);
        }
    }
    let mean = columns.iter().map(|c| stats::mean(c)).collect();
    let q05 = columns.iter().map(|c| stats::quantile(c, 0.05)).collect();
    let q95 = columns.iter().map(|c| stats::quantile(c, 0.95)).collect();
    DriftBand {
        x: x_grid.to_vec(),
        mean,
        q05,
        q95,
    }
}
