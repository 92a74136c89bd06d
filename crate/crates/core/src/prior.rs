//! The hierarchical series prior and its computable theory quantities.
//!
//! Sampling follows the three-stage scheme: a truncation level `J` from a
//! pmf with (sub-)exponential tail, a scale `s²` from a density that is
//! positive and continuous on `(0,∞)` with power tail, and coefficients
//! `f_j = s · j^{-1/2-α} Z_j` for `j ≤ J`. On top of sampling the module
//! exposes the quantities the contraction-rate analysis is built from:
//! small-ball probabilities (Monte Carlo) and their analytic bounds, RKHS
//! norms and approximants, sieve dimensions, remaining prior mass, covering
//! entropy, and the rate sequences ε_n.

use crate::basis::{BasisSpec, SeriesFunction, TrueFunction};
use crate::rng::CounterRng;
use crate::stats::{self, WilsonCi};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

/// Prior on the truncation level `J`, supported on `{1, 2, …}`.
///
/// All variants have an exponentially decaying upper tail. The geometric and
/// table kinds also satisfy the stronger lower bound `p(j) ≳ e^{-Cj}` needed
/// for the no-log-factor regime; the Poisson prior does not.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncationPrior {
    /// `p(j) = θ(1-θ)^{j-1}` on `{1, 2, …}`.
    Geometric { theta: f64 },
    /// `J = 1 + Poisson(λ)`, shifting the support to `{1, 2, …}`.
    Poisson { lambda: f64 },
    /// Explicit head pmf on `{1..=m}` continued geometrically:
    /// `p(m+k) = pmf[m-1]·ratio^k`. Head plus tail must sum to 1.
    Table { pmf: Vec<f64>, tail_ratio: f64 },
}

impl TruncationPrior {
    pub fn geometric(theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) || theta == 0.0 {
            return Err(Error::invalid("theta", "must lie in (0,1)"));
        }
        Ok(TruncationPrior::Geometric { theta })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::invalid("lambda", "must be positive and finite"));
        }
        Ok(TruncationPrior::Poisson { lambda })
    }

    pub fn table(pmf: Vec<f64>, tail_ratio: f64) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("pmf", "must be nonempty and nonnegative"));
        }
        if !(0.0..1.0).contains(&tail_ratio) {
            return Err(Error::invalid("tail_ratio", "must lie in [0,1)"));
        }
        let last = *pmf.last().unwrap();
        let tail_mass = last * tail_ratio / (1.0 - tail_ratio);
        let total: f64 = pmf.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "pmf",
                format!("head plus declared tail sums to {total}, expected 1 within 1e-12"),
            ));
        }
        Ok(TruncationPrior::Table { pmf, tail_ratio })
    }

    /// Whether the stronger `p(j) ≳ e^{-Cj}` lower-tail condition holds
    /// (true for geometric and table kinds, false for Poisson).
    pub fn has_exponential_lower_bound(&self) -> bool {
        !matches!(self, TruncationPrior::Poisson { .. })
    }

    /// `p(j)` for `j ≥ 1`.
    pub fn pmf(&self, j: usize) -> f64 {
        self.ln_pmf(j).exp()
    }

    /// `log p(j)` for `j ≥ 1`.
    pub fn ln_pmf(&self, j: usize) -> f64 {
        assert!(j >= 1, "support starts at 1");
        match self {
            TruncationPrior::Geometric { theta } => {
                theta.ln() + (j as f64 - 1.0) * (1.0 - theta).ln()
            }
            TruncationPrior::Poisson { lambda } => {
                let k = (j - 1) as f64;
                -lambda + k * lambda.ln() - libm::lgamma(k + 1.0)
            }
            TruncationPrior::Table { pmf, tail_ratio } => {
                let m = pmf.len();
                if j <= m {
                    pmf[j - 1].ln()
                } else if *tail_ratio == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    pmf[m - 1].ln() + (j - m) as f64 * tail_ratio.ln()
                }
            }
        }
    }

    /// Exact upper-tail probability `P(J > j_n)`; `j_n ≥ 1` required.
    pub fn tail_probability(&self, j_n: usize) -> Result<f64> {
        if j_n == 0 {
            return Err(Error::invalid("j_n", "must be >= 1"));
        }
        Ok(match self {
            TruncationPrior::Geometric { theta } => (1.0 - theta).powi(j_n as i32),
            TruncationPrior::Poisson { lambda } => {
                // P(Poisson(λ) > j_n - 1), summed from the smallest tail term
                // upward so the accumulation stays stable.
                let mut terms = Vec::new();
                let mut ln_term = -lambda + (j_n as f64) * lambda.ln() - libm::lgamma(j_n as f64 + 1.0);
                let mut k = j_n as f64;
                loop {
                    terms.push(ln_term);
                    k += 1.0;
                    ln_term += lambda.ln() - k.ln();
                    if ln_term < terms[0] - 60.0 && terms.len() > 4 {
                        break;
                    }
                }
                let mut sum = 0.0;
                for lt in terms.iter().rev() {
                    sum += lt.exp();
                }
                sum
            }
            TruncationPrior::Table { pmf, tail_ratio } => {
                let m = pmf.len();
                if j_n >= m {
                    if *tail_ratio == 0.0 {
                        0.0
                    } else {
                        pmf[m - 1] * tail_ratio.powi((j_n - m + 1) as i32) / (1.0 - tail_ratio)
                    }
                } else {
                    let head: f64 = pmf[j_n..].iter().sum();
                    let tail = pmf[m - 1] * tail_ratio / (1.0 - tail_ratio);
                    head + tail
                }
            }
        })
    }

    /// Draw `J` from the prior.
    pub fn sample(&self, rng: &mut CounterRng) -> usize {
        match self {
            TruncationPrior::Geometric { theta } => {
                // Inverse CDF: J = ⌈ln U / ln(1-θ)⌉ on {1, 2, …}.
                let u = (1.0 - rng.next_f64()).max(f64::MIN_POSITIVE);
                let j = (u.ln() / (1.0 - theta).ln()).ceil();
                (j as usize).max(1)
            }
            TruncationPrior::Poisson { lambda } => {
                let pois = Poisson::new(*lambda).expect("validated lambda");
                let draw: f64 = pois.sample(rng);
                1 + draw as usize
            }
            TruncationPrior::Table { pmf, tail_ratio } => {
                let u = rng.next_f64();
                let mut acc = 0.0;
                for (i, p) in pmf.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return i + 1;
                    }
                }
                // Tail: geometric continuation beyond the table head.
                if *tail_ratio == 0.0 {
                    return pmf.len();
                }
                let residual = ((1.0 - u) / (pmf[pmf.len() - 1] * tail_ratio / (1.0 - tail_ratio)))
                    .clamp(f64::MIN_POSITIVE, 1.0);
                let extra = (residual.ln() / tail_ratio.ln()).floor() as usize;
                pmf.len() + 1 + extra
            }
        }
    }

    /// Draw `J` conditioned on `J ≤ j_max` (the sampler's enumeration domain).
    pub fn sample_capped(&self, rng: &mut CounterRng, j_max: usize) -> usize {
        let log_w: Vec<f64> = (1..=j_max).map(|j| self.ln_pmf(j)).collect();
        1 + stats::sample_categorical_log(rng, &log_w)
    }
}

/// Prior on the multiplicative scale `s²`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalePrior {
    /// Inverse gamma with shape `a` and rate `b`; tail exponent `-a-1 < -1`.
    InverseGamma { shape: f64, rate: f64 },
    /// Piecewise-linear density on a positive grid, constant below the first
    /// knot and continued beyond the last with a power tail `∝ x^q`, `q < -1`.
    /// The whole object is normalized at construction.
    Table(TableDensity),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tail_exponent: f64,
    #[serde(skip)]
    norm: f64,
}

impl TableDensity {
    fn unnormalized(&self, x: f64) -> f64 {
        let g = &self.grid;
        let v = &self.values;
        if x <= 0.0 {
            return 0.0;
        }
        if x <= g[0] {
            return v[0];
        }
        let last = g.len() - 1;
        if x >= g[last] {
            return v[last] * (x / g[last]).powf(self.tail_exponent);
        }
        let idx = g.partition_point(|&gx| gx <= x) - 1;
        let w = (x - g[idx]) / (g[idx + 1] - g[idx]);
        v[idx] * (1.0 - w) + v[idx + 1] * w
    }

    fn total_mass(&self) -> f64 {
        let g = &self.grid;
        let v = &self.values;
        let mut mass = v[0] * g[0];
        for i in 0..g.len() - 1 {
            mass += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
        }
        let last = g.len() - 1;
        // ∫_{g_m}^∞ v_m (x/g_m)^q dx = v_m g_m / (-q-1).
        mass + v[last] * g[last] / (-self.tail_exponent - 1.0)
    }

    fn cdf_unnormalized(&self, x: f64) -> f64 {
        let g = &self.grid;
        let v = &self.values;
        if x <= 0.0 {
            return 0.0;
        }
        if x <= g[0] {
            return v[0] * x;
        }
        let mut acc = v[0] * g[0];
        for i in 0..g.len() - 1 {
            if x >= g[i + 1] {
                acc += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
            } else {
                let w = (x - g[i]) / (g[i + 1] - g[i]);
                let vx = v[i] * (1.0 - w) + v[i + 1] * w;
                acc += 0.5 * (v[i] + vx) * (x - g[i]);
                return acc;
            }
        }
        let last = g.len() - 1;
        let q = self.tail_exponent;
        acc + v[last] * g[last] / (-q - 1.0) * (1.0 - (x / g[last]).powf(q + 1.0))
    }
}

impl ScalePrior {
    pub fn inverse_gamma(shape: f64, rate: f64) -> Result<Self> {
        if !shape.is_finite() || shape <= 0.0 {
            return Err(Error::invalid("shape", "must be positive and finite"));
        }
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::invalid("rate", "must be positive and finite"));
        }
        Ok(ScalePrior::InverseGamma { shape, rate })
    }

    pub fn table(grid: Vec<f64>, values: Vec<f64>, tail_exponent: f64) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::invalid(
                "grid",
                "need >= 2 knots with matching values",
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
            return Err(Error::invalid("grid", "must be positive and increasing"));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::invalid("values", "density must be positive"));
        }
        if !tail_exponent.is_finite() || tail_exponent >= -1.0 {
            return Err(Error::invalid("tail_exponent", "must be < -1"));
        }
        let mut table = TableDensity {
            grid,
            values,
            tail_exponent,
            norm: 1.0,
        };
        table.norm = table.total_mass();
        Ok(ScalePrior::Table(table))
    }

    pub fn is_conjugate(&self) -> bool {
        matches!(self, ScalePrior::InverseGamma { .. })
    }

    /// Power-tail exponent `q` of the density near infinity.
    pub fn tail_exponent(&self) -> f64 {
        match self {
            ScalePrior::InverseGamma { shape, .. } => -shape - 1.0,
            ScalePrior::Table(t) => t.tail_exponent,
        }
    }

    /// Log density of `s²` at `x > 0`.
    pub fn ln_density(&self, x: f64) -> f64 {
        match self {
            ScalePrior::InverseGamma { shape, rate } => stats::ln_inv_gamma_pdf(x, *shape, *rate),
            ScalePrior::Table(t) => (t.unnormalized(x) / t.norm).ln(),
        }
    }

    /// Draw `s²` from the prior.
    pub fn sample(&self, rng: &mut CounterRng) -> f64 {
        match self {
            ScalePrior::InverseGamma { shape, rate } => {
                let gamma = Gamma::new(*shape, 1.0 / rate).expect("validated parameters");
                let y: f64 = gamma.sample(rng);
                1.0 / y.max(f64::MIN_POSITIVE)
            }
            ScalePrior::Table(t) => {
                // Inverse CDF by bisection; the CDF is strictly increasing.
                let u = rng.next_f64() * t.norm;
                let mut lo = 0.0f64;
                let mut hi = t.grid[t.grid.len() - 1];
                while t.cdf_unnormalized(hi) < u {
                    hi *= 2.0;
                    if hi > 1e300 {
                        break;
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if t.cdf_unnormalized(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// The full hierarchical prior: baseline smoothness `α`, truncation prior,
/// scale prior, and the basis the series lives on.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PriorSpec {
    pub alpha: f64,
    pub trunc: TruncationPrior,
    pub scale: ScalePrior,
    pub basis: BasisSpec,
}

impl PriorSpec {
    pub fn new(alpha: f64, trunc: TruncationPrior, scale: ScalePrior, basis: BasisSpec) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid("alpha", "must be positive and finite"));
        }
        Ok(PriorSpec {
            alpha,
            trunc,
            scale,
            basis,
        })
    }

    /// Prior standard deviation of coefficient `j` given `s² = 1`.
    #[inline]
    pub fn coeff_sd(&self, j: usize) -> f64 {
        (j as f64).powf(-0.5 - self.alpha)
    }
}

/// One draw from the prior.
#[derive(Clone, Debug)]
pub struct PriorDraw {
    pub j: usize,
    pub s2: f64,
    pub f: SeriesFunction,
}

/// Coefficients `f_j = s · j^{-1/2-α} Z_j`, `j = 1..=j_level`.
pub fn sample_coefficients(j_level: usize, s2: f64, alpha: f64, rng: &mut CounterRng) -> Vec<f64> {
    let s = s2.sqrt();
    (1..=j_level)
        .map(|j| {
            let z: f64 = rng.sample(StandardNormal);
            s * (j as f64).powf(-0.5 - alpha) * z
        })
        .collect()
}

/// Draw `(J, s², f)` from the hierarchical prior; deterministic given `seed`.
pub fn sample_prior(spec: &PriorSpec, seed: u64) -> PriorDraw {
    let mut rng = CounterRng::new(seed);
    sample_prior_with(spec, &mut rng)
}

pub fn sample_prior_with(spec: &PriorSpec, rng: &mut CounterRng) -> PriorDraw {
    let j = spec.trunc.sample(rng);
    let s2 = spec.scale.sample(rng);
    let coeffs = sample_coefficients(j, s2, spec.alpha, rng);
    PriorDraw {
        j,
        s2,
        f: SeriesFunction::new(coeffs).expect("finite by construction"),
    }
}

/// Monte Carlo small-ball estimate with Wilson 95% interval.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallBallEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub draws: u64,
}

impl SmallBallEstimate {
    pub fn ci_halfwidth(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Estimate `Π(f: ‖f - f0‖₂ ≤ eps)` by Monte Carlo.
///
/// The distance is computed in coefficient space, including the tail
/// `Σ_{j>J} f0_j²` that the truncated draw cannot reach. Draws are
/// partitioned into fixed 65 536-draw substreams so the result does not
/// depend on how the loop is scheduled. Zero hits return estimate 0 with a
/// one-sided interval.
pub fn small_ball_mc(
    spec: &PriorSpec,
    f0: &TrueFunction,
    eps: f64,
    n_draws: u64,
    seed: u64,
) -> Result<SmallBallEstimate> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::invalid("eps", "must be > 0"));
    }
    if n_draws < 1000 {
        return Err(Error::invalid("n_draws", "must be >= 1000"));
    }
    const CHUNK: u64 = 65_536;
    let root = CounterRng::new(seed);
    let suffix = f0.suffix_square_sums();
    let f0_len = f0.coeffs().len();
    let eps2 = eps * eps;
    let n_chunks = n_draws.div_ceil(CHUNK);
    let mut hits: u64 = 0;
    for chunk in 0..n_chunks {
        let mut rng = root.substream(chunk);
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(n_draws);
        for _ in lo..hi {
            let draw = sample_prior_with(spec, &mut rng);
            // Σ_{j≤J} (f_j - f0_j)² + Σ_{j>J} f0_j².
            let mut d2 = suffix[draw.j.min(f0_len)];
            for (i, c) in draw.f.coeffs().iter().enumerate() {
                let t = c - f0.coeff(i + 1);
                d2 += t * t;
            }
            if d2 <= eps2 {
                hits += 1;
            }
        }
    }
    let ci: WilsonCi = stats::wilson_ci(hits, n_draws);
    Ok(SmallBallEstimate {
        estimate: ci.estimate,
        ci_low: ci.low,
        ci_high: ci.high,
        hits,
        draws: n_draws,
    })
}

/// Analytic small-ball exponent bound: `C·ε^{-1/β}·log(1/ε)` with the log
/// factor, `C·ε^{-1/β}` without. Requires `ε < 1` so the bound is nonvacuous.
pub fn small_ball_bound(beta: f64, eps: f64, c: f64, log_factor: bool) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::invalid("eps", "must lie in (0,1)"));
    }
    let base = c * eps.powf(-1.0 / beta);
    Ok(if log_factor {
        base * (1.0 / eps).ln()
    } else {
        base
    })
}

/// Upper bound `2J·log(K ∨ s‖a‖₂/ε)` for
/// `-log P(‖s Σ_{j≤J} a_j Z_j ψ_j‖₂ ≤ ε)`.
pub fn concentration_bound(j_level: usize, s: f64, a_norm: f64, eps: f64, k: f64) -> f64 {
    assert!(j_level >= 1, "J must be >= 1");
    assert!(k > 1.0, "K must exceed 1");
    2.0 * j_level as f64 * k.max(s * a_norm / eps).ln()
}

/// RKHS norm of `h` in the space spanned by `ψ_1..ψ_J` with coefficient
/// weights `s² j^{-1-2α}`: `‖h‖² = s^{-2} Σ_{j≤J} j^{1+2α} h_j²`.
pub fn rkhs_norm(h: &SeriesFunction, s: f64, alpha: f64) -> f64 {
    assert!(s > 0.0, "s must be > 0");
    let sum: f64 = h
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| ((i + 1) as f64).powf(1.0 + 2.0 * alpha) * c * c)
        .sum();
    (sum / (s * s)).sqrt()
}

/// Truncation-based RKHS approximant of `f0` at accuracy `eps`:
/// `J0 = ⌊(eps/‖f0‖_β)^{-1/β}⌋` and `h0 = f0` truncated at `J0`. Guarantees
/// `‖f0 - h0‖₂ ≤ eps`, and
/// `rkhs_norm(h0,s,α)² ≤ (‖f0‖_β²/s²)·J0^{(1+2α-2β)∨0}`.
pub fn rkhs_approximant(f0: &TrueFunction, eps: f64) -> Result<(SeriesFunction, usize)> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::invalid("eps", "must be > 0"));
    }
    let norm_beta = f0.sobolev_norm();
    if norm_beta == 0.0 {
        return Err(Error::invalid("f0", "must be nonzero"));
    }
    let j0 = (eps / norm_beta).powf(-1.0 / f0.beta()).floor();
    if j0 < 1.0 {
        // eps exceeds ‖f0‖_β ≥ ‖f0‖₂, so the zero function is admissible.
        if f0.l2_norm() <= eps {
            return Ok((SeriesFunction::zero(), 0));
        }
        return Err(Error::invalid(
            "eps",
            "approximation level J0 = 0 but ‖f0‖₂ > eps",
        ));
    }
    let j0 = j0 as usize;
    Ok((f0.truncate(j0), j0))
}

/// Sieve dimension: `⌈K1·ε^{-1/β}·log(1/ε)⌉` in the log-factor regime,
/// `⌈K1·ε^{-1/β}⌉` otherwise.
pub fn sieve_dimension(eps_n: f64, beta: f64, k1: f64, log_factor: bool) -> usize {
    assert!(eps_n > 0.0 && eps_n < 1.0, "eps_n must lie in (0,1)");
    assert!(beta > 0.0 && k1 > 0.0);
    let base = k1 * eps_n.powf(-1.0 / beta);
    let v = if log_factor {
        base * (1.0 / eps_n).ln()
    } else {
        base
    };
    v.ceil() as usize
}

/// Sieve description: target rate, dimension rule, and constant.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SieveSpec {
    pub j_n: usize,
    pub eps_n: f64,
    pub k1: f64,
    pub log_factor: bool,
}

impl SieveSpec {
    pub fn new(eps_n: f64, beta: f64, k1: f64, log_factor: bool) -> Self {
        SieveSpec {
            j_n: sieve_dimension(eps_n, beta, k1, log_factor),
            eps_n,
            k1,
            log_factor,
        }
    }
}

/// Metric-entropy bound `J_n · log(3/a)` for the `aε`-covering number of the
/// intersection of the sieve with an ε-ball, valid for every `ε > ε_n`.
pub fn entropy_bound(j_n: usize, a: f64) -> f64 {
    assert!(j_n >= 1, "J_n must be >= 1");
    assert!(a > 0.0 && a < 1.0, "a must lie in (0,1)");
    j_n as f64 * (3.0 / a).ln()
}

/// Rate sequence: `c·(n/log n)^{-β/(1+2β)}` with the log factor,
/// `c·n^{-β/(1+2β)}` without.
pub fn epsilon_n(n: u64, beta: f64, c: f64, log_factor: bool) -> f64 {
    assert!(beta > 0.0 && c > 0.0);
    let expo = -beta / (1.0 + 2.0 * beta);
    if log_factor {
        assert!(n >= 3, "need log n > 1");
        let nf = n as f64;
        c * (nf / nf.ln()).powf(expo)
    } else {
        c * (n as f64).powf(expo)
    }
}
