//! Small numeric/statistics toolbox shared by the samplers, the verification
//! harness, and the tests: log densities, log-sum-exp, quantiles, Wilson
//! intervals, Kolmogorov–Smirnov statistics, autocorrelation-adjusted
//! effective sample sizes, and ordinary least squares on log-log data.

use crate::rng::CounterRng;

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Log density of N(mean, var) at `x`.
#[inline]
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln()) - d * d / (2.0 * var)
}

/// Log of the inverse-gamma(shape, rate) density at `x > 0`.
pub fn ln_inv_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - libm::lgamma(shape) - (shape + 1.0) * x.ln() - rate / x
}

/// Numerically stable log(Σ exp(v_i)).
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// Draw an index proportional to `exp(log_weights)`.
pub fn sample_categorical_log(rng: &mut CounterRng, log_weights: &[f64]) -> usize {
    let lse = log_sum_exp(log_weights);
    let u = rng.next_f64();
    let mut acc = 0.0;
    for (i, lw) in log_weights.iter().enumerate() {
        acc += (lw - lse).exp();
        if u < acc {
            return i;
        }
    }
    log_weights.len() - 1
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Linear-interpolation quantile (type 7) of an unsorted slice, `q ∈ [0,1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty() && (0.0..=1.0).contains(&q));
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (v.len() as f64 - 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        let w = pos - lo as f64;
        v[lo] * (1.0 - w) + v[hi] * w
    }
}

/// Wilson score interval for a binomial proportion.
#[derive(Clone, Copy, Debug)]
pub struct WilsonCi {
    /// Raw proportion `hits / draws`.
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl WilsonCi {
    pub fn halfwidth(&self) -> f64 {
        0.5 * (self.high - self.low)
    }
}

/// 95% Wilson interval (z = 1.96). Zero hits yield estimate 0 with a
/// one-sided upper bound, never an error.
pub fn wilson_ci(hits: u64, draws: u64) -> WilsonCi {
    let z = 1.959_963_984_540_054;
    let n = draws as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if hits == draws {
        1.0
    } else {
        (center + half).min(1.0)
    };
    WilsonCi {
        estimate: p,
        low,
        high,
    }
}

/// Ordinary least squares fit of `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

pub fn ols_fit(x: &[f64], y: &[f64]) -> OlsFit {
    assert!(x.len() == y.len() && x.len() >= 3, "need >= 3 points");
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(u, v)| {
            let r = v - (intercept + slope * u);
            r * r
        })
        .sum();
    let sigma2 = rss / (n - 2.0);
    OlsFit {
        slope,
        intercept,
        slope_se: (sigma2 / sxx).sqrt(),
    }
}

/// One-sample KS statistic against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let xa = sa[i];
        let xb = sb[j];
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic KS critical value at significance `alpha` for one sample of
/// size `n`: `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

/// Two-sample version with effective size `nm/(n+m)`.
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let eff = (n as f64 * m as f64) / (n as f64 + m as f64);
    (-0.5 * (alpha / 2.0).ln()).sqrt() / eff.sqrt()
}

/// Effective sample size of a stationary chain: `n / (1 + 2 Σ ρ_k)`, summing
/// autocorrelations until they drop below 0.05.
pub fn ess(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(chain);
    let var: f64 = chain.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if var < 1e-300 {
        return n as f64;
    }
    let max_lag = (n / 2).min(1000);
    let mut sum_rho = 0.0;
    for k in 1..=max_lag {
        let cov: f64 = (0..n - k)
            .map(|i| (chain[i] - m) * (chain[i + k] - m))
            .sum::<f64>()
            / (n - k) as f64;
        let rho = cov / var;
        if rho < 0.05 {
            break;
        }
        sum_rho += rho;
    }
    n as f64 / (1.0 + 2.0 * sum_rho)
}

/// Standard error of the mean of a chain, adjusted for autocorrelation.
pub fn chain_se(chain: &[f64]) -> f64 {
    (variance(chain) / ess(chain)).sqrt()
}
