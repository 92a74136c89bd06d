//! Getting-it-right checks for the Gibbs samplers.
//!
//! Two simulators for the joint law of (parameters, data) are compared:
//! forward simulation (draw parameters from the prior, then data from the
//! model) and successive-conditional simulation (alternate a data redraw
//! given the parameters with one sweep of the very Gibbs kernel under test).
//! If the sweep's conditionals are exact, both streams share the joint
//! distribution and every summary statistic matches up to Monte Carlo error;
//! a biased conditional shows up as a diverging z-score. Failures indicate a
//! sampler bug, not a tolerance problem.
//!
//! Forward draws condition the truncation level on `J ≤ J_max`, matching the
//! enumeration domain of the kernels under test.

use crate::basis::SeriesFunction;
use crate::chain::ChainState;
use crate::diffusion::{simulate_sde, sufficient_stats, SdeModel, SigmaSpec};
use crate::prior::{sample_coefficients, PriorSpec};
use crate::rng::CounterRng;
use crate::stats;
use crate::whitenoise::WhiteNoiseData;
use crate::{Error, Result};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;

/// One summary statistic of the joint (parameters, data) law.
#[derive(Clone, Debug, Serialize)]
pub struct GewekeStat {
    pub name: String,
    pub forward_mean: f64,
    pub forward_se: f64,
    pub successive_mean: f64,
    pub successive_se: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GewekeReport {
    pub stats: Vec<GewekeStat>,
    pub n_samples: usize,
    pub threshold: f64,
    pub max_abs_z: f64,
    pub pass: bool,
}

fn build_report(
    names: &[&str],
    forward: &[Vec<f64>],
    successive: &[Vec<f64>],
    threshold: f64,
) -> GewekeReport {
    let stats: Vec<GewekeStat> = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let f = &forward[k];
            let s = &successive[k];
            let fm = stats::mean(f);
            let sm = stats::mean(s);
            // Forward draws are iid; the successive stream is a Markov
            // chain, so its SE is ESS-adjusted.
            let fse = (stats::variance(f) / f.len() as f64).sqrt();
            let sse = stats::chain_se(s);
            let z = (fm - sm) / (fse * fse + sse * sse).sqrt();
            GewekeStat {
                name: name.to_string(),
                forward_mean: fm,
                forward_se: fse,
                successive_mean: sm,
                successive_se: sse,
                z,
            }
        })
        .collect();
    let max_abs_z = stats
        .iter()
        .map(|s| s.z.abs())
        .fold(0.0f64, f64::max);
    GewekeReport {
        stats,
        n_samples: forward[0].len(),
        threshold,
        max_abs_z,
        pass: max_abs_z <= threshold,
    }
}

fn prior_state(spec: &PriorSpec, j_max: usize, rng: &mut CounterRng) -> ChainState {
    let j = spec.trunc.sample_capped(rng, j_max);
    let s2 = spec.scale.sample(rng);
    let coeffs = sample_coefficients(j, s2, spec.alpha, rng);
    ChainState { j, s2, coeffs }
}

/// Statistics shared by both models: level, log scale, first coefficient,
/// squared norm, a data functional, and a cross moment.
fn summaries(state: &ChainState, data_stat: f64) -> [f64; 6] {
    let f1 = state.coeffs.first().cloned().unwrap_or(0.0);
    let norm2: f64 = state.coeffs.iter().map(|c| c * c).sum();
    [
        state.j as f64,
        state.s2.ln(),
        f1,
        norm2,
        data_stat,
        f1 * data_stat,
    ]
}

const STAT_NAMES: [&str; 6] = ["J", "log_s2", "f1", "norm2_f", "data_stat", "f1_x_data"];

/// Getting-it-right check for the white-noise Gibbs sweep.
pub fn geweke_wn(
    spec: &PriorSpec,
    n: u64,
    j_max_data: usize,
    j_max_infer: usize,
    n_samples: usize,
    threshold: f64,
    seed: u64,
) -> Result<GewekeReport> {
    if j_max_infer == 0 || j_max_infer > j_max_data {
        return Err(Error::invalid("j_max_infer", "must lie in 1..=j_max_data"));
    }
    let root = CounterRng::new(seed);
    let sd = 1.0 / (n as f64).sqrt();

    let draw_data = |state: &ChainState, rng: &mut CounterRng| -> WhiteNoiseData {
        let x = (1..=j_max_data)
            .map(|j| {
                let f_j = if j <= state.j { state.coeffs[j - 1] } else { 0.0 };
                let z: f64 = rng.sample(StandardNormal);
                f_j + sd * z
            })
            .collect();
        WhiteNoiseData { n, x }
    };

    // Forward stream: iid joint draws.
    let mut rng_f = root.substream(1);
    let mut forward: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(n_samples)).collect();
    for _ in 0..n_samples {
        let state = prior_state(spec, j_max_infer, &mut rng_f);
        let data = draw_data(&state, &mut rng_f);
        for (k, v) in summaries(&state, data.x[0]).into_iter().enumerate() {
            forward[k].push(v);
        }
    }

    // Successive-conditional stream: Gibbs sweep, then data regeneration.
    let mut rng_s = root.substream(2);
    let mut state = prior_state(spec, j_max_infer, &mut rng_s);
    let mut data = draw_data(&state, &mut rng_s);
    let mut successive: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(n_samples)).collect();
    for _ in 0..n_samples {
        crate::whitenoise::gibbs_sweep_wn(
            &mut state,
            &data,
            spec,
            j_max_infer,
            None,
            &mut rng_s,
        )?;
        data = draw_data(&state, &mut rng_s);
        for (k, v) in summaries(&state, data.x[0]).into_iter().enumerate() {
            successive[k].push(v);
        }
    }

    Ok(build_report(&STAT_NAMES, &forward, &successive, threshold))
}

/// Getting-it-right check for the diffusion Gibbs sweep.
///
/// Data regeneration uses a short surrogate path of fixed horizon `t_gen`
/// (default 50): correctness of the conditionals does not depend on the
/// path length, and short paths keep the check affordable.
#[allow(clippy::too_many_arguments)]
pub fn geweke_sde(
    spec: &PriorSpec,
    j_max_infer: usize,
    t_gen: f64,
    dt: f64,
    n_samples: usize,
    threshold: f64,
    seed: u64,
) -> Result<GewekeReport> {
    if !spec.scale.is_conjugate() {
        return Err(Error::UnsupportedConjugacy);
    }
    let root = CounterRng::new(seed);
    let sigma = SigmaSpec::constant(1.0)?;

    let draw_stats = |state: &ChainState, path_seed: u64| -> Result<(f64, crate::diffusion::DriftSufficientStats)> {
        let model = SdeModel::new(
            SeriesFunction::new(state.coeffs.clone()).expect("finite"),
            5.0,
            sigma.clone(),
            t_gen,
        )?;
        let path = simulate_sde(&model, dt, path_seed)?;
        let st = sufficient_stats(&path, &sigma, j_max_infer)?;
        Ok((st.mu[0], st))
    };

    // Forward stream.
    let mut rng_f = root.substream(1);
    let mut forward: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(n_samples)).collect();
    for i in 0..n_samples {
        let state = prior_state(spec, j_max_infer, &mut rng_f);
        let (mu1, _) = draw_stats(&state, root.substream(10_000 + i as u64).next_u64())?;
        for (k, v) in summaries(&state, mu1).into_iter().enumerate() {
            forward[k].push(v);
        }
    }

    // Successive-conditional stream.
    let mut rng_s = root.substream(2);
    let mut state = prior_state(spec, j_max_infer, &mut rng_s);
    let (_, mut data_stats) = draw_stats(&state, root.substream(20_000).next_u64())?;
    let mut successive: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(n_samples)).collect();
    for i in 0..n_samples {
        crate::diffusion::gibbs_sweep_sde(&mut state, &data_stats, spec, j_max_infer, &mut rng_s)?;
        let (mu1, st) = draw_stats(&state, root.substream(20_001 + i as u64).next_u64())?;
        data_stats = st;
        for (k, v) in summaries(&state, mu1).into_iter().enumerate() {
            successive[k].push(v);
        }
    }

    Ok(build_report(&STAT_NAMES, &forward, &successive, threshold))
}
