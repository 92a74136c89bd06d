//! Contraction-rate experiments: simulate, fit, summarize, and fit the
//! log-log slope of the empirical contraction radius against the information
//! budget (noise level `n` or horizon `T`).
//!
//! Replications run in a work pool keyed by split seeds and are collected in
//! index order, so the result is independent of the worker count. The slope
//! is ordinary least squares on `(log grid, log median radius_90)`, with the
//! median taken across replications at each grid point.

use super::config::{ModelKind, RateConfig};
use crate::basis::TrueFunction;
use crate::chain::{posterior_summary, PosteriorSummary};
use crate::diffusion::{gibbs_sde, simulate_sde, sufficient_stats, SdeModel, SigmaSpec};
use crate::geweke;
use crate::prior::PriorSpec;
use crate::rng::CounterRng;
use crate::stats;
use crate::whitenoise::{default_j_max, gibbs_wn_with_level_cap, simulate_wn};
use crate::{Error, Result};
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatePoint {
    pub grid_value: f64,
    pub replication: usize,
    pub post_mean_l2_err: f64,
    pub median_l2_err: f64,
    pub radius_90: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateResult {
    pub points: Vec<RatePoint>,
    /// Median radius_90 across replications, per grid value.
    pub median_radius: Vec<f64>,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    /// `-β/(1+2β)` for the declared smoothness of the truth.
    pub theoretical_exponent: f64,
    pub preflight_max_abs_z: Option<f64>,
}

/// Reduced Geweke run used as a pre-flight gate before spending the budget.
fn preflight(cfg: &RateConfig, spec: &PriorSpec, seed: u64) -> Result<f64> {
    let report = match cfg.model {
        ModelKind::WhiteNoise => geweke::geweke_wn(spec, 100, 16, 8, 2_000, 4.0, seed)?,
        ModelKind::Diffusion => geweke::geweke_sde(spec, 4, 20.0, 1e-3, 300, 4.0, seed)?,
    };
    if !report.pass {
        return Err(Error::Diagnostic(format!(
            "pre-flight getting-it-right check failed: max |z| = {:.2} > {:.2}",
            report.max_abs_z, report.threshold
        )));
    }
    Ok(report.max_abs_z)
}

fn run_one_wn(
    cfg: &RateConfig,
    spec: &PriorSpec,
    f0: &TrueFunction,
    n: u64,
    seed: u64,
) -> Result<PosteriorSummary> {
    let j_max_data = cfg.wn.expect("validated").j_max_data;
    let data = simulate_wn(f0, n, j_max_data, seed);
    let j_cap = default_j_max(n, spec.alpha, j_max_data);
    let chain = gibbs_wn_with_level_cap(&data, spec, cfg.iters, cfg.burn_in, j_cap, seed ^ 0x5151)?;
    Ok(posterior_summary(&chain, f0))
}

fn run_one_sde(
    cfg: &RateConfig,
    spec: &PriorSpec,
    f0: &TrueFunction,
    t_horizon: f64,
    seed: u64,
) -> Result<PosteriorSummary> {
    let params = cfg.sde.expect("validated");
    let sigma = SigmaSpec::constant(1.0)?;
    let model = SdeModel::new(f0.as_series(), params.kappa, sigma.clone(), t_horizon)?;
    let path = simulate_sde(&model, params.dt, seed)?;
    let st = sufficient_stats(&path, &sigma, params.j_max)?;
    let chain = gibbs_sde(&st, spec, cfg.iters, cfg.burn_in, params.j_max, seed ^ 0x5151)?;
    Ok(posterior_summary(&chain, f0))
}

/// Run the full experiment. Deterministic given `(cfg, seed)`.
pub fn run_rate_experiment(cfg: &RateConfig, seed: u64) -> Result<RateResult> {
    cfg.validate()?;
    let spec = cfg.prior.build()?;
    let f0 = cfg.f0.build()?;
    let root = CounterRng::new(seed);

    let preflight_max_abs_z = if cfg.preflight {
        Some(preflight(cfg, &spec, root.substream(0xFEED).next_u64())?)
    } else {
        None
    };

    let tasks: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|gi| (0..cfg.replications).map(move |r| (gi, r)))
        .collect();

    let summaries: Vec<Result<PosteriorSummary>> = tasks
        .par_iter()
        .map(|&(gi, r)| {
            let task_seed = root
                .substream(1 + (gi * cfg.replications + r) as u64)
                .next_u64();
            match cfg.model {
                ModelKind::WhiteNoise => {
                    run_one_wn(cfg, &spec, &f0, cfg.grid[gi] as u64, task_seed)
                }
                ModelKind::Diffusion => run_one_sde(cfg, &spec, &f0, cfg.grid[gi], task_seed),
            }
        })
        .collect();

    let mut points = Vec::with_capacity(tasks.len());
    for (&(gi, r), summary) in tasks.iter().zip(summaries) {
        let s = summary?;
        points.push(RatePoint {
            grid_value: cfg.grid[gi],
            replication: r,
            post_mean_l2_err: s.post_mean_l2_err,
            median_l2_err: s.median_l2_err,
            radius_90: s.radius_90,
        });
    }

    let median_radius: Vec<f64> = (0..cfg.grid.len())
        .map(|gi| {
            let radii: Vec<f64> = points
                .iter()
                .filter(|p| p.grid_value == cfg.grid[gi])
                .map(|p| p.radius_90)
                .collect();
            stats::quantile(&radii, 0.5)
        })
        .collect();

    let log_x: Vec<f64> = cfg.grid.iter().map(|g| g.ln()).collect();
    let log_y: Vec<f64> = median_radius.iter().map(|r| r.ln()).collect();
    let fit = stats::ols_fit(&log_x, &log_y);

    let beta = f0.beta();
    Ok(RateResult {
        points,
        median_radius,
        slope: fit.slope,
        slope_se: fit.slope_se,
        intercept: fit.intercept,
        theoretical_exponent: -beta / (1.0 + 2.0 * beta),
        preflight_max_abs_z,
    })
}

/// Per-point CSV (plot-ready).
pub fn rate_points_csv(result: &RateResult) -> String {
    let mut out = String::from("grid_value,replication,post_mean_l2_err,median_l2_err,radius_90\n");
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.grid_value, p.replication, p.post_mean_l2_err, p.median_l2_err, p.radius_90
        ));
    }
    out
}
