//! CLI entry points. Every subcommand takes `--config <file> --seed <int>
//! --out <dir>`, writes deterministic artifacts into the out directory, and
//! exits 0 on success, 2 on validation errors, 3 on diagnostic failures.

use super::config::{
    self, CheckBasisConfig, FitMethod, FitSdeConfig, FitWnConfig, GewekeCliConfig, ModelKind,
    RateConfig, SamplePriorConfig, SimulateSdeConfig, SimulateWnConfig, TheoryConfig,
};
use super::io;
use super::rate;
use super::theory;
use crate::basis::BasisSpec;
use crate::chain::posterior_summary;
use crate::diffusion::{
    gibbs_sde, recover_drift, simulate_sde, sufficient_stats, SdeModel,
};
use crate::geweke;
use crate::prior::sample_prior_with;
use crate::rng::CounterRng;
use crate::whitenoise::{
    default_j_max, gibbs_wn_with_level_cap, grid_posterior, simulate_wn, WhiteNoiseData,
};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "series-prior",
    about = "Randomly truncated series priors: sampling, conjugate inference, and rate checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Root seed; all randomness derives from it.
    #[arg(long)]
    pub seed: u64,
    /// Output directory (created if absent).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw from the hierarchical prior and write prior_draws.csv.
    SamplePrior(CommonArgs),
    /// Simulate data for a model.
    #[command(subcommand)]
    Simulate(ModelCmd),
    /// Fit the posterior for a model.
    #[command(subcommand)]
    Fit(ModelCmd),
    /// Check the prior-mass / remaining-mass / entropy inequalities.
    VerifyTheory(CommonArgs),
    /// Contraction-rate study over a grid of information budgets.
    RateExperiment(CommonArgs),
    /// Verify basis orthonormality by quadrature.
    CheckBasis(CommonArgs),
    /// Getting-it-right check for a sampler.
    Geweke(CommonArgs),
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// Gaussian white noise model (sequence form).
    Wn(CommonArgs),
    /// Ergodic diffusion (drift on [0,1]).
    Sde(CommonArgs),
}

/// Envelope written around every JSON artifact: the effective config plus
/// the seed reproduce the run.
#[derive(Serialize)]
struct WithProvenance<C: Serialize, B: Serialize> {
    config: C,
    seed: u64,
    #[serde(flatten)]
    body: B,
}

fn provenance<C: Serialize, B: Serialize>(config: C, seed: u64, body: B) -> WithProvenance<C, B> {
    WithProvenance { config, seed, body }
}

pub fn cmd_sample_prior(args: &CommonArgs) -> Result<()> {
    let cfg: SamplePriorConfig = config::load_config(&args.config)?;
    let spec = cfg.prior.build()?;
    io::ensure_out_dir(&args.out)?;
    let root = CounterRng::new(args.seed);
    let draws: Vec<_> = (0..cfg.draws)
        .map(|i| {
            let mut rng = root.substream(i as u64);
            sample_prior_with(&spec, &mut rng)
        })
        .collect();
    io::write_text(
        &io::out_file(&args.out, "prior_draws.csv"),
        &io::prior_draws_csv(&draws),
    )?;
    #[derive(Serialize)]
    struct Summary {
        draws: usize,
        mean_level: f64,
        mean_s2: f64,
    }
    let body = Summary {
        draws: cfg.draws,
        mean_level: draws.iter().map(|d| d.j as f64).sum::<f64>() / cfg.draws.max(1) as f64,
        mean_s2: draws.iter().map(|d| d.s2).sum::<f64>() / cfg.draws.max(1) as f64,
    };
    io::write_json(
        &io::out_file(&args.out, "prior_draws.json"),
        &provenance(&cfg, args.seed, body),
    )
}

#[derive(Serialize)]
struct WnDataFile<'a> {
    n: u64,
    j_max: usize,
    x: &'a [f64],
}

pub fn cmd_simulate_wn(args: &CommonArgs) -> Result<()> {
    let cfg: SimulateWnConfig = config::load_config(&args.config)?;
    let f0 = cfg.f0.build()?;
    io::ensure_out_dir(&args.out)?;
    let data = simulate_wn(&f0, cfg.n, cfg.j_max, args.seed);
    io::write_json(
        &io::out_file(&args.out, "wn_data.json"),
        &provenance(
            &cfg,
            args.seed,
            WnDataFile {
                n: data.n,
                j_max: data.j_max(),
                x: &data.x,
            },
        ),
    )?;
    io::write_text(
        &io::out_file(&args.out, "wn_data.csv"),
        &io::wn_data_csv(&data),
    )
}

fn read_wn_data(path: &Path) -> Result<WhiteNoiseData> {
    let body = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&body)?;
    let n = value
        .get("n")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::invalid("data", "missing field n"))?;
    let x: Vec<f64> = value
        .get("x")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::invalid("data", "missing field x"))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| Error::invalid("data", "non-numeric x entry")))
        .collect::<Result<_>>()?;
    if x.is_empty() {
        return Err(Error::invalid("data", "empty x"));
    }
    Ok(WhiteNoiseData { n, x })
}

pub fn cmd_fit_wn(args: &CommonArgs) -> Result<()> {
    let cfg: FitWnConfig = config::load_config(&args.config)?;
    let spec = cfg.prior.build()?;
    let data = read_wn_data(Path::new(&cfg.data))?;
    let f0 = cfg.f0.as_ref().map(|f| f.build()).transpose()?;
    io::ensure_out_dir(&args.out)?;
    let j_cap = cfg
        .j_max
        .unwrap_or_else(|| default_j_max(data.n, spec.alpha, data.j_max()));

    #[derive(Serialize, Default)]
    struct FitSummary {
        j_cap: usize,
        gibbs_mean_coeffs: Option<Vec<f64>>,
        gibbs_level_marginal: Option<Vec<f64>>,
        gibbs_summary: Option<crate::chain::PosteriorSummary>,
        grid_mean_coeffs: Option<Vec<f64>>,
        grid_level_marginal: Option<Vec<f64>>,
        grid_summary: Option<crate::chain::PosteriorSummary>,
        grid_warnings: Vec<String>,
    }
    let mut summary = FitSummary {
        j_cap,
        ..Default::default()
    };

    if matches!(cfg.method, FitMethod::Gibbs | FitMethod::Both) {
        let chain = gibbs_wn_with_level_cap(&data, &spec, cfg.iters, cfg.burn_in, j_cap, args.seed)?;
        io::write_text(&io::out_file(&args.out, "chain.csv"), &io::chain_csv(&chain))?;
        summary.gibbs_mean_coeffs = Some(chain.mean_coeffs());
        summary.gibbs_level_marginal = Some(chain.level_marginal(j_cap));
        if let Some(f0) = &f0 {
            summary.gibbs_summary = Some(posterior_summary(&chain, f0));
        }
    }
    if matches!(cfg.method, FitMethod::Grid | FitMethod::Both) {
        let grid = grid_posterior(&data, &spec, cfg.s2_grid_size, j_cap)?;
        summary.grid_mean_coeffs = Some(grid.posterior_mean_coeffs());
        summary.grid_level_marginal = Some(grid.level_marginal());
        summary.grid_warnings = grid.warnings.clone();
        if let Some(f0) = &f0 {
            let draws = grid.sample_states(cfg.quantile_draws, args.seed ^ 0xA5A5);
            summary.grid_summary = Some(posterior_summary(&draws, f0));
        }
    }
    io::write_json(
        &io::out_file(&args.out, "fit_summary.json"),
        &provenance(&cfg, args.seed, summary),
    )
}

pub fn cmd_simulate_sde(args: &CommonArgs) -> Result<()> {
    let cfg: SimulateSdeConfig = config::load_config(&args.config)?;
    let drift = cfg.drift.build()?.as_series();
    let sigma = cfg.sigma.build()?;
    let model = SdeModel::new(drift, cfg.kappa, sigma, cfg.t_horizon)?;
    io::ensure_out_dir(&args.out)?;
    let path = simulate_sde(&model, cfg.dt, args.seed)?;
    io::write_path_binary(&io::out_file(&args.out, "path.bin"), &path)?;
    if cfg.write_csv {
        io::write_text(&io::out_file(&args.out, "path.csv"), &io::path_csv(&path))?;
    }
    #[derive(Serialize)]
    struct SimSummary {
        steps: usize,
        final_value: f64,
    }
    io::write_json(
        &io::out_file(&args.out, "sde_sim.json"),
        &provenance(
            &cfg,
            args.seed,
            SimSummary {
                steps: path.values.len() - 1,
                final_value: *path.values.last().unwrap(),
            },
        ),
    )
}

pub fn cmd_fit_sde(args: &CommonArgs) -> Result<()> {
    let cfg: FitSdeConfig = config::load_config(&args.config)?;
    let spec = cfg.prior.build()?;
    let sigma = cfg.sigma.build()?;
    let path = io::read_path_binary(Path::new(&cfg.path))?;
    io::ensure_out_dir(&args.out)?;
    let stats = sufficient_stats(&path, &sigma, cfg.j_max)?;

    #[derive(Serialize)]
    struct StatsFile<'a> {
        j_max: usize,
        mu: &'a [f64],
        sigma_row_major: &'a [f64],
        time_in: f64,
    }
    io::write_json(
        &io::out_file(&args.out, "stats.json"),
        &provenance(
            &cfg,
            args.seed,
            StatsFile {
                j_max: stats.j_max,
                mu: &stats.mu,
                sigma_row_major: &stats.sigma,
                time_in: stats.time_in,
            },
        ),
    )?;

    let chain = gibbs_sde(&stats, &spec, cfg.iters, cfg.burn_in, cfg.j_max, args.seed)?;
    io::write_text(&io::out_file(&args.out, "chain.csv"), &io::chain_csv(&chain))?;
    let grid: Vec<f64> = (0..cfg.drift_grid_size)
        .map(|i| i as f64 / (cfg.drift_grid_size - 1).max(1) as f64)
        .collect();
    let band = recover_drift(&chain, &grid);
    let mut band_csv = String::from("x,mean,q05,q95\n");
    for i in 0..band.x.len() {
        band_csv.push_str(&format!(
            "{},{},{},{}\n",
            band.x[i], band.mean[i], band.q05[i], band.q95[i]
        ));
    }
    io::write_text(&io::out_file(&args.out, "drift_band.csv"), &band_csv)?;

    #[derive(Serialize)]
    struct FitSummary {
        mean_band_width: f64,
        level_marginal: Vec<f64>,
        summary: Option<crate::chain::PosteriorSummary>,
    }
    let f0 = cfg.f0.as_ref().map(|f| f.build()).transpose()?;
    io::write_json(
        &io::out_file(&args.out, "fit_summary.json"),
        &provenance(
            &cfg,
            args.seed,
            FitSummary {
                mean_band_width: band.mean_width(),
                level_marginal: chain.level_marginal(cfg.j_max),
                summary: f0.as_ref().map(|f| posterior_summary(&chain, f)),
            },
        ),
    )
}

pub fn cmd_verify_theory(args: &CommonArgs) -> Result<()> {
    let cfg: TheoryConfig = config::load_config(&args.config)?;
    io::ensure_out_dir(&args.out)?;
    let report = theory::verify_theorem(&cfg, args.seed)?;
    io::write_json(
        &io::out_file(&args.out, "theory_report.json"),
        &provenance(&cfg, args.seed, report),
    )
}

pub fn cmd_rate_experiment(args: &CommonArgs) -> Result<()> {
    let cfg: RateConfig = config::load_config(&args.config)?;
    io::ensure_out_dir(&args.out)?;
    let result = rate::run_rate_experiment(&cfg, args.seed)?;
    io::write_text(
        &io::out_file(&args.out, "rate_points.csv"),
        &rate::rate_points_csv(&result),
    )?;
    io::write_json(
        &io::out_file(&args.out, "rate_result.json"),
        &provenance(&cfg, args.seed, result),
    )
}

pub fn cmd_check_basis(args: &CommonArgs) -> Result<()> {
    let cfg: CheckBasisConfig = config::load_config(&args.config)?;
    io::ensure_out_dir(&args.out)?;
    let report = BasisSpec::fourier(cfg.j_max)?.check_orthonormality(cfg.tol)?;
    io::write_json(
        &io::out_file(&args.out, "basis_report.json"),
        &provenance(&cfg, args.seed, &report),
    )?;
    if !report.pass {
        return Err(Error::Diagnostic(format!(
            "orthonormality deviation {} exceeds tol {}",
            report.max_deviation, report.tol
        )));
    }
    Ok(())
}

pub fn cmd_geweke(args: &CommonArgs) -> Result<()> {
    let cfg: GewekeCliConfig = config::load_config(&args.config)?;
    let spec = cfg.prior.build()?;
    io::ensure_out_dir(&args.out)?;
    let report = match cfg.model {
        ModelKind::WhiteNoise => {
            let params = cfg.wn.ok_or_else(|| Error::Config {
                path: "wn".into(),
                message: "white_noise model requires the wn parameter block".into(),
            })?;
            geweke::geweke_wn(
                &spec,
                params.n,
                params.j_max_data,
                cfg.j_max,
                cfg.n_samples,
                cfg.threshold,
                args.seed,
            )?
        }
        ModelKind::Diffusion => {
            let params = cfg.sde.ok_or_else(|| Error::Config {
                path: "sde".into(),
                message: "diffusion model requires the sde parameter block".into(),
            })?;
            geweke::geweke_sde(
                &spec,
                cfg.j_max,
                params.t_gen,
                params.dt,
                cfg.n_samples,
                cfg.threshold,
                args.seed,
            )?
        }
    };
    io::write_json(
        &io::out_file(&args.out, "geweke_report.json"),
        &provenance(&cfg, args.seed, &report),
    )?;
    if !report.pass {
        return Err(Error::Diagnostic(format!(
            "getting-it-right check failed: max |z| = {:.3} > {:.3}",
            report.max_abs_z, report.threshold
        )));
    }
    Ok(())
}

/// Dispatch a parsed CLI invocation. Returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::SamplePrior(args) => cmd_sample_prior(args),
        Command::Simulate(ModelCmd::Wn(args)) => cmd_simulate_wn(args),
        Command::Simulate(ModelCmd::Sde(args)) => cmd_simulate_sde(args),
        Command::Fit(ModelCmd::Wn(args)) => cmd_fit_wn(args),
        Command::Fit(ModelCmd::Sde(args)) => cmd_fit_sde(args),
        Command::VerifyTheory(args) => cmd_verify_theory(args),
        Command::RateExperiment(args) => cmd_rate_experiment(args),
        Command::CheckBasis(args) => cmd_check_basis(args),
        Command::Geweke(args) => cmd_geweke(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
