//! Numerical verification of the prior-mass, remaining-mass, and entropy
//! inequalities behind the contraction-rate argument, at desk scale.
//!
//! For each `n` in the grid, with `ε_n` from the configured rate formula and
//! `J_n` from the sieve-dimension rule:
//!
//! * **pm** — the prior mass `Π(‖f−f0‖₂ ≤ ε_n)` must be at least
//!   `e^{-nε_n²}`. Checked by Monte Carlo, and only where the bound is large
//!   enough to be estimable at the configured draw budget (probability at
//!   least 1e-5); outside that regime the row is marked skipped.
//! * **rm** — the remaining mass `Π(J > J_n)` must be at most `e^{-Knε_n²}`.
//!   Both sides are exact analytic expressions.
//! * **en** — the entropy bound `J_n log(3/a)` is compared to `nε_n²` for
//!   each configured `a`; the report tracks the ratio and its spread across
//!   the grid (the suppressed constant must stay bounded).
//!
//! The sieve constant `K1` can be fixed in the config or auto-selected as
//! the smallest value making the rm inequality hold at the largest `n`.

use super::config::{TheoryConfig, TheoryRegime};
use crate::basis::TrueFunction;
use crate::prior::{self, PriorSpec, SieveSpec};
use crate::Result;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct PmRow {
    pub eps_n: f64,
    pub bound: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub draws: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RmRow {
    pub j_n: usize,
    pub remaining_mass: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnRow {
    pub a: f64,
    pub entropy_bound: f64,
    pub n_eps2: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryRow {
    pub n: u64,
    pub eps_n: f64,
    pub j_n: usize,
    /// Absent when the bound is below the estimable-probability floor.
    pub pm: Option<PmRow>,
    pub rm: RmRow,
    pub en: Vec<EnRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub regime: TheoryRegime,
    pub beta: f64,
    pub alpha: f64,
    pub c: f64,
    pub k: f64,
    pub k1: f64,
    pub k1_auto_selected: bool,
    pub estimable_floor: f64,
    pub rows: Vec<TheoryRow>,
    /// max/min of the entropy ratio across the grid, per `a`.
    pub en_ratio_spread: Vec<f64>,
    pub rm_all_pass: bool,
    pub pm_all_pass: bool,
}

fn log_factor(regime: TheoryRegime) -> bool {
    matches!(regime, TheoryRegime::LogFactor)
}

/// Smallest `K1` (within a factor 1e-3) such that
/// `Π(J > J_n(K1)) ≤ e^{-K n ε_n²}` at the largest grid point.
fn auto_k1(cfg: &TheoryConfig, spec: &PriorSpec) -> Result<f64> {
    let lf = log_factor(cfg.regime);
    let n = *cfg.n_grid.last().expect("validated nonempty");
    let eps = prior::epsilon_n(n, cfg.beta, cfg.c, lf);
    let target = (-cfg.k * n as f64 * eps * eps).exp();
    let holds = |k1: f64| -> Result<bool> {
        let sieve = SieveSpec::new(eps, cfg.beta, k1, lf);
        Ok(spec.trunc.tail_probability(sieve.j_n)? <= target)
    };
    let mut hi = 1.0f64;
    while !holds(hi)? {
        hi *= 2.0;
        if hi > 1e9 {
            return Ok(hi);
        }
    }
    let mut lo = hi / 2.0;
    if hi == 1.0 {
        lo = 1e-9;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Run all checks. Deterministic given `(cfg, seed)`.
pub fn verify_theorem(cfg: &TheoryConfig, seed: u64) -> Result<TheoryReport> {
    cfg.validate()?;
    let spec = cfg.prior.build()?;
    let f0: TrueFunction = cfg.f0.build()?;
    let lf = log_factor(cfg.regime);

    let (k1, auto) = match cfg.k1 {
        Some(v) => (v, false),
        None => (auto_k1(cfg, &spec)?, true),
    };

    // Below this probability the Monte Carlo budget cannot resolve the pm
    // inequality; such rows are reported as skipped rather than guessed.
    let estimable_floor = (10.0 / cfg.mc_draws as f64).max(1e-5);

    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let eps_n = prior::epsilon_n(n, cfg.beta, cfg.c, lf);
        let sieve = SieveSpec::new(eps_n, cfg.beta, k1, lf);
        let j_n = sieve.j_n;
        let n_eps2 = n as f64 * eps_n * eps_n;

        let pm_bound = (-n_eps2).exp();
        let pm = if pm_bound >= estimable_floor {
            let est = prior::small_ball_mc(&spec, &f0, eps_n, cfg.mc_draws, seed ^ (i as u64) << 8)?;
            Some(PmRow {
                eps_n,
                bound: pm_bound,
                estimate: est.estimate,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                draws: est.draws,
                pass: est.estimate >= pm_bound,
            })
        } else {
            None
        };

        let remaining = spec.trunc.tail_probability(j_n)?;
        let rm_bound = (-cfg.k * n_eps2).exp();
        let rm = RmRow {
            j_n,
            remaining_mass: remaining,
            bound: rm_bound,
            pass: remaining <= rm_bound,
        };

        let en = cfg
            .entropy_a
            .iter()
            .map(|&a| {
                let bound = prior::entropy_bound(j_n, a);
                EnRow {
                    a,
                    entropy_bound: bound,
                    n_eps2,
                    ratio: bound / n_eps2,
                }
            })
            .collect();

        rows.push(TheoryRow {
            n,
            eps_n,
            j_n,
            pm,
            rm,
            en,
        });
    }

    let en_ratio_spread = cfg
        .entropy_a
        .iter()
        .enumerate()
        .map(|(ai, _)| {
            let ratios: Vec<f64> = rows.iter().map(|r| r.en[ai].ratio).collect();
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            max / min
        })
        .collect();

    let rm_all_pass = rows.iter().all(|r| r.rm.pass);
    let pm_all_pass = rows.iter().all(|r| r.pm.as_ref().map(|p| p.pass).unwrap_or(true));

    Ok(TheoryReport {
        regime: cfg.regime,
        beta: cfg.beta,
        alpha: cfg.prior.alpha,
        c: cfg.c,
        k: cfg.k,
        k1,
        k1_auto_selected: auto,
        estimable_floor,
        rows,
        en_ratio_spread,
        rm_all_pass,
        pm_all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn base_cfg(regime: &str, c: f64, k1: Option<f64>, n_grid: &str, f0_norm: f64) -> TheoryConfig {
        let k1_field = match k1 {
            Some(v) => format!("\"k1\": {v},"),
            None => String::new(),
        };
        let body = format!(
            r#"{{
            "regime": "{regime}",
            "beta": 1.0,
            "prior": {{ "alpha": 1.0,
                       "truncation": {{ "kind": "geometric", "theta": 0.5 }},
                       "scale": {{ "kind": "inverse_gamma", "shape": 2.0, "rate": 1.0 }},
                       "basis_j_max": 512 }},
            "f0": {{ "kind": "power_law", "exponent": 1.5, "j_max": 200, "beta": 1.0,
                    "normalize_l2": {f0_norm} }},
            "c": {c},
            "k": 2.0,
            {k1_field}
            "n_grid": {n_grid},
            "mc_draws": 200000
        }}"#
        );
        parse_config(&body).unwrap()
    }

    #[test]
    fn rm_check_passes_with_auto_k1() {
        let cfg = base_cfg("log_factor", 1.0, None, "[10000]", 1.0);
        let report = verify_theorem(&cfg, 7).unwrap();
        assert!(report.k1_auto_selected);
        let row = &report.rows[0];
        assert!(row.rm.pass, "rm: {:?}", row.rm);
        // Both sides are reported.
        assert!(row.rm.remaining_mass <= row.rm.bound);
    }

    #[test]
    fn en_ratio_bounded_across_grid() {
        let cfg = base_cfg(
            "log_factor",
            1.0,
            Some(1.0),
            "[1000, 10000, 100000, 1000000]",
            1.0,
        );
        let report = verify_theorem(&cfg, 7).unwrap();
        for (ai, spread) in report.en_ratio_spread.iter().enumerate() {
            assert!(
                *spread <= 1.5,
                "entropy ratio spread {spread} too large for a index {ai}"
            );
        }
    }

    #[test]
    fn pm_estimable_row_passes() {
        // c = 0.5 keeps nε² ≈ 9 at n = 1000 so the bound e^{-nε²} ≈ 1.2e-4
        // stays in the estimable regime; a small truth keeps the ball mass
        // orders of magnitude above it.
        let cfg = base_cfg("log_factor", 0.5, Some(1.0), "[1000]", 0.1);
        let report = verify_theorem(&cfg, 11).unwrap();
        let row = &report.rows[0];
        let pm = row.pm.as_ref().expect("pm should be estimable here");
        assert!(pm.bound >= 1e-4);
        assert!(pm.pass, "pm: {pm:?}");
    }

    #[test]
    fn pm_skipped_when_bound_too_small() {
        let cfg = base_cfg("log_factor", 1.0, Some(1.0), "[100000]", 1.0);
        let report = verify_theorem(&cfg, 11).unwrap();
        assert!(report.rows[0].pm.is_none());
        assert!(report.pm_all_pass);
    }
}
