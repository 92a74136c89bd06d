//! Orthonormal basis of `L²[0,1]`, finite series synthesis, and norms.
//!
//! The basis is the classical Fourier system in flat indexing,
//!
//! ```text
//! ψ_1(x) = 1,   ψ_{2k}(x) = √2 cos(2πkx),   ψ_{2k+1}(x) = √2 sin(2πkx),
//! ```
//!
//! so `‖f‖₂² = Σ_j f_j²` by Plancherel and the β-Sobolev norm is
//! `‖f‖_β² = Σ_j j^{2β} f_j²` over the flat index j.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Number of midpoint-rule points used for every integral check. Exact for
/// trigonometric polynomials of the tested degrees, and deterministic.
pub const QUADRATURE_POINTS: usize = 4096;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Supported basis families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Fourier,
}

/// A materialized basis: family plus the largest index `j_max` in play.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub j_max: usize,
}

impl BasisSpec {
    pub fn fourier(j_max: usize) -> Result<Self> {
        if j_max == 0 {
            return Err(Error::invalid("j_max", "must be >= 1"));
        }
        Ok(BasisSpec {
            kind: BasisKind::Fourier,
            j_max,
        })
    }

    /// ψ_j(x) with bounds checks; `j` is 1-based.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        if j == 0 || j > self.j_max {
            return Err(Error::IndexOutOfRange {
                index: j,
                j_max: self.j_max,
            });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutOfDomain { x });
        }
        Ok(eval_fourier(j, x))
    }

    /// Gram matrix of ψ_1..ψ_{j_max} by quadrature; passes iff the largest
    /// deviation from the identity is at most `tol`.
    pub fn check_orthonormality(&self, tol: f64) -> Result<OrthonormalityReport> {
        if tol <= 0.0 {
            return Err(Error::invalid("tol", "must be > 0"));
        }
        let m = self.j_max;
        // Tabulate rows once; the Gram entries are plain dot products.
        let mut table = vec![0.0f64; m * QUADRATURE_POINTS];
        let mut row = vec![0.0f64; m];
        for q in 0..QUADRATURE_POINTS {
            let x = (q as f64 + 0.5) / QUADRATURE_POINTS as f64;
            fill_fourier_row(x, &mut row);
            for j in 0..m {
                table[j * QUADRATURE_POINTS + q] = row[j];
            }
        }
        let mut max_dev = 0.0f64;
        for i in 0..m {
            for j in i..m {
                let a = &table[i * QUADRATURE_POINTS..(i + 1) * QUADRATURE_POINTS];
                let b = &table[j * QUADRATURE_POINTS..(j + 1) * QUADRATURE_POINTS];
                let dot: f64 =
                    a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() / QUADRATURE_POINTS as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((dot - target).abs());
            }
        }
        Ok(OrthonormalityReport {
            j_max: m,
            max_deviation: max_dev,
            tol,
            pass: max_dev <= tol,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrthonormalityReport {
    pub j_max: usize,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// ψ_j(x) without bounds checks; `j` is 1-based.
#[inline]
pub fn eval_fourier(j: usize, x: f64) -> f64 {
    if j == 1 {
        1.0
    } else {
        let k = (j / 2) as f64;
        let arg = TWO_PI * k * x;
        if j.is_multiple_of(2) {
            SQRT_2 * arg.cos()
        } else {
            SQRT_2 * arg.sin()
        }
    }
}

/// Fill `out[j-1] = ψ_j(x)` for `j = 1..=out.len()` using the angle-addition
/// recurrence (one sin/cos pair per point regardless of the index range).
pub fn fill_fourier_row(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    let (s1, c1) = (TWO_PI * x).sin_cos();
    let mut ck = c1;
    let mut sk = s1;
    let mut j = 1usize;
    loop {
        if j < out.len() {
            out[j] = SQRT_2 * ck;
            j += 1;
        } else {
            break;
        }
        if j < out.len() {
            out[j] = SQRT_2 * sk;
            j += 1;
        } else {
            break;
        }
        let c_next = ck * c1 - sk * s1;
        let s_next = sk * c1 + ck * s1;
        ck = c_next;
        sk = s_next;
    }
}

/// Composite midpoint rule on `[0,1]` with [`QUADRATURE_POINTS`] points.
pub fn midpoint_integral<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = QUADRATURE_POINTS;
    (0..n).map(|i| f((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64
}

/// A finite series `Σ_{j≤J} f_j ψ_j`; `J = coeffs.len()`, and `J = 0` is the
/// zero function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesFunction {
    coeffs: Vec<f64>,
}

impl SeriesFunction {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coeffs", "all coefficients must be finite"));
        }
        Ok(SeriesFunction { coeffs })
    }

    pub fn zero() -> Self {
        SeriesFunction { coeffs: Vec::new() }
    }

    /// Truncation level J.
    pub fn truncation_level(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// 1-based coefficient access; zero beyond J.
    pub fn coeff(&self, j: usize) -> f64 {
        if j >= 1 && j <= self.coeffs.len() {
            self.coeffs[j - 1]
        } else {
            0.0
        }
    }

    /// Evaluate `Σ_{j≤J} f_j ψ_j` at each grid point.
    pub fn synthesize(&self, grid: &[f64]) -> Vec<f64> {
        let mut row = vec![0.0f64; self.coeffs.len()];
        grid.iter()
            .map(|&x| {
                if self.coeffs.is_empty() {
                    return 0.0;
                }
                fill_fourier_row(x, &mut row);
                self.coeffs.iter().zip(&row).map(|(c, p)| c * p).sum()
            })
            .collect()
    }

    /// Pointwise evaluation at a single `x ∈ [0,1]`.
    pub fn eval_at(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * eval_fourier(i + 1, x))
            .sum()
    }

    /// `√(Σ f_j²)`, the L² norm via Plancherel.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `√(Σ j^{2β} f_j²)`.
    pub fn sobolev_norm(&self, beta: f64) -> f64 {
        assert!(beta > 0.0, "beta must be > 0");
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| ((i + 1) as f64).powf(2.0 * beta) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Keep the first `j0` coefficients.
    pub fn truncate(&self, j0: usize) -> SeriesFunction {
        SeriesFunction {
            coeffs: self.coeffs.iter().take(j0).cloned().collect(),
        }
    }
}

/// A ground-truth function with declared Sobolev smoothness: finitely many
/// coefficients up to a resolution limit, the declared `β`, and the cached
/// Sobolev norm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrueFunction {
    coeffs: Vec<f64>,
    beta: f64,
    sobolev_norm: f64,
}

impl TrueFunction {
    pub fn new(coeffs: Vec<f64>, beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::invalid("beta", "must be > 0"));
        }
        let series = SeriesFunction::new(coeffs)?;
        let sobolev_norm = series.sobolev_norm(beta);
        Ok(TrueFunction {
            coeffs: series.coeffs,
            beta,
            sobolev_norm,
        })
    }

    /// `f_j = sign · j^{-exponent}` for `j ≤ j_max`, with `sign = (−1)^j` when
    /// alternating, optionally rescaled to a target L² norm. With
    /// `exponent > β + 1/2` the declared β-Sobolev norm is bounded in `j_max`.
    pub fn power_law(
        exponent: f64,
        alternating: bool,
        j_max: usize,
        beta: f64,
        normalize_l2: Option<f64>,
    ) -> Result<Self> {
        if j_max == 0 {
            return Err(Error::invalid("j_max", "must be >= 1"));
        }
        let mut coeffs: Vec<f64> = (1..=j_max)
            .map(|j| {
                let sign = if alternating && j % 2 == 1 { -1.0 } else { 1.0 };
                sign * (j as f64).powf(-exponent)
            })
            .collect();
        if let Some(target) = normalize_l2 {
            if target <= 0.0 {
                return Err(Error::invalid("normalize_l2", "must be > 0"));
            }
            let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            for c in &mut coeffs {
                *c *= target / norm;
            }
        }
        TrueFunction::new(coeffs, beta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sobolev_norm(&self) -> f64 {
        self.sobolev_norm
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// 1-based coefficient; zero beyond the resolution limit.
    pub fn coeff(&self, j: usize) -> f64 {
        if j >= 1 && j <= self.coeffs.len() {
            self.coeffs[j - 1]
        } else {
            0.0
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn as_series(&self) -> SeriesFunction {
        SeriesFunction {
            coeffs: self.coeffs.clone(),
        }
    }

    /// First `j0` coefficients as a series.
    pub fn truncate(&self, j0: usize) -> SeriesFunction {
        SeriesFunction {
            coeffs: self.coeffs.iter().take(j0).cloned().collect(),
        }
    }

    /// `suffix[k] = Σ_{j>k} f_j²` for `k = 0..=len`; `suffix[len] = 0`.
    pub fn suffix_square_sums(&self) -> Vec<f64> {
        let mut suffix = vec![0.0f64; self.coeffs.len() + 1];
        for k in (0..self.coeffs.len()).rev() {
            suffix[k] = suffix[k + 1] + self.coeffs[k] * self.coeffs[k];
        }
        suffix
    }
}
