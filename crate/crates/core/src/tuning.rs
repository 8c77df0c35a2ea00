//! Theoretical constants for choosing the learning rate and forgetting factors.
//!
//! Logarithms are natural throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{OrlError, Result};

/// Smallest forgetting factor [`forgetting_factor`] will return.
pub const DEFAULT_MIN_GAMMA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningInputs {
    /// Residual norm bound `D_r`.
    pub residual_bound: f64,
    /// Spectral-norm bound `D` of the predictor set.
    pub norm_bound: f64,
    pub horizon: usize,
    /// Path-length budget `V_T` of the comparator class.
    pub path_length: f64,
    pub experts: usize,
}

/// Everything `tune` reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningReport {
    pub lambda_max: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub gamma_clamped: bool,
    pub expert_term: f64,
}

impl TuningInputs {
    pub fn report(&self) -> Result<TuningReport> {
        if self.experts < 1 {
            return Err(OrlError::config("expert count must be at least 1"));
        }
        let lambda_max = lambda_max(self.residual_bound, self.norm_bound)?;
        let alpha = exp_concavity_alpha(self.residual_bound, self.norm_bound)?;
        let gamma = forgetting_factor(self.path_length, self.horizon, self.norm_bound)?;
        Ok(TuningReport {
            lambda_max,
            alpha,
            gamma: gamma.value,
            gamma_clamped: gamma.clamped,
            expert_term: expert_regret_term(self.experts, alpha)?,
        })
    }
}

fn check_bounds(residual_bound: f64, norm_bound: f64) -> Result<()> {
    if !(residual_bound > 0.0 && residual_bound.is_finite()) {
        return Err(OrlError::config(format!(
            "residual bound D_r must be positive, got {residual_bound}"
        )));
    }
    if !(norm_bound >= 0.0 && norm_bound.is_finite()) {
        return Err(OrlError::config(format!(
            "norm bound D must be nonnegative, got {norm_bound}"
        )));
    }
    Ok(())
}

/// Largest learning rate covered by the regret guarantee: `1 / (4(D_r² + D²D_r²))`.
pub fn lambda_max(residual_bound: f64, norm_bound: f64) -> Result<f64> {
    check_bounds(residual_bound, norm_bound)?;
    let r2 = residual_bound * residual_bound;
    Ok(1.0 / (4.0 * (r2 + norm_bound * norm_bound * r2)))
}

/// Exp-concavity constant of the squared loss on `‖x − y‖² ≤ 2D_r² + 2D²D_r²`,
/// i.e. `(2C)⁻¹` for that `C`.
pub fn exp_concavity_alpha(residual_bound: f64, norm_bound: f64) -> Result<f64> {
    check_bounds(residual_bound, norm_bound)?;
    let r2 = residual_bound * residual_bound;
    let c = 2.0 * r2 + 2.0 * norm_bound * norm_bound * r2;
    Ok(1.0 / (2.0 * c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForgettingFactor {
    pub value: f64,
    /// The schedule fell below the floor and was raised to it.
    pub clamped: bool,
}

/// `γ = 1 − ½·√(max{V_T, ln²T/T} / (2DT))`, floored at [`DEFAULT_MIN_GAMMA`].
pub fn forgetting_factor(path_length: f64, horizon: usize, norm_bound: f64) -> Result<ForgettingFactor> {
    forgetting_factor_with_floor(path_length, horizon, norm_bound, DEFAULT_MIN_GAMMA)
}

pub fn forgetting_factor_with_floor(
    path_length: f64,
    horizon: usize,
    norm_bound: f64,
    floor: f64,
) -> Result<ForgettingFactor> {
    if horizon < 2 {
        return Err(OrlError::config(format!("horizon T must be at least 2, got {horizon}")));
    }
    if !(norm_bound > 0.0 && norm_bound.is_finite()) {
        return Err(OrlError::config(format!(
            "norm bound D must be positive for the forgetting schedule, got {norm_bound}"
        )));
    }
    if !(path_length >= 0.0 && path_length.is_finite()) {
        return Err(OrlError::config(format!(
            "path length budget must be nonnegative, got {path_length}"
        )));
    }
    if !(floor > 0.0 && floor < 1.0) {
        return Err(OrlError::config(format!("gamma floor must lie in (0, 1), got {floor}")));
    }
    let t = horizon as f64;
    let log_t = t.ln();
    let budget = path_length.max(log_t * log_t / t);
    let gamma = 1.0 - 0.5 * (budget / (2.0 * norm_bound * t)).sqrt();
    if gamma < floor {
        log::warn!(
            "forgetting schedule gives gamma={gamma:.6} for V_T={path_length}, T={horizon}, D={norm_bound}; using {floor}"
        );
        return Ok(ForgettingFactor {
            value: floor,
            clamped: true,
        });
    }
    Ok(ForgettingFactor {
        value: gamma,
        clamped: false,
    })
}

/// `(1/α)·ln N`.
pub fn expert_regret_term(experts: usize, alpha: f64) -> Result<f64> {
    if experts < 1 {
        return Err(OrlError::config("expert count must be at least 1"));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(OrlError::config(format!("alpha must be positive, got {alpha}")));
    }
    Ok((experts as f64).ln() / alpha)
}

/// `Σ ‖M_{t+1} − M_t‖_F` over consecutive comparators.
pub fn path_length(comparators: &[DMatrix<f64>]) -> Result<f64> {
    k_step_path_length(comparators, 1)
}

/// `Σ ‖M_{t+k} − M_t‖_F` over comparators `k` apart.
pub fn k_step_path_length(comparators: &[DMatrix<f64>], k: usize) -> Result<f64> {
    let first = comparators
        .first()
        .ok_or_else(|| OrlError::input("path length of an empty comparator sequence"))?;
    if k < 1 {
        return Err(OrlError::config("path length stride must be at least 1"));
    }
    for m in comparators {
        if m.shape() != first.shape() {
            return Err(OrlError::input(format!(
                "comparator shapes differ: {:?} vs {:?}",
                first.shape(),
                m.shape()
            )));
        }
    }
    Ok(comparators
        .iter()
        .zip(comparators.iter().skip(k))
        .map(|(a, b)| (b - a).norm())
        .sum())
}
