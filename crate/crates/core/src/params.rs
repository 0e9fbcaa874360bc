use serde::{Deserialize, Serialize};

use crate::error::{ParkError, Result};

/// Default nodes-per-unit resolution for all solvers.
pub const DEFAULT_RESOLUTION: usize = 256;
/// Default truncation horizon used for the asymptotic constants.
pub const DEFAULT_HORIZON: usize = 7;
/// Default horizon for the uniform-placement reference run.
pub const UNIFORM_REFERENCE_HORIZON: usize = 16;
/// Below this rate the derivative equation is replaced by its uniform limit.
pub const UNIFORM_SUBSTITUTION_LAMBDA: f64 = 1e-6;

/// Validated solver inputs: rate, truncation horizon and grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    lambda: f64,
    horizon_n: usize,
    resolution_m: usize,
}

impl Params {
    pub fn new(lambda: f64, horizon_n: usize, resolution_m: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ParkError::InvalidParams(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if horizon_n < 3 {
            return Err(ParkError::InvalidParams(format!(
                "horizon n must be at least 3, got {horizon_n}"
            )));
        }
        validate_resolution(resolution_m)?;
        // Simpson panels must resolve the exponential kernel.
        if lambda > resolution_m as f64 / 2.0 {
            return Err(ParkError::InvalidParams(format!(
                "lambda {lambda} too large for resolution m={resolution_m} (need lambda <= m/2)"
            )));
        }
        Ok(Self {
            lambda,
            horizon_n,
            resolution_m,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn horizon_n(&self) -> usize {
        self.horizon_n
    }

    pub fn resolution_m(&self) -> usize {
        self.resolution_m
    }

    /// Same rate and horizon at a different resolution.
    pub fn with_resolution(&self, resolution_m: usize) -> Result<Self> {
        Self::new(self.lambda, self.horizon_n, resolution_m)
    }

    pub fn with_horizon(&self, horizon_n: usize) -> Result<Self> {
        Self::new(self.lambda, horizon_n, self.resolution_m)
    }

    /// Whether the derivative solver falls back to the uniform equation.
    pub fn uses_uniform_substitution(&self) -> bool {
        self.lambda < UNIFORM_SUBSTITUTION_LAMBDA
    }
}

pub(crate) fn validate_resolution(m: usize) -> Result<()> {
    if m < 2 || m % 2 != 0 {
        return Err(ParkError::InvalidParams(format!(
            "resolution m must be even and at least 2, got {m}"
        )));
    }
    Ok(())
}
