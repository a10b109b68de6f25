//! Numerical thresholds shared by every decision the engine makes.

use serde::{Deserialize, Serialize};

/// Relative singular-value threshold for rank decisions.
pub const TAU_RANK: f64 = 1e-9;
/// Relative threshold for curvature predicates (local symmetry, Bianchi, ...).
pub const TAU_CURV: f64 = 1e-8;
/// Absolute Jacobi threshold after normalizing max |c| to 1.
pub const TAU_JACOBI: f64 = 1e-10;
/// Width of the "inconclusive" band above each threshold.
pub const BAND_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank: f64,
    pub curv: f64,
    pub jacobi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank: TAU_RANK, curv: TAU_CURV, jacobi: TAU_JACOBI }
    }
}

/// Three-way outcome of a thresholded test with a decision band `(tau, BAND_FACTOR * tau]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Below,
    Inside,
    Above,
}

pub fn classify(residual: f64, tau: f64) -> Band {
    if residual <= tau {
        Band::Below
    } else if residual <= BAND_FACTOR * tau {
        Band::Inside
    } else {
        Band::Above
    }
}
