//! Functions of the boundary Laplacian `Δ_∂Ω = -d²/ds²`, applied to samples on
//! equi-arclength nodes through the discrete Fourier transform.
//!
//! On such samples the `k`-th discrete harmonic is an eigenvector of the
//! boundary Laplacian with eigenvalue `σ_k = (2πk/L)²`, `|k| <= N/2`, so any
//! spectral multiplier acts diagonally.

use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};

/// Samples of a function on the boundary nodes of a discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFunction {
    pub samples: Vec<f64>,
    pub perimeter: f64,
}

impl BoundaryFunction {
    pub fn new(samples: Vec<f64>, perimeter: f64) -> Result<Self> {
        if samples.is_empty() || !samples.len().is_multiple_of(2) {
            return Err(MpsError::Filter(format!(
                "boundary function needs an even, nonzero sample count (got {})",
                samples.len()
            )));
        }
        if !(perimeter > 0.0) {
            return Err(MpsError::Filter(format!(
                "perimeter {perimeter} must be positive"
            )));
        }
        Ok(BoundaryFunction { samples, perimeter })
    }

    /// `L²(∂Ω)` inner product under the periodic trapezoid rule.
    pub fn inner(&self, other: &BoundaryFunction) -> f64 {
        let w = self.perimeter / self.samples.len() as f64;
        w * self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

/// The boundary filter `F_μ(σ)`: `(1 - σ/μ²)^{-1/2}` below `σ = μ² - μ^{4/3}`,
/// capped at `μ^{1/3}` above.
pub fn f_mu(sigma: f64, mu: f64) -> f64 {
    let mu2 = mu * mu;
    if sigma <= mu2 - mu.powf(4.0 / 3.0) {
        (1.0 - sigma / mu2).powf(-0.5)
    } else {
        mu.cbrt()
    }
}

/// Half-wave weight `(1 - h²σ)_+^{1/2}`.
pub fn half_wave_weight(sigma: f64, h: f64) -> f64 {
    (1.0 - h * h * sigma).max(0.0).sqrt()
}

/// Boundary-Laplacian eigenvalue of FFT bin `bin` for `n` samples on a curve
/// of length `perimeter`.
pub fn bin_sigma(bin: usize, n: usize, perimeter: f64) -> f64 {
    let k = if bin <= n / 2 {
        bin as f64
    } else {
        bin as f64 - n as f64
    };
    let omega = std::f64::consts::TAU * k / perimeter;
    omega * omega
}

/// A multiplier tabulated on the FFT bins of one discretization, with plans
/// reusable across many boundary functions.
#[derive(Clone)]
pub struct FilterPlan {
    weights: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FilterPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FilterPlan")
            .field("n", &self.weights.len())
            .finish()
    }
}

impl FilterPlan {
    pub fn new(n: usize, perimeter: f64, multiplier: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(MpsError::Filter(format!("sample count {n} must be even")));
        }
        let weights: Vec<f64> = (0..n)
            .map(|b| multiplier(bin_sigma(b, n, perimeter)))
            .collect();
        if let Some(b) = weights.iter().position(|w| !w.is_finite()) {
            return Err(MpsError::Filter(format!(
                "multiplier is not finite at σ = {}",
                bin_sigma(b, n, perimeter)
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(FilterPlan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Multiplier value on each FFT bin.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Filters `samples` in place.
    pub fn apply_in_place(&self, samples: &mut [f64]) -> Result<()> {
        let n = self.weights.len();
        if samples.len() != n {
            return Err(MpsError::Filter(format!(
                "expected {n} samples, got {}",
                samples.len()
            )));
        }
        let input_peak = samples.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let gain = self.weights.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (c, w) in buf.iter_mut().zip(&self.weights) {
            *c *= w * scale;
        }
        self.inverse.process(&mut buf);
        let mut residue = 0.0f64;
        for (s, c) in samples.iter_mut().zip(&buf) {
            *s = c.re;
            residue = residue.max(c.im.abs());
        }
        // The multiplier is even in k, so the imaginary part is rounding only.
        if residue > 1e-10 * input_peak * gain {
            return Err(MpsError::Filter(format!(
                "imaginary residue {residue:e} after filtering"
            )));
        }
        Ok(())
    }

    /// Filters every column of `m` (rows are boundary nodes).
    pub fn apply_columns(&self, m: &mut DMatrix<f64>) -> Result<()> {
        for mut col in m.column_iter_mut() {
            let slice = col.as_mut_slice();
            self.apply_in_place(slice)?;
        }
        Ok(())
    }
}

/// Applies the multiplier `m(σ)` to a boundary function.
pub fn apply_multiplier(f: &BoundaryFunction, m: impl Fn(f64) -> f64) -> Result<BoundaryFunction> {
    let plan = FilterPlan::new(f.samples.len(), f.perimeter, m)?;
    let mut samples = f.samples.clone();
    plan.apply_in_place(&mut samples)?;
    Ok(BoundaryFunction {
        samples,
        perimeter: f.perimeter,
    })
}
