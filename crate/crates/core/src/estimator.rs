//! Empirical DSFF with an unbiased split into disconnected and connected
//! parts.
//!
//! For each sample `L_m = Σ_j exp(i(t x_j + s y_j))`. Then
//!
//! ```text
//! k_mean        = mean |L_m|² / N²
//! connected     = S² / N²                    S² = Σ|L_m - L̄|² / (M-1)
//! disconnected  = (|L̄|² - S²/M) / N²
//! ```
//!
//! `|L̄|² - S²/M` is unbiased for `|E L|²`; the naive `|L̄|²` overshoots by
//! `Var L / M`, which is as large as the connected signal itself unless `M`
//! is huge.
//!
//! The contact term `1/N` is reported for display only. It is the diagonal of
//! the double sum and already inside `k_mean`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::{SpectrumSample, SpectrumSet};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::theory::ComplexTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("need at least one sample")]
    NoSamples,
    #[error("invalid τ range: {0}")]
    InvalidRange(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsffEstimate {
    pub tau: ComplexTime,
    pub k_mean: f64,
    /// `None` when `M = 1`.
    pub k_stderr: Option<f64>,
    /// `None` when `M = 1`.
    pub disconnected_unbiased: Option<f64>,
    /// `None` when `M = 1`.
    pub connected: Option<f64>,
    pub contact: f64,
    pub m: usize,
    pub n: usize,
}

/// Orders eigenvalues by `(re, im)` so that sums do not depend on the order
/// the eigensolver returned them in.
fn canonical(eigenvalues: &[Complex64]) -> Vec<Complex64> {
    let mut v = eigenvalues.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn plane_wave_sum(sorted: &[Complex64], tau: ComplexTime) -> Complex64 {
    sorted
        .iter()
        .map(|z| {
            let (sin, cos) = (tau.t * z.re + tau.s * z.im).sin_cos();
            Complex64::new(cos, sin)
        })
        .collect::<ComplexSum>()
        .value()
}

/// `Σ_j exp(i(t x_j + s y_j))` over one spectrum.
pub fn linear_stat(sample: &SpectrumSample, tau: ComplexTime) -> Complex64 {
    plane_wave_sum(&canonical(&sample.eigenvalues), tau)
}

impl DsffEstimate {
    /// Statistics from per-sample linear statistics `L_m` of `n`-point
    /// spectra.
    pub fn from_linear_stats(tau: ComplexTime, n: usize, stats: &[Complex64]) -> Result<Self, EstimatorError> {
        let m = stats.len();
        if m == 0 {
            return Err(EstimatorError::NoSamples);
        }
        let n2 = (n as f64) * (n as f64);
        let mf = m as f64;
        let k: Vec<f64> = stats.iter().map(|l| l.norm_sqr() / n2).collect();
        let k_mean = k.iter().copied().collect::<NeumaierSum>().value() / mf;
        let (k_stderr, disconnected_unbiased, connected) = if m == 1 {
            (None, None, None)
        } else {
            let k_var = k.iter().map(|x| (x - k_mean).powi(2)).collect::<NeumaierSum>().value() / (mf - 1.0);
            let l_bar = stats.iter().copied().collect::<ComplexSum>().value() / mf;
            let s2 = stats
                .iter()
                .map(|l| (l - l_bar).norm_sqr())
                .collect::<NeumaierSum>()
                .value()
                / (mf - 1.0);
            (
                Some((k_var / mf).sqrt()),
                Some((l_bar.norm_sqr() - s2 / mf) / n2),
                Some(s2 / n2),
            )
        };
        Ok(DsffEstimate {
            tau,
            k_mean,
            k_stderr,
            disconnected_unbiased,
            connected,
            contact: 1.0 / n as f64,
            m,
            n,
        })
    }
}

pub fn dsff_point(set: &SpectrumSet, tau: ComplexTime) -> Result<DsffEstimate, EstimatorError> {
    dsff_grid(set, &[tau]).map(|mut v| v.remove(0))
}

/// [`dsff_point`] at every `τ`, parallel over `τ` on the current rayon pool.
pub fn dsff_grid(set: &SpectrumSet, taus: &[ComplexTime]) -> Result<Vec<DsffEstimate>, EstimatorError> {
    if set.samples.is_empty() {
        return Err(EstimatorError::NoSamples);
    }
    let sorted: Vec<Vec<Complex64>> = set.spectra().map(canonical).collect();
    let n = set.n();
    taus.par_iter()
        .map(|&tau| {
            let stats: Vec<Complex64> = sorted.iter().map(|z| plane_wave_sum(z, tau)).collect();
            DsffEstimate::from_linear_stats(tau, n, &stats)
        })
        .collect()
}

/// `points` values of `|τ|` from `tau_min` to `tau_max` along the ray at
/// angle `theta`. Log spacing needs `tau_min > 0`.
pub fn build_tau_grid(
    theta: f64,
    tau_min: f64,
    tau_max: f64,
    points: usize,
    spacing: Spacing,
) -> Result<Vec<ComplexTime>, EstimatorError> {
    let bad = |msg: String| Err(EstimatorError::InvalidRange(msg));
    if !(theta.is_finite() && tau_min.is_finite() && tau_max.is_finite()) {
        return bad("non-finite bound".into());
    }
    if points == 0 {
        return bad("need at least one point".into());
    }
    if tau_min < 0.0 || tau_min > tau_max {
        return bad(format!("need 0 ≤ tau_min ≤ tau_max, got [{tau_min}, {tau_max}]"));
    }
    if spacing == Spacing::Log && tau_min == 0.0 {
        return bad("log spacing needs tau_min > 0".into());
    }
    if points == 1 {
        if tau_min != tau_max {
            return bad("a single point needs tau_min = tau_max".into());
        }
        return Ok(vec![ComplexTime::from_polar(tau_min, theta)]);
    }
    let last = (points - 1) as f64;
    let radius = |k: usize| -> f64 {
        if k == points - 1 {
            return tau_max;
        }
        let f = k as f64 / last;
        match spacing {
            Spacing::Linear => tau_min + (tau_max - tau_min) * f,
            Spacing::Log => tau_min * (tau_max / tau_min).powf(f),
        }
    };
    Ok((0..points).map(|k| ComplexTime::from_polar(radius(k), theta)).collect())
}
