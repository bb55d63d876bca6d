use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::nonfinite;
use super::structural::ls_slope;
use super::LFExpansion;
use crate::error::{LieError, Result};

/// Points on `|ζ| = τ²` at which profiles are maximised.
pub const CIRCLE_SAMPLES: usize = 64;
const DEGENERATE: f64 = 1e-300;

/// Fitted decay `max_l max_{|ζ|=τ²} |p_{k,l}(ζ)| ≈ C / ρ^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    /// `+∞` (serialized as `null`) when no degree in the window carries signal.
    #[serde(with = "nonfinite::inf")]
    pub rho_hat: f64,
    pub tau: f64,
    /// Envelope constant: `max_{k ≤ K} m_k ρ̂^k`, so that `m_k ≤ C_hat / ρ̂^k` on every computed degree.
    pub c_hat: f64,
    /// Intercept of the regression, `exp(log C)`.
    #[serde(with = "nonfinite::nan")]
    pub c_fit: f64,
    pub window: (usize, usize),
    /// Coefficient of determination of the log-linear fit.
    #[serde(with = "nonfinite::nan")]
    pub r_squared_fit: f64,
    pub band_limited: bool,
    /// `m_k` for `k = 0..=K`.
    pub m_k: Vec<f64>,
}

impl DecayEstimate {
    /// `τ / ρ̂`, the ratio driving the tail majorant.
    pub fn ratio(&self) -> f64 {
        if self.rho_hat.is_infinite() {
            0.0
        } else {
            self.tau / self.rho_hat
        }
    }
}

/// Regression over `k ∈ [⌈K/2⌉, K]`.
pub fn decay_estimate(exp: &LFExpansion, tau: f64) -> Result<DecayEstimate> {
    let k = exp.k_max();
    decay_estimate_window(exp, tau, (k.div_ceil(2), k))
}

pub fn decay_estimate_window(exp: &LFExpansion, tau: f64, window: (usize, usize)) -> Result<DecayEstimate> {
    if !(tau > 0.0 && tau < exp.radius()) {
        return Err(LieError::invalid("tau", format!("need 0 < τ < R = {}, got {tau}", exp.radius())));
    }
    if exp.k_max() < 8 {
        return Err(LieError::invalid("K", format!("decay estimation needs K ≥ 8, got {}", exp.k_max())));
    }
    let (lo, hi) = window;
    if lo >= hi || hi > exp.k_max() {
        return Err(LieError::invalid(
            "window",
            format!("need k_min < k_max ≤ K = {}, got ({lo}, {hi})", exp.k_max()),
        ));
    }
    let circle: Vec<Complex64> = (0..CIRCLE_SAMPLES)
        .map(|j| Complex64::from_polar(tau * tau, 2.0 * PI * j as f64 / CIRCLE_SAMPLES as f64))
        .collect();
    let m_k: Vec<f64> = exp
        .profiles()
        .iter()
        .map(|row| {
            row.iter()
                .flat_map(|p| circle.iter().map(move |&t| p.eval(t).norm()))
                .fold(0.0, f64::max)
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
        .filter(|&k| m_k[k] > DEGENERATE)
        .map(|k| (k as f64, m_k[k].ln()))
        .unzip();
    if xs.len() < 2 {
        return Ok(DecayEstimate {
            rho_hat: f64::INFINITY,
            tau,
            c_hat: m_k.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE),
            c_fit: f64::NAN,
            window,
            r_squared_fit: f64::NAN,
            band_limited: true,
            m_k,
        });
    }
    let (slope, intercept) = ls_slope(&xs, &ys);
    let rho_hat = (-slope).exp();
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let c_hat = m_k
        .iter()
        .enumerate()
        .map(|(k, m)| m.ln() + k as f64 * rho_hat.ln())
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    Ok(DecayEstimate {
        rho_hat,
        tau,
        c_hat,
        c_fit: intercept.exp(),
        window,
        r_squared_fit: r_squared,
        band_limited: false,
        m_k,
    })
}

/// `√ω · max_circle · (k+m)! / ρ^{k+m}`, the Cauchy bound on `|d^{k+m} f_{k,l}(0)|`.
pub fn cauchy_profile_bound(max_circle: f64, rho: f64, k: usize, m: usize, omega: f64) -> f64 {
    assert!(rho > 0.0, "rho must be positive");
    let mut v = omega.sqrt() * max_circle;
    for i in 1..=(k + m) {
        v *= i as f64 / rho;
    }
    v
}

/// `√ω · max_circle / ρ^k · 1/(1 − τ²/ρ²)`: the bound on `|p_{k,l}(ζ)|`, `|ζ| ≤ τ²`,
/// obtained by summing the Cauchy bounds of its Taylor coefficients.
pub fn geometric_profile_bound(max_circle: f64, rho: f64, tau: f64, k: usize, omega: f64) -> f64 {
    assert!(tau < rho, "need τ < ρ");
    omega.sqrt() * max_circle / rho.powi(k as i32) / (1.0 - (tau / rho).powi(2))
}
