//! Holomorphic continuation `f(z) = Σ_{k,l} p_{k,l}(q(z)) Y_{k,l}(z)` on the Lie ball.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex_geometry::{in_lie_ball, lie_norm_sq, q_of, ComplexPoint};
use crate::error::{LieError, Result};
use crate::lf_transform::{DecayEstimate, LFExpansion};
use crate::special_functions::{harmonic_dim_f64, sphere_area};

/// Neumaier-compensated complex sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

fn two_sum(s: f64, c: f64, x: f64) -> (f64, f64) {
    let t = s + x;
    let c = if s.abs() >= x.abs() {
        c + ((s - t) + x)
    } else {
        c + ((x - t) + s)
    };
    (t, c)
}

impl CompensatedSum {
    pub fn add(&mut self, x: Complex64) {
        let (re, cre) = two_sum(self.sum.re, self.comp.re, x.re);
        let (im, cim) = two_sum(self.sum.im, self.comp.im, x.im);
        self.sum = Complex64::new(re, im);
        self.comp = Complex64::new(cre, cim);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationResult {
    pub value: Complex64,
    /// Number of degrees summed, `K + 1`.
    pub terms_used: usize,
    /// Empirical majorant of the omitted degrees `k > K`.
    pub tail_bound: Option<f64>,
    /// `Σ_l |p_{k,l}(q(z)) Y_{k,l}(z)|` for each `k`.
    pub per_degree_norms: Vec<f64>,
    pub warning: Option<String>,
}

/// Degree-by-degree terms `Σ_l p_{k,l}(q(z)) Y_{k,l}(z)` and their absolute norms, without a domain check.
pub fn degree_terms(exp: &LFExpansion, z: &[Complex64]) -> (Vec<Complex64>, Vec<f64>) {
    let q: Complex64 = z.iter().map(|v| v * v).sum();
    let ys = exp.system().eval_all(z);
    exp.profiles()
        .iter()
        .zip(&ys)
        .map(|(row, yk)| {
            let mut s = CompensatedSum::default();
            let mut norm = 0.0;
            for (p, y) in row.iter().zip(yk) {
                let t = p.eval(q) * y;
                norm += t.norm();
                s.add(t);
            }
            (s.value(), norm)
        })
        .unzip()
}

/// Cumulative partial sums `f_0(z), …, f_K(z)`, without a domain check.
pub fn partial_sums_unchecked(exp: &LFExpansion, z: &[Complex64]) -> Vec<Complex64> {
    let (terms, _) = degree_terms(exp, z);
    let mut s = CompensatedSum::default();
    terms
        .into_iter()
        .map(|t| {
            s.add(t);
            s.value()
        })
        .collect()
}

/// Series value at any point, no domain check; used for the restriction to real points.
pub(crate) fn series_value(exp: &LFExpansion, z: &[Complex64]) -> Complex64 {
    let (terms, _) = degree_terms(exp, z);
    let mut s = CompensatedSum::default();
    terms.into_iter().for_each(|t| s.add(t));
    s.value()
}

pub fn evaluate(exp: &LFExpansion, z: &ComplexPoint, decay: Option<&DecayEstimate>) -> Result<ContinuationResult> {
    evaluate_indexed(exp, z, decay, 0)
}

fn evaluate_indexed(
    exp: &LFExpansion,
    z: &ComplexPoint,
    decay: Option<&DecayEstimate>,
    index: usize,
) -> Result<ContinuationResult> {
    if z.dim() != exp.n() {
        return Err(LieError::DimensionMismatch {
            expected: exp.n(),
            got: z.dim(),
        });
    }
    z.validate()?;
    if !in_lie_ball(z, exp.radius()) {
        return Err(LieError::OutsideLieBall {
            index,
            radius: exp.radius(),
            lie_norm_sq: lie_norm_sq(z),
        });
    }
    let zc = z.to_complex();
    let (terms, per_degree_norms) = degree_terms(exp, &zc);
    let mut s = CompensatedSum::default();
    terms.into_iter().for_each(|t| s.add(t));
    let (tail_bound, warning) = match decay {
        None => (None, None),
        Some(d) => {
            let ratio = d.ratio();
            if ratio >= 1.0 {
                (None, Some(format!("τ/ρ̂ = {ratio} ≥ 1: no tail bound")))
            } else if lie_norm_sq(z) > d.tau * d.tau {
                (
                    None,
                    Some(format!(
                        "lie_norm_sq(z) = {} exceeds τ² = {}: no tail bound",
                        lie_norm_sq(z),
                        d.tau * d.tau
                    )),
                )
            } else {
                (Some(tail_majorant(d, exp.n(), exp.k_max())), None)
            }
        }
    };
    Ok(ContinuationResult {
        value: s.value(),
        terms_used: exp.k_max() + 1,
        tail_bound,
        per_degree_norms,
        warning,
    })
}

/// `Ĉ/√ω_{n−1} · Σ_{k>K} a_k (τ/ρ̂)^k`.
pub fn tail_majorant(decay: &DecayEstimate, n: usize, k_max: usize) -> f64 {
    tail_majorant_raw(decay.c_hat / sphere_area(n).sqrt(), decay.ratio(), n, k_max)
}

/// `scale · Σ_{k>K} a_k x^k`, summed until a term falls below `1e−18` of the running total.
pub fn tail_majorant_raw(scale: f64, x: f64, n: usize, k_max: usize) -> f64 {
    assert!((0.0..1.0).contains(&x), "ratio must lie in [0, 1)");
    if x == 0.0 || scale == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut k = k_max + 1;
    let mut xk = x.powi(k as i32);
    loop {
        let term = harmonic_dim_f64(k, n) * xk;
        total += term;
        // terms decrease once (a_{k+1}/a_k) x < 1
        let ratio_next = harmonic_dim_f64(k + 1, n) / harmonic_dim_f64(k, n) * x;
        if (term <= 1e-18 * total && ratio_next < 1.0) || term == 0.0 {
            break;
        }
        k += 1;
        xk *= x;
    }
    scale * total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        ComplexValue { re: c.re, im: c.im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub z: ComplexPoint,
    pub value: ComplexValue,
    pub tail_bound: Option<f64>,
}

/// Evaluates every point; rows follow the input order.
pub fn grid_extend(exp: &LFExpansion, points: &[ComplexPoint], decay: Option<&DecayEstimate>) -> Result<Vec<GridRow>> {
    for (i, z) in points.iter().enumerate() {
        if z.dim() != exp.n() {
            return Err(LieError::DimensionMismatch {
                expected: exp.n(),
                got: z.dim(),
            });
        }
        if !in_lie_ball(z, exp.radius()) {
            return Err(LieError::OutsideLieBall {
                index: i,
                radius: exp.radius(),
                lie_norm_sq: lie_norm_sq(z),
            });
        }
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let r = evaluate_indexed(exp, z, decay, i)?;
            Ok(GridRow {
                z: z.clone(),
                value: r.value.into(),
                tail_bound: r.tail_bound,
            })
        })
        .collect()
}

/// `|q(z)|`, exposed for callers that check the profile argument range.
pub fn profile_argument(z: &ComplexPoint) -> f64 {
    q_of(z).norm()
}
