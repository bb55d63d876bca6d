//! Property suites: the addition theorem and its complexified forms, the
//! inequality `|q|^k P_k(|z|²/|q|) ≤ τ^{2k}` on the Lie ball of radius `τ`, Hua's
//! maximum identity for homogeneous polynomials, homogeneous Taylor parts, and the
//! holomorphic extension of harmonic polynomials through the full pipeline.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::complex_geometry::{
    lie_norm_sq, q_of, random_unit_vector, sample_lie_ball, seeded_rng, shilov_point, ComplexPoint,
};
use crate::error::{LieError, Result};
use crate::harmonic_basis::{addition_residual, harmonic_projection, norm_sum_closed_form, norm_sum_complex};
use crate::holo_continuation::evaluate;
use crate::lf_transform::{expand, FunctionSpec, DEFAULT_M};
use crate::poly::{MultiIndex, Poly};
use crate::special_functions::{legendre_homogeneous, legendre_nd, legendre_upper};

const MAX_DETAILS: usize = 10;

/// Outcome of one property check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed ratio of the checked quantity to its allowed bound (≤ 1 means passing).
    pub worst_margin: f64,
    /// Check-specific summary numbers.
    pub metrics: BTreeMap<String, f64>,
    /// First failing inputs.
    pub details: Vec<serde_json::Value>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            trials: 0,
            failures: 0,
            worst_margin: 0.0,
            metrics: BTreeMap::new(),
            details: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Folds one trial outcome in; `margin ≤ 1` passes.
    fn record(&mut self, margin: f64, detail: impl FnOnce() -> serde_json::Value) {
        self.trials += 1;
        let margin = if margin.is_nan() { f64::MAX } else { margin.min(f64::MAX) };
        self.worst_margin = self.worst_margin.max(margin);
        if margin > 1.0 {
            self.failures += 1;
            if self.details.len() < MAX_DETAILS {
                self.details.push(detail());
            }
        }
    }
}

fn point_json(z: &ComplexPoint) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

/// Runs `trials` independent trials in parallel with per-trial RNG streams.
fn run_trials<T: Send>(trials: usize, seed: u64, f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync + Send) -> Vec<T> {
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut seeded_rng(seed, t as u64 + 1)))
        .collect()
}

// ---------------------------------------------------------------------------
// Addition theorem

/// Real addition theorem at random pairs of points, `n ∈ dims`, `k ≤ k_max`.
pub fn check_addition(dims: &[usize], k_max: usize, trials: usize, seed: u64, tol: f64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("addition");
    for &n in dims {
        for k in 0..=k_max {
            let s = seed ^ ((n as u64) << 32) ^ ((k as u64) << 16);
            let out = run_trials(trials, s, |rng| {
                let rx: f64 = rng.random_range(0.1..1.5);
                let ry: f64 = rng.random_range(0.1..1.5);
                let x: Vec<f64> = random_unit_vector(n, rng).iter().map(|v| v * rx).collect();
                let y: Vec<f64> = random_unit_vector(n, rng).iter().map(|v| v * ry).collect();
                let res = addition_residual(n, k, &ComplexPoint::real(&x), &ComplexPoint::real(&y));
                (x, y, res)
            });
            for (x, y, res) in out {
                let res = res?;
                rep.record(res / tol, || json!({ "n": n, "k": k, "x": x, "y": y, "residual": res }));
            }
        }
    }
    rep.metrics.insert("tolerance".into(), tol);
    Ok(rep)
}

fn random_complex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexPoint {
    let re = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let im = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    ComplexPoint::new(re, im).expect("finite sample")
}

/// `Σ_l |Y_{k,l}(z)|² = (a_k/ω)|q|^k P_k(|z|²/|q|)` at random points with `|q(z)| > q_min`.
pub fn check_norm_sum_generic(
    dims: &[usize],
    k_max: usize,
    trials: usize,
    seed: u64,
    q_min: f64,
    tol: f64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("norm_sum_generic");
    for &n in dims {
        for k in 0..=k_max {
            let s = seed ^ 0xA11 ^ ((n as u64) << 32) ^ ((k as u64) << 16);
            let out = run_trials(trials, s, |rng| {
                let z = loop {
                    let z = random_complex_point(n, rng);
                    if q_of(&z).norm() > q_min {
                        break z;
                    }
                };
                let direct = norm_sum_complex(n, k, &z);
                let closed = norm_sum_closed_form(n, k, &z);
                (z, direct, closed)
            });
            for (z, d, c) in out {
                let (d, c) = (d?, c?);
                let rel = (d - c).abs() / c.abs();
                rep.record(rel / tol, || json!({ "n": n, "k": k, "z": point_json(&z), "direct": d, "closed": c }));
            }
        }
    }
    rep.metrics.insert("tolerance".into(), tol);
    rep.metrics.insert("q_min".into(), q_min);
    Ok(rep)
}

/// A point with `q(z) = 0`: `z = x + iy`, `|x| = |y|`, `x ⊥ y`.
pub fn null_cone_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexPoint {
    assert!(n >= 2);
    let x = random_unit_vector(n, rng);
    let mut y = random_unit_vector(n, rng);
    let d: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    y.iter_mut().zip(&x).for_each(|(b, a)| *b -= d * a);
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s: f64 = rng.random_range(0.2..1.5);
    ComplexPoint::new(x.iter().map(|v| v * s).collect(), y.iter().map(|v| v * s / ny).collect())
        .expect("finite sample")
}

/// `Σ_l |Y_{k,l}(z)|² = (a_k/ω) d_k |z|^{2k}` on the null cone `q(z) = 0`.
pub fn check_norm_sum_null(dims: &[usize], k_max: usize, trials: usize, seed: u64, tol: f64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("norm_sum_null_cone");
    let mut max_q = 0.0f64;
    for &n in dims {
        for k in 0..=k_max {
            let s = seed ^ 0xB22 ^ ((n as u64) << 32) ^ ((k as u64) << 16);
            let out = run_trials(trials, s, |rng| {
                let z = null_cone_point(n, rng);
                (z.clone(), norm_sum_complex(n, k, &z), norm_sum_closed_form(n, k, &z))
            });
            for (z, d, c) in out {
                let (d, c) = (d?, c?);
                max_q = max_q.max(q_of(&z).norm() / z.abs_sq());
                let rel = (d - c).abs() / c.abs();
                rep.record(rel / tol, || json!({ "n": n, "k": k, "z": point_json(&z), "direct": d, "closed": c }));
            }
        }
    }
    rep.metrics.insert("tolerance".into(), tol);
    rep.metrics.insert("max_relative_q".into(), max_q);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Legendre bounds

/// `P(1) = 1`, `|P| ≤ 1` on `[−1, 1]`, `1 ≤ P_k(x) ≤ (x + √(x²−1))^k` for `x ≥ 1`.
pub fn check_legendre(dims: &[usize], k_max: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("legendre_bounds");
    for &n in dims {
        for k in 0..=k_max {
            let one = legendre_nd(k, n, 1.0)?;
            rep.record((one - 1.0).abs() / 1e-12, || json!({ "n": n, "k": k, "P(1)": one }));
            let s = seed ^ 0xC33 ^ ((n as u64) << 32) ^ ((k as u64) << 16);
            let out = run_trials(trials, s, |rng| {
                let x: f64 = rng.random_range(-1.0..=1.0);
                let y: f64 = rng.random_range(1.0..4.0);
                (x, legendre_nd(k, n, x), y, legendre_nd(k, n, y), legendre_upper(k, y))
            });
            for (x, px, y, py, up) in out {
                let (px, py, up) = (px?, py?, up?);
                rep.record(px.abs() / (1.0 + 1e-12), || json!({ "n": n, "k": k, "x": x, "P": px }));
                let m = (py / (up * (1.0 + 1e-12))).max((1.0 - 1e-12) / py);
                rep.record(m, || json!({ "n": n, "k": k, "x": y, "P": py, "upper": up }));
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Lie-ball inequality

/// `|q(z)|^k P_k^n(|z|²/|q(z)|) ≤ τ^{2k}` on samples of the Lie ball of radius `τ`.
pub fn check_add3(n: usize, k_max: usize, tau: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(LieError::invalid("tau", format!("must be positive, got {tau}")));
    }
    if n < 2 {
        return Err(LieError::invalid("n", "dimension must be ≥ 2"));
    }
    let mut rep = CheckReport::new(&format!("add3_n{n}"));
    let out = run_trials(trials, seed ^ 0xD44 ^ ((n as u64) << 32), |rng| {
        let z = sample_lie_ball(n, tau, rng);
        let (a, b) = (z.abs_sq(), q_of(&z).norm());
        let margins: Vec<f64> = (0..=k_max)
            .map(|k| legendre_homogeneous(k, n, a, b) / tau.powi(2 * k as i32))
            .collect();
        (z, margins)
    });
    for (z, margins) in out {
        let worst = margins.iter().copied().fold(0.0, f64::max);
        rep.record(worst / (1.0 + 1e-10), || {
            json!({ "z": point_json(&z), "lie_norm_sq": lie_norm_sq(&z), "margins": margins })
        });
    }
    rep.metrics.insert("max_lhs_over_rhs".into(), rep.worst_margin * (1.0 + 1e-10));
    rep.metrics.insert("tau".into(), tau);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Hua identity

fn abs_sq_real(p: &Poly<Complex64>, x: &[f64]) -> f64 {
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    p.eval_complex(&z).norm_sqr()
}

/// `max_{θ ∈ S^{n−1}} |p(θ)|` from a dense random sample refined by projected gradient ascent.
pub fn sphere_max_abs<R: Rng + ?Sized>(p: &Poly<Complex64>, samples: usize, rng: &mut R) -> (f64, Vec<f64>) {
    let n = p.dim();
    let grads: Vec<Poly<Complex64>> = (0..n).map(|i| p.partial(i)).collect();
    let mut cands: Vec<(f64, Vec<f64>)> = (0..samples)
        .map(|_| {
            let th = random_unit_vector(n, rng);
            (abs_sq_real(p, &th), th)
        })
        .collect();
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
    cands.truncate(16);
    let mut best = (0.0, vec![0.0; n]);
    for (mut h, mut th) in cands {
        let mut step = 0.1;
        for _ in 0..400 {
            let z: Vec<Complex64> = th.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let pv = p.eval_complex(&z);
            let mut g: Vec<f64> = grads.iter().map(|d| 2.0 * (pv.conj() * d.eval_complex(&z)).re).collect();
            let radial: f64 = g.iter().zip(&th).map(|(a, b)| a * b).sum();
            g.iter_mut().zip(&th).for_each(|(a, b)| *a -= radial * b);
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn <= 1e-14 * h.max(f64::MIN_POSITIVE) {
                break;
            }
            let mut moved = false;
            while step > 1e-16 {
                let mut c: Vec<f64> = th.iter().zip(&g).map(|(a, b)| a + step * b / gn).collect();
                let nc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                c.iter_mut().for_each(|v| *v /= nc);
                let hc = abs_sq_real(p, &c);
                if hc > h {
                    th = c;
                    h = hc;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if h > best.0 {
            best = (h, th);
        }
    }
    (best.0.sqrt(), best.1)
}

/// Hua's identity for a homogeneous polynomial: interior Lie-ball values never exceed the
/// real-sphere maximum, and the maximum is attained on the Shilov family `e^{it} R θ`.
pub fn check_hua(p: &Poly<Complex64>, radius: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    let m = p.homogeneous_degree().ok_or_else(|| LieError::NotStructured {
        what: "homogeneous",
        detail: "Hua check needs a homogeneous polynomial".into(),
    })?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(LieError::invalid("R", format!("must be positive, got {radius}")));
    }
    let n = p.dim();
    let mut rng = seeded_rng(seed, 0);
    let (unit_max, theta) = sphere_max_abs(p, 20_000, &mut rng);
    let s = radius.powi(m as i32) * unit_max;
    let mut rep = CheckReport::new("hua");
    let out = run_trials(trials, seed, |rng| {
        let z = match rng.random_range(0..5u8) {
            0 | 1 => sample_lie_ball(n, radius, rng),
            2 | 3 => {
                // generic point of the Lie sphere of radius R
                let z = sample_lie_ball(n, radius, rng);
                let l = lie_norm_sq(&z).sqrt();
                z.scaled(Complex64::new(radius / l, 0.0))
            }
            _ => {
                let u: f64 = rng.random();
                let th = random_unit_vector(n, rng);
                shilov_point(radius * u, rng.random_range(0.0..2.0 * PI), &th)
            }
        };
        let v = p.eval_complex(&z.to_complex()).norm();
        (z, v)
    });
    let mut interior_max = 0.0f64;
    for (z, v) in out {
        interior_max = interior_max.max(v);
        rep.record(v / (s * (1.0 + 1e-8)), || json!({ "z": point_json(&z), "value": v, "sphere_max": s }));
    }
    let shilov_max = (0..16)
        .map(|j| {
            let z = shilov_point(radius, 2.0 * PI * j as f64 / 16.0, &theta);
            p.eval_complex(&z.to_complex()).norm()
        })
        .fold(0.0, f64::max);
    let ratio = shilov_max / s;
    if (ratio - 1.0).abs() > 1e-6 {
        rep.failures += 1;
        rep.details.push(json!({ "shilov_max": shilov_max, "sphere_max": s }));
    }
    rep.metrics.insert("degree".into(), m as f64);
    rep.metrics.insert("sphere_max".into(), s);
    rep.metrics.insert("interior_max".into(), interior_max);
    rep.metrics.insert("shilov_ratio".into(), ratio);
    Ok(rep)
}

/// Random homogeneous polynomial with Gaussian complex coefficients.
pub fn random_homogeneous<R: Rng + ?Sized>(n: usize, m: u32, rng: &mut R) -> Poly<Complex64> {
    Poly::from_terms(
        n,
        MultiIndex::all_of_degree(n, m).into_iter().map(|a| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (a, Complex64::new(re, im))
        }),
    )
}

/// Hua check on `count` random homogeneous polynomials with `n ≤ n_max`, degree `≤ m_max`.
pub fn check_hua_random(count: usize, n_max: usize, m_max: u32, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut rng = seeded_rng(seed, 0xE55);
    (0..count)
        .map(|i| {
            let n = rng.random_range(2..=n_max);
            let m = rng.random_range(1..=m_max);
            let p = random_homogeneous(n, m, &mut rng);
            let mut r = check_hua(&p, 1.0, trials, seed.wrapping_add(i as u64))?;
            r.name = format!("hua_{i}_n{n}_m{m}");
            Ok(r)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Taylor parts

/// Homogeneous parts of a polynomial in increasing degree; empty parts are skipped.
pub fn taylor_parts(p: &Poly<Complex64>) -> Vec<(u32, Poly<Complex64>)> {
    let Some(d) = p.degree() else { return Vec::new() };
    (0..=d)
        .map(|m| (m, p.homogeneous_part(m)))
        .filter(|(_, q)| !q.is_zero())
        .collect()
}

// ---------------------------------------------------------------------------
// Harmonic extension

/// Pipeline value vs direct evaluation for a harmonic polynomial at random Lie-ball points.
///
/// The error is measured relative to `max(|h(z)|, 1e−6 · Σ_α |c_α z^α|)`; the floor only
/// matters near zeros of `h`, where a relative error is meaningless.
pub fn check_harmonic_extension(h: &Poly<Complex64>, radius: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    let n = h.dim();
    let scale = h.terms().values().map(|c| c.norm()).fold(0.0, f64::max);
    let lap = h.laplacian().terms().values().map(|c| c.norm()).fold(0.0, f64::max);
    if lap > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(LieError::NotStructured {
            what: "harmonic",
            detail: format!("Laplacian residual {lap:e} (max coefficient {scale:e})"),
        });
    }
    let spec = FunctionSpec::polynomial(n, radius, h)?;
    let k = h.degree().unwrap_or(0) as usize;
    let exp = expand(&spec, k, DEFAULT_M, DEFAULT_M + 1)?;
    let mut rep = CheckReport::new("harmonic_extension");
    let out = run_trials(trials, seed ^ 0xF66, |rng| {
        let z = sample_lie_ball(n, radius, rng);
        let zc = z.to_complex();
        let pipe = evaluate(&exp, &z, None).map(|r| r.value);
        (z, pipe, h.eval_complex(&zc), h.modulus_bound(&zc))
    });
    let mut worst_rel = 0.0f64;
    for (z, pipe, direct, bound) in out {
        let pipe = pipe?;
        let err = (pipe - direct).norm();
        let rel = if err == 0.0 { 0.0 } else { err / direct.norm().max(1e-6 * bound) };
        worst_rel = worst_rel.max(rel);
        rep.record(rel / 1e-9, || {
            json!({ "z": point_json(&z), "pipeline": [pipe.re, pipe.im], "direct": [direct.re, direct.im] })
        });
    }
    rep.metrics.insert("max_relative_error".into(), worst_rel);
    Ok(rep)
}

/// Harmonic projection of a random homogeneous polynomial of degree `d` with real coefficients.
pub fn random_harmonic<R: Rng + ?Sized>(n: usize, d: u32, rng: &mut R) -> Result<Poly<Complex64>> {
    let p: Poly<f64> = Poly::from_terms(
        n,
        MultiIndex::all_of_degree(n, d)
            .into_iter()
            .map(|a| (a, rng.random_range(-1.0..1.0))),
    );
    Ok(harmonic_projection(&p)?.map_coeffs(|&c| Complex64::new(c, 0.0)))
}

/// Harmonic extension over `n ∈ dims`, degrees `0..=d_max`, one random harmonic each.
pub fn check_extension_suite(dims: &[usize], d_max: u32, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for &n in dims {
        for d in 0..=d_max {
            let mut rng = seeded_rng(seed ^ 0x177, ((n as u64) << 8) | d as u64);
            let h = random_harmonic(n, d, &mut rng)?;
            let mut r = check_harmonic_extension(&h, 1.0, trials, seed ^ ((n as u64) << 8) ^ d as u64)?;
            r.name = format!("harmonic_extension_n{n}_d{d}");
            out.push(r);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Suites

pub const SUITES: [&str; 6] = ["all", "add3", "hua", "addition", "legendre", "extension"];

/// Runs a named suite; `trials` is the per-check sample count.
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let all = name == "all";
    if !SUITES.contains(&name) {
        return Err(LieError::invalid("suite", format!("unknown suite `{name}` (expected one of {SUITES:?})")));
    }
    if all || name == "addition" {
        out.push(check_addition(&[2, 3, 4, 5], 10, trials, seed, 1e-9)?);
        out.push(check_norm_sum_generic(&[2, 3, 4, 5], 10, trials, seed, 0.1, 1e-9)?);
        out.push(check_norm_sum_null(&[2, 3, 4, 5], 10, trials, seed, 1e-9)?);
    }
    if all || name == "legendre" {
        out.push(check_legendre(&[2, 3, 4, 5, 6, 7, 8], 30, trials, seed)?);
    }
    if all || name == "add3" {
        for n in [2, 3, 4] {
            out.push(check_add3(n, 20, 1.0, trials, seed)?);
        }
    }
    if all || name == "hua" {
        out.extend(check_hua_random(20, 4, 12, trials, seed)?);
    }
    if all || name == "extension" {
        out.extend(check_extension_suite(&[2, 3, 4], 8, trials, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic_basis::build_basis;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn add3_trivial_cases_and_random_samples() {
        // real z with |z| ≤ τ: LHS = |z|^{2k}
        for k in 0..10 {
            let v = legendre_homogeneous(k, 3, 0.25, 0.25);
            assert!((v - 0.25f64.powi(k as i32)).abs() < 1e-15);
        }
        for n in [2, 3, 4] {
            let r = check_add3(n, 20, 0.7, 2000, 5).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.worst_margin <= 1.0 && r.worst_margin > 0.9);
        }
        assert!(check_add3(3, 4, 0.0, 10, 1).is_err());
    }

    #[test]
    fn hua_examples() {
        // x_1^m: both maxima R^m
        let p = Poly::monomial(MultiIndex::unit(3, 0, 5), c(1.0));
        let r = check_hua(&p, 1.5, 2000, 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.metrics["sphere_max"] - 1.5f64.powi(5)).abs() < 1e-9);
        // |x|² as a degree-2 polynomial: sphere maximum R²
        let q = Poly::norm_sq_power(3, 1).map_coeffs(|&v: &f64| c(v));
        let r = check_hua(&q, 1.0, 2000, 4).unwrap();
        assert!(r.passed() && (r.metrics["sphere_max"] - 1.0).abs() < 1e-12);
        // a harmonic member
        let y = build_basis(3, 4).unwrap().members()[3].poly().map_coeffs(|&v| c(v));
        let r = check_hua(&y, 1.0, 2000, 5).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.metrics["shilov_ratio"] - 1.0).abs() < 1e-6);
        // non-homogeneous input is rejected
        let bad = &p + &Poly::constant(3, c(1.0));
        assert!(matches!(check_hua(&bad, 1.0, 10, 1), Err(LieError::NotStructured { .. })));
    }

    #[test]
    fn taylor_parts_partition_terms() {
        let p = Poly::from_terms(
            2,
            [
                (MultiIndex(vec![0, 0]), c(1.0)),
                (MultiIndex(vec![1, 0]), c(1.0)),
                (MultiIndex(vec![1, 1]), c(1.0)),
            ],
        );
        let parts = taylor_parts(&p);
        assert_eq!(parts.iter().map(|(d, _)| *d).collect::<Vec<_>>(), vec![0, 1, 2]);
        let h = Poly::monomial(MultiIndex(vec![2, 1]), c(3.0));
        assert_eq!(taylor_parts(&h), vec![(3, h.clone())]);

        let mut rng = seeded_rng(8, 0);
        let terms: Vec<(MultiIndex, Complex64)> = (0..=6u32)
            .flat_map(|d| MultiIndex::all_of_degree(3, d))
            .map(|a| (a, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        let p = Poly::from_terms(3, terms);
        let parts = taylor_parts(&p);
        let mut sum = Poly::zero(3);
        for (d, part) in &parts {
            sum = &sum + part;
            let th = random_unit_vector(3, &mut rng);
            let r = 0.7;
            let scaled: Vec<Complex64> = th.iter().map(|&v| c(r * v)).collect();
            let unit: Vec<Complex64> = th.iter().map(|&v| c(v)).collect();
            let lhs = part.eval_complex(&scaled);
            let rhs = part.eval_complex(&unit) * r.powi(*d as i32);
            assert!((lhs - rhs).norm() < 1e-13);
        }
        assert_eq!(sum, p);
        assert!(taylor_parts(&Poly::zero(2)).is_empty());
    }

    #[test]
    fn extension_examples() {
        let y = build_basis(3, 3).unwrap().members()[0].poly().map_coeffs(|&v| c(v));
        let r = check_harmonic_extension(&y, 1.0, 1000, 1).unwrap();
        assert!(r.passed(), "{r:?}");
        let k = Poly::constant(2, c(2.5));
        let r = check_harmonic_extension(&k, 1.0, 100, 2).unwrap();
        assert_eq!(r.metrics["max_relative_error"], 0.0);
        let xy = Poly::monomial(MultiIndex(vec![1, 1, 0]), c(1.0));
        let r = check_harmonic_extension(&xy, 1.0, 200, 3).unwrap();
        assert!(r.passed());
        let bad = Poly::monomial(MultiIndex(vec![2, 0]), c(1.0));
        assert!(matches!(
            check_harmonic_extension(&bad, 1.0, 10, 1),
            Err(LieError::NotStructured { what: "harmonic", .. })
        ));
    }

    #[test]
    fn null_cone_points_have_vanishing_q() {
        let mut rng = seeded_rng(2, 0);
        for n in 2..=6 {
            let z = null_cone_point(n, &mut rng);
            assert!(q_of(&z).norm() < 1e-14 * z.abs_sq());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&run_suite("add3", 50, 7).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite("add3", 50, 7).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(run_suite("nope", 1, 1).is_err());
    }

    #[test]
    fn record_counts_failures() {
        let mut r = CheckReport::new("x");
        r.record(0.5, || json!(null));
        r.record(2.0, || json!({"bad": 1}));
        r.record(f64::NAN, || json!({"bad": 2}));
        assert_eq!((r.trials, r.failures, r.details.len()), (3, 2, 2));
        assert!(r.worst_margin.is_finite());
    }
}
