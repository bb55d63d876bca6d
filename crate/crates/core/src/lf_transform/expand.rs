use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{
    ExpandDiagnostics, FunctionSpec, LFExpansion, ProfilePoly, ProfileSource, SeriesData, DEFAULT_M,
    INNER_FRACTION, SAMPLE_FRACTION,
};
use crate::error::{LieError, Result};
use crate::harmonic_basis::{
    build_basis, build_basis_rational, fischer_decomposition, sphere_inner_product_factor, HarmonicSystem,
    MAX_BASIS_DEGREE,
};
use crate::poly::{rational_from_f64, rational_to_f64, Poly};
use crate::sphere_integration::{build_rule_capped, SphereRule, DEFAULT_NODE_CAP};
use crate::special_functions::{harmonic_dim, sphere_area};

/// Coefficients with `|c_i| ρ^i` below this fraction of `‖f‖` are flushed to zero.
pub const COEFF_FLOOR: f64 = 1e-13;
/// Target for the circle-sample doubling study.
pub const CONVERGENCE_TOL: f64 = 1e-11;
/// Fit residuals above this fraction of the RMS of `f` are flagged.
pub const FIT_TOL: f64 = 1e-8;
const MAX_CIRCLE_SAMPLES: usize = 1 << 13;
const PARTIAL_BUDGET_BYTES: usize = 1 << 28;

#[derive(Clone, Debug)]
pub struct ExpandOptions {
    pub k_max: usize,
    pub m_max: usize,
    /// Radial nodes for the fit residual; defaults to `M + 8`.
    pub radial_nodes: Option<usize>,
    /// Sphere rule exactness; defaults to `2K + 2M + 4`.
    pub quad_degree: Option<usize>,
    /// Exact rational arithmetic on the polynomial path.
    pub exact_arithmetic: bool,
    pub node_cap: usize,
    /// Relative amplitude of deterministic multiplicative noise on every sample.
    pub noise: f64,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            k_max: 10,
            m_max: DEFAULT_M,
            radial_nodes: None,
            quad_degree: None,
            exact_arithmetic: false,
            node_cap: DEFAULT_NODE_CAP,
            noise: 0.0,
        }
    }
}

pub fn expand(f: &FunctionSpec, k_max: usize, m_max: usize, radial_nodes: usize) -> Result<LFExpansion> {
    expand_with(
        f,
        &ExpandOptions {
            k_max,
            m_max,
            radial_nodes: Some(radial_nodes),
            ..ExpandOptions::default()
        },
    )
}

pub fn expand_with(f: &FunctionSpec, opts: &ExpandOptions) -> Result<LFExpansion> {
    if opts.k_max > MAX_BASIS_DEGREE {
        return Err(LieError::ResourceCap {
            cap: format!("K ≤ {MAX_BASIS_DEGREE}"),
            requested: format!("K = {}", opts.k_max),
        });
    }
    let radial = opts.radial_nodes.unwrap_or(opts.m_max + 8);
    if radial < opts.m_max + 1 {
        return Err(LieError::invalid(
            "radial_nodes",
            format!("need at least M + 1 = {} radial nodes, got {radial}", opts.m_max + 1),
        ));
    }
    if !(opts.noise.is_finite() && opts.noise >= 0.0) {
        return Err(LieError::invalid("noise", "must be finite and ≥ 0"));
    }
    match f.as_polynomial() {
        Some(p) if opts.noise == 0.0 => expand_polynomial(f, p, opts),
        _ => expand_sampled(f, opts, radial),
    }
}

/// `count` Chebyshev points of `[a, b]`, ascending.
pub fn chebyshev_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..count)
        .map(|i| {
            let x = ((2 * i + 1) as f64 * PI / (2 * count) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect();
    v.reverse();
    v
}

// ---------------------------------------------------------------------------
// Polynomial path

fn expand_polynomial(f: &FunctionSpec, p: &Poly<Complex64>, opts: &ExpandOptions) -> Result<LFExpansion> {
    let n = f.n();
    let deg = p.degree().unwrap_or(0) as usize;
    if deg > MAX_BASIS_DEGREE {
        return Err(LieError::ResourceCap {
            cap: format!("polynomial degree ≤ {MAX_BASIS_DEGREE}"),
            requested: format!("degree {deg}"),
        });
    }
    let omega = sphere_area(n);
    let mut coeffs: Vec<Vec<Vec<Complex64>>> = (0..=opts.k_max)
        .map(|k| vec![vec![Complex64::new(0.0, 0.0)]; harmonic_dim(k, n) as usize])
        .collect();
    let mut put = |k: usize, l: usize, i: usize, v: Complex64| {
        let c = &mut coeffs[k][l];
        if c.len() <= i {
            c.resize(i + 1, Complex64::new(0.0, 0.0));
        }
        c[i] += v;
    };
    let mut rational_bases = HashMap::new();
    for d in 0..=deg as u32 {
        let part = p.homogeneous_part(d);
        if part.is_zero() {
            continue;
        }
        if opts.exact_arithmetic {
            let re = fischer_decomposition(&part.map_coeffs(|c| rational_from_f64(c.re)), d)?;
            let im = fischer_decomposition(&part.map_coeffs(|c| rational_from_f64(c.im)), d)?;
            for (i, (hr, hi)) in re.iter().zip(&im).enumerate() {
                let k = d as usize - 2 * i;
                if k > opts.k_max || (hr.is_zero() && hi.is_zero()) {
                    continue;
                }
                if !rational_bases.contains_key(&k) {
                    rational_bases.insert(k, build_basis_rational(n, k)?);
                }
                for (l, (y, scale, _)) in rational_bases[&k].iter().enumerate() {
                    let s = omega * scale;
                    let v = Complex64::new(
                        rational_to_f64(&sphere_inner_product_factor(hr, y)) * s,
                        rational_to_f64(&sphere_inner_product_factor(hi, y)) * s,
                    );
                    put(k, l, i, v);
                }
            }
        } else {
            for (i, h) in fischer_decomposition(&part, d)?.iter().enumerate() {
                let k = d as usize - 2 * i;
                if k > opts.k_max || h.is_zero() {
                    continue;
                }
                let basis = build_basis(n, k)?;
                for (l, y) in basis.members().iter().enumerate() {
                    let yc = y.poly().map_coeffs(|&c| Complex64::new(c, 0.0));
                    put(k, l, i, sphere_inner_product_factor(h, &yc) * omega);
                }
            }
        }
    }
    let profiles = coeffs
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            row.into_iter()
                .enumerate()
                .map(|(l, c)| ProfilePoly {
                    k,
                    l,
                    coeffs: c,
                    fit_residual: 0.0,
                    source: ProfileSource::Exact,
                })
                .collect()
        })
        .collect();
    let diagnostics = ExpandDiagnostics {
        method: "exact".into(),
        ..ExpandDiagnostics::default()
    };
    LFExpansion::assemble(f.clone(), opts.k_max, opts.m_max, profiles, diagnostics, None)
}

// ---------------------------------------------------------------------------
// Sampled path

/// Deterministic value in `[−1, 1]` from a node/sample counter.
fn hash_noise(a: u64, b: u64) -> f64 {
    let mut x = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x94D0_49BB_1331_11EB);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

struct Sampler<'a> {
    f: &'a FunctionSpec,
    noise: f64,
}

impl Sampler<'_> {
    fn at(&self, node: usize, tag: u64, z: &[Complex64]) -> Result<Complex64> {
        let v = self
            .f
            .eval_complex(z)
            .map_err(|reason| LieError::Evaluation { node, reason })?;
        if self.noise == 0.0 {
            Ok(v)
        } else {
            Ok(v * (1.0 + self.noise * hash_noise(node as u64, tag)))
        }
    }
}

/// Accumulator over sphere nodes `[k][l][i]`, merged in chunk order.
type Table = Vec<Vec<Vec<Complex64>>>;

fn zero_table(dims: &[usize], width: usize) -> Table {
    dims.iter()
        .map(|&d| vec![vec![Complex64::new(0.0, 0.0); width]; d])
        .collect()
}

fn add_table(into: &mut Table, from: &Table) {
    for (a, b) in into.iter_mut().zip(from) {
        for (x, y) in a.iter_mut().zip(b) {
            x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
        }
    }
}

/// Splits the rule into a problem-size-determined number of contiguous chunks.
fn node_chunks(nodes: usize, table_bytes: usize) -> Vec<(usize, usize)> {
    let parts = (PARTIAL_BUDGET_BYTES / table_bytes.max(1)).clamp(1, 16);
    let parts = parts.min(nodes.div_ceil(64)).max(1);
    let size = nodes.div_ceil(parts);
    (0..parts)
        .map(|p| (p * size, ((p + 1) * size).min(nodes)))
        .filter(|(a, b)| a < b)
        .collect()
}

/// `Σ_j w_j F_j Y(θ_j)` where `F_j` is the length-`width` vector produced for node `j`.
fn project(
    rule: &SphereRule,
    sys: &HarmonicSystem,
    width: usize,
    per_node: &(dyn Fn(usize, &[f64], &mut [Complex64]) -> Result<f64> + Sync),
) -> Result<(Table, f64)> {
    let dims = sys.dims();
    let table_bytes = dims.iter().sum::<usize>() * width * 16;
    let chunks = node_chunks(rule.len(), table_bytes);
    let partials: Vec<Result<(Table, f64)>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = zero_table(&dims, width);
            let mut extra = 0.0;
            let mut buf = vec![Complex64::new(0.0, 0.0); width];
            for j in start..end {
                let th = rule.node(j);
                let w = rule.weights()[j];
                extra += w * per_node(j, th, &mut buf)?;
                let ys = sys.eval_all(th);
                for (row, yk) in acc.iter_mut().zip(&ys) {
                    for (cell, &y) in row.iter_mut().zip(yk) {
                        let wy = w * y;
                        cell.iter_mut().zip(&buf).for_each(|(c, v)| *c += v * wy);
                    }
                }
            }
            Ok((acc, extra))
        })
        .collect();
    let mut total = zero_table(&dims, width);
    let mut extra = 0.0;
    for p in partials {
        let (t, e) = p?;
        add_table(&mut total, &t);
        extra += e;
    }
    Ok((total, extra))
}

/// Taylor coefficients `c_i ρ^i` of every `f_{k,l}(ζ)`, `i ≤ imax`, from `s` samples per circle.
fn circle_pass(
    sampler: &Sampler,
    rule: &SphereRule,
    sys: &HarmonicSystem,
    rho: f64,
    s: usize,
    imax: usize,
) -> Result<(Table, f64)> {
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(s);
    let roots: Vec<Complex64> = (0..s)
        .map(|j| Complex64::from_polar(rho, 2.0 * PI * j as f64 / s as f64))
        .collect();
    let n = rule.n();
    let per_node = |j: usize, th: &[f64], out: &mut [Complex64]| -> Result<f64> {
        let mut vals = Vec::with_capacity(s);
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for (t, w) in roots.iter().enumerate() {
            z.iter_mut().zip(th).for_each(|(a, b)| *a = w * b);
            vals.push(sampler.at(j, t as u64, &z)?);
        }
        let energy = vals.iter().map(|v| v.norm_sqr()).sum::<f64>() / s as f64;
        fft.process(&mut vals);
        let inv = 1.0 / s as f64;
        out.iter_mut().zip(&vals).for_each(|(o, v)| *o = v * inv);
        Ok(energy)
    };
    let (table, energy) = project(rule, sys, imax + 1, &per_node)?;
    Ok((table, energy.sqrt()))
}

fn expand_sampled(f: &FunctionSpec, opts: &ExpandOptions, radial: usize) -> Result<LFExpansion> {
    let n = f.n();
    let (k_max, m_max) = (opts.k_max, opts.m_max);
    let rho = SAMPLE_FRACTION * f.radius();
    let imax = k_max + 2 * m_max + 1;
    let degree = opts.quad_degree.unwrap_or(2 * k_max + 2 * m_max + 4);
    let rule = build_rule_capped(n, degree, opts.node_cap)?;
    let sys = HarmonicSystem::new(n, k_max)?;
    let sampler = Sampler { f, noise: opts.noise };

    let mut s = (2 * (imax + 1)).next_power_of_two().max(16);
    let (mut table, mut f_norm) = circle_pass(&sampler, &rule, &sys, rho, s, imax)?;
    let mut change = f64::INFINITY;
    while s < MAX_CIRCLE_SAMPLES {
        let (next, norm) = circle_pass(&sampler, &rule, &sys, rho, 2 * s, imax)?;
        s *= 2;
        change = next
            .iter()
            .flatten()
            .zip(table.iter().flatten())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
            / norm.max(f64::MIN_POSITIVE);
        table = next;
        f_norm = norm;
        if change < CONVERGENCE_TOL {
            break;
        }
    }

    let floor = COEFF_FLOOR * f_norm;
    for c in table.iter_mut().flatten().flatten() {
        if c.norm() < floor {
            *c = Complex64::new(0.0, 0.0);
        }
    }

    // direct real-radius coefficients for the fit residual
    let nodes = chebyshev_nodes(INNER_FRACTION * f.radius(), rho, radial);
    let per_node = |j: usize, th: &[f64], out: &mut [Complex64]| -> Result<f64> {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, &r) in nodes.iter().enumerate() {
            x.iter_mut().zip(th).for_each(|(a, b)| *a = Complex64::new(r * b, 0.0));
            out[i] = sampler.at(j, (1u64 << 40) + i as u64, &x)?;
        }
        Ok(0.0)
    };
    let (direct, _) = project(&rule, &sys, radial, &per_node)?;

    let omega = sphere_area(n);
    let tolerance = FIT_TOL * f_norm / omega.sqrt();
    let mut flagged = Vec::new();
    let mut max_fit = 0.0f64;
    let mut profiles = Vec::with_capacity(k_max + 1);
    for (k, row) in table.iter().enumerate() {
        let mut prow = Vec::with_capacity(row.len());
        for (l, scaled) in row.iter().enumerate() {
            let coeffs: Vec<Complex64> = (0..=m_max)
                .map(|m| scaled[k + 2 * m] / rho.powi((k + 2 * m) as i32))
                .collect();
            let mut p = ProfilePoly {
                k,
                l,
                coeffs,
                fit_residual: 0.0,
                source: ProfileSource::Fitted,
            };
            p.fit_residual = nodes
                .iter()
                .zip(&direct[k][l])
                .map(|(&r, d)| (p.radial_value(r) - d).norm())
                .fold(0.0, f64::max);
            if p.fit_residual > tolerance {
                flagged.push([k, l + 1]);
            }
            max_fit = max_fit.max(p.fit_residual);
            prow.push(p);
        }
        profiles.push(prow);
    }
    let diagnostics = ExpandDiagnostics {
        method: "cauchy".into(),
        sample_radius: Some(rho),
        circle_samples: Some(s),
        quad_degree: Some(degree),
        quad_nodes: Some(rule.len()),
        convergence_change: Some(change),
        f_norm: Some(f_norm),
        max_fit_residual: max_fit,
        fit_tolerance: tolerance,
        flagged,
    };
    let series = SeriesData {
        sample_radius: rho,
        f_norm,
        scaled: table,
        radial_nodes: nodes,
    };
    LFExpansion::assemble(f.clone(), k_max, m_max, profiles, diagnostics, Some(series))
}
