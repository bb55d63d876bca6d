//! Laplace–Fourier expansion `f(rθ) = Σ_{k,l} r^k p_{k,l}(r²) Y_{k,l}(θ)`.
//!
//! The profiles `p_{k,l}` are stored as polynomials in `t = r²` so that they can be
//! evaluated at complex `t = q(z)` by the continuation.

mod decay;
mod expand;
mod function_spec;
mod structural;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LieError, Result};
use crate::harmonic_basis::{HarmonicSystem, MAX_BASIS_DEGREE};
use crate::special_functions::harmonic_dim;

pub use decay::{
    cauchy_profile_bound, decay_estimate, decay_estimate_window, geometric_profile_bound, DecayEstimate,
    CIRCLE_SAMPLES,
};
pub use expand::{chebyshev_nodes, expand, expand_with, ExpandOptions};
pub use function_spec::{FunctionKind, FunctionSpec, PolyTerm, RawFunctionSpec};
pub use structural::{structural_check, StructuralReport, Violation, ViolationKind, LEAKAGE_TOL, SLOPE_SLACK};

/// Default profile degree `M`.
pub const DEFAULT_M: usize = 24;
/// Sampling radius as a fraction of `R`.
pub const SAMPLE_FRACTION: f64 = 0.95;
/// Smallest radial node as a fraction of `R`.
pub const INNER_FRACTION: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    /// Computed from the polynomial's Fischer decomposition.
    Exact,
    /// Read off the Taylor series of the sampled coefficient function.
    Fitted,
}

/// `p_{k,l}(t) = Σ_m coeffs[m] t^m`; `l` is zero-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePoly {
    pub k: usize,
    pub l: usize,
    pub coeffs: Vec<Complex64>,
    pub fit_residual: f64,
    pub source: ProfileSource,
}

impl ProfilePoly {
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    /// `r^k p(r²)`, the coefficient function `f_{k,l}(r)` this profile represents.
    pub fn radial_value(&self, r: f64) -> Complex64 {
        self.eval(Complex64::new(r * r, 0.0)) * r.powi(self.k as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

/// Taylor data of `ζ ↦ f_{k,l}(ζ)` kept from a sampled expansion for the structural checks.
#[derive(Clone, Debug)]
pub struct SeriesData {
    /// Radius of the sampling circles.
    pub sample_radius: f64,
    /// L² norm of `f` over the sampled circles × sphere.
    pub f_norm: f64,
    /// `scaled[k][l][i] = c_i · sample_radius^i` for `f_{k,l}(ζ) = Σ_i c_i ζ^i`, after the floor.
    pub scaled: Vec<Vec<Vec<Complex64>>>,
    /// Radial nodes, ascending.
    pub radial_nodes: Vec<f64>,
}

impl SeriesData {
    pub fn coefficient(&self, k: usize, l: usize, i: usize) -> Complex64 {
        self.scaled[k][l][i] / self.sample_radius.powi(i as i32)
    }

    /// `Σ_i c_i r^i` over the stored coefficients.
    pub fn radial_value(&self, k: usize, l: usize, r: f64) -> Complex64 {
        let x = r / self.sample_radius;
        self.scaled[k][l]
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }
}

/// How an expansion was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpandDiagnostics {
    /// `exact` or `cauchy`.
    pub method: String,
    pub sample_radius: Option<f64>,
    pub circle_samples: Option<usize>,
    pub quad_degree: Option<usize>,
    pub quad_nodes: Option<usize>,
    /// Largest coefficient change in the last doubling of the circle samples, relative to `f_norm`.
    pub convergence_change: Option<f64>,
    pub f_norm: Option<f64>,
    pub max_fit_residual: f64,
    pub fit_tolerance: f64,
    /// `(k, l)` pairs (one-based `l`) whose fit residual exceeds the tolerance.
    pub flagged: Vec<[usize; 2]>,
}

/// Profiles `p_{k,l}` for all `k ≤ K`, `l < a_k`.
#[derive(Clone, Debug)]
pub struct LFExpansion {
    spec: FunctionSpec,
    k_max: usize,
    m_max: usize,
    profiles: Vec<Vec<ProfilePoly>>,
    diagnostics: ExpandDiagnostics,
    decay: Option<DecayEstimate>,
    series: Option<SeriesData>,
    system: Arc<HarmonicSystem>,
}

impl LFExpansion {
    pub(crate) fn assemble(
        spec: FunctionSpec,
        k_max: usize,
        m_max: usize,
        profiles: Vec<Vec<ProfilePoly>>,
        diagnostics: ExpandDiagnostics,
        series: Option<SeriesData>,
    ) -> Result<Self> {
        let system = Arc::new(HarmonicSystem::new(spec.n(), k_max)?);
        for (k, row) in profiles.iter().enumerate() {
            let a = harmonic_dim(k, spec.n()) as usize;
            if row.len() != a {
                return Err(LieError::invalid(
                    "rows",
                    format!("degree {k} has {} profiles, expected a_k = {a}", row.len()),
                ));
            }
        }
        if profiles.len() != k_max + 1 {
            return Err(LieError::invalid(
                "rows",
                format!("profiles cover {} degrees, expected K + 1 = {}", profiles.len(), k_max + 1),
            ));
        }
        Ok(LFExpansion {
            spec,
            k_max,
            m_max,
            profiles,
            diagnostics,
            decay: None,
            series,
            system,
        })
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn radius(&self) -> f64 {
        self.spec.radius()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `profiles()[k][l]`.
    pub fn profiles(&self) -> &[Vec<ProfilePoly>] {
        &self.profiles
    }

    pub fn profile(&self, k: usize, l: usize) -> &ProfilePoly {
        &self.profiles[k][l]
    }

    pub fn diagnostics(&self) -> &ExpandDiagnostics {
        &self.diagnostics
    }

    pub fn series(&self) -> Option<&SeriesData> {
        self.series.as_ref()
    }

    pub fn system(&self) -> &HarmonicSystem {
        &self.system
    }

    pub fn decay(&self) -> Option<&DecayEstimate> {
        self.decay.as_ref()
    }

    pub fn set_decay(&mut self, d: Option<DecayEstimate>) {
        self.decay = d;
    }

    /// Round trip `Σ_{k,l} p_{k,l}(|x|²) Y_{k,l}(x)` at a real point.
    pub fn eval_real(&self, x: &[f64]) -> Complex64 {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        crate::holo_continuation::series_value(self, &z)
    }

    pub fn is_exact(&self) -> bool {
        self.profiles
            .iter()
            .flatten()
            .all(|p| p.source == ProfileSource::Exact)
    }

    pub fn to_document(&self) -> ExpansionDoc {
        let rows = self
            .profiles
            .iter()
            .flatten()
            .map(|p| {
                let im: Vec<f64> = p.coeffs.iter().map(|c| c.im).collect();
                ProfileRow {
                    k: p.k,
                    l: p.l + 1,
                    coeffs: p.coeffs.iter().map(|c| c.re).collect(),
                    coeffs_im: im.iter().any(|v| *v != 0.0).then_some(im),
                    fit_residual: p.fit_residual,
                    source: p.source,
                }
            })
            .collect();
        ExpansionDoc {
            metadata: ExpansionMeta {
                n: self.n(),
                radius: self.radius(),
                k_max: self.k_max,
                m_max: self.m_max,
                spec: self.spec.clone(),
                diagnostics: self.diagnostics.clone(),
                decay: self.decay.clone(),
            },
            rows,
        }
    }

    pub fn from_document(doc: ExpansionDoc) -> Result<Self> {
        let meta = doc.metadata;
        if meta.n != meta.spec.n() {
            return Err(LieError::invalid("metadata.n", "disagrees with metadata.spec.n"));
        }
        if meta.radius != meta.spec.radius() {
            return Err(LieError::invalid("metadata.R", "disagrees with metadata.spec.R"));
        }
        if meta.k_max > MAX_BASIS_DEGREE {
            return Err(LieError::ResourceCap {
                cap: format!("K ≤ {MAX_BASIS_DEGREE}"),
                requested: format!("K = {}", meta.k_max),
            });
        }
        let mut profiles: Vec<Vec<Option<ProfilePoly>>> = (0..=meta.k_max)
            .map(|k| vec![None; harmonic_dim(k, meta.n) as usize])
            .collect();
        for (i, row) in doc.rows.into_iter().enumerate() {
            let field = |f: &str| format!("rows[{i}].{f}");
            let slot = profiles
                .get_mut(row.k)
                .ok_or_else(|| LieError::invalid(field("k"), format!("k = {} > K = {}", row.k, meta.k_max)))?;
            if row.l == 0 || row.l > slot.len() {
                return Err(LieError::invalid(
                    field("l"),
                    format!("l = {} outside 1..={}", row.l, slot.len()),
                ));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(LieError::invalid(field("coeffs"), "entries must be finite"));
            }
            let im = row.coeffs_im.unwrap_or_else(|| vec![0.0; row.coeffs.len()]);
            if im.len() != row.coeffs.len() {
                return Err(LieError::invalid(field("coeffs_im"), "length differs from coeffs"));
            }
            if slot[row.l - 1].is_some() {
                return Err(LieError::invalid(field("l"), "duplicate (k, l) row"));
            }
            slot[row.l - 1] = Some(ProfilePoly {
                k: row.k,
                l: row.l - 1,
                coeffs: row.coeffs.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
                fit_residual: row.fit_residual,
                source: row.source,
            });
        }
        let profiles = profiles
            .into_iter()
            .enumerate()
            .map(|(k, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(l, p)| {
                        p.ok_or_else(|| LieError::invalid("rows", format!("missing row k = {k}, l = {}", l + 1)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut exp = LFExpansion::assemble(meta.spec, meta.k_max, meta.m_max, profiles, meta.diagnostics, None)?;
        exp.decay = meta.decay;
        Ok(exp)
    }
}

/// Serialized expansion: metadata plus one row per profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionDoc {
    pub metadata: ExpansionMeta,
    pub rows: Vec<ProfileRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionMeta {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(rename = "M")]
    pub m_max: usize,
    pub spec: FunctionSpec,
    pub diagnostics: ExpandDiagnostics,
    pub decay: Option<DecayEstimate>,
}

/// One profile; `l` is one-based here.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRow {
    pub k: usize,
    pub l: usize,
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs_im: Option<Vec<f64>>,
    pub fit_residual: f64,
    pub source: ProfileSource,
}

/// Serde helpers mapping non-finite floats to JSON `null`.
pub(crate) mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub mod inf {
        use super::*;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            if v.is_finite() {
                s.serialize_f64(*v)
            } else {
                s.serialize_none()
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
        }
    }

    pub mod nan {
        use super::*;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            super::inf::serialize(v, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
        }
    }
}
