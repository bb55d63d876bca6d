//! Input functions: arbitrary polynomials plus a small catalog of functions with
//! closed-form holomorphic continuations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LieError, Result};
use crate::poly::{MultiIndex, Poly};

/// Wire form of a function spec: `{"kind": ..., "n": ..., "R": ..., "params": ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFunctionSpec {
    pub kind: String,
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub params: serde_json::Value,
}

/// One polynomial term `(re + i·im) x^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub alpha: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InverseQuadraticParams {
    a: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewtonParams {
    y0: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpLinearParams {
    c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    /// `Σ c_α x^α` with complex coefficients.
    Polynomial(Vec<PolyTerm>),
    /// `1/(a − |x|²)`, continued as `1/(a − q(z))`.
    InverseQuadratic { a: f64 },
    /// `1/|x − y₀|` in three variables.
    NewtonKernel { y0: Vec<f64> },
    /// `exp(⟨c, x⟩)`.
    ExpLinear { c: Vec<f64> },
}

/// A validated function on the ball `B_R ⊂ ℝⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunctionSpec", into = "RawFunctionSpec")]
pub struct FunctionSpec {
    n: usize,
    radius: f64,
    kind: FunctionKind,
    poly: Option<Poly<Complex64>>,
}

impl TryFrom<RawFunctionSpec> for FunctionSpec {
    type Error = LieError;

    fn try_from(raw: RawFunctionSpec) -> Result<Self> {
        let params = |e: serde_json::Error| LieError::invalid("params", e.to_string());
        let kind = match raw.kind.as_str() {
            "polynomial" => FunctionKind::Polynomial(serde_json::from_value(raw.params).map_err(params)?),
            "inverse_quadratic" => {
                let p: InverseQuadraticParams = serde_json::from_value(raw.params).map_err(params)?;
                FunctionKind::InverseQuadratic { a: p.a }
            }
            "newton_kernel" => {
                let p: NewtonParams = serde_json::from_value(raw.params).map_err(params)?;
                FunctionKind::NewtonKernel { y0: p.y0 }
            }
            "exp_linear" => {
                let p: ExpLinearParams = serde_json::from_value(raw.params).map_err(params)?;
                FunctionKind::ExpLinear { c: p.c }
            }
            other => {
                return Err(LieError::invalid(
                    "kind",
                    format!("unknown kind `{other}` (expected polynomial, inverse_quadratic, newton_kernel or exp_linear)"),
                ))
            }
        };
        FunctionSpec::new(raw.n, raw.radius, kind)
    }
}

impl From<FunctionSpec> for RawFunctionSpec {
    fn from(f: FunctionSpec) -> Self {
        let (kind, params) = match &f.kind {
            FunctionKind::Polynomial(t) => ("polynomial", serde_json::to_value(t)),
            FunctionKind::InverseQuadratic { a } => ("inverse_quadratic", Ok(serde_json::json!({ "a": a }))),
            FunctionKind::NewtonKernel { y0 } => ("newton_kernel", Ok(serde_json::json!({ "y0": y0 }))),
            FunctionKind::ExpLinear { c } => ("exp_linear", Ok(serde_json::json!({ "c": c }))),
        };
        RawFunctionSpec {
            kind: kind.to_string(),
            n: f.n,
            radius: f.radius,
            params: params.expect("plain data serializes"),
        }
    }
}

fn check_vec(field: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(LieError::invalid(field, format!("length {} ≠ n = {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LieError::invalid(field, "entries must be finite"));
    }
    Ok(())
}

impl FunctionSpec {
    pub fn new(n: usize, radius: f64, kind: FunctionKind) -> Result<Self> {
        if n < 2 {
            return Err(LieError::invalid("n", format!("dimension must be ≥ 2, got {n}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(LieError::invalid("R", format!("radius must be finite and > 0, got {radius}")));
        }
        let mut poly = None;
        match &kind {
            FunctionKind::Polynomial(terms) => {
                let mut p = Poly::zero(n);
                for (i, t) in terms.iter().enumerate() {
                    if t.alpha.len() != n {
                        return Err(LieError::invalid(
                            format!("params[{i}].alpha"),
                            format!("length {} ≠ n = {n}", t.alpha.len()),
                        ));
                    }
                    if !(t.re.is_finite() && t.im.is_finite()) {
                        return Err(LieError::invalid(format!("params[{i}]"), "coefficients must be finite"));
                    }
                    p.add_term(MultiIndex(t.alpha.clone()), Complex64::new(t.re, t.im));
                }
                poly = Some(p);
            }
            FunctionKind::InverseQuadratic { a } => {
                if !(a.is_finite() && *a > radius * radius) {
                    return Err(LieError::invalid(
                        "params.a",
                        format!("need a > R² = {} so the pole stays outside the closed ball, got {a}", radius * radius),
                    ));
                }
            }
            FunctionKind::NewtonKernel { y0 } => {
                if n != 3 {
                    return Err(LieError::invalid("n", format!("newton_kernel is defined for n = 3, got {n}")));
                }
                check_vec("params.y0", y0, n)?;
                let r = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r <= radius {
                    return Err(LieError::invalid(
                        "params.y0",
                        format!("pole must satisfy |y0| > R = {radius}, got |y0| = {r}"),
                    ));
                }
            }
            FunctionKind::ExpLinear { c } => check_vec("params.c", c, n)?,
        }
        Ok(FunctionSpec { n, radius, kind, poly })
    }

    pub fn polynomial(n: usize, radius: f64, p: &Poly<Complex64>) -> Result<Self> {
        let terms = p
            .terms()
            .iter()
            .map(|(a, c)| PolyTerm {
                alpha: a.0.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        FunctionSpec::new(n, radius, FunctionKind::Polynomial(terms))
    }

    pub fn inverse_quadratic(n: usize, radius: f64, a: f64) -> Result<Self> {
        FunctionSpec::new(n, radius, FunctionKind::InverseQuadratic { a })
    }

    pub fn newton_kernel(radius: f64, y0: [f64; 3]) -> Result<Self> {
        FunctionSpec::new(3, radius, FunctionKind::NewtonKernel { y0: y0.to_vec() })
    }

    pub fn exp_linear(radius: f64, c: Vec<f64>) -> Result<Self> {
        FunctionSpec::new(c.len(), radius, FunctionKind::ExpLinear { c })
    }

    /// Parses JSON text; syntax errors keep serde's line/column.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FunctionKind::Polynomial(_) => "polynomial",
            FunctionKind::InverseQuadratic { .. } => "inverse_quadratic",
            FunctionKind::NewtonKernel { .. } => "newton_kernel",
            FunctionKind::ExpLinear { .. } => "exp_linear",
        }
    }

    pub fn as_polynomial(&self) -> Option<&Poly<Complex64>> {
        self.poly.as_ref()
    }

    /// Radius of the largest Lie ball on which the continuation is holomorphic.
    pub fn lie_radius(&self) -> f64 {
        match &self.kind {
            FunctionKind::Polynomial(_) | FunctionKind::ExpLinear { .. } => f64::INFINITY,
            FunctionKind::InverseQuadratic { a } => a.sqrt(),
            FunctionKind::NewtonKernel { y0 } => y0.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    /// The holomorphic continuation at a complex point.
    pub fn eval_complex(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        if z.len() != self.n {
            return Err(format!("point has {} coordinates, expected {}", z.len(), self.n));
        }
        let v = match &self.kind {
            FunctionKind::Polynomial(_) => self.poly.as_ref().expect("polynomial kind").eval_complex(z),
            FunctionKind::InverseQuadratic { a } => {
                let q: Complex64 = z.iter().map(|v| v * v).sum();
                let d = Complex64::new(*a, 0.0) - q;
                if d.norm() == 0.0 {
                    return Err("pole a = q(z) hit".into());
                }
                d.inv()
            }
            FunctionKind::NewtonKernel { y0 } => newton_continuation(y0, z)?,
            FunctionKind::ExpLinear { c } => z.iter().zip(c).map(|(v, ci)| v * ci).sum::<Complex64>().exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value {v}"))
        }
    }

    pub fn eval_real(&self, x: &[f64]) -> std::result::Result<Complex64, String> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval_complex(&z)
    }
}

/// `1/|x − y₀|` continued along `s ↦ s·z`: with `|sz − y₀|² = |y₀|² (1 − u₁ s)(1 − u₂ s)`
/// the value is `1/(|y₀| √(1−u₁) √(1−u₂))` on principal branches, valid while `|u_i| < 1`.
fn newton_continuation(y0: &[f64], z: &[Complex64]) -> std::result::Result<Complex64, String> {
    let r2: f64 = y0.iter().map(|v| v * v).sum();
    let a: Complex64 = z.iter().map(|v| v * v).sum();
    let b: Complex64 = z.iter().zip(y0).map(|(v, y)| v * y).sum::<Complex64>() * -2.0;
    // roots of r2 u² + b u + a = 0
    let disc = (b * b - a * (4.0 * r2)).sqrt();
    let (p, m) = (-b + disc, -b - disc);
    let big = if p.norm() >= m.norm() { p } else { m };
    let (u1, u2) = if big.norm() == 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        let u1 = big / (2.0 * r2);
        (u1, a / (u1 * r2))
    };
    if u1.norm() >= 1.0 || u2.norm() >= 1.0 {
        return Err(format!("point outside the holomorphy domain (|u| = {}, {})", u1.norm(), u2.norm()));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(((one - u1).sqrt() * (one - u2).sqrt() * r2.sqrt()).inv())
}
