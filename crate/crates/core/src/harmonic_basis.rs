//! Orthonormal bases `Y_{k,l}` of harmonic homogeneous polynomials in `n` variables.
//!
//! The basis is the Gegenbauer chain: for `x = (x_1, x')`,
//!
//! ```text
//! Y(x) = A_{m,j} · |x|^m C_m^{λ}(x_1/|x|) · Y'(x'),   m = k − j,  λ = j + (n−2)/2,
//! ```
//!
//! where `Y'` runs over the degree-`j` basis in the `n − 1` trailing variables and
//! the two-variable base case is `Re/Im (x_1 + i x_2)^j / √π`. The homogenised
//! Gegenbauer factor is a polynomial in `x_1` and `|x|²`, so every member is a
//! polynomial with rational coefficients times a scalar normaliser.
//!
//! Two representations are kept in sync:
//! * [`HarmonicPoly`]: sparse monomial map, used for exact algebra and exports;
//! * [`HarmonicSystem`]: three-term recurrences, used wherever numerical accuracy
//!   matters (monomial sums cancel badly beyond degree ~15).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::complex_geometry::{q_of, ComplexPoint};
use crate::error::{LieError, Result};
use crate::poly::{Coeff, MultiIndex, Poly};
use crate::special_functions::{
    gamma_half, harmonic_dim, legendre_leading_coeff, legendre_nd, sphere_area,
};

/// Largest degree accepted by [`build_basis`].
pub const MAX_BASIS_DEGREE: usize = 40;
/// Largest dimension accepted by [`build_basis`].
pub const MAX_BASIS_DIM: usize = 8;
/// Budget on `a_k × (number of degree-k monomials)` for monomial-form bases.
pub const MAX_BASIS_TERMS: u128 = 20_000_000;

/// Homogeneous harmonic polynomial of degree `k` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicPoly {
    k: usize,
    poly: Poly<f64>,
}

impl HarmonicPoly {
    /// Wraps a polynomial after checking homogeneity; harmonicity is left to
    /// [`HarmonicPoly::laplacian_residual`].
    pub fn new(k: usize, poly: Poly<f64>) -> Result<Self> {
        if let Some(bad) = poly.terms().keys().find(|a| a.degree() as usize != k) {
            return Err(LieError::NotStructured {
                what: "homogeneous",
                detail: format!("term {bad} has degree {} ≠ {k}", bad.degree()),
            });
        }
        Ok(HarmonicPoly { k, poly })
    }

    pub fn n(&self) -> usize {
        self.poly.dim()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn poly(&self) -> &Poly<f64> {
        &self.poly
    }

    pub fn terms(&self) -> &std::collections::BTreeMap<MultiIndex, f64> {
        self.poly.terms()
    }

    /// Largest Laplacian coefficient relative to the largest coefficient.
    pub fn laplacian_residual(&self) -> f64 {
        let scale = self.poly.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        self.poly.laplacian().max_abs_coeff() / scale
    }
}

/// Position of a basis member in the Gegenbauer chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLabel {
    /// Degrees in `n, n−1, …, 2` variables; `degrees[0] = k`.
    pub degrees: Vec<u32>,
    /// `0` for the cosine-type (or constant) member of the two-variable level, `1` for sine-type.
    pub trig: u8,
}

/// The `a_k` members of one orthonormal basis of degree-`k` harmonics in `n` variables.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    n: usize,
    k: usize,
    members: Vec<HarmonicPoly>,
    labels: Vec<ChainLabel>,
    system: Arc<HarmonicSystem>,
}

impl HarmonicBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn members(&self) -> &[HarmonicPoly] {
        &self.members
    }

    pub fn labels(&self) -> &[ChainLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// All member values at `z` through the recurrence evaluator.
    pub fn eval_all(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.system.eval_degree(self.k, z)
    }

    pub fn eval_all_real(&self, x: &[f64]) -> Vec<f64> {
        self.system.eval_degree(self.k, x)
    }
}

// ---------------------------------------------------------------------------
// Sphere moments

/// Rational factor `Π_i (α_i − 1)!! / Π_{j<|α|/2} (n + 2j)` with
/// `∫_{S^{n−1}} x^α dθ = ω_{n−1} · factor`; zero when some `α_i` is odd.
pub fn sphere_moment_factor<C: Coeff>(alpha: &MultiIndex) -> C {
    if !alpha.all_even() {
        return C::zero();
    }
    let n = alpha.dim() as i64;
    let mut num: Vec<i64> = Vec::new();
    for &a in &alpha.0 {
        num.extend((1..a as i64).step_by(2));
    }
    let half = alpha.degree() as i64 / 2;
    let mut acc = C::one();
    for (j, f) in (0..half).zip(num) {
        acc = acc * C::from_ratio(f, n + 2 * j);
    }
    acc
}

/// `∫_{S^{n−1}} x^α dθ`.
pub fn monomial_sphere_integral(alpha: &MultiIndex, n: usize) -> f64 {
    assert_eq!(alpha.dim(), n, "multi-index length must equal n");
    if !alpha.all_even() {
        return 0.0;
    }
    sphere_area(n) * sphere_moment_factor::<f64>(alpha)
}

/// `⟨p, g⟩_{S^{n−1}}` for real polynomials, from exact monomial moments.
pub fn sphere_inner_product(p: &Poly<f64>, g: &Poly<f64>) -> f64 {
    let n = p.dim();
    let mut s = 0.0;
    for (a, c) in p.terms() {
        for (b, d) in g.terms() {
            let ab = a.plus(b);
            if ab.all_even() {
                s += c * d * sphere_moment_factor::<f64>(&ab);
            }
        }
    }
    s * sphere_area(n)
}

/// `⟨p, g⟩_{S^{n−1}} / ω_{n−1}` in exact arithmetic.
pub fn sphere_inner_product_factor<C: Coeff>(p: &Poly<C>, g: &Poly<C>) -> C {
    let mut s = C::zero();
    for (a, c) in p.terms() {
        for (b, d) in g.terms() {
            let ab = a.plus(b);
            if ab.all_even() {
                s = s + c.clone() * d.clone() * sphere_moment_factor::<C>(&ab);
            }
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Harmonic projection and Fischer decomposition

/// Harmonic projection of a homogeneous polynomial of degree `m`:
/// `Σ_j c_j |x|^{2j} Δ^j p` with `c_j = (−1)^j / (2^j j! Π_{i=1}^{j} (n + 2m − 2 − 2i))`.
pub fn harmonic_projection<C: Coeff>(p: &Poly<C>) -> Result<Poly<C>> {
    if p.is_zero() {
        return Ok(p.clone());
    }
    let m = p.homogeneous_degree().ok_or_else(|| LieError::NotStructured {
        what: "homogeneous",
        detail: "harmonic projection needs a homogeneous polynomial".into(),
    })? as i64;
    let n = p.dim() as i64;
    let mut out = p.clone();
    let mut lap = p.clone();
    let mut c = C::one();
    for j in 1..=(m / 2) {
        lap = lap.laplacian();
        if lap.is_zero() {
            break;
        }
        c = c * C::from_ratio(-1, 2 * j * (n + 2 * m - 2 - 2 * j));
        let term = &Poly::norm_sq_power(p.dim(), j as u32) * &lap.scale(&c);
        out = &out + &term;
    }
    Ok(out)
}

/// Fischer decomposition `p = Σ_i |x|^{2i} h_{d−2i}` of a homogeneous polynomial
/// of degree `d`; entry `i` of the result is the harmonic `h_{d−2i}`.
pub fn fischer_decomposition<C: Coeff>(p: &Poly<C>, d: u32) -> Result<Vec<Poly<C>>> {
    let n = p.dim() as i64;
    let mut out = Vec::new();
    let mut lap = p.clone();
    for i in 0..=(d / 2) {
        if i > 0 {
            lap = lap.laplacian();
        }
        if lap.is_zero() {
            out.push(Poly::zero(p.dim()));
            continue;
        }
        let proj = harmonic_projection(&lap)?;
        // Δ^i (|x|^{2i} h) = Π_{t=1}^{i} 2t (n + 2(d−2i) + 2t − 2) · h
        let mut c = C::one();
        let k = d as i64 - 2 * i as i64;
        for t in 1..=(i as i64) {
            c = c * C::from_ratio(1, 2 * t * (n + 2 * k + 2 * t - 2));
        }
        out.push(proj.scale(&c));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Normalisation constants

/// `‖C_m^λ‖² = π 2^{1−2λ} Γ(m+2λ) / (m! (m+λ) Γ(λ)²)` for the weight `(1−t²)^{λ−1/2}`,
/// with `two_lambda = 2λ` a positive integer.
fn gegenbauer_norm_sq(m: usize, two_lambda: usize) -> f64 {
    let lambda = two_lambda as f64 / 2.0;
    // Γ(m+2λ)/m! = Π_{i=m+1}^{m+2λ−1} i
    let mut ratio = 1.0;
    for i in (m + 1)..(m + two_lambda) {
        ratio *= i as f64;
    }
    let g = gamma_half(two_lambda as u32);
    PI * 2f64.powi(1 - two_lambda as i32) * ratio / ((m as f64 + lambda) * g * g)
}

/// Normaliser of the Gegenbauer factor at level `d` (variables), sub-degree `j`, order `m`.
fn chain_norm(d: usize, j: usize, m: usize) -> f64 {
    1.0 / gegenbauer_norm_sq(m, 2 * j + d - 2).sqrt()
}

fn base_norm(j: usize) -> f64 {
    if j == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else {
        1.0 / PI.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Recurrence evaluator

/// Scalars the recurrence evaluator runs on (real points for quadrature,
/// complex points for the continuation).
pub trait EvalScalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Send
    + Sync
{
}

impl EvalScalar for f64 {}
impl EvalScalar for Complex64 {}

/// Evaluates every basis member of every degree `k ≤ kmax` at a point.
#[derive(Clone, Debug)]
pub struct HarmonicSystem {
    n: usize,
    kmax: usize,
    /// `norms[d][j][m]` for `3 ≤ d ≤ n`, `j + m ≤ kmax`.
    norms: Vec<Vec<Vec<f64>>>,
}

impl HarmonicSystem {
    pub fn new(n: usize, kmax: usize) -> Result<Self> {
        if n < 2 {
            return Err(LieError::invalid("n", format!("dimension must be ≥ 2, got {n}")));
        }
        let mut norms = vec![Vec::new(); n + 1];
        for (d, table) in norms.iter_mut().enumerate().skip(3) {
            *table = (0..=kmax)
                .map(|j| (0..=(kmax - j)).map(|m| chain_norm(d, j, m)).collect())
                .collect();
        }
        Ok(HarmonicSystem { n, kmax, norms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Member count per degree.
    pub fn dims(&self) -> Vec<usize> {
        (0..=self.kmax).map(|k| harmonic_dim(k, self.n) as usize).collect()
    }

    /// `values[k][l] = Y_{k,l}(z)` for all `k ≤ kmax`.
    pub fn eval_all<T: EvalScalar>(&self, z: &[T]) -> Vec<Vec<T>> {
        assert_eq!(z.len(), self.n, "point dimension must match the basis");
        self.eval_level(self.n, z, self.kmax)
    }

    pub fn eval_degree<T: EvalScalar>(&self, k: usize, z: &[T]) -> Vec<T> {
        assert!(k <= self.kmax);
        assert_eq!(z.len(), self.n, "point dimension must match the basis");
        self.eval_level(self.n, z, k).swap_remove(k)
    }

    fn eval_level<T: EvalScalar>(&self, d: usize, w: &[T], kmax: usize) -> Vec<Vec<T>> {
        if d == 2 {
            let (x, y) = (w[0], w[1]);
            let mut out = Vec::with_capacity(kmax + 1);
            out.push(vec![T::one() * base_norm(0)]);
            let (mut c, mut s) = (T::one(), T::zero());
            let nb = base_norm(1);
            for _ in 1..=kmax {
                // Re/Im of (x + iy)^j, continued polynomially to complex x, y
                let c2 = x * c - y * s;
                let s2 = y * c + x * s;
                c = c2;
                s = s2;
                out.push(vec![c * nb, s * nb]);
            }
            return out;
        }
        let sub = self.eval_level(d - 1, &w[1..], kmax);
        let x1 = w[0];
        let s = w.iter().fold(T::zero(), |acc, &v| acc + v * v);
        // gegen[j][m] = |x|^m C_m^{λ_j}(x_1/|x|), λ_j = j + (d−2)/2
        let gegen: Vec<Vec<T>> = (0..=kmax)
            .map(|j| {
                let lam = j as f64 + (d as f64 - 2.0) / 2.0;
                let len = kmax - j + 1;
                let mut q = Vec::with_capacity(len);
                q.push(T::one());
                if len > 1 {
                    q.push(x1 * (2.0 * lam));
                }
                for m in 1..(len.saturating_sub(1)) {
                    let mf = m as f64;
                    let next = (x1 * q[m] * (2.0 * (mf + lam)) - s * q[m - 1] * (mf + 2.0 * lam - 1.0))
                        * (1.0 / (mf + 1.0));
                    q.push(next);
                }
                q
            })
            .collect();
        let norms = &self.norms[d];
        (0..=kmax)
            .map(|k| {
                let mut vals = Vec::new();
                for j in 0..=k {
                    let m = k - j;
                    let f = gegen[j][m] * norms[j][m];
                    vals.extend(sub[j].iter().map(|&v| f * v));
                }
                vals
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Monomial construction

struct ChainBuilder<C: Coeff> {
    norm_powers: HashMap<(usize, u32), Poly<C>>,
    levels: HashMap<(usize, usize), Arc<Vec<(Poly<C>, f64, ChainLabel)>>>,
}

impl<C: Coeff> ChainBuilder<C> {
    fn new() -> Self {
        ChainBuilder {
            norm_powers: HashMap::new(),
            levels: HashMap::new(),
        }
    }

    fn norm_power(&mut self, d: usize, i: u32) -> Poly<C> {
        self.norm_powers
            .entry((d, i))
            .or_insert_with(|| Poly::norm_sq_power(d, i))
            .clone()
    }

    /// `|x|^m C_m^λ(x_1/|x|) = Σ_i (−1)^i (λ)_{m−i} / (i! (m−2i)!) 2^{m−2i} x_1^{m−2i} |x|^{2i}`
    /// in `d` variables, `two_lambda = 2λ`.
    fn gegenbauer_poly(&mut self, d: usize, m: usize, two_lambda: i64) -> Poly<C> {
        let mut out = Poly::zero(d);
        for i in 0..=(m / 2) {
            let mut c = C::one();
            for r in 0..(m - i) as i64 {
                c = c * C::from_ratio(two_lambda + 2 * r, 2);
            }
            for f in 1..=i as i64 {
                c = c * C::from_ratio(1, f);
            }
            for f in 1..=(m - 2 * i) as i64 {
                c = c * C::from_ratio(2, f);
            }
            if i % 2 == 1 {
                c = -c;
            }
            let x1 = Poly::monomial(MultiIndex::unit(d, 0, (m - 2 * i) as u32), c);
            let term = &x1 * &self.norm_power(d, i as u32);
            out = &out + &term;
        }
        out
    }

    /// Members of degree `k` in `d` variables: `(rational part, scale, label)` with
    /// `Y = scale · rational part`.
    fn level(&mut self, d: usize, k: usize) -> Arc<Vec<(Poly<C>, f64, ChainLabel)>> {
        if let Some(v) = self.levels.get(&(d, k)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if d == 2 {
            if k == 0 {
                out.push((
                    Poly::constant(2, C::one()),
                    base_norm(0),
                    ChainLabel {
                        degrees: vec![0],
                        trig: 0,
                    },
                ));
            } else {
                // Re/Im (x + iy)^k = Σ_s C(k, s) x^{k−s} (iy)^s
                let mut re = Poly::zero(2);
                let mut im = Poly::zero(2);
                let mut binom = C::one();
                for s in 0..=k {
                    if s > 0 {
                        binom = binom * C::from_ratio((k - s + 1) as i64, s as i64);
                    }
                    let alpha = MultiIndex(vec![(k - s) as u32, s as u32]);
                    let c = if (s / 2) % 2 == 0 { binom.clone() } else { -binom.clone() };
                    if s % 2 == 0 {
                        re.add_term(alpha, c);
                    } else {
                        im.add_term(alpha, c);
                    }
                }
                let label = |trig| ChainLabel {
                    degrees: vec![k as u32],
                    trig,
                };
                out.push((re, base_norm(k), label(0)));
                out.push((im, base_norm(k), label(1)));
            }
        } else {
            for j in 0..=k {
                let m = k - j;
                let g = self.gegenbauer_poly(d, m, (2 * j + d - 2) as i64);
                let a = chain_norm(d, j, m);
                let sub = self.level(d - 1, j);
                for (p, scale, label) in sub.iter() {
                    let lifted = p.embed(d, 1);
                    let mut degrees = vec![k as u32];
                    degrees.extend(&label.degrees);
                    out.push((
                        &g * &lifted,
                        a * scale,
                        ChainLabel {
                            degrees,
                            trig: label.trig,
                        },
                    ));
                }
            }
        }
        let out = Arc::new(out);
        self.levels.insert((d, k), out.clone());
        out
    }
}

fn check_caps(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(LieError::invalid("n", format!("dimension must be ≥ 2, got {n}")));
    }
    if k > MAX_BASIS_DEGREE {
        return Err(LieError::ResourceCap {
            cap: format!("basis degree k ≤ {MAX_BASIS_DEGREE}"),
            requested: format!("k = {k}"),
        });
    }
    if n > MAX_BASIS_DIM {
        return Err(LieError::ResourceCap {
            cap: format!("basis dimension n ≤ {MAX_BASIS_DIM}"),
            requested: format!("n = {n}"),
        });
    }
    let monomials = {
        let mut c: u128 = 1;
        for i in 0..(n as u128 - 1) {
            c = c * (k as u128 + n as u128 - 1 - i) / (i + 1);
        }
        c
    };
    let work = harmonic_dim(k, n) as u128 * monomials;
    if work > MAX_BASIS_TERMS {
        return Err(LieError::ResourceCap {
            cap: format!("a_k × monomial count ≤ {MAX_BASIS_TERMS}"),
            requested: format!("{work} for n = {n}, k = {k}"),
        });
    }
    Ok(())
}

/// Monomial form of the chain basis in exact rational arithmetic:
/// each member is `scale × (rational polynomial)`.
pub fn build_basis_rational(n: usize, k: usize) -> Result<Vec<(Poly<BigRational>, f64, ChainLabel)>> {
    check_caps(n, k)?;
    let mut b = ChainBuilder::<BigRational>::new();
    Ok(b.level(n, k).as_ref().clone())
}

fn basis_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<HarmonicBasis>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<HarmonicBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Orthonormal basis of degree-`k` harmonics in `n` variables (cached, deterministic).
pub fn build_basis(n: usize, k: usize) -> Result<Arc<HarmonicBasis>> {
    check_caps(n, k)?;
    if let Some(b) = basis_cache().lock().expect("basis cache").get(&(n, k)) {
        return Ok(b.clone());
    }
    let mut builder = ChainBuilder::<f64>::new();
    let level = builder.level(n, k);
    let mut members = Vec::with_capacity(level.len());
    let mut labels = Vec::with_capacity(level.len());
    for (p, scale, label) in level.iter() {
        members.push(HarmonicPoly::new(k, p.scale(scale))?);
        labels.push(label.clone());
    }
    debug_assert_eq!(members.len() as u64, harmonic_dim(k, n));
    let basis = Arc::new(HarmonicBasis {
        n,
        k,
        members,
        labels,
        system: Arc::new(HarmonicSystem::new(n, k)?),
    });
    basis_cache()
        .lock()
        .expect("basis cache")
        .insert((n, k), basis.clone());
    Ok(basis)
}

// ---------------------------------------------------------------------------
// Evaluation and addition-theorem identities

/// `p(z) = Σ_α c_α z^α` in complex arithmetic.
pub fn eval_complex(p: &HarmonicPoly, z: &ComplexPoint) -> Result<Complex64> {
    if p.n() != z.dim() {
        return Err(LieError::DimensionMismatch {
            expected: p.n(),
            got: z.dim(),
        });
    }
    Ok(p.poly().eval_complex(&z.to_complex()))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `|Σ_l Y_{k,l}(x) Y_{k,l}(y) − |x|^k |y|^k (a_k/ω_{n−1}) P_k^n(⟨x/|x|, y/|y|⟩)|`.
pub fn addition_residual(n: usize, k: usize, x: &ComplexPoint, y: &ComplexPoint) -> Result<f64> {
    for (name, p) in [("x", x), ("y", y)] {
        if p.dim() != n {
            return Err(LieError::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
        if !p.is_real() {
            return Err(LieError::invalid(name, "addition theorem needs a real point"));
        }
    }
    let (nx, ny) = (norm(&x.re), norm(&y.re));
    if nx == 0.0 || ny == 0.0 {
        return Err(LieError::invalid("x/y", "addition theorem needs nonzero points"));
    }
    let sys = HarmonicSystem::new(n, k)?;
    let yx = sys.eval_degree(k, &x.re);
    let yy = sys.eval_degree(k, &y.re);
    let lhs: f64 = yx.iter().zip(&yy).map(|(a, b)| a * b).sum();
    let cos = (x.re.iter().zip(&y.re).map(|(a, b)| a * b).sum::<f64>() / (nx * ny)).clamp(-1.0, 1.0);
    let rhs = (nx * ny).powi(k as i32) * harmonic_dim(k, n) as f64 / sphere_area(n)
        * legendre_nd(k, n, cos)?;
    Ok((lhs - rhs).abs())
}

/// `Σ_l |Y_{k,l}(z)|²` by direct evaluation of the basis.
pub fn norm_sum_complex(n: usize, k: usize, z: &ComplexPoint) -> Result<f64> {
    if z.dim() != n {
        return Err(LieError::DimensionMismatch {
            expected: n,
            got: z.dim(),
        });
    }
    let sys = HarmonicSystem::new(n, k)?;
    Ok(sys
        .eval_degree(k, &z.to_complex())
        .iter()
        .map(|v| v.norm_sqr())
        .sum())
}

/// Threshold `|q(z)| ≤ Q_ZERO_REL · |z|²` under which the `q = 0` form is used.
pub const Q_ZERO_REL: f64 = 1e-8;

/// Closed form of `Σ_l |Y_{k,l}(z)|²`:
/// `(a_k/ω) |q|^k P_k^n(|z|²/|q|)` for `|q(z)| > 0`, and `(a_k/ω) d_k |z|^{2k}` for `q(z) = 0`.
pub fn norm_sum_closed_form(n: usize, k: usize, z: &ComplexPoint) -> Result<f64> {
    let abs_sq = z.abs_sq();
    let q = q_of(z).norm();
    let c = harmonic_dim(k, n) as f64 / sphere_area(n);
    if q <= Q_ZERO_REL * abs_sq || abs_sq == 0.0 {
        Ok(c * legendre_leading_coeff(k, n)? * abs_sq.powi(k as i32))
    } else {
        Ok(c * q.powi(k as i32) * legendre_nd(k, n, abs_sq / q)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_geometry::{random_unit_vector, seeded_rng};
    use crate::poly::{rational_from_f64, rational_to_f64};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn monomial_integrals() {
        let i = |a: &[u32]| monomial_sphere_integral(&MultiIndex(a.to_vec()), a.len());
        assert!((i(&[0, 0, 0]) - 4.0 * PI).abs() < 1e-14);
        assert!((i(&[2, 0, 0]) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert_eq!(i(&[1, 1]), 0.0);
        // mpmath: 2 Π Γ((α_i+1)/2) / Γ((|α|+n)/2)
        assert!((i(&[2, 4, 2]) - 0.03989324004558467604).abs() < 1e-16);
        assert!((i(&[4, 2, 0, 2]) - 0.03084251375340424568).abs() < 1e-16);
    }

    #[test]
    fn monomial_integral_matches_gamma_form() {
        let mut rng = seeded_rng(5, 0);
        for n in 2..=6 {
            for _ in 0..50 {
                let alpha = MultiIndex((0..n).map(|_| 2 * rng.random_range(0..5u32)).collect());
                let mut num = 2.0;
                for &a in &alpha.0 {
                    num *= gamma_half(a + 1);
                }
                let g = num / gamma_half(alpha.degree() + n as u32);
                let v = monomial_sphere_integral(&alpha, n);
                assert!((v - g).abs() <= 1e-13 * g, "{alpha}");
            }
        }
    }

    #[test]
    fn projection_is_harmonic_and_idempotent() {
        let mut rng = seeded_rng(17, 0);
        for n in 2..=5 {
            for m in 0..=7u32 {
                let terms: Vec<(MultiIndex, BigRational)> = MultiIndex::all_of_degree(n, m)
                    .into_iter()
                    .map(|a| (a, BigRational::from_ratio(rng.random_range(-9..10), rng.random_range(1..5))))
                    .collect();
                let p = Poly::from_terms(n, terms);
                let h = harmonic_projection(&p).unwrap();
                assert!(h.laplacian().is_zero());
                assert_eq!(harmonic_projection(&h).unwrap(), h);
            }
        }
    }

    #[test]
    fn fischer_decomposition_reassembles() {
        let mut rng = seeded_rng(23, 0);
        for n in 2..=4 {
            for d in 0..=6u32 {
                let terms: Vec<(MultiIndex, BigRational)> = MultiIndex::all_of_degree(n, d)
                    .into_iter()
                    .map(|a| (a, BigRational::from_ratio(rng.random_range(-5..6), 1)))
                    .collect();
                let p = Poly::from_terms(n, terms);
                let parts = fischer_decomposition(&p, d).unwrap();
                let mut sum = Poly::zero(n);
                for (i, h) in parts.iter().enumerate() {
                    assert!(h.laplacian().is_zero());
                    sum = &sum + &(&Poly::norm_sq_power(n, i as u32) * h);
                }
                assert_eq!(sum, p, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn basis_sizes_and_examples() {
        let b = build_basis(2, 1).unwrap();
        assert_eq!(b.len(), 2);
        let s = 1.0 / PI.sqrt();
        assert!((b.members()[0].poly().coeff(&MultiIndex(vec![1, 0])) - s).abs() < 1e-16);
        assert!((b.members()[1].poly().coeff(&MultiIndex(vec![0, 1])) - s).abs() < 1e-16);

        let b = build_basis(3, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.members()[0].poly().coeff(&MultiIndex(vec![0, 0, 0])) - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-16);

        for (n, k) in [(3, 2), (4, 3), (5, 4), (2, 7), (6, 2)] {
            assert_eq!(build_basis(n, k).unwrap().len() as u64, harmonic_dim(k, n));
        }
    }

    #[test]
    fn rational_members_are_exactly_harmonic_and_orthogonal() {
        for (n, k) in [(2, 5), (3, 2), (3, 6), (4, 4), (5, 3)] {
            let members = build_basis_rational(n, k).unwrap();
            assert_eq!(members.len() as u64, harmonic_dim(k, n));
            let omega = sphere_area(n);
            for (i, (p, scale, _)) in members.iter().enumerate() {
                assert!(p.laplacian().is_zero(), "n={n} k={k} member {i}");
                for (j, (g, _, _)) in members.iter().enumerate().skip(i + 1) {
                    assert!(sphere_inner_product_factor(p, g).is_zero(), "members {i},{j}");
                }
                let nrm = rational_to_f64(&sphere_inner_product_factor(p, p)) * omega * scale * scale;
                assert!((nrm - 1.0).abs() < 1e-14, "n={n} k={k} member {i}: {nrm}");
            }
        }
    }

    #[test]
    fn float_gram_is_identity() {
        for (n, k) in [(2, 6), (3, 5), (4, 4), (5, 3), (3, 10)] {
            let b = build_basis(n, k).unwrap();
            for (i, p) in b.members().iter().enumerate() {
                assert!(p.laplacian_residual() < 1e-12);
                for (j, g) in b.members().iter().enumerate() {
                    let v = sphere_inner_product(p.poly(), g.poly());
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-10, "n={n} k={k} ({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn recurrence_matches_monomial_form() {
        let mut rng = seeded_rng(2, 0);
        for (n, k) in [(2, 9), (3, 8), (4, 6), (5, 5)] {
            let b = build_basis(n, k).unwrap();
            for _ in 0..20 {
                let z: Vec<Complex64> = (0..n)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let fast = b.eval_all(&z);
                for (p, v) in b.members().iter().zip(&fast) {
                    let direct = p.poly().eval_complex(&z);
                    let scale = p.poly().modulus_bound(&z).max(1e-300);
                    assert!((direct - v).norm() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        for n in 2..=5 {
            let b = build_basis(n, 0).unwrap();
            let z = ComplexPoint::new(vec![0.3; n], vec![-1.1; n]).unwrap();
            let v = eval_complex(&b.members()[0], &z).unwrap();
            assert!((v - c(1.0 / sphere_area(n).sqrt(), 0.0)).norm() < 1e-15);
        }
        let b = build_basis(2, 1).unwrap();
        let z = ComplexPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let v = eval_complex(&b.members()[0], &z).unwrap();
        assert!((v - c(0.0, 1.0 / PI.sqrt())).norm() < 1e-16);
        assert!(eval_complex(&b.members()[0], &ComplexPoint::real(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn homogeneity_under_complex_scaling() {
        let mut rng = seeded_rng(8, 0);
        let b = build_basis(3, 4).unwrap();
        let z: Vec<Complex64> = (0..3).map(|_| c(rng.random(), rng.random())).collect();
        let lam = c(0.7, -0.4);
        let zl: Vec<Complex64> = z.iter().map(|v| v * lam).collect();
        for p in b.members() {
            let a = p.poly().eval_complex(&zl);
            let e = p.poly().eval_complex(&z) * lam.powi(4);
            assert!((a - e).norm() < 1e-13);
        }
    }

    #[test]
    fn real_evaluation_agrees_to_few_ulps() {
        let b = build_basis(4, 3).unwrap();
        let x = [0.2, -0.7, 0.4, 0.9];
        let zc = ComplexPoint::real(&x);
        for p in b.members() {
            let r = p.poly().eval_real(&x);
            let v = eval_complex(p, &zc).unwrap();
            assert_eq!(v.im, 0.0);
            assert!((v.re - r).abs() <= 4.0 * f64::EPSILON * p.poly().modulus_bound(&zc.to_complex()));
        }
    }

    #[test]
    fn addition_theorem_examples() {
        let mut rng = seeded_rng(31, 0);
        for n in 2..=5 {
            for k in 0..=10 {
                let th = random_unit_vector(n, &mut rng);
                let p = ComplexPoint::real(&th);
                assert!(addition_residual(n, k, &p, &p).unwrap() < 1e-10);
                let x = ComplexPoint::real(&random_unit_vector(n, &mut rng).iter().map(|v| v * 0.7).collect::<Vec<_>>());
                let y = ComplexPoint::real(&random_unit_vector(n, &mut rng).iter().map(|v| v * 0.4).collect::<Vec<_>>());
                assert!(addition_residual(n, k, &x, &y).unwrap() < 1e-10);
            }
        }
        let zero = ComplexPoint::real(&[0.0, 0.0, 0.0]);
        let one = ComplexPoint::real(&[1.0, 0.0, 0.0]);
        assert!(addition_residual(3, 2, &zero, &one).is_err());
        assert_eq!(addition_residual(3, 0, &one, &one).unwrap(), 0.0);
    }

    #[test]
    fn norm_sum_examples() {
        // explicit degree-1 basis √(3/4π) x_i: Σ |z_i|² · 3/(4π) at z = (1, i, 0)
        let z = ComplexPoint::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
        let v = norm_sum_complex(3, 1, &z).unwrap();
        assert!((v - 3.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((norm_sum_closed_form(3, 1, &z).unwrap() - v).abs() < 1e-15);
        for n in 2..=5 {
            let w = ComplexPoint::new(vec![0.4; n], vec![-0.3; n]).unwrap();
            assert!((norm_sum_complex(n, 0, &w).unwrap() - 1.0 / sphere_area(n)).abs() < 1e-15);
            let th = ComplexPoint::real(&{
                let mut v = vec![0.0; n];
                v[n - 1] = 1.0;
                v
            });
            for k in 0..6 {
                let a = harmonic_dim(k, n) as f64 / sphere_area(n);
                assert!((norm_sum_complex(n, k, &th).unwrap() - a).abs() < 1e-12 * a);
            }
        }
    }

    #[test]
    fn norm_sum_is_basis_independent() {
        let mut rng = seeded_rng(41, 0);
        for (n, k) in [(3, 4), (4, 3)] {
            let b = build_basis(n, k).unwrap();
            let m = b.len();
            // random orthogonal recombination by Gram-Schmidt
            let mut q: Vec<Vec<f64>> = Vec::new();
            while q.len() < m {
                let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                for r in &q {
                    let d: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(r).for_each(|(a, b)| *a -= d * b);
                }
                let nv = norm(&v);
                q.push(v.into_iter().map(|x| x / nv).collect());
            }
            for _ in 0..10 {
                let z: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                let vals = b.eval_all(&z);
                let base: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
                let rotated: f64 = q
                    .iter()
                    .map(|row| row.iter().zip(&vals).map(|(a, v)| v * *a).sum::<Complex64>().norm_sqr())
                    .sum();
                assert!((rotated - base).abs() < 1e-10 * base);
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        match build_basis(3, 41) {
            Err(LieError::ResourceCap { cap, .. }) => assert!(cap.contains("40")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(build_basis(9, 2), Err(LieError::ResourceCap { .. })));
        assert!(matches!(build_basis(8, 40), Err(LieError::ResourceCap { .. })));
    }

    #[test]
    fn basis_is_deterministic() {
        let a = build_basis_rational(3, 4).unwrap();
        let b = build_basis_rational(3, 4).unwrap();
        for ((p, s, l), (q, t, m)) in a.iter().zip(&b) {
            assert_eq!(p, q);
            assert_eq!(s.to_bits(), t.to_bits());
            assert_eq!(l, m);
        }
        let f = build_basis(3, 4).unwrap();
        for ((p, s, _), member) in a.iter().zip(f.members()) {
            for (alpha, v) in member.terms() {
                let exact = rational_to_f64(&(p.coeff(alpha) * rational_from_f64(*s)));
                assert!((exact - v).abs() <= 4.0 * f64::EPSILON * v.abs());
            }
        }
    }
}
