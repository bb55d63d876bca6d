//! Geometry of `C^n` around the Lie ball
//! `{z : |z|² + √(|z|⁴ − |q(z)|²) < R²}` with `q(z) = z_1² + … + z_n²`.
//!
//! Points are stored as `z = ξ + iη` with real vectors `ξ`, `η`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LieError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexPoint {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        let p = ComplexPoint { re, im };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.re.is_empty() {
            return Err(LieError::invalid("re", "point must have at least one coordinate"));
        }
        if self.re.len() != self.im.len() {
            return Err(LieError::DimensionMismatch {
                expected: self.re.len(),
                got: self.im.len(),
            });
        }
        if self.re.iter().chain(&self.im).any(|v| !v.is_finite()) {
            return Err(LieError::invalid("re/im", "coordinates must be finite"));
        }
        Ok(())
    }

    pub fn real(x: &[f64]) -> Self {
        ComplexPoint {
            re: x.to_vec(),
            im: vec![0.0; x.len()],
        }
    }

    pub fn from_complex(z: &[Complex64]) -> Self {
        ComplexPoint {
            re: z.iter().map(|c| c.re).collect(),
            im: z.iter().map(|c| c.im).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|&v| v == 0.0)
    }

    /// `|z|² = |ξ|² + |η|²`.
    pub fn abs_sq(&self) -> f64 {
        dot(&self.re, &self.re) + dot(&self.im, &self.im)
    }

    /// `λ·z` for a complex scalar.
    pub fn scaled(&self, lambda: Complex64) -> ComplexPoint {
        let z: Vec<Complex64> = self.to_complex().into_iter().map(|c| c * lambda).collect();
        ComplexPoint::from_complex(&z)
    }

    pub fn geometry(&self) -> LieGeometry {
        LieGeometry {
            abs_sq: self.abs_sq(),
            q_value: q_of(self),
            lie_norm_sq: lie_norm_sq(self),
        }
    }
}

/// The three quantities that decide Lie-ball membership.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LieGeometry {
    pub abs_sq: f64,
    pub q_value: Complex64,
    pub lie_norm_sq: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `q(z) = |ξ|² − |η|² + 2i⟨ξ, η⟩`.
pub fn q_of(z: &ComplexPoint) -> Complex64 {
    Complex64::new(
        dot(&z.re, &z.re) - dot(&z.im, &z.im),
        2.0 * dot(&z.re, &z.im),
    )
}

/// `|z|² + √(|z|⁴ − |q(z)|²)`.
///
/// The radicand equals `4(|ξ|²|η|² − ⟨ξ,η⟩²) = 4 Σ_{i<j} (ξ_i η_j − ξ_j η_i)²`, which is
/// evaluated in that sum-of-squares form; it is nonnegative by construction and
/// accurate when `|q(z)|` is close to `|z|²`.
pub fn lie_norm_sq(z: &ComplexPoint) -> f64 {
    let abs_sq = z.abs_sq();
    let n = z.dim();
    let mut wedge = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = z.re[i] * z.im[j] - z.re[j] * z.im[i];
            wedge += w * w;
        }
    }
    let radicand = (4.0 * wedge).max(0.0);
    abs_sq + radicand.sqrt().min(abs_sq)
}

/// Strict membership `lie_norm_sq(z) < R²` in the open Lie ball.
pub fn in_lie_ball(z: &ComplexPoint, radius: f64) -> bool {
    lie_norm_sq(z) < radius * radius
}

/// Deterministic generator for a `(seed, stream)` pair; streams give
/// independent per-trial sequences regardless of evaluation order.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on `S^{n−1}`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `e^{it} R θ` for a unit vector `θ`.
pub fn shilov_point(radius: f64, t: f64, theta: &[f64]) -> ComplexPoint {
    let (s, c) = t.sin_cos();
    ComplexPoint {
        re: theta.iter().map(|&v| radius * c * v).collect(),
        im: theta.iter().map(|&v| radius * s * v).collect(),
    }
}

/// Pseudo-random point `e^{it} R θ` with `t` uniform on `[0, 2π)` and `θ`
/// uniform on `S^{n−1}`; such points satisfy `lie_norm_sq = R²`.
pub fn shilov_sample(n: usize, radius: f64, seed: u64) -> ComplexPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shilov_sample_with(n, radius, &mut rng)
}

pub fn shilov_sample_with<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> ComplexPoint {
    let t = rng.random::<f64>() * std::f64::consts::TAU;
    let theta = random_unit_vector(n, rng);
    shilov_point(radius, t, &theta)
}

/// Point of the open Lie ball of the given radius, by rejection from the
/// Euclidean ball of `C^n ≅ R^{2n}` (which contains the Lie ball).
pub fn sample_lie_ball<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> ComplexPoint {
    loop {
        let dir = random_unit_vector(2 * n, rng);
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / (2 * n) as f64);
        let z = ComplexPoint {
            re: dir[..n].iter().map(|v| v * r).collect(),
            im: dir[n..].iter().map(|v| v * r).collect(),
        };
        if in_lie_ball(&z, radius) {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn pt(re: &[f64], im: &[f64]) -> ComplexPoint {
        ComplexPoint::new(re.to_vec(), im.to_vec()).unwrap()
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_of(&pt(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0])), Complex64::new(0.0, 0.0));
        assert_eq!(q_of(&pt(&[1.0, 0.0], &[1.0, 0.0])), Complex64::new(0.0, 2.0));
        let x = pt(&[0.5, -1.5, 2.0], &[0.0; 3]);
        assert_eq!(q_of(&x), Complex64::new(0.25 + 2.25 + 4.0, 0.0));
    }

    #[test]
    fn lie_norm_examples() {
        assert_eq!(lie_norm_sq(&pt(&[0.0, 0.0], &[1.0, 0.0])), 1.0);
        assert_eq!(lie_norm_sq(&pt(&[1.0, 0.0], &[0.0, 1.0])), 4.0);
        let x = pt(&[0.3, 0.4, -1.2], &[0.0; 3]);
        assert_eq!(lie_norm_sq(&x), x.abs_sq());
    }

    #[test]
    fn membership_examples() {
        assert!(!in_lie_ball(&pt(&[1.0, 0.0], &[0.0, 1.0]), 2.0));
        assert!(in_lie_ball(&pt(&[0.0; 3], &[0.0; 3]), 1e-3));
        let z = pt(&[0.0, 0.0], &[0.9, 0.0]);
        assert!((lie_norm_sq(&z) - 0.81).abs() < 1e-15);
        assert!(in_lie_ball(&z, 1.0));
    }

    #[test]
    fn validation_errors() {
        assert!(ComplexPoint::new(vec![1.0], vec![]).is_err());
        assert!(ComplexPoint::new(vec![], vec![]).is_err());
        assert!(ComplexPoint::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn shilov_samples_lie_on_the_lie_sphere() {
        for seed in 0..50 {
            let z = shilov_sample(2, 1.0, seed);
            assert!((lie_norm_sq(&z) - 1.0).abs() < 1e-12);
            let z = shilov_sample(5, 2.5, seed);
            assert!((lie_norm_sq(&z) / 6.25 - 1.0).abs() < 1e-12);
        }
        let z = shilov_point(2.0, 0.0, &[0.6, 0.8, 0.0]);
        assert!(z.is_real());
        assert!((z.abs_sq() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn shilov_sample_is_reproducible() {
        let a = shilov_sample(3, 2.0, 7);
        let b = shilov_sample(3, 2.0, 7);
        assert_eq!(a, b);
        assert_ne!(a, shilov_sample(3, 2.0, 8));
    }

    #[test]
    fn q_bounded_by_abs_sq_on_many_points() {
        for n in 2..=6 {
            let mut rng = seeded_rng(11, n as u64);
            for _ in 0..10_000 {
                let scale = 10f64.powf(rng.random_range(-3.0..3.0));
                let re: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
                let im: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
                let z = pt(&re, &im);
                let a = z.abs_sq();
                assert!(q_of(&z).norm() <= a * (1.0 + 8.0 * f64::EPSILON));
                let l = lie_norm_sq(&z);
                assert!(a <= l && l <= 2.0 * a);
            }
        }
    }

    #[test]
    fn ball_sampler_stays_inside() {
        let mut rng = seeded_rng(3, 0);
        for _ in 0..2000 {
            let z = sample_lie_ball(4, 1.5, &mut rng);
            assert!(in_lie_ball(&z, 1.5));
        }
    }

    fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        // Gram-Schmidt on a Gaussian matrix.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        while rows.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for r in &rows {
                let d = dot(&v, r);
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi -= d * ri;
                }
            }
            let nv = dot(&v, &v).sqrt();
            if nv > 1e-8 {
                rows.push(v.into_iter().map(|x| x / nv).collect());
            }
        }
        rows
    }

    fn apply(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        m.iter().map(|r| dot(r, v)).collect()
    }

    proptest! {
        #[test]
        fn lie_norm_invariances(seed in 0u64..10_000, n in 2usize..6, t in 0.0f64..6.3, lam in 0.1f64..3.0) {
            let mut rng = seeded_rng(seed, 1);
            let re: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let im: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z = pt(&re, &im);
            let base = lie_norm_sq(&z);
            let rot = random_rotation(n, &mut rng);
            let zr = pt(&apply(&rot, &re), &apply(&rot, &im));
            prop_assert!((lie_norm_sq(&zr) - base).abs() <= 1e-12 * base.max(1e-300));
            let zp = z.scaled(Complex64::from_polar(1.0, t));
            prop_assert!((lie_norm_sq(&zp) - base).abs() <= 1e-12 * base);
            let zs = z.scaled(Complex64::new(lam, 0.0));
            prop_assert!((lie_norm_sq(&zs) - lam * lam * base).abs() <= 1e-12 * lam * lam * base);
        }

        #[test]
        fn real_membership_is_euclidean(x in proptest::collection::vec(-2.0f64..2.0, 1..6), r in 0.1f64..3.0) {
            let z = ComplexPoint::real(&x);
            let e: f64 = x.iter().map(|v| v * v).sum();
            prop_assert_eq!(in_lie_ball(&z, r), e < r * r);
        }
    }
}
