//! Dimension-`n` Legendre polynomials `P_k^n` (normalised by `P_k^n(1) = 1`),
//! harmonic-space dimensions and sphere areas.

use std::f64::consts::PI;

use crate::error::{LieError, Result};

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(LieError::invalid("n", format!("dimension must be ≥ 2, got {n}")));
    }
    Ok(())
}

/// `P_k^n(x)` from `(k+n−2) P_{k+1} = (2k+n−2) x P_k − k P_{k−1}`.
///
/// For `n = 2` the recurrence reduces to the Chebyshev relation
/// `P_{k+1} = 2x P_k − P_{k−1}` (`k ≥ 1`). Arguments with `|x| > 1` are allowed.
pub fn legendre_nd(k: usize, n: usize, x: f64) -> Result<f64> {
    check_dim(n)?;
    Ok(*legendre_nd_all(k, n, x).last().expect("nonempty"))
}

/// `[P_0^n(x), …, P_kmax^n(x)]`. Panics for `n < 2`.
pub fn legendre_nd_all(kmax: usize, n: usize, x: f64) -> Vec<f64> {
    assert!(n >= 2);
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    out.push(x);
    let nf = n as f64;
    for k in 1..kmax {
        let kf = k as f64;
        let next = ((2.0 * kf + nf - 2.0) * x * out[k] - kf * out[k - 1]) / (kf + nf - 2.0);
        out.push(next);
    }
    out
}

/// `b^k P_k^n(a / b)` evaluated through the homogenised recurrence
/// `H_{k+1} = ((2k+n−2) a H_k − k b² H_{k−1}) / (k+n−2)`, `H_0 = 1`, `H_1 = a`.
///
/// At `b = 0` this gives `d_k a^k` with `d_k` the leading coefficient.
pub fn legendre_homogeneous(k: usize, n: usize, a: f64, b: f64) -> f64 {
    assert!(n >= 2);
    if k == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let (mut prev, mut cur) = (1.0, a);
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + nf - 2.0) * a * cur - jf * b * b * prev) / (jf + nf - 2.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients `[c_0, …, c_k]` of `P_k^n`, produced by running the
/// three-term recurrence on coefficient vectors.
pub fn legendre_coefficients(k: usize, n: usize) -> Result<Vec<f64>> {
    check_dim(n)?;
    let mut prev = vec![1.0];
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = vec![0.0, 1.0];
    let nf = n as f64;
    for j in 1..k {
        let jf = j as f64;
        let den = jf + nf - 2.0;
        let mut next = vec![0.0; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += (2.0 * jf + nf - 2.0) * c / den;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= jf * c / den;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Leading coefficient `d_k` of `P_k^n`.
pub fn legendre_leading_coeff(k: usize, n: usize) -> Result<f64> {
    Ok(*legendre_coefficients(k, n)?.last().expect("nonempty"))
}

/// `(x + √(x² − 1))^k`, the bound on `P_k^n(x)` for `x ≥ 1` that follows from
/// the Laplace integral representation.
pub fn legendre_upper(k: usize, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(LieError::invalid("x", format!("upper bound requires x ≥ 1, got {x}")));
    }
    Ok((x + (x * x - 1.0).sqrt()).powi(k as i32))
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `a_k`: dimension of the space of degree-`k` harmonic homogeneous polynomials in
/// `n` variables, `C(n+k−1, k) − C(n+k−3, k−2)`.
///
/// For `n = 2` this is `1, 2, 2, …`; the Gamma-function form of the same count
/// has a `Γ(0)` at `n = 2, k = 0`.
pub fn harmonic_dim(k: usize, n: usize) -> u64 {
    assert!(n >= 2, "harmonic_dim requires n ≥ 2");
    if n == 2 {
        return if k == 0 { 1 } else { 2 };
    }
    let (k, n) = (k as u64, n as u64);
    let total = binomial(n + k - 1, k);
    let lower = if k >= 2 { binomial(n + k - 3, k - 2) } else { 0 };
    (total - lower) as u64
}

/// `a_k` in floating point, valid far beyond the range where the integer count
/// fits in 64 bits (used for tail sums).
pub fn harmonic_dim_f64(k: usize, n: usize) -> f64 {
    assert!(n >= 2);
    if n == 2 {
        return if k == 0 { 1.0 } else { 2.0 };
    }
    if k == 0 {
        return 1.0;
    }
    // (2k+n−2)/(n−2) · C(k+n−3, k)
    let mut c = 1.0;
    for i in 1..=(n - 3) {
        c *= (k + i) as f64 / i as f64;
    }
    (2 * k + n - 2) as f64 / (n - 2) as f64 * c
}

/// `Γ(m / 2)` for a positive integer `m`, by the exact recursion from
/// `Γ(1/2) = √π` and `Γ(1) = 1`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "Γ(0) is undefined");
    let (mut g, mut x) = if m % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = m as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area `ω_{n−1} = 2π^{n/2} / Γ(n/2)` of the unit sphere `S^{n−1} ⊂ R^n`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n as u32)
}

/// `P_k^n(x)` together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegendreEval {
    pub k: usize,
    pub n: usize,
    pub value: f64,
}

impl LegendreEval {
    pub fn new(k: usize, n: usize, x: f64) -> Result<Self> {
        Ok(LegendreEval {
            k,
            n,
            value: legendre_nd(k, n, x)?,
        })
    }
}

/// `a_k` and `ω_{n−1}` for one `(n, k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereConstants {
    pub n: usize,
    pub a_k: u64,
    pub omega: f64,
}

impl SphereConstants {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SphereConstants {
            n,
            a_k: harmonic_dim(k, n),
            omega: sphere_area(n),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gegenbauer `C_k^λ(x)` from the explicit finite sum, independent of the recurrence.
    fn gegenbauer_sum(k: usize, lambda: f64, x: f64) -> f64 {
        gegenbauer_terms(k, lambda, x).sum()
    }

    fn gegenbauer_terms(k: usize, lambda: f64, x: f64) -> impl Iterator<Item = f64> {
        (0..=k / 2).map(move |i| {
            // (λ)_{k−i} / (i! (k−2i)!) (2x)^{k−2i} (−1)^i
            let mut poch = 1.0;
            for r in 0..(k - i) {
                poch *= lambda + r as f64;
            }
            let fact_i: f64 = (1..=i).map(|v| v as f64).product();
            let fact_k2i: f64 = (1..=(k - 2 * i)).map(|v| v as f64).product();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * poch / (fact_i * fact_k2i) * (2.0 * x).powi((k - 2 * i) as i32)
        })
    }

    fn oracle(k: usize, n: usize, x: f64) -> f64 {
        if n == 2 {
            return (k as f64 * x.acos()).cos();
        }
        let lambda = (n as f64 - 2.0) / 2.0;
        gegenbauer_sum(k, lambda, x) / gegenbauer_sum(k, lambda, 1.0)
    }

    #[test]
    fn low_degree_examples() {
        for n in 2..8 {
            assert_eq!(legendre_nd(0, n, 0.37).unwrap(), 1.0);
            assert_eq!(legendre_nd(1, n, -0.61).unwrap(), -0.61);
            assert_eq!(legendre_nd(1, n, 2.5).unwrap(), 2.5);
        }
        assert!((legendre_nd(2, 3, 0.5).unwrap() + 0.125).abs() < 1e-16);
        assert!(legendre_nd(3, 1, 0.5).is_err());
    }

    #[test]
    fn frozen_values_from_independent_evaluation() {
        // mpmath gegenbauer(k, (n−2)/2, x) / gegenbauer(k, (n−2)/2, 1); n = 2 via cos(k acos x)
        let cases = [
            (5, 4, 0.3, 0.16896),
            (7, 5, -0.8, 0.139708),
            (6, 2, 0.4, 0.782272),
        ];
        for (k, n, x, want) in cases {
            assert!((legendre_nd(k, n, x).unwrap() - want).abs() < 1e-14, "k={k} n={n}");
        }
    }

    #[test]
    fn matches_gegenbauer_ratio_and_chebyshev() {
        for n in 2..=8 {
            for k in 0..=20 {
                for i in 0..=40 {
                    let x = -1.0 + i as f64 / 20.0;
                    let a = legendre_nd(k, n, x).unwrap();
                    let b = oracle(k, n, x);
                    // the alternating sum loses digits when its terms cancel
                    let cond = if n == 2 { 1.0 } else {
                        let lam = (n as f64 - 2.0) / 2.0;
                        gegenbauer_terms(k, lam, x).map(f64::abs).sum::<f64>() / gegenbauer_sum(k, lam, 1.0)
                    };
                    assert!((a - b).abs() < 1e-13 * cond.max(1.0) * 100.0, "k={k} n={n} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn normalisation_and_bounds() {
        for n in 2..=8 {
            for k in 0..=40 {
                assert!((legendre_nd(k, n, 1.0).unwrap() - 1.0).abs() < 1e-12);
            }
            for k in 0..=30 {
                let vals: Vec<f64> = (0..=1000)
                    .map(|i| legendre_nd(k, n, -1.0 + 2.0 * i as f64 / 1000.0).unwrap())
                    .collect();
                assert!(vals.iter().all(|v| v.abs() <= 1.0 + 1e-12), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn laplace_representation_bound() {
        for n in 2..=8 {
            for k in 0..=30 {
                for i in 0..=200 {
                    let x = 1.0 + 2.0 * i as f64 / 200.0;
                    let p = legendre_nd(k, n, x).unwrap();
                    let u = legendre_upper(k, x).unwrap();
                    assert!(p <= u * (1.0 + 1e-12), "k={k} n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(legendre_upper(7, 1.0).unwrap(), 1.0);
        assert_eq!(legendre_upper(0, 4.2).unwrap(), 1.0);
        assert_eq!(legendre_upper(3, 1.25).unwrap(), 8.0);
        assert!(legendre_upper(2, 0.99).is_err());
    }

    #[test]
    fn parity() {
        for n in 2..=7 {
            for k in 0..=25 {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                for &x in &[0.1, 0.45, 0.93, 1.7] {
                    let a = legendre_nd(k, n, -x).unwrap();
                    let b = s * legendre_nd(k, n, x).unwrap();
                    assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn homogeneous_form_agrees() {
        for n in 2..=6 {
            for k in 0..=15 {
                let (a, b) = (1.3f64, 0.7f64);
                let direct = b.powi(k as i32) * legendre_nd(k, n, a / b).unwrap();
                let h = legendre_homogeneous(k, n, a, b);
                assert!((h - direct).abs() <= 1e-12 * direct.abs().max(1.0));
                let at_zero = legendre_homogeneous(k, n, a, 0.0);
                let d = legendre_leading_coeff(k, n).unwrap();
                assert!((at_zero - d * a.powi(k as i32)).abs() <= 1e-12 * at_zero.abs().max(1.0));
            }
        }
    }

    #[test]
    fn leading_coefficients() {
        // sympy: LC of gegenbauer(k, (n−2)/2, t)/gegenbauer(k, (n−2)/2, 1), chebyshevt for n = 2
        assert!((legendre_leading_coeff(4, 3).unwrap() - 35.0 / 8.0).abs() < 1e-14);
        assert!((legendre_leading_coeff(3, 4).unwrap() - 2.0).abs() < 1e-14);
        assert!((legendre_leading_coeff(5, 2).unwrap() - 16.0).abs() < 1e-14);
        assert!((legendre_leading_coeff(6, 5).unwrap() - 429.0 / 64.0).abs() < 1e-13);
        assert_eq!(legendre_leading_coeff(1, 3).unwrap(), 1.0);
        let c = legendre_coefficients(2, 3).unwrap();
        assert!((c[0] + 0.5).abs() < 1e-16 && c[1] == 0.0 && (c[2] - 1.5).abs() < 1e-16);
    }

    /// `(2k+n−2) Γ(k+n−2) / (Γ(k+1) Γ(n−1))` with integer factorials.
    fn gamma_formula(k: usize, n: usize) -> f64 {
        let fact = |m: usize| -> f64 { (1..=m).map(|v| v as f64).product() };
        ((2 * k + n - 2) as f64 * fact(k + n - 3) / (fact(k) * fact(n - 2))).round()
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(harmonic_dim(2, 3), 5);
        assert_eq!(harmonic_dim(2, 4), 9);
        assert_eq!(harmonic_dim(10, 5), 506);
        assert_eq!(harmonic_dim(30, 3), 61);
        for n in 2..=8 {
            assert_eq!(harmonic_dim(0, n), 1);
            assert_eq!(harmonic_dim(1, n), n as u64);
        }
        for n in 3..=8 {
            for k in 0..=18 {
                let g = gamma_formula(k, n);
                assert_eq!(harmonic_dim(k, n) as f64, g, "k={k} n={n}");
                assert!((harmonic_dim_f64(k, n) - g).abs() <= 1e-12 * g);
            }
        }
    }

    #[test]
    fn harmonic_dim_ratio_tends_to_one() {
        for n in 2..=8 {
            let mut prev = 0.0;
            for k in n..=60 {
                let r = harmonic_dim(k, n) as f64 / harmonic_dim(k + 1, n) as f64;
                assert!(r > 0.5 && r <= 1.0, "k={k} n={n} r={r}");
                assert!(r >= prev, "ratio must approach 1 monotonically");
                prev = r;
            }
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-14);
        // mpmath 2π^{n/2}/Γ(n/2)
        assert!((sphere_area(5) - 26.318945069571622983).abs() < 1e-13);
        assert!((sphere_area(8) - 32.469697011334145745).abs() < 1e-13);
        let c = SphereConstants::new(3, 4).unwrap();
        assert_eq!(c.a_k, 9);
        assert!(SphereConstants::new(1, 0).is_err());
    }
}
