use lieball::complex_geometry::{lie_norm_sq, q_of, sample_lie_ball, seeded_rng, ComplexPoint};
use lieball::harmonic_basis::fischer_decomposition;
use lieball::holo_continuation::evaluate;
use lieball::lf_transform::{expand, structural_check, FunctionSpec, LFExpansion};
use lieball::poly::{rational_from_f64, MultiIndex, Poly};
use lieball::special_functions::{harmonic_dim, legendre_nd};
use lieball::sphere_integration::build_rule;
use lieball::verification::taylor_parts;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = ComplexPoint> {
    (prop::collection::vec(-2.0f64..2.0, n), prop::collection::vec(-2.0f64..2.0, n))
        .prop_map(|(re, im)| ComplexPoint::new(re, im).unwrap())
}

/// Sparse polynomial with small integer exponents and coefficients in [-1, 1].
fn poly(n: usize, max_deg: u32) -> impl Strategy<Value = Poly<Complex64>> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, n), -1.0f64..1.0, -1.0f64..1.0),
        1..6,
    )
    .prop_map(move |terms| {
        Poly::from_terms(
            n,
            terms.into_iter().filter(|(a, _, _)| a.iter().sum::<u32>() <= max_deg).map(|(a, re, im)| (MultiIndex(a), Complex64::new(re, im))),
        )
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lie_norm_lies_between_euclidean_bounds(z in (2usize..6).prop_flat_map(point)) {
        let l = lie_norm_sq(&z);
        let e = z.abs_sq();
        prop_assert!(l >= e * (1.0 - 1e-12));
        prop_assert!(l <= 2.0 * e * (1.0 + 1e-12));
    }

    #[test]
    fn lie_norm_is_absolutely_homogeneous(z in point(3), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let lambda = Complex64::new(re, im);
        let scaled = z.scaled(lambda);
        let lhs = lie_norm_sq(&scaled);
        let rhs = lambda.norm_sqr() * lie_norm_sq(&z);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
        let q = q_of(&scaled) - lambda * lambda * q_of(&z);
        prop_assert!(q.norm() <= 1e-10 * (1.0 + lambda.norm_sqr() * z.abs_sq()));
    }

    #[test]
    fn shilov_rotations_keep_real_norm(x in prop::collection::vec(-2.0f64..2.0, 4), t in 0.0f64..6.3) {
        let z = ComplexPoint::real(&x).scaled(Complex64::from_polar(1.0, t));
        let r2: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((lie_norm_sq(&z) - r2).abs() <= 1e-12 * (1.0 + r2));
    }

    #[test]
    fn legendre_is_bounded_on_the_interval(k in 0usize..30, n in 2usize..9, x in -1.0f64..=1.0) {
        let p = legendre_nd(k, n, x).unwrap();
        prop_assert!(p.abs() <= 1.0 + 1e-12);
        prop_assert!((legendre_nd(k, n, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_dimensions_fill_homogeneous_space(k in 0usize..25, n in 2usize..8) {
        // dim P_k = Σ_j a_{k-2j}
        let total: u64 = (0..=k / 2).map(|j| harmonic_dim(k - 2 * j, n)).sum();
        prop_assert_eq!(total, binomial((n + k - 1) as u64, k as u64));
    }

    #[test]
    fn fischer_parts_are_harmonic_and_reassemble(
        d in 0u32..7,
        coeffs in prop::collection::vec(-9i64..10, 28),
    ) {
        let n = 3;
        let p: Poly<BigRational> = Poly::from_terms(
            n,
            MultiIndex::all_of_degree(n, d)
                .into_iter()
                .zip(coeffs.iter().cycle())
                .map(|(a, &c)| (a, BigRational::from_integer(BigInt::from(c)))),
        );
        let parts = fischer_decomposition(&p, d).unwrap();
        let mut sum = Poly::zero(n);
        for (i, h) in parts.iter().enumerate() {
            prop_assert!(h.laplacian().is_zero());
            sum = &sum + &(&Poly::norm_sq_power(n, i as u32) * h);
        }
        prop_assert_eq!(sum, p);
    }

    #[test]
    fn quadrature_is_linear_and_integrates_powers_of_the_radius(
        n in 2usize..5,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        m in 0u32..5,
    ) {
        let rule = build_rule(n, 12).unwrap();
        let f = |x: &[f64]| x[0] * x[0] * x[1].powi(2) + x[0];
        let g = |x: &[f64]| x.iter().map(|v| v.powi(4)).sum::<f64>();
        let lhs = rule.integrate(|x| a * f(x) + b * g(x));
        let rhs = a * rule.integrate(f) + b * rule.integrate(g);
        prop_assert!((lhs - rhs).abs() < 1e-11);
        let area = rule.integrate(|_| 1.0);
        let rp = Poly::<f64>::norm_sq_power(n, m);
        prop_assert!((rule.integrate_poly(&rp) - area).abs() < 1e-11 * area);
    }

    #[test]
    fn taylor_parts_partition_any_polynomial(p in poly(3, 6)) {
        let parts = taylor_parts(&p);
        let mut sum = Poly::zero(3);
        for (d, part) in &parts {
            prop_assert_eq!(part.homogeneous_degree(), Some(*d));
            sum = &sum + part;
        }
        prop_assert_eq!(sum, p);
    }

    #[test]
    fn rational_conversion_is_exact(x in -1e6f64..1e6) {
        let r = rational_from_f64(x);
        prop_assert_eq!(lieball::poly::rational_to_f64(&r), x);
        prop_assert!(x != 0.0 || r.is_zero());
    }
}

fn pipeline(p: &Poly<Complex64>) -> LFExpansion {
    let f = FunctionSpec::polynomial(p.dim(), 1.0, p).unwrap();
    let k = p.degree().unwrap_or(0) as usize;
    expand(&f, k, 4, 8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expansion_reproduces_polynomials_on_the_ball(p in poly(3, 6), x in prop::collection::vec(-0.57f64..0.57, 3)) {
        let exp = pipeline(&p);
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let direct = p.eval_complex(&z);
        let got = exp.eval_real(&x);
        prop_assert!((got - direct).norm() <= 1e-12 * (1.0 + p.modulus_bound(&z)));
        prop_assert!(structural_check(&exp).passed());
    }

    #[test]
    fn continuation_matches_polynomials_in_the_lie_ball(p in poly(3, 6), seed in 0u64..1000) {
        let exp = pipeline(&p);
        let mut rng = seeded_rng(seed, 0);
        for _ in 0..8 {
            let z = sample_lie_ball(3, 1.0, &mut rng);
            let zc = z.to_complex();
            let got = evaluate(&exp, &z, None).unwrap().value;
            prop_assert!((got - p.eval_complex(&zc)).norm() <= 1e-11 * (1.0 + p.modulus_bound(&zc)));
        }
    }

    #[test]
    fn expansion_documents_round_trip(p in poly(2, 5), x in prop::collection::vec(-0.7f64..0.7, 2)) {
        let exp = pipeline(&p);
        let text = serde_json::to_string(&exp.to_document()).unwrap();
        let back = LFExpansion::from_document(serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back.eval_real(&x), exp.eval_real(&x));
    }
}
