use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use releq::eigen;
use releq::equilibria::scaled_lagrange_triangle;
use releq::linearization::{
    build_linearization, configuration_eigenvalue, configuration_factor, invariant_subspaces, remaining_factor,
    translation_factor, triangle_reduced_matrix,
};
use releq::oracle::full_spectrum;
use releq::{lagrange_triangle, MassVector, PotentialSpec, RelativeEquilibrium};

fn masses() -> impl Strategy<Value = MassVector> {
    prop::collection::vec(-3.0..0.0f64, 3).prop_map(|e| MassVector::new(e.iter().map(|x| 10f64.powf(*x)).collect()).unwrap())
}

/// Homogeneous or quasihomogeneous potential together with a side length.
fn spec_and_side() -> impl Strategy<Value = (PotentialSpec, f64)> {
    prop_oneof![
        (0.05..3.0f64).prop_map(|a| (PotentialSpec::homogeneous(a).unwrap(), 3f64.sqrt())),
        (0.05..4.0f64, 0.05..0.95f64, -1.0..1.0f64).prop_map(|(a, s, e)| {
            (PotentialSpec::quasihomogeneous(a, s * a).unwrap(), 10f64.powf(e))
        }),
    ]
}

fn triangle(m: &MassVector, s: &PotentialSpec, side: f64) -> RelativeEquilibrium {
    lagrange_triangle(m, s, side).unwrap()
}

/// Greedy nearest matching; returns the largest matched distance.
fn set_distance(xs: &[Complex64], ys: &[Complex64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut pool = ys.to_vec();
    let mut worst: f64 = 0.0;
    for x in xs {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(i);
    }
    worst
}

fn real(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[test]
fn angular_velocity_closed_form() {
    let m = MassVector::new(vec![0.3, 1.2, 2.0]).unwrap();
    let total = m.total();
    for (a, b, r0) in [(3.0, 1.0, 0.5), (1.5, 0.4, 2.0), (0.3, 0.1, 7.0)] {
        let re = triangle(&m, &PotentialSpec::quasihomogeneous(a, b).unwrap(), r0);
        let w = re.omegas();
        assert_relative_eq!(w.omega1_sq, a * total / r0.powf(a + 2.0), max_relative = 1e-12);
        assert_relative_eq!(w.omega2_sq, b * total / r0.powf(b + 2.0), max_relative = 1e-12);
        assert_relative_eq!(w.omega_sq, w.omega1_sq + w.omega2_sq, max_relative = 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_matrix_spectrum_is_the_union_of_factors(m in masses(), (s, side) in spec_and_side()) {
        let re = triangle(&m, &s, side);
        let c = triangle_reduced_matrix(&re).unwrap();
        let q = remaining_factor(&re).unwrap();
        let mut expected = vec![0.0, 0.0, -1.0, configuration_eigenvalue(&re)];
        let [e1, e2] = q.restriction_eigenvalues();
        prop_assert!(e1.im.abs() < 1e-9 && e2.im.abs() < 1e-9);
        expected.extend([e1.re, e2.re]);
        let got = c.eigenvalues();
        let scale = got.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        prop_assert!(set_distance(&real(&got), &real(&expected)) <= 1e-9 * scale, "{got:?} vs {expected:?}");
    }

    #[test]
    fn stability_roots_are_the_union_of_factor_roots(m in masses(), (s, side) in spec_and_side()) {
        let re = triangle(&m, &s, side);
        let report = full_spectrum(&re).unwrap();
        let mut expected = Vec::new();
        for q in [translation_factor(), configuration_factor(&re), remaining_factor(&re).unwrap()] {
            expected.extend(q.roots());
        }
        let scale = expected.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        let d = set_distance(&report.z_roots, &expected);
        prop_assert!(d <= 1e-7 * scale, "distance {d}: {:?} vs {expected:?}", report.z_roots);
    }

    #[test]
    fn invariant_subspaces_are_m_orthonormal(m in masses(), (s, side) in spec_and_side()) {
        let re = triangle(&m, &s, side);
        let sub = invariant_subspaces(&re);
        let basis = sub.basis();
        prop_assert_eq!(basis.len(), 6);
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((sub.inner(u, v) - expected).abs() <= 1e-12);
            }
        }
        // The complement is invariant: its restriction reproduces the remaining factor.
        let r = sub.restricted_complement(&re).unwrap();
        let q = remaining_factor(&re).unwrap();
        prop_assert!((2.0 - r.trace() - q.alpha).abs() <= 1e-9 * q.alpha.abs().max(1.0));
    }

    #[test]
    fn characteristic_polynomial_is_even(m in masses(), (s, side) in spec_and_side()) {
        let lin = build_linearization(&triangle(&m, &s, side)).unwrap();
        prop_assert!(lin.odd_coefficient_defect().unwrap() <= 1e-8);
    }

    #[test]
    fn spectrum_is_closed_under_negation_and_conjugation(m in masses(), (s, side) in spec_and_side()) {
        let mu = full_spectrum(&triangle(&m, &s, side)).unwrap().resolved;
        let neg: Vec<Complex64> = mu.iter().map(|z| -z).collect();
        let conj: Vec<Complex64> = mu.iter().map(|z| z.conj()).collect();
        let scale = mu.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        prop_assert!(set_distance(&mu, &neg) <= 1e-9 * scale);
        prop_assert!(set_distance(&mu, &conj) <= 1e-9 * scale);
    }

    #[test]
    fn eigenpairs_have_small_residuals(m in masses(), (s, side) in spec_and_side()) {
        // Defective eigenvalues are only resolved as cluster means.
        let re = triangle(&m, &s, side);
        let lin = build_linearization(&re).unwrap();
        let norm = lin.s.norm();
        let resolved = full_spectrum(&re).unwrap().resolved;
        for lambda in resolved.iter().map(|mu| mu * lin.omega_hat) {
            let v = eigen::eigenvector(&lin.s, lambda).unwrap();
            let r = eigen::eigen_residual(&lin.s, lambda, &v);
            prop_assert!(r <= 1e-8 * norm * v.norm(), "residual {r} at {lambda}");
        }
    }

    #[test]
    fn homogeneous_spectrum_scale_covariance(m in masses(), a in 0.05..3.0f64, k in 0.2..5.0f64) {
        let s = PotentialSpec::homogeneous(a).unwrap();
        let base = scaled_lagrange_triangle(&m, &s, 3f64.sqrt()).unwrap();
        let big = scaled_lagrange_triangle(&m, &s, k * 3f64.sqrt()).unwrap();
        prop_assert!((big.omega_hat() / base.omega_hat() - k.powf(-(a + 2.0) / 2.0)).abs() <= 1e-12);
        let r0 = full_spectrum(&base).unwrap();
        let r1 = full_spectrum(&big).unwrap();
        prop_assert!(set_distance(&r0.resolved, &r1.resolved) <= 1e-9);
        prop_assert_eq!(r0.classification, r1.classification);
        let scaled: Vec<Complex64> = r0.resolved.iter().map(|mu| mu * big.omega_hat()).collect();
        let lambda1: Vec<Complex64> = r1.resolved.iter().map(|mu| mu * big.omega_hat()).collect();
        prop_assert!(set_distance(&scaled, &lambda1) <= 1e-9 * big.omega_hat());
    }

    #[test]
    fn normalized_spectrum_ignores_mass_units(m in masses(), (s, side) in spec_and_side(), k in 0.1..10.0f64) {
        let scaled = MassVector::new(m.as_slice().iter().map(|x| x * k).collect()).unwrap();
        let r0 = full_spectrum(&triangle(&m, &s, side)).unwrap();
        let r1 = full_spectrum(&triangle(&scaled, &s, side)).unwrap();
        prop_assert!(set_distance(&r0.resolved, &r1.resolved) <= 1e-9);
        prop_assert_eq!(r0.classification, r1.classification);
    }
}
