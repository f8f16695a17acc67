use nalgebra::DVector;
use proptest::prelude::*;
use releq::potentials::{
    gradient, hessian, homogeneous_energy, homogeneous_gradient, homogeneous_hessian, potential_energy, rotate,
};
use releq::{MassVector, PlanarConfiguration, PotentialSpec};

/// Bodies spread over `[-2, 2]^2` with no pair closer than 0.3.
fn config_and_masses() -> impl Strategy<Value = (PlanarConfiguration, MassVector)> {
    (3usize..=5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-2.0..2.0f64, 2 * n),
                prop::collection::vec(0.05..3.0f64, n),
            )
        })
        .prop_filter_map("bodies too close", |(x, m)| {
            let c = PlanarConfiguration::new(DVector::from_vec(x)).ok()?;
            let n = c.n_bodies();
            for j in 0..n {
                for k in j + 1..n {
                    if c.distance(j, k) < 0.3 {
                        return None;
                    }
                }
            }
            Some((c, MassVector::new(m).unwrap()))
        })
}

fn spec() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        (0.1..4.0f64).prop_map(|a| PotentialSpec::homogeneous(a).unwrap()),
        (0.1..4.0f64, 0.05..0.95f64).prop_map(|(a, s)| PotentialSpec::quasihomogeneous(a, s * a).unwrap()),
    ]
}

fn shifted(c: &PlanarConfiguration, i: usize, h: f64) -> PlanarConfiguration {
    let mut x = c.coords().clone();
    x[i] += h;
    PlanarConfiguration::new(x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_central_differences((c, m) in config_and_masses(), s in spec()) {
        let g = gradient(&c, &m, &s).unwrap();
        let h = 1e-5;
        let fd = DVector::from_fn(g.len(), |i, _| {
            let up = potential_energy(&shifted(&c, i, h), &m, &s).unwrap();
            let down = potential_energy(&shifted(&c, i, -h), &m, &s).unwrap();
            (up - down) / (2.0 * h)
        });
        prop_assert!((&fd - &g).norm() <= 1e-6 * g.norm().max(1.0), "fd {fd} vs {g}");
    }

    #[test]
    fn hessian_matches_differenced_gradient((c, m) in config_and_masses(), s in spec()) {
        let hess = hessian(&c, &m, &s).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..hess.ncols() {
            let col = (gradient(&shifted(&c, i, h), &m, &s).unwrap()
                - gradient(&shifted(&c, i, -h), &m, &s).unwrap())
                / (2.0 * h);
            worst = worst.max((col - hess.column(i)).norm());
        }
        prop_assert!(worst <= 1e-6 * hess.norm().max(1.0), "column error {worst}");
    }

    #[test]
    fn hessian_is_symmetric_with_translation_kernel((c, m) in config_and_masses(), s in spec()) {
        let h = hessian(&c, &m, &s).unwrap();
        prop_assert!((&h - h.transpose()).amax() <= 1e-12 * h.amax());
        let n2 = h.nrows();
        let ex = DVector::from_fn(n2, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
        let ey = DVector::from_fn(n2, |i, _| if i % 2 == 1 { 1.0 } else { 0.0 });
        prop_assert!((&h * ex).norm() <= 1e-12 * h.norm());
        prop_assert!((&h * ey).norm() <= 1e-12 * h.norm());
    }

    #[test]
    fn rotation_equivariance((c, m) in config_and_masses(), s in spec(), theta in -3.2..3.2f64) {
        let rc = PlanarConfiguration::new(rotate(c.coords(), theta)).unwrap();
        let u = potential_energy(&c, &m, &s).unwrap();
        let ur = potential_energy(&rc, &m, &s).unwrap();
        prop_assert!((u - ur).abs() <= 1e-12 * u);
        let g = gradient(&c, &m, &s).unwrap();
        let gr = gradient(&rc, &m, &s).unwrap();
        prop_assert!((rotate(&g, theta) - gr).norm() <= 1e-12 * g.norm().max(1e-300) * 10.0);
    }

    #[test]
    fn quasihomogeneous_is_sum_of_parts((c, m) in config_and_masses(), a in 0.2..4.0f64, frac in 0.05..0.95f64) {
        let b = frac * a;
        let s = PotentialSpec::quasihomogeneous(a, b).unwrap();
        let u = potential_energy(&c, &m, &s).unwrap();
        let parts = homogeneous_energy(&c, &m, a).unwrap() + homogeneous_energy(&c, &m, b).unwrap();
        prop_assert!((u - parts).abs() <= 1e-14 * u);
        let g = gradient(&c, &m, &s).unwrap();
        let gp = homogeneous_gradient(&c, &m, a).unwrap() + homogeneous_gradient(&c, &m, b).unwrap();
        prop_assert!((&g - &gp).norm() <= 1e-13 * gp.norm());
        let h = hessian(&c, &m, &s).unwrap();
        let hp = homogeneous_hessian(&c, &m, a).unwrap() + homogeneous_hessian(&c, &m, b).unwrap();
        prop_assert!((h - &hp).norm() <= 1e-13 * hp.norm());
    }

    #[test]
    fn homogeneity_degree((c, m) in config_and_masses(), a in 0.2..4.0f64, k in 0.2..5.0f64) {
        let scaled = PlanarConfiguration::new(c.coords() * k).unwrap();
        let u = homogeneous_energy(&c, &m, a).unwrap();
        let uk = homogeneous_energy(&scaled, &m, a).unwrap();
        prop_assert!((uk - k.powf(-a) * u).abs() <= 1e-12 * uk);
        // Euler: x . grad V = -a V
        let g = homogeneous_gradient(&c, &m, a).unwrap();
        prop_assert!((c.coords().dot(&g) + a * u).abs() <= 1e-12 * a * u);
    }
}
