use nalgebra::{DMatrix, DVector};
use releq::dynamics::{
    default_dt, growth_rate, hamiltonian, integrate, integrate_inertial, max_relative_deviation, period,
    vector_field, PhaseState,
};
use releq::linearization::build_linearization;
use releq::oracle::full_spectrum;
use releq::potentials::rotate;
use releq::{lagrange_triangle, Classification, MassVector, PotentialSpec, RelativeEquilibrium};

fn triangle(m: &[f64], spec: PotentialSpec, side: f64) -> RelativeEquilibrium {
    lagrange_triangle(&MassVector::new(m.to_vec()).unwrap(), &spec, side).unwrap()
}

fn newtonian_equal() -> RelativeEquilibrium {
    triangle(&[1.0; 3], PotentialSpec::homogeneous(1.0).unwrap(), 3f64.sqrt())
}

fn quasi_sample() -> RelativeEquilibrium {
    triangle(&[1.0, 0.3, 0.6], PotentialSpec::quasihomogeneous(3.0, 1.0).unwrap(), 2.5)
}

/// Spectrally stable triangles: a dominant mass, Newtonian and quasihomogeneous.
fn stable_samples() -> [RelativeEquilibrium; 2] {
    let samples = [
        triangle(&[1.0, 0.01, 0.01], PotentialSpec::homogeneous(1.0).unwrap(), 3f64.sqrt()),
        triangle(&[1.0, 0.01, 0.02], PotentialSpec::quasihomogeneous(3.0, 1.0).unwrap(), 10.0),
    ];
    for re in &samples {
        assert_eq!(full_spectrum(re).unwrap().classification, Classification::SpectrallyStable);
    }
    samples
}

/// Equilibrium shifted by a fixed, non-symmetric offset: positions by
/// about `eps`, velocities by about `w eps`.
fn perturbed(re: &RelativeEquilibrium, eps: f64) -> PhaseState {
    let mut s = PhaseState::equilibrium(re);
    let n = s.x.len();
    let m = re.masses().mass_diagonal();
    let w = re.omega_hat();
    s.x += DVector::from_fn(n, |i, _| eps * (i as f64 * 1.7).sin());
    s.y += DVector::from_fn(n, |i, _| eps * w * m[i] * (i as f64 * 0.9).cos());
    s
}

fn run(re: &RelativeEquilibrium, start: &PhaseState, dt: f64, steps: usize) -> PhaseState {
    let traj = integrate(start, re.masses(), re.spec(), re.omega_hat(), dt, steps).unwrap();
    assert!(traj.collision.is_none());
    traj.last().clone()
}

#[test]
fn equilibrium_stays_put_for_ten_periods() {
    for re in [newtonian_equal(), quasi_sample()] {
        let eq = PhaseState::equilibrium(&re);
        let dt = default_dt(re.omega_hat());
        let traj = integrate(&eq, re.masses(), re.spec(), re.omega_hat(), dt, 10_000).unwrap();
        let drift = traj.states.iter().map(|s| (&s.x - &eq.x).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-7 * re.side(), "drift {drift}");
    }
}

#[test]
fn hamiltonian_is_conserved() {
    for re in stable_samples() {
        let start = perturbed(&re, 1e-2 * re.side());
        let h0 = hamiltonian(&start, re.masses(), re.spec(), re.omega_hat()).unwrap();
        let traj = integrate(
            &start,
            re.masses(),
            re.spec(),
            re.omega_hat(),
            default_dt(re.omega_hat()),
            10_000,
        )
        .unwrap();
        let worst = traj
            .states
            .iter()
            .map(|s| (hamiltonian(s, re.masses(), re.spec(), re.omega_hat()).unwrap() - h0).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8 * h0.abs(), "relative drift {}", worst / h0.abs());
    }
}

#[test]
fn finite_difference_jacobian_matches_linearization() {
    for re in [newtonian_equal(), quasi_sample()] {
        let s = build_linearization(&re).unwrap().s;
        let eq = PhaseState::equilibrium(&re).phase_vector();
        let n = eq.len();
        let h = 1e-6 * re.side();
        let field = |z: &DVector<f64>| {
            let (dx, dy) = vector_field(&PhaseState::from_phase_vector(z, 0.0), re.masses(), re.spec(), re.omega_hat()).unwrap();
            PhaseState { x: dx, y: dy, t: 0.0 }.phase_vector()
        };
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut up = eq.clone();
            let mut down = eq.clone();
            up[j] += h;
            down[j] -= h;
            jac.set_column(j, &((field(&up) - field(&down)) / (2.0 * h)));
        }
        let err = (&jac - &s).amax();
        assert!(err <= 1e-6 * s.amax().max(1.0), "entrywise error {err}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    let [_, re] = stable_samples();
    let start = perturbed(&re, 5e-2 * re.side());
    let horizon = period(&re);
    let coarse = 200;
    let endpoint = |steps: usize| run(&re, &start, horizon / steps as f64, steps).phase_vector();
    let reference = endpoint(coarse * 16);
    let e1 = (endpoint(coarse) - &reference).norm();
    let e2 = (endpoint(coarse * 2) - &reference).norm();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn rotating_and_inertial_frames_agree() {
    for re in stable_samples() {
        let start = perturbed(&re, 1e-2 * re.side());
        let steps = 1000;
        let dt = period(&re) / steps as f64;
        let rot = integrate(&start, re.masses(), re.spec(), re.omega_hat(), dt, steps).unwrap();
        let inertial = integrate_inertial(&start, re.masses(), re.spec(), dt, steps).unwrap();
        let a = rot.last();
        let b = inertial.last();
        let theta = re.omega_hat() * b.t;
        let dx = (rotate(&b.x, theta) - &a.x).norm();
        let dy = (rotate(&b.y, theta) - &a.y).norm();
        assert!(dx < 1e-6 * re.side(), "position mismatch {dx}");
        assert!(dy < 1e-6 * a.y.norm(), "momentum mismatch {dy}");
    }
}

#[test]
fn growth_rate_matches_spectrum() {
    let re = newtonian_equal();
    let expected = full_spectrum(&re).unwrap().max_real_part;
    let horizon = 20.0 * period(&re);
    let fine = growth_rate(&re, 1e-8, horizon).unwrap();
    let coarse = growth_rate(&re, 1e-6, horizon).unwrap();
    assert!((fine / expected - 1.0).abs() < 0.05, "{fine} vs {expected}");
    assert!((coarse / fine - 1.0).abs() < 0.02, "{coarse} vs {fine}");
}

#[test]
fn stable_perturbation_stays_small() {
    let re = triangle(&[1.0, 1e-4, 1e-4], PotentialSpec::homogeneous(1.0).unwrap(), 3f64.sqrt());
    assert_eq!(full_spectrum(&re).unwrap().classification, Classification::SpectrallyStable);
    let ratio = max_relative_deviation(&re, 1e-8, 10.0 * period(&re)).unwrap();
    assert!(ratio < 100.0, "deviation grew by {ratio}");
}

#[test]
fn growth_rate_rejects_stable_equilibria() {
    let re = triangle(&[1.0, 1e-4, 1e-4], PotentialSpec::homogeneous(1.0).unwrap(), 3f64.sqrt());
    assert!(growth_rate(&re, 1e-8, period(&re)).is_err());
}
