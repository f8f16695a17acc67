//! Nonlinear flow in the frame rotating with the equilibrium:
//! `x' = w J x + M^-1 y`, `y' = grad U(x) + w J y`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::eigen;
use crate::equilibria::RelativeEquilibrium;
use crate::error::{Error, Result};
use crate::stability::Classification;
use crate::linearization::{build_linearization, invariant_subspaces};
use crate::oracle;
use crate::potentials::{apply_j, gradient, potential_energy, MassVector, PlanarConfiguration, PotentialSpec};

/// Time steps per rotation period used by [`default_dt`].
pub const STEPS_PER_PERIOD: f64 = 1000.0;

/// Deviations above this fraction of the size end the growth fit.
pub const LINEAR_WINDOW: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    /// Positions in the rotating frame.
    pub x: DVector<f64>,
    /// Momenta in the rotating frame.
    pub y: DVector<f64>,
    pub t: f64,
}

impl PhaseState {
    /// The equilibrium point `(x*, -w M J x*)`.
    pub fn equilibrium(re: &RelativeEquilibrium) -> Self {
        Self {
            x: re.config().coords().clone(),
            y: re.equilibrium_momenta(),
            t: 0.0,
        }
    }

    /// `(x, y)` stacked into one `4n` vector.
    pub fn phase_vector(&self) -> DVector<f64> {
        let n = self.x.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.x[i] } else { self.y[i - n] })
    }

    pub fn from_phase_vector(z: &DVector<f64>, t: f64) -> Self {
        let n = z.len() / 2;
        Self {
            x: z.rows(0, n).into_owned(),
            y: z.rows(n, n).into_owned(),
            t,
        }
    }
}

/// `2 pi / (w * 1000)`.
pub fn default_dt(omega_hat: f64) -> f64 {
    2.0 * PI / omega_hat.abs() / STEPS_PER_PERIOD
}

fn force(x: &DVector<f64>, masses: &MassVector, spec: &PotentialSpec) -> Result<DVector<f64>> {
    let config = PlanarConfiguration::new(x.clone())?;
    gradient(&config, masses, spec)
}

/// Time derivative `(x', y')` of the rotating-frame equations.
pub fn vector_field(
    state: &PhaseState,
    masses: &MassVector,
    spec: &PotentialSpec,
    omega_hat: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let minv = masses.mass_diagonal().map(|m| 1.0 / m);
    let dx = apply_j(&state.x) * omega_hat + minv.component_mul(&state.y);
    let dy = force(&state.x, masses, spec)? + apply_j(&state.y) * omega_hat;
    Ok((dx, dy))
}

/// `H = y^T M^-1 y / 2 - U(x) - w x^T J y`.
pub fn hamiltonian(state: &PhaseState, masses: &MassVector, spec: &PotentialSpec, omega_hat: f64) -> Result<f64> {
    let config = PlanarConfiguration::new(state.x.clone())?;
    let minv = masses.mass_diagonal().map(|m| 1.0 / m);
    let kinetic = 0.5 * state.y.component_mul(&minv).dot(&state.y);
    Ok(kinetic - potential_energy(&config, masses, spec)? - omega_hat * state.x.dot(&apply_j(&state.y)))
}

/// Inertial-frame equations `q' = M^-1 p`, `p' = grad U(q)`.
pub fn inertial_vector_field(
    state: &PhaseState,
    masses: &MassVector,
    spec: &PotentialSpec,
) -> Result<(DVector<f64>, DVector<f64>)> {
    vector_field(state, masses, spec, 0.0)
}

/// Two bodies met during integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    /// Index of the step that could not be completed.
    pub step: usize,
    pub j: usize,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `steps + 1` states unless a collision cut the run short.
    pub states: Vec<PhaseState>,
    pub collision: Option<CollisionEvent>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("a trajectory holds its initial state")
    }
}

fn rk4<F>(initial: &PhaseState, dt: f64, steps: usize, mut field: F) -> Result<Trajectory>
where
    F: FnMut(&PhaseState) -> Result<(DVector<f64>, DVector<f64>)>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial.clone());
    let mut deriv = |s: &PhaseState| -> Result<DVector<f64>> {
        let (dx, dy) = field(s)?;
        Ok(PhaseState { x: dx, y: dy, t: 0.0 }.phase_vector())
    };
    let mut z = initial.phase_vector();
    let mut t = initial.t;
    for step in 0..steps {
        let stage = |z: DVector<f64>, t: f64| PhaseState::from_phase_vector(&z, t);
        let result = (|| -> Result<DVector<f64>> {
            let k1 = deriv(&stage(z.clone(), t))?;
            let k2 = deriv(&stage(&z + &k1 * (0.5 * dt), t + 0.5 * dt))?;
            let k3 = deriv(&stage(&z + &k2 * (0.5 * dt), t + 0.5 * dt))?;
            let k4 = deriv(&stage(&z + &k3 * dt, t + dt))?;
            Ok(&z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
        })();
        let next = match result {
            Ok(next) => next,
            Err(Error::Collision { j, k, .. }) => {
                return Ok(Trajectory {
                    states,
                    collision: Some(CollisionEvent { step, j, k }),
                })
            }
            Err(Error::InvalidConfiguration(_)) => return Err(Error::NonFinite { step }),
            Err(e) => return Err(e),
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        z = next;
        t = initial.t + (step + 1) as f64 * dt;
        states.push(PhaseState::from_phase_vector(&z, t));
    }
    Ok(Trajectory {
        states,
        collision: None,
    })
}

/// Fixed-step classical Runge-Kutta in the rotating frame.
pub fn integrate(
    initial: &PhaseState,
    masses: &MassVector,
    spec: &PotentialSpec,
    omega_hat: f64,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    rk4(initial, dt, steps, |s| vector_field(s, masses, spec, omega_hat))
}

/// Same integrator in the inertial frame.
pub fn integrate_inertial(
    initial: &PhaseState,
    masses: &MassVector,
    spec: &PotentialSpec,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    rk4(initial, dt, steps, |s| inertial_vector_field(s, masses, spec))
}

/// Writes `t,x1,y1,...,xn,yn,px1,py1,...,pxn,pyn`, one row every `stride`
/// states (the final state is always written).
pub fn write_trajectory_csv<W: Write>(out: &mut W, trajectory: &Trajectory, stride: usize) -> std::io::Result<()> {
    let stride = stride.max(1);
    let n = trajectory.states.first().map_or(0, |s| s.x.len() / 2);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).flat_map(|i| [format!("x{i}"), format!("y{i}")]));
    header.extend((1..=n).flat_map(|i| [format!("px{i}"), format!("py{i}")]));
    writeln!(out, "{}", header.join(","))?;
    let last = trajectory.states.len().saturating_sub(1);
    for (i, s) in trajectory.states.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let row: Vec<String> = std::iter::once(s.t)
            .chain(s.x.iter().copied())
            .chain(s.y.iter().copied())
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Distance from the equilibrium in phase space.
fn deviation(state: &PhaseState, eq: &PhaseState) -> f64 {
    ((&state.x - &eq.x).norm_squared() + (&state.y - &eq.y).norm_squared()).sqrt()
}

/// Least-squares slope of `y` against `x`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Unstable eigenpair of `S` with the largest real part.
fn leading_mode(re: &RelativeEquilibrium) -> Result<(Complex64, DVector<f64>)> {
    let spectrum = oracle::full_spectrum(re)?;
    if spectrum.classification != Classification::Unstable {
        return Err(Error::Validation(format!(
            "no unstable eigenvalue (spectrum classified {}, margin {:e})",
            spectrum.classification, spectrum.margin
        )));
    }
    let lambda = spectrum
        .resolved
        .iter()
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .expect("nonempty spectrum")
        * re.omega_hat();
    let s = build_linearization(re)?.s;
    let v = eigen::eigenvector(&s, lambda)?;
    // Rotate the phase so the largest component is real, then keep Re v.
    let pivot = v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    let real = v.map(|c| (c * phase).re);
    let nrm = real.norm();
    Ok((lambda, real / nrm))
}

/// Exponential growth rate of a small perturbation of `re` along its most
/// unstable eigenvector, from a least-squares fit of `log |deviation|`
/// over the window where the deviation stays below `1e-3` times the side.
pub fn growth_rate(re: &RelativeEquilibrium, perturbation_scale: f64, horizon: f64) -> Result<f64> {
    let (_, mode) = leading_mode(re)?;
    let eq = PhaseState::equilibrium(re);
    let scale = re.side();
    let mut start = PhaseState::from_phase_vector(&(eq.phase_vector() + mode * (perturbation_scale * scale)), 0.0);
    start.t = 0.0;
    let dt = default_dt(re.omega_hat());
    let steps = (horizon / dt).ceil() as usize;
    let traj = integrate(&start, re.masses(), re.spec(), re.omega_hat(), dt, steps)?;
    let points: Vec<(f64, f64)> = traj
        .states
        .iter()
        .map(|s| (s.t, deviation(s, &eq)))
        .take_while(|(_, d)| *d < LINEAR_WINDOW * scale)
        .map(|(t, d)| (t, d.ln()))
        .collect();
    if points.len() < 10 {
        return Err(Error::Validation(format!(
            "only {} points in the linear growth window",
            points.len()
        )));
    }
    let rate = slope(&points);
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::Validation(format!("no positive growth detected (slope {rate:e})")));
    }
    Ok(rate)
}

/// Measured against predicted growth rate for one unstable equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCheck {
    /// Largest real part of the spectrum of `S`.
    pub predicted: f64,
    pub measured: f64,
    pub relative_error: f64,
}

/// Runs [`growth_rate`] with a horizon long enough for the deviation to
/// leave the linear window (plus two e-folds) and compares the result with
/// the largest real part of the spectrum.
pub fn growth_check(re: &RelativeEquilibrium, perturbation_scale: f64) -> Result<GrowthCheck> {
    let (lambda, _) = leading_mode(re)?;
    let predicted = lambda.re;
    let horizon = ((LINEAR_WINDOW / perturbation_scale).ln() + 2.0) / predicted;
    let measured = growth_rate(re, perturbation_scale, horizon)?;
    Ok(GrowthCheck {
        predicted,
        measured,
        relative_error: (measured - predicted).abs() / predicted,
    })
}

/// The equilibrium with positions moved by `perturbation_scale * side`
/// along the (normalized) sum of the M-orthonormal complement basis, which
/// excites every mode outside translations and the configuration plane.
pub fn perturbed_equilibrium(re: &RelativeEquilibrium, perturbation_scale: f64) -> PhaseState {
    let eq = PhaseState::equilibrium(re);
    if perturbation_scale == 0.0 {
        return eq;
    }
    let mut dx = invariant_subspaces(re)
        .complement
        .iter()
        .fold(DVector::zeros(2 * re.n_bodies()), |acc, v| acc + v);
    dx *= perturbation_scale * re.side() / dx.norm();
    PhaseState {
        x: &eq.x + &dx,
        y: eq.y,
        t: 0.0,
    }
}

/// Largest deviation over `horizon`, relative to the initial one, for a
/// position perturbation of size `perturbation_scale * side` in the
/// M-orthogonal complement of the translation and configuration modes.
pub fn max_relative_deviation(re: &RelativeEquilibrium, perturbation_scale: f64, horizon: f64) -> Result<f64> {
    let eq = PhaseState::equilibrium(re);
    let start = perturbed_equilibrium(re, perturbation_scale);
    let initial = deviation(&start, &eq);
    let dt = default_dt(re.omega_hat());
    let steps = (horizon / dt).ceil() as usize;
    let traj = integrate(&start, re.masses(), re.spec(), re.omega_hat(), dt, steps)?;
    if let Some(c) = traj.collision {
        return Err(Error::Collision {
            j: c.j,
            k: c.k,
            distance: 0.0,
        });
    }
    Ok(traj.states.iter().map(|s| deviation(s, &eq)).fold(0.0, f64::max) / initial)
}

/// Rotation period `2 pi / w`.
pub fn period(re: &RelativeEquilibrium) -> f64 {
    2.0 * PI / re.omega_hat()
}
