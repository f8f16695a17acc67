//! Lagrange triangle relative equilibria and their angular velocities.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{
    gradient, homogeneous_energy, MassVector, PlanarConfiguration, PotentialSpec,
};

/// Relative tolerance on `|grad U + w^2 M x| / |grad U|` accepted as an equilibrium.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Squared angular velocities of the `a` part, the `b` part and the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularVelocitySet {
    pub omega1_sq: f64,
    pub omega2_sq: f64,
    pub omega_sq: f64,
}

impl AngularVelocitySet {
    /// Positive root of `omega_sq`; the sign of the rotation is a free choice.
    pub fn omega_hat(&self) -> f64 {
        self.omega_sq.sqrt()
    }
}

/// A configuration rotating rigidly about its center of mass.
#[derive(Debug, Clone)]
pub struct RelativeEquilibrium {
    config: PlanarConfiguration,
    masses: MassVector,
    spec: PotentialSpec,
    omegas: AngularVelocitySet,
    side: f64,
}

impl RelativeEquilibrium {
    /// Validates the center of mass and the equilibrium residual.
    pub fn new(
        config: PlanarConfiguration,
        masses: MassVector,
        spec: PotentialSpec,
        side: f64,
    ) -> Result<Self> {
        let omegas = angular_velocities(&config, &masses, &spec)?;
        let scale = config.coords().amax();
        let c = config.center_of_mass(&masses);
        if c.norm() > 1e-12 * scale {
            return Err(Error::Validation(format!(
                "center of mass at ({}, {}) is not the origin",
                c.x, c.y
            )));
        }
        let g = gradient(&config, &masses, &spec)?;
        let r = residual(&config, &masses, &spec, omegas.omega_sq)?;
        if r > RESIDUAL_TOLERANCE * g.norm() {
            return Err(Error::Validation(format!(
                "not a relative equilibrium: residual {r:e} vs |grad U| {:e}",
                g.norm()
            )));
        }
        Ok(Self {
            config,
            masses,
            spec,
            omegas,
            side,
        })
    }

    pub fn config(&self) -> &PlanarConfiguration {
        &self.config
    }

    pub fn masses(&self) -> &MassVector {
        &self.masses
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn omegas(&self) -> &AngularVelocitySet {
        &self.omegas
    }

    pub fn omega_hat(&self) -> f64 {
        self.omegas.omega_hat()
    }

    /// Mutual distance `r0` for triangles, otherwise a characteristic length.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn n_bodies(&self) -> usize {
        self.config.n_bodies()
    }

    /// Rotating-frame momenta of the equilibrium, `y = -w M J x`.
    pub fn equilibrium_momenta(&self) -> DVector<f64> {
        let x = self.config.coords();
        let m = self.masses.mass_diagonal();
        let jx = crate::potentials::apply_j(x);
        -self.omega_hat() * m.component_mul(&jx)
    }
}

/// Equilateral triangle with mutual distance `side`, vertices laid out as
/// `(r, 0), (-r/2, r sqrt3/2), (-r/2, -r sqrt3/2)` with `r = side / sqrt3`,
/// shifted to zero center of mass. Homogeneous potentials are scale
/// invariant and always use `side = sqrt3`.
pub fn lagrange_triangle(
    masses: &MassVector,
    spec: &PotentialSpec,
    side: f64,
) -> Result<RelativeEquilibrium> {
    let side = if spec.is_homogeneous() {
        3f64.sqrt()
    } else {
        side
    };
    scaled_lagrange_triangle(masses, spec, side)
}

/// Like [`lagrange_triangle`] but honors `side` for homogeneous potentials too.
pub fn scaled_lagrange_triangle(
    masses: &MassVector,
    spec: &PotentialSpec,
    side: f64,
) -> Result<RelativeEquilibrium> {
    if masses.len() != 3 {
        return Err(Error::Usage(format!(
            "the Lagrange triangle needs exactly 3 masses, got {}",
            masses.len()
        )));
    }
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::Domain(format!("side must be positive, got {side}")));
    }
    let r = side / 3f64.sqrt();
    let h = r * 3f64.sqrt() / 2.0;
    let raw = PlanarConfiguration::from_points(&[[r, 0.0], [-r / 2.0, h], [-r / 2.0, -h]])?;
    let config = raw.recentered(masses);
    RelativeEquilibrium::new(config, masses.clone(), *spec, side)
}

/// `w1^2 = a V / (x^T M x)` and `w2^2 = b W / (x^T M x)` for a configuration
/// that is a simultaneous relative equilibrium of both homogeneous parts.
pub fn angular_velocities(
    config: &PlanarConfiguration,
    masses: &MassVector,
    spec: &PotentialSpec,
) -> Result<AngularVelocitySet> {
    let inertia = config.moment_of_inertia(masses);
    let part = |p: f64| -> Result<f64> { Ok(p * homogeneous_energy(config, masses, p)? / inertia) };
    let omega1_sq = part(spec.a())?;
    let omega2_sq = match spec.b() {
        Some(b) => part(b)?,
        None => 0.0,
    };
    Ok(AngularVelocitySet {
        omega1_sq,
        omega2_sq,
        omega_sq: omega1_sq + omega2_sq,
    })
}

/// `w^2` obtained from the full gradient, `-x^T grad U / (x^T M x)`.
pub fn omega_sq_from_gradient(
    config: &PlanarConfiguration,
    masses: &MassVector,
    spec: &PotentialSpec,
) -> Result<f64> {
    let g = gradient(config, masses, spec)?;
    Ok(-config.coords().dot(&g) / config.moment_of_inertia(masses))
}

/// `|grad U(x) + omega_sq M x|`.
pub fn residual(
    config: &PlanarConfiguration,
    masses: &MassVector,
    spec: &PotentialSpec,
    omega_sq: f64,
) -> Result<f64> {
    let g = gradient(config, masses, spec)?;
    let mx = masses.mass_diagonal().component_mul(config.coords());
    Ok((g + omega_sq * mx).norm())
}
