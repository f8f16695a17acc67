//! Linear and spectral stability of relative equilibria of the planar
//! n-body problem under homogeneous (`sum m_i m_j / d^a`) and
//! quasihomogeneous (`sum m_i m_j (1/d^a + 1/d^b)`) potentials.
//!
//! The crate is organised bottom-up:
//!
//! - [`potentials`]: energies, gradients and Hessians.
//! - [`equilibria`]: Lagrange triangles and their angular velocities.
//! - [`linearization`]: the rotating-frame linearization, the reduced
//!   eigenvalue problem and the quadratic factors of the stability polynomial.
//! - [`criteria`]: closed-form stability criteria and critical radii.
//! - [`oracle`]: classification from the full numerical spectrum.
//! - [`agreement`]: random-sample comparison of the two.
//! - [`dynamics`]: nonlinear rotating-frame integration.

pub mod agreement;
pub mod criteria;
pub mod dynamics;
pub mod eigen;
pub mod equilibria;
pub mod error;
pub mod linearization;
pub mod oracle;
pub mod potentials;
pub mod roots;
pub mod stability;

pub use equilibria::{lagrange_triangle, AngularVelocitySet, RelativeEquilibrium};
pub use error::{Error, Result};
pub use linearization::QuadraticFactor;
pub use potentials::{MassVector, PlanarConfiguration, PotentialSpec};
pub use stability::Classification;
