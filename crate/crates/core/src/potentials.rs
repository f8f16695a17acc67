//! Homogeneous and quasihomogeneous pair potentials.
//!
//! The potential is the positive "force function" convention: bodies obey
//! `m_i q_i'' = +dU/dq_i` and every pair contributes `m_i m_j / d_ij^p`, with
//! the gravitational constant absorbed into the units.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are treated as a collision.
pub const COLLISION_DISTANCE: f64 = 1e-300;

/// Positive masses of the `n >= 2` bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassVector(Vec<f64>);

impl MassVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidMasses(format!(
                "need at least two bodies, got {}",
                masses.len()
            )));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::InvalidMasses(format!(
                "mass {} must be positive and finite, got {m}",
                i + 1
            )));
        }
        Ok(Self(masses))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Sum of the pairwise products `m_i m_j`, `i < j`.
    pub fn sigma2(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.0.len() {
            for j in i + 1..self.0.len() {
                s += self.0[i] * self.0[j];
            }
        }
        s
    }

    /// Diagonal of the `2n x 2n` mass matrix `diag(m1, m1, ..., mn, mn)`.
    pub fn mass_diagonal(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.0.len(), self.0.iter().flat_map(|&m| [m, m]))
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.mass_diagonal())
    }
}

/// Positions of `n` bodies in the plane, stored as `(x1, y1, ..., xn, yn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarConfiguration {
    coords: DVector<f64>,
}

impl PlanarConfiguration {
    /// Builds a configuration, rejecting odd lengths, non-finite entries and
    /// coincident bodies.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 4 || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidConfiguration(format!(
                "expected 2n coordinates with n >= 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfiguration("non-finite coordinate".into()));
        }
        let config = Self { coords };
        config.check_collisions()?;
        Ok(config)
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            2 * points.len(),
            points.iter().flat_map(|p| p.iter().copied()),
        ))
    }

    pub fn n_bodies(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn position(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.coords[2 * i], self.coords[2 * i + 1])
    }

    pub fn distance(&self, j: usize, k: usize) -> f64 {
        (self.position(k) - self.position(j)).norm()
    }

    pub fn center_of_mass(&self, masses: &MassVector) -> Vector2<f64> {
        let mut c = Vector2::zeros();
        for (i, &m) in masses.as_slice().iter().enumerate() {
            c += m * self.position(i);
        }
        c / masses.total()
    }

    /// `x^T M x`.
    pub fn moment_of_inertia(&self, masses: &MassVector) -> f64 {
        masses
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &m)| m * self.position(i).norm_squared())
            .sum()
    }

    /// The same configuration shifted so its center of mass is the origin.
    pub fn recentered(&self, masses: &MassVector) -> Self {
        let c = self.center_of_mass(masses);
        let mut coords = self.coords.clone();
        for i in 0..self.n_bodies() {
            coords[2 * i] -= c.x;
            coords[2 * i + 1] -= c.y;
        }
        Self { coords }
    }

    fn check_collisions(&self) -> Result<()> {
        for j in 0..self.n_bodies() {
            for k in j + 1..self.n_bodies() {
                let d = self.distance(j, k);
                if d.is_nan() || d < COLLISION_DISTANCE {
                    return Err(Error::Collision { j, k, distance: d });
                }
            }
        }
        Ok(())
    }

    fn check_masses(&self, masses: &MassVector) -> Result<()> {
        if masses.len() != self.n_bodies() {
            return Err(Error::Usage(format!(
                "{} masses for {} bodies",
                masses.len(),
                self.n_bodies()
            )));
        }
        Ok(())
    }
}

/// Which potential drives the bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V = sum m_i m_j / d^a`.
    Homogeneous { a: f64 },
    /// `U = V + W` with `W = sum m_i m_j / d^b` and `a > b > 0`.
    Quasihomogeneous { a: f64, b: f64 },
}

impl PotentialSpec {
    pub fn homogeneous(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "exponent a must be positive, got {a}"
            )));
        }
        Ok(Self::Homogeneous { a })
    }

    pub fn quasihomogeneous(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a > b) {
            return Err(Error::InvalidPotential(format!(
                "need a > b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self::Quasihomogeneous { a, b })
    }

    pub fn a(&self) -> f64 {
        match *self {
            Self::Homogeneous { a } | Self::Quasihomogeneous { a, .. } => a,
        }
    }

    pub fn b(&self) -> Option<f64> {
        match *self {
            Self::Homogeneous { .. } => None,
            Self::Quasihomogeneous { b, .. } => Some(b),
        }
    }

    /// Exponents of the homogeneous terms making up the potential.
    pub fn exponents(&self) -> Vec<f64> {
        match *self {
            Self::Homogeneous { a } => vec![a],
            Self::Quasihomogeneous { a, b } => vec![a, b],
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, Self::Homogeneous { .. })
    }
}

/// Energy of a single homogeneous term of degree `-exponent`.
pub fn homogeneous_energy(
    config: &PlanarConfiguration,
    masses: &MassVector,
    exponent: f64,
) -> Result<f64> {
    config.check_masses(masses)?;
    let m = masses.as_slice();
    let mut energy = 0.0;
    for_each_pair(config, |j, k, d, _| {
        energy += m[j] * m[k] / d.powf(exponent);
    })?;
    Ok(energy)
}

/// Gradient of a single homogeneous term.
pub fn homogeneous_gradient(
    config: &PlanarConfiguration,
    masses: &MassVector,
    exponent: f64,
) -> Result<DVector<f64>> {
    config.check_masses(masses)?;
    let m = masses.as_slice();
    let mut grad = DVector::zeros(config.coords.len());
    for_each_pair(config, |j, k, d, u| {
        // u points from j to k; the term pulls j toward k and k toward j.
        let f = exponent * m[j] * m[k] / d.powf(exponent + 1.0) * u;
        grad[2 * j] += f.x;
        grad[2 * j + 1] += f.y;
        grad[2 * k] -= f.x;
        grad[2 * k + 1] -= f.y;
    })?;
    Ok(grad)
}

/// Hessian of a single homogeneous term, assembled from the 2x2 blocks
/// `A_jk = p m_j m_k / d^(p+2) (I - (p+2) u u^T)` and `A_kk = -sum_j A_jk`.
pub fn homogeneous_hessian(
    config: &PlanarConfiguration,
    masses: &MassVector,
    exponent: f64,
) -> Result<DMatrix<f64>> {
    config.check_masses(masses)?;
    let m = masses.as_slice();
    let n = config.n_bodies();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    let mut diag = vec![Matrix2::<f64>::zeros(); n];
    for_each_pair(config, |j, k, d, u| {
        let block = pair_block(exponent, m[j] * m[k], d, &u);
        h.fixed_view_mut::<2, 2>(2 * j, 2 * k).copy_from(&block);
        h.fixed_view_mut::<2, 2>(2 * k, 2 * j).copy_from(&block);
        diag[j] -= block;
        diag[k] -= block;
    })?;
    for (i, block) in diag.iter().enumerate() {
        h.fixed_view_mut::<2, 2>(2 * i, 2 * i).copy_from(block);
    }
    Ok(h)
}

fn pair_block(exponent: f64, mass_product: f64, d: f64, u: &Vector2<f64>) -> Matrix2<f64> {
    let scale = exponent * mass_product / d.powf(exponent + 2.0);
    let uu = u * u.transpose();
    // Symmetrize so the off-diagonal entries are bitwise identical.
    let off = -(exponent + 2.0) * uu[(0, 1)];
    Matrix2::new(
        scale * (1.0 - (exponent + 2.0) * uu[(0, 0)]),
        scale * off,
        scale * off,
        scale * (1.0 - (exponent + 2.0) * uu[(1, 1)]),
    )
}

fn for_each_pair<F>(config: &PlanarConfiguration, mut visit: F) -> Result<()>
where
    F: FnMut(usize, usize, f64, Vector2<f64>),
{
    let n = config.n_bodies();
    for j in 0..n {
        for k in j + 1..n {
            let diff = config.position(k) - config.position(j);
            let d = diff.norm();
            if d.is_nan() || d < COLLISION_DISTANCE {
                return Err(Error::Collision { j, k, distance: d });
            }
            visit(j, k, d, diff / d);
        }
    }
    Ok(())
}

pub fn potential_energy(
    config: &PlanarConfiguration,
    masses: &MassVector,
    spec: &PotentialSpec,
) -> Result<f64> {
    spec.exponents()
        .into_iter()
        .map(|p| homogeneous_energy(config, masses, p))
        .sum()
}

/// Euclidean gradient of the potential in the `2n` coordinates.
pub fn gradient(
    config: &PlanarConfiguration,
    masses: &MassVector,
    spec: &PotentialSpec,
) -> Result<DVector<f64>> {
    let mut total = DVector::zeros(config.coords.len());
    for p in spec.exponents() {
        total += homogeneous_gradient(config, masses, p)?;
    }
    Ok(total)
}

/// Hessian `D grad U`; for quasihomogeneous potentials the sum of the two
/// homogeneous Hessians.
pub fn hessian(
    config: &PlanarConfiguration,
    masses: &MassVector,
    spec: &PotentialSpec,
) -> Result<DMatrix<f64>> {
    let n2 = config.coords.len();
    let mut total = DMatrix::zeros(n2, n2);
    for p in spec.exponents() {
        total += homogeneous_hessian(config, masses, p)?;
    }
    Ok(total)
}

/// The `2n x 2n` block-diagonal matrix `J` built from `K = [[0, 1], [-1, 0]]`.
pub fn symplectic_j(n_bodies: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_bodies, 2 * n_bodies);
    for i in 0..n_bodies {
        j[(2 * i, 2 * i + 1)] = 1.0;
        j[(2 * i + 1, 2 * i)] = -1.0;
    }
    j
}

/// Applies `J` to a `2n` vector without forming the matrix.
pub fn apply_j(v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for i in 0..v.len() / 2 {
        out[2 * i] = v[2 * i + 1];
        out[2 * i + 1] = -v[2 * i];
    }
    out
}

/// Applies the block rotation `R(theta)` (blocks `e^{K theta}`).
pub fn rotate(v: &DVector<f64>, theta: f64) -> DVector<f64> {
    let (s, c) = theta.sin_cos();
    let mut out = DVector::zeros(v.len());
    for i in 0..v.len() / 2 {
        let (x, y) = (v[2 * i], v[2 * i + 1]);
        out[2 * i] = c * x + s * y;
        out[2 * i + 1] = -s * x + c * y;
    }
    out
}
