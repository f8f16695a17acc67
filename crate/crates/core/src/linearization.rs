//! Rotating-frame linearization of a relative equilibrium, the reduced
//! eigenvalue problem in the normalized eigenvalue `mu = lambda / |w|`, and
//! the quadratic factors of the stability polynomial `G(z)`, `z = mu^2`,
//! obtained from two-dimensional subspaces invariant under both `J` and
//! `M^-1 D grad U`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::eigen;
use crate::equilibria::RelativeEquilibrium;
use crate::error::{Error, Result};
use crate::potentials::{apply_j, hessian, symplectic_j, MassVector, PotentialSpec};
use crate::stability::BOUNDARY_TOLERANCE;

/// Relative agreement required between the closed-form and trace routes
/// for the remaining quadratic factor.
pub const TRACE_CONSISTENCY: f64 = 1e-9;

/// `Q(z) = z^2 + alpha z + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFactor {
    pub alpha: f64,
    pub beta: f64,
}

/// Where the roots of a quadratic factor sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorRoots {
    /// Both roots real and `<= 0`, and separated.
    RealNonPositive,
    /// A double root, or `alpha` at zero: the edge of the stable set.
    Marginal,
    /// A complex pair or a positive root.
    Unstable,
}

impl QuadraticFactor {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Factor of a 2D invariant subspace on which `w^-2 M^-1 D grad U` has
    /// eigenvalues `eta` and `xi`.
    pub fn from_restriction_eigenvalues(eta: f64, xi: f64) -> Self {
        Self {
            alpha: 2.0 - eta - xi,
            beta: (1.0 + eta) * (1.0 + xi),
        }
    }

    pub fn discriminant(&self) -> f64 {
        self.alpha * self.alpha - 4.0 * self.beta
    }

    pub fn roots(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.discriminant(), 0.0).sqrt();
        let a = Complex64::new(self.alpha, 0.0);
        [(-a - disc) * 0.5, (-a + disc) * 0.5]
    }

    /// Recovers `(eta, xi)` from `eta + xi = 2 - alpha` and
    /// `eta xi = beta - 1 - (eta + xi)`.
    pub fn restriction_eigenvalues(&self) -> [Complex64; 2] {
        let s = 2.0 - self.alpha;
        let p = self.beta - 1.0 - s;
        let disc = Complex64::new(s * s - 4.0 * p, 0.0).sqrt();
        let s = Complex64::new(s, 0.0);
        [(s - disc) * 0.5, (s + disc) * 0.5]
    }

    /// Exact predicate: roots real and negative (or zero) iff
    /// `alpha > 0, beta >= 0, alpha^2 - 4 beta >= 0`.
    pub fn has_real_nonpositive_roots(&self) -> bool {
        self.alpha > 0.0 && self.beta >= 0.0 && self.discriminant() >= 0.0
    }

    /// Root classification with a band of relative width `tol` around the
    /// equalities.
    pub fn classify(&self, tol: f64) -> FactorRoots {
        let scale = 1f64.max(self.alpha * self.alpha).max(4.0 * self.beta.abs());
        let disc = self.discriminant();
        if disc < -tol * scale || self.alpha < -tol || self.beta < -tol * scale {
            return FactorRoots::Unstable;
        }
        let double_root = self.beta.abs() > tol * scale && disc.abs() <= tol * scale;
        if double_root || self.alpha.abs() <= tol {
            return FactorRoots::Marginal;
        }
        FactorRoots::RealNonPositive
    }
}

/// The `4n x 4n` matrix `S = [[w J, M^-1], [D grad U, w J]]`.
#[derive(Debug, Clone)]
pub struct LinearizationMatrix {
    pub s: DMatrix<f64>,
    pub omega_hat: f64,
}

impl LinearizationMatrix {
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eigen::eigenvalues(&self.s)
    }

    /// Eigenvalues of `S / |w|`, i.e. the normalized eigenvalues `mu`.
    pub fn normalized_eigenvalues(&self) -> Result<Vec<Complex64>> {
        eigen::eigenvalues(&(&self.s / self.omega_hat.abs()))
    }

    /// Largest odd-degree coefficient of the characteristic polynomial of
    /// `S / |w|`, relative to the largest coefficient. Zero for an even
    /// polynomial.
    pub fn odd_coefficient_defect(&self) -> Result<f64> {
        let mu = self.normalized_eigenvalues()?;
        let coeffs = poly_from_roots(&mu);
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let n = coeffs.len() - 1;
        // coeffs[k] multiplies mu^(n-k); n = 4 * bodies is even.
        let odd = coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| (n - k) % 2 == 1)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        Ok(odd / max)
    }
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

pub fn build_linearization(re: &RelativeEquilibrium) -> Result<LinearizationMatrix> {
    let n2 = 2 * re.n_bodies();
    let w = re.omega_hat();
    let h = hessian(re.config(), re.masses(), re.spec())?;
    let wj = symplectic_j(re.n_bodies()) * w;
    let minv = re.masses().mass_diagonal().map(|m| 1.0 / m);
    let mut s = DMatrix::zeros(2 * n2, 2 * n2);
    s.view_mut((0, 0), (n2, n2)).copy_from(&wj);
    s.view_mut((n2, n2), (n2, n2)).copy_from(&wj);
    s.view_mut((0, n2), (n2, n2))
        .copy_from(&DMatrix::from_diagonal(&minv));
    s.view_mut((n2, 0), (n2, n2)).copy_from(&h);
    Ok(LinearizationMatrix { s, omega_hat: w })
}

/// `M^-1 D grad U / w^2`, the matrix whose invariant subspaces factor `G`.
pub fn normalized_hessian(re: &RelativeEquilibrium) -> Result<DMatrix<f64>> {
    let h = hessian(re.config(), re.masses(), re.spec())?;
    let minv = re.masses().mass_diagonal().map(|m| 1.0 / m);
    Ok(DMatrix::from_diagonal(&minv) * h / re.omegas().omega_sq)
}

/// `A(mu) = M^-1 D grad U / w^2 + (1 - mu^2) I + 2 mu J`; singular exactly at
/// the normalized eigenvalues.
pub fn reduced_matrix(re: &RelativeEquilibrium, mu: Complex64) -> Result<DMatrix<Complex64>> {
    let b = normalized_hessian(re)?;
    let j = symplectic_j(re.n_bodies());
    let one = Complex64::new(1.0, 0.0);
    let mut a: DMatrix<Complex64> = b.map(|x| Complex64::new(x, 0.0));
    for r in 0..a.nrows() {
        a[(r, r)] += one - mu * mu;
        for c in 0..a.ncols() {
            if j[(r, c)] != 0.0 {
                a[(r, c)] += mu * (2.0 * j[(r, c)]);
            }
        }
    }
    Ok(a)
}

/// Roots of the stability polynomial together with pairing diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityRoots {
    pub z: Vec<Complex64>,
    /// Largest `|mu + mu'|` over the `(mu, mu')` pairs that were squared.
    pub pairing_residual: f64,
    /// Set when the `+-` pairing is loose compared with the spectrum size.
    pub ill_conditioned: bool,
}

/// Pairs each `mu` with its nearest `-mu` partner and squares the pair,
/// collapsing `4n` normalized eigenvalues into `2n` values of `z`.
pub fn pair_and_square(mu: &[Complex64]) -> StabilityRoots {
    let mut pool: Vec<Complex64> = mu.to_vec();
    let mut z = Vec::with_capacity(mu.len() / 2);
    let mut residual: f64 = 0.0;
    while let Some(u) = pool.pop() {
        let Some((idx, _)) = pool
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| (**p + u).norm().total_cmp(&(**q + u).norm()))
        else {
            // Odd leftover: nothing to pair with.
            residual = f64::INFINITY;
            z.push(u * u);
            break;
        };
        let v = pool.swap_remove(idx);
        residual = residual.max((u + v).norm());
        z.push((u * u + v * v) * 0.5);
    }
    let radius = mu.iter().map(|m| m.norm()).fold(1.0, f64::max);
    StabilityRoots {
        z,
        pairing_residual: residual,
        ill_conditioned: residual > 1e-6 * radius,
    }
}

/// Roots of `G(z)` computed as squares of the normalized eigenvalues of `S`.
pub fn stability_polynomial_roots(re: &RelativeEquilibrium) -> Result<StabilityRoots> {
    let mu = build_linearization(re)?.normalized_eigenvalues()?;
    Ok(pair_and_square(&mu))
}

/// Factor from the translation subspace spanned by `(1,0,...,1,0)` and
/// `(0,1,...,0,1)`: `eta = xi = 0`, so `Q(z) = (z + 1)^2`.
pub fn translation_factor() -> QuadraticFactor {
    QuadraticFactor::from_restriction_eigenvalues(0.0, 0.0)
}

/// Eigenvalue of `w^-2 M^-1 D grad U` on the configuration vector `x`:
/// `1 + (a w1^2 + b w2^2) / w^2` (which is `a + 1` when homogeneous).
pub fn configuration_eigenvalue(re: &RelativeEquilibrium) -> f64 {
    let w = re.omegas();
    let b = re.spec().b().unwrap_or(0.0);
    1.0 + (re.spec().a() * w.omega1_sq + b * w.omega2_sq) / w.omega_sq
}

/// Factor from the subspace spanned by `x` and `J x`: `eta` is the
/// configuration eigenvalue and `xi = -1`, so `beta = 0`.
pub fn configuration_factor(re: &RelativeEquilibrium) -> QuadraticFactor {
    let mut q = QuadraticFactor::from_restriction_eigenvalues(configuration_eigenvalue(re), -1.0);
    q.beta = 0.0;
    q
}

/// `C = w^-2 M^-1 D grad U` for the Lagrange triangle.
#[derive(Debug, Clone)]
pub struct ReducedTriangleMatrix {
    pub c: DMatrix<f64>,
    /// The `w^2` that was divided out.
    pub normalization: f64,
    mass_diagonal: DVector<f64>,
}

impl ReducedTriangleMatrix {
    pub fn trace(&self) -> f64 {
        self.c.trace()
    }

    /// Sum of all pairwise products of eigenvalues,
    /// `(tr(C)^2 - tr(C^2)) / 2`.
    pub fn pair_product_sum(&self) -> f64 {
        let tr = self.trace();
        0.5 * (tr * tr - (&self.c * &self.c).trace())
    }

    /// Real eigenvalues in ascending order. `C` is similar to the symmetric
    /// `M^-1/2 D grad U M^-1/2 / w^2`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigen::similar_symmetric_eigenvalues(&self.c, &self.mass_diagonal)
    }
}

pub fn triangle_reduced_matrix(re: &RelativeEquilibrium) -> Result<ReducedTriangleMatrix> {
    if re.n_bodies() != 3 {
        return Err(Error::Usage("reduced triangle matrix needs 3 bodies".into()));
    }
    Ok(ReducedTriangleMatrix {
        c: normalized_hessian(re)?,
        normalization: re.omegas().omega_sq,
        mass_diagonal: re.masses().mass_diagonal(),
    })
}

/// Closed form of the remaining triangle factor. With `t = r0^(a-b)`:
/// `alpha = -(a(a-2) + b(b-2) t) / (a + b t)` and
/// `beta = (3/4) f ((a(a+2) + b(b+2) t) / (a + b t))^2` where
/// `f = sigma2 / (m1+m2+m3)^2`; the homogeneous case drops the `b` terms.
pub fn closed_form_remaining_factor(
    masses: &MassVector,
    spec: &PotentialSpec,
    side: f64,
) -> QuadraticFactor {
    let total = masses.total();
    let f = masses.sigma2() / (total * total);
    let a = spec.a();
    let (num_alpha, num_beta, den) = match spec.b() {
        None => (a * (a - 2.0), a * (a + 2.0), a),
        Some(b) => {
            let log_t = (a - b) * side.ln();
            // Divide through by the larger of 1 and t to stay finite.
            if log_t <= 0.0 {
                let t = log_t.exp();
                (a * (a - 2.0) + b * (b - 2.0) * t, a * (a + 2.0) + b * (b + 2.0) * t, a + b * t)
            } else {
                let s = (-log_t).exp();
                (a * (a - 2.0) * s + b * (b - 2.0), a * (a + 2.0) * s + b * (b + 2.0), a * s + b)
            }
        }
    };
    let ratio = num_beta / den;
    QuadraticFactor {
        alpha: -num_alpha / den,
        beta: 0.75 * f * ratio * ratio,
    }
}

/// Remaining factor from trace arithmetic on the numeric reduced matrix,
/// using the four known eigenvalues `{0, 0, -1, eta_c}`.
pub fn trace_remaining_factor(re: &RelativeEquilibrium) -> Result<QuadraticFactor> {
    let c = triangle_reduced_matrix(re)?;
    let eta_c = configuration_eigenvalue(re);
    let sum = c.trace() - eta_c + 1.0;
    // e2 = (-1)(eta_c) + (eta_c - 1)(eta + xi) + eta xi
    let product = c.pair_product_sum() + eta_c - (eta_c - 1.0) * sum;
    Ok(QuadraticFactor {
        alpha: 2.0 - sum,
        beta: 1.0 + sum + product,
    })
}

/// The quadratic factor from the M-orthogonal complement of the translation
/// and configuration subspaces. Computed in closed form and by trace
/// arithmetic; the two must agree.
pub fn remaining_factor(re: &RelativeEquilibrium) -> Result<QuadraticFactor> {
    let closed = closed_form_remaining_factor(re.masses(), re.spec(), re.side());
    let traced = trace_remaining_factor(re)?;
    let check = |quantity: &'static str, x: f64, y: f64| {
        if (x - y).abs() > TRACE_CONSISTENCY * x.abs().max(1.0) {
            Err(Error::Inconsistent {
                quantity,
                closed_form: x,
                numeric: y,
            })
        } else {
            Ok(())
        }
    };
    check("alpha", closed.alpha, traced.alpha)?;
    check("beta", closed.beta, traced.beta)?;
    Ok(closed)
}

/// M-orthonormal bases of the translation subspace, the configuration
/// subspace `span{x, Jx}`, and their M-orthogonal complement (built by
/// Gram-Schmidt in the M inner product).
#[derive(Debug, Clone)]
pub struct InvariantSubspaces {
    pub translation: [DVector<f64>; 2],
    pub configuration: [DVector<f64>; 2],
    pub complement: Vec<DVector<f64>>,
    mass_diagonal: DVector<f64>,
}

impl InvariantSubspaces {
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.component_mul(&self.mass_diagonal).dot(v)
    }

    /// All basis vectors, translation first, then configuration, then complement.
    pub fn basis(&self) -> Vec<&DVector<f64>> {
        self.translation
            .iter()
            .chain(self.configuration.iter())
            .chain(self.complement.iter())
            .collect()
    }

    /// Matrix of `w^-2 M^-1 D grad U` restricted to the complement, in the
    /// M-orthonormal complement basis (symmetric).
    pub fn restricted_complement(&self, re: &RelativeEquilibrium) -> Result<DMatrix<f64>> {
        let b = normalized_hessian(re)?;
        let k = self.complement.len();
        Ok(DMatrix::from_fn(k, k, |i, j| {
            self.inner(&self.complement[i], &(&b * &self.complement[j]))
        }))
    }
}

pub fn invariant_subspaces(re: &RelativeEquilibrium) -> InvariantSubspaces {
    let n2 = 2 * re.n_bodies();
    let mass_diagonal = re.masses().mass_diagonal();
    let inner = |u: &DVector<f64>, v: &DVector<f64>| u.component_mul(&mass_diagonal).dot(v);
    let normalize = |v: DVector<f64>| {
        let nrm = inner(&v, &v).sqrt();
        v / nrm
    };
    let ex = DVector::from_fn(n2, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let ey = DVector::from_fn(n2, |i, _| if i % 2 == 1 { 1.0 } else { 0.0 });
    let x = re.config().coords().clone();
    let jx = apply_j(&x);
    let translation = [normalize(ex), normalize(ey)];
    let configuration = [normalize(x), normalize(jx)];

    let mut basis: Vec<DVector<f64>> = translation.iter().chain(configuration.iter()).cloned().collect();
    let mut complement = Vec::new();
    for e in 0..n2 {
        if basis.len() == n2 {
            break;
        }
        let mut v = DVector::from_fn(n2, |i, _| if i == e { 1.0 } else { 0.0 });
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &v);
                v -= q * c;
            }
        }
        let nrm = inner(&v, &v).sqrt();
        if nrm > 1e-3 * mass_diagonal[e].sqrt() {
            let q = v / nrm;
            basis.push(q.clone());
            complement.push(q);
        }
    }
    InvariantSubspaces {
        translation,
        configuration,
        complement,
        mass_diagonal,
    }
}

/// The three factor classes that decide spectral stability of a triangle,
/// the translation factor being always marginal-stable.
pub fn factor_classes(re: &RelativeEquilibrium) -> Result<[FactorRoots; 2]> {
    Ok([
        configuration_factor(re).classify(BOUNDARY_TOLERANCE),
        remaining_factor(re)?.classify(BOUNDARY_TOLERANCE),
    ])
}
