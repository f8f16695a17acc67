//! Dense eigenvalue helpers for the small nonsymmetric matrices that show up
//! in the linearization.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Diagonal similarity scaling (powers of two) that roughly equalizes row and
/// column norms. Returns the balanced matrix and the scaling `d`, so that
/// `balanced = D^-1 m D`.
pub fn balance(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut d = DVector::from_element(n, 1.0);
    let radix = 2.0_f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut c_scaled = c;
            while c_scaled < r / radix {
                c_scaled *= radix;
                f *= radix;
            }
            while c_scaled >= r * radix {
                c_scaled /= radix;
                f /= radix;
            }
            let r_scaled = r / f;
            if (c_scaled + r_scaled) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (a, d)
}

/// All eigenvalues of a real square matrix, after balancing.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let (balanced, _) = balance(m);
    let schur = nalgebra::Schur::try_new(balanced, SCHUR_EPS, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::Eigensolver {
            condition: condition_estimate(m),
        }
    })?;
    let (_, t) = schur.unpack();
    Ok(quasi_triangular_eigenvalues(&t))
}

/// Eigenvalues of a real quasi-upper-triangular matrix. Unlike
/// `Schur::complex_eigenvalues`, a 2x2 block whose discriminant is a tiny
/// negative rounding error yields a real pair rather than NaN.
fn quasi_triangular_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mid = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let disc = half * half + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push(Complex64::new(mid + r, 0.0));
                out.push(Complex64::new(mid - r, 0.0));
            } else {
                let r = (-disc).sqrt();
                out.push(Complex64::new(mid, r));
                out.push(Complex64::new(mid, -r));
            }
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// A computed eigenvalue and the value used for it after grouping
/// numerically indistinguishable eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedEigenvalue {
    /// Straight from the Schur form.
    pub raw: Complex64,
    /// Mean of the accepted cluster containing `raw` (or `raw` itself).
    pub resolved: Complex64,
    /// `sigma_min(B - resolved I) / |B|` on the balanced matrix `B`: the
    /// relative size of the smallest perturbation making `resolved` exact.
    pub backward_error: f64,
}

/// Eigenvalues with defective clusters resolved.
///
/// A defective eigenvalue of multiplicity `k` comes out of the Schur form
/// split by up to `eps^(1/k)`, while the mean of the split cluster stays
/// `O(eps)` accurate. Eigenvalues within `max_spread` (relative) of each
/// other are grouped, and a group is replaced by its mean when that mean
/// has backward error at most `backward_tol`. A genuinely distinct pair
/// `delta` apart has a mean with backward error of order `delta^2` or more,
/// so only pairs below `sqrt(backward_tol)` can be merged.
pub fn resolved_eigenvalues(m: &DMatrix<f64>, max_spread: f64, backward_tol: f64) -> Result<Vec<ResolvedEigenvalue>> {
    let (balanced, _) = balance(m);
    let norm = balanced.norm().max(f64::MIN_POSITIVE);
    let raw = eigenvalues(m)?;
    let backward = |z: Complex64| -> Result<f64> { Ok(null_triplet(&balanced, z)?.sigma / norm) };

    let n = raw.len();
    let mut group: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let scale = raw[i].norm().max(raw[j].norm()).max(1.0);
            if (raw[i] - raw[j]).norm() <= max_spread * scale {
                let (gi, gj) = (group[i], group[j]);
                for g in group.iter_mut() {
                    if *g == gj {
                        *g = gi;
                    }
                }
            }
        }
    }
    let mut out: Vec<Option<ResolvedEigenvalue>> = vec![None; n];
    for i in 0..n {
        if out[i].is_some() {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&j| group[j] == group[i]).collect();
        let mean = members.iter().map(|&j| raw[j]).sum::<Complex64>() / members.len() as f64;
        let mean_error = if members.len() > 1 { backward(mean)? } else { f64::INFINITY };
        for &j in &members {
            out[j] = Some(if mean_error <= backward_tol {
                ResolvedEigenvalue {
                    raw: raw[j],
                    resolved: mean,
                    backward_error: mean_error,
                }
            } else {
                ResolvedEigenvalue {
                    raw: raw[j],
                    resolved: raw[j],
                    backward_error: backward(raw[j])?,
                }
            });
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every index visited")).collect())
}

/// Eigenvalues of a matrix known to be similar to a symmetric one through
/// `D^{1/2} m D^{-1/2}` with positive diagonal `d`, sorted ascending.
pub fn similar_symmetric_eigenvalues(m: &DMatrix<f64>, d: &DVector<f64>) -> Vec<f64> {
    let sqrt_d = d.map(f64::sqrt);
    let mut sym = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            sym[(i, j)] *= sqrt_d[i] / sqrt_d[j];
        }
    }
    // Remove rounding asymmetry before the symmetric solver.
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Smallest singular triplet of `m - lambda I`: the left and right
/// vectors are the left and right eigenvectors of the eigenvalue nearest
/// `lambda`, and the singular value is the smallest achievable residual.
pub struct NullTriplet {
    pub left: DVector<Complex64>,
    pub right: DVector<Complex64>,
    pub sigma: f64,
}

pub fn null_triplet(m: &DMatrix<f64>, lambda: Complex64) -> Result<NullTriplet> {
    let n = m.nrows();
    let mut shifted: DMatrix<Complex64> = m.map(|x| Complex::new(x, 0.0));
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    // The bidiagonal iteration occasionally stalls at a machine-epsilon
    // threshold; a slightly looser one still resolves sigma to O(eps |m|).
    let svd = [1.0, 4.0, 16.0]
        .iter()
        .find_map(|k| nalgebra::SVD::try_new(shifted.clone(), true, true, k * f64::EPSILON, SCHUR_MAX_ITER))
        .ok_or_else(|| Error::Eigensolver {
            condition: condition_estimate(m),
        })?;
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty matrix");
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    Ok(NullTriplet {
        left: u.column(idx).into_owned(),
        right: v_t.row(idx).transpose().map(|z| z.conj()),
        sigma,
    })
}

/// Unit right eigenvector for `lambda` (the right singular vector of
/// `m - lambda I` with the smallest singular value).
pub fn eigenvector(m: &DMatrix<f64>, lambda: Complex64) -> Result<DVector<Complex64>> {
    Ok(null_triplet(m, lambda)?.right)
}

/// `|m v - lambda v|`.
pub fn eigen_residual(m: &DMatrix<f64>, lambda: Complex64, v: &DVector<Complex64>) -> f64 {
    let mc: DMatrix<Complex64> = m.map(|x| Complex::new(x, 0.0));
    (mc * v - v * lambda).norm()
}

/// Cheap 1-norm condition estimate used only for error reporting.
fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let norm1 = |a: &DMatrix<f64>| {
        (0..a.ncols())
            .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match m.clone().try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - Complex64::new(0.0, -2.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn balancing_is_a_similarity() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1e6, 0.0, 1e-6, 2.0, 1e4, 0.0, 1e-4, 3.0]);
        let (b, d) = balance(&m);
        let dm = DMatrix::from_diagonal(&d);
        let back = &dm * b * dm.try_inverse().unwrap();
        assert!((back - &m).amax() < 1e-9 * m.amax());
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, -1.0, 2.0, 0.5, 0.0, 0.3, -1.0]);
        for lambda in eigenvalues(&m).unwrap() {
            let v = eigenvector(&m, lambda).unwrap();
            assert!(eigen_residual(&m, lambda, &v) < 1e-10 * m.norm());
        }
    }

    #[test]
    fn jordan_block_is_resolved_but_distinct_pairs_are_not() {
        // Rotated Jordan block at 1 (balancing cannot undo it) plus a simple eigenvalue.
        let m = DMatrix::from_row_slice(3, 3, &[1.5, 0.5, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 3.0]);
        for e in resolved_eigenvalues(&m, 1e-4, 1e-13).unwrap() {
            if e.raw.re < 2.0 {
                assert!((e.resolved - 1.0).norm() < 1e-14, "{e:?}");
            } else {
                assert_eq!(e.resolved, e.raw);
            }
        }
        // Two well-separated simple eigenvalues 1e-5 apart stay apart.
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 + 1e-5]);
        for e in resolved_eigenvalues(&d, 1e-4, 1e-13).unwrap() {
            assert_eq!(e.resolved, e.raw);
        }
    }

    #[test]
    fn symmetric_similarity() {
        // diag(1, 4)^-1 * symmetric
        let d = DVector::from_vec(vec![1.0, 4.0]);
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let m = DMatrix::from_diagonal(&d.map(|x| 1.0 / x)) * s;
        let ev = similar_symmetric_eigenvalues(&m, &d);
        let mut expect: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
