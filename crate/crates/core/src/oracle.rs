//! Brute-force spectral classification from the full `4n x 4n`
//! linearization. Nothing here consults the closed-form criteria.
//!
//! Relative equilibria always carry defective eigenvalues (the drift of the
//! center of mass at `+-i w` and the rotation/scaling chain at 0, which
//! grows to a fourfold block as `a -> 2`). A backward-stable eigensolver
//! splits those by `O(eps^(1/k))`, which can exceed the classification
//! tolerance. Clusters of computed eigenvalues whose mean is an eigenvalue
//! of a matrix within `1000 eps` (relative) are replaced by that mean; see
//! [`eigen::resolved_eigenvalues`].

use num_complex::Complex64;
use serde::Serialize;

use crate::eigen;
use crate::equilibria::RelativeEquilibrium;
use crate::error::Result;
use crate::linearization::{build_linearization, pair_and_square};
use crate::stability::{Classification, IMAGINARY_TOLERANCE};

/// Largest relative spread of a cluster considered for merging
/// (`eps^(1/4)`, the split of a fourfold defective eigenvalue).
pub const MAX_CLUSTER_SPREAD: f64 = 1e-4;

/// Backward error accepted for a cluster mean, relative to `|S|`.
pub const CLUSTER_BACKWARD_TOLERANCE: f64 = 1000.0 * f64::EPSILON;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Eigenvalues `lambda` of `S`.
    pub eigenvalues: Vec<Complex64>,
    /// `mu = lambda / |w|`.
    pub normalized: Vec<Complex64>,
    /// Backward error of each resolved value.
    pub backward_error: Vec<f64>,
    /// Each normalized eigenvalue replaced by the mean of its cluster.
    pub resolved: Vec<Complex64>,
    /// `z = mu^2`, one per `+-` pair.
    pub z_roots: Vec<Complex64>,
    pub pairing_residual: f64,
    pub classification: Classification,
    /// Largest real part among the raw `lambda`.
    pub max_real_part: f64,
    /// The quantity compared against the tolerance band.
    pub margin: f64,
    pub tolerance: f64,
}

/// `margin <= tol` is stable, `tol < margin <= 10 tol` is a boundary case.
pub fn classify_margin(margin: f64, tol: f64) -> Classification {
    if margin <= tol {
        Classification::SpectrallyStable
    } else if margin <= 10.0 * tol {
        Classification::Boundary
    } else {
        Classification::Unstable
    }
}

/// Largest `|Re mu| / max(1, |mu|)`.
pub fn real_part_margin(mu: &[Complex64]) -> f64 {
    mu.iter()
        .map(|m| m.re.abs() / m.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Largest distance of a `z` root from the closed negative real axis,
/// measured as `max(Re z, |Im z| / 2) / max(1, |z|)`. Near `z = -nu^2` the
/// `|Im z| / 2` term equals `|Re mu| nu`.
pub fn z_root_margin(z: &[Complex64]) -> f64 {
    z.iter()
        .map(|z| z.re.max(0.0).max(0.5 * z.im.abs()) / z.norm().max(1.0))
        .fold(0.0, f64::max)
}

struct Spectrum {
    lambda: Vec<Complex64>,
    mu: Vec<Complex64>,
    resolved: Vec<Complex64>,
    backward_error: Vec<f64>,
}

fn spectrum(re: &RelativeEquilibrium) -> Result<Spectrum> {
    let lin = build_linearization(re)?;
    let w = lin.omega_hat.abs();
    let ev = eigen::resolved_eigenvalues(&(&lin.s / w), MAX_CLUSTER_SPREAD, CLUSTER_BACKWARD_TOLERANCE)?;
    Ok(Spectrum {
        lambda: ev.iter().map(|e| e.raw * w).collect(),
        mu: ev.iter().map(|e| e.raw).collect(),
        resolved: ev.iter().map(|e| e.resolved).collect(),
        backward_error: ev.iter().map(|e| e.backward_error).collect(),
    })
}

fn report(spectrum: Spectrum, tol: f64, use_z: bool) -> SpectrumReport {
    let Spectrum {
        lambda,
        mu,
        resolved,
        backward_error,
    } = spectrum;
    let roots = pair_and_square(&resolved);
    let margin = if use_z {
        z_root_margin(&roots.z)
    } else {
        real_part_margin(&resolved)
    };
    let max_real_part = lambda.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    SpectrumReport {
        classification: classify_margin(margin, tol),
        eigenvalues: lambda,
        normalized: mu,
        backward_error,
        resolved,
        z_roots: roots.z,
        pairing_residual: roots.pairing_residual,
        max_real_part,
        margin,
        tolerance: tol,
    }
}

pub fn full_spectrum(re: &RelativeEquilibrium) -> Result<SpectrumReport> {
    full_spectrum_with_tol(re, IMAGINARY_TOLERANCE)
}

/// All `4n` eigenvalues of `S`, classified by the real parts of the
/// cluster-resolved normalized eigenvalues.
pub fn full_spectrum_with_tol(re: &RelativeEquilibrium, tol: f64) -> Result<SpectrumReport> {
    Ok(report(spectrum(re)?, tol, false))
}

pub fn z_root_classification(re: &RelativeEquilibrium) -> Result<SpectrumReport> {
    z_root_classification_with_tol(re, IMAGINARY_TOLERANCE)
}

/// Same spectrum, classified by whether every root of `G(z)` is zero or
/// real and negative.
pub fn z_root_classification_with_tol(re: &RelativeEquilibrium, tol: f64) -> Result<SpectrumReport> {
    Ok(report(spectrum(re)?, tol, true))
}
