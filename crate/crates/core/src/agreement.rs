//! Side-by-side comparison of the closed-form criteria and the full
//! numerical spectrum on random Lagrange triangles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{self, alpha_sign_condition, g_function, mass_function_f, routh_bound};
use crate::equilibria::lagrange_triangle;
use crate::error::Result;
use crate::oracle;
use crate::potentials::{MassVector, PotentialSpec};
use crate::stability::{Classification, IMAGINARY_TOLERANCE};

/// Default distance kept from every classification boundary.
pub const DEFAULT_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub masses: MassVector,
    pub spec: PotentialSpec,
    /// Triangle side; ignored for homogeneous potentials.
    pub r0: f64,
}

impl Sample {
    /// Smallest distance of the closed-form quantities from a boundary:
    /// `|f - bound|` and `|a - 2|` (homogeneous) or `|f - g|` and
    /// `|alpha|` (quasihomogeneous).
    pub fn boundary_distance(&self) -> f64 {
        let f = mass_function_f(&self.masses);
        match self.spec {
            PotentialSpec::Homogeneous { a } => (f - routh_bound(a)).abs().min((a - 2.0).abs()),
            PotentialSpec::Quasihomogeneous { a, b } => {
                let g = g_function(a, b, self.r0);
                let s = alpha_sign_condition(a, b, self.r0);
                (f - g).abs().min(s.abs())
            }
        }
    }
}

/// Draws samples (half homogeneous, half quasihomogeneous) and keeps those
/// at least `margin` away from every boundary. Deterministic in `seed`.
///
/// Masses are log-uniform on `[1e-3, 1]`, `a` uniform on `(0.05, 3)`,
/// `b` uniform on `(0.05, a)` and `r0` log-uniform on `[0.1, 10]`.
pub fn random_samples(count: usize, seed: u64, margin: f64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let masses: Vec<f64> = (0..3).map(|_| 10f64.powf(rng.random_range(-3.0..0.0))).collect();
        let masses = MassVector::new(masses).expect("positive masses");
        let a = rng.random_range(0.05..3.0);
        let (spec, r0) = if out.len() % 2 == 0 {
            (PotentialSpec::Homogeneous { a }, 3f64.sqrt())
        } else {
            let b = rng.random_range(0.05..a);
            let r0 = 10f64.powf(rng.random_range(-1.0..1.0));
            (PotentialSpec::Quasihomogeneous { a, b }, r0)
        };
        let sample = Sample { masses, spec, r0 };
        if sample.boundary_distance() > margin {
            out.push(sample);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementRow {
    pub sample: Sample,
    pub closed_form: Classification,
    pub oracle: Classification,
    /// The oracle's normalized real-part margin.
    pub oracle_margin: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AgreementTable {
    pub rows: Vec<AgreementRow>,
    pub tolerance: f64,
}

impl AgreementTable {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| !r.matches).count()
    }

    /// Largest oracle margin among samples the oracle calls stable.
    pub fn max_stable_margin(&self) -> Option<f64> {
        self.margins(Classification::SpectrallyStable).reduce(f64::max)
    }

    /// Smallest oracle margin among samples the oracle calls unstable.
    pub fn min_unstable_margin(&self) -> Option<f64> {
        self.margins(Classification::Unstable).reduce(f64::min)
    }

    /// How close the oracle came to its own tolerance, as a factor:
    /// `min(tol / max_stable_margin, min_unstable_margin / (10 tol))`.
    /// Values above 1 mean every sample cleared the boundary band.
    pub fn worst_margin_factor(&self) -> Option<f64> {
        let stable = self.max_stable_margin().map(|m| self.tolerance / m.max(f64::MIN_POSITIVE));
        let unstable = self.min_unstable_margin().map(|m| m / (10.0 * self.tolerance));
        match (stable, unstable) {
            (Some(s), Some(u)) => Some(s.min(u)),
            (s, u) => s.or(u),
        }
    }

    fn margins(&self, class: Classification) -> impl Iterator<Item = f64> + '_ {
        self.rows
            .iter()
            .filter(move |r| r.oracle == class)
            .map(|r| r.oracle_margin)
    }
}

pub fn compare(sample: &Sample, tol: f64) -> Result<AgreementRow> {
    let closed_form = criteria::classify(&sample.masses, &sample.spec, sample.r0)?.classification;
    let re = lagrange_triangle(&sample.masses, &sample.spec, sample.r0)?;
    let spectrum = oracle::full_spectrum_with_tol(&re, tol)?;
    Ok(AgreementRow {
        sample: sample.clone(),
        closed_form,
        oracle: spectrum.classification,
        oracle_margin: spectrum.margin,
        matches: closed_form == spectrum.classification,
    })
}

/// Runs both classifiers on every sample (in parallel); rows keep the
/// input order.
pub fn agreement_harness(samples: &[Sample]) -> Result<AgreementTable> {
    agreement_harness_with_tol(samples, IMAGINARY_TOLERANCE)
}

pub fn agreement_harness_with_tol(samples: &[Sample], tol: f64) -> Result<AgreementTable> {
    let rows = samples
        .par_iter()
        .map(|s| compare(s, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(AgreementTable {
        rows,
        tolerance: tol,
    })
}
