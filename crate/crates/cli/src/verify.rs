//! Agreement of the closed-form criteria with the numerical spectrum, and
//! optionally of the spectrum with integrated growth rates.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use releq::agreement::{agreement_harness_with_tol, random_samples, Sample, DEFAULT_MARGIN};
use releq::dynamics::growth_check;
use releq::oracle::full_spectrum_with_tol;
use releq::{lagrange_triangle, Classification};

use crate::error::{CliError, Result};

/// Relative error allowed between measured and predicted growth rates.
pub const GROWTH_TOLERANCE: f64 = 0.05;

/// Initial perturbation (relative to the side) for growth measurements.
pub const GROWTH_PERTURBATION: f64 = 1e-8;

/// The dynamics samples use their own stream, derived from the seed.
const DYNAMICS_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSummary {
    pub checked: usize,
    pub failures: usize,
    pub worst_relative_error: f64,
    /// Failure descriptions (sample and reason).
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub mismatches: usize,
    pub max_stable_margin: Option<f64>,
    pub min_unstable_margin: Option<f64>,
    pub worst_margin_factor: Option<f64>,
    pub runtime_seconds: f64,
    pub dynamics: Option<DynamicsSummary>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.dynamics.as_ref().is_none_or(|d| d.failures == 0)
    }

    pub fn render(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:e}"));
        let mut s = format!(
            "samples: {}\nseed: {}\ntolerance: {:e}\nmismatches: {}\nmax stable margin: {}\nmin unstable margin: {}\nworst margin factor: {}\n",
            self.samples,
            self.seed,
            self.tolerance,
            self.mismatches,
            opt(self.max_stable_margin),
            opt(self.min_unstable_margin),
            opt(self.worst_margin_factor),
        );
        if let Some(d) = &self.dynamics {
            s += &format!(
                "growth rates checked: {}\ngrowth rate failures: {}\nworst growth rate error: {:.3}%\n",
                d.checked,
                d.failures,
                100.0 * d.worst_relative_error
            );
            for f in &d.failed {
                s += &format!("  failed: {f}\n");
            }
        }
        s += &format!("runtime: {:.3} s\n", self.runtime_seconds);
        s
    }
}

/// Unstable samples (by the spectrum) drawn from a stream derived from
/// `seed`, until `count` are found.
fn unstable_samples(count: usize, seed: u64, tol: f64) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(count);
    let mut round = 0u64;
    while out.len() < count {
        let batch = random_samples(2 * count.max(8), seed.wrapping_add(DYNAMICS_SEED_OFFSET).wrapping_add(round), DEFAULT_MARGIN);
        for s in batch {
            let re = lagrange_triangle(&s.masses, &s.spec, s.r0)?;
            if full_spectrum_with_tol(&re, tol)?.classification == Classification::Unstable {
                out.push(s);
                if out.len() == count {
                    break;
                }
            }
        }
        round += 1;
    }
    Ok(out)
}

pub fn check_dynamics(count: usize, seed: u64, tol: f64) -> Result<DynamicsSummary> {
    let samples = unstable_samples(count, seed, tol)?;
    let results: Vec<std::result::Result<f64, String>> = samples
        .par_iter()
        .map(|s| {
            let re = lagrange_triangle(&s.masses, &s.spec, s.r0).map_err(|e| e.to_string())?;
            let c = growth_check(&re, GROWTH_PERTURBATION).map_err(|e| format!("{s:?}: {e}"))?;
            if c.relative_error > GROWTH_TOLERANCE {
                Err(format!(
                    "{s:?}: measured {:e}, predicted {:e}",
                    c.measured, c.predicted
                ))
            } else {
                Ok(c.relative_error)
            }
        })
        .collect();
    let worst = results.iter().filter_map(|r| r.as_ref().ok()).fold(0.0, |a: f64, &b| a.max(b));
    let failed: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();
    Ok(DynamicsSummary {
        checked: count,
        failures: failed.len(),
        worst_relative_error: worst,
        failed,
    })
}

pub fn verify(samples: usize, seed: u64, tol: f64, with_dynamics: bool) -> Result<VerifySummary> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let start = Instant::now();
    let table = agreement_harness_with_tol(&random_samples(samples, seed, DEFAULT_MARGIN), tol)?;
    let dynamics = if with_dynamics {
        Some(check_dynamics(samples, seed, tol)?)
    } else {
        None
    };
    Ok(VerifySummary {
        samples,
        seed,
        tolerance: tol,
        mismatches: table.mismatches(),
        max_stable_margin: table.max_stable_margin(),
        min_unstable_margin: table.min_unstable_margin(),
        worst_margin_factor: table.worst_margin_factor(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        dynamics,
    })
}
