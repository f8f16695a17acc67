//! Classification labels and tolerances shared by the closed-form criteria
//! and the brute-force spectrum.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Relative tolerance for "purely imaginary": `|Re mu| <= tol * max(1, |mu|)`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// Width of the band around an equality (`f = g`, `alpha = 0`, zero
/// discriminant) that is reported as a boundary case.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    SpectrallyStable,
    Unstable,
    Boundary,
}

impl Classification {
    /// Short lowercase label used in data files.
    pub fn label(&self) -> &'static str {
        match self {
            Self::SpectrallyStable => "stable",
            Self::Unstable => "unstable",
            Self::Boundary => "boundary",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
