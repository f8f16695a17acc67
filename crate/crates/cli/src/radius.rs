//! Critical triangle side as a function of the mass function `f`.

use std::io::Write;

use serde::Serialize;

use releq::criteria::{regime, routh_bound, solve_critical_radius, Regime};
use releq::PotentialSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    /// Threshold for `0 < b < a <= 2`.
    R0Star,
    /// Threshold beyond `z*` for `b < 2 < a`.
    Z1Star,
    /// `2 < b < a`: no size makes the triangle stable.
    None,
}

impl RadiusKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::R0Star => "r0_star",
            Self::Z1Star => "z1_star",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusRow {
    pub f: f64,
    pub kind: RadiusKind,
    /// `None` when no critical side exists for this `f`.
    pub radius: Option<f64>,
}

fn exponents(spec: &PotentialSpec) -> Result<(f64, f64)> {
    match *spec {
        PotentialSpec::Quasihomogeneous { a, b } => Ok((a, b)),
        PotentialSpec::Homogeneous { .. } => Err(CliError::Usage(
            "radius-curve needs a quasihomogeneous potential (--b): a homogeneous one has no size dependence".into(),
        )),
    }
}

/// `count` values of `f` spread evenly over the open interval where a
/// critical side exists (empty for `2 < b < a`).
pub fn default_f_values(spec: &PotentialSpec, count: usize) -> Result<Vec<f64>> {
    let (a, b) = exponents(spec)?;
    let (lo, hi) = match regime(a, b) {
        Regime::BelowTwo => (routh_bound(a), routh_bound(b)),
        Regime::Straddling => (0.0, routh_bound(b)),
        Regime::AboveTwo => return Ok(Vec::new()),
    };
    Ok((0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .collect())
}

pub fn radius_curve(spec: &PotentialSpec, f_values: &[f64]) -> Result<Vec<RadiusRow>> {
    let (a, b) = exponents(spec)?;
    let kind = match regime(a, b) {
        Regime::BelowTwo => RadiusKind::R0Star,
        Regime::Straddling => RadiusKind::Z1Star,
        Regime::AboveTwo => RadiusKind::None,
    };
    f_values
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f <= 1.0 / 3.0) {
                return Err(CliError::Usage(format!("f = {f} outside (0, 1/3]")));
            }
            Ok(RadiusRow {
                f,
                kind,
                radius: solve_critical_radius(f, a, b),
            })
        })
        .collect()
}

/// CSV with header `f,kind,radius`; rows without a root read `NoRoot`.
pub fn write_csv<W: Write>(out: &mut W, rows: &[RadiusRow]) -> std::io::Result<()> {
    writeln!(out, "f,kind,radius")?;
    for r in rows {
        let radius = r.radius.map_or_else(|| "NoRoot".to_string(), |x| format!("{x:.16e}"));
        writeln!(out, "{:.16e},{},{radius}", r.f, r.kind.label())?;
    }
    Ok(())
}
