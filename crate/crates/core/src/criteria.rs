//! Closed-form spectral stability criteria for the Lagrange triangle.
//!
//! Homogeneous potentials: any relative equilibrium with `a > 2` is
//! unstable, and for `a < 2` the triangle is stable iff
//! `f = sigma2 / (m1+m2+m3)^2` stays below `(1/3)((2-a)/(2+a))^2`.
//!
//! Quasihomogeneous potentials: the bound becomes the size dependent
//! `g(a, b, r0)`, and the configuration factor adds the sign condition on
//! `alpha`. For `b < 2 < a` the triangle is unstable below `z*`; for
//! `0 < b < a < 2` and `b < 2 < a` some mass triples change stability at a
//! critical side `r0*` / `z1*`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearization::{closed_form_remaining_factor, QuadraticFactor};
use crate::potentials::{MassVector, PotentialSpec};
use crate::roots::{bisect, bisect_log, RootSearch};
use crate::stability::{Classification, BOUNDARY_TOLERANCE};

/// Relative accuracy of critical radii.
pub const RADIUS_TOLERANCE: f64 = 1e-12;

/// Initial and outermost brackets for the critical-radius search.
const INITIAL_BRACKET: (f64, f64) = (1e-6, 1e6);
const OUTER_BRACKET: (f64, f64) = (1e-9, 1e9);

/// The test that decided a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// `a > 2` for a homogeneous potential.
    Theorem1,
    /// `(a w1^2 + b w2^2) / w^2 > 2` for every size (`2 < b < a`).
    Theorem2,
    Routh,
    GeneralizedRouth,
    /// `alpha < 0` at this particular size.
    AlphaSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CriticalRadii {
    /// Side at which `alpha` changes sign (`b < 2 < a`).
    pub z_star: Option<f64>,
    /// Stability threshold for `0 < b < a <= 2`.
    pub r0_star: Option<f64>,
    /// Stability threshold on `(z*, inf)` for `b < 2 < a`.
    pub z1_star: Option<f64>,
}

impl CriticalRadii {
    /// Whichever stability threshold applies.
    pub fn threshold(&self) -> Option<f64> {
        self.r0_star.or(self.z1_star)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub classification: Classification,
    pub criterion: Criterion,
    pub f_value: f64,
    /// Right-hand side of the Routh inequality (homogeneous only).
    pub routh_bound: Option<f64>,
    /// `g(a, b, r0)` (quasihomogeneous only).
    pub g_value: Option<f64>,
    /// The ratio whose positivity means `alpha < 0` (quasihomogeneous only).
    pub alpha_sign: Option<f64>,
    pub critical_radii: Option<CriticalRadii>,
    /// The remaining quadratic factor `z^2 + alpha z + beta`.
    pub quadratic: QuadraticFactor,
}

/// `f = (m1 m2 + m1 m3 + m2 m3) / (m1 + m2 + m3)^2`, in `(0, 1/3]`.
pub fn mass_function_f(masses: &MassVector) -> f64 {
    let total = masses.total();
    masses.sigma2() / (total * total)
}

/// `(1/3) ((2 - a) / (2 + a))^2`. Also the `r0 -> 0` and `r0 -> inf` limits
/// of `g` with `a` and `b` respectively.
pub fn routh_bound(a: f64) -> f64 {
    let r = (2.0 - a) / (2.0 + a);
    r * r / 3.0
}

/// Splits `r0^(a-b)` so that neither factor overflows: returns `(p, q)`
/// with `t = p / q` and `max(p, q) = 1`.
fn split_power(a: f64, b: f64, r0: f64) -> (f64, f64) {
    let log_t = (a - b) * r0.ln();
    if log_t <= 0.0 {
        (log_t.exp(), 1.0)
    } else {
        (1.0, (-log_t).exp())
    }
}

/// `g(a, b, r0) = (1/3) [(b(b-2) t + a(a-2)) / (b(b+2) t + a(a+2))]^2`,
/// `t = r0^(a-b)`.
pub fn g_function(a: f64, b: f64, r0: f64) -> f64 {
    let (p, q) = split_power(a, b, r0);
    let h = (b * (b - 2.0) * p + a * (a - 2.0) * q) / (b * (b + 2.0) * p + a * (a + 2.0) * q);
    h * h / 3.0
}

/// `[(a^2-2a) r0^(b+2) + (b^2-2b) r0^(a+2)] / [a r0^(b+2) + b r0^(a+2)]`,
/// which equals `-alpha`. Positive means unstable for every mass triple.
pub fn alpha_sign_condition(a: f64, b: f64, r0: f64) -> f64 {
    let (p, q) = split_power(a, b, r0);
    (a * (a - 2.0) * q + b * (b - 2.0) * p) / (a * q + b * p)
}

/// `z* = [-(a^2 - 2a) / (b^2 - 2b)]^(1/(a-b))`, defined for `b < 2 < a`.
pub fn z_star(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0 && b < 2.0 && a > 2.0) {
        return Err(Error::Domain(format!(
            "z* needs 0 < b < 2 < a, got a = {a}, b = {b}"
        )));
    }
    Ok((-(a * a - 2.0 * a) / (b * b - 2.0 * b)).powf(1.0 / (a - b)))
}

/// How the two exponents sit relative to 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `0 < b < a <= 2`: `g` increases from `routh_bound(a)` to `routh_bound(b)`.
    BelowTwo,
    /// `0 < b < 2 < a`: unstable below `z*`, `g` increases from 0 above it.
    Straddling,
    /// `2 <= b < a`: unstable for every mass and size.
    AboveTwo,
}

pub fn regime(a: f64, b: f64) -> Regime {
    if b >= 2.0 {
        Regime::AboveTwo
    } else if a > 2.0 {
        Regime::Straddling
    } else {
        Regime::BelowTwo
    }
}

/// The unique side `r0` with `g(a, b, r0) = f` on the monotone branch of
/// `g`, or `None` when `f` is outside the range `g` attains there (or the
/// root lies outside `[1e-9, 1e9]`).
pub fn solve_critical_radius(f: f64, a: f64, b: f64) -> Option<f64> {
    let (mut lo, hi_limit) = match regime(a, b) {
        Regime::AboveTwo => return None,
        Regime::BelowTwo => {
            if f <= routh_bound(a) || f >= routh_bound(b) {
                return None;
            }
            (INITIAL_BRACKET.0, OUTER_BRACKET.1)
        }
        Regime::Straddling => {
            if f <= 0.0 || f >= routh_bound(b) {
                return None;
            }
            (z_star(a, b).ok()?, OUTER_BRACKET.1)
        }
    };
    let lower_is_fixed = regime(a, b) == Regime::Straddling;
    let mut hi = INITIAL_BRACKET.1.max(10.0 * lo);
    let h = |r: f64| g_function(a, b, r) - f;
    loop {
        if h(lo).signum() != h(hi).signum() {
            break;
        }
        let can_lower = !lower_is_fixed && lo > OUTER_BRACKET.0;
        let can_raise = hi < hi_limit;
        if !can_lower && !can_raise {
            return None;
        }
        if can_lower {
            lo = (lo / 10.0).max(OUTER_BRACKET.0);
        }
        if can_raise {
            hi = (hi * 10.0).min(hi_limit);
        }
    }
    match bisect_log(h, lo, hi, RADIUS_TOLERANCE) {
        RootSearch::Root { x, .. } => Some(x),
        RootSearch::NoSignChange => None,
    }
}

/// Critical radii for masses with mass function `f`.
pub fn critical_radii(f: f64, a: f64, b: f64) -> CriticalRadii {
    match regime(a, b) {
        Regime::AboveTwo => CriticalRadii::default(),
        Regime::BelowTwo => CriticalRadii {
            r0_star: solve_critical_radius(f, a, b),
            ..Default::default()
        },
        Regime::Straddling => CriticalRadii {
            z_star: z_star(a, b).ok(),
            z1_star: solve_critical_radius(f, a, b),
            ..Default::default()
        },
    }
}

fn compare(f: f64, bound: f64) -> Classification {
    if f > bound + BOUNDARY_TOLERANCE {
        Classification::Unstable
    } else if f >= bound - BOUNDARY_TOLERANCE {
        Classification::Boundary
    } else {
        Classification::SpectrallyStable
    }
}

fn require_three(masses: &MassVector) -> Result<()> {
    if masses.len() != 3 {
        return Err(Error::Usage(format!(
            "triangle criteria need 3 masses, got {}",
            masses.len()
        )));
    }
    Ok(())
}

/// Classification of the Lagrange triangle under `sum m_i m_j / d^a`.
pub fn classify_homogeneous(masses: &MassVector, a: f64) -> Result<StabilityReport> {
    require_three(masses)?;
    let spec = PotentialSpec::homogeneous(a)?;
    let f = mass_function_f(masses);
    let bound = routh_bound(a);
    let (classification, criterion) = if a > 2.0 + BOUNDARY_TOLERANCE {
        (Classification::Unstable, Criterion::Theorem1)
    } else {
        (compare(f, bound), Criterion::Routh)
    };
    Ok(StabilityReport {
        classification,
        criterion,
        f_value: f,
        routh_bound: Some(bound),
        g_value: None,
        alpha_sign: None,
        critical_radii: None,
        quadratic: closed_form_remaining_factor(masses, &spec, 3f64.sqrt()),
    })
}

/// Classification of the Lagrange triangle with side `r0` under
/// `sum m_i m_j (1/d^a + 1/d^b)`.
pub fn classify_quasihomogeneous(
    masses: &MassVector,
    a: f64,
    b: f64,
    r0: f64,
) -> Result<StabilityReport> {
    require_three(masses)?;
    let spec = PotentialSpec::quasihomogeneous(a, b)?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
    }
    let f = mass_function_f(masses);
    let g = g_function(a, b, r0);
    let s = alpha_sign_condition(a, b, r0);
    let (classification, criterion) = if s > BOUNDARY_TOLERANCE {
        let criterion = if regime(a, b) == Regime::AboveTwo {
            Criterion::Theorem2
        } else {
            Criterion::AlphaSign
        };
        (Classification::Unstable, criterion)
    } else {
        // At alpha = 0 the bound g vanishes too, so f > g decides.
        (compare(f, g), Criterion::GeneralizedRouth)
    };
    Ok(StabilityReport {
        classification,
        criterion,
        f_value: f,
        routh_bound: None,
        g_value: Some(g),
        alpha_sign: Some(s),
        critical_radii: Some(critical_radii(f, a, b)),
        quadratic: closed_form_remaining_factor(masses, &spec, r0),
    })
}

/// Dispatches on the potential; `r0` is ignored for homogeneous potentials.
pub fn classify(masses: &MassVector, spec: &PotentialSpec, r0: f64) -> Result<StabilityReport> {
    match *spec {
        PotentialSpec::Homogeneous { a } => classify_homogeneous(masses, a),
        PotentialSpec::Quasihomogeneous { a, b } => classify_quasihomogeneous(masses, a, b, r0),
    }
}

/// Size-independent stability label for a quasihomogeneous potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// Spectrally stable at every size.
    Stable,
    /// Unstable at every size.
    Unstable,
    /// Unstable below the critical radius, stable at and above it.
    SizeDependent,
    /// `f` sits on one of the region boundaries.
    Boundary,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::SizeDependent => "size_dependent",
            Self::Boundary => "boundary",
        }
    }
}

/// Which of the three mass regions `f` falls in, for fixed `a > b`.
pub fn quasihomogeneous_region(f: f64, a: f64, b: f64) -> Region {
    let tol = BOUNDARY_TOLERANCE;
    let upper = routh_bound(b);
    let near = |x: f64| (f - x).abs() <= tol;
    match regime(a, b) {
        Regime::AboveTwo => Region::Unstable,
        Regime::BelowTwo => {
            let lower = routh_bound(a);
            if near(lower) || near(upper) {
                Region::Boundary
            } else if f < lower {
                Region::Stable
            } else if f < upper {
                Region::SizeDependent
            } else {
                Region::Unstable
            }
        }
        Regime::Straddling => {
            if near(upper) {
                Region::Boundary
            } else if f < upper {
                Region::SizeDependent
            } else {
                Region::Unstable
            }
        }
    }
}

/// With masses `(1 - mu, mu, m3)`, the `mu` in `(0, 1/2)` at which `f`
/// equals the Routh bound for exponent `a`. For a tiny `m3` this is the
/// critical mass ratio of the restricted problem.
pub fn restricted_mass_ratio(a: f64, m3: f64) -> Option<f64> {
    let bound = routh_bound(a);
    let f = |mu: f64| ((1.0 - mu) * mu + m3) / (1.0 + m3).powi(2) - bound;
    bisect(f, 0.0, 0.5, 1e-15).root()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn masses(m: &[f64]) -> MassVector {
        MassVector::new(m.to_vec()).unwrap()
    }

    #[test]
    fn f_values() {
        assert_relative_eq!(mass_function_f(&masses(&[1.0; 3])), 1.0 / 3.0, epsilon = 1e-16);
        assert_relative_eq!(mass_function_f(&masses(&[1.0, 1.0, 1e-12])), 0.25, epsilon = 1e-11);
        let m = masses(&[0.3, 1.1, 2.4]);
        let m2 = masses(&[0.6, 2.2, 4.8]);
        assert_relative_eq!(mass_function_f(&m), mass_function_f(&m2), max_relative = 1e-15);
    }

    #[test]
    fn routh_bound_values() {
        assert_relative_eq!(routh_bound(1.0), 1.0 / 27.0, epsilon = 1e-16);
        assert_eq!(routh_bound(2.0), 0.0);
        assert_relative_eq!(routh_bound(14.0 - 8.0 * 3f64.sqrt()), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn homogeneous_cases() {
        let r = classify_homogeneous(&masses(&[1.0; 3]), 1.0).unwrap();
        assert_eq!(r.classification, Classification::Unstable);
        assert_eq!(r.criterion, Criterion::Routh);
        let r = classify_homogeneous(&masses(&[1.0, 2.0, 3.0]), 3.0).unwrap();
        assert_eq!((r.classification, r.criterion), (Classification::Unstable, Criterion::Theorem1));
        let r = classify_homogeneous(&masses(&[1.0, 1e-3, 1e-3]), 1.0).unwrap();
        assert_eq!(r.classification, Classification::SpectrallyStable);
        assert!(r.quadratic.alpha > 0.0 && r.quadratic.beta > 0.0);
    }

    #[test]
    fn homogeneous_boundary_on_routh_surface() {
        // m = (1 - mu, mu, ~0) with f exactly on the bound.
        let mu = restricted_mass_ratio(1.0, 1e-12).unwrap();
        let r = classify_homogeneous(&masses(&[1.0 - mu, mu, 1e-12]), 1.0).unwrap();
        assert_eq!(r.classification, Classification::Boundary);
    }

    #[test]
    fn g_limits() {
        let (a, b) = (1.5, 0.4);
        assert_relative_eq!(g_function(a, b, 1e-12), routh_bound(a), epsilon = 1e-9);
        assert_relative_eq!(g_function(a, b, 1e12), routh_bound(b), epsilon = 1e-9);
    }

    #[test]
    fn z_star_closed_form() {
        assert_relative_eq!(z_star(3.0, 1.0).unwrap(), 3f64.sqrt(), epsilon = 1e-15);
        assert!(z_star(1.5, 1.0).is_err());
        assert!(z_star(3.0, 2.5).is_err());
        let z = z_star(3.0, 1.0).unwrap();
        assert!(g_function(3.0, 1.0, z).abs() < 1e-12);
        assert!(alpha_sign_condition(3.0, 1.0, z).abs() < 1e-12);
    }

    #[test]
    fn alpha_sign_by_regime() {
        for r0 in [1e-3, 0.1, 1.0, 10.0, 1e3] {
            assert!(alpha_sign_condition(3.0, 2.5, r0) > 0.0);
            assert!(alpha_sign_condition(1.5, 0.5, r0) < 0.0);
        }
    }

    #[test]
    fn critical_radius_below_two() {
        let (a, b) = (1.5, 0.5);
        let f = 0.5 * (routh_bound(a) + routh_bound(b));
        let r = solve_critical_radius(f, a, b).unwrap();
        assert_relative_eq!(g_function(a, b, r), f, max_relative = 1e-10);
        assert!(g_function(a, b, 0.9 * r) < f);
        assert!(solve_critical_radius(routh_bound(a) * 0.5, a, b).is_none());
        assert!(solve_critical_radius(routh_bound(b) * 1.01, a, b).is_none());
    }

    #[test]
    fn critical_radius_straddling() {
        let (a, b) = (3.0, 1.0);
        let z = z_star(a, b).unwrap();
        let f = 0.02;
        let z1 = solve_critical_radius(f, a, b).unwrap();
        assert!(z1 > z);
        assert_relative_eq!(g_function(a, b, z1), f, max_relative = 1e-10);
        assert!(solve_critical_radius(routh_bound(b) + 1e-3, a, b).is_none());
        assert!(solve_critical_radius(0.1, 3.0, 2.5).is_none());
    }

    #[test]
    fn quasihomogeneous_classification_flips_at_z1() {
        let m = masses(&[1.0, 0.01, 0.01]);
        let (a, b) = (3.0, 1.0);
        let r = classify_quasihomogeneous(&m, a, b, 1.0).unwrap();
        let z1 = r.critical_radii.unwrap().z1_star.unwrap();
        let below = classify_quasihomogeneous(&m, a, b, z1 * (1.0 - 1e-6)).unwrap();
        let above = classify_quasihomogeneous(&m, a, b, z1 * (1.0 + 1e-6)).unwrap();
        assert_eq!(below.classification, Classification::Unstable);
        assert_eq!(above.classification, Classification::SpectrallyStable);
        let tiny = classify_quasihomogeneous(&m, a, b, 0.5).unwrap();
        assert_eq!(tiny.criterion, Criterion::AlphaSign);
    }

    #[test]
    fn regions() {
        assert_eq!(quasihomogeneous_region(0.001, 3.0, 2.5), Region::Unstable);
        assert_eq!(quasihomogeneous_region(0.001, 1.5, 0.5), Region::Stable);
        assert_eq!(quasihomogeneous_region(0.05, 1.5, 0.5), Region::SizeDependent);
        assert_eq!(quasihomogeneous_region(0.3, 1.5, 0.5), Region::Unstable);
        assert_eq!(quasihomogeneous_region(0.01, 3.0, 1.0), Region::SizeDependent);
        assert_eq!(quasihomogeneous_region(routh_bound(1.0), 3.0, 1.0), Region::Boundary);
    }

    #[test]
    fn critical_mass_ratio_newtonian() {
        let mu = restricted_mass_ratio(1.0, 1e-12).unwrap();
        assert_relative_eq!(mu, (1.0 - (23.0f64 / 27.0).sqrt()) / 2.0, epsilon = 1e-9);
    }
}
