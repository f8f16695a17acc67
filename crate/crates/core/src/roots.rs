//! Bracketed bisection for monotone scalar functions.

/// Outcome of a bracketed search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootSearch {
    Root { x: f64, iterations: usize },
    /// `f` has the same sign at both ends of the bracket.
    NoSignChange,
}

impl RootSearch {
    pub fn root(self) -> Option<f64> {
        match self {
            Self::Root { x, .. } => Some(x),
            Self::NoSignChange => None,
        }
    }
}

const MAX_ITERATIONS: usize = 400;

fn bisect_until<F, D>(f: F, lo: f64, hi: f64, done: D) -> RootSearch
where
    F: Fn(f64) -> f64,
    D: Fn(f64, f64) -> bool,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return RootSearch::Root { x: lo, iterations: 0 };
    }
    if f_hi == 0.0 {
        return RootSearch::Root { x: hi, iterations: 0 };
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return RootSearch::NoSignChange;
    }
    let mut iterations = 0;
    while !done(lo, hi) && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return RootSearch::Root { x: mid, iterations };
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    RootSearch::Root {
        x: 0.5 * (lo + hi),
        iterations,
    }
}

/// Bisection on `[lo, hi]` until the bracket is narrower than
/// `rel_tol * max(|lo|, |hi|)`.
pub fn bisect<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> RootSearch
where
    F: Fn(f64) -> f64,
{
    bisect_until(f, lo, hi, |a, b| b - a <= rel_tol * a.abs().max(b.abs()).max(1e-300))
}

/// Bisection in `ln x` over a positive bracket, for roots that may sit
/// anywhere across many decades. The bracket width in `ln x` is the
/// relative width in `x`.
pub fn bisect_log<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> RootSearch
where
    F: Fn(f64) -> f64,
{
    assert!(lo > 0.0 && hi > 0.0, "log bisection needs a positive bracket");
    match bisect_until(|t| f(t.exp()), lo.ln(), hi.ln(), |a, b| b - a <= rel_tol) {
        RootSearch::Root { x, iterations } => RootSearch::Root {
            x: x.exp(),
            iterations,
        },
        RootSearch::NoSignChange => RootSearch::NoSignChange,
    }
}
