//! Root finding for scalar equations on a bounded interval: sign-change
//! bracketing on a uniform grid, then bisection.

use crate::error::{Error, Result};

/// Default number of grid panels used for bracketing.
pub const DEFAULT_PANELS: usize = 10_000;
/// Default bisection width.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSettings {
    pub panels: usize,
    pub tolerance: f64,
}

impl Default for BracketSettings {
    fn default() -> Self {
        BracketSettings {
            panels: DEFAULT_PANELS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Bisects `f` on `[lo, hi]`, which must bracket a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tolerance: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Argument(format!("[{lo}, {hi}] does not bracket a root")));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All sign-change roots of `f` strictly inside `(lo, hi)`, ascending.
///
/// Roots where `f` touches zero without changing sign are missed unless they
/// fall exactly on a grid point.
pub fn bracket_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, settings: BracketSettings) -> Result<Vec<f64>> {
    let ordered = lo.partial_cmp(&hi) == Some(std::cmp::Ordering::Less);
    if !ordered || settings.panels == 0 || settings.tolerance.is_nan() || settings.tolerance <= 0.0 {
        return Err(Error::Argument("invalid bracketing interval or settings".into()));
    }
    let p = settings.panels;
    let grid: Vec<f64> = (0..=p).map(|i| lo + (hi - lo) * i as f64 / p as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..p {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            if i > 0 {
                roots.push(grid[i]);
            }
        } else if b != 0.0 && a.signum() != b.signum() {
            roots.push(bisect(&f, grid[i], grid[i + 1], settings.tolerance)?);
        }
    }
    Ok(roots)
}
