//! Maximization of a time-dependent figure of merit over a window `[0, t_max]`.
//!
//! A coarse grid `{0, dt, 2dt, …}` is evaluated first (in parallel, reduced in
//! time order). The interval around the best grid point is then refined by
//! ternary search down to `dt / 100`. Points where the figure is undefined are
//! skipped. Ties are broken toward the earliest time.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Values closer than this are treated as equal when picking the maximum.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Width of the refined bracket relative to the coarse step.
pub const REFINE_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanWindow {
    pub t_max: f64,
    pub dt: f64,
}

impl ScanWindow {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Argument(format!("t_max must be positive, got {t_max}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Argument(format!("dt must be positive, got {dt}")));
        }
        Ok(ScanWindow { t_max, dt })
    }

    /// Coarse grid times `i * dt` for `i = 0..=floor(t_max / dt)`.
    pub fn grid(&self) -> Vec<f64> {
        let steps = (self.t_max / self.dt + 1e-9).floor() as usize;
        (0..=steps).map(|i| i as f64 * self.dt).collect()
    }
}

/// Best point found by [`maximize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Peak<T> {
    pub t: f64,
    pub value: f64,
    pub payload: T,
}

/// Maximizes `eval` over the window. `eval` returns `None` where the figure is undefined.
pub fn maximize<T, F>(window: ScanWindow, eval: F) -> Option<Peak<T>>
where
    T: Send,
    F: Fn(f64) -> Option<(f64, T)> + Sync,
{
    let grid = window.grid();
    let samples: Vec<Option<(f64, T)>> = grid.par_iter().map(|&t| eval(t)).collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        if let Some((v, _)) = s {
            if best.is_none_or(|(_, bv)| *v > bv + TIE_TOLERANCE) {
                best = Some((i, *v));
            }
        }
    }
    let (ib, _) = best?;
    let (coarse_value, coarse_payload) = samples.into_iter().nth(ib).flatten().expect("best sample is defined");
    let mut peak = Peak {
        t: grid[ib],
        value: coarse_value,
        payload: coarse_payload,
    };

    let mut lo = if ib == 0 { 0.0 } else { grid[ib - 1] };
    let mut hi = grid.get(ib + 1).copied().unwrap_or(window.t_max).min(window.t_max);
    let target = window.dt / REFINE_FACTOR;
    let score = |t: f64| eval(t).map_or(f64::NEG_INFINITY, |(v, _)| v);
    while hi - lo > target {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if score(m1) < score(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let t_ref = 0.5 * (lo + hi);
    if let Some((v, payload)) = eval(t_ref) {
        if v > peak.value + TIE_TOLERANCE {
            peak = Peak {
                t: t_ref,
                value: v,
                payload,
            };
        }
    }
    Some(peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_endpoints() {
        let g = ScanWindow::new(1.0, 0.25).unwrap().grid();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn refines_smooth_peak() {
        let w = ScanWindow::new(5.0, 0.1).unwrap();
        let p = maximize(w, |t| Some((-(t - 2.345_678).powi(2), ()))).unwrap();
        assert!((p.t - 2.345_678).abs() < 0.1 / REFINE_FACTOR);
    }

    #[test]
    fn constant_function_picks_earliest() {
        let w = ScanWindow::new(3.0, 0.5).unwrap();
        let p = maximize(w, |_| Some((1.0, ()))).unwrap();
        assert_eq!(p.t, 0.0);
    }

    #[test]
    fn undefined_everywhere() {
        let w = ScanWindow::new(1.0, 0.5).unwrap();
        assert!(maximize::<(), _>(w, |_| None).is_none());
    }

    #[test]
    fn skips_undefined_points() {
        let w = ScanWindow::new(2.0, 0.5).unwrap();
        let p = maximize(w, |t| if t < 1.9 { None } else { Some((t, ())) }).unwrap();
        assert_eq!(p.t, 2.0);
    }

    #[test]
    fn rejects_bad_window() {
        assert!(ScanWindow::new(0.0, 0.1).is_err());
        assert!(ScanWindow::new(1.0, -0.1).is_err());
    }
}
