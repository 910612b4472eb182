//! Composite trapezoid quadrature.
//!
//! Trajectories and pulse areas share one uniform grid, so the fixed-grid
//! rule is the workhorse. [`refine_trapezoid`] halves the step until two
//! successive estimates agree and is used for regression constants.

/// Composite trapezoid rule of `f` over `[a, b]` with `intervals` equal panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    if intervals == 0 || a == b {
        return 0.0;
    }
    let h = (b - a) / intervals as f64;
    let interior: f64 = (1..intervals).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + interior)
}

/// Trapezoid rule over samples taken at the given (ordered) abscissae.
pub fn trapezoid_samples(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Running trapezoid integral; element `i` holds the integral from
/// `times[0]` to `times[i]`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return out;
    }
    out.push(0.0);
    for (t, v) in times.windows(2).zip(values.windows(2)) {
        acc += 0.5 * (t[1] - t[0]) * (v[0] + v[1]);
        out.push(acc);
    }
    out
}

/// Result of an adaptive refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub value: f64,
    pub intervals: usize,
    /// Difference between the last two estimates.
    pub last_change: f64,
    pub converged: bool,
}

/// Trapezoid rule with successive step halving, reusing previous nodes,
/// until two successive estimates agree to `tol` (absolute).
pub fn refine_trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Refined {
    const START: usize = 64;
    const MAX_LEVELS: usize = 22;
    let mut intervals = START;
    let mut estimate = trapezoid(&f, a, b, intervals);
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_LEVELS {
        let h = (b - a) / intervals as f64;
        let midpoints: f64 = (0..intervals).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
        let next = 0.5 * estimate + 0.5 * h * midpoints;
        intervals *= 2;
        last_change = (next - estimate).abs();
        estimate = next;
        if last_change <= tol {
            return Refined { value: estimate, intervals, last_change, converged: true };
        }
    }
    Refined { value: estimate, intervals, last_change, converged: false }
}
