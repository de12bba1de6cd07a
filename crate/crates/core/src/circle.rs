//! Small helpers for working on the circle `R/Z` and its lift.

/// Reduces a lift coordinate to `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle `R/Z`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(1.0 - d)
}

/// Signed representative of `a - b` in `[-1/2, 1/2)`.
pub fn signed_diff(a: f64, b: f64) -> f64 {
    let d = wrap(a - b + 0.5);
    d - 0.5
}

/// Linear interpolation of periodic node values `u[i] = u(i/n)` at a lift coordinate.
pub fn interp_periodic(u: &[f64], x: f64) -> f64 {
    let n = u.len();
    let s = wrap(x) * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let t = s - i as f64;
    let a = u[i];
    let b = u[(i + 1) % n];
    a + t * (b - a)
}

/// Golden-section minimization of `f` on `[a, b]`; returns `(argmin, min)`.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_and_distance() {
        assert_eq!(wrap(-0.25), 0.75);
        assert_eq!(wrap(3.0), 0.0);
        assert!((circle_dist(0.05, 0.95) - 0.1).abs() < 1e-15);
        assert!((signed_diff(0.05, 0.95) - 0.1).abs() < 1e-15);
        assert!((signed_diff(0.95, 0.05) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn interpolation_wraps() {
        let u = [0.0, 1.0, 2.0, 1.0];
        assert!((interp_periodic(&u, 0.875) - 0.5).abs() < 1e-15);
        assert!((interp_periodic(&u, 1.125) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_min(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }
}
