//! Quadrature helpers: adaptive Simpson and fixed-subdivision composite rules.

/// Composite Simpson on `[a, b]` with `m` subintervals (`m` even, >= 2).
pub fn simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    debug_assert!(m >= 2 && m.is_multiple_of(2));
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Adaptive Simpson with Richardson correction. `tol` is an absolute budget
/// for the whole interval.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    adaptive_rec(f, a, b, fa, fb, fc, whole, tol, 52)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let lm = 0.5 * (a + c);
    let rm = 0.5 * (c + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (c - a) / 6.0 * (fa + 4.0 * flm + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_rec(f, a, c, fa, fc, flm, left, 0.5 * tol, depth - 1)
            + adaptive_rec(f, c, b, fc, fb, frm, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of `max(c + m*(t - t_ref), 0)` over `[a, b]` (linear positive part,
/// exact). Used for piecewise-linear damping tables.
pub fn linear_positive_part_integral(c: f64, slope: f64, t_ref: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let g = |t: f64| c + slope * (t - t_ref);
    let (ga, gb) = (g(a), g(b));
    if ga >= 0.0 && gb >= 0.0 {
        return 0.5 * (ga + gb) * (b - a);
    }
    if ga <= 0.0 && gb <= 0.0 {
        return 0.0;
    }
    // One sign change: integrate the triangle on the positive side.
    let root = t_ref - c / slope;
    if ga > 0.0 {
        0.5 * ga * (root - a)
    } else {
        0.5 * gb * (b - root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubic_exactly() {
        // Simpson is exact on polynomials up to degree 3.
        let mut f = |t: f64| 3.0 * t * t * t - t + 2.0;
        let got = simpson(&mut f, 0.0, 2.0, 2);
        let want = 3.0 * 4.0 - 2.0 + 4.0; // t^4*3/4 - t^2/2 + 2t on [0,2]
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn adaptive_simpson_hits_tolerance_on_decaying_kernel() {
        // int_1^inf t^-4 dt = 1/3; truncate far out.
        let f = |t: f64| t.powi(-4);
        let got = adaptive_simpson(&f, 1.0, 1e6, 1e-12);
        assert!((got - (1.0 / 3.0)).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn adaptive_simpson_empty_interval_is_zero() {
        let f = |t: f64| t;
        assert_eq!(adaptive_simpson(&f, 2.0, 2.0, 1e-10), 0.0);
        assert_eq!(adaptive_simpson(&f, 3.0, 2.0, 1e-10), 0.0);
    }

    #[test]
    fn linear_positive_part_handles_sign_changes() {
        // g(t) = t - 1 on [0, 2]: positive part integrates to 1/2.
        let got = linear_positive_part_integral(-1.0, 1.0, 0.0, 0.0, 2.0);
        assert!((got - 0.5).abs() < 1e-14);
        // entirely negative
        assert_eq!(linear_positive_part_integral(-1.0, 0.0, 0.0, 0.0, 2.0), 0.0);
        // entirely positive: trapezoid
        let got = linear_positive_part_integral(1.0, 1.0, 0.0, 0.0, 2.0);
        assert!((got - 4.0).abs() < 1e-14);
        // decreasing through zero: g(t) = 1 - t on [0, 2]
        let got = linear_positive_part_integral(1.0, -1.0, 0.0, 0.0, 2.0);
        assert!((got - 0.5).abs() < 1e-14);
    }
}
