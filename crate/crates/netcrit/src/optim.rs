//! One-dimensional minimizers used by the Legendre transform and the envelope
//! computations.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimizer of a unimodal `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `tol` or after `max_iter`
/// reductions, and returns the best point seen together with its value.
pub fn golden_section(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (fa, fb) = (f(a), f(b));
    let mut best = if fa <= fb { (a, fa) } else { (b, fb) };
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Number of golden-section iterations that shrink `width` below `tol`.
pub fn golden_iterations(width: f64, tol: f64) -> usize {
    if width <= tol {
        return 0;
    }
    ((width / tol).ln() / (1.0 / INV_PHI).ln()).ceil() as usize + 2
}

/// Spot-checks convexity of `f` on `[a, b]` through second differences.
pub fn looks_convex(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> bool {
    const SAMPLES: usize = 17;
    let h = (b - a) / (SAMPLES - 1) as f64;
    let v: Vec<f64> = (0..SAMPLES).map(|i| f(a + i as f64 * h)).collect();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    v.windows(3)
        .all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-9 * scale)
}

/// Minimizes `f` on `[a, b]` to `tol` in the argument: golden section when the
/// convexity spot-check passes, otherwise a 4096-point scan refined locally.
pub fn minimize_convex(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let iters = golden_iterations(b - a, tol);
    if looks_convex(&f, a, b) {
        return golden_section(&f, a, b, tol, iters);
    }
    let (x, _) = dense_scan(&f, a, b, 4096);
    let h = (b - a) / 4095.0;
    golden_section(&f, (x - h).max(a), (x + h).min(b), tol, iters)
}

/// Best of `n` uniform samples of `f` on `[a, b]`.
pub fn dense_scan(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = if i + 1 == n { b } else { a + i as f64 * h };
            (x, f(x))
        })
        .fold(
            (a, f64::INFINITY),
            |best, c| if c.1 < best.1 { c } else { best },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3), -4.0, 7.0, 1e-11, 200);
        assert!((x - 0.3).abs() < 1e-10);
        assert!(fx < 1e-20);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let (x, fx) = golden_section(|x| x, 1.0, 2.0, 1e-12, 200);
        assert_eq!(x, 1.0);
        assert_eq!(fx, 1.0);
    }

    #[test]
    fn golden_finds_kink() {
        let (x, _) = golden_section(|x: f64| (x - 0.123).abs(), -1.0, 1.0, 1e-12, 200);
        assert!((x - 0.123).abs() < 1e-11);
    }

    #[test]
    fn nonconvex_falls_back_to_scan() {
        // two wells; the deeper one at x = 2
        let f = |x: f64| ((x + 2.0) * (x + 2.0)).min((x - 2.0) * (x - 2.0) - 0.5);
        assert!(!looks_convex(&f, -4.0, 4.0));
        let (x, fx) = minimize_convex(f, -4.0, 4.0, 1e-10);
        assert!((x - 2.0).abs() < 1e-8);
        assert!((fx + 0.5).abs() < 1e-12);
    }
}
