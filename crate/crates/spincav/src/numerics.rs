//! Shared quadrature helpers.

/// Composite Simpson integral of `f` over [a, b] with `n` uniform
/// intervals. Odd `n` >= 3 closes with Simpson's 3/8 rule on the last three
/// intervals, so cubics stay exact either way; `n == 1` degrades to the
/// trapezoid rule.
pub(crate) fn integrate_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 1, "quadrature needs at least one interval");
    let h = (b - a) / n as f64;
    if n == 1 {
        return 0.5 * h * (f(a) + f(b));
    }
    let x = |i: usize| a + i as f64 * h;
    let (n_simpson, mut tail) = if n.is_multiple_of(2) {
        (n, 0.0)
    } else {
        let k = n - 3;
        let t = 3.0 * h / 8.0
            * (f(x(k)) + 3.0 * f(x(k + 1)) + 3.0 * f(x(k + 2)) + f(x(n)));
        (k, t)
    };
    if n_simpson > 0 {
        let mut acc = f(a) + f(x(n_simpson));
        for i in (1..n_simpson).step_by(2) {
            acc += 4.0 * f(x(i));
        }
        for i in (2..n_simpson).step_by(2) {
            acc += 2.0 * f(x(i));
        }
        tail += acc * h / 3.0;
    }
    tail
}

/// `n` points from `lo` to `hi` inclusive, uniform in log scale.
/// Requires 0 < lo <= hi; `n == 1` yields just `lo`.
pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 1 && lo > 0.0 && hi >= lo);
    if n == 1 {
        return vec![lo];
    }
    let ratio = hi / lo;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * ratio.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// `n` points from `lo` to `hi` inclusive, uniform spacing.
pub(crate) fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 1 && hi >= lo);
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}
