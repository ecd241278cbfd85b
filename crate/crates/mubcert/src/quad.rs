//! Elementary quadrature rules on uniform grids.

/// Composite Simpson weights for `n` (odd, >= 3) points at spacing `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson rule needs an odd point count");
    let mut w = vec![1.0; n];
    for (i, wi) in w.iter_mut().enumerate().take(n - 1).skip(1) {
        *wi = if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    for wi in &mut w {
        *wi *= h / 3.0;
    }
    w
}

/// Composite Simpson integral of samples on a uniform grid (odd length).
pub fn simpson_from_samples(y: &[f64], h: f64) -> f64 {
    assert!(y.len() >= 3 && y.len() % 2 == 1);
    let mut acc = y[0] + y[y.len() - 1];
    for (i, v) in y.iter().enumerate().take(y.len() - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Composite Simpson integral of `f` over [a, b] with `n` (odd) points.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Trapezoid integral of samples on a uniform grid.
pub fn trapezoid_uniform(y: &[f64], h: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    (inner + 0.5 * (y[0] + y[y.len() - 1])) * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let got = simpson(|x| 3.0 * x * x * x - x + 2.0, -1.0, 2.0, 11);
        let want = 3.0 / 4.0 * (16.0 - 1.0) - (4.0 - 1.0) / 2.0 + 2.0 * 3.0;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn simpson_weights_sum_to_range() {
        let w = simpson_weights(101, 0.25);
        let total: f64 = w.iter().sum();
        assert!((total - 25.0).abs() < 1e-12);
    }

    #[test]
    fn samples_and_closure_agree() {
        let n = 41;
        let (a, b) = (0.3, 2.7);
        let h = (b - a) / (n - 1) as f64;
        let y: Vec<f64> = (0..n).map(|i| (a + i as f64 * h).sin()).collect();
        let s1 = simpson_from_samples(&y, h);
        let s2 = simpson(|x| x.sin(), a, b, n);
        assert!((s1 - s2).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let y: Vec<f64> = (0..5).map(|i| 2.0 * i as f64 + 1.0).collect();
        assert!((trapezoid_uniform(&y, 0.5) - 10.0).abs() < 1e-14);
    }
}
