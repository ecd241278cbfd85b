//! Natural cubic spline interpolation on uniform grids.
//!
//! Used to refine kernel grids before oscillatory cosine transforms: the
//! coarse grid under-resolves cos(k s) phases once (grid step) * s exceeds
//! order one, while the spline interpolant stays accurate.

/// Natural cubic spline through samples `y` at `x0 + i*h`.
pub(crate) struct NaturalCubic {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the nodes (zero at both ends).
    m: Vec<f64>,
}

impl NaturalCubic {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 2 && h > 0.0);
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system: m[i-1] + 4 m[i] + m[i+1] = 6 d2[i], Thomas solve.
            let k = n - 2;
            let mut cp = vec![0.0; k];
            let mut dp = vec![0.0; k];
            let rhs = |i: usize| 6.0 * (y[i] - 2.0 * y[i + 1] + y[i + 2]) / (h * h);
            cp[0] = 1.0 / 4.0;
            dp[0] = rhs(0) / 4.0;
            for i in 1..k {
                let denom = 4.0 - cp[i - 1];
                cp[i] = 1.0 / denom;
                dp[i] = (rhs(i) - dp[i - 1]) / denom;
            }
            m[k] = dp[k - 1];
            for i in (1..k).rev() {
                m[i] = dp[i - 1] - cp[i - 1] * m[i + 1];
            }
        }
        NaturalCubic { x0, h, y, m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let pos = (x - self.x0) / self.h;
        let i = (pos.floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = x - (self.x0 + i as f64 * self.h);
        let h = self.h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
        y0 + t * (b + t * (m0 / 2.0 + t * (m1 - m0) / (6.0 * h)))
    }
}

/// Dense refinement matrix S mapping samples on an `n`-point uniform grid to
/// their natural-cubic interpolant sampled on the `r`-fold refined grid
/// (`m = r*(n-1) + 1` points). Row-major by fine index: `s[i_fine * n + j]`.
pub(crate) fn refinement_matrix(n: usize, r: usize) -> Vec<f64> {
    assert!(n >= 2 && r >= 1);
    let m = r * (n - 1) + 1;
    let mut s = vec![0.0; m * n];
    // Cardinal basis: spline through the j-th unit vector, sampled finely.
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let sp = NaturalCubic::new(0.0, 1.0, e);
        for i in 0..m {
            s[i * n + j] = sp.eval(i as f64 / r as f64);
        }
    }
    s
}
