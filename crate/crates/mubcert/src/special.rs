//! Special functions used by the emission profile and the binning machinery.

/// Re-exported error function (FDLIBM implementation, ~1 ulp).
pub use libm::{erf, erfc};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// sin(x)/x, continuous at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Series keeps full f64 precision where direct division loses digits.
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Cosine integral Ci(x) for x > 0.
///
/// Power series (gamma + ln x + sum) below x = 20, 8-term asymptotic
/// expansion Ci = f*sin - g*cos above. Absolute accuracy is ~5e-8 near the
/// switch point (series cancellation) and far better elsewhere.
pub fn cosint(x: f64) -> f64 {
    assert!(x > 0.0, "cosint requires x > 0");
    if x <= 20.0 {
        let x2 = x * x;
        let mut term = -x2 / 4.0; // k = 1: -x^2/(2*2!)
        let mut acc = term;
        let mut k = 1usize;
        while k < 60 {
            k += 1;
            let tk = 2.0 * k as f64;
            term *= -x2 * (tk - 2.0) / (tk * tk * (tk - 1.0));
            acc += term;
            if term.abs() < 1e-17 * acc.abs().max(1e-30) && tk > x {
                break;
            }
        }
        EULER_GAMMA + x.ln() + acc
    } else {
        // f(x) = (1/x) sum (-1)^m (2m)!/x^(2m), g(x) = (1/x^2) sum (-1)^m (2m+1)!/x^(2m)
        let x2 = x * x;
        let mut f = 0.0;
        let mut g = 0.0;
        let mut fact = 1.0; // (2m)!
        let mut sign = 1.0;
        for m in 0..8 {
            let tm = 2.0 * m as f64;
            if m > 0 {
                fact *= (tm - 1.0) * tm;
            }
            f += sign * fact / x2.powi(m as i32);
            g += sign * fact * (tm + 1.0) / x2.powi(m as i32);
            sign = -sign;
        }
        f /= x;
        g /= x2;
        f * x.sin() - g * x.cos()
    }
}

/// Gaussian standard deviation for a given full width at half maximum.
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (8.0 * std::f64::consts::LN_2).sqrt()
}

/// Mass of a normal distribution N(mu, sigma^2) on the interval [a, b].
pub fn gauss_mass(a: f64, b: f64, mu: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    0.5 * (erf((b - mu) / s) - erf((a - mu) / s))
}
