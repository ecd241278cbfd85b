//! Measurement engine: joint probability densities derived from a momentum
//! kernel, detector PSF blurring, periodic coarse-graining, and coincidence
//! count ingestion.
//!
//! Densities are kept in exact reduced carriers as long as possible: the
//! momentum-momentum density is an anti-diagonal ridge (1-D weight), the
//! mixed densities are separable products, and the position-position density
//! depends only on the separation s = x_e - x_gamma (1-D profile). Gaussian
//! PSFs act on these carriers in closed form; probabilities are integrated
//! with analytic bin-edge splitting so no O(grid step) binning bias enters.

use crate::cherenkov::MomentumKernel;
use crate::error::{Error, Result};
use crate::quad::{simpson_from_samples, simpson_weights, trapezoid_uniform};
use crate::special::{gauss_mass, sigma_from_fwhm};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Step of the separation grid used by the position-position profile, um.
const DS_S: f64 = 0.0025;

/// Which variable a marginal axis represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisLabel {
    Position,
    Momentum,
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisLabel::Position => write!(f, "position"),
            BasisLabel::Momentum => write!(f, "momentum"),
        }
    }
}

/// Periodic coarse-graining mask: period `t`, `d` outcomes, pattern center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBinning {
    pub t: f64,
    pub d: usize,
    pub center: f64,
}

impl PeriodicBinning {
    pub fn new(t: f64, d: usize, center: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("period must be > 0, got {t}")));
        }
        if d < 2 {
            return Err(Error::InvalidInput(format!("need d >= 2 outcomes, got {d}")));
        }
        Ok(PeriodicBinning { t, d, center })
    }

    /// Bin width Delta = T/d.
    pub fn delta(&self) -> f64 {
        self.t / self.d as f64
    }

    /// Periodic outcome index n(v) = floor(((v - center) mod T)/Delta).
    pub fn outcome(&self, v: f64) -> usize {
        let r = (v - self.center).rem_euclid(self.t);
        ((r / self.delta()) as usize).min(self.d - 1)
    }

    /// Probability mass a Gaussian N(mu, sigma) assigns to outcome `bin`;
    /// sigma = 0 degenerates to the sharp indicator.
    pub fn gauss_bin_mass(&self, bin: usize, mu: f64, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return if self.outcome(mu) == bin { 1.0 } else { 0.0 };
        }
        let delta = self.delta();
        let base = self.center + bin as f64 * delta;
        let lo = mu - 9.0 * sigma;
        let hi = mu + 9.0 * sigma;
        let m0 = ((lo - base) / self.t).floor() as i64 - 1;
        let m1 = ((hi - base) / self.t).ceil() as i64 + 1;
        let mut tot = 0.0;
        for m in m0..=m1 {
            let a = base + m as f64 * self.t;
            tot += gauss_mass(a, a + delta, mu, sigma);
        }
        tot
    }
}

/// Outcome index of `value` under `binning`.
pub fn bin_outcome(value: f64, binning: &PeriodicBinning) -> usize {
    binning.outcome(value)
}

/// A conjugate pair of periodic binnings satisfying the mutual-unbiasedness
/// period constraint T_x * T_p = 2 pi d / u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MubPair {
    pub pos: PeriodicBinning,
    pub mom: PeriodicBinning,
    pub u: u64,
}

impl MubPair {
    pub fn new(pos: PeriodicBinning, mom: PeriodicBinning, u: u64) -> Result<Self> {
        if pos.d != mom.d {
            return Err(Error::InvalidInput(format!(
                "outcome counts differ: {} vs {}",
                pos.d, mom.d
            )));
        }
        if u == 0 {
            return Err(Error::InvalidInput("u must be a positive integer".into()));
        }
        let d = pos.d as u64;
        // Coprimality: u*v/d is never an integer for v = 1..d-1.
        for v in 1..d {
            if (u * v) % d == 0 {
                return Err(Error::InvalidInput(format!(
                    "u = {u} fails the coprimality condition for d = {d}"
                )));
            }
        }
        let target = 2.0 * std::f64::consts::PI * pos.d as f64 / u as f64;
        let prod = pos.t * mom.t;
        if ((prod - target) / target).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "period product {prod:.15} violates T_x*T_p = {target:.15} beyond 1e-12"
            )));
        }
        Ok(MubPair { pos, mom, u })
    }

    /// The d = 2, u = 1 pair with T_p = 4 pi / T_x and given pattern centers.
    pub fn conjugate_from_tx(t_x: f64, x_cen: f64, p_cen: f64) -> Result<Self> {
        let pos = PeriodicBinning::new(t_x, 2, x_cen)?;
        let mom = PeriodicBinning::new(4.0 * std::f64::consts::PI / t_x, 2, p_cen)?;
        MubPair::new(pos, mom, 1)
    }
}

/// Detector point-spread FWHMs per variable (um for position, 1/um for
/// momentum); zero means an ideal detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionProfile {
    pub fwhm_x_e: f64,
    pub fwhm_p_e: f64,
    pub fwhm_x_g: f64,
    pub fwhm_p_g: f64,
}

impl ResolutionProfile {
    pub fn ideal() -> Self {
        ResolutionProfile {
            fwhm_x_e: 0.0,
            fwhm_p_e: 0.0,
            fwhm_x_g: 0.0,
            fwhm_p_g: 0.0,
        }
    }

    /// The experimental-state-of-the-art profile: 0.1 um / 0.2 per um for
    /// the electron, 1.2 um / 0.2 per um for the photon.
    pub fn table1_experimental() -> Self {
        ResolutionProfile {
            fwhm_x_e: 0.1,
            fwhm_p_e: 0.2,
            fwhm_x_g: 1.2,
            fwhm_p_g: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fwhm_x_e", self.fwhm_x_e),
            ("fwhm_p_e", self.fwhm_p_e),
            ("fwhm_x_g", self.fwhm_x_g),
            ("fwhm_p_g", self.fwhm_p_g),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// PSF standard deviation for a given particle/variable pair.
    fn sigma(&self, electron: bool, basis: BasisLabel) -> f64 {
        let fwhm = match (electron, basis) {
            (true, BasisLabel::Position) => self.fwhm_x_e,
            (true, BasisLabel::Momentum) => self.fwhm_p_e,
            (false, BasisLabel::Position) => self.fwhm_x_g,
            (false, BasisLabel::Momentum) => self.fwhm_p_g,
        };
        sigma_from_fwhm(fwhm)
    }
}

/// Which mixed-basis density to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixedKind {
    /// Electron position, photon momentum.
    XePg,
    /// Electron momentum, photon position.
    PeXg,
}

/// Internal representation of a joint density.
#[derive(Debug, Clone)]
enum Carrier {
    /// Anti-diagonal ridge p_e = -k with weight g(k); Gaussian cross-widths
    /// appear once a PSF is applied (delta ridge has both sigmas zero).
    Ridge {
        k_axis: Vec<f64>,
        weight: Vec<f64>,
        sigma_e: f64,
        sigma_g: f64,
    },
    /// Product of a uniform (possibly blurred) position window and the
    /// kernel-diagonal momentum marginal.
    Separable {
        k_axis: Vec<f64>,
        weight: Vec<f64>,
        sigma_k: f64,
        momentum_is_electron: bool,
        x_max: f64,
        sigma_x: f64,
    },
    /// Position-position density q(x_e - x_gamma) restricted to the square
    /// window [-x_max, x_max]^2; q sampled on s = 0, ds, .., with q even.
    Shift {
        ds: f64,
        q: Vec<f64>,
        x_max: f64,
        sigma_applied: f64,
    },
    /// Materialized rectangular grid, row index = electron axis.
    Grid {
        axis_e: Vec<f64>,
        axis_g: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A labeled two-particle probability density for one basis pair.
#[derive(Debug, Clone)]
pub struct JointDensity {
    pub basis_e: BasisLabel,
    pub basis_g: BasisLabel,
    carrier: Carrier,
}

/// A d x d joint probability table for one basis pair.
#[derive(Debug, Clone, Serialize)]
pub struct JointProbTable {
    pub basis_e: BasisLabel,
    pub basis_g: BasisLabel,
    pub d: usize,
    /// Row-major probabilities, electron outcome first.
    pub p: Vec<f64>,
    /// Multinomial standard errors when built from counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<Vec<f64>>,
    /// Set when grid resolution is too coarse for the requested bins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_warning: Option<String>,
}

impl JointProbTable {
    fn from_unnormalized(
        basis_e: BasisLabel,
        basis_g: BasisLabel,
        d: usize,
        mut p: Vec<f64>,
    ) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NonConvergence(format!(
                "joint probability mass is not positive finite: {total}"
            )));
        }
        for v in &mut p {
            *v /= total;
            if *v < 0.0 {
                if *v > -1e-12 {
                    *v = 0.0;
                } else {
                    return Err(Error::NonConvergence(format!(
                        "negative joint probability {v}"
                    )));
                }
            }
        }
        Ok(JointProbTable {
            basis_e,
            basis_g,
            d,
            p,
            std_err: None,
            precision_warning: None,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.d + j]
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Sum of the diagonal entries P(i, i).
    pub fn diag_sum(&self) -> f64 {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    /// Sum of the fully anti-correlated entries P(i, d-1-i).
    pub fn anti_diag_sum(&self) -> f64 {
        (0..self.d).map(|i| self.get(i, self.d - 1 - i)).sum()
    }
}

/// Mirror the kernel axis and diagonal onto the full axis [-K, K].
fn mirrored_marginal(kernel: &MomentumKernel) -> (Vec<f64>, Vec<f64>) {
    let n = kernel.size();
    let m = 2 * n - 1;
    let mut k_full = Vec::with_capacity(m);
    let mut g_full = Vec::with_capacity(m);
    for i in 0..m {
        let j = (i as i64 - (n as i64 - 1)).unsigned_abs() as usize;
        let sign = if i < n - 1 { -1.0 } else { 1.0 };
        k_full.push(sign * kernel.k_axis[j]);
        g_full.push(kernel.value(j, j));
    }
    (k_full, g_full)
}

/// Momentum-momentum density: exact anti-diagonal ridge with the kernel
/// diagonal as weight (the state normalization already accounts for the
/// detection region, so no extra ridge normalization is applied).
pub fn density_pp(kernel: &MomentumKernel) -> JointDensity {
    let (k_axis, weight) = mirrored_marginal(kernel);
    JointDensity {
        basis_e: BasisLabel::Momentum,
        basis_g: BasisLabel::Momentum,
        carrier: Carrier::Ridge {
            k_axis,
            weight,
            sigma_e: 0.0,
            sigma_g: 0.0,
        },
    }
}

/// Mixed density: uniform in the position variable over [-x_max, x_max],
/// proportional to the kernel diagonal in the momentum variable.
pub fn density_mixed(kernel: &MomentumKernel, which: MixedKind, x_max: f64) -> Result<JointDensity> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidInput(format!("x_max must be > 0, got {x_max}")));
    }
    let (k_axis, weight) = mirrored_marginal(kernel);
    let momentum_is_electron = matches!(which, MixedKind::PeXg);
    let (basis_e, basis_g) = match which {
        MixedKind::XePg => (BasisLabel::Position, BasisLabel::Momentum),
        MixedKind::PeXg => (BasisLabel::Momentum, BasisLabel::Position),
    };
    Ok(JointDensity {
        basis_e,
        basis_g,
        carrier: Carrier::Separable {
            k_axis,
            weight,
            sigma_k: 0.0,
            momentum_is_electron,
            x_max,
            sigma_x: 0.0,
        },
    })
}

/// Evaluate the separation profile q(s) = 4 * double integral of
/// f(a, b) cos(a s) cos(b s) over the positive kernel quadrant.
///
/// The coarse kernel grid cannot carry the oscillation cos(k s) at large s,
/// so the kernel is interpolated by a natural-cubic refinement matrix onto a
/// grid fine enough that h_fine * s_max <= 0.68, and the quadrature runs at
/// the fine resolution while the kernel stays at its native size.
fn correlation_profile(kernel: &MomentumKernel, s_values: &[f64]) -> Vec<f64> {
    let n = kernel.size();
    let h = kernel.step();
    let s_big = s_values.iter().cloned().fold(0.0_f64, f64::max);
    let r = (((h * s_big) / 0.68).ceil() as usize).max(1);
    let nf = r * (n - 1) + 1;
    let hf = h / r as f64;
    let refine = crate::spline::refinement_matrix(n, r);
    let wf = simpson_weights(nf, hf);
    let f = kernel.values();
    s_values
        .par_iter()
        .map(|&sv| {
            // d_j = sum_f wf_f cos(k_f s) S[f, j]
            let mut d = vec![0.0; n];
            for fi in 0..nf {
                let c = wf[fi] * (hf * fi as f64 * sv).cos();
                let row = &refine[fi * n..(fi + 1) * n];
                for (dj, sj) in d.iter_mut().zip(row.iter()) {
                    *dj += c * sj;
                }
            }
            // q = 4 d^T F d
            let mut acc = 0.0;
            for i in 0..n {
                let row = &f[i * n..(i + 1) * n];
                let mut ri = 0.0;
                for j in 0..n {
                    ri += row[j] * d[j];
                }
                acc += d[i] * ri;
            }
            4.0 * acc
        })
        .collect()
}

/// Position-position density over the analysis window [-x_max, x_max]^2.
///
/// The density depends only on s = x_e - x_gamma; the even profile q(s) is
/// evaluated on a uniform grid out to 2 x_max. Convergence is checked by
/// extending the profile to 3 x_max (the window grown by 50%): if the added
/// tail carries more than 1% of the profile mass the result is rejected.
pub fn density_xx(kernel: &MomentumKernel, x_max: f64) -> Result<JointDensity> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidInput(format!("x_max must be > 0, got {x_max}")));
    }
    let ds = DS_S;
    let n_s = (2.0 * x_max / ds) as usize;
    let ds_tail = 10.0 * ds;
    let n_tail = (x_max / ds_tail) as usize;
    let mut s_all: Vec<f64> = (0..=n_s).map(|i| i as f64 * ds).collect();
    let s_join = s_all[n_s];
    s_all.extend((1..=n_tail).map(|i| s_join + i as f64 * ds_tail));
    let q_all = correlation_profile(kernel, &s_all);

    let mut q: Vec<f64> = q_all[..=n_s].to_vec();
    let q_max = q.iter().cloned().fold(0.0_f64, f64::max);
    if !(q_max > 0.0) {
        return Err(Error::NonConvergence(
            "separation profile has no positive mass".into(),
        ));
    }
    for v in &mut q {
        if *v < 0.0 {
            if *v > -1e-9 * q_max {
                *v = 0.0;
            } else {
                return Err(Error::NonConvergence(format!(
                    "separation profile significantly negative: {v:.3e} vs peak {q_max:.3e}"
                )));
            }
        }
    }
    let mass_in = trapezoid_uniform(&q, ds);
    let mut tail = vec![q[n_s]];
    tail.extend_from_slice(&q_all[n_s + 1..]);
    let mass_tail = trapezoid_uniform(&tail, ds_tail);
    let rel = mass_tail.abs() / (mass_in + mass_tail).abs();
    if rel > 0.01 {
        return Err(Error::NonConvergence(format!(
            "position window too small: growing x_max by 50% changes the profile mass by {:.2}%",
            100.0 * rel
        )));
    }
    Ok(JointDensity {
        basis_e: BasisLabel::Position,
        basis_g: BasisLabel::Position,
        carrier: Carrier::Shift {
            ds,
            q,
            x_max,
            sigma_applied: 0.0,
        },
    })
}

/// Mirror-extend q to negative indices and zero beyond the table, then
/// convolve with a sum-normalized discrete Gaussian.
fn blur_even_profile(q: &[f64], ds: f64, sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return q.to_vec();
    }
    let m = (6.0 * sigma / ds).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * m + 1) as usize);
    for t in -m..=m {
        let x = t as f64 * ds;
        kernel.push((-x * x / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }
    let len = q.len() as i64;
    (0..len)
        .map(|i| {
            let mut acc = 0.0;
            for t in -m..=m {
                let idx = (i + t).abs();
                if idx < len {
                    acc += kernel[(t + m) as usize] * q[idx as usize];
                }
            }
            acc
        })
        .collect()
}

/// Blur a density with the Gaussian PSFs of `resolution`.
///
/// Reduced carriers absorb the blur in closed form: ridge and separable
/// widths add in quadrature, and the shift profile is convolved once with
/// the combined variance of both position PSFs. Grids are convolved with a
/// 6-sigma-truncated separable kernel and renormalized over the retained
/// window. A PSF wider than half the axis window is rejected.
pub fn apply_psf(density: &JointDensity, resolution: &ResolutionProfile) -> Result<JointDensity> {
    resolution.validate()?;
    let sig_e = resolution.sigma(true, density.basis_e);
    let sig_g = resolution.sigma(false, density.basis_g);
    let reject = |name: &str, sigma: f64, span: f64| -> Result<()> {
        if sigma > span / 2.0 {
            return Err(Error::InvalidInput(format!(
                "{name} PSF sigma {sigma:.4} exceeds half the axis window {span:.4}"
            )));
        }
        Ok(())
    };
    let carrier = match &density.carrier {
        Carrier::Ridge {
            k_axis,
            weight,
            sigma_e,
            sigma_g,
        } => {
            let span = k_axis[k_axis.len() - 1] - k_axis[0];
            reject("electron", sig_e, span)?;
            reject("photon", sig_g, span)?;
            Carrier::Ridge {
                k_axis: k_axis.clone(),
                weight: weight.clone(),
                sigma_e: sigma_e.hypot(sig_e),
                sigma_g: sigma_g.hypot(sig_g),
            }
        }
        Carrier::Separable {
            k_axis,
            weight,
            sigma_k,
            momentum_is_electron,
            x_max,
            sigma_x,
        } => {
            let (sig_k_new, sig_x_new) = if *momentum_is_electron {
                (sig_e, sig_g)
            } else {
                (sig_g, sig_e)
            };
            reject("momentum", sig_k_new, k_axis[k_axis.len() - 1] - k_axis[0])?;
            reject("position", sig_x_new, 2.0 * x_max)?;
            Carrier::Separable {
                k_axis: k_axis.clone(),
                weight: weight.clone(),
                sigma_k: sigma_k.hypot(sig_k_new),
                momentum_is_electron: *momentum_is_electron,
                x_max: *x_max,
                sigma_x: sigma_x.hypot(sig_x_new),
            }
        }
        Carrier::Shift {
            ds,
            q,
            x_max,
            sigma_applied,
        } => {
            let combined = sig_e.hypot(sig_g);
            reject("position", combined, 2.0 * x_max)?;
            Carrier::Shift {
                ds: *ds,
                q: blur_even_profile(q, *ds, combined),
                x_max: *x_max,
                sigma_applied: sigma_applied.hypot(combined),
            }
        }
        Carrier::Grid {
            axis_e,
            axis_g,
            values,
        } => {
            let he = axis_e[1] - axis_e[0];
            let hg = axis_g[1] - axis_g[0];
            reject("electron", sig_e, axis_e[axis_e.len() - 1] - axis_e[0])?;
            reject("photon", sig_g, axis_g[axis_g.len() - 1] - axis_g[0])?;
            let blurred = blur_grid(values, axis_e.len(), axis_g.len(), he, hg, sig_e, sig_g);
            let mut d = JointDensity {
                basis_e: density.basis_e,
                basis_g: density.basis_g,
                carrier: Carrier::Grid {
                    axis_e: axis_e.clone(),
                    axis_g: axis_g.clone(),
                    values: blurred,
                },
            };
            d.renormalize_grid()?;
            return Ok(d);
        }
    };
    Ok(JointDensity {
        basis_e: density.basis_e,
        basis_g: density.basis_g,
        carrier,
    })
}

/// Separable truncated-Gaussian convolution of a row-major grid; values
/// outside the window are treated as zero (mass renormalized afterwards).
fn blur_grid(
    values: &[f64],
    n_e: usize,
    n_g: usize,
    h_e: f64,
    h_g: f64,
    sig_e: f64,
    sig_g: f64,
) -> Vec<f64> {
    let kernel_1d = |h: f64, sigma: f64| -> Vec<f64> {
        if sigma == 0.0 {
            return vec![1.0];
        }
        let m = (6.0 * sigma / h).ceil() as i64;
        let mut k: Vec<f64> = (-m..=m)
            .map(|t| {
                let x = t as f64 * h;
                (-x * x / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let s: f64 = k.iter().sum();
        for v in &mut k {
            *v /= s;
        }
        k
    };
    let ke = kernel_1d(h_e, sig_e);
    let kg = kernel_1d(h_g, sig_g);
    let me = (ke.len() / 2) as i64;
    let mg = (kg.len() / 2) as i64;
    // Row pass (photon axis), then column pass (electron axis).
    let mut tmp = vec![0.0; values.len()];
    for i in 0..n_e {
        for j in 0..n_g as i64 {
            let mut acc = 0.0;
            for (ti, kv) in kg.iter().enumerate() {
                let idx = j + ti as i64 - mg;
                if idx >= 0 && idx < n_g as i64 {
                    acc += kv * values[i * n_g + idx as usize];
                }
            }
            tmp[i * n_g + j as usize] = acc;
        }
    }
    let mut out = vec![0.0; values.len()];
    for j in 0..n_g {
        for i in 0..n_e as i64 {
            let mut acc = 0.0;
            for (ti, kv) in ke.iter().enumerate() {
                let idx = i + ti as i64 - me;
                if idx >= 0 && idx < n_e as i64 {
                    acc += kv * tmp[idx as usize * n_g + j];
                }
            }
            out[i as usize * n_g + j] = acc;
        }
    }
    out
}

impl JointDensity {
    /// Total probability mass under the density's native quadrature.
    pub fn integral(&self) -> f64 {
        match &self.carrier {
            Carrier::Ridge { k_axis, weight, .. } => {
                simpson_from_samples(weight, k_axis[1] - k_axis[0])
            }
            Carrier::Separable { k_axis, weight, .. } => {
                simpson_from_samples(weight, k_axis[1] - k_axis[0])
            }
            Carrier::Shift { ds, q, x_max, .. } => {
                // The density is q(|x_e - x_g|)/N with N the window integral
                // of q itself, so the mass is 1 whenever N is positive finite.
                let n = window_norm(q, *ds, *x_max);
                if n > 0.0 && n.is_finite() {
                    1.0
                } else {
                    f64::NAN
                }
            }
            Carrier::Grid {
                axis_e,
                axis_g,
                values,
            } => grid_mass(values, axis_e, axis_g),
        }
    }

    /// The 1-D separation profile (step, samples) of a position-position
    /// density, if this density has one.
    pub fn shift_profile(&self) -> Option<(f64, &[f64])> {
        match &self.carrier {
            Carrier::Shift { ds, q, .. } => Some((*ds, q)),
            _ => None,
        }
    }

    /// Ridge parts (axis, weight, sigma_e, sigma_g) if this is a ridge.
    pub fn ridge_parts(&self) -> Option<(&[f64], &[f64], f64, f64)> {
        match &self.carrier {
            Carrier::Ridge {
                k_axis,
                weight,
                sigma_e,
                sigma_g,
            } => Some((k_axis, weight, *sigma_e, *sigma_g)),
            _ => None,
        }
    }

    /// Half-width of the position window, where the carrier has one.
    pub fn x_max(&self) -> Option<f64> {
        match &self.carrier {
            Carrier::Separable { x_max, .. } | Carrier::Shift { x_max, .. } => Some(*x_max),
            _ => None,
        }
    }

    /// Construct a grid-backed density directly (axes strictly increasing
    /// uniform, values row-major by the electron axis); renormalizes.
    pub fn from_grid(
        basis_e: BasisLabel,
        basis_g: BasisLabel,
        axis_e: Vec<f64>,
        axis_g: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if axis_e.len() < 2 || axis_g.len() < 2 || values.len() != axis_e.len() * axis_g.len() {
            return Err(Error::InvalidInput(
                "grid axes need >= 2 points and a matching value matrix".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "grid values must be finite and non-negative".into(),
            ));
        }
        let mut d = JointDensity {
            basis_e,
            basis_g,
            carrier: Carrier::Grid {
                axis_e,
                axis_g,
                values,
            },
        };
        d.renormalize_grid()?;
        Ok(d)
    }

    fn renormalize_grid(&mut self) -> Result<()> {
        if let Carrier::Grid {
            axis_e,
            axis_g,
            values,
        } = &mut self.carrier
        {
            let mass = grid_mass(values, axis_e, axis_g);
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::NonConvergence(format!(
                    "grid density mass is not positive finite: {mass}"
                )));
            }
            for v in values.iter_mut() {
                *v /= mass;
            }
        }
        Ok(())
    }

    /// Materialize any carrier onto an n_e x n_g grid (reduced carriers are
    /// sampled; delta ridges cannot be represented and are rejected).
    pub fn materialize(&self, n_e: usize, n_g: usize) -> Result<JointDensity> {
        if n_e < 2 || n_g < 2 {
            return Err(Error::InvalidInput("grid needs >= 2 points per axis".into()));
        }
        let linspace = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let (axis_e, axis_g, values) = match &self.carrier {
            Carrier::Ridge {
                k_axis,
                weight,
                sigma_e,
                sigma_g,
            } => {
                if *sigma_e == 0.0 || *sigma_g == 0.0 {
                    return Err(Error::InvalidInput(
                        "cannot materialize a delta ridge; apply a PSF first".into(),
                    ));
                }
                let k_lo = k_axis[0];
                let k_hi = k_axis[k_axis.len() - 1];
                let ax_e = linspace(k_lo - 6.0 * sigma_e, k_hi + 6.0 * sigma_e, n_e);
                let ax_g = linspace(k_lo - 6.0 * sigma_g, k_hi + 6.0 * sigma_g, n_g);
                let h = k_axis[1] - k_axis[0];
                let vals: Vec<f64> = ax_e
                    .par_iter()
                    .flat_map_iter(|&pe| {
                        ax_g.iter()
                            .map(|&kg| {
                                let mut acc = 0.0;
                                for (i, &k) in k_axis.iter().enumerate() {
                                    let w = if i == 0 || i == k_axis.len() - 1 {
                                        0.5
                                    } else {
                                        1.0
                                    };
                                    acc += w
                                        * weight[i]
                                        * gauss_pdf(pe, -k, *sigma_e)
                                        * gauss_pdf(kg, k, *sigma_g);
                                }
                                acc * h
                            })
                            .collect::<Vec<f64>>()
                    })
                    .collect();
                (ax_e, ax_g, vals)
            }
            Carrier::Separable {
                k_axis,
                weight,
                sigma_k,
                momentum_is_electron,
                x_max,
                sigma_x,
            } => {
                let x_axis = linspace(-x_max, *x_max, if *momentum_is_electron { n_g } else { n_e });
                let n_k = if *momentum_is_electron { n_e } else { n_g };
                let k_ax = linspace(k_axis[0], k_axis[k_axis.len() - 1], n_k);
                let h = k_axis[1] - k_axis[0];
                let sign = if *momentum_is_electron { -1.0 } else { 1.0 };
                // Momentum marginal, blurred if needed, sampled at k_ax.
                let marg: Vec<f64> = k_ax
                    .iter()
                    .map(|&kv| {
                        if *sigma_k == 0.0 {
                            // The carrier axis is uniform; interpolate linearly.
                            interp_uniform(k_axis, weight, sign * kv)
                        } else {
                            let mut acc = 0.0;
                            for (i, &k) in k_axis.iter().enumerate() {
                                let w = if i == 0 || i == k_axis.len() - 1 { 0.5 } else { 1.0 };
                                acc += w * weight[i] * gauss_pdf(sign * kv, k, *sigma_k);
                            }
                            acc * h
                        }
                    })
                    .collect();
                let u: Vec<f64> = x_axis
                    .iter()
                    .map(|&x| blurred_window(x, *x_max, *sigma_x))
                    .collect();
                let mut vals = vec![0.0; n_e * n_g];
                for i in 0..n_e {
                    for j in 0..n_g {
                        let (uv, mv) = if *momentum_is_electron {
                            (u[j], marg[i])
                        } else {
                            (u[i], marg[j])
                        };
                        vals[i * n_g + j] = uv * mv;
                    }
                }
                if *momentum_is_electron {
                    (k_ax, x_axis, vals)
                } else {
                    (x_axis, k_ax, vals)
                }
            }
            Carrier::Shift { ds, q, x_max, .. } => {
                let ax = linspace(-x_max, *x_max, n_e);
                let ay = linspace(-x_max, *x_max, n_g);
                let norm = window_norm(q, *ds, *x_max);
                let mut vals = vec![0.0; n_e * n_g];
                for (i, &xe) in ax.iter().enumerate() {
                    for (j, &xg) in ay.iter().enumerate() {
                        let s = (xe - xg).abs();
                        vals[i * n_g + j] = interp_profile(q, *ds, s) / norm;
                    }
                }
                (ax, ay, vals)
            }
            Carrier::Grid {
                axis_e,
                axis_g,
                values,
            } => (axis_e.clone(), axis_g.clone(), values.clone()),
        };
        let mut out = JointDensity {
            basis_e: self.basis_e,
            basis_g: self.basis_g,
            carrier: Carrier::Grid {
                axis_e,
                axis_g,
                values,
            },
        };
        out.renormalize_grid()?;
        Ok(out)
    }

    /// CSV export in the carrier's native form, with axes and blur widths
    /// recorded in header comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# basis_e,{}\n# basis_g,{}\n", self.basis_e, self.basis_g));
        match &self.carrier {
            Carrier::Ridge {
                k_axis,
                weight,
                sigma_e,
                sigma_g,
            } => {
                out.push_str("# form,ridge (support p_e = -k_gamma)\n");
                out.push_str(&format!("# sigma_e,{sigma_e:.16e}\n# sigma_g,{sigma_g:.16e}\n"));
                out.push_str("k,weight\n");
                for (k, w) in k_axis.iter().zip(weight.iter()) {
                    out.push_str(&format!("{k:.16e},{w:.16e}\n"));
                }
            }
            Carrier::Separable {
                k_axis,
                weight,
                sigma_k,
                momentum_is_electron,
                x_max,
                sigma_x,
            } => {
                out.push_str("# form,separable (uniform position window x momentum marginal)\n");
                out.push_str(&format!(
                    "# x_max,{x_max:.16e}\n# sigma_x,{sigma_x:.16e}\n# sigma_k,{sigma_k:.16e}\n# momentum_particle,{}\n",
                    if *momentum_is_electron { "electron" } else { "photon" }
                ));
                out.push_str("k,weight\n");
                for (k, w) in k_axis.iter().zip(weight.iter()) {
                    out.push_str(&format!("{k:.16e},{w:.16e}\n"));
                }
            }
            Carrier::Shift { ds, q, x_max, sigma_applied } => {
                out.push_str("# form,shift (density of s = x_e - x_gamma)\n");
                out.push_str(&format!(
                    "# x_max,{x_max:.16e}\n# ds,{ds:.16e}\n# sigma_applied,{sigma_applied:.16e}\n"
                ));
                out.push_str("s,q\n");
                for (i, v) in q.iter().enumerate() {
                    out.push_str(&format!("{:.16e},{v:.16e}\n", i as f64 * ds));
                }
            }
            Carrier::Grid {
                axis_e,
                axis_g,
                values,
            } => {
                out.push_str("# form,grid (row-major, electron axis first)\n");
                let fmt_axis = |ax: &[f64]| {
                    ax.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
                };
                out.push_str(&format!("# axis_e,{}\n", fmt_axis(axis_e)));
                out.push_str(&format!("# axis_g,{}\n", fmt_axis(axis_g)));
                for i in 0..axis_e.len() {
                    let row: Vec<String> = (0..axis_g.len())
                        .map(|j| format!("{:.16e}", values[i * axis_g.len() + j]))
                        .collect();
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn gauss_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Uniform window [-x_max, x_max] blurred with a Gaussian, as a density in x
/// (unnormalized by the window measure 2 x_max).
fn blurred_window(x: f64, x_max: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        if x.abs() <= x_max {
            1.0 / (2.0 * x_max)
        } else {
            0.0
        }
    } else {
        gauss_mass(-x_max, x_max, x, sigma) / (2.0 * x_max)
    }
}

/// Linear interpolation of the even profile q at separation s >= 0.
fn interp_profile(q: &[f64], ds: f64, s: f64) -> f64 {
    let t = s / ds;
    let i = t.floor() as usize;
    if i + 1 >= q.len() {
        return *q.last().unwrap();
    }
    let frac = t - i as f64;
    q[i] * (1.0 - frac) + q[i + 1] * frac
}

/// Linear interpolation on a uniform axis (clamped to the edges).
fn interp_uniform(axis: &[f64], values: &[f64], x: f64) -> f64 {
    let h = axis[1] - axis[0];
    let t = (x - axis[0]) / h;
    if t <= 0.0 {
        return values[0];
    }
    let i = t.floor() as usize;
    if i + 1 >= values.len() {
        return *values.last().unwrap();
    }
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// Window normalization of a shift carrier: integral of q(|x_e - x_g|) over
/// the square window = integral of q(|s|) (2 x_max - |s|) ds.
fn window_norm(q: &[f64], ds: f64, x_max: f64) -> f64 {
    let smax = 2.0 * x_max;
    let overlap: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(i, &qv)| {
            let s = i as f64 * ds;
            qv * (smax - s).max(0.0)
        })
        .collect();
    // Both signs of s; s = 0 counted once.
    2.0 * trapezoid_uniform(&overlap, ds) - overlap[0] * ds
}

/// 2-D trapezoid mass of a row-major grid.
fn grid_mass(values: &[f64], axis_e: &[f64], axis_g: &[f64]) -> f64 {
    let he = axis_e[1] - axis_e[0];
    let hg = axis_g[1] - axis_g[0];
    let n_e = axis_e.len();
    let n_g = axis_g.len();
    let mut acc = 0.0;
    for i in 0..n_e {
        let we = if i == 0 || i == n_e - 1 { 0.5 } else { 1.0 };
        for j in 0..n_g {
            let wg = if j == 0 || j == n_g - 1 { 0.5 } else { 1.0 };
            acc += we * wg * values[i * n_g + j];
        }
    }
    acc * he * hg
}

/// Exact Lebesgue measure of bin `i` of `binning` within [lo, hi].
fn sharp_bin_measure(binning: &PeriodicBinning, i: usize, lo: f64, hi: f64) -> f64 {
    let delta = binning.delta();
    let mut edges = vec![lo, hi];
    let m0 = ((lo - binning.center) / delta).floor() as i64;
    let m1 = ((hi - binning.center) / delta).ceil() as i64;
    for m in m0..=m1 {
        let e = binning.center + m as f64 * delta;
        if lo < e && e < hi {
            edges.push(e);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let mut tot = 0.0;
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if binning.outcome(mid) == i {
            tot += w[1] - w[0];
        }
    }
    tot
}

/// Mask-measure matrix omega[i][j](s): Lebesgue measure of the set of x_e in
/// the overlap window where bin_e(x_e) = i and bin_g(x_e - s) = j.
fn omega_xx(
    s: f64,
    x_max: f64,
    bin_e: &PeriodicBinning,
    bin_g: &PeriodicBinning,
    out: &mut [f64],
) {
    for v in out.iter_mut() {
        *v = 0.0;
    }
    let lo = (-x_max).max(-x_max + s);
    let hi = x_max.min(x_max + s);
    if hi <= lo {
        return;
    }
    let d_e = bin_e.delta();
    let d_g = bin_g.delta();
    let mut edges = vec![lo, hi];
    let m0 = ((lo - bin_e.center) / d_e).floor() as i64;
    let m1 = ((hi - bin_e.center) / d_e).ceil() as i64;
    for m in m0..=m1 {
        let e = bin_e.center + m as f64 * d_e;
        if lo < e && e < hi {
            edges.push(e);
        }
    }
    let m0 = ((lo - s - bin_g.center) / d_g).floor() as i64;
    let m1 = ((hi - s - bin_g.center) / d_g).ceil() as i64;
    for m in m0..=m1 {
        let e = s + bin_g.center + m as f64 * d_g;
        if lo < e && e < hi {
            edges.push(e);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let dg_count = bin_g.d;
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let i = bin_e.outcome(mid);
        let j = bin_g.outcome(mid - s);
        out[i * dg_count + j] += w[1] - w[0];
    }
}

/// Node-weight vectors for exact bin integration on a uniform grid axis:
/// u[bin][node] such that the integral of the density over bin regions is
/// sum over nodes of u[bin][node] * f[node], with f piecewise linear.
fn axis_bin_weights(axis: &[f64], binning: &PeriodicBinning) -> Vec<Vec<f64>> {
    let n = axis.len();
    let mut u = vec![vec![0.0; n]; binning.d];
    for c in 0..n - 1 {
        let (a_c, b_c) = (axis[c], axis[c + 1]);
        let h = b_c - a_c;
        let delta = binning.delta();
        let mut edges = vec![a_c, b_c];
        let m0 = ((a_c - binning.center) / delta).floor() as i64;
        let m1 = ((b_c - binning.center) / delta).ceil() as i64;
        for m in m0..=m1 {
            let e = binning.center + m as f64 * delta;
            if a_c < e && e < b_c {
                edges.push(e);
            }
        }
        edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
        edges.dedup();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let i = binning.outcome(mid);
            let len = b - a;
            // Integrals of the linear shape functions over [a, b].
            u[i][c] += len * (b_c - mid) / h;
            u[i][c + 1] += len * (mid - a_c) / h;
        }
    }
    u
}

/// Integrate a density over the periodic region pairs of two binnings,
/// producing a normalized d x d joint probability table.
pub fn joint_probabilities(
    density: &JointDensity,
    bin_e: &PeriodicBinning,
    bin_g: &PeriodicBinning,
) -> Result<JointProbTable> {
    if bin_e.d != bin_g.d {
        return Err(Error::InvalidInput(format!(
            "outcome counts differ: {} vs {}",
            bin_e.d, bin_g.d
        )));
    }
    let d = bin_e.d;
    let mut warning = None;
    let p: Vec<f64> = match &density.carrier {
        Carrier::Ridge {
            k_axis,
            weight,
            sigma_e,
            sigma_g,
        } => {
            // P(i, j) = int g(k) B_e(i; -k) B_g(j; k) dk over the ridge.
            let h = k_axis[1] - k_axis[0];
            let mut p = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    let masked: Vec<f64> = k_axis
                        .iter()
                        .zip(weight.iter())
                        .map(|(&k, &g)| {
                            g * bin_e.gauss_bin_mass(i, -k, *sigma_e)
                                * bin_g.gauss_bin_mass(j, k, *sigma_g)
                        })
                        .collect();
                    p[i * d + j] = trapezoid_uniform(&masked, h);
                }
            }
            p
        }
        Carrier::Separable {
            k_axis,
            weight,
            sigma_k,
            momentum_is_electron,
            x_max,
            sigma_x,
        } => {
            let (bin_k, bin_x) = if *momentum_is_electron {
                (bin_e, bin_g)
            } else {
                (bin_g, bin_e)
            };
            let sign = if *momentum_is_electron { -1.0 } else { 1.0 };
            let h = k_axis[1] - k_axis[0];
            // Momentum masses per bin.
            let mass: Vec<f64> = (0..d)
                .map(|j| {
                    let masked: Vec<f64> = k_axis
                        .iter()
                        .zip(weight.iter())
                        .map(|(&k, &g)| g * bin_k.gauss_bin_mass(j, sign * k, *sigma_k))
                        .collect();
                    trapezoid_uniform(&masked, h)
                })
                .collect();
            // Position fractions per bin.
            let frac: Vec<f64> = if *sigma_x == 0.0 {
                (0..d)
                    .map(|i| sharp_bin_measure(bin_x, i, -x_max, *x_max) / (2.0 * x_max))
                    .collect()
            } else {
                let n_q = 4001;
                let hq = 2.0 * x_max / (n_q - 1) as f64;
                (0..d)
                    .map(|i| {
                        let samples: Vec<f64> = (0..n_q)
                            .map(|t| {
                                let x = -x_max + t as f64 * hq;
                                bin_x.gauss_bin_mass(i, x, *sigma_x)
                            })
                            .collect();
                        simpson_from_samples(&samples, hq) / (2.0 * x_max)
                    })
                    .collect()
            };
            let mut p = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    let (fi, mj) = if *momentum_is_electron {
                        (frac[j], mass[i])
                    } else {
                        (frac[i], mass[j])
                    };
                    p[i * d + j] = fi * mj;
                }
            }
            p
        }
        Carrier::Shift { ds, q, x_max, .. } => {
            let n = q.len() - 1;
            let mut p = vec![0.0; d * d];
            let mut om = vec![0.0; d * d];
            for sign in [1.0, -1.0] {
                for (idx, &qv) in q.iter().enumerate() {
                    let s = idx as f64 * ds;
                    if sign < 0.0 && idx == 0 {
                        continue;
                    }
                    let w = if idx == 0 || idx == n { 0.5 } else { 1.0 };
                    omega_xx(sign * s, *x_max, bin_e, bin_g, &mut om);
                    for (pv, ov) in p.iter_mut().zip(om.iter()) {
                        *pv += w * qv * ov * ds;
                    }
                }
            }
            p
        }
        Carrier::Grid {
            axis_e,
            axis_g,
            values,
        } => {
            let he = axis_e[1] - axis_e[0];
            let hg = axis_g[1] - axis_g[0];
            if he > bin_e.delta() / 8.0 || hg > bin_g.delta() / 8.0 {
                warning = Some(format!(
                    "grid steps ({he:.4}, {hg:.4}) give fewer than 8 points per bin width ({:.4}, {:.4})",
                    bin_e.delta(),
                    bin_g.delta()
                ));
            }
            let u_e = axis_bin_weights(axis_e, bin_e);
            let u_g = axis_bin_weights(axis_g, bin_g);
            let n_g = axis_g.len();
            let mut p = vec![0.0; d * d];
            for j in 0..d {
                // t = V * u_g[j]
                let t: Vec<f64> = values
                    .chunks_exact(n_g)
                    .map(|row| row.iter().zip(u_g[j].iter()).map(|(v, u)| v * u).sum())
                    .collect();
                for i in 0..d {
                    p[i * d + j] = u_e[i].iter().zip(t.iter()).map(|(u, v)| u * v).sum();
                }
            }
            p
        }
    };
    let mut table = JointProbTable::from_unnormalized(density.basis_e, density.basis_g, d, p)?;
    table.precision_warning = warning;
    Ok(table)
}

/// Normalize raw coincidence counts into a joint probability table with
/// multinomial standard errors.
pub fn counts_to_probabilities(
    counts: &[Vec<u64>],
    basis_e: BasisLabel,
    basis_g: BasisLabel,
) -> Result<JointProbTable> {
    let d = counts.len();
    if d < 2 || counts.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidInput(
            "counts must form a square matrix with d >= 2".into(),
        ));
    }
    let total: u64 = counts.iter().flatten().sum();
    if total == 0 {
        return Err(Error::InvalidInput("all coincidence counts are zero".into()));
    }
    let tn = total as f64;
    let p: Vec<f64> = counts.iter().flatten().map(|&c| c as f64 / tn).collect();
    let std_err: Vec<f64> = p.iter().map(|&pv| (pv * (1.0 - pv) / tn).sqrt()).collect();
    Ok(JointProbTable {
        basis_e,
        basis_g,
        d,
        p,
        std_err: Some(std_err),
        precision_warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bin(t: f64, center: f64) -> PeriodicBinning {
        PeriodicBinning::new(t, 2, center).unwrap()
    }

    #[test]
    fn outcome_examples() {
        let b = bin(10.0, -2.5);
        assert_eq!(b.outcome(-2.5), 0);
        assert_eq!(b.outcome(-2.5 + 5.0), 1);
        assert_eq!(b.outcome(-2.5 + 10.0), 0);
        assert_eq!(b.outcome(-2.5 - 1e-15), 1);
        // Periodicity over many periods.
        assert_eq!(b.outcome(1.0), b.outcome(1.0 + 70.0));
    }

    #[test]
    fn outcome_never_out_of_range() {
        let b = bin(10.0, 0.0);
        for v in [-1e-17, 1e-17, 10.0 - 1e-16, 1e9, -1e9] {
            assert!(b.outcome(v) < 2);
        }
    }

    #[test]
    fn gauss_bin_mass_partition_of_unity() {
        let b = PeriodicBinning::new(7.3, 3, 1.1).unwrap();
        for mu in [-4.0, 0.0, 2.9, 55.5] {
            let total: f64 = (0..3).map(|i| b.gauss_bin_mass(i, mu, 0.8)).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_bin_mass_sharp_limit() {
        let b = bin(10.0, -2.5);
        // Tiny sigma approaches the indicator away from bin edges.
        for mu in [0.0, 3.0, -4.9] {
            let sharp = if b.outcome(mu) == 0 { 1.0 } else { 0.0 };
            assert_relative_eq!(b.gauss_bin_mass(0, mu, 1e-4), sharp, epsilon = 1e-10);
        }
        assert_eq!(b.gauss_bin_mass(0, 0.0, 0.0), 1.0);
    }

    #[test]
    fn mub_pair_constraint() {
        assert!(MubPair::conjugate_from_tx(10.0, -2.5, -0.3).is_ok());
        let pos = bin(10.0, 0.0);
        let mom = bin(4.0 * std::f64::consts::PI / 10.0 * 1.001, 0.0);
        assert!(MubPair::new(pos, mom, 1).is_err());
        // d = 3, u = 3 violates coprimality (u*1 % 3 == 0).
        let p3 = PeriodicBinning::new(3.0, 3, 0.0).unwrap();
        let m3 = PeriodicBinning::new(2.0 * std::f64::consts::PI * 3.0 / (3.0 * 3.0), 3, 0.0).unwrap();
        assert!(MubPair::new(p3, m3, 3).is_err());
    }

    #[test]
    fn counts_examples() {
        let t = counts_to_probabilities(
            &[vec![50, 0], vec![0, 50]],
            BasisLabel::Position,
            BasisLabel::Position,
        )
        .unwrap();
        assert_eq!(t.get(0, 0), 0.5);
        assert_eq!(t.get(0, 1), 0.0);
        let t = counts_to_probabilities(
            &[vec![1, 1], vec![1, 1]],
            BasisLabel::Position,
            BasisLabel::Position,
        )
        .unwrap();
        assert!(t.p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        let t = counts_to_probabilities(
            &[vec![421, 79], vec![79, 421]],
            BasisLabel::Momentum,
            BasisLabel::Momentum,
        )
        .unwrap();
        assert_relative_eq!(t.get(0, 0), 0.421, epsilon = 1e-12);
        assert_relative_eq!(t.get(1, 0), 0.079, epsilon = 1e-12);
        let se = t.std_err.as_ref().unwrap();
        assert_relative_eq!(se[0], (0.421f64 * 0.579 / 1000.0).sqrt(), epsilon = 1e-12);
        assert!(counts_to_probabilities(
            &[vec![0, 0], vec![0, 0]],
            BasisLabel::Position,
            BasisLabel::Position
        )
        .is_err());
    }

    #[test]
    fn uniform_grid_gives_quarter_entries() {
        let n = 801;
        let ax: Vec<f64> = (0..n).map(|i| -40.0 + 80.0 * i as f64 / (n - 1) as f64).collect();
        let vals = vec![1.0; n * n];
        let dens = JointDensity::from_grid(
            BasisLabel::Position,
            BasisLabel::Position,
            ax.clone(),
            ax,
            vals,
        )
        .unwrap();
        let pair = MubPair::conjugate_from_tx(10.0, -2.5, -0.5).unwrap();
        let t = joint_probabilities(&dens, &pair.pos, &pair.pos).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(t.get(i, j), 0.25, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn sharp_measure_examples() {
        let b = bin(10.0, -2.5);
        // Eight full periods: exactly half the window in each bin.
        assert_relative_eq!(sharp_bin_measure(&b, 0, -40.0, 40.0), 40.0, epsilon = 1e-12);
        // T = 5.44 over the same window: known 0.51 fraction for bin 0.
        let b2 = bin(5.44, -1.36);
        assert_relative_eq!(
            sharp_bin_measure(&b2, 0, -40.0, 40.0) / 80.0,
            0.51,
            epsilon = 1e-12
        );
    }

    #[test]
    fn omega_sums_to_overlap_length() {
        let be = bin(10.0, -2.5);
        let bg = bin(7.0, 1.0);
        let mut om = [0.0; 4];
        for s in [-3.3, 0.0, 5.7, 79.9] {
            omega_xx(s, 40.0, &be, &bg, &mut om);
            let total: f64 = om.iter().sum();
            let expect = (80.0 - s.abs()).max(0.0);
            assert_relative_eq!(total, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn blur_even_profile_conserves_symmetric_mass() {
        // A wide Gaussian profile blurred by a narrow kernel keeps its value
        // at the origin nearly unchanged (the peak attenuates analytically
        // by sigma_b^2 / (2 sigma_q^2) = 2.8e-4 here) and stays smooth.
        let ds = 0.01;
        let q: Vec<f64> = (0..4000).map(|i| (-((i as f64 * ds) / 3.0).powi(2)).exp()).collect();
        let b = blur_even_profile(&q, ds, 0.05);
        assert_relative_eq!(b[0], q[0], epsilon = 5e-4);
        assert!(b.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let same = blur_even_profile(&q, ds, 0.0);
        assert_eq!(same, q);
    }

    #[test]
    fn axis_bin_weights_partition() {
        let n = 101;
        let ax: Vec<f64> = (0..n).map(|i| -10.0 + 20.0 * i as f64 / (n - 1) as f64).collect();
        let b = bin(3.7, 0.4);
        let u = axis_bin_weights(&ax, &b);
        // Summed over bins, the node weights reproduce the trapezoid rule.
        let h = ax[1] - ax[0];
        for (k, _) in ax.iter().enumerate() {
            let total: f64 = u.iter().map(|ui| ui[k]).sum();
            let expect = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            assert_relative_eq!(total, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn resolution_profile_values() {
        let r = ResolutionProfile::table1_experimental();
        assert_relative_eq!(
            sigma_from_fwhm(r.fwhm_x_g),
            1.2 / (8.0 * 2.0_f64.ln()).sqrt(),
            epsilon = 1e-15
        );
        assert!(ResolutionProfile {
            fwhm_x_e: -1.0,
            ..ResolutionProfile::ideal()
        }
        .validate()
        .is_err());
    }
}
