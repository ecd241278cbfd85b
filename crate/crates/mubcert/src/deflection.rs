//! Detector-plane kinematics: the mapping between deflection angles and
//! transverse momenta, and the joint angle distribution of the
//! electron-photon pair under a finite photon-energy window.

use crate::constants::{HBARC, ME_C2};
use crate::error::{Error, Result};
use serde::Serialize;

/// Energies and velocity entering the angle kinematics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KinematicContext {
    /// Total incident electron energy, eV.
    pub e_i: f64,
    /// Electron velocity in units of c.
    pub beta: f64,
    /// Photon energy window [E_min, E_max], eV.
    pub e_window: (f64, f64),
}

impl KinematicContext {
    /// Context from the electron kinetic energy, with beta fixed by the
    /// relativistic kinematics.
    pub fn from_kinetic_energy(e_kin: f64, e_window: (f64, f64)) -> Result<Self> {
        if !(e_kin > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kinetic energy must be > 0, got {e_kin}"
            )));
        }
        let gamma = 1.0 + e_kin / ME_C2;
        let beta = (1.0 - 1.0 / (gamma * gamma)).sqrt();
        Self::from_parts(e_kin + ME_C2, beta, e_window)
    }

    /// Context with an explicitly chosen beta (for survey-style figures that
    /// quote beta directly).
    pub fn from_parts(e_i: f64, beta: f64, e_window: (f64, f64)) -> Result<Self> {
        if !(e_i > 0.0) {
            return Err(Error::InvalidInput(format!(
                "total energy must be > 0, got {e_i}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be in (0, 1), got {beta}"
            )));
        }
        if !(e_window.0 >= 0.0 && e_window.1 >= e_window.0) {
            return Err(Error::InvalidInput(format!(
                "energy window must satisfy 0 <= E_min <= E_max, got {e_window:?}"
            )));
        }
        Ok(KinematicContext {
            e_i,
            beta,
            e_window,
        })
    }

    /// Window width, eV.
    pub fn delta_e(&self) -> f64 {
        self.e_window.1 - self.e_window.0
    }
}

/// Electron deflection angle fixed by transverse momentum conservation for a
/// photon of energy `e_gamma` deflected by `phi_gamma`:
/// phi_e = -arctan(E_gamma tan(phi_gamma)/(beta^2 E_i - E_gamma)).
pub fn electron_angle_from_photon(
    phi_gamma: f64,
    e_gamma: f64,
    ctx: &KinematicContext,
) -> Result<f64> {
    if !(phi_gamma.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "photon angle must satisfy |phi| < pi/2, got {phi_gamma}"
        )));
    }
    if !(e_gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "photon energy must be > 0, got {e_gamma}"
        )));
    }
    let denom = ctx.beta * ctx.beta * ctx.e_i - e_gamma;
    if denom.abs() < f64::EPSILON * ctx.e_i {
        return Err(Error::InvalidInput(
            "photon energy equals beta^2 E_i; the angle relation is singular".into(),
        ));
    }
    Ok(-(e_gamma * phi_gamma.tan() / denom).atan())
}

/// Joint density of (phi_e, phi_gamma) when the photon energy is selected
/// uniformly inside the window: nonzero only where the angles have opposite
/// signs and the conserving energy
/// E = beta^2 E_i tan(phi_e)/(tan(phi_e) - tan(phi_gamma)) falls in the
/// window, with the energy-to-angle Jacobian divided by the window width.
///
/// The value is the raw (unnormalized) closed form; `AngleDensityGrid`
/// normalizes numerically over its support. A zero-width window has a
/// singular ridge density and is rejected; the ridge curve itself is
/// `electron_angle_from_photon`.
pub fn joint_angle_density(phi_e: f64, phi_gamma: f64, ctx: &KinematicContext) -> Result<f64> {
    if !(phi_e.abs() < std::f64::consts::FRAC_PI_2
        && phi_gamma.abs() < std::f64::consts::FRAC_PI_2)
    {
        return Err(Error::InvalidInput(
            "angles must satisfy |phi| < pi/2".into(),
        ));
    }
    let de = ctx.delta_e();
    if !(de > 0.0) {
        return Err(Error::InvalidInput(
            "zero-width window: the joint density is a singular ridge; \
             use electron_angle_from_photon for the ridge curve"
                .into(),
        ));
    }
    let t = phi_e.tan();
    let g = phi_gamma.tan();
    if t * g >= 0.0 {
        return Ok(0.0);
    }
    let b2ei = ctx.beta * ctx.beta * ctx.e_i;
    let e_con = b2ei * t / (t - g);
    if !(e_con >= ctx.e_window.0 && e_con <= ctx.e_window.1) {
        return Ok(0.0);
    }
    let cos_g = phi_gamma.cos();
    let num = b2ei * b2ei - 2.0 * b2ei * e_con + e_con * e_con / (cos_g * cos_g);
    Ok((num / (g * b2ei * de)).abs())
}

/// Transverse wave-number components from the two detector-plane deflection
/// angles: k_x = k sin(phi_x) sqrt(cos^2(phi_y)/(1 - sin^2 phi_x sin^2 phi_y))
/// and symmetrically for k_y, with k = E_gamma/(hbar c).
pub fn transverse_k_from_angles(phi_x: f64, phi_y: f64, e_gamma: f64) -> Result<(f64, f64)> {
    if !(phi_x.abs() < std::f64::consts::FRAC_PI_2 && phi_y.abs() < std::f64::consts::FRAC_PI_2)
    {
        return Err(Error::InvalidInput(
            "angles must satisfy |phi| < pi/2".into(),
        ));
    }
    if !(e_gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "photon energy must be > 0, got {e_gamma}"
        )));
    }
    let k = e_gamma / HBARC;
    let (sx, cx) = phi_x.sin_cos();
    let (sy, cy) = phi_y.sin_cos();
    let root = 1.0 - sx * sx * sy * sy;
    Ok((
        k * sx * (cy * cy / root).sqrt(),
        k * sy * (cx * cx / root).sqrt(),
    ))
}

/// Joint angle density sampled on a rectangular grid and normalized to unit
/// mass over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct AngleDensityGrid {
    pub phi_gamma_axis: Vec<f64>,
    pub phi_e_axis: Vec<f64>,
    /// Row-major, photon-angle index first.
    pub values: Vec<f64>,
    /// Raw density mass over the grid (the normalization divisor).
    pub norm: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * h).collect()
}

impl AngleDensityGrid {
    /// Evaluate the windowed joint density on the product grid and normalize
    /// by its 2-D trapezoid mass. The grid should cover the density's
    /// support (the ridge between the window-edge angle curves).
    pub fn new(
        ctx: &KinematicContext,
        phi_gamma_range: (f64, f64),
        n_gamma: usize,
        phi_e_range: (f64, f64),
        n_e: usize,
    ) -> Result<Self> {
        if n_gamma < 3 || n_e < 3 {
            return Err(Error::InvalidInput(
                "angle grid needs at least 3 points per axis".into(),
            ));
        }
        if !(phi_gamma_range.1 > phi_gamma_range.0 && phi_e_range.1 > phi_e_range.0) {
            return Err(Error::InvalidInput("angle ranges must be increasing".into()));
        }
        let phi_gamma_axis = linspace(phi_gamma_range.0, phi_gamma_range.1, n_gamma);
        let phi_e_axis = linspace(phi_e_range.0, phi_e_range.1, n_e);
        let mut values = Vec::with_capacity(n_gamma * n_e);
        for &pg in &phi_gamma_axis {
            for &pe in &phi_e_axis {
                values.push(joint_angle_density(pe, pg, ctx)?);
            }
        }
        let hg = (phi_gamma_range.1 - phi_gamma_range.0) / (n_gamma - 1) as f64;
        let he = (phi_e_range.1 - phi_e_range.0) / (n_e - 1) as f64;
        let wt = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut norm = 0.0;
        for i in 0..n_gamma {
            for j in 0..n_e {
                norm += wt(i, n_gamma) * wt(j, n_e) * values[i * n_e + j];
            }
        }
        norm *= hg * he;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonConvergence(format!(
                "angle grid does not cover the density support (mass {norm})"
            )));
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(AngleDensityGrid {
            phi_gamma_axis,
            phi_e_axis,
            values,
            norm,
        })
    }

    pub fn value(&self, i_gamma: usize, j_e: usize) -> f64 {
        self.values[i_gamma * self.phi_e_axis.len() + j_e]
    }

    /// Unit self-integral of the normalized grid (trapezoid).
    pub fn integral(&self) -> f64 {
        let ng = self.phi_gamma_axis.len();
        let ne = self.phi_e_axis.len();
        let hg = (self.phi_gamma_axis[ng - 1] - self.phi_gamma_axis[0]) / (ng - 1) as f64;
        let he = (self.phi_e_axis[ne - 1] - self.phi_e_axis[0]) / (ne - 1) as f64;
        let wt = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut acc = 0.0;
        for i in 0..ng {
            for j in 0..ne {
                acc += wt(i, ng) * wt(j, ne) * self.value(i, j);
            }
        }
        acc * hg * he
    }

    /// CSV rows (phi_gamma, phi_e, density) of the normalized grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi_gamma,phi_e,density\n");
        for (i, &pg) in self.phi_gamma_axis.iter().enumerate() {
            for (j, &pe) in self.phi_e_axis.iter().enumerate() {
                out.push_str(&format!("{pg:.16e},{pe:.16e},{:.16e}\n", self.value(i, j)));
            }
        }
        out
    }
}
