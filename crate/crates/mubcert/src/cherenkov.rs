//! Cherenkov pair-state kernel: scenario definition, emission amplitudes,
//! the reduced electron-photon momentum kernel, and angular emission profiles.
//!
//! The central object is [`MomentumKernel`]: the real symmetric matrix
//! f(k1x, k2x) obtained by integrating products of Cherenkov amplitudes,
//! Fresnel transmission factors, and the electron-packet Gaussian over the
//! photon wave-vector region allowed by the detected energy window. All
//! downstream densities and probability tables are functions of this kernel.

use crate::constants::{ALPHA, HBARC, ME_C2};
use crate::error::{Error, Result};
use crate::quad::{simpson_from_samples, simpson_weights};
use crate::special::{cosint, sinc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Quadrature resolutions: kernel axis, inner wave-vector integrals, and
/// position-space grids. Inner integrals refine adaptively starting from
/// (`n_ky`, `n_kz`); all counts must be odd (composite Simpson).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_kx: usize,
    pub n_ky: usize,
    pub n_kz: usize,
    pub n_x: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_kx: 101,
            n_ky: 201,
            n_kz: 201,
            n_x: 1001,
        }
    }
}

/// All physical and numerical parameters of one Cherenkov configuration.
///
/// Derived beam quantities (beta, gamma, mean longitudinal momentum) follow
/// from the kinetic energy; the photon energy window and transverse cutoffs
/// bound the integration region of the kernel quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScenario {
    /// Sample thickness, um.
    pub l_z: f64,
    /// Refractive index of the dielectric.
    pub n_refr: f64,
    /// Electron kinetic energy, eV.
    pub e_kin: f64,
    /// Relative Gaussian momentum width dp_z / p_bar_z.
    pub dp_rel: f64,
    /// Photon energy window [min, max], eV.
    pub e_win: (f64, f64),
    /// Transverse wave-number cutoff for the kernel axis, rad/um.
    pub k_x_max: f64,
    /// Lower/upper k_y cutoffs, rad/um.
    pub k_y_min: f64,
    pub k_y_max: f64,
    /// Half-width of the position evaluation range, um.
    pub x_max: f64,
    pub grid: GridSpec,
}

impl PhysicalScenario {
    /// Validated constructor; rejects configurations with no Cherenkov
    /// emission, empty windows, or unusable grids.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        l_z: f64,
        n_refr: f64,
        e_kin: f64,
        dp_rel: f64,
        e_win: (f64, f64),
        k_x_max: f64,
        k_y_min: f64,
        k_y_max: f64,
        x_max: f64,
        grid: GridSpec,
    ) -> Result<Self> {
        let s = PhysicalScenario {
            l_z,
            n_refr,
            e_kin,
            dp_rel,
            e_win,
            k_x_max,
            k_y_min,
            k_y_max,
            x_max,
            grid,
        };
        s.validate()?;
        Ok(s)
    }

    /// The reference configuration: 200 nm foil, n = 1.6, 200 keV beam,
    /// dp_z/p = 1e-6, photon window [3.5, 4.0] eV. The transverse cutoff
    /// equals the upper window wave number, where the diagonal kernel
    /// density has fallen to zero.
    pub fn reference() -> Self {
        let e_win = (3.5, 4.0);
        let k_cap = e_win.1 / HBARC;
        PhysicalScenario {
            l_z: 0.2,
            n_refr: 1.6,
            e_kin: 200_000.0,
            dp_rel: 1e-6,
            e_win,
            k_x_max: k_cap,
            k_y_min: 0.0,
            k_y_max: k_cap,
            x_max: 40.0,
            grid: GridSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.e_kin > 0.0) {
            return fail(format!("kinetic energy must be positive, got {}", self.e_kin));
        }
        if self.beta() * self.n_refr <= 1.0 {
            return fail(format!(
                "no Cherenkov emission: beta*n = {:.6} <= 1",
                self.beta() * self.n_refr
            ));
        }
        if !(self.e_win.0 > 0.0 && self.e_win.0 < self.e_win.1) {
            return fail(format!("bad energy window {:?}", self.e_win));
        }
        if !(self.l_z > 0.0 && self.k_x_max > 0.0 && self.x_max > 0.0) {
            return fail("l_z, k_x_max, x_max must be positive".into());
        }
        if !(self.dp_rel > 0.0) {
            return fail("dp_rel must be positive".into());
        }
        if self.k_y_min < 0.0 || self.k_y_min >= self.k_y_max {
            return fail(format!(
                "need 0 <= k_y_min < k_y_max, got [{}, {}]",
                self.k_y_min, self.k_y_max
            ));
        }
        let g = &self.grid;
        for (name, n) in [
            ("n_kx", g.n_kx),
            ("n_ky", g.n_ky),
            ("n_kz", g.n_kz),
            ("n_x", g.n_x),
        ] {
            if n < 3 || n % 2 == 0 {
                return fail(format!("grid {name} must be odd and >= 3, got {n}"));
            }
        }
        Ok(())
    }

    /// Lorentz factor gamma = 1 + E_kin / (m_e c^2).
    pub fn gamma_factor(&self) -> f64 {
        1.0 + self.e_kin / ME_C2
    }

    /// Beam velocity beta = sqrt(1 - 1/gamma^2).
    pub fn beta(&self) -> f64 {
        let g = self.gamma_factor();
        (1.0 - 1.0 / (g * g)).sqrt()
    }

    /// Total electron energy, eV.
    pub fn e_i(&self) -> f64 {
        self.e_kin + ME_C2
    }

    /// Mean longitudinal electron wave number gamma*beta*m_e*c^2/(hbar c), rad/um.
    pub fn p_bar_z(&self) -> f64 {
        self.gamma_factor() * self.beta() * ME_C2 / HBARC
    }

    /// Absolute Gaussian momentum width, rad/um.
    pub fn dp_z(&self) -> f64 {
        self.dp_rel * self.p_bar_z()
    }

    /// Window edges as vacuum wave numbers E/(hbar c), rad/um.
    pub fn w_min(&self) -> f64 {
        self.e_win.0 / HBARC
    }

    pub fn w_max(&self) -> f64 {
        self.e_win.1 / HBARC
    }

    /// Hash identifying this scenario in exported artifacts.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("scenario serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        format!("{:x}", h.finalize())
    }
}

/// Cherenkov and critical angles for an explicit velocity, bypassing the
/// scenario's kinematics (the survey plots quote beta = 0.7 directly).
pub fn characteristic_angles_from_beta(beta: f64, n_refr: f64) -> Result<(f64, f64)> {
    if n_refr <= 1.0 {
        return Err(Error::InvalidInput(format!(
            "no total internal reflection for n = {n_refr} <= 1"
        )));
    }
    if beta * n_refr <= 1.0 {
        return Err(Error::InvalidInput(format!(
            "no Cherenkov emission: beta*n = {:.6} <= 1",
            beta * n_refr
        )));
    }
    Ok(((1.0 / (beta * n_refr)).acos(), (1.0 / n_refr).asin()))
}

/// (theta_CR, theta_crit) for the scenario's kinematic beta.
pub fn characteristic_angles(scenario: &PhysicalScenario) -> Result<(f64, f64)> {
    characteristic_angles_from_beta(scenario.beta(), scenario.n_refr)
}

/// Single-photon Cherenkov emission amplitude at in-medium wave vector `k`
/// (components in rad/um). Real in this model; vanishes smoothly at zero
/// transverse momentum.
pub fn cherenkov_amplitude(k: [f64; 3], scenario: &PhysicalScenario) -> f64 {
    let [kx, ky, kz] = k;
    let k_abs = (kx * kx + ky * ky + kz * kz).sqrt();
    assert!(k_abs > 0.0, "amplitude undefined at k = 0");
    let k_perp = (kx * kx + ky * ky).sqrt();
    if k_perp == 0.0 {
        return 0.0;
    }
    let n = scenario.n_refr;
    let pref = (ALPHA / (2.0 * std::f64::consts::PI.powi(2) * n)).sqrt();
    let arg = 0.5 * scenario.l_z * (kz - k_abs / (scenario.beta() * n));
    pref * (k_perp / k_abs.powf(1.5)) * scenario.l_z * sinc(arg)
}

/// Fresnel transmission amplitude for parallel polarization at internal
/// incidence angle `theta`; zero beyond the critical angle.
pub fn fresnel_tau_parallel(theta: f64, n_refr: f64) -> f64 {
    let st = n_refr * theta.sin();
    if st >= 1.0 {
        return 0.0;
    }
    let ct = theta.cos();
    let ctt = (1.0 - st * st).sqrt();
    2.0 * n_refr * ct / (ct + n_refr * ctt)
}

/// Power transmission for parallel polarization; zero beyond the critical
/// angle (grazing transmitted rays carry no power).
pub fn fresnel_power_parallel(theta: f64, n_refr: f64) -> f64 {
    let st = n_refr * theta.sin();
    if st >= 1.0 {
        return 0.0;
    }
    let ct = theta.cos();
    let ctt = (1.0 - st * st).sqrt();
    4.0 * n_refr * ct * ctt / (ct + n_refr * ctt).powi(2)
}

/// Integration region over (k_y, k'_z) for one kernel element: a k_y range
/// whose k'_z bounds follow from the energy window and the larger/smaller of
/// the two transverse wave numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationRegion {
    pub ky_lo: f64,
    pub ky_hi: f64,
    w1_sq_minus_kmin_sq: f64,
    w2_sq_minus_kmax_sq: f64,
}

impl IntegrationRegion {
    /// k'_z interval at fixed k_y, or None where the window closes.
    pub fn kz_bounds(&self, ky: f64) -> Option<(f64, f64)> {
        let hi_sq = self.w2_sq_minus_kmax_sq - ky * ky;
        if hi_sq <= 0.0 {
            return None;
        }
        let lo_sq = (self.w1_sq_minus_kmin_sq - ky * ky).max(0.0);
        if hi_sq <= lo_sq {
            return None;
        }
        Some((lo_sq.sqrt(), hi_sq.sqrt()))
    }
}

/// Wave-vector region compatible with the energy window for the element
/// (k1x, k2x); `None` marks an empty region (no energy budget remains).
pub fn integration_region(
    k1x: f64,
    k2x: f64,
    scenario: &PhysicalScenario,
) -> Option<IntegrationRegion> {
    assert!(
        k1x.abs() <= scenario.k_x_max + 1e-12 && k2x.abs() <= scenario.k_x_max + 1e-12,
        "|k_x| exceeds the scenario cutoff"
    );
    let k_hi = k1x.abs().max(k2x.abs());
    let k_lo = k1x.abs().min(k2x.abs());
    let w1 = scenario.w_min();
    let w2 = scenario.w_max();
    let cap_sq = w2 * w2 - k_hi * k_hi;
    if cap_sq <= 0.0 {
        return None;
    }
    let ky_hi = cap_sq.sqrt().min(scenario.k_y_max);
    let ky_lo = scenario.k_y_min;
    if ky_hi <= ky_lo {
        return None;
    }
    Some(IntegrationRegion {
        ky_lo,
        ky_hi,
        w1_sq_minus_kmin_sq: w1 * w1 - k_lo * k_lo,
        w2_sq_minus_kmax_sq: cap_sq,
    })
}

/// Fixed-resolution tensor Simpson evaluation of one kernel element.
fn kernel_element_fixed(
    k1x: f64,
    k2x: f64,
    region: &IntegrationRegion,
    scenario: &PhysicalScenario,
    n_ky: usize,
    n_kz: usize,
) -> f64 {
    let n = scenario.n_refr;
    let n2 = n * n;
    let beta = scenario.beta();
    let inv_beta_n = 1.0 / (beta * n);
    let dpz = scenario.dp_z();
    let gauss_denom = 8.0 * beta * beta * n2 * dpz * dpz;
    let amp_pref = (ALPHA / (2.0 * std::f64::consts::PI.powi(2) * n)).sqrt() * scenario.l_z;
    let half_l = 0.5 * scenario.l_z;

    let wy = simpson_weights(n_ky, (region.ky_hi - region.ky_lo) / (n_ky - 1) as f64);
    let mut total = 0.0;
    for (iy, wyi) in wy.iter().enumerate() {
        let ky = region.ky_lo
            + (region.ky_hi - region.ky_lo) * iy as f64 / (n_ky - 1) as f64;
        let Some((kz_lo, kz_hi)) = region.kz_bounds(ky) else {
            continue;
        };
        let hz = (kz_hi - kz_lo) / (n_kz - 1) as f64;
        let perp1_sq = k1x * k1x + ky * ky;
        let perp2_sq = k2x * k2x + ky * ky;
        let mut inner = 0.0;
        for iz in 0..n_kz {
            let kz = kz_lo + hz * iz as f64;
            let kz_sq = kz * kz;
            // Refraction map: in-medium longitudinal wave numbers and moduli.
            let k1z = ((n2 - 1.0) * perp1_sq + n2 * kz_sq).sqrt();
            let k2z = ((n2 - 1.0) * perp2_sq + n2 * kz_sq).sqrt();
            let k1 = n * (perp1_sq + kz_sq).sqrt();
            let k2 = n * (perp2_sq + kz_sq).sqrt();
            let a1 = amp_pref * (perp1_sq.sqrt() / k1.powf(1.5))
                * sinc(half_l * (k1z - k1 * inv_beta_n));
            let a2 = amp_pref * (perp2_sq.sqrt() / k2.powf(1.5))
                * sinc(half_l * (k2z - k2 * inv_beta_n));
            // Fresnel amplitudes in wave-number components (equivalent to the
            // angular form with cos(theta) = k_z/|k|).
            let t1 = 2.0 * n * k1z / (k1z + n2 * kz);
            let t2 = 2.0 * n * k2z / (k2z + n2 * kz);
            let diff = k1 - k2;
            let g = n2 * n2 * kz_sq / (k1z * k2z) * (-diff * diff / gauss_denom).exp();
            let w = if iz == 0 || iz == n_kz - 1 {
                1.0
            } else if iz % 2 == 1 {
                4.0
            } else {
                2.0
            };
            inner += w * a1 * a2 * t1 * t2 * g;
        }
        total += wyi * inner * hz / 3.0;
    }
    total
}

/// One unnormalized kernel element, with adaptive refinement: the base
/// Simpson grid is compared against a doubled grid and escalated once more
/// if the two disagree by more than 0.5% relative.
pub fn kernel_element(k1x: f64, k2x: f64, scenario: &PhysicalScenario) -> Result<f64> {
    let Some(region) = integration_region(k1x, k2x, scenario) else {
        return Ok(0.0);
    };
    let (mut n_ky, mut n_kz) = (scenario.grid.n_ky, scenario.grid.n_kz);
    let mut coarse = kernel_element_fixed(k1x, k2x, &region, scenario, n_ky, n_kz);
    for _ in 0..2 {
        let (n_ky2, n_kz2) = (2 * n_ky - 1, 2 * n_kz - 1);
        let fine = kernel_element_fixed(k1x, k2x, &region, scenario, n_ky2, n_kz2);
        if (fine - coarse).abs() <= 5e-3 * fine.abs() + 1e-18 {
            return Ok(fine);
        }
        coarse = fine;
        (n_ky, n_kz) = (n_ky2, n_kz2);
    }
    Err(Error::NonConvergence(format!(
        "kernel element ({k1x:.4}, {k2x:.4}) disagrees beyond 0.5% after two refinements"
    )))
}

/// The reduced momentum kernel: uniform k_x grid on [0, k_x_max], real
/// symmetric normalized matrix, and provenance metadata.
///
/// The full kernel extends to negative arguments by mirror symmetry
/// f(a, b) = f(-a, b) = f(a, -b); only the positive quadrant is stored and
/// all integrals account for the fourfold symmetry analytically.
#[derive(Debug, Clone)]
pub struct MomentumKernel {
    pub k_axis: Vec<f64>,
    f: Vec<f64>,
    n: usize,
    /// Normalization constant divided out of the raw quadrature values.
    pub norm: f64,
    pub scenario_hash: String,
}

impl MomentumKernel {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.k_axis[1] - self.k_axis[0]
    }

    /// Matrix element at grid indices (i, j).
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.n + j]
    }

    /// Diagonal f(k, k) as a slice-backed vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i, i)).collect()
    }

    /// Raw storage, row-major.
    pub fn values(&self) -> &[f64] {
        &self.f
    }

    /// Trace integral over the mirrored axis (should be 1 after build).
    pub fn trace_integral(&self) -> f64 {
        2.0 * simpson_from_samples(&self.diagonal(), self.step())
    }

    /// Assemble from parts, enforcing the type invariants.
    pub fn from_parts(
        k_axis: Vec<f64>,
        f: Vec<f64>,
        norm: f64,
        scenario_hash: String,
    ) -> Result<Self> {
        let n = k_axis.len();
        if n < 3 || n % 2 == 0 || f.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "kernel needs an odd axis (got {n}) and a matching matrix"
            )));
        }
        let kernel = MomentumKernel {
            k_axis,
            f,
            n,
            norm,
            scenario_hash,
        };
        for i in 0..n {
            if kernel.value(i, i) < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "negative diagonal at index {i}"
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (kernel.value(i, j), kernel.value(j, i));
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1e-300) {
                    return Err(Error::InvalidInput(format!(
                        "kernel not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let trace = kernel.trace_integral();
        if (trace - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "kernel trace integral {trace} deviates from 1 beyond 1e-6"
            )));
        }
        Ok(kernel)
    }

    /// CSV export: hash and normalization headers, k-axis row, matrix rows.
    /// Values carry 17 significant digits so the round-trip is bit exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# scenario_hash,{}\n", self.scenario_hash));
        out.push_str(&format!("# norm,{:.16e}\n", self.norm));
        let axis: Vec<String> = self.k_axis.iter().map(|k| format!("{k:.16e}")).collect();
        out.push_str(&axis.join(","));
        out.push('\n');
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| format!("{:.16e}", self.value(i, j)))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut hash = String::new();
        let mut norm = f64::NAN;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut axis: Option<Vec<f64>> = None;
        let parse_row = |line: &str| -> Result<Vec<f64>> {
            line.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad float {t:?}: {e}")))
                })
                .collect()
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut parts = rest.splitn(2, ',');
                let key = parts.next().unwrap_or("").trim();
                let val = parts.next().unwrap_or("").trim();
                match key {
                    "scenario_hash" => hash = val.to_string(),
                    "norm" => {
                        norm = val
                            .parse()
                            .map_err(|e| Error::InvalidInput(format!("bad norm: {e}")))?
                    }
                    _ => {}
                }
                continue;
            }
            if axis.is_none() {
                axis = Some(parse_row(line)?);
            } else {
                rows.push(parse_row(line)?);
            }
        }
        let axis = axis.ok_or_else(|| Error::InvalidInput("no axis row".into()))?;
        let n = axis.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "expected {n}x{n} matrix after the axis row"
            )));
        }
        let f: Vec<f64> = rows.into_iter().flatten().collect();
        MomentumKernel::from_parts(axis, f, norm, hash)
    }
}

/// Build the normalized momentum kernel for a scenario.
///
/// Elements are evaluated over the upper triangle in parallel and mirrored;
/// the normalization is twice the Simpson integral of the diagonal over
/// [0, k_x_max] (the mirrored axis doubles it).
pub fn build_kernel(scenario: &PhysicalScenario) -> Result<MomentumKernel> {
    scenario.validate()?;
    let n = scenario.grid.n_kx;
    let h = scenario.k_x_max / (n - 1) as f64;
    let k_axis: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let computed: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| kernel_element(k_axis[i], k_axis[j], scenario))
        .collect();
    let computed = computed?;

    let mut f = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(computed.iter()) {
        f[i * n + j] = v;
        f[j * n + i] = v;
    }

    let diag: Vec<f64> = (0..n).map(|i| f[i * n + i]).collect();
    let norm = 2.0 * simpson_from_samples(&diag, h);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonConvergence(format!(
            "kernel normalization is not positive finite: {norm}"
        )));
    }
    for v in &mut f {
        *v /= norm;
    }
    MomentumKernel::from_parts(k_axis, f, norm, scenario.hash())
}

/// Angular emission profile inside the dielectric and after transmission
/// through the exit face.
#[derive(Debug, Clone, Serialize)]
pub struct AngularProfile {
    pub theta_axis: Vec<f64>,
    /// dP/dOmega inside the dielectric.
    pub inside: Vec<f64>,
    /// Transmitted profile inside * power transmission, zero past theta_crit.
    pub outside: Vec<f64>,
    /// Integrated transmitted probability 2*pi * int outside * sin(theta).
    pub p_out_total: f64,
}

/// Emission profile density at angle `theta` inside the dielectric.
///
/// Near the Cherenkov angle the closed form is an integrable 0/0 limit; the
/// bracketed cosine-integral difference switches to its convergent series
/// when k_max * L_z * |u| < 1, removing the cancellation.
fn emission_inside(theta: f64, scenario: &PhysicalScenario) -> f64 {
    let n = scenario.n_refr;
    let lz = scenario.l_z;
    // In-medium wave numbers at the window edges.
    let k_min = n * scenario.w_min();
    let k_max = n * scenario.w_max();
    let u = theta.cos() - 1.0 / (scenario.beta() * n);
    let s2 = theta.sin().powi(2);
    let pref = ALPHA / (std::f64::consts::PI.powi(2) * n);
    let au = u.abs();
    if k_max * lz * au >= 1.0 {
        let bracket = (k_max / k_min).ln() - cosint(k_max * lz * au) + cosint(k_min * lz * au);
        pref * s2 * bracket / (u * u)
    } else {
        // bracket/u^2 as a series: sum_j (-1)^(j+1) L^(2j) u^(2j-2)
        //                                 (k_max^(2j) - k_min^(2j)) / (2j (2j)!)
        let mut acc = 0.0;
        let mut fact = 1.0; // (2j)!
        let mut lpow = 1.0; // L^(2j)
        let mut kmax_pow = 1.0;
        let mut kmin_pow = 1.0;
        let u2 = u * u;
        let mut upow = 1.0; // u^(2j-2)
        for j in 1..=8usize {
            let tj = 2.0 * j as f64;
            fact *= (tj - 1.0) * tj;
            lpow *= lz * lz;
            kmax_pow *= k_max * k_max;
            kmin_pow *= k_min * k_min;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * lpow * upow * (kmax_pow - kmin_pow) / (tj * fact);
            upow *= u2;
        }
        pref * s2 * acc
    }
}

/// Emission profile on an explicit uniform theta axis (odd length).
pub fn emission_profile_on_axis(
    scenario: &PhysicalScenario,
    theta_axis: &[f64],
) -> Result<AngularProfile> {
    scenario.validate()?;
    let m = theta_axis.len();
    if m < 3 || m % 2 == 0 {
        return Err(Error::InvalidInput(
            "theta axis must have odd length >= 3".into(),
        ));
    }
    let h = theta_axis[1] - theta_axis[0];
    let inside: Vec<f64> = theta_axis
        .iter()
        .map(|&t| emission_inside(t, scenario))
        .collect();
    if inside.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence(
            "emission profile produced a non-finite value".into(),
        ));
    }
    let outside: Vec<f64> = theta_axis
        .iter()
        .zip(inside.iter())
        .map(|(&t, &v)| v * fresnel_power_parallel(t, scenario.n_refr))
        .collect();
    let weighted: Vec<f64> = theta_axis
        .iter()
        .zip(outside.iter())
        .map(|(&t, &v)| v * t.sin())
        .collect();
    let p_out_total = 2.0 * std::f64::consts::PI * simpson_from_samples(&weighted, h);
    Ok(AngularProfile {
        theta_axis: theta_axis.to_vec(),
        inside,
        outside,
        p_out_total,
    })
}

/// Emission profile on the default axis: 1801 points over [0, pi/2].
pub fn emission_profile(scenario: &PhysicalScenario) -> Result<AngularProfile> {
    let m = 1801;
    let h = std::f64::consts::FRAC_PI_2 / (m - 1) as f64;
    let axis: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    emission_profile_on_axis(scenario, &axis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characteristic_angles_survey_values() {
        let (cr, crit) = characteristic_angles_from_beta(0.7, 1.6).unwrap();
        assert!((cr.to_degrees() - 26.765501).abs() < 1e-4);
        assert!((crit.to_degrees() - 38.682187).abs() < 1e-4);
        // Closed-form symmetric point.
        let (cr, crit) = characteristic_angles_from_beta(1.0, std::f64::consts::SQRT_2).unwrap();
        assert!((cr.to_degrees() - 45.0).abs() < 1e-10);
        assert!((crit.to_degrees() - 45.0).abs() < 1e-10);
    }

    #[test]
    fn characteristic_angles_threshold_limit() {
        let (cr, _) = characteristic_angles_from_beta(1.0 / 1.6 + 1e-9, 1.6).unwrap();
        assert!(cr < 1e-3);
        assert!(characteristic_angles_from_beta(0.5, 1.6).is_err());
        assert!(characteristic_angles_from_beta(0.9, 0.9).is_err());
    }

    #[test]
    fn scenario_kinematics() {
        let s = PhysicalScenario::reference();
        assert!((s.beta() - 0.695314041873883).abs() < 1e-14);
        assert!((s.gamma_factor() - 1.391389432485323).abs() < 1e-14);
        assert!((s.p_bar_z() - 2.5053254695611605e6).abs() < 1e-3);
        assert!((s.dp_z() - 2.505325469561).abs() < 1e-9);
        assert!((s.w_min() - 17.7370584467).abs() < 1e-9);
        assert!((s.w_max() - 20.2709239391).abs() < 1e-9);
    }

    #[test]
    fn amplitude_reference_point() {
        // 50-digit independent evaluation of the closed form at k = (5, 5, 30).
        let s = PhysicalScenario::reference();
        let a = cherenkov_amplitude([5.0, 5.0, 30.0], &s);
        assert!((a - 1.2452643302041372e-4).abs() < 1e-16);
    }

    #[test]
    fn amplitude_special_cases() {
        let s = PhysicalScenario::reference();
        assert_eq!(cherenkov_amplitude([0.0, 0.0, 10.0], &s), 0.0);
        // On the Cherenkov cone the sinc factor is exactly 1.
        let (kx, ky) = (3.0, 4.0);
        let kp2: f64 = kx * kx + ky * ky;
        let bn = s.beta() * s.n_refr;
        // k_z = k/(beta*n) with k = sqrt(kp2 + kz^2) solves to:
        let kz = (kp2 / (bn * bn - 1.0)).sqrt();
        let k = (kp2 + kz * kz).sqrt();
        let a = cherenkov_amplitude([kx, ky, kz], &s);
        let expect = (ALPHA / (2.0 * std::f64::consts::PI.powi(2) * s.n_refr)).sqrt()
            * kp2.sqrt()
            / k.powf(1.5)
            * s.l_z;
        assert!((a - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn fresnel_normal_incidence() {
        let tau = fresnel_tau_parallel(0.0, 1.6);
        let pow = fresnel_power_parallel(0.0, 1.6);
        assert!((tau - 1.2307692308).abs() < 1e-9);
        assert!((pow - 0.9467455621).abs() < 1e-9);
        // Past the critical angle everything is internally reflected.
        let crit = (1.0f64 / 1.6).asin();
        assert_eq!(fresnel_tau_parallel(crit + 1e-6, 1.6), 0.0);
        assert_eq!(fresnel_power_parallel(crit + 1e-6, 1.6), 0.0);
        // Power vanishes continuously like cos(theta_t) ~ sqrt(eps).
        let near = fresnel_power_parallel(crit - 1e-8, 1.6);
        assert!(near > 0.0 && near < 2e-3);
    }

    #[test]
    fn region_reference_cap() {
        let s = PhysicalScenario::reference();
        let r = integration_region(0.0, 0.0, &s).unwrap();
        assert!((r.ky_hi - 20.2709239391).abs() < 1e-9);
        assert_eq!(r.ky_lo, 0.0);
        // No energy budget left at the cutoff.
        assert!(integration_region(s.w_max(), 0.0, &s).is_none());
    }

    #[test]
    fn region_uses_max_and_min() {
        let s = PhysicalScenario::reference();
        let w2 = s.w_max();
        let w1 = s.w_min();
        let r = integration_region(5.0, 9.0, &s).unwrap();
        assert!((r.ky_hi - (w2 * w2 - 81.0).sqrt()).abs() < 1e-12);
        let (lo, hi) = r.kz_bounds(3.0).unwrap();
        assert!((hi - (w2 * w2 - 81.0 - 9.0).sqrt()).abs() < 1e-12);
        assert!((lo - (w1 * w1 - 25.0 - 9.0).sqrt()).abs() < 1e-12);
        // Too asymmetric a pair leaves no k'_z interval anywhere: the lower
        // sphere from the smaller k_x clears the upper one from the larger
        // whenever k_hi^2 - k_lo^2 exceeds w2^2 - w1^2.
        let r = integration_region(5.0, 12.0, &s).unwrap();
        assert!(r.kz_bounds(3.0).is_none());
    }

    #[test]
    fn scenario_validation_rejects_bad_configs() {
        let mut s = PhysicalScenario::reference();
        s.e_kin = 1.0; // beta*n < 1
        assert!(s.validate().is_err());
        let mut s = PhysicalScenario::reference();
        s.e_win = (4.0, 3.5);
        assert!(s.validate().is_err());
        let mut s = PhysicalScenario::reference();
        s.grid.n_kx = 100; // even
        assert!(s.validate().is_err());
    }
}
