//! Physical constants in the crate's unit system (um, eV, rad/um).

/// hbar*c in eV*um.
pub const HBARC: f64 = 0.19732697;

/// Electron rest energy m_e*c^2 in eV.
pub const ME_C2: f64 = 511_000.0;

/// Fine-structure constant.
pub const ALPHA: f64 = 1.0 / 137.035999;

/// Conjugate-period product T_x * T_p for d = 2, u = 1 (momenta in hbar/um).
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
