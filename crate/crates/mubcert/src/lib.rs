//! Simulation and certification engine for electron-photon pairs produced by
//! Cherenkov emission in a thin dielectric foil inside an electron microscope.
//!
//! The crate builds the reduced two-particle momentum kernel by numerical
//! quadrature over the constrained photon wave-vector region, turns it into
//! joint probability densities for position/momentum measurement combinations,
//! applies detector point-spread-function blurring, coarse-grains each variable
//! into periodic two-outcome bins, and evaluates entanglement criteria on the
//! resulting joint probability tables: a mutually-unbiased-basis correlation
//! witness, a fidelity lower bound, an entanglement-of-formation bound, a
//! partial-transpose negativity indicator, and a Gaussian robustness model for
//! the feasible binning periods.
//!
//! Units throughout: lengths in um, wave numbers and momenta in rad/um
//! (momentum in units of hbar, so momentum period times position period is the
//! dimensionless 4*pi for a conjugate pair), energies in eV, angles in rad.
//!
//! Modules mirror the pipeline stages:
//! - [`cherenkov`]: physical scenario, amplitudes, the momentum kernel,
//!   angular emission profiles.
//! - [`measurement`]: densities, PSF blurring, periodic binning, probability
//!   tables, counts ingestion.
//! - [`criteria`]: witness, fidelity and E_F bounds, negativity, robustness.
//! - [`optimizer`]: period/center search and unbiasedness verification.
//! - [`deflection`]: deflection-angle kinematics and windowed angle densities.
//! - [`report`]: manifests, end-to-end runs, JSON/CSV artifacts.

pub mod cherenkov;
pub mod constants;
pub mod criteria;
pub mod deflection;
mod error;
pub mod measurement;
pub mod optimizer;
pub mod quad;
pub mod report;
pub mod special;
mod spline;

pub use cherenkov::{
    build_kernel, characteristic_angles, characteristic_angles_from_beta, cherenkov_amplitude,
    emission_profile, emission_profile_on_axis, fresnel_power_parallel, fresnel_tau_parallel,
    integration_region, kernel_element, AngularProfile, GridSpec, IntegrationRegion,
    MomentumKernel, PhysicalScenario,
};
pub use criteria::{
    ef_lower_bound, ef_lower_bound_log2, feasible_period_interval, fidelity_lower_bound,
    mub_witness, ppt_negativity, robustness_measure, FeasiblePeriods, RobustnessQuery,
    WitnessResult,
};
pub use deflection::{
    electron_angle_from_photon, joint_angle_density, transverse_k_from_angles, AngleDensityGrid,
    KinematicContext,
};
pub use error::{Error, Result};
pub use measurement::{
    apply_psf, bin_outcome, counts_to_probabilities, density_mixed, density_pp, density_xx,
    joint_probabilities, BasisLabel, JointDensity, JointProbTable, MixedKind, MubPair,
    PeriodicBinning, ResolutionProfile,
};
pub use optimizer::{
    optimize_periods, verify_unbiasedness, CenterMode, MeasurementContext, OptimizationResult,
    ProbeSpec, SearchSpec, TableSet, UnbiasednessReport,
};
pub use report::{
    density_csvs, emission_csv, kernel_csv, run_certify, run_counts, run_sweep, sweep_csv,
    BinningDirective, BinningUsed, CertificationReport, CountsInput, ReportConstants,
    ReportTables, RunManifest, SweepRow,
};
