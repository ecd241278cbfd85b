//! Shared fixtures for the integration suite: the reference-scenario kernel
//! at survey resolution, cached on disk between test binaries, and the
//! measurement contexts derived from it.

// Each test binary uses its own subset of the fixtures.
#![allow(dead_code)]

use mubcert::{
    build_kernel, GridSpec, MeasurementContext, MomentumKernel, PhysicalScenario,
    ResolutionProfile,
};
use std::path::PathBuf;
use std::sync::OnceLock;

/// Reference scenario at the survey grid: 361 outer k_x points so the kernel
/// axis matches the tabulated marginals, inner Simpson grids refined on
/// demand by the element integrator.
pub fn survey_scenario() -> PhysicalScenario {
    let mut s = PhysicalScenario::reference();
    s.grid = GridSpec {
        n_kx: 361,
        n_ky: 101,
        n_kz: 101,
        n_x: 1001,
    };
    s
}

fn cache_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

/// The survey kernel, built once per test binary and cached as CSV across
/// binaries. The cache is keyed by the scenario hash and revalidated by the
/// kernel constructor (symmetry, trace) on load.
pub fn survey_kernel() -> &'static MomentumKernel {
    static KERNEL: OnceLock<MomentumKernel> = OnceLock::new();
    KERNEL.get_or_init(|| {
        let s = survey_scenario();
        let path = cache_path(&format!("kernel_{}.csv", s.hash()));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(k) = MomentumKernel::from_csv(&text) {
                if k.scenario_hash == s.hash() {
                    return k;
                }
            }
        }
        let k = build_kernel(&s).expect("survey kernel build");
        let _ = std::fs::write(&path, k.to_csv());
        k
    })
}

/// Ideal-detector context over the [-40, 40] um position window.
pub fn ideal_ctx() -> &'static MeasurementContext {
    static CTX: OnceLock<MeasurementContext> = OnceLock::new();
    CTX.get_or_init(|| {
        MeasurementContext::new(survey_kernel(), &ResolutionProfile::ideal(), 40.0)
            .expect("ideal context")
    })
}

/// Experimental-resolution context (Table-1 FWHMs) over the same window.
pub fn blurred_ctx() -> &'static MeasurementContext {
    static CTX: OnceLock<MeasurementContext> = OnceLock::new();
    CTX.get_or_init(|| {
        MeasurementContext::new(
            survey_kernel(),
            &ResolutionProfile::table1_experimental(),
            40.0,
        )
        .expect("blurred context")
    })
}
