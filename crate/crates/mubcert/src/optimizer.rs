//! Search over the one-parameter family of conjugate periodic bases
//! (T_x with T_p = 4 pi / T_x, plus pattern centers) maximizing the witness
//! sum under a detector resolution, and unbiasedness verification of
//! candidate bases.

use crate::cherenkov::MomentumKernel;
use crate::criteria::mub_witness;
use crate::error::{Error, Result};
use crate::measurement::{
    apply_psf, density_mixed, density_pp, density_xx, joint_probabilities, JointDensity,
    JointProbTable, MixedKind, MubPair, PeriodicBinning, ResolutionProfile,
};
use crate::special::gauss_mass;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

/// Blurred joint densities for one kernel and resolution profile, reusable
/// across period candidates (building the position-position profile is the
/// expensive step and is done once).
pub struct MeasurementContext {
    resolution: ResolutionProfile,
    pos: JointDensity,
    mom: JointDensity,
    mixed_xe_pg: JointDensity,
    mixed_pe_xg: JointDensity,
}

/// The four joint probability tables of one basis pair.
#[derive(Debug, Clone, Serialize)]
pub struct TableSet {
    pub pos: JointProbTable,
    pub mom: JointProbTable,
    pub mixed_xe_pg: JointProbTable,
    pub mixed_pe_xg: JointProbTable,
}

impl MeasurementContext {
    /// Build all four densities from the kernel and blur them with the
    /// resolution profile. `x_max` is the half-width of the position window
    /// used for position-carrying densities.
    pub fn new(
        kernel: &MomentumKernel,
        resolution: &ResolutionProfile,
        x_max: f64,
    ) -> Result<Self> {
        resolution.validate()?;
        let pos = apply_psf(&density_xx(kernel, x_max)?, resolution)?;
        let mom = apply_psf(&density_pp(kernel), resolution)?;
        let mixed_xe_pg = apply_psf(&density_mixed(kernel, MixedKind::XePg, x_max)?, resolution)?;
        let mixed_pe_xg = apply_psf(&density_mixed(kernel, MixedKind::PeXg, x_max)?, resolution)?;
        Ok(MeasurementContext {
            resolution: *resolution,
            pos,
            mom,
            mixed_xe_pg,
            mixed_pe_xg,
        })
    }

    pub fn resolution(&self) -> &ResolutionProfile {
        &self.resolution
    }

    /// Blurred position-position density.
    pub fn pos_density(&self) -> &JointDensity {
        &self.pos
    }

    /// Blurred momentum-momentum density.
    pub fn mom_density(&self) -> &JointDensity {
        &self.mom
    }

    pub fn mixed_xe_pg_density(&self) -> &JointDensity {
        &self.mixed_xe_pg
    }

    pub fn mixed_pe_xg_density(&self) -> &JointDensity {
        &self.mixed_pe_xg
    }

    /// All four tables of the pair: same-basis position and momentum plus
    /// the two mixed-basis tables.
    pub fn tables_at(&self, pair: &MubPair) -> Result<TableSet> {
        Ok(TableSet {
            pos: joint_probabilities(&self.pos, &pair.pos, &pair.pos)?,
            mom: joint_probabilities(&self.mom, &pair.mom, &pair.mom)?,
            mixed_xe_pg: joint_probabilities(&self.mixed_xe_pg, &pair.pos, &pair.mom)?,
            mixed_pe_xg: joint_probabilities(&self.mixed_pe_xg, &pair.mom, &pair.pos)?,
        })
    }

    /// Correlated-entry sum of the position table at (t_x, x_cen); for d = 2
    /// the relabeling maximum is max(diagonal, anti-diagonal).
    fn position_correlated(&self, t_x: f64, x_cen: f64) -> Result<f64> {
        let bin = PeriodicBinning::new(t_x, 2, x_cen)?;
        let t = joint_probabilities(&self.pos, &bin, &bin)?;
        Ok(t.diag_sum().max(t.anti_diag_sum()))
    }

    fn momentum_correlated(&self, t_p: f64, p_cen: f64) -> Result<f64> {
        let bin = PeriodicBinning::new(t_p, 2, p_cen)?;
        let t = joint_probabilities(&self.mom, &bin, &bin)?;
        Ok(t.diag_sum().max(t.anti_diag_sum()))
    }
}

/// Whether pattern centers stay at the quarter-period convention or are
/// optimized by a phase scan per basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CenterMode {
    /// x_cen = -T_x/4, p_cen = -T_p/4.
    Fixed,
    /// Coarse 16-point phase scan over one relabeling period, then
    /// parabolic refinement, independently per basis.
    Scan,
}

/// Bounds and tolerance of the period search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Relative tolerance on the returned T_x.
    pub rel_tol: f64,
    pub center_mode: CenterMode,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            t_lo: 3.0,
            t_hi: 20.0,
            rel_tol: 1e-5,
            center_mode: CenterMode::Fixed,
        }
    }
}

/// Outcome of the period optimization.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub best_tx: f64,
    pub best_tp: f64,
    /// (x_cen, p_cen) at the optimum.
    pub best_centers: (f64, f64),
    /// Witness sum of a fresh full-pipeline evaluation at the optimum.
    pub objective: f64,
    /// True when the optimum exceeds the separability threshold.
    pub certifies: bool,
    /// Every (T_x, objective) evaluation in search order.
    pub trace: Vec<(f64, f64)>,
}

impl OptimizationResult {
    /// Search trace as CSV (t_x, t_p, objective).
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t_x,t_p,objective\n");
        for (t, obj) in &self.trace {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                t,
                crate::constants::FOUR_PI / t,
                obj
            ));
        }
        out
    }
}

/// Best center for one basis: 16-point scan over one relabeling period
/// (the objective is periodic with period T/d), then one parabolic
/// refinement through the best point and its neighbors.
fn scan_center(
    eval: &mut impl FnMut(f64) -> Result<f64>,
    c0: f64,
    period: f64,
) -> Result<(f64, f64)> {
    const NSCAN: usize = 16;
    let step = period / NSCAN as f64;
    let mut vals = [0.0; NSCAN];
    let mut best = 0usize;
    for i in 0..NSCAN {
        vals[i] = eval(c0 + i as f64 * step)?;
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let fm = vals[(best + NSCAN - 1) % NSCAN];
    let f0 = vals[best];
    let fp = vals[(best + 1) % NSCAN];
    let denom = fm - 2.0 * f0 + fp;
    let mut c_best = c0 + best as f64 * step;
    let mut v_best = f0;
    if denom < 0.0 {
        let offset = (0.5 * step * (fm - fp) / denom).clamp(-step, step);
        let c_ref = c_best + offset;
        let v_ref = eval(c_ref)?;
        if v_ref > v_best {
            c_best = c_ref;
            v_best = v_ref;
        }
    }
    Ok((c_best, v_best))
}

/// Objective and centers at one period candidate.
fn objective_at(
    ctx: &MeasurementContext,
    t_x: f64,
    mode: CenterMode,
) -> Result<(f64, f64, f64)> {
    let t_p = crate::constants::FOUR_PI / t_x;
    let (x0, p0) = (-t_x / 4.0, -t_p / 4.0);
    match mode {
        CenterMode::Fixed => {
            let obj = ctx.position_correlated(t_x, x0)? + ctx.momentum_correlated(t_p, p0)?;
            Ok((obj, x0, p0))
        }
        CenterMode::Scan => {
            let (xc, xv) = scan_center(
                &mut |c| ctx.position_correlated(t_x, c),
                x0,
                t_x / 2.0,
            )?;
            let (pc, pv) = scan_center(
                &mut |c| ctx.momentum_correlated(t_p, c),
                p0,
                t_p / 2.0,
            )?;
            Ok((xv + pv, xc, pc))
        }
    }
}

/// Maximize the witness sum over T_x (with T_p tied by the conjugate-period
/// constraint) by golden-section search on log T_x, multi-started over three
/// sub-brackets of the bounds. Every candidate satisfies
/// T_x * T_p = 4 pi exactly by construction, and the returned objective is a
/// fresh full-pipeline re-evaluation at the optimum.
pub fn optimize_periods(
    ctx: &MeasurementContext,
    search: &SearchSpec,
) -> Result<OptimizationResult> {
    if !(search.t_lo > 0.0 && search.t_hi > search.t_lo) {
        return Err(Error::InvalidInput(format!(
            "search bounds must satisfy 0 < t_lo < t_hi, got [{}, {}]",
            search.t_lo, search.t_hi
        )));
    }
    if !(search.rel_tol > 0.0 && search.rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "search tolerance must be in (0, 1), got {}",
            search.rel_tol
        )));
    }
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut best: Option<(f64, f64, f64, f64)> = None; // (obj, t, xc, pc)
    {
        let mut eval = |lt: f64| -> Result<f64> {
            let t = lt.exp();
            let (obj, xc, pc) = objective_at(ctx, t, search.center_mode)?;
            trace.push((t, obj));
            if best.map_or(true, |b| obj > b.0) {
                best = Some((obj, t, xc, pc));
            }
            Ok(obj)
        };
        let (l_lo, l_hi) = (search.t_lo.ln(), search.t_hi.ln());
        let third = (l_hi - l_lo) / 3.0;
        let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
        let tol = (1.0 + search.rel_tol).ln();
        for s in 0..3 {
            let (mut a, mut b) = (l_lo + s as f64 * third, l_lo + (s + 1) as f64 * third);
            let mut c1 = b - gr * (b - a);
            let mut c2 = a + gr * (b - a);
            let mut f1 = eval(c1)?;
            let mut f2 = eval(c2)?;
            while b - a > tol {
                if f1 < f2 {
                    a = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = a + gr * (b - a);
                    f2 = eval(c2)?;
                } else {
                    b = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = b - gr * (b - a);
                    f1 = eval(c1)?;
                }
            }
        }
    }
    let (search_obj, t_best, xc, pc) = best.expect("search evaluated at least one candidate");
    // Fresh full-pipeline re-evaluation through the witness (must agree with
    // the search's shortcut, which is the same d = 2 relabeling maximum).
    let pair = MubPair::conjugate_from_tx(t_best, xc, pc)?;
    let tables = ctx.tables_at(&pair)?;
    let witness = mub_witness(&[tables.pos, tables.mom])?;
    let objective = witness.witness_sum;
    if (objective - search_obj).abs() > 1e-9 {
        return Err(Error::NonConvergence(format!(
            "optimum re-evaluation drifted: search {search_obj:.12} vs fresh {objective:.12}"
        )));
    }
    Ok(OptimizationResult {
        best_tx: t_best,
        best_tp: crate::constants::FOUR_PI / t_best,
        best_centers: (xc, pc),
        objective,
        certifies: objective > witness.threshold,
        trace,
    })
}

/// Probe ensemble for the unbiasedness checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeSpec {
    /// Position width (standard deviation, um) of the localized probes; the
    /// effective width is capped at a tenth of the bin width.
    pub sigma: f64,
    /// Probes per basis order.
    pub n_probes: usize,
    pub seed: u64,
    /// Relative periodicity error applied to the momentum element in the
    /// sequential-projection entropy test.
    pub perturbation: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            sigma: 0.1,
            n_probes: 5,
            seed: 2024,
            perturbation: 0.2,
        }
    }
}

/// Unbiasedness verification summary.
#[derive(Debug, Clone, Serialize)]
pub struct UnbiasednessReport {
    /// Max |P(outcome) - 1/d| for position-localized probes measured in
    /// momentum.
    pub x_probe_deviation: f64,
    /// Same for momentum-localized probes measured in position.
    pub p_probe_deviation: f64,
    /// Max of the two orders.
    pub localization_deviation: f64,
    /// |P(hit) - 1/d| of a single-window (non-periodic) projector against a
    /// momentum-localized probe centered on the window.
    pub slit_deviation: f64,
    /// Outcome entropy of the sequential projection chain at the exact
    /// conjugate period.
    pub entropy_unperturbed: f64,
    /// Same with the momentum element's period perturbed.
    pub entropy_perturbed: f64,
    /// 100 (H_exact - H_perturbed) / H_exact.
    pub entropy_drop_percent: f64,
}

/// Outcome entropy of Gaussian -> position element -> momentum element ->
/// position outcomes, on a uniform grid via FFT. `t_p_run` is the momentum
/// element's period; its center keeps the pair's phase fraction.
fn sequential_entropy(pair: &MubPair, sigma0: f64, t_p_run: f64) -> Result<f64> {
    const N: usize = 1 << 15;
    const L: f64 = 400.0;
    let dx = L / N as f64;
    let cp = pair.mom.center * (t_p_run / pair.mom.t);
    let mom_run = PeriodicBinning::new(t_p_run, pair.mom.d, cp)?;
    // Probe centered in the 0-outcome window of the position element.
    let x0 = pair.pos.center + pair.pos.delta() / 2.0;
    let mut psi: Vec<Complex<f64>> = (0..N)
        .map(|j| {
            let x = (j as f64 - (N / 2) as f64) * dx;
            let amp = (-(x - x0).powi(2) / (4.0 * sigma0 * sigma0)).exp();
            let kept = if pair.pos.outcome(x) == 0 { 1.0 } else { 0.0 };
            Complex::new(amp * kept, 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(N).process(&mut psi);
    // The momentum mask is diagonal, so grid-origin phases cancel; only the
    // frequency assigned to each DFT index matters.
    for (m, v) in psi.iter_mut().enumerate() {
        let f = if m < N / 2 {
            m as f64
        } else {
            m as f64 - N as f64
        } / L;
        let p = 2.0 * std::f64::consts::PI * f;
        if mom_run.outcome(p) != 0 {
            *v = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(N).process(&mut psi);
    let mut masses = vec![0.0; pair.pos.d];
    for (j, v) in psi.iter().enumerate() {
        let x = (j as f64 - (N / 2) as f64) * dx;
        masses[pair.pos.outcome(x)] += v.norm_sqr();
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::NonConvergence(
            "sequential projection left no probability mass".into(),
        ));
    }
    Ok(masses
        .iter()
        .map(|&m| {
            let q = m / total;
            if q > 0.0 {
                -q * q.ln()
            } else {
                0.0
            }
        })
        .sum())
}

/// Verify the two defining properties of a conjugate basis pair:
/// (i) localization: probes localized in one basis give uniform outcomes in
/// the other (a localized Gaussian's conjugate distribution is a Gaussian
/// wide against the conjugate period, so each outcome draws 1/d; its
/// in-window placement only rephases the conjugate amplitude while a
/// momentum kick shifts the conjugate mean, so probes are drawn as random
/// kicks);
/// (ii) sequential projections: a probe filtered through a position element
/// then a momentum element lands uniformly on position outcomes (entropy
/// ln d), and a periodicity error in the momentum element lowers that
/// entropy.
///
/// Also reports the contrast of a non-periodic single-window projector,
/// which a localized probe hits with probability far from 1/d.
pub fn verify_unbiasedness(pair: &MubPair, spec: &ProbeSpec) -> Result<UnbiasednessReport> {
    if !(spec.sigma > 0.0) {
        return Err(Error::InvalidInput("probe sigma must be > 0".into()));
    }
    if spec.n_probes == 0 {
        return Err(Error::InvalidInput("need at least one probe".into()));
    }
    if !(spec.perturbation > -1.0) {
        return Err(Error::InvalidInput(
            "perturbation must keep the period positive".into(),
        ));
    }
    let d = pair.pos.d;
    let uniform = 1.0 / d as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Position-localized probes, momentum outcomes. A Gaussian of position
    // width sigma has conjugate width 1/(2 sigma).
    let sigma_x = spec.sigma.min(pair.pos.delta() / 10.0);
    let sigma_p_conj = 0.5 / sigma_x;
    let mut x_probe_deviation: f64 = 0.0;
    for _ in 0..spec.n_probes {
        let kick = (rng.gen::<f64>() - 0.5) * pair.mom.t;
        for i in 0..d {
            let dev = (pair.mom.gauss_bin_mass(i, kick, sigma_p_conj) - uniform).abs();
            x_probe_deviation = x_probe_deviation.max(dev);
        }
    }

    // Momentum-localized probes, position outcomes.
    let sigma_p = spec.sigma.min(pair.mom.delta() / 10.0);
    let sigma_x_conj = 0.5 / sigma_p;
    let mut p_probe_deviation: f64 = 0.0;
    for _ in 0..spec.n_probes {
        let kick = (rng.gen::<f64>() - 0.5) * pair.pos.t;
        for i in 0..d {
            let dev = (pair.pos.gauss_bin_mass(i, kick, sigma_x_conj) - uniform).abs();
            p_probe_deviation = p_probe_deviation.max(dev);
        }
    }

    // Single-window projector of one bin width, centered on the probe: a
    // localized probe hits it with probability well away from 1/d.
    let half = pair.pos.delta() / 2.0;
    let slit_hit = gauss_mass(-half, half, 0.0, sigma_x_conj);
    let slit_deviation = (slit_hit - uniform).abs();

    let entropy_unperturbed = sequential_entropy(pair, spec.sigma, pair.mom.t)?;
    let entropy_perturbed =
        sequential_entropy(pair, spec.sigma, pair.mom.t * (1.0 + spec.perturbation))?;
    let entropy_drop_percent =
        100.0 * (entropy_unperturbed - entropy_perturbed) / entropy_unperturbed;

    Ok(UnbiasednessReport {
        x_probe_deviation,
        p_probe_deviation,
        localization_deviation: x_probe_deviation.max(p_probe_deviation),
        slit_deviation,
        entropy_unperturbed,
        entropy_perturbed,
        entropy_drop_percent,
    })
}
