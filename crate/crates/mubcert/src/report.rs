//! End-to-end orchestration: manifests, the certification pipeline, counts
//! ingestion, parameter sweeps, and reproducible JSON/CSV artifacts.

use crate::cherenkov::{build_kernel, emission_profile, AngularProfile, MomentumKernel, PhysicalScenario};
use crate::constants::{ALPHA, HBARC, ME_C2};
use crate::criteria::{
    ef_lower_bound, ef_lower_bound_log2, fidelity_lower_bound, mub_witness, ppt_negativity,
    WitnessResult,
};
use crate::error::{Error, Result};
use crate::measurement::{counts_to_probabilities, BasisLabel, JointProbTable, MubPair, ResolutionProfile};
use crate::optimizer::{
    optimize_periods, CenterMode, MeasurementContext, OptimizationResult, SearchSpec, TableSet,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// How the binning periods are chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BinningDirective {
    /// Use the given position period (momentum period tied by the conjugate
    /// constraint) and pattern centers.
    Fixed { t_x: f64, x_cen: f64, p_cen: f64 },
    /// Search the period family for the maximal witness sum.
    Optimize {
        t_lo: f64,
        t_hi: f64,
        rel_tol: f64,
        scan_centers: bool,
    },
}

impl BinningDirective {
    /// The quarter-period center convention at a given position period.
    pub fn fixed_at(t_x: f64) -> Self {
        BinningDirective::Fixed {
            t_x,
            x_cen: -t_x / 4.0,
            p_cen: -std::f64::consts::PI / t_x,
        }
    }
}

/// Everything defining one run; identical manifests produce identical
/// outputs, and every artifact records the manifest hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: PhysicalScenario,
    pub resolution: ResolutionProfile,
    pub binning: BinningDirective,
    /// Requested artifact names (interpreted by the CLI layer).
    #[serde(default)]
    pub outputs: Vec<String>,
    /// Seed for any sampled diagnostics.
    #[serde(default)]
    pub seed: u64,
}

impl RunManifest {
    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("manifest serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

/// Physical constants echoed into every report for auditability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReportConstants {
    pub hbarc_ev_um: f64,
    pub me_c2_ev: f64,
    pub alpha: f64,
}

impl ReportConstants {
    fn current() -> Self {
        ReportConstants {
            hbarc_ev_um: HBARC,
            me_c2_ev: ME_C2,
            alpha: ALPHA,
        }
    }
}

/// The binning actually applied (after optimization, if requested).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BinningUsed {
    pub t_x: f64,
    pub t_p: f64,
    pub x_cen: f64,
    pub p_cen: f64,
}

/// Probability tables carried by a report; mixed tables exist only when the
/// run measured them.
#[derive(Debug, Clone, Serialize)]
pub struct ReportTables {
    pub pos: JointProbTable,
    pub mom: JointProbTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_xe_pg: Option<JointProbTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_pe_xg: Option<JointProbTable>,
}

/// Full result of a certification run.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub schema_version: u32,
    pub manifest_hash: String,
    pub manifest: RunManifest,
    pub constants: ReportConstants,
    /// Pipeline stages executed, in order.
    pub stages_run: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binning_used: Option<BinningUsed>,
    pub tables: ReportTables,
    pub witness: WitnessResult,
    pub f_tilde: f64,
    pub i_bound: f64,
    /// Entanglement-of-formation bound, natural-log convention.
    pub ef_nat: f64,
    /// Same bound in bits.
    pub ef_log2: f64,
    /// Kernel partial-transpose off-diagonal mass; absent in counts mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negativity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationResult>,
    pub entangled: bool,
}

impl CertificationReport {
    /// Deterministic pretty JSON (struct field order, no timestamps).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Entanglement-criteria block evaluated on one table set.
struct CriteriaBlock {
    witness: WitnessResult,
    f_tilde: f64,
    i_bound: f64,
    ef_nat: f64,
    ef_log2: f64,
}

fn evaluate_criteria(pos: &JointProbTable, mom: &JointProbTable) -> Result<CriteriaBlock> {
    let witness = mub_witness(&[pos.clone(), mom.clone()])?;
    let f_tilde = fidelity_lower_bound(pos, mom)?;
    let (i_bound, ef_nat) = ef_lower_bound(f_tilde, pos)?;
    let (_, ef_log2) = ef_lower_bound_log2(f_tilde, pos)?;
    Ok(CriteriaBlock {
        witness,
        f_tilde,
        i_bound,
        ef_nat,
        ef_log2,
    })
}

/// Resolve the binning directive to a concrete pair, optimizing if asked.
fn resolve_pair(
    ctx: &MeasurementContext,
    binning: &BinningDirective,
) -> Result<(MubPair, Option<OptimizationResult>)> {
    match *binning {
        BinningDirective::Fixed { t_x, x_cen, p_cen } => {
            Ok((MubPair::conjugate_from_tx(t_x, x_cen, p_cen)?, None))
        }
        BinningDirective::Optimize {
            t_lo,
            t_hi,
            rel_tol,
            scan_centers,
        } => {
            let spec = SearchSpec {
                t_lo,
                t_hi,
                rel_tol,
                center_mode: if scan_centers {
                    CenterMode::Scan
                } else {
                    CenterMode::Fixed
                },
            };
            let opt = optimize_periods(ctx, &spec)?;
            let pair =
                MubPair::conjugate_from_tx(opt.best_tx, opt.best_centers.0, opt.best_centers.1)?;
            Ok((pair, Some(opt)))
        }
    }
}

/// Run the full physics pipeline: kernel quadrature, densities, PSF,
/// binning (optimized if the manifest asks), tables, and all criteria.
/// Errors carry the failing stage.
pub fn run_certify(manifest: &RunManifest) -> Result<CertificationReport> {
    let mut stages = Vec::new();
    manifest
        .scenario
        .validate()
        .map_err(|e| e.in_stage("validate"))?;
    manifest
        .resolution
        .validate()
        .map_err(|e| e.in_stage("validate"))?;
    stages.push("validate".to_string());

    let kernel = build_kernel(&manifest.scenario).map_err(|e| e.in_stage("kernel"))?;
    stages.push("kernel".to_string());

    let ctx = MeasurementContext::new(&kernel, &manifest.resolution, manifest.scenario.x_max)
        .map_err(|e| e.in_stage("densities"))?;
    stages.push("densities".to_string());

    let (pair, optimization) = resolve_pair(&ctx, &manifest.binning)
        .map_err(|e| e.in_stage("binning"))?;
    if optimization.is_some() {
        stages.push("optimize".to_string());
    }
    stages.push("binning".to_string());

    let tables = ctx.tables_at(&pair).map_err(|e| e.in_stage("tables"))?;
    stages.push("tables".to_string());

    let crit =
        evaluate_criteria(&tables.pos, &tables.mom).map_err(|e| e.in_stage("criteria"))?;
    let negativity = ppt_negativity(&kernel);
    stages.push("criteria".to_string());

    let entangled = crit.witness.entangled || crit.f_tilde > 0.5;
    Ok(CertificationReport {
        schema_version: 1,
        manifest_hash: manifest.hash(),
        manifest: manifest.clone(),
        constants: ReportConstants::current(),
        stages_run: stages,
        binning_used: Some(BinningUsed {
            t_x: pair.pos.t,
            t_p: pair.mom.t,
            x_cen: pair.pos.center,
            p_cen: pair.mom.center,
        }),
        tables: ReportTables {
            pos: tables.pos,
            mom: tables.mom,
            mixed_xe_pg: Some(tables.mixed_xe_pg),
            mixed_pe_xg: Some(tables.mixed_pe_xg),
        },
        witness: crit.witness,
        f_tilde: crit.f_tilde,
        i_bound: crit.i_bound,
        ef_nat: crit.ef_nat,
        ef_log2: crit.ef_log2,
        negativity: Some(negativity),
        optimization,
        entangled,
    })
}

/// Measured coincidence counts per basis pair; mixed tables are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsInput {
    pub pos: Vec<Vec<u64>>,
    pub mom: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_xe_pg: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_pe_xg: Option<Vec<Vec<u64>>>,
}

/// Certification from measured counts alone: normalizes the tables and
/// evaluates the criteria, skipping every quadrature stage.
pub fn run_counts(manifest: &RunManifest, counts: &CountsInput) -> Result<CertificationReport> {
    let mut stages = vec!["validate".to_string()];
    let pos = counts_to_probabilities(&counts.pos, BasisLabel::Position, BasisLabel::Position)
        .map_err(|e| e.in_stage("counts_ingest"))?;
    let mom = counts_to_probabilities(&counts.mom, BasisLabel::Momentum, BasisLabel::Momentum)
        .map_err(|e| e.in_stage("counts_ingest"))?;
    let mixed_xe_pg = counts
        .mixed_xe_pg
        .as_ref()
        .map(|c| counts_to_probabilities(c, BasisLabel::Position, BasisLabel::Momentum))
        .transpose()
        .map_err(|e| e.in_stage("counts_ingest"))?;
    let mixed_pe_xg = counts
        .mixed_pe_xg
        .as_ref()
        .map(|c| counts_to_probabilities(c, BasisLabel::Momentum, BasisLabel::Position))
        .transpose()
        .map_err(|e| e.in_stage("counts_ingest"))?;
    stages.push("counts_ingest".to_string());

    let crit = evaluate_criteria(&pos, &mom).map_err(|e| e.in_stage("criteria"))?;
    stages.push("criteria".to_string());

    let binning_used = match manifest.binning {
        BinningDirective::Fixed { t_x, x_cen, p_cen } => Some(BinningUsed {
            t_x,
            t_p: crate::constants::FOUR_PI / t_x,
            x_cen,
            p_cen,
        }),
        BinningDirective::Optimize { .. } => None,
    };
    let entangled = crit.witness.entangled || crit.f_tilde > 0.5;
    Ok(CertificationReport {
        schema_version: 1,
        manifest_hash: manifest.hash(),
        manifest: manifest.clone(),
        constants: ReportConstants::current(),
        stages_run: stages,
        binning_used,
        tables: ReportTables {
            pos,
            mom,
            mixed_xe_pg,
            mixed_pe_xg,
        },
        witness: crit.witness,
        f_tilde: crit.f_tilde,
        i_bound: crit.i_bound,
        ef_nat: crit.ef_nat,
        ef_log2: crit.ef_log2,
        negativity: None,
        optimization: None,
        entangled,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub t_x: f64,
    pub t_p: f64,
    pub witness_sum: f64,
    pub f_tilde: f64,
    pub i_bound: f64,
    pub ef_nat: f64,
    pub negativity: f64,
    /// Total transmitted emission probability of the swept scenario.
    pub p_out: f64,
}

fn sweep_row(
    axis: &str,
    value: f64,
    pair: &MubPair,
    tables: &TableSet,
    negativity: f64,
    p_out: f64,
) -> Result<SweepRow> {
    let crit = evaluate_criteria(&tables.pos, &tables.mom)?;
    Ok(SweepRow {
        axis: axis.to_string(),
        value,
        t_x: pair.pos.t,
        t_p: pair.mom.t,
        witness_sum: crit.witness.witness_sum,
        f_tilde: crit.f_tilde,
        i_bound: crit.i_bound,
        ef_nat: crit.ef_nat,
        negativity,
        p_out,
    })
}

/// Scale every FWHM of a resolution profile.
fn scale_resolution(r: &ResolutionProfile, s: f64) -> ResolutionProfile {
    ResolutionProfile {
        fwhm_x_e: r.fwhm_x_e * s,
        fwhm_p_e: r.fwhm_p_e * s,
        fwhm_x_g: r.fwhm_x_g * s,
        fwhm_p_g: r.fwhm_p_g * s,
    }
}

/// Sweep one recognized parameter axis, producing a criteria row per value.
///
/// Axes: "t_x" (binning period; kernel built once), "fwhm_scale" (all
/// resolution FWHMs scaled; kernel built once), "e_win_lo" (window lower
/// edge; kernel rebuilt per value), "l_z" (foil thickness; kernel rebuilt
/// per value). An empty value list is an empty sweep, not an error.
pub fn run_sweep(manifest: &RunManifest, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    match axis {
        "t_x" | "fwhm_scale" | "e_win_lo" | "l_z" => {}
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown sweep axis {other:?}; expected one of t_x, fwhm_scale, e_win_lo, l_z"
            )))
        }
    }
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(values.len());
    match axis {
        "t_x" => {
            let kernel = build_kernel(&manifest.scenario).map_err(|e| e.in_stage("kernel"))?;
            let ctx = MeasurementContext::new(
                &kernel,
                &manifest.resolution,
                manifest.scenario.x_max,
            )
            .map_err(|e| e.in_stage("densities"))?;
            let negativity = ppt_negativity(&kernel);
            let p_out = emission_profile(&manifest.scenario)
                .map_err(|e| e.in_stage("emission"))?
                .p_out_total;
            for &t_x in values {
                let (pair, _) = resolve_pair(&ctx, &BinningDirective::fixed_at(t_x))
                    .map_err(|e| e.in_stage("binning"))?;
                let tables = ctx.tables_at(&pair).map_err(|e| e.in_stage("tables"))?;
                rows.push(sweep_row(axis, t_x, &pair, &tables, negativity, p_out)?);
            }
        }
        "fwhm_scale" => {
            let kernel = build_kernel(&manifest.scenario).map_err(|e| e.in_stage("kernel"))?;
            let negativity = ppt_negativity(&kernel);
            let p_out = emission_profile(&manifest.scenario)
                .map_err(|e| e.in_stage("emission"))?
                .p_out_total;
            for &s in values {
                let resolution = scale_resolution(&manifest.resolution, s);
                let ctx = MeasurementContext::new(&kernel, &resolution, manifest.scenario.x_max)
                    .map_err(|e| e.in_stage("densities"))?;
                let (pair, _) = resolve_pair(&ctx, &manifest.binning)
                    .map_err(|e| e.in_stage("binning"))?;
                let tables = ctx.tables_at(&pair).map_err(|e| e.in_stage("tables"))?;
                rows.push(sweep_row(axis, s, &pair, &tables, negativity, p_out)?);
            }
        }
        _ => {
            for &v in values {
                let mut scenario = manifest.scenario.clone();
                match axis {
                    "e_win_lo" => scenario.e_win.0 = v,
                    "l_z" => scenario.l_z = v,
                    _ => unreachable!(),
                }
                scenario.validate().map_err(|e| e.in_stage("validate"))?;
                let kernel = build_kernel(&scenario).map_err(|e| e.in_stage("kernel"))?;
                let ctx = MeasurementContext::new(&kernel, &manifest.resolution, scenario.x_max)
                    .map_err(|e| e.in_stage("densities"))?;
                let (pair, _) = resolve_pair(&ctx, &manifest.binning)
                    .map_err(|e| e.in_stage("binning"))?;
                let tables = ctx.tables_at(&pair).map_err(|e| e.in_stage("tables"))?;
                let negativity = ppt_negativity(&kernel);
                let p_out = emission_profile(&scenario)
                    .map_err(|e| e.in_stage("emission"))?
                    .p_out_total;
                rows.push(sweep_row(axis, v, &pair, &tables, negativity, p_out)?);
            }
        }
    }
    Ok(rows)
}

/// Sweep rows as CSV with a self-describing header.
pub fn sweep_csv(manifest_hash: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("# manifest_hash,{manifest_hash}\n");
    out.push_str("axis,value,t_x,t_p,witness_sum,f_tilde,i_bound,ef_nat,negativity,p_out\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.axis,
            r.value,
            r.t_x,
            r.t_p,
            r.witness_sum,
            r.f_tilde,
            r.i_bound,
            r.ef_nat,
            r.negativity,
            r.p_out
        ));
    }
    out
}

/// Emission profile as CSV (theta, inside, outside) with the manifest hash.
pub fn emission_csv(manifest_hash: &str, profile: &AngularProfile) -> String {
    let mut out = format!("# manifest_hash,{manifest_hash}\n");
    out.push_str(&format!("# p_out_total,{:.16e}\n", profile.p_out_total));
    out.push_str("theta,inside,outside\n");
    for i in 0..profile.theta_axis.len() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            profile.theta_axis[i], profile.inside[i], profile.outside[i]
        ));
    }
    out
}

/// The four blurred density CSVs of a context, each stamped with the
/// manifest hash: (artifact name, content).
pub fn density_csvs(ctx: &MeasurementContext, manifest_hash: &str) -> Vec<(String, String)> {
    let stamp = |body: String| format!("# manifest_hash,{manifest_hash}\n{body}");
    vec![
        ("density_pos.csv".to_string(), stamp(ctx.pos_density().to_csv())),
        ("density_mom.csv".to_string(), stamp(ctx.mom_density().to_csv())),
        (
            "density_mixed_xe_pg.csv".to_string(),
            stamp(ctx.mixed_xe_pg_density().to_csv()),
        ),
        (
            "density_mixed_pe_xg.csv".to_string(),
            stamp(ctx.mixed_pe_xg_density().to_csv()),
        ),
    ]
}

/// Momentum kernel CSV stamped with the manifest hash.
pub fn kernel_csv(kernel: &MomentumKernel, manifest_hash: &str) -> String {
    format!("# manifest_hash,{manifest_hash}\n{}", kernel.to_csv())
}
