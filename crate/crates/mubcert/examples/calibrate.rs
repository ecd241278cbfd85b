//! Temporary calibration probe: builds the survey kernel (cached as CSV in
//! target/tmp), runs the full pipeline, and prints every value that the
//! integration suite pins, with timings.

use mubcert::{
    build_kernel, density_xx, optimize_periods, ppt_negativity, verify_unbiasedness, GridSpec,
    MeasurementContext, MomentumKernel, MubPair, PhysicalScenario, ProbeSpec, ResolutionProfile,
    SearchSpec,
};
use std::time::Instant;

fn survey_scenario() -> PhysicalScenario {
    let mut s = PhysicalScenario::reference();
    s.grid = GridSpec {
        n_kx: 361,
        n_ky: 101,
        n_kz: 101,
        n_x: 1001,
    };
    s
}

fn main() {
    let s = survey_scenario();
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../target/tmp");
    std::fs::create_dir_all(dir).unwrap();
    let path = format!("{dir}/kernel_{}.csv", s.hash());
    let t0 = Instant::now();
    let kernel = match std::fs::read_to_string(&path).ok().and_then(|text| {
        MomentumKernel::from_csv(&text)
            .ok()
            .filter(|k| k.scenario_hash == s.hash())
    }) {
        Some(k) => {
            println!("kernel: loaded cache in {:?}", t0.elapsed());
            k
        }
        None => {
            let k = build_kernel(&s).unwrap();
            std::fs::write(&path, k.to_csv()).unwrap();
            println!("kernel: built in {:?}", t0.elapsed());
            k
        }
    };
    println!("trace = {:.9}", kernel.trace_integral());
    for i in [0usize, 89, 178, 249, 320, 355] {
        println!("g[{i}] = {:.9e}", kernel.value(i, i));
    }
    println!("negativity = {:.6}", ppt_negativity(&kernel));

    let t1 = Instant::now();
    let xx = density_xx(&kernel, 40.0).unwrap();
    println!("density_xx: {:?}", t1.elapsed());
    let (ds, q) = xx.shift_profile().unwrap();
    println!("ds = {ds}");
    println!("Q(0) = {:.9e}", q[0]);
    for (idx, s_lab) in [(200usize, "0.5"), (400, "1.0"), (800, "2.0"), (2000, "5.0")] {
        println!("Q({s_lab})/Q(0) = {:.9e}", q[idx] / q[0]);
    }

    let t2 = Instant::now();
    let ideal = MeasurementContext::new(&kernel, &ResolutionProfile::ideal(), 40.0).unwrap();
    println!("ideal ctx: {:?}", t2.elapsed());
    let t3 = Instant::now();
    let blurred =
        MeasurementContext::new(&kernel, &ResolutionProfile::table1_experimental(), 40.0).unwrap();
    println!("blurred ctx: {:?}", t3.elapsed());

    let pi = std::f64::consts::PI;
    let pair10 = MubPair::conjugate_from_tx(10.0, -2.5, -pi / 10.0).unwrap();
    let ts = ideal.tables_at(&pair10).unwrap();
    println!(
        "ideal pos: {:.6} {:.6} {:.6} {:.6}",
        ts.pos.get(0, 0),
        ts.pos.get(1, 1),
        ts.pos.get(0, 1),
        ts.pos.get(1, 0)
    );
    println!(
        "ideal mom: {:.7} {:.7} {:.3e} {:.3e}",
        ts.mom.get(0, 0),
        ts.mom.get(1, 1),
        ts.mom.get(0, 1),
        ts.mom.get(1, 0)
    );
    println!(
        "ideal mixed_xe_pg: {:.7} {:.7} {:.7} {:.7}",
        ts.mixed_xe_pg.get(0, 0),
        ts.mixed_xe_pg.get(0, 1),
        ts.mixed_xe_pg.get(1, 0),
        ts.mixed_xe_pg.get(1, 1)
    );
    println!(
        "ideal mixed_pe_xg: {:.7} {:.7} {:.7} {:.7}",
        ts.mixed_pe_xg.get(0, 0),
        ts.mixed_pe_xg.get(0, 1),
        ts.mixed_pe_xg.get(1, 0),
        ts.mixed_pe_xg.get(1, 1)
    );
    let wit10 = mubcert::mub_witness(&[ts.pos.clone(), ts.mom.clone()]).unwrap();
    println!("ideal witness(T=10) = {:.6}", wit10.witness_sum);

    let t544 = 5.44;
    let pair544 = MubPair::conjugate_from_tx(t544, -t544 / 4.0, -pi / t544).unwrap();
    let tb = blurred.tables_at(&pair544).unwrap();
    println!(
        "blur pos(5.44): {:.6} {:.6} {:.6} {:.6}",
        tb.pos.get(0, 0),
        tb.pos.get(1, 1),
        tb.pos.get(0, 1),
        tb.pos.get(1, 0)
    );
    println!(
        "blur mom(5.44): {:.7} {:.7} {:.7} {:.7}",
        tb.mom.get(0, 0),
        tb.mom.get(1, 1),
        tb.mom.get(0, 1),
        tb.mom.get(1, 0)
    );
    let witb = mubcert::mub_witness(&[tb.pos.clone(), tb.mom.clone()]).unwrap();
    let f = mubcert::fidelity_lower_bound(&tb.pos, &tb.mom).unwrap();
    let (i_vis, ef) = mubcert::ef_lower_bound(f, &tb.pos).unwrap();
    println!(
        "blur chain(5.44): wit={:.6} F={:.6} I={:.6} EF={:.6}",
        witb.witness_sum, f, i_vis, ef
    );

    let t4 = Instant::now();
    let opt = optimize_periods(&blurred, &SearchSpec::default()).unwrap();
    println!(
        "optimizer(fixed): T*={:.5} Tp*={:.5} wit={:.6} evals={} in {:?}",
        opt.best_tx,
        opt.best_tp,
        opt.objective,
        opt.trace.len(),
        t4.elapsed()
    );
    let pair_star =
        MubPair::conjugate_from_tx(opt.best_tx, opt.best_centers.0, opt.best_centers.1).unwrap();
    let tstar = blurred.tables_at(&pair_star).unwrap();
    let f_star = mubcert::fidelity_lower_bound(&tstar.pos, &tstar.mom).unwrap();
    let (_, ef_star) = mubcert::ef_lower_bound(f_star, &tstar.pos).unwrap();
    println!(
        "at T*: mom00={:.6} pos00={:.6} pos01={:.6} F={:.6} EF={:.6}",
        tstar.mom.get(0, 0),
        tstar.pos.get(0, 0),
        tstar.pos.get(0, 1),
        f_star,
        ef_star
    );
    let t5 = Instant::now();
    let mut scan_spec = SearchSpec::default();
    scan_spec.center_mode = mubcert::CenterMode::Scan;
    let opt_scan = optimize_periods(&blurred, &scan_spec).unwrap();
    println!(
        "optimizer(scan): T*={:.5} wit={:.6} centers=({:.4},{:.4}) in {:?}",
        opt_scan.best_tx,
        opt_scan.objective,
        opt_scan.best_centers.0,
        opt_scan.best_centers.1,
        t5.elapsed()
    );

    let t6 = Instant::now();
    let rep = verify_unbiasedness(&pair10, &ProbeSpec::default()).unwrap();
    println!(
        "unbiasedness: x_dev={:.2e} p_dev={:.2e} slit={:.4} H0={:.9} drop={:.4}% in {:?}",
        rep.x_probe_deviation,
        rep.p_probe_deviation,
        rep.slit_deviation,
        rep.entropy_unperturbed,
        rep.entropy_drop_percent,
        t6.elapsed()
    );
}
