//! Joint probability tables against an independently frozen evaluation of
//! the same physical pipeline: the position separation profile, the four
//! tables at the survey and experimental resolutions, binning-center
//! symmetries, and count ingestion.

mod common;

use approx::assert_relative_eq;
use common::{blurred_ctx, ideal_ctx, survey_kernel};
use mubcert::{counts_to_probabilities, BasisLabel, MubPair};
use std::f64::consts::PI;

/// The d = 2 conjugate pair at the quarter-period center convention.
fn pair_at(t_x: f64) -> MubPair {
    MubPair::conjugate_from_tx(t_x, -t_x / 4.0, -PI / t_x).unwrap()
}

#[test]
fn separation_profile_frozen() {
    let (ds, q) = ideal_ctx()
        .pos_density()
        .shift_profile()
        .expect("position density stores a separation profile");
    assert_eq!(ds, 0.0025);
    assert!(q.len() > 2000);
    // Independent high-precision evaluation of the closed form.
    assert_relative_eq!(q[0], 10.12806641, max_relative = 1e-3);
    assert_relative_eq!(q[200] / q[0], 1.934396497e-1, max_relative = 1e-3);
    assert_relative_eq!(q[400] / q[0], 6.313433735e-2, max_relative = 1e-3);
    assert_relative_eq!(q[800] / q[0], 7.724522965e-3, max_relative = 1e-3);
    // The s = 5 lobe sits past several oscillations; the reference value
    // carries its own refinement error, so the band is wider.
    assert_relative_eq!(q[2000] / q[0], 1.664755002e-3, max_relative = 5e-3);
    // The profile decays by three orders of magnitude over the window.
    assert!(q[2000] / q[0] < 2e-3);
}

#[test]
fn profile_matches_direct_quadrature() {
    // Restate Q(s) as a plain trapezoid double sum of the even-extended
    // kernel, 4 sum_ij w_i w_j f(k_i, k_j) cos(k_i s) cos(k_j s), and compare
    // against the library profile at a few separations.
    let kernel = survey_kernel();
    let n = kernel.size();
    let h = kernel.step();
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let direct = |s: f64| {
        let cosv: Vec<f64> = (0..n).map(|i| (i as f64 * h * s).cos() * weight(i)).collect();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += kernel.value(i, j) * cosv[j];
            }
            acc += cosv[i] * row;
        }
        4.0 * acc
    };
    let (ds, q) = ideal_ctx().pos_density().shift_profile().unwrap();
    let q0 = q[0];
    for (idx, s) in [(0usize, 0.0), (200, 0.5), (400, 1.0), (800, 2.0)] {
        assert_relative_eq!(idx as f64 * ds, s, epsilon = 1e-12);
        let diff = (q[idx] - direct(s)).abs();
        assert!(
            diff < 2e-3 * q0,
            "profile at s = {s} deviates from direct quadrature by {diff:.3e}"
        );
    }
}

#[test]
fn ideal_tables_frozen() {
    let tables = ideal_ctx().tables_at(&pair_at(10.0)).unwrap();

    let pos = &tables.pos;
    assert_eq!((pos.basis_e, pos.basis_g), (BasisLabel::Position, BasisLabel::Position));
    assert_relative_eq!(pos.sum(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(pos.get(0, 0), 0.443149, max_relative = 1e-3);
    assert_relative_eq!(pos.get(1, 1), 0.448453, max_relative = 1e-3);
    assert_relative_eq!(pos.get(0, 1), 0.054199, max_relative = 1e-3);
    assert_relative_eq!(pos.get(1, 0), 0.054199, max_relative = 1e-3);
    assert!(pos.std_err.is_none());

    // Ideal momentum bins never split a line pair: the off-diagonal cells
    // vanish identically, not just approximately.
    let mom = &tables.mom;
    assert_eq!((mom.basis_e, mom.basis_g), (BasisLabel::Momentum, BasisLabel::Momentum));
    assert_relative_eq!(mom.get(0, 0), 0.5020242, max_relative = 1e-3);
    assert_relative_eq!(mom.get(1, 1), 0.4979758, max_relative = 1e-3);
    assert!(mom.get(0, 1).abs() < 1e-12);
    assert!(mom.get(1, 0).abs() < 1e-12);
    assert_relative_eq!(mom.sum(), 1.0, epsilon = 1e-12);
}

#[test]
fn blurred_tables_frozen() {
    let tables = blurred_ctx().tables_at(&pair_at(5.44)).unwrap();

    let pos = &tables.pos;
    assert_relative_eq!(pos.get(0, 0), 0.391213, max_relative = 1e-3);
    assert_relative_eq!(pos.get(1, 1), 0.369470, max_relative = 1e-3);
    assert_relative_eq!(pos.get(0, 1), 0.119658, max_relative = 1e-3);
    assert_relative_eq!(pos.get(1, 0), 0.119658, max_relative = 1e-3);
    assert_relative_eq!(pos.sum(), 1.0, epsilon = 1e-12);

    let mom = &tables.mom;
    assert_relative_eq!(mom.get(0, 0), 0.4583371, max_relative = 1e-3);
    assert_relative_eq!(mom.get(1, 1), 0.4587214, max_relative = 1e-3);
    assert_relative_eq!(mom.get(0, 1), 0.0414708, max_relative = 1e-3);
    assert_relative_eq!(mom.get(1, 0), 0.0414708, max_relative = 1e-3);
    assert_relative_eq!(mom.sum(), 1.0, epsilon = 1e-12);
}

#[test]
fn mixed_tables_factorize_near_uniformity() {
    // Position and momentum are complementary: each mixed table factorizes
    // into (uniform position marginal) x (momentum marginal), so every cell
    // sits near 1/4 and the momentum marginal is recovered by summing out
    // the position index.
    let tables = ideal_ctx().tables_at(&pair_at(10.0)).unwrap();
    let m0 = 0.5020242;

    let xepg = &tables.mixed_xe_pg;
    assert_eq!((xepg.basis_e, xepg.basis_g), (BasisLabel::Position, BasisLabel::Momentum));
    assert_relative_eq!(xepg.sum(), 1.0, epsilon = 1e-12);
    for i in 0..2 {
        assert_relative_eq!(xepg.get(i, 0), m0 / 2.0, max_relative = 1e-3);
        assert_relative_eq!(xepg.get(i, 1), (1.0 - m0) / 2.0, max_relative = 1e-3);
        for j in 0..2 {
            assert!((xepg.get(i, j) - 0.25).abs() < 2.5e-3);
        }
    }
    // Photon momentum marginal from the mixed table matches the bin mass.
    assert_relative_eq!(xepg.get(0, 0) + xepg.get(1, 0), m0, max_relative = 1e-3);

    let pexg = &tables.mixed_pe_xg;
    assert_eq!((pexg.basis_e, pexg.basis_g), (BasisLabel::Momentum, BasisLabel::Position));
    assert_relative_eq!(pexg.sum(), 1.0, epsilon = 1e-12);
    for j in 0..2 {
        assert_relative_eq!(pexg.get(0, j), m0 / 2.0, max_relative = 1e-3);
        assert_relative_eq!(pexg.get(1, j), (1.0 - m0) / 2.0, max_relative = 1e-3);
    }
    assert_relative_eq!(pexg.get(0, 0) + pexg.get(0, 1), m0, max_relative = 1e-3);

    // The experimental blur keeps the factorized structure. The cells are
    // not pinned to 1/4 here: the 80 um window holds a non-integer number
    // of 5.44 um periods, so the position marginal carries a finite-window
    // imbalance of order T/(4 x_max).
    let blurred = blurred_ctx().tables_at(&pair_at(5.44)).unwrap();
    let m0_blur = 0.4583371 + 0.0414708;
    for (table, mom_axis_is_g) in [(&blurred.mixed_xe_pg, true), (&blurred.mixed_pe_xg, false)] {
        assert_relative_eq!(table.sum(), 1.0, epsilon = 1e-12);
        let row: Vec<f64> = (0..2).map(|i| table.get(i, 0) + table.get(i, 1)).collect();
        let col: Vec<f64> = (0..2).map(|j| table.get(0, j) + table.get(1, j)).collect();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(table.get(i, j), row[i] * col[j], epsilon = 1e-9);
                assert!((table.get(i, j) - 0.25).abs() < 2e-2);
            }
        }
        // Both mixed tables see the same blurred momentum-bin mass.
        let mom_marginal = if mom_axis_is_g { col[0] } else { row[0] };
        assert_relative_eq!(mom_marginal, m0_blur, max_relative = 1e-3);
    }
}

#[test]
fn full_period_center_shift_leaves_tables_unchanged() {
    let t_x = 10.0;
    let t_p = 4.0 * PI / t_x;
    let base = pair_at(t_x);
    let shifted = MubPair::conjugate_from_tx(t_x, -t_x / 4.0 + t_x, -PI / t_x + t_p).unwrap();
    let a = ideal_ctx().tables_at(&base).unwrap();
    let b = ideal_ctx().tables_at(&shifted).unwrap();
    for (ta, tb) in [(&a.pos, &b.pos), (&a.mom, &b.mom), (&a.mixed_xe_pg, &b.mixed_xe_pg)] {
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(ta.get(i, j), tb.get(i, j), epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn half_period_center_shift_swaps_outcomes() {
    let t_x = 10.0;
    let t_p = 4.0 * PI / t_x;
    let base = pair_at(t_x);
    let flipped =
        MubPair::conjugate_from_tx(t_x, -t_x / 4.0 + t_x / 2.0, -PI / t_x + t_p / 2.0).unwrap();
    let a = ideal_ctx().tables_at(&base).unwrap();
    let b = ideal_ctx().tables_at(&flipped).unwrap();
    // Shifting both pattern centers by half a period relabels every outcome,
    // so P'(i, j) = P(1 - i, 1 - j).
    for (ta, tb) in [(&a.pos, &b.pos), (&a.mom, &b.mom)] {
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(tb.get(i, j), ta.get(1 - i, 1 - j), epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn counts_ingestion_round_trip() {
    let counts = vec![vec![389u64, 111], vec![111, 389]];
    let table =
        counts_to_probabilities(&counts, BasisLabel::Position, BasisLabel::Position).unwrap();
    assert_eq!(table.d, 2);
    assert_relative_eq!(table.get(0, 0), 0.389, epsilon = 1e-15);
    assert_relative_eq!(table.get(0, 1), 0.111, epsilon = 1e-15);
    assert_relative_eq!(table.sum(), 1.0, epsilon = 1e-15);
    let se = table.std_err.as_ref().expect("counts carry standard errors");
    assert_relative_eq!(se[0], (0.389_f64 * 0.611 / 1000.0).sqrt(), epsilon = 1e-15);

    // Degenerate inputs are rejected rather than propagated.
    assert!(counts_to_probabilities(&[vec![0u64, 0], vec![0, 0]], BasisLabel::Position, BasisLabel::Momentum).is_err());
    assert!(counts_to_probabilities(&[vec![1u64, 2, 3], vec![4, 5, 6]], BasisLabel::Position, BasisLabel::Momentum).is_err());
}
