use std::f64::consts::PI;

use mmwave_acs::channel::{array_response, build_dictionary, AngleGrid, UlaGeometry};
use mmwave_acs::codebook::{
    build_codebook, gain_analysis, make_candidates_beamsteering, make_candidates_quantized, omp_hybrid_design,
    subset_mask, BeamConstraint, BeamVector, CodebookLayout, HierarchicalCodebook, IdealSolver, DEFAULT_LOADING,
    HYBRID_LOADING,
};
use mmwave_acs::linalg::{complex_gaussian, max_abs_diff, CMat, CVec};
use mmwave_acs::link::{trial_rng, LinkConfig, LinkSetup};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

#[test]
fn single_candidate_is_broadside() {
    let g = UlaGeometry::half_wavelength(8).unwrap();
    let c = make_candidates_beamsteering(&g, 1, 16).unwrap();
    assert_eq!(c.len(), 1);
    assert!(max_abs_diff(&c.column(0), &array_response(&g, 0.0)) < 1e-15);
}

#[test]
fn fine_phase_quantization_tracks_steering() {
    let g = UlaGeometry::half_wavelength(16).unwrap();
    let q = make_candidates_quantized(&g, 32, 32, 16).unwrap();
    let s = make_candidates_beamsteering(&g, 32, 32).unwrap();
    assert_eq!(q.len(), s.len());
    let amp = 1.0 / 4.0;
    for t in 0..q.len() {
        for (a, b) in q.column(t).iter().zip(s.column(t).iter()) {
            assert!((a.norm() - amp).abs() < 1e-14);
            let d = (a / b).arg().abs();
            assert!(d < 2.0 * PI / 65536.0, "{d}");
        }
    }
}

#[test]
fn layouts_follow_range_formulas() {
    let l = CodebookLayout::single_path(8, 2).unwrap();
    assert_eq!(l.levels(), 3);
    assert_eq!((0..3).map(|s| l.subset_count(s)).collect::<Vec<_>>(), vec![1, 2, 4]);
    assert_eq!(subset_mask(&l, 0, 0).unwrap().supports, vec![0..4, 4..8]);
    assert_eq!(subset_mask(&l, 2, 0).unwrap().supports, vec![0..1, 1..2]);

    assert_eq!(CodebookLayout::single_path(64, 2).unwrap().levels(), 6);

    let m = CodebookLayout::multi_path(64, 2, 2).unwrap();
    assert_eq!(m.levels(), 5);
    assert_eq!(m.subset_count(0), 1);
    let mask = subset_mask(&m, 0, 0).unwrap();
    assert_eq!(mask.num_columns(), 4);
    assert!(mask.supports.iter().all(|r| r.len() == 16));

    let err = CodebookLayout::multi_path(60, 2, 1).unwrap_err().to_string();
    assert!(err.contains("N = L_d * K^S"), "{err}");
}

#[test]
fn ideal_solution_is_least_squares_optimal() {
    let mut rng = trial_rng(21, 0);
    let g = UlaGeometry::half_wavelength(8).unwrap();
    let dict = build_dictionary(&g, &AngleGrid::new(16).unwrap()).unwrap();
    let solver = IdealSolver::new(&dict, DEFAULT_LOADING).unwrap();
    assert!(!solver.is_loaded());
    let a = dict.matrix();
    for _ in 0..20 {
        let targets = DMatrix::from_fn(16, 3, |_, _| rng.random_range(-1.0..1.0));
        let f = solver.solve(&targets);
        let gc = targets.map(|x| Complex64::new(x, 0.0));
        let oracle = (a * a.adjoint()).lu().solve(&(a * &gc)).unwrap();
        let r = (a.adjoint() * &f - &gc).norm();
        let r_oracle = (a.adjoint() * &oracle - &gc).norm();
        assert!(r <= r_oracle * (1.0 + 1e-9) + 1e-12);
        for _ in 0..5 {
            let bump = CMat::from_fn(8, 3, |_, _| complex_gaussian(&mut rng, 1e-3));
            assert!(r <= (a.adjoint() * (&f + bump) - &gc).norm());
        }
    }
}

#[test]
fn all_ones_mask_over_broadside_grid() {
    let g = UlaGeometry::half_wavelength(4).unwrap();
    let dict = build_dictionary(&g, &AngleGrid::new(8).unwrap()).unwrap();
    let solver = IdealSolver::new(&dict, DEFAULT_LOADING).unwrap();
    let ones = DMatrix::from_element(8, 1, 1.0);
    let f = solver.solve(&ones);
    let a = dict.matrix();
    let gc = ones.map(|x| Complex64::new(x, 0.0));
    let rhs = a * &gc;
    let normal = a * a.adjoint() * &f;
    assert!((normal - rhs).norm() < 1e-9 * (a * &gc).norm());
}

#[test]
fn consistent_square_system_is_solved_exactly() {
    let mut rng = trial_rng(22, 0);
    let g = UlaGeometry::half_wavelength(8).unwrap();
    let dict = build_dictionary(&g, &AngleGrid::new(8).unwrap()).unwrap();
    let solver = IdealSolver::new(&dict, DEFAULT_LOADING).unwrap();
    let a = dict.matrix();
    let x = CMat::from_fn(8, 2, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0));
    let g_c = a.adjoint() * &x;
    let real = g_c.map(|z| z.re);
    let imag = g_c.map(|z| z.im);
    let f = solver.solve(&real) + solver.solve(&imag) * Complex64::new(0.0, 1.0);
    assert!((a.adjoint() * f - g_c).norm() < 1e-8);
}

#[test]
fn omp_recovers_a_candidate_column() {
    let g = UlaGeometry::half_wavelength(16).unwrap();
    let c = make_candidates_quantized(&g, 32, 32, 7).unwrap();
    let target = c.column(5) * Complex64::new(0.0, 2.0);
    let b = omp_hybrid_design(&target, &c, 1).unwrap();
    assert_eq!(b.rf_columns, vec![5]);
    assert_eq!(b.baseband.len(), 1);
    assert!(b.residual_norms[0] < 1e-12);
}

#[test]
fn more_rf_chains_follow_the_ideal_beam_closer() {
    let g = UlaGeometry::half_wavelength(32).unwrap();
    let dict = build_dictionary(&g, &AngleGrid::new(64).unwrap()).unwrap();
    let layout = CodebookLayout::single_path(64, 2).unwrap();
    let ideal = build_codebook(&dict, &layout, &BeamConstraint::Unconstrained, HYBRID_LOADING).unwrap();
    let target = ideal.beam(1, 0).weights().clone();
    let cand = make_candidates_quantized(&g, 128, 64, 7).unwrap();
    let a = dict.matrix();
    let dev: Vec<f64> = [5, 10, 15]
        .iter()
        .map(|&n| {
            let b = omp_hybrid_design(&target, &cand, n).unwrap();
            (a.adjoint() * (b.weights() - &target)).norm()
        })
        .collect();
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
}

#[test]
fn unit_norm_beams_on_every_level() {
    let setup = LinkSetup::new(&LinkConfig::default()).unwrap();
    for cb in [&setup.bs_codebook, &setup.ms_codebook] {
        for s in 0..cb.levels() {
            assert!(cb.level(s).iter().all(|b| (b.weights().norm() - 1.0).abs() < 1e-10));
        }
    }
}

#[test]
fn default_hybrid_ratios_are_finite() {
    let setup = LinkSetup::new(&LinkConfig::default()).unwrap();
    let a = gain_analysis(&setup.bs_codebook, &setup.ms_codebook, &setup.bs_dict, &setup.ms_dict).unwrap();
    assert_eq!(a.levels.len(), 6);
    let frozen = [
        0.07716119707716021,
        0.003807260551599524,
        0.15896336257392216,
        0.7624502451514555,
        0.7030084952124995,
        0.8938702803126499,
    ];
    for (l, b) in a.levels.iter().zip(frozen) {
        assert!(l.beta.is_finite() && l.beta > 0.0);
        assert!((l.beta / b - 1.0).abs() < 1e-6, "level {}: {} vs {b}", l.level, l.beta);
        assert!(l.min_forward <= l.forward_at_beta);
    }
}

#[test]
fn unconstrained_beams_separate_every_level() {
    let link = LinkConfig {
        bs_antennas: 16,
        ms_antennas: 16,
        resolution: 16,
        codebook: mmwave_acs::link::CodebookKind::Ideal,
        phase_bits: None,
        ..Default::default()
    };
    let setup = LinkSetup::new(&link).unwrap();
    let a = gain_analysis(&setup.bs_codebook, &setup.ms_codebook, &setup.bs_dict, &setup.ms_dict).unwrap();
    for l in &a.levels {
        assert!(l.beta > 1.0, "{l:?}");
    }
}

#[test]
fn codebook_dump_round_trips() {
    let setup = LinkSetup::new(&LinkConfig { bs_antennas: 16, ms_antennas: 8, resolution: 16, ..Default::default() }).unwrap();
    for cb in [&setup.bs_codebook, &setup.ms_codebook] {
        let mut buf = Vec::new();
        cb.write_json(&mut buf).unwrap();
        let back = HierarchicalCodebook::read_json(buf.as_slice()).unwrap();
        assert_eq!(back.to_dump(), cb.to_dump());
        for s in 0..cb.levels() {
            for (x, y) in back.level(s).iter().zip(cb.level(s)) {
                assert!(max_abs_diff(x.weights(), y.weights()) < 1e-12);
            }
        }
    }
    let ideal = BeamVector::unconstrained(&CVec::from_element(4, Complex64::new(2.0, 0.0))).unwrap();
    assert!((ideal.weights().norm() - 1.0).abs() < 1e-15);
}
