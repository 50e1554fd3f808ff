//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::time::Instant;

use mmwave_acs::channel::{
    array_response, assemble_channel, build_dictionary, AngleDomain, AngleGrid, Path, PathSet, UlaGeometry,
};
use mmwave_acs::codebook::{make_candidates_beamsteering, make_candidates_quantized, omp_hybrid_design, CodebookLayout};
use mmwave_acs::estimation::{EstimationOptions, MeasurementContext};
use mmwave_acs::experiment::{
    coverage_rows, quantization_rows, single_path_error_rows, spectral_efficiency_rows, CoverageRow, ErrorRow,
    ExperimentConfig, QuantizationRow, RateRow,
};
use mmwave_acs::linalg::{complex_gaussian, deflate, push_orthonormal, CMat, CVec};
use mmwave_acs::link::{trial_rng, CodebookKind, LinkConfig, LinkSetup};
use mmwave_acs::precoding::{achievable_rate, hybrid_approx, unconstrained_combiner, unconstrained_precoder};
use num_complex::Complex64;
use rand::Rng;

const DELTA: f64 = 0.05;
const SIGMAS: f64 = 3.0;
const C2_TRIALS: usize = 2000;
const C3_TRIALS: usize = 1000;
const C4_TRIALS: usize = 500;
const C4_GAP: f64 = 1.5;
const C5_TRIALS: usize = 500;
const C5_RATIO: f64 = 0.9;
const C6_TRIALS: usize = 300;
const C8_TRIALS: usize = 2000;
const Z95: f64 = 1.959964;
const PROPERTY_CASES: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).expect("acceptance config")
}

fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn criterion1() -> Outcome {
    let link = LinkConfig {
        bs_antennas: 16,
        ms_antennas: 16,
        resolution: 16,
        branching: 2,
        estimated_paths: 1,
        codebook: CodebookKind::Ideal,
        phase_bits: None,
        ..Default::default()
    };
    let setup = LinkSetup::new(&link).expect("setup");
    let powers = vec![1.0; setup.layout.levels()];
    let grid = AngleGrid::new(16).unwrap();
    let mut hits = 0;
    for u in 0..16 {
        for v in 0..16 {
            let paths =
                PathSet::new(vec![Path { aod: grid.angle(u), aoa: grid.angle(v), gain: Complex64::new(1.0, 0.0) }], 1.0, 1.0)
                    .unwrap();
            let h = assemble_channel(&paths, &setup.bs_geometry, &setup.ms_geometry);
            let ctx = MeasurementContext::new(&h, 0.0, 1.0).unwrap();
            let mut rng = trial_rng(1, (u * 16 + v) as u64);
            let est = setup.estimate(&ctx, &mut rng, &powers, EstimationOptions::default()).unwrap();
            let p = est.estimate.paths[0];
            if setup.bs_dict.same_response(p.aod_cell, u) && setup.ms_dict.same_response(p.aoa_cell, v) {
                hits += 1;
            }
        }
    }
    outcome(hits == 256, format!("{hits}/256 cells recovered"))
}

fn ideal_error_rows() -> Vec<ErrorRow> {
    let c = config(&format!(
        "[experiment]\nkind = \"single-path-error\"\ntrials = {C2_TRIALS}\n\
         [link]\nbs_antennas = 64\nms_antennas = 64\ncodebook = \"ideal\"\nresolution = 64\nbranching = 2\n\
         [channel]\npaths = 1\n[training]\ndelta = {DELTA}\n[sweep]\nsnr_db = [-10.0, 0.0, 10.0]\n"
    ));
    single_path_error_rows(&c).expect("single-path error").0
}

fn criterion2(rows: &[ErrorRow]) -> Outcome {
    let limit = DELTA + SIGMAS * binomial_sigma(DELTA, C2_TRIALS);
    let pass = rows.len() == 3 && rows.iter().all(|r| r.trials >= C2_TRIALS && r.error_rate <= limit);
    let d: Vec<String> = rows.iter().map(|r| format!("{} dB: {:.4}", r.snr_db, r.error_rate)).collect();
    outcome(pass, format!("{} (limit {limit:.4})", d.join(", ")))
}

fn envelope_holds(rows: &[ErrorRow]) -> bool {
    rows.iter().all(|r| {
        let b = r.theorem_bound.min(1.0);
        r.error_rate <= b + SIGMAS * binomial_sigma(b, r.trials)
    })
}

fn criterion3(ideal: &[ErrorRow]) -> Outcome {
    let c = config(&format!(
        "[experiment]\nkind = \"single-path-error\"\ntrials = {C3_TRIALS}\n\
         [link]\nbs_rf_chains = 10\nms_rf_chains = 6\nphase_bits = 7\n[channel]\npaths = 1\n\
         [training]\nallocation = \"budget\"\nbudget_db = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0]\n[sweep]\nsnr_db = [0.0]\n"
    ));
    let hybrid = single_path_error_rows(&c).expect("hybrid error").0;
    let pass = envelope_holds(&hybrid) && envelope_holds(ideal);
    let d: Vec<String> = hybrid
        .iter()
        .map(|r| format!("P_T={:.0}: {:.3} <= {:.3}", r.total_power, r.error_rate, r.theorem_bound.min(1.0)))
        .collect();
    let e: Vec<String> = ideal.iter().map(|r| format!("{:.3} <= {:.3}", r.error_rate, r.theorem_bound.min(1.0))).collect();
    outcome(pass, format!("hybrid [{}]; ideal [{}]", d.join(", "), e.join(", ")))
}

fn rate_of<'a>(rows: &'a [RateRow], method: &str) -> &'a RateRow {
    rows.iter().find(|r| r.method == method).expect("rate row")
}

fn criterion4() -> Outcome {
    let rejected = CodebookLayout::multi_path(64, 2, 3).is_err();
    let n = CodebookLayout::smallest_valid(64, 2, 3).unwrap().resolution();
    let c = config(&format!(
        "[experiment]\nkind = \"spectral-efficiency-sweep\"\ntrials = {C4_TRIALS}\n\
         [link]\nestimated_paths = 3\nresolution = {n}\n[channel]\npaths = 3\n[sweep]\nsnr_db = [0.0]\n"
    ));
    let rows = spectral_efficiency_rows(&c).expect("sweep");
    let a = rate_of(&rows, "adaptive");
    let e = rate_of(&rows, "exhaustive");
    let gap = e.mean_rate - a.mean_rate;
    outcome(
        rejected && gap <= C4_GAP && a.trials >= C4_TRIALS,
        format!(
            "N=64 rejected: {rejected}; N={n}: adaptive {:.3} exhaustive {:.3} gap {gap:.3} (limit {C4_GAP})",
            a.mean_rate, e.mean_rate
        ),
    )
}

fn quant<'a>(rows: &'a [QuantizationRow], study: &str, value: usize, method: &str) -> &'a QuantizationRow {
    rows.iter().find(|r| r.study == study && r.value == value && r.method == method).expect("quantization row")
}

fn criterion5() -> Outcome {
    let c = config(&format!(
        "[experiment]\nkind = \"quantization-study\"\ntrials = {C5_TRIALS}\n\
         [link]\nestimated_paths = 3\nresolution = 96\n[channel]\npaths = 3\n[sweep]\nsnr_db = [0.0]\nphase_bits = [5, 7]\n"
    ));
    let rows = quantization_rows(&c).expect("phase bits");
    let r5 = quant(&rows, "phase-bits", 5, "adaptive").mean_rate;
    let r7 = quant(&rows, "phase-bits", 7, "adaptive").mean_rate;
    outcome(r5 >= C5_RATIO * r7, format!("N_Q=5 {r5:.3} vs N_Q=7 {r7:.3}, ratio {:.3} (limit {C5_RATIO})", r5 / r7))
}

fn criterion6() -> Outcome {
    let c = config(&format!(
        "[experiment]\nkind = \"quantization-study\"\ntrials = {C6_TRIALS}\n\
         [link]\nestimated_paths = 1\n[channel]\npaths = 1\n[sweep]\nsnr_db = [0.0]\nresolutions = [64, 128, 256]\n"
    ));
    let rows = quantization_rows(&c).expect("resolution");
    let loss: Vec<&QuantizationRow> = [64, 128, 256].iter().map(|&n| quant(&rows, "resolution", n, "loss")).collect();
    let pass = loss.windows(2).all(|w| w[1].mean_rate <= w[0].mean_rate + (w[0].ci95.powi(2) + w[1].ci95.powi(2)).sqrt());
    let d: Vec<String> = loss.iter().map(|r| format!("N={}: {:.3}±{:.3}", r.value, r.mean_rate, r.ci95)).collect();
    outcome(pass, d.join(", "))
}

fn levels(mut n: usize, k: usize) -> usize {
    let mut s = 0;
    while n > 1 {
        n /= k;
        s += 1;
    }
    s
}

fn criterion7() -> Outcome {
    let matrix: &[(usize, usize, usize)] = &[
        (2, 8, 1),
        (2, 16, 1),
        (2, 32, 1),
        (3, 9, 1),
        (3, 27, 1),
        (4, 16, 1),
        (4, 64, 1),
        (2, 16, 2),
        (2, 32, 2),
        (3, 18, 2),
        (4, 32, 2),
        (2, 12, 3),
        (2, 24, 3),
        (2, 48, 3),
        (3, 27, 3),
        (4, 48, 3),
    ];
    let mut bad = Vec::new();
    for &(k, n, l) in matrix {
        let link = LinkConfig {
            bs_antennas: 8,
            ms_antennas: 8,
            bs_rf_chains: 3,
            ms_rf_chains: 3,
            resolution: n,
            branching: k,
            estimated_paths: l,
            codebook: CodebookKind::Ideal,
            phase_bits: None,
            ..Default::default()
        };
        let setup = LinkSetup::new(&link).expect("valid matrix entry");
        let expected = if l == 1 { k * k * levels(n, k) } else { k * k * l * l * l * levels(n / l, k) };
        let mut rng = trial_rng(3, (k * 1000 + n * 10 + l) as u64);
        let paths = mmwave_acs::channel::sample_pathset(&mut rng, l, 1.0, 1.0, AngleDomain::HalfCircle).unwrap();
        let h = assemble_channel(&paths, &setup.bs_geometry, &setup.ms_geometry);
        let ctx = MeasurementContext::new(&h, 0.1, 1.0).unwrap();
        let powers = vec![1.0; setup.layout.levels()];
        let opts = EstimationOptions { record_trace: true, ..Default::default() };
        let est = setup.estimate(&ctx, &mut rng, &powers, opts).unwrap();
        let traced: usize = est.trace.iter().map(|r| r.slots).sum();
        if est.steps.slots != expected || traced != expected {
            bad.push(format!("(K={k}, N={n}, L_d={l}): {} counted, {traced} traced, {expected} expected", est.steps.slots));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { format!("{} configurations exact", matrix.len()) } else { bad.join("; ") })
}

fn survival_ok(rows: &[&CoverageRow]) -> bool {
    rows.iter().all(|r| (0.0..=1.0).contains(&r.coverage))
        && rows.windows(2).all(|w| w[0].threshold < w[1].threshold && w[1].coverage <= w[0].coverage)
}

fn criterion8() -> Outcome {
    let c = config(&format!(
        "[experiment]\nkind = \"coverage\"\ntrials = {C8_TRIALS}\n[link]\nestimated_paths = 3\nresolution = 96\n\
         [channel]\npaths = 3\n"
    ));
    let rows = coverage_rows(&c).expect("coverage");
    let curve = |p: &str| rows.iter().filter(|r| r.pipeline == p).collect::<Vec<_>>();
    let perfect = curve("perfect-hybrid");
    let estimated = curve("estimated-hybrid");
    let analog = curve("analog-only");
    let sd = |r: &CoverageRow| binomial_sigma(r.coverage, r.trials);
    let dominates = |hi: &[&CoverageRow], lo: &[&CoverageRow]| {
        hi.iter().zip(lo).all(|(a, b)| b.coverage - a.coverage <= Z95 * (sd(a).powi(2) + sd(b).powi(2)).sqrt())
    };
    let pass = perfect.len() == estimated.len()
        && estimated.len() == analog.len()
        && !perfect.is_empty()
        && perfect[0].trials >= C8_TRIALS
        && dominates(&perfect, &estimated)
        && dominates(&estimated, &analog)
        && [&perfect, &estimated, &analog, &curve("estimated-hybrid-no-data-interference")].iter().all(|c| survival_ok(c));
    let at = |eta: f64| {
        let f = |c: &[&CoverageRow]| c.iter().find(|r| r.threshold == eta).map(|r| r.coverage).unwrap_or(f64::NAN);
        format!("eta={eta}: {:.3}/{:.3}/{:.3}", f(&perfect), f(&estimated), f(&analog))
    };
    outcome(pass, format!("perfect/estimated/analog {}, {}, {}", at(2.0), at(6.0), at(10.0)))
}

fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| complex_gaussian(rng, 1.0)))
}

fn random_cmat<R: Rng>(rng: &mut R, r: usize, c: usize) -> CMat {
    CMat::from_iterator(r, c, (0..r * c).map(|_| complex_gaussian(rng, 1.0)))
}

fn criterion9() -> Outcome {
    let mut rng = trial_rng(9, 0);
    let mut failures: Vec<String> = Vec::new();

    let mut fail = 0;
    for _ in 0..PROPERTY_CASES {
        let n = rng.random_range(4..=32);
        let geom = UlaGeometry::half_wavelength(n).unwrap();
        let cand = make_candidates_quantized(&geom, 2 * n, 2 * n, rng.random_range(1..=8)).unwrap();
        let n_rf = rng.random_range(1..=n.min(8));
        let beam = omp_hybrid_design(&random_cvec(&mut rng, n), &cand, n_rf).unwrap();
        if beam.residual_norms.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9)) {
            fail += 1;
        }
    }
    if fail > 0 {
        failures.push(format!("OMP residual increased in {fail} cases"));
    }

    let mut fail = 0;
    for _ in 0..PROPERTY_CASES {
        let geom = UlaGeometry::new(rng.random_range(1..=256), rng.random_range(0.1..2.0)).unwrap();
        let a = array_response(&geom, rng.random_range(-10.0..10.0));
        if (a.norm() - 1.0).abs() > 1e-12 {
            fail += 1;
        }
    }
    let grid = AngleGrid::new(64).unwrap();
    let dict = build_dictionary(&UlaGeometry::half_wavelength(32).unwrap(), &grid).unwrap();
    if (0..64).any(|u| (dict.column(u).norm() - 1.0).abs() > 1e-12) {
        fail += 1;
    }
    if fail > 0 {
        failures.push(format!("steering norm off in {fail} cases"));
    }

    let mut fail = 0;
    for _ in 0..PROPERTY_CASES {
        let nb = rng.random_range(4..=24);
        let nm = rng.random_range(4..=16);
        let n_s = rng.random_range(1..=3.min(nm));
        let n_rf = rng.random_range(n_s..=nb.min(nm).min(6));
        let h = mmwave_acs::channel::ChannelMatrix::from_matrix(random_cmat(&mut rng, nm, nb));
        let geom = UlaGeometry::half_wavelength(nb).unwrap();
        let cand = if rng.random_bool(0.5) {
            make_candidates_beamsteering(&geom, 2 * nb, 2 * nb).unwrap()
        } else {
            make_candidates_quantized(&geom, 2 * nb, 2 * nb, rng.random_range(4..=8)).unwrap()
        };
        let target = unconstrained_precoder(&h, n_s).unwrap().matrix;
        let f = hybrid_approx(&target, &cand, n_rf).unwrap();
        if (f.matrix().norm_squared() - n_s as f64).abs() > 1e-9 * n_s as f64 {
            fail += 1;
        }
    }
    if fail > 0 {
        failures.push(format!("precoder norm off in {fail} cases"));
    }

    let mut fail = 0;
    for _ in 0..PROPERTY_CASES {
        let n = rng.random_range(2..=32);
        let mut basis = Vec::new();
        for _ in 0..rng.random_range(1..n) {
            push_orthonormal(&mut basis, &random_cvec(&mut rng, n));
        }
        let y = random_cvec(&mut rng, n);
        let r = deflate(&y, &basis);
        if basis.iter().any(|q| q.dotc(&r).norm() > 1e-10 * y.norm()) {
            fail += 1;
        }
    }
    if fail > 0 {
        failures.push(format!("deflation not orthogonal in {fail} cases"));
    }

    let mut fail = 0;
    for _ in 0..PROPERTY_CASES {
        let nb = rng.random_range(1..=32);
        let nm = rng.random_range(1..=32);
        let h = mmwave_acs::channel::ChannelMatrix::from_matrix(random_cmat(&mut rng, nm, nb));
        let p: f64 = rng.random_range(0.01..100.0);
        let s2: f64 = rng.random_range(0.01..10.0);
        let f = unconstrained_precoder(&h, 1).unwrap();
        let w = unconstrained_combiner(&h, 1).unwrap();
        let rate = achievable_rate(&h, &f.matrix, &w.matrix, p, s2, 1).unwrap();
        let s1 = h.matrix().clone().singular_values().max();
        let oracle = (1.0 + p * s1 * s1 / s2).log2();
        if (rate - oracle).abs() > 1e-8 * oracle.max(1.0) {
            fail += 1;
        }
    }
    if fail > 0 {
        failures.push(format!("rate oracle mismatch in {fail} cases"));
    }

    let pass = failures.is_empty();
    outcome(pass, if pass { format!("5 properties x {PROPERTY_CASES} instances") } else { failures.join("; ") })
}

fn main() {
    let start = Instant::now();
    let mut all = true;
    let mut report = |id: usize, name: &str, o: Outcome| {
        all &= o.pass;
        println!("criterion {id} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, "noiseless exactness", criterion1());
    let ideal = ideal_error_rows();
    report(2, "target error guarantee", criterion2(&ideal));
    report(3, "error bound envelope", criterion3(&ideal));
    report(4, "spectral efficiency gap", criterion4());
    report(5, "phase bit saturation", criterion5());
    report(6, "grid resolution convergence", criterion6());
    report(7, "step counts", criterion7());
    report(8, "coverage ordering", criterion8());
    report(9, "property suites", criterion9());
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
