use std::f64::consts::PI;

use mmwave_acs::cellular::{
    coverage_curve, pathloss_linear, sample_deployment, simulate_coverage, wilson_interval, BaseStation, CellConfig,
    CoverageOptions, Deployment, InterferenceField,
};
use mmwave_acs::channel::{sample_pathset, AngleDomain, Path, PathSet, UlaGeometry};
use mmwave_acs::linalg::{complex_gaussian, CMat};
use mmwave_acs::estimation::Interference;
use mmwave_acs::link::{trial_rng, LinkConfig, LinkSetup};
use num_complex::Complex64;

#[test]
fn station_count_is_poisson() {
    let cfg = CellConfig::default();
    let draws = 10_000;
    let mut rng = trial_rng(71, 0);
    let counts: Vec<f64> = (0..draws)
        .map(|_| {
            let d = sample_deployment(&mut rng, &CellConfig { paths: 1, ..cfg.clone() }).unwrap();
            assert!(d.interferers.iter().all(|b| b.distance >= d.desired.distance));
            assert!(d.interferers.iter().all(|b| b.distance <= cfg.window_radius()));
            (1 + d.interferers.len()) as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / draws as f64;
    let expected = cfg.density() * PI * cfg.window_radius().powi(2);
    assert!((expected - 100.0).abs() < 1e-9);
    assert!((mean - expected).abs() <= 3.0 * (expected / draws as f64).sqrt(), "mean {mean}");
}

#[test]
fn nearest_distance_follows_rayleigh_law() {
    let cfg = CellConfig { paths: 1, ..CellConfig::default() };
    let n = 2000;
    let mut rng = trial_rng(72, 0);
    let mut d: Vec<f64> = (0..n).map(|_| sample_deployment(&mut rng, &cfg).unwrap().desired.distance).collect();
    d.sort_by(f64::total_cmp);
    let cdf = |r: f64| 1.0 - (-cfg.density() * PI * r * r).exp();
    let ks = d
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = cdf(r);
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.63 / (n as f64).sqrt(), "KS statistic {ks}");
}

#[test]
fn pathloss_scaling() {
    let f = 28e9;
    let c = 299_792_458.0;
    let one = pathloss_linear(1.0, 3.0, f).unwrap();
    assert!((one / (4.0 * PI * f / c).powi(2) - 1.0).abs() < 1e-12);
    let ratio = pathloss_linear(20.0, 3.0, f).unwrap() / pathloss_linear(10.0, 3.0, f).unwrap();
    assert!((ratio - 8.0).abs() < 1e-9);
    let d = 55.0;
    let friis = (4.0 * PI * d * f / c).powi(2);
    assert!((pathloss_linear(d, 2.0, f).unwrap() / friis - 1.0).abs() < 1e-12);
    assert!(pathloss_linear(0.0, 3.0, f).is_err());
}

fn station(aod: f64, aoa: f64, steering: f64) -> BaseStation {
    BaseStation {
        position: (10.0, 0.0),
        distance: 10.0,
        paths: PathSet::new(vec![Path { aod, aoa, gain: Complex64::new(0.6, -0.8) }], 1.0, 1.0).unwrap(),
        steering,
    }
}

#[test]
fn lone_station_has_no_interference() {
    let dep = Deployment { desired: station(0.3, 0.4, 0.0), interferers: vec![] };
    let bs = UlaGeometry::half_wavelength(8).unwrap();
    let ms = UlaGeometry::half_wavelength(4).unwrap();
    let field = InterferenceField::new(&dep, &bs, &ms, 2.0);
    assert!(field.is_empty());
    assert!(field.covariance(4).norm() == 0.0);
    let w = CMat::identity(4, 2);
    let z = field.sample(&w, &mut trial_rng(1, 1));
    assert!(z.iter().all(|x| x.norm() == 0.0));
}

#[test]
fn aligned_interferer_delivers_full_array_gain() {
    let bs = UlaGeometry::half_wavelength(8).unwrap();
    let ms = UlaGeometry::half_wavelength(4).unwrap();
    let dep = Deployment { desired: station(0.3, 0.4, 0.0), interferers: vec![station(0.9, 0.4, 0.9)] };
    let power = 2.0;
    let q = InterferenceField::new(&dep, &bs, &ms, power).covariance(4);
    let a_ms = mmwave_acs::channel::array_response(&ms, 0.4);
    let received = (a_ms.adjoint() * &q * &a_ms)[(0, 0)].re;
    let oracle = power * 8.0 * 4.0 * 1.0;
    assert!((received / oracle - 1.0).abs() < 1e-10, "{received} vs {oracle}");
}

#[test]
fn sampled_interference_power_matches_covariance() {
    let bs = UlaGeometry::half_wavelength(8).unwrap();
    let ms = UlaGeometry::half_wavelength(4).unwrap();
    let mut rng = trial_rng(73, 0);
    let interferers = (0..3)
        .map(|i| BaseStation {
            position: (0.0, 0.0),
            distance: 20.0 + i as f64,
            paths: sample_pathset(&mut rng, 2, 1.0, 1.0, AngleDomain::HalfCircle).unwrap(),
            steering: 0.5 * i as f64,
        })
        .collect();
    let dep = Deployment { desired: station(0.1, 0.2, 0.0), interferers };
    let field = InterferenceField::new(&dep, &bs, &ms, 1.0);
    let w = CMat::from_fn(4, 1, |_, _| complex_gaussian(&mut rng, 1.0));
    let expected = (w.adjoint() * field.covariance(4) * &w)[(0, 0)].re;
    let draws = 20_000;
    let powers: Vec<f64> = (0..draws).map(|_| field.sample(&w, &mut rng)[0].norm_sqr()).collect();
    let mean = powers.iter().sum::<f64>() / draws as f64;
    let var = powers.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
    assert!((mean - expected).abs() <= 3.0 * (var / draws as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn coverage_curves_are_survival_functions() {
    let rates = [0.5, 3.0, 1.2, 0.0, 7.5, 2.2];
    let thresholds: Vec<f64> = (0..10).map(|t| t as f64).collect();
    let c = coverage_curve(&rates, &thresholds);
    assert_eq!(c[0].coverage, 1.0);
    assert_eq!(c[1].coverage, 4.0 / 6.0);
    assert_eq!(c[8].coverage, 0.0);
    assert!(c.windows(2).all(|w| w[1].coverage <= w[0].coverage));
    assert!(c.iter().all(|p| p.ci_low <= p.coverage && p.coverage <= p.ci_high));
    let all_positive = coverage_curve(&[0.1, 0.2], &[0.0]);
    assert_eq!(all_positive[0].coverage, 1.0);
    let (lo, hi) = wilson_interval(50, 100, 1.96);
    assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
}

#[test]
fn small_coverage_run_is_reproducible() {
    let link = LinkSetup::new(&LinkConfig {
        bs_antennas: 16,
        ms_antennas: 8,
        bs_rf_chains: 4,
        ms_rf_chains: 3,
        resolution: 32,
        ..Default::default()
    })
    .unwrap();
    let cell = CellConfig { paths: 1, ..CellConfig::default() };
    let opts = CoverageOptions { delta: 0.05, seed: 74, trials: 12 };
    let a = simulate_coverage(&link, &cell, &opts).unwrap();
    let b = simulate_coverage(&link, &cell, &opts).unwrap();
    assert_eq!(a.rates, b.rates);
    assert!(a.rates.iter().flatten().all(|r| r.is_finite() && *r >= 0.0));
}
