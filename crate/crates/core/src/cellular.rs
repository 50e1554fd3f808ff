//! Poisson cellular deployments, interference and rate coverage.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{array_response, assemble_channel, db_to_linear, sample_pathset, AngleDomain, PathSet, UlaGeometry};
use crate::error::{invalid, Result};
use crate::estimation::{analog_only_baseline, targets_from_estimate, EstimationOptions, Interference, MeasurementContext};
use crate::linalg::{complex_gaussian, CMat, CVec};
use crate::link::{trial_rng, LinkSetup};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const THERMAL_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    /// Mean cell radius `R_c` in meters; sets the density `1 / (pi R_c^2)`.
    pub cell_radius: f64,
    /// Simulation disc radius as a multiple of `R_c`.
    pub window_factor: f64,
    pub pathloss_exponent: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub transmit_power_dbm: f64,
    pub paths: usize,
    /// Distances below this are clamped to it in the path loss.
    pub min_distance: f64,
    pub angle_domain: AngleDomain,
}

impl Default for CellConfig {
    fn default() -> Self {
        Self {
            cell_radius: 100.0,
            window_factor: 10.0,
            pathloss_exponent: 3.0,
            carrier_hz: 28e9,
            bandwidth_hz: 100e6,
            noise_figure_db: 5.0,
            transmit_power_dbm: 30.0,
            paths: 3,
            min_distance: 1.0,
            angle_domain: AngleDomain::HalfCircle,
        }
    }
}

impl CellConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !(pos(self.cell_radius) && pos(self.window_factor) && pos(self.carrier_hz) && pos(self.bandwidth_hz)) {
            return Err(invalid("cell radius, window, carrier and bandwidth must be positive"));
        }
        if !pos(self.pathloss_exponent) || !pos(self.min_distance) {
            return Err(invalid("path loss exponent and minimum distance must be positive"));
        }
        if self.paths == 0 {
            return Err(invalid("each link needs at least one path"));
        }
        Ok(())
    }

    pub fn density(&self) -> f64 {
        1.0 / (PI * self.cell_radius * self.cell_radius)
    }

    pub fn window_radius(&self) -> f64 {
        self.window_factor * self.cell_radius
    }

    pub fn noise_power(&self) -> f64 {
        dbm_to_watts(THERMAL_DBM_PER_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db)
    }

    pub fn transmit_power(&self) -> f64 {
        dbm_to_watts(self.transmit_power_dbm)
    }

    pub fn pathloss(&self, distance: f64) -> Result<f64> {
        pathloss_linear(distance.max(self.min_distance), self.pathloss_exponent, self.carrier_hz)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// `(4 pi f / c)^2 d^n`: free-space loss at one meter, then exponent `n`.
pub fn pathloss_linear(distance: f64, exponent: f64, carrier_hz: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(invalid(format!("distance must be positive, got {distance}")));
    }
    let k = 4.0 * PI * carrier_hz / SPEED_OF_LIGHT;
    Ok(k * k * distance.powf(exponent))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseStation {
    pub position: (f64, f64),
    pub distance: f64,
    pub paths: PathSet,
    /// Direction interferers steer toward their own users.
    pub steering: f64,
}

/// The user sits at the origin and is served by the nearest station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deployment {
    pub desired: BaseStation,
    pub interferers: Vec<BaseStation>,
}

pub fn sample_deployment<R: Rng + ?Sized>(rng: &mut R, config: &CellConfig) -> Result<Deployment> {
    config.validate()?;
    let radius = config.window_radius();
    let mean = config.density() * PI * radius * radius;
    let poisson = Poisson::new(mean).map_err(|e| invalid(format!("poisson mean {mean}: {e}")))?;
    let mut count = 0u64;
    while count == 0 {
        count = poisson.sample(rng) as u64;
    }
    let mut points: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let t = rng.random_range(0.0..2.0 * PI);
            (r * t.cos(), r * t.sin(), r)
        })
        .collect();
    points.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut stations = Vec::with_capacity(points.len());
    for (x, y, d) in points {
        let rho = config.pathloss(d)?;
        let paths = sample_pathset(rng, config.paths, rho, 1.0, config.angle_domain)?;
        stations.push(BaseStation {
            position: (x, y),
            distance: d,
            paths,
            steering: rng.random_range(0.0..2.0 * PI),
        });
    }
    let desired = stations.remove(0);
    Ok(Deployment { desired, interferers: stations })
}

/// Received interference vectors `sqrt(P) H_i f_i` at the user.
#[derive(Debug, Clone)]
pub struct InterferenceField {
    vectors: Vec<CVec>,
}

impl InterferenceField {
    pub fn new(deployment: &Deployment, bs: &UlaGeometry, ms: &UlaGeometry, power: f64) -> Self {
        let vectors = deployment
            .interferers
            .iter()
            .map(|b| {
                let h = assemble_channel(&b.paths, bs, ms);
                h.matrix() * array_response(bs, b.steering) * Complex64::new(power.sqrt(), 0.0)
            })
            .collect();
        Self { vectors }
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `sum_i P H_i f_i f_i^H H_i^H`.
    pub fn covariance(&self, ms_antennas: usize) -> CMat {
        let mut q = CMat::zeros(ms_antennas, ms_antennas);
        for v in &self.vectors {
            q += v * v.adjoint();
        }
        q
    }
}

impl Interference for InterferenceField {
    fn sample(&self, combiners: &CMat, rng: &mut dyn RngCore) -> CVec {
        interference_term(self, combiners, rng)
    }
}

/// `w_q^H sum_i sqrt(P) H_i f_i s_i` with fresh unit-power symbols per combiner slot.
pub fn interference_term(field: &InterferenceField, combiners: &CMat, rng: &mut dyn RngCore) -> CVec {
    let wh = combiners.adjoint();
    let mut out = CVec::zeros(combiners.ncols());
    for v in &field.vectors {
        let c = &wh * v;
        for (q, o) in out.iter_mut().enumerate() {
            *o += c[q] * complex_gaussian(rng, 1.0);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// Hybrid beams from the true channel.
    PerfectHybrid,
    /// Hybrid beams from the trained estimate.
    EstimatedHybrid,
    /// As `EstimatedHybrid`, with interference ignored during data.
    EstimatedHybridNoDataInterference,
    /// Analog steering toward the strongest estimated paths.
    AnalogOnly,
}

impl Pipeline {
    pub const ALL: [Pipeline; 4] = [
        Pipeline::PerfectHybrid,
        Pipeline::EstimatedHybrid,
        Pipeline::EstimatedHybridNoDataInterference,
        Pipeline::AnalogOnly,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::PerfectHybrid => "perfect-hybrid",
            Pipeline::EstimatedHybrid => "estimated-hybrid",
            Pipeline::EstimatedHybridNoDataInterference => "estimated-hybrid-no-data-interference",
            Pipeline::AnalogOnly => "analog-only",
        }
    }
}

/// Per-trial rates of every pipeline on the same deployments.
#[derive(Debug, Clone)]
pub struct CoverageRates {
    pub pipelines: Vec<Pipeline>,
    /// `rates[p][t]`.
    pub rates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub threshold: f64,
    pub coverage: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

/// Wilson score interval at the given normal quantile.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let d = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / d;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / d;
    ((c - h).max(0.0), (c + h).min(1.0))
}

/// `P(R >= eta)` for each threshold, with 95% intervals.
pub fn coverage_curve(rates: &[f64], thresholds: &[f64]) -> Vec<CoveragePoint> {
    thresholds
        .iter()
        .map(|&eta| {
            let k = rates.iter().filter(|&&r| r >= eta).count();
            let (ci_low, ci_high) = wilson_interval(k, rates.len(), 1.959964);
            CoveragePoint { threshold: eta, coverage: k as f64 / rates.len().max(1) as f64, ci_low, ci_high, trials: rates.len() }
        })
        .collect()
}

/// Training target and stream setup for [`simulate_coverage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageOptions {
    /// Detection error target used to size the training power.
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
}

/// Rates of one deployment under every pipeline.
pub fn coverage_trial<R: RngCore>(
    link: &LinkSetup,
    cell: &CellConfig,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<(Pipeline, f64)>> {
    let dep = sample_deployment(rng, cell)?;
    let power = cell.transmit_power();
    let noise = cell.noise_power();
    let field = InterferenceField::new(&dep, &link.bs_geometry, &link.ms_geometry, power);
    let q = field.covariance(link.ms_geometry.num_elements());
    let h = assemble_channel(&dep.desired.paths, &link.bs_geometry, &link.ms_geometry);
    let rho = dep.desired.paths.pathloss;
    let snr = dep.desired.paths.avg_gain_power / (rho * noise);
    let ctx = MeasurementContext::new(&h, noise, rho)?.with_interference(&field);
    let powers = link.target_powers(delta, snr)?.powers;
    let est = link.estimate(&ctx, rng, &powers, EstimationOptions::default())?;
    let h_hat = link.reconstruct(&est.estimate, rho)?;
    let (f_e, w_e) = link.design(&h_hat)?;
    let (f_p, w_p) = link.design(&h)?;
    let targets = targets_from_estimate(&est.estimate.paths, &link.bs_dict, &link.ms_dict);
    let (f_a, w_a) = analog_only_baseline(
        &targets,
        &link.bs_candidates,
        &link.ms_candidates,
        link.bs_geometry.spacing(),
        1,
    )?;
    Ok(vec![
        (Pipeline::PerfectHybrid, link.rate(&h, f_p.matrix(), w_p.matrix(), power, noise, Some(&q))?),
        (Pipeline::EstimatedHybrid, link.rate(&h, f_e.matrix(), w_e.matrix(), power, noise, Some(&q))?),
        (Pipeline::EstimatedHybridNoDataInterference, link.rate(&h, f_e.matrix(), w_e.matrix(), power, noise, None)?),
        (Pipeline::AnalogOnly, link.rate(&h, f_a.matrix(), w_a.matrix(), power, noise, Some(&q))?),
    ])
}

/// Runs `trials` independent deployments; trial `t` draws from stream `t`.
pub fn simulate_coverage(link: &LinkSetup, cell: &CellConfig, options: &CoverageOptions) -> Result<CoverageRates> {
    cell.validate()?;
    let per_trial: Vec<Vec<(Pipeline, f64)>> = (0..options.trials)
        .into_par_iter()
        .map(|t| coverage_trial(link, cell, options.delta, &mut trial_rng(options.seed, t as u64)))
        .collect::<Result<_>>()?;
    let pipelines = Pipeline::ALL.to_vec();
    let rates = pipelines
        .iter()
        .map(|p| per_trial.iter().map(|row| row.iter().find(|(q, _)| q == p).map(|x| x.1).unwrap_or(0.0)).collect())
        .collect();
    Ok(CoverageRates { pipelines, rates })
}

/// Coverage curve of one pipeline.
pub fn coverage_probability(
    link: &LinkSetup,
    cell: &CellConfig,
    options: &CoverageOptions,
    thresholds: &[f64],
    pipeline: Pipeline,
) -> Result<Vec<CoveragePoint>> {
    let r = simulate_coverage(link, cell, options)?;
    let i = r.pipelines.iter().position(|p| *p == pipeline).expect("pipeline simulated");
    Ok(coverage_curve(&r.rates[i], thresholds))
}
