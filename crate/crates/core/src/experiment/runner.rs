use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Allocation, ChannelSection, ExperimentConfig, ExperimentKind};
use crate::cellular::{coverage_curve, simulate_coverage, wilson_interval, CoverageOptions};
use crate::channel::{
    assemble_channel, average_snr, db_to_linear, sample_on_grid_pathset, sample_pathset, Path as RayPath,
    PathSet,
};
use crate::codebook::{gain_analysis, CodebookLayout};
use crate::error::{Error, Result};
use crate::estimation::{
    allocate_power_corollary2, theorem1_bound, write_trace_csv, EstimationOptions, MeasurementContext, StageRecord,
};
use crate::link::{trial_rng, LinkConfig, LinkSetup};

const Z95: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodebookRow {
    pub level: usize,
    pub beams: usize,
    pub bs_nominal_gain: f64,
    pub ms_nominal_gain: f64,
    pub link_gain: f64,
    /// Empty when no backward pair exists.
    pub beta: Option<f64>,
    pub forward_at_beta: f64,
    pub min_forward: f64,
    pub max_backward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub snr_db: f64,
    pub allocation: &'static str,
    pub total_power: f64,
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Analytic bound from the measured forward gains and ratios.
    pub theorem_bound: f64,
    /// Bound the allocation was designed for.
    pub design_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub snr_db: f64,
    pub branching: usize,
    pub estimated_paths: usize,
    pub resolution: usize,
    pub method: &'static str,
    pub trials: usize,
    pub mean_rate: f64,
    pub ci95: f64,
    pub training_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizationRow {
    pub study: &'static str,
    pub value: usize,
    pub snr_db: f64,
    pub method: &'static str,
    pub trials: usize,
    pub mean_rate: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub threshold: f64,
    pub coverage: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
    pub pipeline: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub schema: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub kind: &'static str,
    pub code_version: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputFile>,
    pub config: ExperimentConfig,
}

pub const MANIFEST_SCHEMA: &str = "mmwave-acs/manifest/v1";

pub fn csv_schema(kind: ExperimentKind) -> String {
    format!("mmwave-acs/{}/v1", kind.name())
}

fn mean_ci(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

fn noise_for(snr_db: f64, channel: &ChannelSection) -> f64 {
    channel.avg_gain_power / (channel.pathloss * db_to_linear(snr_db))
}

fn draw_paths(channel: &ChannelSection, setup: &LinkSetup, on_grid: bool, stream: u64, seed: u64) -> Result<PathSet> {
    let mut rng = trial_rng(seed, stream);
    if on_grid {
        let grid = setup.bs_dict.grid();
        Ok(sample_on_grid_pathset(&mut rng, channel.paths, channel.pathloss, channel.avg_gain_power, grid, channel.angle_domain)?.0)
    } else {
        sample_pathset(&mut rng, channel.paths, channel.pathloss, channel.avg_gain_power, channel.angle_domain)
    }
}

/// The same paths moved to their nearest grid cells.
pub fn snap_to_grid(paths: &PathSet, resolution: usize) -> Result<PathSet> {
    let step = 2.0 * PI / resolution as f64;
    let snap = |a: f64| ((a / step).round() as usize % resolution) as f64 * step;
    let moved = paths.paths.iter().map(|p| RayPath { aod: snap(p.aod), aoa: snap(p.aoa), gain: p.gain }).collect();
    PathSet::new(moved, paths.pathloss, paths.avg_gain_power)
}

fn stream_id(point: usize, trial: usize) -> u64 {
    ((point as u64 + 1) << 32) | trial as u64
}

pub fn design_codebook_rows(config: &ExperimentConfig) -> Result<(LinkSetup, Vec<CodebookRow>)> {
    let setup = LinkSetup::new(&config.link)?;
    let analysis = gain_analysis(&setup.bs_codebook, &setup.ms_codebook, &setup.bs_dict, &setup.ms_dict)?;
    let rows = analysis
        .levels
        .iter()
        .map(|l| CodebookRow {
            level: l.level,
            beams: setup.layout.sub_range_count(l.level),
            bs_nominal_gain: setup.bs_codebook.nominal_gain(l.level),
            ms_nominal_gain: setup.ms_codebook.nominal_gain(l.level),
            link_gain: l.nominal_gain,
            beta: l.beta.is_finite().then_some(l.beta),
            forward_at_beta: l.forward_at_beta,
            min_forward: l.min_forward,
            max_backward: l.max_backward,
        })
        .collect();
    Ok((setup, rows))
}

/// Monte Carlo detection error of single-path training on on-grid channels,
/// judged on the strongest path up to response aliases.
pub fn single_path_error_rows(config: &ExperimentConfig) -> Result<(Vec<ErrorRow>, Vec<StageRecord>)> {
    let setup = LinkSetup::new(&config.link)?;
    if setup.layout.paths() != 1 {
        return Err(Error::Config("single-path-error needs link.estimated_paths = 1".into()));
    }
    let analysis = gain_analysis(&setup.bs_codebook, &setup.ms_codebook, &setup.bs_dict, &setup.ms_dict)?;
    let betas = analysis.betas();
    let forward = analysis.min_forward_gains();
    let k = setup.layout.branching();
    let ch = &config.channel;
    let seed = config.experiment.seed;
    let trials = config.experiment.trials;

    let mut points: Vec<(f64, &'static str, Option<f64>)> = Vec::new();
    for &snr_db in &config.sweep.snr_db {
        match config.training.allocation {
            Allocation::Target => points.push((snr_db, "target", None)),
            Allocation::Budget => {
                for &b in &config.training.budget_db {
                    points.push((snr_db, "budget", Some(db_to_linear(b))));
                }
            }
        }
    }

    let mut rows = Vec::new();
    let mut trace = Vec::new();
    for (pi, &(snr_db, allocation, budget)) in points.iter().enumerate() {
        let noise = noise_for(snr_db, ch);
        let snr = average_snr(ch.avg_gain_power, ch.pathloss, noise)?;
        let (powers, design_bound, total) = match budget {
            None => {
                let a = setup.target_powers(config.training.delta, snr)?;
                (a.powers, config.training.delta, a.total)
            }
            Some(t) => {
                let a = allocate_power_corollary2(t, snr, k, &setup.level_gains)?;
                (a.powers, a.bound.min(1.0), t)
            }
        };
        let record = config.training.record_trace && pi == 0;
        let outcomes: Vec<(bool, Vec<StageRecord>)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let paths = draw_paths(ch, &setup, true, t as u64, seed)?;
                let h = assemble_channel(&paths, &setup.bs_geometry, &setup.ms_geometry);
                let ctx = MeasurementContext::new(&h, noise, ch.pathloss)?;
                let mut rng = trial_rng(seed, stream_id(pi, t));
                let opts = EstimationOptions { record_trace: record && t == 0, ..Default::default() };
                let est = setup.estimate(&ctx, &mut rng, &powers, opts)?;
                let truth = &paths.strongest()[0];
                let grid = setup.bs_dict.grid();
                let cell = |a: f64| ((a / (2.0 * PI) * grid.len() as f64).round() as usize) % grid.len();
                let e = &est.estimate.paths[0];
                let ok = setup.bs_dict.same_response(e.aod_cell, cell(truth.aod))
                    && setup.ms_dict.same_response(e.aoa_cell, cell(truth.aoa));
                Ok((!ok, est.trace))
            })
            .collect::<Result<_>>()?;
        let errors = outcomes.iter().filter(|o| o.0).count();
        if record {
            trace = outcomes.into_iter().next().map(|o| o.1).unwrap_or_default();
        }
        let (ci_low, ci_high) = wilson_interval(errors, trials, Z95);
        rows.push(ErrorRow {
            snr_db,
            allocation,
            total_power: total,
            trials,
            errors,
            error_rate: errors as f64 / trials as f64,
            ci_low,
            ci_high,
            theorem_bound: theorem1_bound(&powers, &forward, &betas, snr, k)?,
            design_bound,
        });
    }
    Ok((rows, trace))
}

/// Per-trial rates of one link setup at one SNR.
struct RateSamples {
    adaptive: Vec<f64>,
    exhaustive: Vec<f64>,
    perfect_hybrid: Vec<f64>,
    perfect_unconstrained: Vec<f64>,
    slots: usize,
}

#[allow(clippy::too_many_arguments)]
fn rate_samples(
    setup: &LinkSetup,
    ch: &ChannelSection,
    delta: f64,
    snr_db: f64,
    exhaustive: bool,
    seed: u64,
    trials: usize,
    point: usize,
) -> Result<RateSamples> {
    let noise = noise_for(snr_db, ch);
    let snr = average_snr(ch.avg_gain_power, ch.pathloss, noise)?;
    let alloc = setup.target_powers(delta, snr)?;
    let powers = alloc.powers;
    let exhaustive_power = alloc.gamma / (setup.config.bs_antennas * setup.config.ms_antennas) as f64;
    let per: Vec<(f64, Option<f64>, f64, f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let paths = draw_paths(ch, setup, ch.on_grid, t as u64, seed)?;
            let h = assemble_channel(&paths, &setup.bs_geometry, &setup.ms_geometry);
            let ctx = MeasurementContext::new(&h, noise, ch.pathloss)?;
            let mut rng = trial_rng(seed, stream_id(point, t));
            let est = setup.estimate(&ctx, &mut rng, &powers, EstimationOptions::default())?;
            let adaptive = setup.hybrid_rate(&h, &setup.reconstruct(&est.estimate, ch.pathloss)?, 1.0, noise, None)?;
            let exh = if exhaustive {
                let e = setup.exhaustive(&ctx, &mut rng, exhaustive_power)?;
                Some(setup.hybrid_rate(&h, &setup.reconstruct(&e.estimate, ch.pathloss)?, 1.0, noise, None)?)
            } else {
                None
            };
            let perfect = setup.hybrid_rate(&h, &h, 1.0, noise, None)?;
            let (f, w) = setup.unconstrained(&h)?;
            let unconstrained = setup.rate(&h, &f, &w, 1.0, noise, None)?;
            Ok((adaptive, exh, perfect, unconstrained, est.steps.slots))
        })
        .collect::<Result<_>>()?;
    Ok(RateSamples {
        adaptive: per.iter().map(|p| p.0).collect(),
        exhaustive: per.iter().filter_map(|p| p.1).collect(),
        perfect_hybrid: per.iter().map(|p| p.2).collect(),
        perfect_unconstrained: per.iter().map(|p| p.3).collect(),
        slots: per.first().map(|p| p.4).unwrap_or(0),
    })
}

fn sweep_link(config: &ExperimentConfig, branching: usize, paths: usize) -> Result<LinkConfig> {
    let mut link = config.link.clone();
    link.branching = branching;
    link.estimated_paths = paths;
    if link.streams.is_some_and(|s| s > paths) {
        link.streams = Some(paths);
    }
    if config.sweep.auto_resolution {
        link.resolution = CodebookLayout::smallest_valid(link.resolution, branching, paths)?.resolution();
    }
    link.validate()?;
    Ok(link)
}

pub fn spectral_efficiency_rows(config: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let ks = if config.sweep.branching.is_empty() { vec![config.link.branching] } else { config.sweep.branching.clone() };
    let ls = if config.sweep.estimated_paths.is_empty() {
        vec![config.link.estimated_paths]
    } else {
        config.sweep.estimated_paths.clone()
    };
    let trials = config.experiment.trials;
    let mut rows = Vec::new();
    let mut point = 0;
    for &l_d in &ls {
        for &k in &ks {
            let link = sweep_link(config, k, l_d)?;
            let setup = LinkSetup::new(&link)?;
            for &snr_db in &config.sweep.snr_db {
                let s = rate_samples(
                    &setup,
                    &config.channel,
                    config.training.delta,
                    snr_db,
                    config.training.exhaustive,
                    config.experiment.seed,
                    trials,
                    point,
                )?;
                point += 1;
                let row = |method, x: &[f64], slots| {
                    let (mean_rate, ci95) = mean_ci(x);
                    RateRow {
                        snr_db,
                        branching: k,
                        estimated_paths: l_d,
                        resolution: link.resolution,
                        method,
                        trials: x.len(),
                        mean_rate,
                        ci95,
                        training_slots: slots,
                    }
                };
                rows.push(row("adaptive", &s.adaptive, s.slots));
                if !s.exhaustive.is_empty() {
                    rows.push(row("exhaustive", &s.exhaustive, link.resolution * link.resolution));
                }
                rows.push(row("perfect-hybrid", &s.perfect_hybrid, 0));
                rows.push(row("perfect-unconstrained", &s.perfect_unconstrained, 0));
            }
        }
    }
    Ok(rows)
}

/// Phase-bit sweep, then a grid-resolution sweep comparing off-grid
/// channels with the same paths snapped onto the grid.
pub fn quantization_rows(config: &ExperimentConfig) -> Result<Vec<QuantizationRow>> {
    let trials = config.experiment.trials;
    let seed = config.experiment.seed;
    let ch = &config.channel;
    let delta = config.training.delta;
    let mut rows = Vec::new();
    let mut point = 0;
    for &bits in &config.sweep.phase_bits {
        let mut link = config.link.clone();
        link.phase_bits = Some(bits);
        let setup = LinkSetup::new(&link)?;
        for &snr_db in &config.sweep.snr_db {
            let s = rate_samples(&setup, ch, delta, snr_db, false, seed, trials, point)?;
            point += 1;
            for (method, x) in [("adaptive", &s.adaptive), ("perfect-hybrid", &s.perfect_hybrid)] {
                let (mean_rate, ci95) = mean_ci(x);
                rows.push(QuantizationRow { study: "phase-bits", value: bits as usize, snr_db, method, trials, mean_rate, ci95 });
            }
        }
    }
    for &n in &config.sweep.resolutions {
        let mut link = config.link.clone();
        link.resolution = n;
        let setup = LinkSetup::new(&link)?;
        for &snr_db in &config.sweep.snr_db {
            let noise = noise_for(snr_db, ch);
            let snr = average_snr(ch.avg_gain_power, ch.pathloss, noise)?;
            let powers = setup.target_powers(delta, snr)?.powers;
            let per: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let off = draw_paths(ch, &setup, false, t as u64, seed)?;
                    let on = snap_to_grid(&off, n)?;
                    let rate = |paths: &PathSet| -> Result<f64> {
                        let h = assemble_channel(paths, &setup.bs_geometry, &setup.ms_geometry);
                        let ctx = MeasurementContext::new(&h, noise, ch.pathloss)?;
                        let mut rng = trial_rng(seed, stream_id(point, t));
                        let est = setup.estimate(&ctx, &mut rng, &powers, EstimationOptions::default())?;
                        setup.hybrid_rate(&h, &setup.reconstruct(&est.estimate, ch.pathloss)?, 1.0, noise, None)
                    };
                    Ok((rate(&off)?, rate(&on)?))
                })
                .collect::<Result<_>>()?;
            point += 1;
            let off: Vec<f64> = per.iter().map(|p| p.0).collect();
            let on: Vec<f64> = per.iter().map(|p| p.1).collect();
            let loss: Vec<f64> = per.iter().map(|p| p.1 - p.0).collect();
            for (method, x) in [("off-grid", &off), ("on-grid", &on), ("loss", &loss)] {
                let (mean_rate, ci95) = mean_ci(x);
                rows.push(QuantizationRow { study: "resolution", value: n, snr_db, method, trials, mean_rate, ci95 });
            }
        }
    }
    Ok(rows)
}

pub fn coverage_rows(config: &ExperimentConfig) -> Result<Vec<CoverageRow>> {
    let setup = LinkSetup::new(&config.link)?;
    let opts = CoverageOptions {
        delta: config.training.delta,
        seed: config.experiment.seed,
        trials: config.experiment.trials,
    };
    let rates = simulate_coverage(&setup, &config.cellular, &opts)?;
    let mut rows = Vec::new();
    for (p, r) in rates.pipelines.iter().zip(&rates.rates) {
        for c in coverage_curve(r, &config.coverage.thresholds) {
            rows.push(CoverageRow {
                threshold: c.threshold,
                coverage: c.coverage,
                ci_low: c.ci_low,
                ci_high: c.ci_high,
                trials: c.trials,
                pipeline: p.name(),
            });
        }
    }
    Ok(rows)
}

/// Writes a `# schema:` comment line, a header and the rows; rejects
/// non-finite numbers.
pub fn write_csv<T: Serialize, W: Write>(mut writer: W, schema: &str, rows: &[T]) -> Result<()> {
    writeln!(writer, "# schema: {schema}")?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))?;
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        if matches!(field, "NaN" | "inf" | "-inf") {
            return Err(Error::Config(format!("non-finite value in output: {field}")));
        }
    }
    writer.write_all(text.as_bytes())?;
    Ok(())
}

fn write_table<T: Serialize>(dir: &Path, name: &str, schema: &str, rows: &[T]) -> Result<OutputFile> {
    let file = File::create(dir.join(name))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, schema, rows)?;
    w.flush()?;
    Ok(OutputFile { file: name.to_string(), schema: schema.to_string(), rows: rows.len() })
}

/// Runs the experiment on a pool of `experiment.threads` workers and writes
/// `<kind>.csv` plus `manifest.json` into `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    config.validate()?;
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.experiment.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let outputs = pool.install(|| run_kind(config, out))?;
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        kind: config.experiment.kind.name(),
        code_version: env!("CARGO_PKG_VERSION"),
        seed: config.experiment.seed,
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
        config: config.clone(),
    };
    let f = BufWriter::new(File::create(out.join("manifest.json"))?);
    serde_json::to_writer_pretty(f, &manifest)?;
    Ok(manifest)
}

fn run_kind(config: &ExperimentConfig, out: &Path) -> Result<Vec<OutputFile>> {
    let kind = config.experiment.kind;
    let name = format!("{}.csv", kind.name());
    let schema = csv_schema(kind);
    let mut outputs = Vec::new();
    match kind {
        ExperimentKind::DesignCodebook => {
            let (setup, rows) = design_codebook_rows(config)?;
            outputs.push(write_table(out, &name, &schema, &rows)?);
            for (side, cb) in [("bs", &setup.bs_codebook), ("ms", &setup.ms_codebook)] {
                let file = format!("codebook_{side}.json");
                cb.write_json(BufWriter::new(File::create(out.join(&file))?))?;
                outputs.push(OutputFile { file, schema: "mmwave-acs-codebook/v1".into(), rows: cb.levels() });
            }
        }
        ExperimentKind::SinglePathError => {
            let (rows, trace) = single_path_error_rows(config)?;
            outputs.push(write_table(out, &name, &schema, &rows)?);
            if config.training.record_trace {
                let mut w = BufWriter::new(File::create(out.join("trace.csv"))?);
                write_trace_csv(&mut w, &trace)?;
                w.flush()?;
                outputs.push(OutputFile { file: "trace.csv".into(), schema: crate::estimation::TRACE_SCHEMA.into(), rows: trace.len() });
            }
        }
        ExperimentKind::SpectralEfficiencySweep => {
            outputs.push(write_table(out, &name, &schema, &spectral_efficiency_rows(config)?)?);
        }
        ExperimentKind::QuantizationStudy => {
            outputs.push(write_table(out, &name, &schema, &quantization_rows(config)?)?);
        }
        ExperimentKind::Coverage => {
            outputs.push(write_table(out, &name, &schema, &coverage_rows(config)?)?);
        }
    }
    Ok(outputs)
}

/// Path of the main table a run writes.
pub fn table_path(config: &ExperimentConfig, out: &Path) -> PathBuf {
    out.join(format!("{}.csv", config.experiment.kind.name()))
}
