//! Adaptive search for one on-grid path with the ideal codebook.

use mmwave_acs::channel::{assemble_channel, AngleGrid, Path, PathSet};
use mmwave_acs::estimation::{EstimationOptions, MeasurementContext};
use mmwave_acs::link::{trial_rng, CodebookKind, LinkConfig, LinkSetup};
use num_complex::Complex64;

fn main() -> mmwave_acs::Result<()> {
    let link = LinkSetup::new(&LinkConfig {
        bs_antennas: 32,
        ms_antennas: 32,
        resolution: 32,
        codebook: CodebookKind::Ideal,
        phase_bits: None,
        ..Default::default()
    })?;
    let grid = AngleGrid::new(32)?;
    let truth = PathSet::new(vec![Path { aod: grid.angle(5), aoa: grid.angle(11), gain: Complex64::new(0.7, 0.7) }], 1.0, 1.0)?;
    let h = assemble_channel(&truth, &link.bs_geometry, &link.ms_geometry);

    let noise = 1.0;
    let powers = link.target_powers(0.05, 1.0 / noise)?.powers;
    let ctx = MeasurementContext::new(&h, noise, 1.0)?;
    let est = link.estimate(&ctx, &mut trial_rng(3, 0), &powers, EstimationOptions { record_trace: true, ..Default::default() })?;
    let p = &est.estimate.paths[0];
    println!("truth cells (5, 11), estimate ({}, {})", p.aod_cell, p.aoa_cell);
    println!("{} slots over {} stages, {} feedback bits", est.steps.slots, est.steps.stages, est.steps.feedback_bits);
    for r in &est.trace {
        println!("stage {}: picked bs {} ms {}", r.stage, r.selected_bs, r.selected_ms);
    }
    Ok(())
}
