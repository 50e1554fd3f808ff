//! Estimates three paths and compares against exhaustive search.

use mmwave_acs::channel::{assemble_channel, sample_pathset, AngleDomain};
use mmwave_acs::estimation::{EstimationOptions, MeasurementContext};
use mmwave_acs::link::{trial_rng, LinkConfig, LinkSetup};

fn main() -> mmwave_acs::Result<()> {
    let link = LinkSetup::new(&LinkConfig { estimated_paths: 3, resolution: 96, ..Default::default() })?;
    let paths = sample_pathset(&mut trial_rng(2, 0), 3, 1.0, 1.0, AngleDomain::HalfCircle)?;
    let h = assemble_channel(&paths, &link.bs_geometry, &link.ms_geometry);
    let ctx = MeasurementContext::new(&h, 1.0, 1.0)?;
    let alloc = link.target_powers(0.05, 1.0)?;

    let adaptive = link.estimate(&ctx, &mut trial_rng(2, 1), &alloc.powers, EstimationOptions::default())?;
    let exhaustive = link.exhaustive(&ctx, &mut trial_rng(2, 2), alloc.total)?;
    for (name, e) in [("adaptive", &adaptive), ("exhaustive", &exhaustive)] {
        let h_hat = link.reconstruct(&e.estimate, 1.0)?;
        let rate = link.hybrid_rate(&h, &h_hat, 1.0, 1.0, None)?;
        let cells: Vec<_> = e.estimate.paths.iter().map(|p| (p.aod_cell, p.aoa_cell)).collect();
        println!("{name}: {} slots, cells {cells:?}, rate {rate:.3} bps/Hz", e.steps.slots);
    }
    Ok(())
}
