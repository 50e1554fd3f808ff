//! Small Poisson cellular run: coverage per pipeline at a few thresholds.

use mmwave_acs::cellular::{coverage_curve, simulate_coverage, CellConfig, CoverageOptions};
use mmwave_acs::link::{LinkConfig, LinkSetup};

fn main() -> mmwave_acs::Result<()> {
    let link = LinkSetup::new(&LinkConfig { estimated_paths: 3, resolution: 96, ..Default::default() })?;
    let cell = CellConfig::default();
    let rates = simulate_coverage(&link, &cell, &CoverageOptions { delta: 0.05, seed: 9, trials: 100 })?;
    let thresholds = [2.0, 6.0, 10.0];
    for (p, r) in rates.pipelines.iter().zip(&rates.rates) {
        let c: Vec<String> = coverage_curve(r, &thresholds).iter().map(|x| format!("{:.2}", x.coverage)).collect();
        println!("{:<42} {}", p.name(), c.join("  "));
    }
    Ok(())
}
