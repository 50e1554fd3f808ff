//! Builds the default hybrid training codebooks and prints per-level gains.

use mmwave_acs::codebook::gain_analysis;
use mmwave_acs::link::{LinkConfig, LinkSetup};

fn main() -> mmwave_acs::Result<()> {
    let link = LinkSetup::new(&LinkConfig::default())?;
    let analysis = gain_analysis(&link.bs_codebook, &link.ms_codebook, &link.bs_dict, &link.ms_dict)?;
    println!("level  beams  nominal_gain  min_forward  max_backward  beta");
    for l in &analysis.levels {
        println!(
            "{:>5}  {:>5}  {:>12.3}  {:>11.3}  {:>12.3}  {:.3}",
            l.level,
            link.bs_codebook.level(l.level).len(),
            l.nominal_gain,
            l.min_forward,
            l.max_backward,
            l.beta
        );
    }
    Ok(())
}
