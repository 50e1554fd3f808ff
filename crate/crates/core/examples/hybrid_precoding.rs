//! Rate of hybrid, unconstrained and analog-only beams on one channel.

use mmwave_acs::channel::{assemble_channel, db_to_linear, sample_pathset, AngleDomain};
use mmwave_acs::estimation::{analog_only_baseline, targets_from_paths};
use mmwave_acs::link::{trial_rng, LinkConfig, LinkSetup};

fn main() -> mmwave_acs::Result<()> {
    let link = LinkSetup::new(&LinkConfig { estimated_paths: 3, resolution: 96, ..Default::default() })?;
    let paths = sample_pathset(&mut trial_rng(4, 0), 3, 1.0, 1.0, AngleDomain::HalfCircle)?;
    let h = assemble_channel(&paths, &link.bs_geometry, &link.ms_geometry);
    let (f, w) = link.design(&h)?;
    println!("BS RF columns {:?}", f.rf_columns);
    println!("MS RF columns {:?}", w.rf_columns);

    println!("snr_db  unconstrained  hybrid  analog");
    for snr_db in [-10.0, 0.0, 10.0] {
        let noise = 1.0 / db_to_linear(snr_db);
        let (fu, wu) = link.unconstrained(&h)?;
        let full = link.rate(&h, &fu, &wu, 1.0, noise, None)?;
        let hybrid = link.rate(&h, f.matrix(), w.matrix(), 1.0, noise, None)?;
        let (fa, wa) = analog_only_baseline(&targets_from_paths(&paths), &link.bs_candidates, &link.ms_candidates, 0.5, 1)?;
        let analog = link.rate(&h, fa.matrix(), wa.matrix(), 1.0, noise, None)?;
        println!("{snr_db:>6}  {full:>13.3}  {hybrid:>6.3}  {analog:>6.3}");
    }
    Ok(())
}
