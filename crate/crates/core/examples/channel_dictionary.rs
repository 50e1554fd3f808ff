//! Draws a sparse channel and shows how its paths land on the angle grid.

use mmwave_acs::channel::{assemble_channel, build_dictionary, sample_pathset, AngleDomain, AngleGrid, UlaGeometry};
use mmwave_acs::link::trial_rng;

fn main() -> mmwave_acs::Result<()> {
    let bs = UlaGeometry::half_wavelength(16)?;
    let ms = UlaGeometry::half_wavelength(8)?;
    let grid = AngleGrid::new(32)?;
    let dict = build_dictionary(&bs, &grid)?;

    let paths = sample_pathset(&mut trial_rng(1, 0), 3, 1.0, 1.0, AngleDomain::HalfCircle)?;
    let h = assemble_channel(&paths, &bs, &ms);
    println!("channel {}x{}, ||H||_F = {:.3}", h.matrix().nrows(), h.matrix().ncols(), h.frobenius_norm());

    for (i, p) in paths.paths.iter().enumerate() {
        let a = mmwave_acs::channel::array_response(&bs, p.aod);
        let best = (0..grid.len())
            .max_by(|&u, &v| dict.column(u).dotc(&a).norm().total_cmp(&dict.column(v).dotc(&a).norm()))
            .unwrap();
        println!(
            "path {i}: AoD {:.3} rad, |alpha| = {:.3}, best-matching cell {best} at {:.3} rad",
            p.aod,
            p.gain.norm(),
            grid.angle(best)
        );
    }
    Ok(())
}
