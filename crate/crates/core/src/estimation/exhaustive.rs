use num_complex::Complex64;
use rand::RngCore;

use super::measure::{measure_matrix, MeasurementContext};
use super::multi::MultiPathEstimate;
use super::single::{Estimation, SinglePathEstimate};
use super::steps::StepCount;
use crate::channel::Dictionary;
use crate::error::{invalid, Result};
use crate::linalg::{kron_vec, least_squares, CMat, CVec};

/// Measures every pair of dictionary beams, keeps the `num_paths` strongest
/// pairs that are distinct up to response aliases, and fits their gains
/// jointly by least squares.
pub fn exhaustive_estimate<R: RngCore>(
    ctx: &MeasurementContext,
    rng: &mut R,
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
    power: f64,
    num_paths: usize,
) -> Result<Estimation<MultiPathEstimate>> {
    let n = bs_dict.resolution();
    if ms_dict.resolution() != n {
        return Err(invalid("both dictionaries must share the grid"));
    }
    if num_paths == 0 || num_paths > n * n {
        return Err(invalid("number of paths must be between 1 and N^2"));
    }
    let y_mat = measure_matrix(ctx, rng, bs_dict.matrix(), ms_dict.matrix(), power)?;
    let y = CVec::from_column_slice(y_mat.as_slice());
    let gram_bs = bs_dict.matrix().adjoint() * bs_dict.matrix();
    let gram_ms = ms_dict.matrix().adjoint() * ms_dict.matrix();
    let signature = |u_bs: usize, u_ms: usize| -> CVec {
        let b = gram_bs.row(u_bs).transpose().into_owned();
        let m = gram_ms.column(u_ms).into_owned();
        kron_vec(&b, &m)
    };
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[b].norm_sqr().total_cmp(&y[a].norm_sqr()).then(a.cmp(&b)));
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for i in order {
        if cells.len() == num_paths {
            break;
        }
        let (u_ms, u_bs) = (i % n, i / n);
        if !cells.iter().any(|&(b, m)| bs_dict.same_response(b, u_bs) && ms_dict.same_response(m, u_ms)) {
            cells.push((u_bs, u_ms));
        }
    }
    let sigs: Vec<CVec> = cells.iter().map(|&(b, m)| signature(b, m)).collect();
    let nn = (bs_dict.geometry().num_elements() * ms_dict.geometry().num_elements()) as f64;
    let scale = if power > 0.0 { (ctx.pathloss / (power * nn)).sqrt() } else { 0.0 };
    let g_mat = CMat::from_columns(&sigs);
    let y_col = CMat::from_column_slice(y.len(), 1, y.as_slice());
    let gains: Vec<Complex64> = match least_squares(&g_mat, &y_col) {
        Ok(x) => x.iter().map(|z| z * scale).collect(),
        Err(_) => sigs.iter().map(|g| g.dotc(&y) / g.norm_squared() * scale).collect(),
    };
    let paths = cells
        .iter()
        .zip(gains)
        .map(|(&(b, m), gain)| SinglePathEstimate { aod_cell: b, aoa_cell: m, gain })
        .collect();
    let steps = StepCount { slots: n * n, stages: 1, feedback_bits: super::steps::feedback_bits(n) * num_paths };
    Ok(Estimation {
        estimate: MultiPathEstimate { paths, trajectories: cells.iter().map(|&c| vec![c]).collect(), collisions: 0 },
        steps,
        trace: Vec::new(),
    })
}
