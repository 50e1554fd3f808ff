use num_complex::Complex64;
use rand::RngCore;
use serde::Serialize;

use super::measure::{measure_matrix, MeasurementContext};
use super::single::{check_pair, Estimation, EstimationOptions, SinglePathEstimate};
use super::steps::StepCount;
use super::trace::StageRecord;
use crate::channel::Dictionary;
use crate::codebook::{CodebookLayout, HierarchicalCodebook};
use crate::error::{invalid, Result};
use crate::linalg::{deflate, kron_vec, least_squares, push_orthonormal, CMat, CVec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPathEstimate {
    pub paths: Vec<SinglePathEstimate>,
    /// Beam chosen at every stage, per path, as `(bs, ms)`.
    pub trajectories: Vec<Vec<(usize, usize)>>,
    /// Paths whose strongest final cell repeated an earlier path.
    pub collisions: usize,
}

/// Response of a single on-grid path through the given beams, laid out like
/// the column-major measurement vector.
pub fn path_signature(f: &CMat, w: &CMat, a_bs: &CVec, a_ms: &CVec) -> CVec {
    let bs_part = f.adjoint() * a_bs;
    let bs_part = bs_part.map(|z| z.conj());
    let ms_part = w.adjoint() * a_ms;
    kron_vec(&bs_part, &ms_part)
}

/// Entries of `power` (an `M_MS x M_BS` matrix) sorted by descending value;
/// equal values keep column-major order.
fn ranking(power: &[f64], m_ms: usize) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (0..power.len()).collect();
    idx.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    idx.into_iter().map(|i| (i % m_ms, i / m_ms)).collect()
}

fn stage_subsets(
    layout: &CodebookLayout,
    stage: usize,
    own: usize,
    previous: impl Iterator<Item = usize>,
    ranked: &[usize],
) -> Vec<usize> {
    if stage == 0 {
        return vec![0];
    }
    let want = layout.paths().min(layout.subset_count(stage));
    let mut out = vec![own];
    for k in previous.chain(ranked.iter().copied()).chain(0..layout.subset_count(stage)) {
        if out.len() >= want {
            break;
        }
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn beams_of(layout: &CodebookLayout, stage: usize, subsets: &[usize]) -> Vec<usize> {
    subsets.iter().flat_map(|&k| layout.subset_beams(stage, k)).collect()
}

fn dedup_in_order(v: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Least-squares gains of all paths from every path's final-stage data;
/// `None` if the stacked signatures are rank deficient.
fn joint_gains(
    finals: &[(CMat, CMat, CVec, f64)],
    found: &[SinglePathEstimate],
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
    pathloss: f64,
    nn: f64,
) -> Option<Vec<Complex64>> {
    let rows: usize = finals.iter().map(|x| x.2.len()).sum();
    let mut a = CMat::zeros(rows, found.len());
    let mut b = CMat::zeros(rows, 1);
    let mut r0 = 0;
    for (f, w, y, p) in finals {
        let scale = Complex64::new((p * nn / pathloss).sqrt(), 0.0);
        for (j, e) in found.iter().enumerate() {
            let g = path_signature(f, w, &bs_dict.column(e.aod_cell), &ms_dict.column(e.aoa_cell)) * scale;
            a.view_mut((r0, j), (y.len(), 1)).copy_from(&g);
        }
        b.view_mut((r0, 0), (y.len(), 1)).copy_from(y);
        r0 += y.len();
    }
    least_squares(&a, &b).ok().map(|z| z.column(0).iter().copied().collect())
}

/// Sequential search for `L` paths. Each path runs the hierarchical descent
/// while also measuring the subsets visited by earlier paths (and, to keep
/// the stage size fixed, the next strongest subsets of the previous stage).
/// Contributions of earlier paths are projected out of every measurement
/// before the strongest pair is chosen. Gains come from a joint
/// least-squares fit over the final-stage measurements of all paths.
#[allow(clippy::too_many_arguments)]
pub fn estimate_multi_path<R: RngCore>(
    ctx: &MeasurementContext,
    rng: &mut R,
    bs: &HierarchicalCodebook,
    ms: &HierarchicalCodebook,
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
    powers: &[f64],
    options: EstimationOptions,
) -> Result<Estimation<MultiPathEstimate>> {
    check_pair(bs, ms, powers)?;
    let layout = *bs.layout();
    if bs_dict.resolution() != layout.resolution() || ms_dict.resolution() != layout.resolution() {
        return Err(invalid("dictionary resolution does not match the codebook"));
    }
    let nn = (bs.geometry().num_elements() * ms.geometry().num_elements()) as f64;
    let levels = layout.levels();
    let mut steps = StepCount::default();
    let mut trace = Vec::new();
    let mut found: Vec<SinglePathEstimate> = Vec::new();
    let mut trajectories: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut collisions = 0;
    let mut finals: Vec<(CMat, CMat, CVec, f64)> = Vec::new();

    for ell in 0..layout.paths() {
        let (mut cur_bs, mut cur_ms) = (0usize, 0usize);
        let mut ranked_bs: Vec<usize> = Vec::new();
        let mut ranked_ms: Vec<usize> = Vec::new();
        let mut traj = Vec::with_capacity(levels);
        let mut final_gain = Complex64::new(0.0, 0.0);
        for (s, &p) in powers.iter().enumerate() {
            let bs_sub = stage_subsets(&layout, s, cur_bs, trajectories.iter().map(|t| t[s.saturating_sub(1)].0), &ranked_bs);
            let ms_sub = stage_subsets(&layout, s, cur_ms, trajectories.iter().map(|t| t[s.saturating_sub(1)].1), &ranked_ms);
            let bs_beams = beams_of(&layout, s, &bs_sub);
            let ms_beams = beams_of(&layout, s, &ms_sub);
            let f = bs.beams_matrix(s, &bs_beams);
            let w = ms.beams_matrix(s, &ms_beams);
            let y_mat = measure_matrix(ctx, rng, &f, &w, p)?;
            let y = CVec::from_column_slice(y_mat.as_slice());

            let mut basis: Vec<CVec> = Vec::new();
            for e in &found {
                let g = path_signature(&f, &w, &bs_dict.column(e.aod_cell), &ms_dict.column(e.aoa_cell));
                push_orthonormal(&mut basis, &g);
            }
            let y_defl = deflate(&y, &basis);
            let power: Vec<f64> = y_defl.iter().map(|z| z.norm_sqr()).collect();
            let order = ranking(&power, ms_beams.len());

            let last = s + 1 == levels;
            let mut choice = order[0];
            if last {
                let fresh = order.iter().position(|&(m, b)| {
                    let (cb, cm) = (bs_beams[b], ms_beams[m]);
                    !found.iter().any(|e| bs_dict.same_response(e.aod_cell, cb) && ms_dict.same_response(e.aoa_cell, cm))
                });
                let pos = fresh.unwrap_or(0);
                if pos > 0 {
                    collisions += 1;
                }
                choice = order[pos];
            }
            let (m_ms, m_bs) = choice;
            cur_bs = bs_beams[m_bs];
            cur_ms = ms_beams[m_ms];
            traj.push((cur_bs, cur_ms));
            ranked_bs = dedup_in_order(order.iter().map(|&(_, b)| bs_beams[b]));
            ranked_ms = dedup_in_order(order.iter().map(|&(m, _)| ms_beams[m]));

            let before = steps.slots;
            let bits = steps.add_stage(bs_beams.len(), ms_beams.len(), options.rf_parallel);
            if options.record_trace {
                trace.push(StageRecord {
                    path: ell,
                    stage: s,
                    bs_beams: bs_beams.clone(),
                    ms_beams: ms_beams.clone(),
                    tx_power: p,
                    received_power: power.clone(),
                    selected_bs: cur_bs,
                    selected_ms: cur_ms,
                    slots: steps.slots - before,
                    feedback_bits: bits,
                });
            }

            if last {
                let g = path_signature(&f, &w, &bs_dict.column(cur_bs), &ms_dict.column(cur_ms));
                let g_perp = deflate(&g, &basis);
                let denom = g_perp.norm_squared();
                if denom > 0.0 && p > 0.0 {
                    final_gain = g_perp.dotc(&y_defl) / denom * (ctx.pathloss / (p * nn)).sqrt();
                }
                finals.push((f.clone(), w.clone(), y.clone(), p));
            }
        }
        found.push(SinglePathEstimate { aod_cell: cur_bs, aoa_cell: cur_ms, gain: final_gain });
        trajectories.push(traj);
    }
    if let Some(z) = joint_gains(&finals, &found, bs_dict, ms_dict, ctx.pathloss, nn) {
        for (e, g) in found.iter_mut().zip(z) {
            e.gain = g;
        }
    }
    Ok(Estimation { estimate: MultiPathEstimate { paths: found, trajectories, collisions }, steps, trace })
}
