use num_complex::Complex64;
use rand::RngCore;
use serde::Serialize;

use super::measure::{measure_matrix, MeasurementContext};
use super::steps::StepCount;
use super::trace::StageRecord;
use crate::codebook::HierarchicalCodebook;
use crate::error::{invalid, Result};
use crate::linalg::{argmax, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinglePathEstimate {
    pub aod_cell: usize,
    pub aoa_cell: usize,
    pub gain: Complex64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimationOptions {
    /// Combiners the receiver can apply in one slot.
    pub rf_parallel: Option<usize>,
    pub record_trace: bool,
}

#[derive(Debug, Clone)]
pub struct Estimation<E> {
    pub estimate: E,
    pub steps: StepCount,
    pub trace: Vec<StageRecord>,
}

pub(crate) fn check_pair(bs: &HierarchicalCodebook, ms: &HierarchicalCodebook, powers: &[f64]) -> Result<()> {
    if bs.layout() != ms.layout() {
        return Err(invalid("both sides must share the same codebook layout"));
    }
    if powers.len() != bs.levels() {
        return Err(invalid(format!("expected {} stage powers, got {}", bs.levels(), powers.len())));
    }
    Ok(())
}

/// Index of the strongest entry; ties go to the lowest `(bs, ms)` pair.
pub(crate) fn strongest(power: &CMat) -> (usize, usize) {
    let m = power.nrows();
    let i = argmax(power.iter().map(|z| z.re)).expect("non-empty measurement");
    (i % m, i / m)
}

/// Bisection-style search for the dominant path: each stage measures the
/// `K x K` beam pairs of the current subset pair and descends into the
/// strongest one.
pub fn estimate_single_path<R: RngCore>(
    ctx: &MeasurementContext,
    rng: &mut R,
    bs: &HierarchicalCodebook,
    ms: &HierarchicalCodebook,
    powers: &[f64],
    options: EstimationOptions,
) -> Result<Estimation<SinglePathEstimate>> {
    check_pair(bs, ms, powers)?;
    let layout = *bs.layout();
    if layout.paths() != 1 {
        return Err(invalid("single-path search needs a single-path codebook"));
    }
    let mut steps = StepCount::default();
    let mut trace = Vec::new();
    let (mut k_bs, mut k_ms) = (0, 0);
    let mut last = (0, 0, Complex64::new(0.0, 0.0));
    for (s, &p) in powers.iter().enumerate() {
        let bs_beams: Vec<usize> = layout.subset_beams(s, k_bs).collect();
        let ms_beams: Vec<usize> = layout.subset_beams(s, k_ms).collect();
        let f = bs.beams_matrix(s, &bs_beams);
        let w = ms.beams_matrix(s, &ms_beams);
        let y = measure_matrix(ctx, rng, &f, &w, p)?;
        let pow = y.map(|z| Complex64::new(z.norm_sqr(), 0.0));
        let (m_ms, m_bs) = strongest(&pow);
        let before = steps.slots;
        let bits = steps.add_stage(bs_beams.len(), ms_beams.len(), options.rf_parallel);
        k_bs = bs_beams[m_bs];
        k_ms = ms_beams[m_ms];
        last = (k_bs, k_ms, y[(m_ms, m_bs)]);
        if options.record_trace {
            trace.push(StageRecord {
                path: 0,
                stage: s,
                bs_beams: bs_beams.clone(),
                ms_beams: ms_beams.clone(),
                tx_power: p,
                received_power: pow.iter().map(|z| z.re).collect(),
                selected_bs: k_bs,
                selected_ms: k_ms,
                slots: steps.slots - before,
                feedback_bits: bits,
            });
        }
    }
    let s_last = layout.levels() - 1;
    let (aod_cell, aoa_cell, y) = last;
    let g = bs.beam_gain(s_last, aod_cell) * ms.beam_gain(s_last, aoa_cell);
    let p = powers[s_last];
    let gain = if p > 0.0 { y * (ctx.pathloss / (p * g)).sqrt() } else { Complex64::new(0.0, 0.0) };
    Ok(Estimation { estimate: SinglePathEstimate { aod_cell, aoa_cell, gain }, steps, trace })
}
