use crate::channel::{array_response, Dictionary, PathSet};
use crate::codebook::CandidateSet;
use crate::error::{invalid, Result};
use crate::linalg::CMat;
use crate::precoding::HybridPrecoder;

use super::single::SinglePathEstimate;

/// A path direction and its strength, the only input analog steering needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringTarget {
    pub aod: f64,
    pub aoa: f64,
    pub strength: f64,
}

pub fn targets_from_paths(paths: &PathSet) -> Vec<SteeringTarget> {
    paths
        .strongest()
        .iter()
        .map(|p| SteeringTarget { aod: p.aod, aoa: p.aoa, strength: p.gain.norm() })
        .collect()
}

pub fn targets_from_estimate(paths: &[SinglePathEstimate], bs_dict: &Dictionary, ms_dict: &Dictionary) -> Vec<SteeringTarget> {
    let mut t: Vec<SteeringTarget> = paths
        .iter()
        .map(|p| SteeringTarget {
            aod: bs_dict.grid().angle(p.aod_cell),
            aoa: ms_dict.grid().angle(p.aoa_cell),
            strength: p.gain.norm(),
        })
        .collect();
    t.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    t
}

fn steer(candidates: &CandidateSet, angles: &[f64], spacing: f64) -> Result<HybridPrecoder> {
    let geom = crate::channel::UlaGeometry::new(candidates.num_elements(), spacing)?;
    let mut chosen: Vec<usize> = Vec::with_capacity(angles.len());
    for &a in angles {
        let r = array_response(&geom, a);
        let corr = candidates.matrix().adjoint() * r;
        let best = (0..corr.len())
            .filter(|i| !chosen.contains(i))
            .max_by(|&i, &j| corr[i].norm().total_cmp(&corr[j].norm()).then(j.cmp(&i)))
            .ok_or_else(|| invalid("not enough distinct candidates for the requested streams"))?;
        chosen.push(best);
    }
    let n = chosen.len();
    HybridPrecoder::from_parts(candidates, chosen, CMat::identity(n, n))
}

/// Pure analog steering: stream `i` uses the candidate best aligned with the
/// `i`-th strongest path on each side, with an identity baseband.
pub fn analog_only_baseline(
    targets: &[SteeringTarget],
    bs_candidates: &CandidateSet,
    ms_candidates: &CandidateSet,
    spacing: f64,
    streams: usize,
) -> Result<(HybridPrecoder, HybridPrecoder)> {
    if streams == 0 || streams > targets.len() {
        return Err(invalid(format!("{streams} streams requested for {} paths", targets.len())));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    let aods: Vec<f64> = sorted[..streams].iter().map(|t| t.aod).collect();
    let aoas: Vec<f64> = sorted[..streams].iter().map(|t| t.aoa).collect();
    Ok((steer(bs_candidates, &aods, spacing)?, steer(ms_candidates, &aoas, spacing)?))
}
