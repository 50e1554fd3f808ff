use rayon::prelude::*;

use super::candidates::CandidateSet;
use super::design::{ideal_precoder, omp_hybrid_design, BeamVector, IdealSolver};
use super::mask::{subset_mask, CodebookLayout};
use crate::channel::{Dictionary, UlaGeometry};
use crate::error::{invalid, Result};
use crate::linalg::CMat;

/// Hardware model the beams must respect.
#[derive(Debug, Clone)]
pub enum BeamConstraint {
    /// Arbitrary antenna weights.
    Unconstrained,
    /// `rf_chains` columns drawn from `candidates` plus a digital baseband.
    Hybrid { candidates: CandidateSet, rf_chains: usize },
}

impl BeamConstraint {
    pub fn candidates(&self) -> Option<&CandidateSet> {
        match self {
            BeamConstraint::Unconstrained => None,
            BeamConstraint::Hybrid { candidates, .. } => Some(candidates),
        }
    }

    pub fn rf_chains(&self) -> Option<usize> {
        match self {
            BeamConstraint::Unconstrained => None,
            BeamConstraint::Hybrid { rf_chains, .. } => Some(*rf_chains),
        }
    }
}

/// Multi-resolution beams for one side of the link. Beams of a level are
/// indexed by the sub-range they cover.
#[derive(Debug, Clone)]
pub struct HierarchicalCodebook {
    pub(crate) layout: CodebookLayout,
    pub(crate) geometry: UlaGeometry,
    pub(crate) constraint: BeamConstraint,
    pub(crate) levels: Vec<Vec<BeamVector>>,
}

pub fn build_codebook(
    dict: &Dictionary,
    layout: &CodebookLayout,
    constraint: &BeamConstraint,
    relative_loading: f64,
) -> Result<HierarchicalCodebook> {
    if dict.resolution() != layout.resolution() {
        return Err(invalid(format!(
            "dictionary has {} cells but the layout expects {}",
            dict.resolution(),
            layout.resolution()
        )));
    }
    if let Some(c) = constraint.candidates() {
        if c.num_elements() != dict.geometry().num_elements() {
            return Err(invalid("candidate set and dictionary have different array sizes"));
        }
    }
    let solver = IdealSolver::new(dict, relative_loading)?;
    let jobs: Vec<(usize, usize)> = (0..layout.levels())
        .flat_map(|s| (0..layout.subset_count(s)).map(move |k| (s, k)))
        .collect();
    let designed: Vec<Result<Vec<BeamVector>>> = jobs
        .par_iter()
        .map(|&(s, k)| {
            let mask = subset_mask(layout, s, k)?;
            let f = ideal_precoder(&solver, &mask);
            (0..f.ncols())
                .map(|m| {
                    let t = f.column(m).into_owned();
                    match constraint {
                        BeamConstraint::Unconstrained => BeamVector::unconstrained(&t),
                        BeamConstraint::Hybrid { candidates, rf_chains } => {
                            omp_hybrid_design(&t, candidates, *rf_chains)
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut levels: Vec<Vec<BeamVector>> = (0..layout.levels()).map(|_| Vec::new()).collect();
    for ((s, _), beams) in jobs.iter().zip(designed) {
        levels[*s].extend(beams?);
    }
    Ok(HierarchicalCodebook { layout: *layout, geometry: *dict.geometry(), constraint: constraint.clone(), levels })
}

impl HierarchicalCodebook {
    pub fn layout(&self) -> &CodebookLayout {
        &self.layout
    }

    pub fn geometry(&self) -> &UlaGeometry {
        &self.geometry
    }

    pub fn constraint(&self) -> &BeamConstraint {
        &self.constraint
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, level: usize) -> &[BeamVector] {
        &self.levels[level]
    }

    pub fn beam(&self, level: usize, beam: usize) -> &BeamVector {
        &self.levels[level][beam]
    }

    pub fn subset(&self, level: usize, subset: usize) -> &[BeamVector] {
        &self.levels[level][self.layout.subset_beams(level, subset)]
    }

    /// Antenna weights of the listed beams, one per column.
    pub fn beams_matrix(&self, level: usize, beams: &[usize]) -> CMat {
        CMat::from_columns(&beams.iter().map(|&j| self.levels[level][j].weights().clone()).collect::<Vec<_>>())
    }

    /// Smallest normalizer over the beams of a level.
    pub fn nominal_normalizer(&self, level: usize) -> f64 {
        self.levels[level].iter().map(|b| b.normalizer).fold(f64::INFINITY, f64::min)
    }

    /// `N C_s^2` with the level's nominal normalizer.
    pub fn nominal_gain(&self, level: usize) -> f64 {
        self.geometry.num_elements() as f64 * self.nominal_normalizer(level).powi(2)
    }

    /// `N C^2` of one beam.
    pub fn beam_gain(&self, level: usize, beam: usize) -> f64 {
        self.geometry.num_elements() as f64 * self.levels[level][beam].normalizer.powi(2)
    }
}

/// Per-level nominal gains `G_s = N_BS C_BS^2 N_MS C_MS^2` of a codebook pair.
pub fn nominal_link_gains(bs: &HierarchicalCodebook, ms: &HierarchicalCodebook) -> Vec<f64> {
    (0..bs.levels().min(ms.levels())).map(|s| bs.nominal_gain(s) * ms.nominal_gain(s)).collect()
}
