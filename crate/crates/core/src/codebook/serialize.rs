use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::candidates::{CandidateDescriptor, CandidateSet};
use super::design::BeamVector;
use super::hierarchy::{BeamConstraint, HierarchicalCodebook};
use super::mask::CodebookLayout;
use crate::channel::UlaGeometry;
use crate::error::{invalid, Result};
use crate::linalg::CVec;

pub const FORMAT: &str = "mmwave-acs-codebook";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookDump {
    pub format: String,
    pub version: u32,
    pub num_elements: usize,
    pub spacing: f64,
    pub resolution: usize,
    pub branching: usize,
    pub paths: usize,
    /// `None` for unconstrained beams.
    pub candidates: Option<CandidateDescriptor>,
    pub rf_chains: Option<usize>,
    pub beams: Vec<BeamEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamEntry {
    pub level: usize,
    pub subset: usize,
    pub index: usize,
    pub rf_columns: Vec<usize>,
    /// `(re, im)` pairs.
    pub baseband: Vec<(f64, f64)>,
    pub normalizer: f64,
}

impl HierarchicalCodebook {
    pub fn to_dump(&self) -> CodebookDump {
        let layout = self.layout();
        let mut beams = Vec::new();
        for s in 0..self.levels() {
            for (j, b) in self.level(s).iter().enumerate() {
                let k = layout.subset_of_beam(s, j);
                beams.push(BeamEntry {
                    level: s,
                    subset: k,
                    index: j - layout.subset_beams(s, k).start,
                    rf_columns: b.rf_columns.clone(),
                    baseband: b.baseband.iter().map(|z| (z.re, z.im)).collect(),
                    normalizer: b.normalizer,
                });
            }
        }
        CodebookDump {
            format: FORMAT.into(),
            version: VERSION,
            num_elements: self.geometry().num_elements(),
            spacing: self.geometry().spacing(),
            resolution: layout.resolution(),
            branching: layout.branching(),
            paths: layout.paths(),
            candidates: self.constraint().candidates().map(|c| c.descriptor().clone()),
            rf_chains: self.constraint().rf_chains(),
            beams,
        }
    }

    pub fn from_dump(dump: &CodebookDump) -> Result<Self> {
        if dump.format != FORMAT || dump.version != VERSION {
            return Err(invalid(format!("unsupported codebook format {} v{}", dump.format, dump.version)));
        }
        let geometry = UlaGeometry::new(dump.num_elements, dump.spacing)?;
        let layout = CodebookLayout::multi_path(dump.resolution, dump.branching, dump.paths)?;
        let constraint = match (&dump.candidates, dump.rf_chains) {
            (None, _) => BeamConstraint::Unconstrained,
            (Some(d), Some(rf)) => BeamConstraint::Hybrid { candidates: CandidateSet::from_descriptor(&geometry, d)?, rf_chains: rf },
            (Some(_), None) => return Err(invalid("hybrid codebook dump lacks rf_chains")),
        };
        let mut levels: Vec<Vec<Option<BeamVector>>> =
            (0..layout.levels()).map(|s| vec![None; layout.sub_range_count(s)]).collect();
        for e in &dump.beams {
            if e.level >= layout.levels() || e.subset >= layout.subset_count(e.level) || e.index >= layout.vectors_per_subset(e.level) {
                return Err(invalid("beam entry outside the codebook layout"));
            }
            let j = layout.subset_beams(e.level, e.subset).start + e.index;
            let baseband = CVec::from_iterator(e.baseband.len(), e.baseband.iter().map(|&(re, im)| Complex64::new(re, im)));
            if constraint.candidates().is_none() && baseband.len() != dump.num_elements {
                return Err(invalid("unconstrained beam length does not match the array"));
            }
            levels[e.level][j] = Some(BeamVector::from_parts(e.rf_columns.clone(), baseband, e.normalizer, constraint.candidates())?);
        }
        let levels = levels
            .into_iter()
            .map(|l| l.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| invalid("codebook dump is missing beams"))?;
        Ok(HierarchicalCodebook { layout, geometry, constraint, levels })
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.to_dump())?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let dump: CodebookDump = serde_json::from_reader(reader)?;
        Self::from_dump(&dump)
    }
}
