use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of a hierarchical codebook over an `N`-cell grid.
///
/// Level `s` (0-based, coarsest first) splits the grid into
/// `L K^(s+1)` contiguous sub-ranges of width `N / (L K^(s+1))`. Beam `j` of a
/// level covers sub-range `j`. Level 0 holds a single subset of `K L` beams;
/// deeper levels group beams into subsets of `K`, and subset `j` of level
/// `s+1` refines sub-range `j` of level `s`. `L = 1` is the single-path case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookLayout {
    resolution: usize,
    branching: usize,
    paths: usize,
    levels: usize,
}

impl CodebookLayout {
    pub fn single_path(resolution: usize, branching: usize) -> Result<Self> {
        Self::multi_path(resolution, branching, 1)
    }

    pub fn multi_path(resolution: usize, branching: usize, paths: usize) -> Result<Self> {
        if branching < 2 {
            return Err(invalid(format!("branching factor must be at least 2, got {branching}")));
        }
        if paths == 0 {
            return Err(invalid("number of estimated paths must be positive"));
        }
        let rule = || Error::Divisibility {
            resolution,
            rule: format!(
                "N = L_d * K^S for an integer S >= 1 (L_d = {paths}, K = {branching})"
            ),
        };
        if !resolution.is_multiple_of(paths) {
            return Err(rule());
        }
        let mut rest = resolution / paths;
        let mut levels = 0;
        while rest > 1 && rest.is_multiple_of(branching) {
            rest /= branching;
            levels += 1;
        }
        if rest != 1 || levels == 0 {
            return Err(rule());
        }
        Ok(Self { resolution, branching, paths, levels })
    }

    /// Smallest valid resolution that is at least `min_resolution`.
    pub fn smallest_valid(min_resolution: usize, branching: usize, paths: usize) -> Result<Self> {
        if branching < 2 || paths == 0 {
            return Self::multi_path(min_resolution, branching, paths);
        }
        let mut n = paths * branching;
        while n < min_resolution {
            n *= branching;
        }
        Self::multi_path(n, branching, paths)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Number of levels `S`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn sub_range_count(&self, level: usize) -> usize {
        self.paths * self.branching.pow(level as u32 + 1)
    }

    pub fn sub_range_width(&self, level: usize) -> usize {
        self.resolution / self.sub_range_count(level)
    }

    pub fn sub_range_cells(&self, level: usize, sub_range: usize) -> Range<usize> {
        let w = self.sub_range_width(level);
        sub_range * w..(sub_range + 1) * w
    }

    /// The sub-range of `level` that contains grid cell `cell`.
    pub fn sub_range_of(&self, level: usize, cell: usize) -> usize {
        cell / self.sub_range_width(level)
    }

    pub fn subset_count(&self, level: usize) -> usize {
        if level == 0 {
            1
        } else {
            self.paths * self.branching.pow(level as u32)
        }
    }

    pub fn vectors_per_subset(&self, level: usize) -> usize {
        if level == 0 {
            self.branching * self.paths
        } else {
            self.branching
        }
    }

    /// Global beam indices that form `subset` of `level`.
    pub fn subset_beams(&self, level: usize, subset: usize) -> Range<usize> {
        let k = self.vectors_per_subset(level);
        subset * k..(subset + 1) * k
    }

    /// Subset of `level` that contains beam `beam`.
    pub fn subset_of_beam(&self, level: usize, beam: usize) -> usize {
        beam / self.vectors_per_subset(level)
    }

    /// Union of the cells covered by a subset.
    pub fn subset_cells(&self, level: usize, subset: usize) -> Range<usize> {
        let beams = self.subset_beams(level, subset);
        let w = self.sub_range_width(level);
        beams.start * w..beams.end * w
    }

    fn check(&self, level: usize, subset: usize) -> Result<()> {
        if level >= self.levels {
            return Err(invalid(format!("level {level} out of range (S = {})", self.levels)));
        }
        if subset >= self.subset_count(level) {
            return Err(invalid(format!(
                "subset {subset} out of range at level {level} ({} subsets)",
                self.subset_count(level)
            )));
        }
        Ok(())
    }
}

/// Target beam pattern of one subset: column `m` is the indicator of the
/// `m`-th sub-range.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMask {
    pub level: usize,
    pub subset: usize,
    pub resolution: usize,
    pub supports: Vec<Range<usize>>,
}

impl SubsetMask {
    pub fn num_columns(&self) -> usize {
        self.supports.len()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.resolution, self.supports.len());
        for (m, r) in self.supports.iter().enumerate() {
            for u in r.clone() {
                g[(u, m)] = 1.0;
            }
        }
        g
    }
}

pub fn subset_mask(layout: &CodebookLayout, level: usize, subset: usize) -> Result<SubsetMask> {
    layout.check(level, subset)?;
    let supports = layout
        .subset_beams(level, subset)
        .map(|j| layout.sub_range_cells(level, j))
        .collect();
    Ok(SubsetMask { level, subset, resolution: layout.resolution, supports })
}
