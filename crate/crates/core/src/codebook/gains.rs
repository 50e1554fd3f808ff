use num_complex::Complex64;

use super::hierarchy::HierarchicalCodebook;
use crate::channel::Dictionary;
use crate::error::{invalid, Result};
use crate::linalg::CMat;

/// Entry of the joint pattern error `A^H F - C G` of a beam pair, expanded
/// from the per-side errors `e` and indicators `g`.
pub fn combined_error(e_bs: Complex64, e_ms: Complex64, c_bs: f64, c_ms: f64, g_bs: f64, g_ms: f64) -> Complex64 {
    e_bs * e_ms + e_bs * (c_ms * g_ms) + e_ms * (c_bs * g_bs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionGain {
    pub bs_cell: usize,
    pub ms_cell: usize,
    /// Gain of the beam pair whose sector contains the direction.
    pub forward: f64,
    /// Largest gain among the other pairs of the subset, aliases excluded; zero if none.
    pub worst_backward: f64,
}

impl DirectionGain {
    pub fn ratio(&self) -> f64 {
        if self.worst_backward > 0.0 {
            self.forward / self.worst_backward
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubsetPairGains {
    pub level: usize,
    pub bs_subset: usize,
    pub ms_subset: usize,
    pub directions: Vec<DirectionGain>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelGains {
    pub level: usize,
    /// Worst forward-to-backward ratio over all directions; infinite if no backward pair exists.
    pub beta: f64,
    /// Forward gain of the direction attaining `beta`.
    pub forward_at_beta: f64,
    pub min_forward: f64,
    pub max_backward: f64,
    /// `G_s` from the nominal normalizers.
    pub nominal_gain: f64,
}

#[derive(Debug, Clone)]
pub struct GainAnalysis {
    pub levels: Vec<LevelGains>,
}

impl GainAnalysis {
    pub fn betas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.beta).collect()
    }

    pub fn min_forward_gains(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.min_forward).collect()
    }

    pub fn nominal_gains(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.nominal_gain).collect()
    }
}

struct Side<'a> {
    cb: &'a HierarchicalCodebook,
    error: CMat,
    nominal: f64,
    alias_beams: Vec<Vec<usize>>,
}

impl<'a> Side<'a> {
    fn new(cb: &'a HierarchicalCodebook, dict: &Dictionary, level: usize) -> Self {
        let layout = cb.layout();
        let beams: Vec<usize> = (0..cb.level(level).len()).collect();
        let p = dict.matrix().adjoint() * cb.beams_matrix(level, &beams);
        let nominal = cb.nominal_normalizer(level);
        let mut error = p;
        for j in beams {
            for u in layout.sub_range_cells(level, j) {
                error[(u, j)] -= Complex64::new(nominal, 0.0);
            }
        }
        let alias_beams = (0..layout.resolution())
            .map(|u| {
                let mut b: Vec<usize> = dict.aliases_of(u).iter().map(|&v| layout.sub_range_of(level, v)).collect();
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        Self { cb, error, nominal, alias_beams }
    }

    fn indicator(&self, level: usize, cell: usize, beam: usize) -> f64 {
        if self.cb.layout().sub_range_of(level, cell) == beam {
            1.0
        } else {
            0.0
        }
    }
}

fn check(bs: &HierarchicalCodebook, ms: &HierarchicalCodebook, bs_dict: &Dictionary, ms_dict: &Dictionary) -> Result<()> {
    if bs.layout() != ms.layout() {
        return Err(invalid("both sides must share the same codebook layout"));
    }
    if bs_dict.resolution() != bs.layout().resolution() || ms_dict.resolution() != ms.layout().resolution() {
        return Err(invalid("dictionary resolution does not match the codebook"));
    }
    if bs_dict.geometry().num_elements() != bs.geometry().num_elements()
        || ms_dict.geometry().num_elements() != ms.geometry().num_elements()
    {
        return Err(invalid("dictionary array size does not match the codebook"));
    }
    Ok(())
}

fn pair_gains(bs: &Side, ms: &Side, level: usize, k_bs: usize, k_ms: usize) -> SubsetPairGains {
    let layout = bs.cb.layout();
    let nn = (bs.cb.geometry().num_elements() * ms.cb.geometry().num_elements()) as f64;
    let sqrt_g = nn.sqrt() * bs.nominal * ms.nominal;
    let bs_beams: Vec<usize> = layout.subset_beams(level, k_bs).collect();
    let ms_beams: Vec<usize> = layout.subset_beams(level, k_ms).collect();
    let mut directions = Vec::new();
    for u_b in layout.subset_cells(level, k_bs) {
        let f_b = layout.sub_range_of(level, u_b);
        for u_m in layout.subset_cells(level, k_ms) {
            let f_m = layout.sub_range_of(level, u_m);
            let e = combined_error(bs.error[(u_b, f_b)], ms.error[(u_m, f_m)], bs.nominal, ms.nominal, 1.0, 1.0);
            let forward = (Complex64::new(sqrt_g, 0.0) + e * nn.sqrt()).norm_sqr();
            let mut worst_backward: f64 = 0.0;
            for &j_b in &bs_beams {
                for &j_m in &ms_beams {
                    if j_b == f_b && j_m == f_m {
                        continue;
                    }
                    if bs.alias_beams[u_b].contains(&j_b) && ms.alias_beams[u_m].contains(&j_m) {
                        continue;
                    }
                    let e = combined_error(
                        bs.error[(u_b, j_b)],
                        ms.error[(u_m, j_m)],
                        bs.nominal,
                        ms.nominal,
                        bs.indicator(level, u_b, j_b),
                        ms.indicator(level, u_m, j_m),
                    );
                    worst_backward = worst_backward.max(nn * e.norm_sqr());
                }
            }
            directions.push(DirectionGain { bs_cell: u_b, ms_cell: u_m, forward, worst_backward });
        }
    }
    SubsetPairGains { level, bs_subset: k_bs, ms_subset: k_ms, directions }
}

/// Forward and backward gains of every direction covered by one subset pair.
pub fn subset_pair_gains(
    bs: &HierarchicalCodebook,
    ms: &HierarchicalCodebook,
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
    level: usize,
    bs_subset: usize,
    ms_subset: usize,
) -> Result<SubsetPairGains> {
    check(bs, ms, bs_dict, ms_dict)?;
    let layout = bs.layout();
    if level >= layout.levels() || bs_subset >= layout.subset_count(level) || ms_subset >= layout.subset_count(level) {
        return Err(invalid("level or subset out of range"));
    }
    let b = Side::new(bs, bs_dict, level);
    let m = Side::new(ms, ms_dict, level);
    Ok(pair_gains(&b, &m, level, bs_subset, ms_subset))
}

/// Level summary taken over every subset pair.
pub fn level_gains(
    bs: &HierarchicalCodebook,
    ms: &HierarchicalCodebook,
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
    level: usize,
) -> Result<LevelGains> {
    check(bs, ms, bs_dict, ms_dict)?;
    let layout = bs.layout();
    if level >= layout.levels() {
        return Err(invalid("level out of range"));
    }
    let b = Side::new(bs, bs_dict, level);
    let m = Side::new(ms, ms_dict, level);
    let mut out = LevelGains {
        level,
        beta: f64::INFINITY,
        forward_at_beta: f64::INFINITY,
        min_forward: f64::INFINITY,
        max_backward: 0.0,
        nominal_gain: bs.nominal_gain(level) * ms.nominal_gain(level),
    };
    for k_b in 0..layout.subset_count(level) {
        for k_m in 0..layout.subset_count(level) {
            for d in pair_gains(&b, &m, level, k_b, k_m).directions {
                let r = d.ratio();
                if r < out.beta || (out.beta.is_infinite() && r.is_infinite() && d.forward < out.forward_at_beta) {
                    out.beta = r;
                    out.forward_at_beta = d.forward;
                }
                out.min_forward = out.min_forward.min(d.forward);
                out.max_backward = out.max_backward.max(d.worst_backward);
            }
        }
    }
    Ok(out)
}

pub fn gain_analysis(
    bs: &HierarchicalCodebook,
    ms: &HierarchicalCodebook,
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
) -> Result<GainAnalysis> {
    let levels = (0..bs.layout().levels())
        .map(|s| level_gains(bs, ms, bs_dict, ms_dict, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GainAnalysis { levels })
}
