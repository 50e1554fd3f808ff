use nalgebra::DMatrix;
use num_complex::Complex64;

use super::candidates::CandidateSet;
use super::mask::SubsetMask;
use crate::channel::Dictionary;
use crate::error::{invalid, Error, Result};
use crate::linalg::{argmax, least_squares, thin_svd, CMat, CVec, ThinSvd};

/// Gram condition number above which diagonal loading kicks in.
pub const CONDITION_THRESHOLD: f64 = 1e12;
/// Default loading for unconstrained beams, relative to the mean Gram eigenvalue.
pub const DEFAULT_LOADING: f64 = 1e-12;
/// Default loading for hybrid beams; lighter loading yields targets no
/// phase-quantized combination of few steering vectors can follow.
pub const HYBRID_LOADING: f64 = 1e-1;

/// Solves `F = (A A^H + delta I)^{-1} A G` through a cached SVD of the dictionary.
#[derive(Debug, Clone)]
pub struct IdealSolver {
    u: CMat,
    coef: Vec<f64>,
    v_h: CMat,
    loading: f64,
    condition: f64,
}

impl IdealSolver {
    pub fn new(dict: &Dictionary, relative_loading: f64) -> Result<Self> {
        if !(relative_loading.is_finite() && relative_loading > 0.0) {
            return Err(invalid("relative loading must be positive"));
        }
        let a = dict.matrix();
        let n_el = a.nrows();
        let ThinSvd { u, singular_values: sv, v_h } = thin_svd(a)?;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = if sv.len() < n_el { 0.0 } else { sv.iter().copied().fold(f64::INFINITY, f64::min) };
        let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
        let trace: f64 = sv.iter().map(|s| s * s).sum();
        let loading = if condition > CONDITION_THRESHOLD { relative_loading * trace / n_el as f64 } else { 0.0 };
        let coef = sv.iter().map(|&s| if s == 0.0 { 0.0 } else { s / (s * s + loading) }).collect();
        Ok(Self { u, coef, v_h, loading, condition })
    }

    /// Absolute loading applied to the Gram matrix; zero if it was well conditioned.
    pub fn loading(&self) -> f64 {
        self.loading
    }

    /// True if the Gram matrix was near-singular and loading was applied.
    pub fn is_loaded(&self) -> bool {
        self.loading > 0.0
    }

    pub fn gram_condition(&self) -> f64 {
        self.condition
    }

    /// Columns of `targets` are desired real beam patterns over the grid.
    pub fn solve(&self, targets: &DMatrix<f64>) -> CMat {
        let g = targets.map(|x| Complex64::new(x, 0.0));
        let mut t = &self.v_h * g;
        for (i, c) in self.coef.iter().enumerate() {
            t.row_mut(i).scale_mut(*c);
        }
        &self.u * t
    }
}

/// Unconstrained precoders whose patterns best match the subset mask.
pub fn ideal_precoder(solver: &IdealSolver, mask: &SubsetMask) -> CMat {
    solver.solve(&mask.to_matrix())
}

/// A beam realized as `F_RF f_BB`, scaled to unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector {
    /// Candidate indices forming `F_RF`; empty for unconstrained beams.
    pub rf_columns: Vec<usize>,
    /// Baseband weights; the full antenna weights when unconstrained.
    pub baseband: CVec,
    /// Reciprocal of the norm of the beam before unit-norm scaling.
    pub normalizer: f64,
    /// Residual norm after each pursuit iteration.
    pub residual_norms: Vec<f64>,
    weights: CVec,
}

impl BeamVector {
    pub fn unconstrained(target: &CVec) -> Result<Self> {
        let n = target.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Singular("ideal beam has zero norm".into()));
        }
        let weights = target / Complex64::new(n, 0.0);
        Ok(Self { rf_columns: Vec::new(), baseband: weights.clone(), normalizer: 1.0 / n, residual_norms: Vec::new(), weights })
    }

    pub(crate) fn from_parts(
        rf_columns: Vec<usize>,
        baseband: CVec,
        normalizer: f64,
        candidates: Option<&CandidateSet>,
    ) -> Result<Self> {
        let weights = match candidates {
            None => baseband.clone(),
            Some(c) => {
                if rf_columns.len() != baseband.len() || rf_columns.iter().any(|&i| i >= c.len()) {
                    return Err(invalid("beam entry does not match its candidate set"));
                }
                select_columns(c.matrix(), &rf_columns) * &baseband
            }
        };
        Ok(Self { rf_columns, baseband, normalizer, residual_norms: Vec::new(), weights })
    }

    /// Antenna weights `F_RF f_BB`, unit norm.
    pub fn weights(&self) -> &CVec {
        &self.weights
    }
}

pub(crate) fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    CMat::from_columns(&cols.iter().map(|&i| m.column(i)).collect::<Vec<_>>())
}

/// Greedy sparse approximation of `target` by `n_rf` candidate columns.
///
/// Each step adds the column most correlated with the residual (lowest index on
/// ties), refits the baseband by least squares and stops early once the
/// residual vanishes.
pub fn omp_hybrid_design(target: &CVec, candidates: &CandidateSet, n_rf: usize) -> Result<BeamVector> {
    if n_rf == 0 {
        return Err(invalid("at least one RF chain is required"));
    }
    if n_rf > candidates.num_elements() || n_rf > candidates.len() {
        return Err(invalid(format!(
            "{n_rf} RF chains exceed the {} antennas or {} candidates",
            candidates.num_elements(),
            candidates.len()
        )));
    }
    let c = candidates.matrix();
    let t0 = target.norm();
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::Singular("target beam has zero norm".into()));
    }
    let target_m = CMat::from_column_slice(target.len(), 1, target.as_slice());
    let mut residual = target.clone();
    let mut selected: Vec<usize> = Vec::with_capacity(n_rf);
    let mut baseband = CVec::zeros(0);
    let mut residual_norms = Vec::with_capacity(n_rf);
    for _ in 0..n_rf {
        let corr = c.adjoint() * &residual;
        let pick = argmax(corr.iter().enumerate().map(|(i, z)| {
            if selected.contains(&i) {
                f64::NEG_INFINITY
            } else {
                z.norm_sqr()
            }
        }))
        .expect("non-empty candidate set");
        selected.push(pick);
        let f_rf = select_columns(c, &selected);
        let bb = least_squares(&f_rf, &target_m).map_err(|_| Error::RankDeficient { selected: selected.len() })?;
        baseband = bb.column(0).into_owned();
        let r = target - &f_rf * &baseband;
        let rn = r.norm();
        residual_norms.push(rn);
        if rn <= 1e-12 * t0 {
            break;
        }
        residual = r / Complex64::new(rn, 0.0);
    }
    let f_rf = select_columns(c, &selected);
    let approx = &f_rf * &baseband;
    let scale = approx.norm();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Singular("hybrid approximation vanished".into()));
    }
    let baseband = baseband / Complex64::new(scale, 0.0);
    let weights = approx / Complex64::new(scale, 0.0);
    Ok(BeamVector { rf_columns: selected, baseband, normalizer: 1.0 / scale, residual_norms, weights })
}
