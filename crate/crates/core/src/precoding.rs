//! Channel reconstruction, hybrid analog/digital precoders and link rate.

use num_complex::Complex64;

use crate::channel::{ChannelMatrix, Dictionary};
use crate::codebook::CandidateSet;
use crate::error::{invalid, Error, Result};
use crate::estimation::SinglePathEstimate;
use crate::linalg::{argmax, hermitian_logdet, least_squares, thin_svd, CMat, ThinSvd};

/// `H_hat = sqrt(N_BS N_MS / rho) sum_l alpha_l a_MS(aoa_l) a_BS(aod_l)^H` on grid cells.
pub fn reconstruct_channel(
    paths: &[SinglePathEstimate],
    bs_dict: &Dictionary,
    ms_dict: &Dictionary,
    pathloss: f64,
) -> Result<ChannelMatrix> {
    if !(pathloss.is_finite() && pathloss > 0.0) {
        return Err(invalid("path loss must be positive"));
    }
    let nb = bs_dict.geometry().num_elements();
    let nm = ms_dict.geometry().num_elements();
    let scale = ((nb * nm) as f64 / pathloss).sqrt();
    let mut h = CMat::zeros(nm, nb);
    for p in paths {
        if p.aod_cell >= bs_dict.resolution() || p.aoa_cell >= ms_dict.resolution() {
            return Err(invalid("estimated cell outside the grid"));
        }
        let ar = ms_dict.column(p.aoa_cell);
        let at = bs_dict.column(p.aod_cell);
        h += (ar * at.adjoint()) * (p.gain * scale);
    }
    Ok(ChannelMatrix::from_matrix(h))
}

/// Leading singular vectors of a channel.
#[derive(Debug, Clone)]
pub struct SingularBeams {
    pub matrix: CMat,
    pub singular_values: Vec<f64>,
    /// True if singular value `N_S` ties with `N_S + 1`, making the subspace ambiguous.
    pub degenerate: bool,
}

fn leading(h: &ChannelMatrix, n_s: usize, right: bool) -> Result<SingularBeams> {
    let m = h.matrix();
    let rank_cap = m.nrows().min(m.ncols());
    if n_s == 0 || n_s > rank_cap {
        return Err(invalid(format!("{n_s} streams exceed what a {}x{} channel supports", m.nrows(), m.ncols())));
    }
    let ThinSvd { u, singular_values: sv, v_h } = thin_svd(m)?;
    let v = v_h.adjoint();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let src = if right { &v } else { &u };
    let cols: Vec<_> = order[..n_s].iter().map(|&i| src.column(i).into_owned()).collect();
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let degenerate = n_s < sorted.len() && sorted[n_s - 1] - sorted[n_s] <= 1e-9 * sorted[0].max(f64::MIN_POSITIVE);
    Ok(SingularBeams { matrix: CMat::from_columns(&cols), singular_values: sorted, degenerate })
}

/// First `N_S` right singular vectors.
pub fn unconstrained_precoder(h: &ChannelMatrix, n_s: usize) -> Result<SingularBeams> {
    leading(h, n_s, true)
}

/// First `N_S` left singular vectors.
pub fn unconstrained_combiner(h: &ChannelMatrix, n_s: usize) -> Result<SingularBeams> {
    leading(h, n_s, false)
}

/// `F_RF F_BB` with `F_RF` taken from a candidate set.
#[derive(Debug, Clone)]
pub struct HybridPrecoder {
    pub rf_columns: Vec<usize>,
    pub baseband: CMat,
    /// Frobenius residual after each pursuit iteration.
    pub residual_norms: Vec<f64>,
    weights: CMat,
}

impl HybridPrecoder {
    pub fn from_parts(candidates: &CandidateSet, rf_columns: Vec<usize>, baseband: CMat) -> Result<Self> {
        if rf_columns.len() != baseband.nrows() || rf_columns.iter().any(|&i| i >= candidates.len()) {
            return Err(invalid("baseband does not match the RF selection"));
        }
        let rf = CMat::from_columns(&rf_columns.iter().map(|&i| candidates.matrix().column(i)).collect::<Vec<_>>());
        let weights = rf * &baseband;
        Ok(Self { rf_columns, baseband, residual_norms: Vec::new(), weights })
    }

    /// Antenna-domain weights, one column per stream.
    pub fn matrix(&self) -> &CMat {
        &self.weights
    }

    pub fn streams(&self) -> usize {
        self.weights.ncols()
    }
}

/// Greedy approximation of `target` (one column per stream) by `n_rf`
/// candidate columns plus a least-squares baseband, scaled so that
/// `||F_RF F_BB||_F^2 = N_S`.
pub fn hybrid_approx(target: &CMat, candidates: &CandidateSet, n_rf: usize) -> Result<HybridPrecoder> {
    let n_s = target.ncols();
    if n_s == 0 {
        return Err(invalid("at least one stream is required"));
    }
    if target.nrows() != candidates.num_elements() {
        return Err(invalid("target and candidates have different array sizes"));
    }
    if n_rf < n_s || n_rf > candidates.len() || n_rf > candidates.num_elements() {
        return Err(invalid(format!(
            "need N_S <= N_RF <= min(antennas, candidates); got N_S = {n_s}, N_RF = {n_rf}"
        )));
    }
    let c = candidates.matrix();
    let t0 = target.norm();
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::Singular("target precoder has zero norm".into()));
    }
    let mut residual = target.clone();
    let mut selected: Vec<usize> = Vec::with_capacity(n_rf);
    let mut baseband = CMat::zeros(0, n_s);
    let mut residual_norms = Vec::with_capacity(n_rf);
    for _ in 0..n_rf {
        let psi = c.adjoint() * &residual;
        let pick = argmax((0..psi.nrows()).map(|k| {
            if selected.contains(&k) {
                f64::NEG_INFINITY
            } else {
                psi.row(k).iter().map(|z| z.norm_sqr()).sum()
            }
        }))
        .expect("non-empty candidate set");
        selected.push(pick);
        let rf = CMat::from_columns(&selected.iter().map(|&i| c.column(i)).collect::<Vec<_>>());
        baseband = least_squares(&rf, target).map_err(|_| Error::RankDeficient { selected: selected.len() })?;
        let r = target - &rf * &baseband;
        let rn = r.norm();
        residual_norms.push(rn);
        if rn <= 1e-12 * t0 {
            break;
        }
        residual = r / Complex64::new(rn, 0.0);
    }
    let rf = CMat::from_columns(&selected.iter().map(|&i| c.column(i)).collect::<Vec<_>>());
    let approx = &rf * &baseband;
    let scale = approx.norm();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Singular("hybrid approximation vanished".into()));
    }
    let k = Complex64::new((n_s as f64).sqrt() / scale, 0.0);
    Ok(HybridPrecoder { rf_columns: selected, baseband: baseband * k, residual_norms, weights: approx * k })
}

/// `log2 |I + P / N_S R_n^{-1} W^H H F F^H H^H W|` with `R_n = sigma^2 W^H W`.
pub fn achievable_rate(h: &ChannelMatrix, f: &CMat, w: &CMat, power: f64, noise_power: f64, n_s: usize) -> Result<f64> {
    rate_inner(h, f, w, power, noise_power, n_s, None)
}

/// As [`achievable_rate`] with the combined noise covariance
/// `W^H (sigma^2 I + Q) W` for an interference covariance `Q`.
pub fn achievable_rate_with_interference(
    h: &ChannelMatrix,
    f: &CMat,
    w: &CMat,
    power: f64,
    noise_power: f64,
    n_s: usize,
    interference: &CMat,
) -> Result<f64> {
    rate_inner(h, f, w, power, noise_power, n_s, Some(interference))
}

fn rate_inner(
    h: &ChannelMatrix,
    f: &CMat,
    w: &CMat,
    power: f64,
    noise_power: f64,
    n_s: usize,
    interference: Option<&CMat>,
) -> Result<f64> {
    let hm = h.matrix();
    if f.nrows() != hm.ncols() || w.nrows() != hm.nrows() || f.ncols() != w.ncols() || f.ncols() != n_s || n_s == 0 {
        return Err(invalid("precoder, combiner and stream count do not match the channel"));
    }
    if !(power.is_finite() && power >= 0.0 && noise_power.is_finite() && noise_power >= 0.0) {
        return Err(invalid("power and noise must be non-negative"));
    }
    let wh = w.adjoint();
    let mut rn = &wh * w * Complex64::new(noise_power, 0.0);
    if let Some(q) = interference {
        if q.nrows() != hm.nrows() || q.ncols() != hm.nrows() {
            return Err(invalid("interference covariance has the wrong size"));
        }
        rn += &wh * q * w;
    }
    let g = &wh * hm * f;
    let signal = &g * g.adjoint() * Complex64::new(power / n_s as f64, 0.0);
    let base = hermitian_logdet(&rn).map_err(|_| Error::Singular("noise covariance is singular".into()))?;
    let total = hermitian_logdet(&(&rn + signal)).map_err(|_| Error::Singular("covariance is singular".into()))?;
    Ok(((total - base) / std::f64::consts::LN_2).max(0.0))
}
