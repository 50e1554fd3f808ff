//! End-to-end point-to-point link: codebooks, training, precoder design, rate.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{build_dictionary, AngleGrid, ChannelMatrix, Dictionary, UlaGeometry};
use crate::codebook::{
    build_codebook, make_candidates_beamsteering, make_candidates_quantized, nominal_link_gains, BeamConstraint,
    CandidateSet, CodebookLayout, HierarchicalCodebook, DEFAULT_LOADING, HYBRID_LOADING,
};
use crate::error::{invalid, Result};
use crate::estimation::{
    allocate_power_corollary1, estimate_multi_path, estimate_single_path, exhaustive_estimate, Estimation,
    EstimationOptions, MeasurementContext, MultiPathEstimate, TargetAllocation,
};
use crate::linalg::CMat;
use crate::precoding::{
    achievable_rate, achievable_rate_with_interference, hybrid_approx, reconstruct_channel, unconstrained_combiner,
    unconstrained_precoder, HybridPrecoder,
};

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookKind {
    /// Beams built from quantized steering candidates and RF chains.
    #[default]
    Hybrid,
    /// Unconstrained antenna weights.
    Ideal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub bs_antennas: usize,
    pub ms_antennas: usize,
    pub bs_rf_chains: usize,
    pub ms_rf_chains: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    /// Angle grid size `N`.
    pub resolution: usize,
    pub branching: usize,
    /// Paths the training searches for.
    pub estimated_paths: usize,
    /// Data streams; defaults to `estimated_paths`.
    pub streams: Option<usize>,
    /// Phase shifter resolution; `None` means unquantized.
    pub phase_bits: Option<u32>,
    /// Candidate steering directions; defaults to `2N`.
    pub candidate_count: Option<usize>,
    pub codebook: CodebookKind,
    /// Diagonal loading relative to the mean Gram eigenvalue; defaults per codebook kind.
    pub loading: Option<f64>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            bs_antennas: 64,
            ms_antennas: 32,
            bs_rf_chains: 10,
            ms_rf_chains: 6,
            spacing: 0.5,
            resolution: 64,
            branching: 2,
            estimated_paths: 1,
            streams: None,
            phase_bits: Some(7),
            candidate_count: None,
            codebook: CodebookKind::Hybrid,
            loading: None,
        }
    }
}

impl LinkConfig {
    pub fn streams(&self) -> usize {
        self.streams.unwrap_or(self.estimated_paths)
    }

    pub fn loading(&self) -> f64 {
        self.loading.unwrap_or(match self.codebook {
            CodebookKind::Ideal => DEFAULT_LOADING,
            CodebookKind::Hybrid => HYBRID_LOADING,
        })
    }

    pub fn layout(&self) -> Result<CodebookLayout> {
        CodebookLayout::multi_path(self.resolution, self.branching, self.estimated_paths)
    }

    pub fn validate(&self) -> Result<()> {
        self.layout()?;
        let n_s = self.streams();
        if n_s == 0 {
            return Err(invalid("at least one data stream is required"));
        }
        if n_s > self.bs_rf_chains || n_s > self.ms_rf_chains {
            return Err(invalid(format!(
                "{n_s} streams exceed the RF chains ({} BS, {} MS)",
                self.bs_rf_chains, self.ms_rf_chains
            )));
        }
        if self.bs_rf_chains > self.bs_antennas || self.ms_rf_chains > self.ms_antennas {
            return Err(invalid("RF chains cannot exceed antennas"));
        }
        if self.resolution < self.bs_antennas || self.resolution < self.ms_antennas {
            return Err(invalid("grid resolution must be at least the array size"));
        }
        Ok(())
    }
}

fn candidates(geom: &UlaGeometry, cfg: &LinkConfig) -> Result<CandidateSet> {
    let count = cfg.candidate_count.unwrap_or(2 * cfg.resolution);
    match cfg.phase_bits {
        Some(b) => make_candidates_quantized(geom, count, cfg.resolution, b),
        None => make_candidates_beamsteering(geom, count, cfg.resolution),
    }
}

/// Everything that stays fixed across trials of one link configuration.
#[derive(Debug, Clone)]
pub struct LinkSetup {
    pub config: LinkConfig,
    pub bs_geometry: UlaGeometry,
    pub ms_geometry: UlaGeometry,
    pub layout: CodebookLayout,
    pub bs_dict: Dictionary,
    pub ms_dict: Dictionary,
    pub bs_candidates: CandidateSet,
    pub ms_candidates: CandidateSet,
    pub bs_codebook: HierarchicalCodebook,
    pub ms_codebook: HierarchicalCodebook,
    /// Nominal per-level link gains `G_s`.
    pub level_gains: Vec<f64>,
}

impl LinkSetup {
    pub fn new(config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        let layout = config.layout()?;
        let bs_geometry = UlaGeometry::new(config.bs_antennas, config.spacing)?;
        let ms_geometry = UlaGeometry::new(config.ms_antennas, config.spacing)?;
        let grid = AngleGrid::new(config.resolution)?;
        let bs_dict = build_dictionary(&bs_geometry, &grid)?;
        let ms_dict = build_dictionary(&ms_geometry, &grid)?;
        let bs_candidates = candidates(&bs_geometry, config)?;
        let ms_candidates = candidates(&ms_geometry, config)?;
        let (bs_c, ms_c) = match config.codebook {
            CodebookKind::Ideal => (BeamConstraint::Unconstrained, BeamConstraint::Unconstrained),
            CodebookKind::Hybrid => (
                BeamConstraint::Hybrid { candidates: bs_candidates.clone(), rf_chains: config.bs_rf_chains },
                BeamConstraint::Hybrid { candidates: ms_candidates.clone(), rf_chains: config.ms_rf_chains },
            ),
        };
        let bs_codebook = build_codebook(&bs_dict, &layout, &bs_c, config.loading())?;
        let ms_codebook = build_codebook(&ms_dict, &layout, &ms_c, config.loading())?;
        let level_gains = nominal_link_gains(&bs_codebook, &ms_codebook);
        Ok(Self {
            config: config.clone(),
            bs_geometry,
            ms_geometry,
            layout,
            bs_dict,
            ms_dict,
            bs_candidates,
            ms_candidates,
            bs_codebook,
            ms_codebook,
            level_gains,
        })
    }

    pub fn streams(&self) -> usize {
        self.config.streams()
    }

    /// Stage powers meeting a target detection error at average SNR `snr`.
    pub fn target_powers(&self, delta: f64, snr: f64) -> Result<TargetAllocation> {
        allocate_power_corollary1(delta, snr, self.layout.branching(), &self.level_gains)
    }

    /// Adaptive training; single-path layouts use the plain descent.
    pub fn estimate<R: RngCore>(
        &self,
        ctx: &MeasurementContext,
        rng: &mut R,
        powers: &[f64],
        options: EstimationOptions,
    ) -> Result<Estimation<MultiPathEstimate>> {
        if self.layout.paths() == 1 {
            let e = estimate_single_path(ctx, rng, &self.bs_codebook, &self.ms_codebook, powers, options)?;
            let traj = e.trace.iter().map(|r| (r.selected_bs, r.selected_ms)).collect();
            return Ok(Estimation {
                estimate: MultiPathEstimate { paths: vec![e.estimate], trajectories: vec![traj], collisions: 0 },
                steps: e.steps,
                trace: e.trace,
            });
        }
        estimate_multi_path(
            ctx,
            rng,
            &self.bs_codebook,
            &self.ms_codebook,
            &self.bs_dict,
            &self.ms_dict,
            powers,
            options,
        )
    }

    pub fn exhaustive<R: RngCore>(
        &self,
        ctx: &MeasurementContext,
        rng: &mut R,
        power: f64,
    ) -> Result<Estimation<MultiPathEstimate>> {
        exhaustive_estimate(ctx, rng, &self.bs_dict, &self.ms_dict, power, self.layout.paths())
    }

    pub fn reconstruct(&self, estimate: &MultiPathEstimate, pathloss: f64) -> Result<ChannelMatrix> {
        reconstruct_channel(&estimate.paths, &self.bs_dict, &self.ms_dict, pathloss)
    }

    /// Hybrid approximations of the SVD precoder and combiner of `h`.
    pub fn design(&self, h: &ChannelMatrix) -> Result<(HybridPrecoder, HybridPrecoder)> {
        let n_s = self.streams();
        let f = unconstrained_precoder(h, n_s)?;
        let w = unconstrained_combiner(h, n_s)?;
        Ok((
            hybrid_approx(&f.matrix, &self.bs_candidates, self.config.bs_rf_chains)?,
            hybrid_approx(&w.matrix, &self.ms_candidates, self.config.ms_rf_chains)?,
        ))
    }

    /// SVD precoder and combiner of `h` without hardware constraints, scaled
    /// so the precoder has `||F||_F^2 = N_S`.
    pub fn unconstrained(&self, h: &ChannelMatrix) -> Result<(CMat, CMat)> {
        let n_s = self.streams();
        Ok((unconstrained_precoder(h, n_s)?.matrix, unconstrained_combiner(h, n_s)?.matrix))
    }

    pub fn rate(
        &self,
        h: &ChannelMatrix,
        f: &CMat,
        w: &CMat,
        power: f64,
        noise_power: f64,
        interference: Option<&CMat>,
    ) -> Result<f64> {
        let n_s = f.ncols();
        match interference {
            Some(q) => achievable_rate_with_interference(h, f, w, power, noise_power, n_s, q),
            None => achievable_rate(h, f, w, power, noise_power, n_s),
        }
    }

    /// Rate on `h` of hybrid beams designed for `design_for`.
    pub fn hybrid_rate(
        &self,
        h: &ChannelMatrix,
        design_for: &ChannelMatrix,
        power: f64,
        noise_power: f64,
        interference: Option<&CMat>,
    ) -> Result<f64> {
        let (f, w) = self.design(design_for)?;
        self.rate(h, f.matrix(), w.matrix(), power, noise_power, interference)
    }
}
