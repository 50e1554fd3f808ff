//! Uniform linear arrays, angle grids and the geometric multipath channel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{complex_gaussian, max_abs_diff, CMat, CVec};

const ALIAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaGeometry {
    num_elements: usize,
    spacing: f64,
}

impl UlaGeometry {
    /// `spacing` is in wavelengths.
    pub fn new(num_elements: usize, spacing: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(invalid("array needs at least one element"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(invalid(format!("element spacing must be positive, got {spacing}")));
        }
        Ok(Self { num_elements, spacing })
    }

    pub fn half_wavelength(num_elements: usize) -> Result<Self> {
        Self::new(num_elements, 0.5)
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// Unit-norm steering vector toward `angle` (radians).
pub fn array_response(geom: &UlaGeometry, angle: f64) -> CVec {
    let n = geom.num_elements;
    let amp = 1.0 / (n as f64).sqrt();
    let k = 2.0 * PI * geom.spacing * angle.sin();
    CVec::from_iterator(n, (0..n).map(|i| Complex64::from_polar(amp, k * i as f64)))
}

/// Uniform quantization of [0, 2pi) into `resolution` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    resolution: usize,
}

impl AngleGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(invalid("grid resolution must be positive"));
        }
        Ok(Self { resolution })
    }

    pub fn len(&self) -> usize {
        self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    pub fn angle(&self, index: usize) -> f64 {
        2.0 * PI * index as f64 / self.resolution as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.resolution).map(|u| self.angle(u)).collect()
    }
}

/// Over-complete steering dictionary with one column per grid cell.
///
/// Distinct cells can yield the same array response (u and N/2-u, and the
/// broadside/endfire pairs); `alias_class` maps each cell to the smallest
/// index with an identical response.
#[derive(Debug, Clone)]
pub struct Dictionary {
    geometry: UlaGeometry,
    grid: AngleGrid,
    matrix: CMat,
    alias_class: Vec<usize>,
}

pub fn build_dictionary(geom: &UlaGeometry, grid: &AngleGrid) -> Result<Dictionary> {
    if grid.len() < geom.num_elements() {
        return Err(Error::UnderCompleteGrid { grid: grid.len(), elements: geom.num_elements() });
    }
    let n = grid.len();
    let mut matrix = CMat::zeros(geom.num_elements(), n);
    for u in 0..n {
        matrix.set_column(u, &array_response(geom, grid.angle(u)));
    }
    let mut alias_class: Vec<usize> = (0..n).collect();
    for u in 0..n {
        if alias_class[u] != u {
            continue;
        }
        for v in (u + 1)..n {
            if alias_class[v] == v && max_abs_diff(&matrix.column(u).into_owned(), &matrix.column(v).into_owned()) < ALIAS_TOL {
                alias_class[v] = u;
            }
        }
    }
    Ok(Dictionary { geometry: *geom, grid: *grid, matrix, alias_class })
}

impl Dictionary {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn column(&self, index: usize) -> CVec {
        self.matrix.column(index).into_owned()
    }

    pub fn geometry(&self) -> &UlaGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn resolution(&self) -> usize {
        self.grid.len()
    }

    pub fn alias_class(&self, index: usize) -> usize {
        self.alias_class[index]
    }

    /// True if the two cells produce the same array response.
    pub fn same_response(&self, a: usize, b: usize) -> bool {
        self.alias_class[a] == self.alias_class[b]
    }

    /// Cells sharing the response of `index`, including itself.
    pub fn aliases_of(&self, index: usize) -> Vec<usize> {
        let c = self.alias_class[index];
        (0..self.alias_class.len()).filter(|&v| self.alias_class[v] == c).collect()
    }
}

/// Interval from which continuous path angles are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AngleDomain {
    /// [0, pi)
    #[default]
    HalfCircle,
    /// [0, 2pi)
    FullCircle,
}

impl AngleDomain {
    pub fn upper(&self) -> f64 {
        match self {
            AngleDomain::HalfCircle => PI,
            AngleDomain::FullCircle => 2.0 * PI,
        }
    }

    pub fn contains(&self, angle: f64) -> bool {
        (0.0..self.upper()).contains(&angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub aod: f64,
    pub aoa: f64,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<Path>,
    /// Linear path loss between the two ends.
    pub pathloss: f64,
    /// Average power of each path gain.
    pub avg_gain_power: f64,
}

impl PathSet {
    pub fn new(paths: Vec<Path>, pathloss: f64, avg_gain_power: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid("a channel needs at least one path"));
        }
        if !(pathloss.is_finite() && pathloss > 0.0) {
            return Err(invalid(format!("path loss must be positive, got {pathloss}")));
        }
        if !(avg_gain_power.is_finite() && avg_gain_power > 0.0) {
            return Err(invalid(format!("average gain power must be positive, got {avg_gain_power}")));
        }
        Ok(Self { paths, pathloss, avg_gain_power })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Paths ordered by descending gain magnitude.
    pub fn strongest(&self) -> Vec<Path> {
        let mut p = self.paths.clone();
        p.sort_by(|a, b| b.gain.norm_sqr().total_cmp(&a.gain.norm_sqr()));
        p
    }
}

/// Draws `num_paths` paths with uniform angles over `domain` and CN(0, avg) gains.
pub fn sample_pathset<R: Rng + ?Sized>(
    rng: &mut R,
    num_paths: usize,
    pathloss: f64,
    avg_gain_power: f64,
    domain: AngleDomain,
) -> Result<PathSet> {
    let upper = domain.upper();
    let paths = (0..num_paths)
        .map(|_| Path {
            aod: rng.random_range(0.0..upper),
            aoa: rng.random_range(0.0..upper),
            gain: complex_gaussian(rng, avg_gain_power),
        })
        .collect();
    PathSet::new(paths, pathloss, avg_gain_power)
}

/// Like [`sample_pathset`] with angles restricted to grid cells inside `domain`.
/// Every path occupies a distinct (AoD, AoA) cell pair.
pub fn sample_on_grid_pathset<R: Rng + ?Sized>(
    rng: &mut R,
    num_paths: usize,
    pathloss: f64,
    avg_gain_power: f64,
    grid: &AngleGrid,
    domain: AngleDomain,
) -> Result<(PathSet, Vec<(usize, usize)>)> {
    let cells: Vec<usize> = (0..grid.len()).filter(|&u| domain.contains(grid.angle(u))).collect();
    if cells.len() * cells.len() < num_paths {
        return Err(invalid("not enough grid cells for distinct paths"));
    }
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(num_paths);
    while chosen.len() < num_paths {
        let pair = (cells[rng.random_range(0..cells.len())], cells[rng.random_range(0..cells.len())]);
        if !chosen.contains(&pair) {
            chosen.push(pair);
        }
    }
    let paths = chosen
        .iter()
        .map(|&(b, m)| Path { aod: grid.angle(b), aoa: grid.angle(m), gain: complex_gaussian(rng, avg_gain_power) })
        .collect();
    Ok((PathSet::new(paths, pathloss, avg_gain_power)?, chosen))
}

/// Narrowband channel matrix, rows indexed by receive antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    matrix: CMat,
}

impl ChannelMatrix {
    pub fn from_matrix(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn rx_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// `H = sqrt(N_BS N_MS / rho) * sum_l alpha_l a_MS(aoa_l) a_BS(aod_l)^H`.
pub fn assemble_channel(paths: &PathSet, bs: &UlaGeometry, ms: &UlaGeometry) -> ChannelMatrix {
    let scale = ((bs.num_elements() * ms.num_elements()) as f64 / paths.pathloss).sqrt();
    let mut h = CMat::zeros(ms.num_elements(), bs.num_elements());
    for p in &paths.paths {
        let ar = array_response(ms, p.aoa);
        let at = array_response(bs, p.aod);
        h += (ar * at.adjoint()) * (p.gain * scale);
    }
    ChannelMatrix { matrix: h }
}

/// `P_bar_R / (rho * sigma^2)`.
pub fn average_snr(avg_gain_power: f64, pathloss: f64, noise_power: f64) -> Result<f64> {
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(invalid(format!("noise power must be positive, got {noise_power}")));
    }
    if !(pathloss > 0.0 && avg_gain_power > 0.0) {
        return Err(invalid("path loss and gain power must be positive"));
    }
    Ok(avg_gain_power / (pathloss * noise_power))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steering_vector_is_unit_norm() {
        let g = UlaGeometry::half_wavelength(16).unwrap();
        for &a in &[0.0, 0.3, 1.2, 3.0, 5.5] {
            assert!((array_response(&g, a).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn broadside_response_is_all_equal() {
        let g = UlaGeometry::half_wavelength(4).unwrap();
        let a = array_response(&g, 0.0);
        for x in a.iter() {
            assert!((x - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dictionary_rejects_under_complete_grid() {
        let g = UlaGeometry::half_wavelength(16).unwrap();
        let err = build_dictionary(&g, &AngleGrid::new(8).unwrap()).unwrap_err();
        assert!(matches!(err, Error::UnderCompleteGrid { grid: 8, elements: 16 }));
    }

    #[test]
    fn alias_classes_pair_mirrored_cells() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let d = build_dictionary(&g, &AngleGrid::new(16).unwrap()).unwrap();
        assert!(d.same_response(1, 7));
        assert!(d.same_response(0, 8));
        assert!(d.same_response(4, 12));
        assert!(!d.same_response(1, 2));
    }

    #[test]
    fn channel_scaling_matches_single_path_power() {
        let bs = UlaGeometry::half_wavelength(8).unwrap();
        let ms = UlaGeometry::half_wavelength(4).unwrap();
        let ps = PathSet::new(vec![Path { aod: 0.4, aoa: 1.1, gain: Complex64::new(0.0, 2.0) }], 4.0, 1.0).unwrap();
        let h = assemble_channel(&ps, &bs, &ms);
        assert!((h.frobenius_norm().powi(2) - 32.0 * 4.0 / 4.0).abs() < 1e-10);
    }

    #[test]
    fn on_grid_sampler_gives_distinct_pairs_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = AngleGrid::new(8).unwrap();
        let (ps, cells) = sample_on_grid_pathset(&mut rng, 5, 1.0, 1.0, &grid, AngleDomain::HalfCircle).unwrap();
        assert_eq!(ps.len(), 5);
        for (i, c) in cells.iter().enumerate() {
            assert!(c.0 < 4 && c.1 < 4);
            assert!(!cells[..i].contains(c));
        }
    }
}
