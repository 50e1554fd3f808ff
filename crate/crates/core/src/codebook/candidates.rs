use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{array_response, UlaGeometry};
use crate::error::{invalid, Result};
use crate::linalg::{max_abs_diff, CMat, CVec};

const DUPLICATE_TOL: f64 = 1e-12;

/// How a candidate set was generated; enough to rebuild it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CandidateDescriptor {
    /// Steering vectors toward `t * pi / resolution`, `t < count`.
    Beamsteering { count: usize, resolution: usize },
    /// Same angles with every phase rounded to a `bits`-bit lattice.
    Quantized { count: usize, resolution: usize, bits: u32 },
    /// Unitary DFT basis.
    Dft,
}

/// Columns an analog beamformer may realize. Duplicate columns are dropped.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    descriptor: CandidateDescriptor,
    matrix: CMat,
}

impl CandidateSet {
    pub fn from_descriptor(geom: &UlaGeometry, descriptor: &CandidateDescriptor) -> Result<Self> {
        match *descriptor {
            CandidateDescriptor::Beamsteering { count, resolution } => {
                make_candidates_beamsteering(geom, count, resolution)
            }
            CandidateDescriptor::Quantized { count, resolution, bits } => {
                make_candidates_quantized(geom, count, resolution, bits)
            }
            CandidateDescriptor::Dft => Ok(make_candidates_dft(geom)),
        }
    }

    pub fn descriptor(&self) -> &CandidateDescriptor {
        &self.descriptor
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    pub fn column(&self, index: usize) -> CVec {
        self.matrix.column(index).into_owned()
    }

    pub fn num_elements(&self) -> usize {
        self.matrix.nrows()
    }
}

fn dedup(columns: Vec<CVec>) -> CMat {
    let mut kept: Vec<CVec> = Vec::with_capacity(columns.len());
    for c in columns {
        if !kept.iter().any(|k| max_abs_diff(k, &c) < DUPLICATE_TOL) {
            kept.push(c);
        }
    }
    CMat::from_columns(&kept)
}

fn check_count(count: usize, resolution: usize) -> Result<()> {
    if count == 0 || resolution == 0 {
        return Err(invalid("candidate count and resolution must be positive"));
    }
    Ok(())
}

pub fn make_candidates_beamsteering(geom: &UlaGeometry, count: usize, resolution: usize) -> Result<CandidateSet> {
    check_count(count, resolution)?;
    let columns = (0..count)
        .map(|t| array_response(geom, t as f64 * PI / resolution as f64))
        .collect();
    Ok(CandidateSet {
        descriptor: CandidateDescriptor::Beamsteering { count, resolution },
        matrix: dedup(columns),
    })
}

pub fn make_candidates_quantized(
    geom: &UlaGeometry,
    count: usize,
    resolution: usize,
    bits: u32,
) -> Result<CandidateSet> {
    check_count(count, resolution)?;
    if bits == 0 || bits > 30 {
        return Err(invalid(format!("phase resolution must be 1..=30 bits, got {bits}")));
    }
    let levels = 1u64 << bits;
    let step = 2.0 * PI / levels as f64;
    let n = geom.num_elements();
    let amp = 1.0 / (n as f64).sqrt();
    let columns = (0..count)
        .map(|t| {
            let k = 2.0 * PI * geom.spacing() * (t as f64 * PI / resolution as f64).sin();
            CVec::from_iterator(
                n,
                (0..n).map(|i| {
                    let code = ((k * i as f64) / step).round().rem_euclid(levels as f64);
                    Complex64::from_polar(amp, code * step)
                }),
            )
        })
        .collect();
    Ok(CandidateSet {
        descriptor: CandidateDescriptor::Quantized { count, resolution, bits },
        matrix: dedup(columns),
    })
}

pub fn make_candidates_dft(geom: &UlaGeometry) -> CandidateSet {
    let n = geom.num_elements();
    let amp = 1.0 / (n as f64).sqrt();
    let matrix = CMat::from_fn(n, n, |r, c| Complex64::from_polar(amp, 2.0 * PI * (r * c) as f64 / n as f64));
    CandidateSet { descriptor: CandidateDescriptor::Dft, matrix }
}
