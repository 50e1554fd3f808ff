use num_complex::Complex64;
use rand::RngCore;

use crate::channel::ChannelMatrix;
use crate::error::{invalid, Result};
use crate::linalg::{complex_gaussian, CMat, CVec};

/// Extra received signal, e.g. other transmitters, added to every slot.
pub trait Interference: Sync {
    /// One draw per combiner column, each from its own slot.
    fn sample(&self, combiners: &CMat, rng: &mut dyn RngCore) -> CVec;
}

/// What the receiver knows and suffers during training.
#[derive(Clone, Copy)]
pub struct MeasurementContext<'a> {
    pub channel: &'a ChannelMatrix,
    pub noise_power: f64,
    /// Path loss `rho`, used to scale gain estimates.
    pub pathloss: f64,
    pub interference: Option<&'a dyn Interference>,
}

impl<'a> MeasurementContext<'a> {
    pub fn new(channel: &'a ChannelMatrix, noise_power: f64, pathloss: f64) -> Result<Self> {
        if !(noise_power.is_finite() && noise_power >= 0.0) {
            return Err(invalid(format!("noise power must be non-negative, got {noise_power}")));
        }
        if !(pathloss.is_finite() && pathloss > 0.0) {
            return Err(invalid(format!("path loss must be positive, got {pathloss}")));
        }
        Ok(Self { channel, noise_power, pathloss, interference: None })
    }

    pub fn with_interference(mut self, interference: &'a dyn Interference) -> Self {
        self.interference = Some(interference);
        self
    }
}

/// `y_q = sqrt(P) w_q^H H f + w_q^H n_q`, fresh noise per combiner slot.
pub fn measure<R: RngCore>(
    ctx: &MeasurementContext,
    rng: &mut R,
    precoder: &CVec,
    combiners: &CMat,
    power: f64,
) -> Result<CVec> {
    let h = ctx.channel.matrix();
    if precoder.len() != h.ncols() || combiners.nrows() != h.nrows() {
        return Err(invalid("beam dimensions do not match the channel"));
    }
    if !(power.is_finite() && power >= 0.0) {
        return Err(invalid(format!("transmit power must be non-negative, got {power}")));
    }
    let mut y = combiners.adjoint() * (h * precoder) * Complex64::new(power.sqrt(), 0.0);
    if ctx.noise_power > 0.0 {
        for (q, yq) in y.iter_mut().enumerate() {
            let wn = combiners.column(q).norm_squared();
            *yq += complex_gaussian(rng, ctx.noise_power * wn);
        }
    }
    if let Some(i) = ctx.interference {
        y += i.sample(combiners, rng);
    }
    Ok(y)
}

/// Measures every (precoder, combiner) pair; entry `(q, b)` pairs combiner `q`
/// with precoder `b`.
pub fn measure_matrix<R: RngCore>(
    ctx: &MeasurementContext,
    rng: &mut R,
    precoders: &CMat,
    combiners: &CMat,
    power: f64,
) -> Result<CMat> {
    let mut y = CMat::zeros(combiners.ncols(), precoders.ncols());
    for b in 0..precoders.ncols() {
        let col = measure(ctx, rng, &precoders.column(b).into_owned(), combiners, power)?;
        y.set_column(b, &col);
    }
    Ok(y)
}
