use serde::Serialize;

/// Training cost of one estimation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepCount {
    pub slots: usize,
    pub stages: usize,
    pub feedback_bits: usize,
}

impl StepCount {
    pub(crate) fn add_stage(&mut self, bs_beams: usize, ms_beams: usize, rf_parallel: Option<usize>) -> usize {
        let slots = bs_beams * slots_per_precoder(ms_beams, rf_parallel);
        let bits = feedback_bits(bs_beams);
        self.slots += slots;
        self.stages += 1;
        self.feedback_bits += bits;
        bits
    }
}

fn slots_per_precoder(ms_beams: usize, rf_parallel: Option<usize>) -> usize {
    match rf_parallel {
        Some(r) if r > 0 => ms_beams.div_ceil(r),
        _ => ms_beams,
    }
}

/// Bits to report one of `choices` beams.
pub fn feedback_bits(choices: usize) -> usize {
    if choices <= 1 {
        0
    } else {
        (usize::BITS - (choices - 1).leading_zeros()) as usize
    }
}

/// `K ceil(K / N_RF) S`; without parallel combining `K^2 S`.
pub fn single_path_slots(branching: usize, levels: usize, rf_parallel: Option<usize>) -> usize {
    branching * slots_per_precoder(branching, rf_parallel) * levels
}

/// `K^2 L^3 S` with `S = log_K(N / L)`.
pub fn multi_path_slots(branching: usize, paths: usize, levels: usize) -> usize {
    let m = branching * paths;
    paths * levels * m * m
}

/// One slot per pair of grid directions.
pub fn exhaustive_slots(resolution: usize) -> usize {
    resolution * resolution
}
