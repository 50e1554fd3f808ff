use crate::error::{invalid, Result};

/// Per-stage powers for a target detection error.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetAllocation {
    /// Required per-stage received SNR factor `Gamma`.
    pub gamma: f64,
    pub powers: Vec<f64>,
    /// `K^2 Gamma sum 1/G_s`.
    pub total: f64,
}

/// Per-stage powers for a fixed training budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetAllocation {
    pub powers: Vec<f64>,
    /// Error bound the budget guarantees.
    pub bound: f64,
}

fn check_common(snr: f64, branching: usize, gains: &[f64]) -> Result<()> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(invalid(format!("average SNR must be positive, got {snr}")));
    }
    if branching < 2 {
        return Err(invalid("branching factor must be at least 2"));
    }
    if gains.is_empty() {
        return Err(invalid("at least one stage is required"));
    }
    if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(invalid("stage gains must be positive and finite"));
    }
    Ok(())
}

/// `P_s = Gamma / G_s` with `Gamma = (2 / snr) ((K^2 - 1) S / delta - 2)`.
pub fn allocate_power_corollary1(delta: f64, snr: f64, branching: usize, gains: &[f64]) -> Result<TargetAllocation> {
    check_common(snr, branching, gains)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("target error must lie in (0, 1), got {delta}")));
    }
    let k2 = (branching * branching) as f64;
    let stages = gains.len() as f64;
    let inner = (k2 - 1.0) * stages / delta - 2.0;
    if inner <= 0.0 {
        return Err(invalid("target error too loose for this codebook"));
    }
    let gamma = 2.0 / snr * inner;
    let powers: Vec<f64> = gains.iter().map(|g| gamma / g).collect();
    let total = k2 * gamma * gains.iter().map(|g| 1.0 / g).sum::<f64>();
    Ok(TargetAllocation { gamma, powers, total })
}

/// `P_s = P_T / (K^2 sum_n G_s / G_n)`.
pub fn allocate_power_corollary2(total: f64, snr: f64, branching: usize, gains: &[f64]) -> Result<BudgetAllocation> {
    check_common(snr, branching, gains)?;
    if !(total.is_finite() && total > 0.0) {
        return Err(invalid(format!("training budget must be positive, got {total}")));
    }
    let k2 = (branching * branching) as f64;
    let inv_sum: f64 = gains.iter().map(|g| 1.0 / g).sum();
    let powers = gains.iter().map(|g| total / (k2 * g * inv_sum)).collect();
    let stages = gains.len() as f64;
    let bound = (k2 - 1.0) * stages / (total * snr / (2.0 * k2 * inv_sum) + 2.0);
    Ok(BudgetAllocation { powers, bound })
}

/// Per-stage terms of the detection error bound, before summing and clamping.
pub fn theorem1_terms(
    powers: &[f64],
    forward_gains: &[f64],
    betas: &[f64],
    snr: f64,
    branching: usize,
) -> Result<Vec<f64>> {
    if powers.len() != forward_gains.len() || powers.len() != betas.len() || powers.is_empty() {
        return Err(invalid("powers, gains and ratios must have one entry per stage"));
    }
    if branching < 2 || snr.is_nan() || snr <= 0.0 {
        return Err(invalid("invalid branching factor or SNR"));
    }
    let k2 = (branching * branching) as f64;
    Ok(powers
        .iter()
        .zip(forward_gains)
        .zip(betas)
        .map(|((&p, &g), &b)| {
            let x = p * g * snr;
            let ib = if b.is_infinite() { 0.0 } else { 1.0 / b };
            let root = (1.0 + 0.5 * (1.0 + ib) * x + x * x * (1.0 - ib).powi(2) / 16.0).sqrt();
            (k2 - 1.0) / 2.0 * (1.0 - x * (1.0 - ib) / (4.0 * root))
        })
        .collect())
}

/// Upper bound on the probability that any stage picks the wrong beam pair,
/// clamped to one.
pub fn theorem1_bound(powers: &[f64], forward_gains: &[f64], betas: &[f64], snr: f64, branching: usize) -> Result<f64> {
    let t = theorem1_terms(powers, forward_gains, betas, snr, branching)?;
    Ok(t.iter().sum::<f64>().min(1.0))
}
