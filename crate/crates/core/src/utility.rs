//! Interference terms, SINR, rate and the SU / PU utility functions.
//!
//! Interference sums run in ascending user index, SU terms first and PU terms
//! second, so every quantity is bit-reproducible for a given profile.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelGains, PowerProfile};

fn check_profile(gains: &ChannelGains, powers: &PowerProfile) -> Result<()> {
    if powers.su_powers.len() != gains.num_sus() || powers.pu_powers.len() != gains.num_pus() {
        return Err(Error::InvalidArgument(format!(
            "profile has {} PU / {} SU powers, gains cover {} / {}",
            powers.pu_powers.len(),
            powers.su_powers.len(),
            gains.num_pus(),
            gains.num_sus()
        )));
    }
    Ok(())
}

fn check_su(k: usize, gains: &ChannelGains, powers: &PowerProfile) -> Result<()> {
    check_profile(gains, powers)?;
    if k >= gains.num_sus() {
        return Err(Error::InvalidArgument(format!(
            "SU index {k} out of range for {} SUs",
            gains.num_sus()
        )));
    }
    Ok(())
}

fn check_pu(n: usize, gains: &ChannelGains, powers: &PowerProfile) -> Result<()> {
    check_profile(gains, powers)?;
    if n >= gains.num_pus() {
        return Err(Error::InvalidArgument(format!(
            "PU index {n} out of range for {} PUs",
            gains.num_pus()
        )));
    }
    Ok(())
}

/// Received PU power at the SU base station, `sum_m g_pu_at_su_bs[m] * q_m`.
pub(crate) fn pu_power_at_su_bs(gains: &ChannelGains, powers: &PowerProfile) -> f64 {
    gains
        .g_pu_at_su_bs
        .iter()
        .zip(&powers.pu_powers)
        .map(|(g, q)| g * q)
        .sum()
}

/// Interference seen by SU `k` at the SU base station: every other SU plus
/// every PU.
pub fn su_interference(k: usize, gains: &ChannelGains, powers: &PowerProfile) -> Result<f64> {
    check_su(k, gains, powers)?;
    let from_sus: f64 = gains
        .g_su_at_su_bs
        .iter()
        .zip(&powers.su_powers)
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, (g, p))| g * p)
        .sum();
    Ok(from_sus + pu_power_at_su_bs(gains, powers))
}

/// Interference seen by PU `n` at the PU base station: every SU plus every
/// other PU.
pub fn pu_interference(n: usize, gains: &ChannelGains, powers: &PowerProfile) -> Result<f64> {
    check_pu(n, gains, powers)?;
    let from_sus: f64 = gains
        .g_su_at_pu_bs
        .iter()
        .zip(&powers.su_powers)
        .map(|(g, p)| g * p)
        .sum();
    let from_pus: f64 = gains
        .g_pu_at_pu_bs
        .iter()
        .zip(&powers.pu_powers)
        .enumerate()
        .filter(|&(m, _)| m != n)
        .map(|(_, (g, q))| g * q)
        .sum();
    Ok(from_sus + from_pus)
}

/// Interference of every user at its own base station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceTerms {
    pub i_k: Vec<f64>,
    pub i_n: Vec<f64>,
}

impl InterferenceTerms {
    pub fn compute(gains: &ChannelGains, powers: &PowerProfile) -> Result<Self> {
        let i_k = (0..gains.num_sus())
            .map(|k| su_interference(k, gains, powers))
            .collect::<Result<_>>()?;
        let i_n = (0..gains.num_pus())
            .map(|n| pu_interference(n, gains, powers))
            .collect::<Result<_>>()?;
        Ok(Self { i_k, i_n })
    }
}

/// SINR of SU `k` at the SU base station.
pub fn su_sinr(k: usize, gains: &ChannelGains, powers: &PowerProfile, noise: f64) -> Result<f64> {
    let interference = su_interference(k, gains, powers)?;
    Ok(gains.g_su_at_su_bs[k] * powers.su_powers[k] / (interference + noise))
}

/// Shannon rate `bandwidth * log2(1 + sinr)`.
pub fn su_rate(sinr: f64, bandwidth: f64) -> Result<f64> {
    if sinr.is_nan() || sinr < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "SINR must be non-negative, got {sinr}"
        )));
    }
    // ln_1p keeps precision for the very small SINRs typical of long links.
    Ok(bandwidth * sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Rate per unit power; `power` must be strictly positive.
pub(crate) fn rate_per_power(rate: f64, power: f64) -> Result<f64> {
    if power.is_nan() || power <= 0.0 {
        return Err(Error::Domain(format!(
            "SU utility is undefined at transmit power {power}"
        )));
    }
    Ok(rate / power)
}

/// SU utility: achieved rate divided by transmit power.
pub fn su_utility(
    k: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    noise: f64,
    bandwidth: f64,
) -> Result<f64> {
    check_su(k, gains, powers)?;
    let power = powers.su_powers[k];
    if power.is_nan() || power <= 0.0 {
        return Err(Error::Domain(format!(
            "SU {k} utility is undefined at transmit power {power}"
        )));
    }
    let rate = su_rate(su_sinr(k, gains, powers, noise)?, bandwidth)?;
    rate_per_power(rate, power)
}

/// Unit step with `step(0) = 0`.
fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// PU utility for transmit power `q` against the interference load
/// `load = I_n + I_k`.
///
/// Above the load the quadratic penalty applies, below it the exponential
/// one; at exact equality neither fires. The exponential may overflow to
/// `-inf` for large loads.
pub fn pu_utility_from_load(q: f64, load: f64, mu1: f64, mu2: f64) -> f64 {
    let over = q - load;
    let mut u = q;
    if step(over) > 0.0 {
        u -= mu1 * over * over;
    }
    if step(-over) > 0.0 {
        u -= mu2 * (-over).exp();
    }
    u
}

/// `I_n + I_k` for PU `n`, with `I_k` taken at `reference_su`. Without a
/// reference SU only `I_n` contributes.
pub fn pu_load(
    n: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    reference_su: Option<usize>,
) -> Result<f64> {
    let i_n = pu_interference(n, gains, powers)?;
    let i_k = match reference_su {
        Some(k) => su_interference(k, gains, powers)?,
        None => 0.0,
    };
    Ok(i_n + i_k)
}

/// PU utility of candidate power `q_n` with the load evaluated at `powers`.
pub fn pu_utility(
    n: usize,
    q_n: f64,
    gains: &ChannelGains,
    powers: &PowerProfile,
    reference_su: Option<usize>,
    mu1: f64,
    mu2: f64,
) -> Result<f64> {
    if q_n.is_nan() || q_n < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "PU power must be non-negative, got {q_n}"
        )));
    }
    let load = pu_load(n, gains, powers, reference_su)?;
    Ok(pu_utility_from_load(q_n, load, mu1, mu2))
}

/// Instantaneous SINR of PU `n` at the PU base station.
pub fn pu_sinr(n: usize, gains: &ChannelGains, powers: &PowerProfile, noise: f64) -> Result<f64> {
    let interference = pu_interference(n, gains, powers)?;
    Ok(gains.g_pu_at_pu_bs[n] * powers.pu_powers[n] / (interference + noise))
}

/// Whether PU `n` meets its target SINR.
pub fn pu_qos_satisfied(
    n: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    noise: f64,
    target_sinr: f64,
) -> Result<bool> {
    Ok(pu_sinr(n, gains, powers, noise)? >= target_sinr)
}
