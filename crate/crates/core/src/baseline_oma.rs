//! Orthogonal-access baseline.
//!
//! Each SU gets an equal static share `B/K` of the band, so SUs do not
//! interfere with one another; PU interference still reaches every SU. The
//! utility shape and the power update are the same as in the NOMA game.

use crate::error::{Error, Result};
use crate::game::{self, EquilibriumResult, Scheme};
use crate::model::{build_channel_gains, ChannelGains, NetworkConfig, PowerProfile};
use crate::utility;

#[derive(Debug, Clone, PartialEq)]
pub struct OmaConfig {
    pub network: NetworkConfig,
    /// Bandwidth per SU, `B/K`.
    pub subband_share: f64,
}

impl OmaConfig {
    pub fn new(network: NetworkConfig) -> Result<Self> {
        if network.num_sus == 0 {
            return Err(Error::InvalidArgument("OMA needs at least one SU".into()));
        }
        let subband_share = network.bandwidth / network.num_sus as f64;
        Ok(Self {
            network,
            subband_share,
        })
    }
}

/// Interference at SU `k`'s subband: PU signals only.
pub fn oma_su_interference(k: usize, gains: &ChannelGains, powers: &PowerProfile) -> Result<f64> {
    // Reuses the NOMA index and length checks.
    utility::su_interference(k, gains, powers)?;
    Ok(utility::pu_power_at_su_bs(gains, powers))
}

pub fn oma_su_sinr(
    k: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    noise: f64,
) -> Result<f64> {
    let interference = oma_su_interference(k, gains, powers)?;
    Ok(gains.g_su_at_su_bs[k] * powers.su_powers[k] / (interference + noise))
}

pub fn oma_su_utility(
    k: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    noise: f64,
    bandwidth: f64,
    num_sus: usize,
) -> Result<f64> {
    let sinr = oma_su_sinr(k, gains, powers, noise)?;
    let power = powers.su_powers[k];
    if power.is_nan() || power <= 0.0 {
        return Err(Error::Domain(format!(
            "SU {k} utility is undefined at transmit power {power}"
        )));
    }
    let rate = utility::su_rate(sinr, bandwidth / num_sus as f64)?;
    utility::rate_per_power(rate, power)
}

/// Best-response dynamics with the OMA interference structure.
pub fn oma_solve_equilibrium(config: &OmaConfig) -> Result<EquilibriumResult> {
    let gains = build_channel_gains(&config.network)?;
    game::solve_with(&config.network, &gains, Scheme::Oma, |_, _| {})
}
