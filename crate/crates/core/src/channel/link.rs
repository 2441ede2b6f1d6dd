//! Link budget pieces: free-space path loss and the LOS amplitude gain.

use std::f64::consts::PI;

use crate::config::SPEED_OF_LIGHT;

/// A ground user terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTerminal {
    pub lat_rad: f64,
    pub lon_rad: f64,
    pub alt_m: f64,
    pub antenna_gain_dbi: f64,
    /// Linear Rician factor `K_R`.
    pub rician_k: f64,
    pub noise_variance: f64,
}

/// Free-space path loss `20 log₁₀(4πd/λ)` in dB.
pub fn fspl_db(distance_m: f64, carrier_hz: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    20.0 * (4.0 * PI * distance_m / wavelength).log10()
}

/// Linear LOS amplitude gain `γ` of a UT at slant range `d`.
///
/// `γ² = share · G_UT / (FSPL · L_atm)`, where `share` is a linear power
/// factor applied on the transmit side (1 for the plain link budget).
pub fn los_gain(
    slant_range_m: f64,
    carrier_hz: f64,
    tx_power_share: f64,
    ut: &UserTerminal,
    extra_loss_db: f64,
) -> f64 {
    let gain_db = ut.antenna_gain_dbi - fspl_db(slant_range_m, carrier_hz) - extra_loss_db;
    (tx_power_share * 10f64.powf(gain_db / 10.0)).sqrt()
}
