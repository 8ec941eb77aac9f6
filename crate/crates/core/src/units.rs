//! Unit conventions.
//!
//! Inputs are wavenumbers (cm⁻¹) and kelvin. Internally every energy is an
//! angular frequency in rad·ps⁻¹ with ħ = 1, so time comes out in ps.

use std::f64::consts::PI;

/// Speed of light in cm/s (exact).
pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;
/// Boltzmann constant in J/K (exact).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;
/// Planck constant in J·s (exact).
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;

/// Angular frequency in rad·ps⁻¹ corresponding to 1 cm⁻¹, i.e. 2πc·1e-12.
pub const RAD_PER_PS_PER_CM: f64 = 2.0 * PI * SPEED_OF_LIGHT_CM_PER_S * 1e-12;

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM_PER_K: f64 = BOLTZMANN_J_PER_K / (PLANCK_J_S * SPEED_OF_LIGHT_CM_PER_S);

#[inline]
pub fn cm_to_rad_ps(x: f64) -> f64 {
    x * RAD_PER_PS_PER_CM
}

#[inline]
pub fn rad_ps_to_cm(x: f64) -> f64 {
    x / RAD_PER_PS_PER_CM
}

/// Thermal energy k_B·T in rad·ps⁻¹.
#[inline]
pub fn thermal_rad_ps(temperature_k: f64) -> f64 {
    cm_to_rad_ps(BOLTZMANN_CM_PER_K * temperature_k)
}
