//! Physical constants and unit conversions.
//!
//! Energies are carried in meV and lengths in nm throughout the crate. The
//! only place SI units appear is the final flux assembly (W/m²).

/// Reduced Planck constant in meV·s.
pub const HBAR_MEV_S: f64 = 6.582_119_569e-13;

/// Speed of light in nm/s.
pub const C_NM_PER_S: f64 = 2.997_924_58e17;

/// ħc in meV·nm.
pub const HBAR_C_MEV_NM: f64 = HBAR_MEV_S * C_NM_PER_S;

/// Boltzmann constant in meV/K.
pub const K_B_MEV_PER_K: f64 = 8.617_333_262e-2;

/// One meV in joules.
pub const MEV_IN_J: f64 = 1.602_176_634e-22;

/// nm⁻² → m⁻².
pub const PER_NM2_IN_PER_M2: f64 = 1e18;

/// Vacuum wavenumber (1/nm) for a signed photon energy in meV.
#[inline]
pub fn vacuum_wavenumber(energy_mev: f64) -> f64 {
    energy_mev / HBAR_C_MEV_NM
}

/// Thermal energy k_B T in meV.
#[inline]
pub fn thermal_energy(temperature_k: f64) -> f64 {
    K_B_MEV_PER_K * temperature_k
}
