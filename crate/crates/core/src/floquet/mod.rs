//! Coupled-harmonic plane-wave solver for the stack with a time-modulated layer.
//!
//! A field at output energy ω couples, inside the modulated layer, to the
//! harmonics ω_l = ω + lΩ for |l| ≤ N_h. Each (ω, k∥, polarization) solve
//! produces a generalized scattering matrix between the two half-spaces whose
//! blocks are (2N_h+1)×(2N_h+1) in the harmonic index.
//!
//! Field variables: the tangential electric component `u` (E_y for s, E_x for
//! p) and a second tangential quantity (∂_z E_y for s, H_y/k0_l for p), both
//! continuous across interfaces. Time dependence is e^{−iωt}.

mod born;
mod greens;
mod modes;
mod smatrix;
mod solve;

pub use born::{perturbative_first_order, BornAmplitudes};
pub use greens::{greens_planewave, source_coefficient, wave_vector, Dyad, GreenError, SourceSide};
pub use modes::{layer_mode_decomposition, FloquetLayerModes, RegionModes};
pub use smatrix::{redheffer_star, SMatrix};
pub use solve::{solve_for_flux, stack_scattering, Amplitudes, InternalAmplitudes, SolvePath, SolveError, StackSolution};

use num_complex::Complex64;

use crate::units::vacuum_wavenumber;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    S,
    P,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::S, Polarization::P];
}

/// Retained harmonics ω_l = ω + lΩ, l ∈ [−N_h, N_h].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicBasis {
    /// ħΩ in meV.
    pub mod_energy: f64,
    /// ħω in meV (output frequency, harmonic 0).
    pub output_energy: f64,
    pub trunc: usize,
}

impl HarmonicBasis {
    pub fn new(mod_energy: f64, output_energy: f64, trunc: usize) -> Self {
        HarmonicBasis {
            mod_energy,
            output_energy,
            trunc,
        }
    }

    /// Number of retained harmonics, 2N_h + 1.
    pub fn len(&self) -> usize {
        2 * self.trunc + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Harmonic orders in storage order, −N_h first.
    pub fn orders(&self) -> impl Iterator<Item = i32> + Clone {
        let n = self.trunc as i32;
        -n..=n
    }

    /// Storage index of harmonic `l`, if retained.
    pub fn index(&self, l: i32) -> Option<usize> {
        let n = self.trunc as i32;
        (l.abs() <= n).then(|| (l + n) as usize)
    }

    pub fn order(&self, index: usize) -> i32 {
        index as i32 - self.trunc as i32
    }

    pub fn energy(&self, l: i32) -> f64 {
        self.output_energy + l as f64 * self.mod_energy
    }

    pub fn energies(&self) -> Vec<f64> {
        self.orders().map(|l| self.energy(l)).collect()
    }
}

/// In-plane wavenumber (1/nm) and polarization of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveContext {
    pub kpar: f64,
    pub pol: Polarization,
}

/// z-wavenumber √(εω²/c² − k∥²) on the branch with Im k_z ≥ 0.
///
/// Purely real values take the sign of ω so that negative-frequency waves
/// are still outgoing; this makes k_z(−ω, ε*) = −k_z(ω, ε)*.
pub fn kz_branch(eps: Complex64, omega: f64, kpar: f64) -> Complex64 {
    let k0 = vacuum_wavenumber(omega);
    let arg = eps * (k0 * k0) - kpar * kpar;
    let mut kz = arg.sqrt();
    if kz.im < 0.0 {
        kz = -kz;
    }
    if kz.im == 0.0 && omega < 0.0 {
        kz = -kz;
    }
    kz
}
