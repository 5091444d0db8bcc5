//! Near-field dynamical Casimir effect in a time-modulated planar two-body system.
//!
//! The crate computes coupled-harmonic scattering of the layered stack
//! (body 1 / vacuum gap / modulated layer / body 2), the photon-number
//! conversion spectra built from it, the quantum and thermal Casimir fluxes,
//! the inelastic scattering flux, and a two-mode nonclassicality indicator.
//!
//! Units: energies in meV, lengths in nm, temperatures in K; fluxes are
//! reported in W/m².

pub mod config;
pub mod floquet;
pub mod flux;
pub mod material;
pub mod nonclassicality;
pub mod quadrature;
pub mod roots;
pub mod runner;
pub mod stack;
pub mod units;
