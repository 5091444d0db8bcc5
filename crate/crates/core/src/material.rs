//! Dispersive permittivity models.
//!
//! All frequencies are signed photon energies in meV. Every model obeys the
//! reality condition ε(−ω) = ε*(ω), so negative-frequency harmonics of the
//! Floquet problem can be evaluated without special cases.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::roots;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("invalid Lorentz parameters: {0}")]
    InvalidLorentz(String),
    #[error("invalid modulated layer: {0}")]
    InvalidModulation(String),
    #[error("no surface-polariton root in ({omega_t}, {omega_l}) meV")]
    NoSurfaceMode { omega_t: f64, omega_l: f64 },
}

/// Single-oscillator Lorentz (TO/LO) phonon permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzParams {
    pub eps_inf: f64,
    /// Longitudinal phonon energy, meV.
    pub omega_l: f64,
    /// Transverse phonon energy, meV.
    pub omega_t: f64,
    /// Damping energy, meV.
    pub gamma: f64,
}

impl LorentzParams {
    pub const QUARTZ: LorentzParams = LorentzParams {
        eps_inf: 2.4,
        omega_l: 50.0,
        omega_t: 49.0,
        gamma: 0.26,
    };

    pub const INP: LorentzParams = LorentzParams {
        eps_inf: 9.6,
        omega_l: 43.0,
        omega_t: 38.0,
        gamma: 0.43,
    };

    pub fn validate(&self) -> Result<(), MaterialError> {
        let mut problems = Vec::new();
        if !(self.omega_t > 0.0) {
            problems.push(format!("omega_T = {} must be > 0", self.omega_t));
        }
        if !(self.omega_l > self.omega_t) {
            problems.push(format!(
                "omega_L = {} must exceed omega_T = {}",
                self.omega_l, self.omega_t
            ));
        }
        if !(self.gamma > 0.0) {
            problems.push(format!("gamma = {} must be > 0", self.gamma));
        }
        if !(self.eps_inf >= 1.0) {
            problems.push(format!("eps_inf = {} must be >= 1", self.eps_inf));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(MaterialError::InvalidLorentz(problems.join("; ")))
        }
    }

    /// ε∞ (1 + (ω_L² − ω_T²)/(ω_T² − ω² − iγω)).
    pub fn permittivity(&self, omega: f64) -> Complex64 {
        let strength = self.omega_l * self.omega_l - self.omega_t * self.omega_t;
        let denom = Complex64::new(self.omega_t * self.omega_t - omega * omega, -self.gamma * omega);
        self.eps_inf * (1.0 + strength / denom)
    }

    /// Same oscillator with the damping removed.
    pub fn lossless(&self) -> LorentzParams {
        LorentzParams { gamma: 0.0, ..*self }
    }
}

/// ε₃(t) = ε_s + δε cos(Ωt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatedLayerSpec {
    pub eps_static: f64,
    pub delta_eps: f64,
    /// Modulation energy ħΩ, meV.
    pub mod_freq: f64,
}

impl ModulatedLayerSpec {
    pub fn new(eps_static: f64, delta_eps: f64, mod_freq: f64) -> Result<Self, MaterialError> {
        let spec = ModulatedLayerSpec {
            eps_static,
            delta_eps,
            mod_freq,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.delta_eps >= 0.0) {
            return Err(MaterialError::InvalidModulation(format!(
                "delta_eps = {} must be >= 0",
                self.delta_eps
            )));
        }
        if !(self.eps_static > self.delta_eps) {
            return Err(MaterialError::InvalidModulation(format!(
                "eps_static = {} must exceed delta_eps = {} so the permittivity stays positive",
                self.eps_static, self.delta_eps
            )));
        }
        if !(self.mod_freq > 0.0) {
            return Err(MaterialError::InvalidModulation(format!(
                "mod_freq = {} must be > 0",
                self.mod_freq
            )));
        }
        Ok(())
    }

    /// Fourier coefficient ε̂_l of ε₃(t) = Σ_l ε̂_l e^{−ilΩt}.
    #[inline]
    pub fn coefficient(&self, l: i32) -> f64 {
        match l {
            0 => self.eps_static,
            1 | -1 => 0.5 * self.delta_eps,
            _ => 0.0,
        }
    }

    /// Permittivity at time `t_phase = Ωt`.
    pub fn at_phase(&self, phase: f64) -> f64 {
        self.eps_static + self.delta_eps * phase.cos()
    }
}

/// Nonzero Fourier harmonics of the modulated permittivity.
pub fn fourier_harmonics(m: &ModulatedLayerSpec) -> BTreeMap<i32, f64> {
    let mut map = BTreeMap::new();
    map.insert(0, m.eps_static);
    if m.delta_eps != 0.0 {
        map.insert(-1, 0.5 * m.delta_eps);
        map.insert(1, 0.5 * m.delta_eps);
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    Lorentz(LorentzParams),
    /// Frequency-independent permittivity; the value applies for ω ≥ 0.
    Constant(Complex64),
    Modulated(ModulatedLayerSpec),
}

impl Material {
    pub const VACUUM: Material = Material::Constant(Complex64::new(1.0, 0.0));

    /// Complex permittivity at a signed frequency. For a modulated layer this
    /// is the static (time-averaged) value.
    pub fn permittivity(&self, omega: f64) -> Complex64 {
        match self {
            Material::Lorentz(p) => p.permittivity(omega),
            Material::Constant(eps) => {
                if omega < 0.0 {
                    eps.conj()
                } else {
                    *eps
                }
            }
            Material::Modulated(m) => Complex64::new(m.eps_static, 0.0),
        }
    }

    pub fn permittivity_im(&self, omega: f64) -> f64 {
        self.permittivity(omega).im
    }

    /// True when the material dissipates at some frequency.
    pub fn is_lossy(&self) -> bool {
        match self {
            Material::Lorentz(p) => p.gamma > 0.0,
            Material::Constant(eps) => eps.im != 0.0,
            Material::Modulated(_) => false,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        match self {
            Material::Lorentz(p) => p.validate(),
            Material::Constant(_) => Ok(()),
            Material::Modulated(m) => m.validate(),
        }
    }
}

/// Free function form of [`Material::permittivity`].
pub fn permittivity(m: &Material, omega: f64) -> Complex64 {
    m.permittivity(omega)
}

/// Free function form of [`Material::permittivity_im`].
pub fn permittivity_im(m: &Material, omega: f64) -> f64 {
    m.permittivity_im(omega)
}

/// Frequency where the lossless Re ε(ω) equals `-eps_ambient`: the large-k∥
/// limit of the surface polariton on an interface with a medium of
/// permittivity `eps_ambient`.
pub fn surface_mode_against(p: &LorentzParams, eps_ambient: f64, tol: f64) -> Result<f64, MaterialError> {
    let lossless = p.lossless();
    let f = |w: f64| lossless.permittivity(w).re + eps_ambient;
    let span = p.omega_l - p.omega_t;
    let lo = p.omega_t + 1e-12 * span.max(1e-300);
    let hi = p.omega_l;
    let no_root = MaterialError::NoSurfaceMode {
        omega_t: p.omega_t,
        omega_l: p.omega_l,
    };
    if !(span > 0.0) || !(eps_ambient > 0.0) {
        return Err(no_root);
    }
    let xtol = (tol * p.omega_l).max(f64::EPSILON * p.omega_l);
    match roots::brent(f, lo, hi, xtol) {
        Some(w) if w > p.omega_t && w < p.omega_l => Ok(w),
        _ => Err(no_root),
    }
}

/// Single-interface (vacuum) surface phonon polariton frequency, Re ε = −1.
pub fn surface_polariton_frequency(p: &LorentzParams, tol: f64) -> Result<f64, MaterialError> {
    surface_mode_against(p, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quartz_static_and_high_frequency_limits() {
        let q = Material::Lorentz(LorentzParams::QUARTZ);
        assert_relative_eq!(q.permittivity(0.0).re, 2.4 * (50.0f64 / 49.0).powi(2), max_relative = 1e-14);
        assert_eq!(q.permittivity(0.0).im, 0.0);
        let far = q.permittivity(1e9);
        assert_relative_eq!(far.re, 2.4, max_relative = 1e-9);
    }

    #[test]
    fn quartz_resonance_loss() {
        let eps = LorentzParams::QUARTZ.permittivity(49.0);
        let expected = 2.4 * 99.0 / (0.26 * 49.0);
        assert_relative_eq!(eps.im, expected, max_relative = 1e-12);
        assert!((eps.im - 18.6).abs() < 0.05);
    }

    #[test]
    fn reality_condition_and_antisymmetric_loss() {
        let inp = Material::Lorentz(LorentzParams::INP);
        for w in [0.5, 12.0, 38.0, 42.5, 80.0] {
            assert_eq!(inp.permittivity(-w), inp.permittivity(w).conj());
            assert_eq!(inp.permittivity_im(-w), -inp.permittivity_im(w));
        }
    }

    #[test]
    fn modulated_layer_is_lossless() {
        let m = Material::Modulated(ModulatedLayerSpec::new(4.0, 0.4, 90.0).unwrap());
        for w in [-70.0, -1.0, 1.0, 45.0] {
            assert_eq!(m.permittivity_im(w), 0.0);
        }
        assert!(!m.is_lossy());
    }

    #[test]
    fn harmonics_of_cosine() {
        let m = ModulatedLayerSpec::new(4.0, 0.4, 90.0).unwrap();
        let h = fourier_harmonics(&m);
        assert_eq!(h[&1], 0.2);
        assert_eq!(h[&-1], 0.2);
        assert_eq!(h[&0], 4.0);
        assert_relative_eq!(h.values().sum::<f64>(), m.at_phase(0.0), max_relative = 1e-15);
        assert_eq!(m.coefficient(2), 0.0);

        let flat = ModulatedLayerSpec::new(4.0, 0.0, 90.0).unwrap();
        assert_eq!(fourier_harmonics(&flat).len(), 1);
    }

    #[test]
    fn modulation_must_stay_positive() {
        assert!(ModulatedLayerSpec::new(4.0, 5.0, 90.0).is_err());
        assert!(ModulatedLayerSpec::new(4.0, -0.1, 90.0).is_err());
    }

    #[test]
    fn surface_frequencies_match_closed_form() {
        for p in [LorentzParams::QUARTZ, LorentzParams::INP] {
            let w = surface_polariton_frequency(&p, 1e-12).unwrap();
            let closed = ((p.eps_inf * p.omega_l.powi(2) + p.omega_t.powi(2)) / (p.eps_inf + 1.0)).sqrt();
            assert_relative_eq!(w, closed, max_relative = 1e-10);
            assert!(w > p.omega_t && w < p.omega_l);
        }
        let w1 = surface_polariton_frequency(&LorentzParams::QUARTZ, 1e-12).unwrap();
        let w2 = surface_polariton_frequency(&LorentzParams::INP, 1e-12).unwrap();
        assert!((w1 - 49.71).abs() < 0.01, "{w1}");
        assert!((w2 - 42.55).abs() < 0.01, "{w2}");
    }

    #[test]
    fn large_eps_inf_pushes_surface_mode_to_omega_l() {
        let p = LorentzParams {
            eps_inf: 1e8,
            ..LorentzParams::QUARTZ
        };
        let w = surface_polariton_frequency(&p, 1e-14).unwrap();
        assert!((p.omega_l - w) < 1e-6);
    }

    #[test]
    fn invalid_lorentz_reported() {
        let p = LorentzParams {
            omega_l: 40.0,
            ..LorentzParams::QUARTZ
        };
        assert!(p.validate().is_err());
        assert!(surface_polariton_frequency(&p, 1e-9).is_err());
    }
}
