//! Photon-number conversion spectra and the flux decomposition
//! Q₁ = Φ₁^Q + Φ₁^T + Υ₁.
//!
//! Spectra are stored non-negative: for harmonics with ω_l < 0 the
//! absorption factor |ε''_α(ω_l)| is used, and the sign of those pair-generation
//! terms is applied when the fluxes are assembled. Positive fluxes are
//! energy received by body 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::floquet::{solve_for_flux, source_coefficient, wave_vector, HarmonicBasis, PlaneWaveContext, Polarization, SolveError, StackSolution};
use crate::material::surface_mode_against;
use crate::material::{surface_polariton_frequency, Material};
use crate::quadrature::{integrate_kpar_vec, integrate_vec, QuadratureSpec};
use crate::stack::{Body, LayerStack, StackError};
use crate::units::{thermal_energy, vacuum_wavenumber, HBAR_MEV_S, MEV_IN_J, PER_NM2_IN_PER_M2};

type C = Complex64;

/// Lowest output energy (meV) included in ω integrals.
const OMEGA_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FluxError {
    #[error("Bose–Einstein occupation undefined at ω = 0")]
    ZeroFrequency,
    #[error("negative temperature {0} K")]
    NegativeTemperature(f64),
    #[error("body {0:?} is not lossy")]
    LosslessBody(Body),
    #[error("harmonic {0} is outside the retained basis")]
    HarmonicOutOfRange(i32),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("quadrature did not converge: estimate {estimate:e} ± {error:e}")]
    NotConverged { estimate: f64, error: f64 },
}

/// n(ω) = 1/(e^{ħω/k_BT} − 1), with n(−ω) = −1 − n(ω) exactly.
pub fn bose_einstein(omega: f64, temperature: f64) -> Result<f64, FluxError> {
    if omega == 0.0 {
        return Err(FluxError::ZeroFrequency);
    }
    if temperature < 0.0 {
        return Err(FluxError::NegativeTemperature(temperature));
    }
    let positive = |w: f64| {
        if temperature == 0.0 {
            0.0
        } else {
            1.0 / (w / thermal_energy(temperature)).exp_m1()
        }
    };
    Ok(if omega > 0.0 { positive(omega) } else { -1.0 - positive(-omega) })
}

fn occupation(omega: f64, temperature: f64) -> f64 {
    bose_einstein(omega, temperature).unwrap_or(0.0)
}

/// Σ_i |e_i|² of a wave polarization vector.
fn vector_weight(v: &[C; 3]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// (k∥, pol)-resolved kernel of the conversion spectrum from a solved stack.
///
/// Includes only the scattered field: for β = α and l = 0 the bulk self term
/// of the source medium is omitted because its volume integral diverges.
pub fn kernel_from_solution(sol: &StackSolution, stack: &LayerStack, beta: Body, alpha: Body, l: i32) -> Result<f64, FluxError> {
    let mb = stack.body(beta);
    let ma = stack.body(alpha);
    if !mb.is_lossy() {
        return Err(FluxError::LosslessBody(beta));
    }
    if !ma.is_lossy() {
        return Err(FluxError::LosslessBody(alpha));
    }
    let idx = sol.basis.index(l).ok_or(FluxError::HarmonicOutOfRange(l))?;
    let i0 = sol.basis.index(0).expect("harmonic 0 retained");
    Ok(kernel_entry(sol, mb, ma, beta, alpha, i0, idx))
}

fn kernel_entry(sol: &StackSolution, mb: &Material, ma: &Material, beta: Body, alpha: Body, i0: usize, idx: usize) -> f64 {
    let omega = sol.basis.output_energy;
    let omega_l = sol.basis.energy(sol.basis.order(idx));
    let kpar = sol.ctx.kpar;
    let pol = sol.ctx.pol;
    let s = &sol.s;
    let amp = match (beta, alpha) {
        (Body::One, Body::Two) => s.s21[(i0, idx)],
        (Body::One, Body::One) => s.s22[(i0, idx)],
        (Body::Two, Body::Two) => s.s11[(i0, idx)],
        (Body::Two, Body::One) => s.s12[(i0, idx)],
    };
    let kz_b = sol.modes(beta.region()).q[i0];
    let kz_a = sol.modes(alpha.region()).q[idx];
    let eps_a = ma.permittivity(omega_l);
    let c_src = source_coefficient(pol, eps_a, omega_l, kz_a);
    let obs = wave_vector(pol, kpar, kz_b, beta == Body::One);
    let src = wave_vector(pol, kpar, kz_a, alpha == Body::Two);
    let k0l = vacuum_wavenumber(omega_l);
    let k0l2 = k0l * k0l;
    let loss = mb.permittivity_im(omega) * ma.permittivity_im(omega_l).abs();
    (2.0 / PI) * k0l2 * k0l2 * loss * (amp * c_src).norm_sqr() * vector_weight(&obs) * vector_weight(&src)
        / (4.0 * kz_b.im * kz_a.im)
}

/// The (k∥, pol)-resolved integrand of F_β^(l)(ω) for one source body α.
#[allow(clippy::too_many_arguments)]
pub fn pair_kernel(
    s: &LayerStack,
    basis: &HarmonicBasis,
    l: i32,
    omega: f64,
    ctx: &PlaneWaveContext,
    beta: Body,
    alpha: Body,
) -> Result<f64, FluxError> {
    s.validate()?;
    let basis = HarmonicBasis {
        output_energy: omega,
        ..*basis
    };
    let sol = solve_for_flux(s, ctx, &basis)?;
    kernel_from_solution(&sol, s, beta, alpha, l)
}

/// Σ_α kernels for body 1 at every harmonic (l = 0 keeps only α = 2).
fn body1_row(sol: &StackSolution, stack: &LayerStack) -> Vec<f64> {
    let i0 = sol.basis.index(0).expect("harmonic 0 retained");
    let (m1, m2) = (&stack.top_half_space, &stack.bottom_half_space);
    (0..sol.dim())
        .map(|idx| {
            let from2 = kernel_entry(sol, m1, m2, Body::One, Body::Two, i0, idx);
            if idx == i0 {
                from2
            } else {
                from2 + kernel_entry(sol, m1, m1, Body::One, Body::One, i0, idx)
            }
        })
        .collect()
}

fn body2_row(sol: &StackSolution, stack: &LayerStack) -> Vec<f64> {
    let i0 = sol.basis.index(0).expect("harmonic 0 retained");
    let (m1, m2) = (&stack.top_half_space, &stack.bottom_half_space);
    (0..sol.dim())
        .map(|idx| {
            let from1 = kernel_entry(sol, m2, m1, Body::Two, Body::One, i0, idx);
            if idx == i0 {
                from1
            } else {
                from1 + kernel_entry(sol, m2, m2, Body::Two, Body::Two, i0, idx)
            }
        })
        .collect()
}

/// k∥-integrated spectra F_β^(l)(ω) for all harmonics, in photons per m² per
/// unit angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAtOmega {
    pub omega: f64,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub converged: bool,
}

fn integrate_body(s: &LayerStack, basis: &HarmonicBasis, quad: &QuadratureSpec, beta: Body) -> SpectrumAtOmega {
    let n = basis.len();
    let integrand = |k: f64| -> Vec<f64> {
        let mut acc = vec![0.0; n];
        for pol in Polarization::BOTH {
            let ctx = PlaneWaveContext { kpar: k, pol };
            match solve_for_flux(s, &ctx, basis) {
                Ok(sol) => {
                    let row = match beta {
                        Body::One => body1_row(&sol, s),
                        Body::Two => body2_row(&sol, s),
                    };
                    for (a, r) in acc.iter_mut().zip(row) {
                        *a += r;
                    }
                }
                Err(_) => {
                    for a in acc.iter_mut() {
                        *a = f64::NAN;
                    }
                }
            }
        }
        let w = k / (2.0 * PI) * PER_NM2_IN_PER_M2;
        acc.iter_mut().for_each(|a| *a *= w);
        acc
    };
    let r = integrate_kpar_vec(integrand, basis.output_energy, s.gap(), n, quad);
    let finite = r.values.iter().all(|v| v.is_finite());
    SpectrumAtOmega {
        omega: basis.output_energy,
        values: r.values,
        errors: r.errors,
        converged: r.converged && finite,
    }
}

/// F_1^(l)(ω) and F_2^(l)(ω) for all retained harmonics at one ω.
///
/// F_2 involves conversion inside the layer adjacent to body 2 with no gap in
/// between, so its k∥ integral has no exponential cutoff and is reported as
/// truncated at k_max; its `converged` flag is usually false.
pub fn photon_flux_spectrum(s: &LayerStack, basis: &HarmonicBasis, omega: f64, quad: &QuadratureSpec) -> Result<[SpectrumAtOmega; 2], FluxError> {
    s.validate()?;
    let basis = HarmonicBasis {
        output_energy: omega,
        ..*basis
    };
    let f1 = integrate_body(s, &basis, quad, Body::One);
    let f2 = integrate_body(s, &basis, quad, Body::Two);
    if f1.values.iter().any(|v| !v.is_finite()) {
        return Err(FluxError::NotConverged {
            estimate: f64::NAN,
            error: f64::NAN,
        });
    }
    Ok([f1, f2])
}

/// Landmark energies where spectra have structure: phonon edges, surface modes
/// of both bodies against vacuum and of body 2 under the modulated layer.
pub fn spectral_landmarks(s: &LayerStack) -> Vec<f64> {
    let mut out = Vec::new();
    let eps_layer = s.modulation().eps_static;
    for body in Body::BOTH {
        if let Material::Lorentz(p) = s.body(body) {
            out.push(p.omega_t);
            out.push(p.omega_l);
            if let Ok(w) = surface_polariton_frequency(p, 1e-12) {
                out.push(w);
            }
            if body == Body::Two {
                if let Ok(w) = surface_mode_against(p, eps_layer, 1e-12) {
                    out.push(w);
                }
            }
        }
    }
    out
}

/// Initial breakpoints for the ω integral over the output window: the window
/// edges, every landmark image ±f − lΩ and every ω = mΩ at which some ω_l
/// vanishes. Gauss–Kronrod nodes are interior, so none lands on ω_l = 0.
pub fn omega_breakpoints(s: &LayerStack, trunc: usize, quad: &QuadratureSpec) -> Vec<f64> {
    let m = s.modulation().mod_freq;
    let (a, b) = quad.omega_window;
    let (a, b) = (a.max(OMEGA_FLOOR), b);
    let n = trunc as i32;
    let mut marks = vec![a, b];
    for f in spectral_landmarks(s) {
        for l in -n..=n {
            marks.push(f - l as f64 * m);
            marks.push(-f - l as f64 * m);
        }
    }
    for k in 1..=n {
        marks.push(k as f64 * m);
    }
    marks.retain(|&x| x >= a && x <= b);
    marks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut points: Vec<f64> = Vec::new();
    for x in marks {
        if points.last().map_or(true, |&p| x - p > 1e-3) {
            points.push(x);
        } else if x == b {
            *points.last_mut().unwrap() = b;
        }
    }
    points
}

/// Sampled F_1^(l)(ω) on the final adaptive ω nodes, with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFluxTable {
    pub mod_energy: f64,
    pub trunc: usize,
    /// Node energies (meV), ascending.
    pub omega: Vec<f64>,
    /// Quadrature weights in meV.
    pub weights: Vec<f64>,
    /// F_1^(l)(ω) per node, indexed by harmonic storage order (l = −N_h first).
    pub f1: Vec<Vec<f64>>,
    /// Number of nodes whose k∥ integral failed to converge.
    pub kpar_failures: usize,
    /// Outer ω quadrature converged.
    pub omega_converged: bool,
}

/// Energy flux per node: (1/ħ)·ħω in W/m² per unit F.
fn energy_factor(omega_mev: f64) -> f64 {
    omega_mev * MEV_IN_J / HBAR_MEV_S
}

impl SpectralFluxTable {
    pub fn converged(&self) -> bool {
        self.omega_converged && self.kpar_failures == 0
    }

    fn order(&self, idx: usize) -> i32 {
        idx as i32 - self.trunc as i32
    }

    fn source_energy(&self, w: f64, idx: usize) -> f64 {
        w + self.order(idx) as f64 * self.mod_energy
    }

    fn sum<F: Fn(f64, i32, f64) -> f64>(&self, weight: F) -> f64 {
        let mut total = 0.0;
        for ((&w, &q), row) in self.omega.iter().zip(&self.weights).zip(&self.f1) {
            let mut node = 0.0;
            for (idx, &f) in row.iter().enumerate() {
                if f != 0.0 {
                    node += weight(w, self.order(idx), self.source_energy(w, idx)) * f;
                }
            }
            total += q * energy_factor(w) * node;
        }
        total
    }

    /// Φ₁^Q in W/m².
    pub fn phi_q(&self) -> f64 {
        self.sum(|_, _, wl| if wl < 0.0 { 1.0 } else { 0.0 })
    }

    /// Φ₁^T in W/m².
    pub fn phi_t(&self, temperature: f64) -> f64 {
        self.sum(|w, _, wl| {
            if wl < 0.0 {
                occupation(w, temperature) + occupation(-wl, temperature)
            } else {
                0.0
            }
        })
    }

    /// Υ₁ in W/m².
    pub fn upsilon(&self, temperature: f64) -> f64 {
        self.sum(|w, l, wl| {
            if l != 0 && wl > 0.0 {
                occupation(wl, temperature) - occupation(w, temperature)
            } else {
                0.0
            }
        })
    }

    /// Gross thermal energy flux carried by the unconverted channel from body 2 to body 1.
    pub fn gross_one_way(&self, temperature: f64) -> f64 {
        self.sum(|w, l, _| if l == 0 { occupation(w, temperature) } else { 0.0 })
    }

    pub fn breakdown(&self, temperature: f64) -> FluxBreakdown {
        FluxBreakdown::new(self.phi_q(), self.phi_t(temperature), self.upsilon(temperature), temperature)
    }

    /// Per-harmonic ∫ħω F_1^(l) dω in W/m² (no occupation factors).
    pub fn harmonic_totals(&self) -> Vec<f64> {
        let n = 2 * self.trunc + 1;
        let mut out = vec![0.0; n];
        for ((&w, &q), row) in self.omega.iter().zip(&self.weights).zip(&self.f1) {
            for (o, f) in out.iter_mut().zip(row) {
                *o += q * energy_factor(w) * f;
            }
        }
        out
    }
}

/// Builds the spectral table for body 1 by adaptive ω integration of
/// ħω F_1^(l)(ω) for every l simultaneously.
pub fn spectral_flux_table(s: &LayerStack, trunc: usize, quad: &QuadratureSpec) -> Result<SpectralFluxTable, FluxError> {
    s.validate()?;
    let m = s.modulation().mod_freq;
    let n = 2 * trunc + 1;
    let bps = omega_breakpoints(s, trunc, quad);
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let integrand = |w: f64| -> Vec<f64> {
        let basis = HarmonicBasis::new(m, w, trunc);
        let r = integrate_body(s, &basis, quad, Body::One);
        if !r.converged {
            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        let e = energy_factor(w);
        r.values.iter().map(|f| f * e).collect()
    };
    let res = integrate_vec(integrand, &bps, n, quad, true);
    let omega_converged = res.converged;
    let mut omega = Vec::with_capacity(res.nodes.len());
    let mut weights = Vec::with_capacity(res.nodes.len());
    let mut f1: Vec<Vec<f64>> = Vec::with_capacity(res.nodes.len());
    for (x, wq, v) in res.nodes {
        let e = energy_factor(x);
        omega.push(x);
        weights.push(wq);
        f1.push(v.iter().map(|y| y / e).collect());
    }
    if f1.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FluxError::NotConverged {
            estimate: f64::NAN,
            error: f64::NAN,
        });
    }
    Ok(SpectralFluxTable {
        mod_energy: m,
        trunc,
        omega,
        weights,
        f1,
        kpar_failures: failures.into_inner(),
        omega_converged,
    })
}

/// Flux components received by body 1, in W/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxBreakdown {
    pub phi_q: f64,
    pub phi_t: f64,
    pub upsilon: f64,
    pub q_net: f64,
    /// L = |Φ^Q| / |Φ^T + Υ| − 1; +∞ when the thermal terms vanish.
    pub dominance: f64,
}

impl FluxBreakdown {
    pub fn new(phi_q: f64, phi_t: f64, upsilon: f64, temperature: f64) -> Self {
        let thermal = (phi_t + upsilon).abs();
        let dominance = if temperature == 0.0 || thermal == 0.0 {
            f64::INFINITY
        } else {
            phi_q.abs() / thermal - 1.0
        };
        FluxBreakdown {
            phi_q,
            phi_t,
            upsilon,
            q_net: phi_q + phi_t + upsilon,
            dominance,
        }
    }
}

/// Φ₁^Q for the stack (temperature independent).
pub fn casimir_flux_quantum(s: &LayerStack, trunc: usize, quad: &QuadratureSpec) -> Result<f64, FluxError> {
    Ok(spectral_flux_table(s, trunc, quad)?.phi_q())
}

/// Φ₁^T at temperature T.
pub fn casimir_flux_thermal(s: &LayerStack, trunc: usize, temperature: f64, quad: &QuadratureSpec) -> Result<f64, FluxError> {
    if temperature < 0.0 {
        return Err(FluxError::NegativeTemperature(temperature));
    }
    Ok(spectral_flux_table(s, trunc, quad)?.phi_t(temperature))
}

/// Υ₁ at temperature T.
pub fn inelastic_flux(s: &LayerStack, trunc: usize, temperature: f64, quad: &QuadratureSpec) -> Result<f64, FluxError> {
    if temperature < 0.0 {
        return Err(FluxError::NegativeTemperature(temperature));
    }
    Ok(spectral_flux_table(s, trunc, quad)?.upsilon(temperature))
}

/// All components, the net flux and the dominance indicator.
pub fn net_flux_and_dominance(s: &LayerStack, trunc: usize, temperature: f64, quad: &QuadratureSpec) -> Result<FluxBreakdown, FluxError> {
    if temperature < 0.0 {
        return Err(FluxError::NegativeTemperature(temperature));
    }
    Ok(spectral_flux_table(s, trunc, quad)?.breakdown(temperature))
}
