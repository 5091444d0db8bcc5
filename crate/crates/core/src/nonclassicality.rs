//! Two-mode quadrature test for nonclassical light in the gap.
//!
//! The response overlap
//!
//! R(z; ω, ω') = Σ_{α,i,j} ε''_α(ω') ∫_α dz' G_ij(z, z'; ω, ω') G*_ij(z, z'; ω', ω')
//!
//! is assembled per (k∥, polarization) from the factorised Green's function
//! and integrated over k∥ with weight k∥/2π. Its dimensional prefactor is set
//! to one: only the sign of 𝓘 = C − |B| and the ratio 𝓘/𝒩 carry meaning.

use num_complex::Complex64;

use crate::floquet::{
    solve_for_flux, source_coefficient, wave_vector, HarmonicBasis, InternalAmplitudes, PlaneWaveContext, Polarization, SolveError,
    StackSolution,
};
use crate::flux::{bose_einstein, FluxError};
use crate::quadrature::{integrate_kpar_vec, QuadratureSpec};
use crate::stack::{Body, LayerStack, RegionId, StackError};

type C = Complex64;

/// Pair of quadrature frequencies ω_± = Ω/2 ± δω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePairSpec {
    /// ħΩ in meV.
    pub mod_energy: f64,
    /// ħδω in meV.
    pub delta_omega: f64,
}

impl QuadraturePairSpec {
    pub fn new(mod_energy: f64, delta_omega: f64) -> Result<Self, IndicatorError> {
        let p = QuadraturePairSpec { mod_energy, delta_omega };
        if !(mod_energy.is_finite() && delta_omega.is_finite()) || p.omega_minus() <= 0.0 {
            return Err(IndicatorError::InvalidPair { mod_energy, delta_omega });
        }
        Ok(p)
    }

    /// Degenerate squeezing at Ω/2.
    pub fn degenerate(mod_energy: f64) -> Result<Self, IndicatorError> {
        Self::new(mod_energy, 0.0)
    }

    /// Pair centred on two resonances, δω = (Ω₁ − Ω₂)/2.
    pub fn nondegenerate(mod_energy: f64, omega_1: f64, omega_2: f64) -> Result<Self, IndicatorError> {
        Self::new(mod_energy, 0.5 * (omega_1 - omega_2))
    }

    pub fn omega_minus(&self) -> f64 {
        0.5 * self.mod_energy - self.delta_omega
    }

    pub fn omega_plus(&self) -> f64 {
        0.5 * self.mod_energy + self.delta_omega
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndicatorError {
    #[error("quadrature pair Ω = {mod_energy} meV, δω = {delta_omega} meV needs ω₋ > 0")]
    InvalidPair { mod_energy: f64, delta_omega: f64 },
    #[error("observation height z = {0} nm is not inside the gap")]
    NotInGap(f64),
    #[error("source energy must be positive, got {0} meV")]
    NonPositiveSource(f64),
    #[error("ω' − ω = {0} meV is not a retained multiple of the modulation energy")]
    NotAHarmonic(f64),
    #[error("basis modulation energy {basis} meV differs from the stack's {stack} meV")]
    ModulationMismatch { basis: f64, stack: f64 },
    #[error("k∥ integral of the response overlap did not converge")]
    NotConverged,
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Flux(#[from] FluxError),
}

/// ε''_α(ω_s) |c̃|² Σ|s_j|² / (2 Im k_z): the source-side factor after the
/// depth integral over body α, for the source at storage index `idx`.
fn source_weight(sol: &StackSolution, stack: &LayerStack, body: Body, idx: usize) -> f64 {
    let omega_s = sol.basis.energy(sol.basis.order(idx));
    let kz = sol.modes(body.region()).q[idx];
    let material = stack.body(body);
    let eps = material.permittivity(omega_s);
    let c = source_coefficient(sol.ctx.pol, eps, omega_s, kz);
    let s = wave_vector(sol.ctx.pol, sol.ctx.kpar, kz, body == Body::Two);
    let s2: f64 = s.iter().map(|x| x.norm_sqr()).sum();
    material.permittivity_im(omega_s).abs() * c.norm_sqr() * s2 / (2.0 * kz.im)
}

/// Harmonic-0 field at each `z` in the gap for a unit wave from `body` at storage index `idx`.
fn gap_response(sol: &StackSolution, amps: &InternalAmplitudes, body: Body, idx: usize, zs: &[f64]) -> Vec<[C; 3]> {
    let col = match body {
        Body::Two => idx,
        Body::One => sol.dim() + idx,
    };
    let a = amps.column(RegionId::Gap, col).expect("gap amplitudes exist");
    let i0 = sol.basis.index(0).expect("harmonic 0 retained");
    zs.iter().map(|&z| sol.field(RegionId::Gap, &a, z)[i0]).collect()
}

/// Σ_i a_i b_i* over the three Cartesian components.
fn dot_conj(a: &[C; 3], b: &[C; 3]) -> C {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// The field at −k∥ from the field at +k∥ for the same unit tangential
/// excitation: E_z flips sign for p, nothing changes for s.
fn reverse_kpar(e: [C; 3], pol: Polarization) -> [C; 3] {
    match pol {
        Polarization::S => e,
        Polarization::P => [e[0], e[1], -e[2]],
    }
}

struct Solved {
    sol: StackSolution,
    amps: InternalAmplitudes,
}

fn solve_with_fields(s: &LayerStack, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<Solved, SolveError> {
    let sol = solve_for_flux(s, ctx, basis)?;
    let amps = sol.internal_amplitudes()?;
    Ok(Solved { sol, amps })
}

/// How the cross term G(ω, ω') is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapRoute {
    /// Negative ω from the reality condition G(−ω, −ω') = G*(ω, ω') at −k∥.
    Mirror,
    /// Direct solve at the signed output energy.
    Direct,
}

/// (k∥, pol)-resolved integrand of R at several heights, before the k∥/2π weight.
#[allow(clippy::too_many_arguments)]
fn overlap_integrand(
    s: &LayerStack,
    trunc: usize,
    omega: f64,
    omega_prime: f64,
    l: i32,
    ctx: &PlaneWaveContext,
    zs: &[f64],
    route: OverlapRoute,
) -> Result<Vec<C>, SolveError> {
    let m = s.modulation().mod_freq;
    let elastic = solve_with_fields(s, ctx, &HarmonicBasis::new(m, omega_prime, trunc))?;
    let i0 = elastic.sol.basis.index(0).expect("harmonic 0 retained");
    let mut out = vec![C::new(0.0, 0.0); zs.len()];
    let mirrored = omega < 0.0 && route == OverlapRoute::Mirror;
    let cross = if l == 0 {
        None
    } else if mirrored {
        Some(solve_with_fields(s, ctx, &HarmonicBasis::new(m, -omega, trunc))?)
    } else {
        Some(solve_with_fields(s, ctx, &HarmonicBasis::new(m, omega, trunc))?)
    };
    for body in Body::BOTH {
        let w = source_weight(&elastic.sol, s, body, i0);
        let e_el = gap_response(&elastic.sol, &elastic.amps, body, i0, zs);
        match &cross {
            None => {
                for (o, e) in out.iter_mut().zip(e_el.iter()) {
                    *o += w * dot_conj(e, e);
                }
            }
            Some(c) => {
                let src_l = if mirrored { -l } else { l };
                let idx = c.sol.basis.index(src_l).expect("source harmonic retained");
                let e_c = gap_response(&c.sol, &c.amps, body, idx, zs);
                for ((o, ec), ee) in out.iter_mut().zip(e_c.iter()).zip(e_el.iter()) {
                    let ec = if mirrored {
                        let r = reverse_kpar(*ec, ctx.pol);
                        [r[0].conj(), r[1].conj(), r[2].conj()]
                    } else {
                        *ec
                    };
                    *o += w * dot_conj(&ec, ee);
                }
            }
        }
    }
    Ok(out)
}

fn check_heights(s: &LayerStack, zs: &[f64]) -> Result<(), IndicatorError> {
    for &z in zs {
        if !(z > 0.0 && z < s.gap()) {
            return Err(IndicatorError::NotInGap(z));
        }
    }
    Ok(())
}

/// Harmonic order l with ω' = ω + lΩ.
fn harmonic_between(omega: f64, omega_prime: f64, mod_energy: f64, trunc: usize) -> Result<i32, IndicatorError> {
    let x = (omega_prime - omega) / mod_energy;
    let l = x.round();
    if (x - l).abs() > 1e-9 * (1.0 + x.abs()) || l.abs() > trunc as f64 {
        return Err(IndicatorError::NotAHarmonic(omega_prime - omega));
    }
    Ok(l as i32)
}

/// Shortest distance from any height to a body, setting the k∥ cutoff.
fn decay_length(s: &LayerStack, zs: &[f64]) -> f64 {
    zs.iter()
        .map(|&z| (s.gap() - z).min(z + s.mod_thickness()))
        .fold(f64::INFINITY, f64::min)
}

/// R(z; ω, ω') at several heights sharing one k∥ integration.
#[allow(clippy::too_many_arguments)]
pub fn response_overlap_profile(
    s: &LayerStack,
    trunc: usize,
    zs: &[f64],
    omega: f64,
    omega_prime: f64,
    quad: &QuadratureSpec,
    route: OverlapRoute,
) -> Result<Vec<C>, IndicatorError> {
    s.validate()?;
    check_heights(s, zs)?;
    if omega_prime <= 0.0 {
        return Err(IndicatorError::NonPositiveSource(omega_prime));
    }
    let l = harmonic_between(omega, omega_prime, s.modulation().mod_freq, trunc)?;
    let nz = zs.len();
    let integrand = |k: f64| -> Vec<f64> {
        let mut acc = vec![0.0; 2 * nz];
        for pol in Polarization::BOTH {
            match overlap_integrand(s, trunc, omega, omega_prime, l, &PlaneWaveContext { kpar: k, pol }, zs, route) {
                Ok(v) => {
                    for (i, x) in v.iter().enumerate() {
                        acc[2 * i] += x.re;
                        acc[2 * i + 1] += x.im;
                    }
                }
                Err(_) => acc.iter_mut().for_each(|a| *a = f64::NAN),
            }
        }
        let w = k / (2.0 * std::f64::consts::PI);
        acc.iter_mut().for_each(|a| *a *= w);
        acc
    };
    let r = integrate_kpar_vec(integrand, omega_prime, decay_length(s, zs), 2 * nz, quad);
    if !r.converged || r.values.iter().any(|v| !v.is_finite()) {
        return Err(IndicatorError::NotConverged);
    }
    Ok((0..nz).map(|i| C::new(r.values[2 * i], r.values[2 * i + 1])).collect())
}

/// R(z; ω, ω') for z in the gap and ω' > 0; negative ω goes through the
/// reality condition.
pub fn response_overlap(
    s: &LayerStack,
    basis: &HarmonicBasis,
    z: f64,
    omega: f64,
    omega_prime: f64,
    quad: &QuadratureSpec,
) -> Result<C, IndicatorError> {
    check_mod(s, basis)?;
    Ok(response_overlap_profile(s, basis.trunc, &[z], omega, omega_prime, quad, OverlapRoute::Mirror)?[0])
}

fn check_mod(s: &LayerStack, basis: &HarmonicBasis) -> Result<(), IndicatorError> {
    let stack = s.modulation().mod_freq;
    if (basis.mod_energy - stack).abs() > 1e-12 * stack.abs().max(1.0) {
        return Err(IndicatorError::ModulationMismatch {
            basis: basis.mod_energy,
            stack,
        });
    }
    Ok(())
}

/// The four overlaps entering the indicator at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOverlaps {
    /// R(z; ω_M, ω_M) for M = +, −.
    pub elastic: [f64; 2],
    /// R(z; ω_M − Ω, ω_M) for M = +, −.
    pub conversion: [C; 2],
}

impl PairOverlaps {
    /// (C, B) at temperature T.
    pub fn components(&self, pair: &QuadraturePairSpec, temperature: f64) -> Result<(f64, C), IndicatorError> {
        let freqs = [pair.omega_plus(), pair.omega_minus()];
        let mut c = 0.0;
        let mut b = C::new(0.0, 0.0);
        for m in 0..2 {
            let n = bose_einstein(freqs[m], temperature)?;
            c += self.elastic[m] * n;
            b += self.conversion[m] * (2.0 * n + 1.0);
        }
        Ok((c, b))
    }

    /// 𝒩 = Σ_M R(z; ω_M, ω_M)/2.
    pub fn normalization(&self) -> f64 {
        0.5 * (self.elastic[0] + self.elastic[1])
    }

    /// (C − |B|)/𝒩.
    pub fn normalized_indicator(&self, pair: &QuadraturePairSpec, temperature: f64) -> Result<f64, IndicatorError> {
        let (c, b) = self.components(pair, temperature)?;
        Ok((c - b.norm()) / self.normalization())
    }
}

/// Overlaps at several heights with one k∥ integration per overlap.
pub fn pair_overlaps(
    s: &LayerStack,
    trunc: usize,
    pair: &QuadraturePairSpec,
    zs: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<PairOverlaps>, IndicatorError> {
    let m = s.modulation().mod_freq;
    if (pair.mod_energy - m).abs() > 1e-12 * m.abs().max(1.0) {
        return Err(IndicatorError::ModulationMismatch {
            basis: pair.mod_energy,
            stack: m,
        });
    }
    let freqs = [pair.omega_plus(), pair.omega_minus()];
    let mut elastic = Vec::new();
    let mut conversion = Vec::new();
    for &w in &freqs {
        elastic.push(response_overlap_profile(s, trunc, zs, w, w, quad, OverlapRoute::Mirror)?);
        conversion.push(response_overlap_profile(s, trunc, zs, w - m, w, quad, OverlapRoute::Mirror)?);
    }
    Ok((0..zs.len())
        .map(|i| PairOverlaps {
            elastic: [elastic[0][i].re, elastic[1][i].re],
            conversion: [conversion[0][i], conversion[1][i]],
        })
        .collect())
}

/// C(z, T) ≥ 0 and B(z, T).
pub fn indicator_components(
    s: &LayerStack,
    basis: &HarmonicBasis,
    pair: &QuadraturePairSpec,
    z: f64,
    temperature: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, C), IndicatorError> {
    check_mod(s, basis)?;
    pair_overlaps(s, basis.trunc, pair, &[z], quad)?[0].components(pair, temperature)
}

/// Normalized indicator 𝓘/𝒩; negative values certify a nonclassical state.
pub fn indicator(
    s: &LayerStack,
    basis: &HarmonicBasis,
    pair: &QuadraturePairSpec,
    z: f64,
    temperature: f64,
    quad: &QuadratureSpec,
) -> Result<f64, IndicatorError> {
    check_mod(s, basis)?;
    pair_overlaps(s, basis.trunc, pair, &[z], quad)?[0].normalized_indicator(pair, temperature)
}

/// 𝓘/𝒩 on a (z, T) grid with its zero-crossing contour.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    pub z_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// values[iz][it].
    pub values: Vec<Vec<f64>>,
    /// Interpolated temperature of the first sign change from negative to
    /// non-negative along T, per height.
    pub contour: Vec<Option<f64>>,
    /// Cells (iz, it) where 𝓘/𝒩 rises from T[it−1] to T[it].
    pub nonmonotone: Vec<(usize, usize)>,
}

impl IndicatorGrid {
    /// Whether the crossing temperature never increases with height.
    pub fn contour_recedes_with_height(&self) -> bool {
        let known: Vec<f64> = self.contour.iter().flatten().copied().collect();
        known.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Temperature at which a sampled curve first goes from negative to non-negative.
pub fn zero_crossing(ts: &[f64], values: &[f64]) -> Option<f64> {
    for i in 1..ts.len() {
        let (a, b) = (values[i - 1], values[i]);
        if a < 0.0 && b >= 0.0 {
            return Some(ts[i - 1] + (ts[i] - ts[i - 1]) * (-a) / (b - a));
        }
    }
    None
}

pub fn indicator_grid(
    s: &LayerStack,
    trunc: usize,
    pair: &QuadraturePairSpec,
    z_grid: &[f64],
    t_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<IndicatorGrid, IndicatorError> {
    let overlaps = pair_overlaps(s, trunc, pair, z_grid, quad)?;
    let mut values = Vec::with_capacity(z_grid.len());
    let mut contour = Vec::with_capacity(z_grid.len());
    let mut nonmonotone = Vec::new();
    for (iz, o) in overlaps.iter().enumerate() {
        let row = t_grid
            .iter()
            .map(|&t| o.normalized_indicator(pair, t))
            .collect::<Result<Vec<f64>, _>>()?;
        for it in 1..row.len() {
            if row[it] < row[it - 1] {
                nonmonotone.push((iz, it));
            }
        }
        contour.push(zero_crossing(t_grid, &row));
        values.push(row);
    }
    Ok(IndicatorGrid {
        z_grid: z_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        values,
        contour,
        nonmonotone,
    })
}
