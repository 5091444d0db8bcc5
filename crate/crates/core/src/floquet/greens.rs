//! Plane-wave (Weyl) amplitudes of the two-frequency electric Green's function.
//!
//! G solves ∇×∇×G − k0²ε G = δ with output energy ω (harmonic 0) in the
//! first slot and source energy ω_l in the second. For a source inside body α
//! every component factorises as
//!
//! G_ij(z, z') = A · e_i(z) · s_j · e^{ik_{z,α,l}|z' − z_α|},
//!
//! with `s` the source polarization vector and `e(z)` the harmonic-0 field of
//! the stack response. The bulk term of the source's own medium is added when
//! the observer shares the body and l = 0.

use nalgebra::DVector;
use num_complex::Complex64;

use super::solve::{SolveError, StackSolution};
use super::{HarmonicBasis, PlaneWaveContext, Polarization};
use crate::stack::{Body, LayerStack, RegionId};
use crate::units::vacuum_wavenumber;

type C = Complex64;

/// 3×3 complex matrix indexed [i][j] over (x, y, z).
pub type Dyad = [[C; 3]; 3];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error("source at z = {0} nm lies in a lossless region")]
    LosslessSource(f64),
    #[error("harmonic {0} is outside the retained basis")]
    HarmonicOutOfRange(i32),
    #[error("observation point z = {z} nm not allowed: {reason}")]
    BadObservation { z: f64, reason: &'static str },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Amplitude of the wave launched by a unit point source, c̃: i/(2k_z) for s
/// and i k_z /(2 k0² ε) for p.
pub fn source_coefficient(pol: Polarization, eps: C, omega: f64, kz: C) -> C {
    match pol {
        Polarization::S => C::i() / (2.0 * kz),
        Polarization::P => {
            let k0 = vacuum_wavenumber(omega);
            C::i() * kz / (2.0 * k0 * k0 * eps)
        }
    }
}

/// Polarization vector of a wave travelling up (`up = true`) or down with
/// unit tangential amplitude u.
pub fn wave_vector(pol: Polarization, kpar: f64, kz: C, up: bool) -> [C; 3] {
    let zero = C::new(0.0, 0.0);
    match pol {
        Polarization::S => [zero, C::new(1.0, 0.0), zero],
        Polarization::P => {
            let ez = C::new(kpar, 0.0) / kz;
            [C::new(1.0, 0.0), zero, if up { -ez } else { ez }]
        }
    }
}

/// Data describing the source side of the factorisation for body α and harmonic l.
#[derive(Debug, Clone, Copy)]
pub struct SourceSide {
    pub body: Body,
    pub l: i32,
    pub kz: C,
    pub coefficient: C,
    pub vector: [C; 3],
}

impl StackSolution {
    /// Source-side factors for a point source in `body` at harmonic `l`.
    pub fn source_side(&self, stack: &LayerStack, body: Body, l: i32) -> Result<SourceSide, GreenError> {
        let idx = self.basis.index(l).ok_or(GreenError::HarmonicOutOfRange(l))?;
        let region = body.region();
        let kz = self.modes(region).q[idx];
        let omega_l = self.basis.energy(l);
        let eps = stack.body(body).permittivity(omega_l);
        // body 1 radiates downward into the stack, body 2 upward
        let up = body == Body::Two;
        Ok(SourceSide {
            body,
            l,
            kz,
            coefficient: source_coefficient(self.ctx.pol, eps, omega_l, kz),
            vector: wave_vector(self.ctx.pol, self.ctx.kpar, kz, up),
        })
    }

    /// Incoming-wave vectors (c_bot, c_top) for a unit-amplitude wave at harmonic `l`.
    pub fn unit_excitation(&self, body: Body, l: i32) -> (DVector<C>, DVector<C>) {
        let n = self.dim();
        let mut v = DVector::<C>::zeros(n);
        if let Some(i) = self.basis.index(l) {
            v[i] = C::new(1.0, 0.0);
        }
        match body {
            Body::Two => (v, DVector::zeros(n)),
            Body::One => (DVector::zeros(n), v),
        }
    }

    /// Harmonic-0 electric field at `z` due to a unit incoming wave from `body` at harmonic `l`.
    pub fn response_field(&self, body: Body, l: i32, z: f64) -> Result<[C; 3], GreenError> {
        let region = self.region_of(z);
        let (c_bot, c_top) = self.unit_excitation(body, l);
        let amps = self.amplitudes(region, &c_bot, &c_top)?;
        // the incoming wave itself is part of the total field in the source body;
        // the Green's function needs only the scattered part there
        let amps = match (region, body) {
            (RegionId::Body1, Body::One) => super::solve::Amplitudes {
                plus: amps.plus,
                minus: DVector::zeros(self.dim()),
            },
            (RegionId::Body2, Body::Two) => super::solve::Amplitudes {
                plus: DVector::zeros(self.dim()),
                minus: amps.minus,
            },
            _ => amps,
        };
        let i0 = self.basis.index(0).expect("harmonic 0 is always retained");
        Ok(self.field(region, &amps, z)[i0])
    }

    /// Full 3×3 Green's dyad G(z_obs, z_src; ω, ω_l).
    pub fn green_dyad(&self, stack: &LayerStack, l: i32, z_obs: f64, z_src: f64) -> Result<Dyad, GreenError> {
        let body = match self.region_of(z_src) {
            RegionId::Body1 => Body::One,
            RegionId::Body2 => Body::Two,
            _ => return Err(GreenError::LosslessSource(z_src)),
        };
        if !stack.body(body).is_lossy() {
            return Err(GreenError::LosslessSource(z_src));
        }
        let src = self.source_side(stack, body, l)?;
        let obs = self.response_field(body, l, z_obs)?;
        let depth = (z_src - stack.body_surface(body)).abs();
        let amp = src.coefficient * (C::i() * src.kz * depth).exp();
        let mut g = [[C::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = amp * obs[i] * src.vector[j];
            }
        }
        if l == 0 && self.region_of(z_obs) == body.region() {
            let up = z_obs > z_src;
            let e = wave_vector(self.ctx.pol, self.ctx.kpar, src.kz, up);
            let direct = src.coefficient * (C::i() * src.kz * (z_obs - z_src).abs()).exp();
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += direct * e[i] * e[j];
                }
            }
        }
        Ok(g)
    }
}

/// One component G_ij of the (k∥, pol)-resolved Green's function.
#[allow(clippy::too_many_arguments)]
pub fn greens_planewave(
    s: &LayerStack,
    ctx: &PlaneWaveContext,
    basis: &HarmonicBasis,
    l: i32,
    z_obs: f64,
    z_src: f64,
    i: usize,
    j: usize,
) -> Result<C, GreenError> {
    let sol = super::stack_scattering(s, ctx, basis)?;
    Ok(sol.green_dyad(s, l, z_obs, z_src)?[i][j])
}
