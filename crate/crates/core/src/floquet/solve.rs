//! Whole-stack solve: modes, interface matching, and internal fields.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::modes::{ModeError, RegionModes};
use super::smatrix::{redheffer_star, SMatrix, SingularMatrix};
use super::{HarmonicBasis, PlaneWaveContext, Polarization};
use crate::stack::{LayerStack, RegionId, StackError};

type C = Complex64;

/// Condition-number limit above which transfer matrices are abandoned.
const TRANSFER_CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error("mode construction failed at ω = {omega} meV, k∥ = {kpar} 1/nm: {source}")]
    Modes { omega: f64, kpar: f64, source: ModeError },
    #[error("{source} at ω = {omega} meV, k∥ = {kpar} 1/nm")]
    Singular { omega: f64, kpar: f64, source: SingularMatrix },
}

/// How the global scattering matrix was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    /// Product of 2N×2N transfer matrices, converted to S at the end.
    Transfer,
    /// Redheffer cascade of per-interface scattering matrices.
    Cascade,
}

/// Up- and down-going modal amplitudes in one region. `plus` is referenced
/// at the bottom of the region and `minus` at its top (both at the surface
/// for a half-space).
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitudes {
    pub plus: DVector<C>,
    pub minus: DVector<C>,
}

/// Modal amplitudes of the layer and gap for every unit excitation.
///
/// Column j < N is a unit up-going wave from body 2 at harmonic j, column
/// N + j a unit down-going wave from body 1. Up-going amplitudes are
/// referenced at the bottom of their region, down-going ones at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalAmplitudes {
    pub layer_plus: DMatrix<C>,
    pub layer_minus: DMatrix<C>,
    pub gap_plus: DMatrix<C>,
    pub gap_minus: DMatrix<C>,
}

impl InternalAmplitudes {
    /// Amplitudes in the layer or gap for excitation column `col`.
    pub fn column(&self, region: RegionId, col: usize) -> Option<Amplitudes> {
        let (p, m) = match region {
            RegionId::ModLayer => (&self.layer_plus, &self.layer_minus),
            RegionId::Gap => (&self.gap_plus, &self.gap_minus),
            _ => return None,
        };
        Some(Amplitudes {
            plus: p.column(col).into_owned(),
            minus: m.column(col).into_owned(),
        })
    }
}

/// Solution of the coupled-harmonic boundary-value problem at fixed
/// (ω, k∥, polarization).
#[derive(Debug, Clone)]
pub struct StackSolution {
    pub basis: HarmonicBasis,
    pub ctx: PlaneWaveContext,
    /// Region modes, bottom to top: body 2, modulated layer, gap, body 1.
    pub regions: [RegionModes; 4],
    /// Global scattering matrix between body 2 (bottom) and body 1 (top).
    pub s: SMatrix,
    pub path: SolvePath,
    mod_thickness: f64,
    gap: f64,
}

fn phases(q: &[C], h: f64) -> Vec<C> {
    q.iter().map(|&x| (C::i() * x * h).exp()).collect()
}

fn region_index(r: RegionId) -> usize {
    match r {
        RegionId::Body2 => 0,
        RegionId::ModLayer => 1,
        RegionId::Gap => 2,
        RegionId::Body1 => 3,
    }
}

/// Solves the stack for one (ω, k∥, polarization).
///
/// A vanishing propagation constant is retried once with k∥ jittered by a
/// relative 10⁻⁹.
pub fn stack_scattering(s: &LayerStack, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<StackSolution, SolveError> {
    s.validate()?;
    solve_unchecked(s, ctx, basis)
}

/// [`stack_scattering`] without re-validating the stack, for hot loops over
/// an already validated configuration.
pub fn solve_for_flux(s: &LayerStack, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<StackSolution, SolveError> {
    solve_unchecked(s, ctx, basis)
}

pub(crate) fn solve_unchecked(s: &LayerStack, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<StackSolution, SolveError> {
    match build(s, ctx, basis) {
        Err(SolveError::Modes {
            source: ModeError::DegenerateMode { .. },
            ..
        }) => {
            let jittered = PlaneWaveContext {
                kpar: ctx.kpar * (1.0 + 1e-9) + 1e-15,
                pol: ctx.pol,
            };
            build(s, &jittered, basis)
        }
        other => other,
    }
}

fn build(s: &LayerStack, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<StackSolution, SolveError> {
    let omega = basis.output_energy;
    let kpar = ctx.kpar;
    let mode_err = |source| SolveError::Modes { omega, kpar, source };
    let sing = |source| SolveError::Singular { omega, kpar, source };
    let body2 = RegionModes::homogeneous(&s.bottom_half_space, ctx, basis).map_err(mode_err)?;
    let layer = RegionModes::modulated(&s.modulation(), ctx, basis).map_err(mode_err)?;
    let gap = RegionModes::homogeneous(s.gap_material(), ctx, basis).map_err(mode_err)?;
    let body1 = RegionModes::homogeneous(&s.top_half_space, ctx, basis).map_err(mode_err)?;
    let t = s.mod_thickness();
    let d = s.gap();

    let growth = layer.q.iter().map(|q| q.im.abs()).fold(0.0, f64::max) * t
        + gap.q.iter().map(|q| q.im.abs()).fold(0.0, f64::max) * d;
    let condition = (2.0 * growth).exp();
    let (global, path) = if condition <= TRANSFER_CONDITION_LIMIT {
        let m = transfer_product(&[&body2, &layer, &gap, &body1], &[t, d]);
        (transfer_to_s(&m).map_err(sing)?, SolvePath::Transfer)
    } else {
        (scattering_direct(&[&body2, &layer, &gap, &body1], &[t, d]).map_err(sing)?.0, SolvePath::Cascade)
    };
    Ok(StackSolution {
        basis: *basis,
        ctx: *ctx,
        regions: [body2, layer, gap, body1],
        s: global,
        path,
        mod_thickness: t,
        gap: d,
    })
}

/// Transfer matrix from body-2 surface amplitudes to body-1 surface amplitudes.
///
/// Uses Ψ_b⁻¹Ψ_a = ½[[P + R, P − R], [P − R, P + R]] with P = W_b⁻¹W_a,
/// R = Y_b⁻¹Y_a and Ψ = [[W, W], [Y, −Y]]. Only the layer has a full modal
/// matrix, so the two outer interfaces reduce to row and column scalings.
fn transfer_product(regions: &[&RegionModes; 4], thick: &[f64; 2]) -> DMatrix<C> {
    let [body2, layer, gap, body1] = *regions;
    let n = body2.len();
    let half = C::new(0.5, 0.0);
    // body 2 → layer: P = W_l⁻¹, R = Y_l⁻¹ diag(Y_2)
    let xl = phases(&layer.q, thick[0]);
    let mut m = DMatrix::<C>::zeros(2 * n, 2 * n);
    for i in 0..n {
        let (up, down) = (xl[i], C::new(1.0, 0.0) / xl[i]);
        for j in 0..n {
            let p = layer.w_inv[(i, j)];
            let r = layer.y_inv[(i, j)] * body2.y[(j, j)];
            let (a, b) = (half * (p + r), half * (p - r));
            m[(i, j)] = a * up;
            m[(i, n + j)] = b * up;
            m[(n + i, j)] = b * down;
            m[(n + i, n + j)] = a * down;
        }
    }
    // layer → gap: P = W_l, R = diag(Y_g)⁻¹ Y_l
    let mut plus = DMatrix::<C>::zeros(n, n);
    let mut minus = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = layer.w[(i, j)];
            let r = gap.y_inv[(i, i)] * layer.y[(i, j)];
            plus[(i, j)] = half * (p + r);
            minus[(i, j)] = half * (p - r);
        }
    }
    let top = m.rows(0, n).into_owned();
    let bot = m.rows(n, n).into_owned();
    let upper = &plus * &top + &minus * &bot;
    let lower = &minus * &top + &plus * &bot;
    // gap propagation, then gap → body 1 (both diagonal)
    let xg = phases(&gap.q, thick[1]);
    for i in 0..n {
        let (up, down) = (xg[i], C::new(1.0, 0.0) / xg[i]);
        let r = body1.y_inv[(i, i)] * gap.y[(i, i)];
        let (a, b) = (half * (1.0 + r), half * (1.0 - r));
        for j in 0..2 * n {
            let (u, d) = (upper[(i, j)] * up, lower[(i, j)] * down);
            m[(i, j)] = a * u + b * d;
            m[(n + i, j)] = b * u + a * d;
        }
    }
    m
}

/// Global S-matrix from one linear solve for the layer amplitudes, with
/// up-going waves referenced at the bottom of each region and down-going
/// waves at the top so that only decaying exponentials appear.
///
/// Gap and body 1 are folded into a diagonal surface admittance Z seen from
/// the layer top; body 2 enters through its own admittance.
fn scattering_direct(regions: &[&RegionModes; 4], thick: &[f64; 2]) -> Result<(SMatrix, InternalAmplitudes), SingularMatrix> {
    let [body2, layer, gap, body1] = *regions;
    let n = body2.len();
    let one = C::new(1.0, 0.0);
    let xl = phases(&layer.q, thick[0]);
    let xg = phases(&gap.q, thick[1]);
    // gap/body-1 interface coefficients per harmonic
    let mut z = vec![C::new(0.0, 0.0); n];
    let mut a = vec![C::new(0.0, 0.0); n];
    let mut rho_in = vec![C::new(0.0, 0.0); n];
    let mut tau_in = vec![C::new(0.0, 0.0); n];
    let mut tau_out = vec![C::new(0.0, 0.0); n];
    for i in 0..n {
        let (yg, y1) = (gap.y[(i, i)], body1.y[(i, i)]);
        let den = yg + y1;
        let rho = (yg - y1) / den;
        rho_in[i] = (y1 - yg) / den;
        tau_in[i] = 2.0 * y1 / den;
        tau_out[i] = 2.0 * yg / den;
        let r2 = rho * xg[i] * xg[i];
        a[i] = one + r2;
        z[i] = yg * (one - r2) / a[i];
    }
    let y2: Vec<C> = (0..n).map(|i| body2.y[(i, i)]).collect();
    let mut lhs = DMatrix::<C>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (w, y) = (layer.w[(i, j)], layer.y[(i, j)]);
            lhs[(i, j)] = y + y2[i] * w;
            lhs[(i, n + j)] = (y2[i] * w - y) * xl[j];
            lhs[(n + i, j)] = (y - z[i] * w) * xl[j];
            lhs[(n + i, n + j)] = -(y + z[i] * w);
        }
    }
    let mut rhs = DMatrix::<C>::zeros(2 * n, 2 * n);
    for i in 0..n {
        rhs[(i, i)] = 2.0 * y2[i];
        rhs[(n + i, n + i)] = -xg[i] * tau_in[i] * (gap.y[(i, i)] + z[i]);
    }
    let amp = lhs.lu().solve(&rhs).ok_or(SingularMatrix("solving the scattering system"))?;
    // tangential u at the layer bottom and top for every excitation
    let mut u_bot = DMatrix::<C>::zeros(n, 2 * n);
    let mut u_top = DMatrix::<C>::zeros(n, 2 * n);
    for c in 0..2 * n {
        for m in 0..n {
            let (ap, am) = (amp[(m, c)], amp[(n + m, c)]);
            let (bot, top) = (ap + xl[m] * am, xl[m] * ap + am);
            for i in 0..n {
                let w = layer.w[(i, m)];
                u_bot[(i, c)] += w * bot;
                u_top[(i, c)] += w * top;
            }
        }
    }
    let mut out = SMatrix {
        s11: u_bot.columns(0, n).into_owned(),
        s12: u_bot.columns(n, n).into_owned(),
        s21: DMatrix::zeros(n, n),
        s22: DMatrix::zeros(n, n),
    };
    for i in 0..n {
        out.s11[(i, i)] -= one;
        let f = tau_out[i] * xg[i] / a[i];
        for j in 0..n {
            out.s21[(i, j)] = f * u_top[(i, j)];
            out.s22[(i, j)] = f * u_top[(i, n + j)];
        }
        out.s22[(i, i)] += rho_in[i] - f * xg[i] * tau_in[i];
    }
    // gap amplitudes: g⁺ from the layer-top field, g⁻ from the body-1 interface
    let mut gap_plus = DMatrix::<C>::zeros(n, 2 * n);
    let mut gap_minus = DMatrix::<C>::zeros(n, 2 * n);
    for i in 0..n {
        let rho = (gap.y[(i, i)] - body1.y[(i, i)]) / (gap.y[(i, i)] + body1.y[(i, i)]);
        for c in 0..2 * n {
            let source = if c == n + i { xg[i] * tau_in[i] } else { C::new(0.0, 0.0) };
            let gp = (u_top[(i, c)] - source) / a[i];
            gap_plus[(i, c)] = gp;
            gap_minus[(i, c)] = rho * xg[i] * gp + if c == n + i { tau_in[i] } else { C::new(0.0, 0.0) };
        }
    }
    let internal = InternalAmplitudes {
        layer_plus: amp.rows(0, n).into_owned(),
        layer_minus: amp.rows(n, n).into_owned(),
        gap_plus,
        gap_minus,
    };
    Ok((out, internal))
}

/// [b_top⁺; a_top⁻] = M [a_bot⁺; b_bot⁻] rearranged into scattering form.
fn transfer_to_s(m: &DMatrix<C>) -> Result<SMatrix, SingularMatrix> {
    let n = m.nrows() / 2;
    let m11 = m.view((0, 0), (n, n));
    let m12 = m.view((0, n), (n, n));
    let m21 = m.view((n, 0), (n, n));
    let m22 = m.view((n, n), (n, n));
    let m22_inv = m22.into_owned().try_inverse().ok_or(SingularMatrix("converting a transfer matrix"))?;
    let s11 = -&m22_inv * m21;
    let s21 = m11 + m12 * &s11;
    let s22 = m12 * &m22_inv;
    Ok(SMatrix {
        s11,
        s12: m22_inv,
        s21,
        s22,
    })
}

impl StackSolution {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn mod_thickness(&self) -> f64 {
        self.mod_thickness
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn modes(&self, region: RegionId) -> &RegionModes {
        &self.regions[region_index(region)]
    }

    /// Bottom and top planes of a region (equal for half-spaces).
    pub fn region_planes(&self, region: RegionId) -> (f64, f64) {
        match region {
            RegionId::Body2 => (-self.mod_thickness, -self.mod_thickness),
            RegionId::ModLayer => (-self.mod_thickness, 0.0),
            RegionId::Gap => (0.0, self.gap),
            RegionId::Body1 => (self.gap, self.gap),
        }
    }

    pub fn region_of(&self, z: f64) -> RegionId {
        if z > self.gap {
            RegionId::Body1
        } else if z > 0.0 {
            RegionId::Gap
        } else if z > -self.mod_thickness {
            RegionId::ModLayer
        } else {
            RegionId::Body2
        }
    }

    /// Layer and gap amplitudes for all unit excitations, from a single
    /// stable linear solve.
    pub fn internal_amplitudes(&self) -> Result<InternalAmplitudes, SolveError> {
        let [b2, layer, gap, b1] = &self.regions;
        scattering_direct(&[b2, layer, gap, b1], &[self.mod_thickness, self.gap])
            .map(|(_, amps)| amps)
            .map_err(|source| SolveError::Singular {
                omega: self.basis.output_energy,
                kpar: self.ctx.kpar,
                source,
            })
    }

    /// Interface scattering matrices at z = −t, 0 and d.
    fn interfaces(&self) -> Result<[SMatrix; 3], SingularMatrix> {
        let [b2, layer, gap, b1] = &self.regions;
        Ok([SMatrix::interface(b2, layer)?, SMatrix::interface(layer, gap)?, SMatrix::interface(gap, b1)?])
    }

    /// Outgoing amplitudes (down into body 2, up into body 1) for incoming
    /// amplitudes `c_bot` (up-going in body 2) and `c_top` (down-going in body 1).
    pub fn outgoing(&self, c_bot: &DVector<C>, c_top: &DVector<C>) -> (DVector<C>, DVector<C>) {
        (&self.s.s11 * c_bot + &self.s.s12 * c_top, &self.s.s21 * c_bot + &self.s.s22 * c_top)
    }

    /// Modal amplitudes in `region` for the given incoming waves.
    pub fn amplitudes(&self, region: RegionId, c_bot: &DVector<C>, c_top: &DVector<C>) -> Result<Amplitudes, SolveError> {
        let sing = |source| SolveError::Singular {
            omega: self.basis.output_energy,
            kpar: self.ctx.kpar,
            source,
        };
        match region {
            RegionId::Body2 => Ok(Amplitudes {
                plus: c_bot.clone(),
                minus: &self.s.s11 * c_bot + &self.s.s12 * c_top,
            }),
            RegionId::Body1 => Ok(Amplitudes {
                plus: &self.s.s21 * c_bot + &self.s.s22 * c_top,
                minus: c_top.clone(),
            }),
            RegionId::ModLayer | RegionId::Gap => {
                let [i0, i1, i2] = &self.interfaces().map_err(sing)?;
                let xm = phases(&self.regions[1].q, self.mod_thickness);
                let xg = phases(&self.regions[2].q, self.gap);
                // lower: everything below the region's bottom plane;
                // above: everything above its top plane
                let (lower, above, x) = if region == RegionId::ModLayer {
                    let above = redheffer_star(i1, &i2.clone().after_propagate(&xg)).map_err(sing)?;
                    (i0.clone(), above, xm)
                } else {
                    let lower = redheffer_star(&i0.clone().then_propagate(&xm), i1).map_err(sing)?;
                    (lower, i2.clone(), xg)
                };
                let upper = above.clone().after_propagate(&x);
                let n = self.dim();
                let id = DMatrix::<C>::identity(n, n);
                let rhs = &lower.s21 * c_bot + &lower.s22 * (&upper.s12 * c_top);
                let plus = (&id - &lower.s22 * &upper.s11)
                    .lu()
                    .solve(&rhs)
                    .ok_or(sing(SingularMatrix("resolving internal fields")))?;
                let plus_top = DVector::from_fn(n, |i, _| plus[i] * x[i]);
                let minus = &above.s11 * plus_top + &above.s12 * c_top;
                Ok(Amplitudes { plus, minus })
            }
        }
    }

    /// Electric field (x, y, z) of every harmonic at height `z` for modal
    /// amplitudes of the region containing `z`.
    pub fn field(&self, region: RegionId, amps: &Amplitudes, z: f64) -> Vec<[C; 3]> {
        let m = self.modes(region);
        let (zb, zt) = self.region_planes(region);
        let n = self.dim();
        let mut sum = DVector::<C>::zeros(n);
        let mut diff = DVector::<C>::zeros(n);
        for i in 0..n {
            let up = amps.plus[i] * (C::i() * m.q[i] * (z - zb)).exp();
            let down = amps.minus[i] * (-C::i() * m.q[i] * (z - zt)).exp();
            sum[i] = up + down;
            diff[i] = up - down;
        }
        let u = &m.w * sum;
        match self.ctx.pol {
            Polarization::S => u.iter().map(|&v| [C::new(0.0, 0.0), v, C::new(0.0, 0.0)]).collect(),
            Polarization::P => {
                let ez = &m.ez * diff;
                u.iter().zip(ez.iter()).map(|(&x, &z)| [x, C::new(0.0, 0.0), z]).collect()
            }
        }
    }

    /// Tangential field vector (u, second component) per harmonic, for
    /// boundary-condition checks.
    pub fn tangential(&self, region: RegionId, amps: &Amplitudes, z: f64) -> (DVector<C>, DVector<C>) {
        let m = self.modes(region);
        let (zb, zt) = self.region_planes(region);
        let n = self.dim();
        let mut sum = DVector::<C>::zeros(n);
        let mut diff = DVector::<C>::zeros(n);
        for i in 0..n {
            let up = amps.plus[i] * (C::i() * m.q[i] * (z - zb)).exp();
            let down = amps.minus[i] * (-C::i() * m.q[i] * (z - zt)).exp();
            sum[i] = up + down;
            diff[i] = up - down;
        }
        (&m.w * sum, &m.y * diff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{LorentzParams, Material, ModulatedLayerSpec};

    fn default_stack(de: f64) -> LayerStack {
        LayerStack::paper_default(92.3).with_modulation(ModulatedLayerSpec {
            eps_static: 4.0,
            delta_eps: de,
            mod_freq: 92.3,
        })
    }

    fn unit(n: usize, i: usize) -> DVector<C> {
        let mut v = DVector::zeros(n);
        v[i] = C::new(1.0, 0.0);
        v
    }

    fn max_abs(m: &DMatrix<C>) -> f64 {
        m.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn paths_agree_where_both_apply() {
        let s = default_stack(0.4);
        let basis = HarmonicBasis::new(92.3, 47.1, 2);
        for pol in Polarization::BOTH {
            let ctx = PlaneWaveContext { kpar: 0.05, pol };
            let sol = stack_scattering(&s, &ctx, &basis).unwrap();
            assert_eq!(sol.path, SolvePath::Transfer);
            let [i0, i1, i2] = &sol.interfaces().unwrap();
            let lower = redheffer_star(&i0.clone().then_propagate(&phases(&sol.regions[1].q, 22.0)), i1).unwrap();
            let cascade = redheffer_star(&lower, &i2.clone().after_propagate(&phases(&sol.regions[2].q, 10.0))).unwrap();
            let scale = max_abs(&sol.s.s21).max(max_abs(&sol.s.s11));
            for (a, b) in [(&sol.s.s11, &cascade.s11), (&sol.s.s12, &cascade.s12), (&sol.s.s21, &cascade.s21), (&sol.s.s22, &cascade.s22)] {
                assert!(max_abs(&(a - b)) < 1e-9 * scale, "{pol:?}");
            }
        }
    }

    #[test]
    fn direct_scattering_matches_redheffer_cascade() {
        let s = default_stack(0.4);
        let basis = HarmonicBasis::new(92.3, 47.1, 3);
        for pol in Polarization::BOTH {
            for kpar in [0.03, 0.4, 2.5] {
                let sol = stack_scattering(&s, &PlaneWaveContext { kpar, pol }, &basis).unwrap();
                let r: Vec<&RegionModes> = sol.regions.iter().collect();
                let direct = scattering_direct(&[r[0], r[1], r[2], r[3]], &[22.0, 10.0]).unwrap().0;
                let [i0, i1, i2] = &sol.interfaces().unwrap();
                let lower = redheffer_star(&i0.clone().then_propagate(&phases(&sol.regions[1].q, 22.0)), i1).unwrap();
                let cascade = redheffer_star(&lower, &i2.clone().after_propagate(&phases(&sol.regions[2].q, 10.0))).unwrap();
                for (a, b) in [(&direct.s11, &cascade.s11), (&direct.s12, &cascade.s12), (&direct.s21, &cascade.s21), (&direct.s22, &cascade.s22)] {
                    let scale = max_abs(b).max(1e-300);
                    assert!(max_abs(&(a - b)) < 1e-9 * scale, "{pol:?} k={kpar}: {}", max_abs(&(a - b)) / scale);
                }
            }
        }
    }

    #[test]
    fn internal_amplitudes_match_cascade_split() {
        let s = default_stack(0.4);
        let basis = HarmonicBasis::new(92.3, 46.2, 2);
        for pol in Polarization::BOTH {
            for kpar in [0.02, 0.6] {
                let sol = stack_scattering(&s, &PlaneWaveContext { kpar, pol }, &basis).unwrap();
                let fast = sol.internal_amplitudes().unwrap();
                let n = sol.dim();
                for col in [1, n + 3] {
                    let (c_bot, c_top) = if col < n { (unit(n, col), DVector::zeros(n)) } else { (DVector::zeros(n), unit(n, col - n)) };
                    for region in [RegionId::ModLayer, RegionId::Gap] {
                        let slow = sol.amplitudes(region, &c_bot, &c_top).unwrap();
                        let f = fast.column(region, col).unwrap();
                        let scale = slow.plus.iter().chain(slow.minus.iter()).map(|x| x.norm()).fold(0.0, f64::max);
                        let err = (&f.plus - &slow.plus).iter().chain((&f.minus - &slow.minus).iter()).map(|x| x.norm()).fold(0.0, f64::max);
                        assert!(err <= 1e-9 * scale, "{pol:?} k={kpar} col={col} {region:?}: {err} / {scale}");
                    }
                }
            }
        }
    }

    #[test]
    fn large_kpar_uses_cascade() {
        let s = default_stack(0.4);
        let basis = HarmonicBasis::new(92.3, 47.1, 3);
        let sol = stack_scattering(&s, &PlaneWaveContext { kpar: 1.5, pol: Polarization::P }, &basis).unwrap();
        assert_eq!(sol.path, SolvePath::Cascade);
        assert!(sol.s.s21.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn unmodulated_stack_is_harmonic_diagonal() {
        let s = default_stack(0.0);
        let basis = HarmonicBasis::new(92.3, 47.1, 3);
        for kpar in [0.01, 0.3] {
            let sol = stack_scattering(&s, &PlaneWaveContext { kpar, pol: Polarization::P }, &basis).unwrap();
            for blk in [&sol.s.s11, &sol.s.s12, &sol.s.s21, &sol.s.s22] {
                for i in 0..7 {
                    for j in 0..7 {
                        if i != j {
                            assert!(blk[(i, j)].norm() < 1e-12 * (1.0 + blk[(i, i)].norm()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_residuals_vanish() {
        let s = default_stack(0.4);
        let basis = HarmonicBasis::new(92.3, 46.2, 3);
        for (kpar, pol) in [(0.02, Polarization::S), (0.02, Polarization::P), (0.8, Polarization::P), (0.8, Polarization::S)] {
            let sol = stack_scattering(&s, &PlaneWaveContext { kpar, pol }, &basis).unwrap();
            let n = sol.dim();
            let (c_bot, c_top) = (unit(n, 2), unit(n, 4) * C::new(0.3, -0.2));
            let amps: Vec<Amplitudes> = [RegionId::Body2, RegionId::ModLayer, RegionId::Gap, RegionId::Body1]
                .iter()
                .map(|&r| sol.amplitudes(r, &c_bot, &c_top).unwrap())
                .collect();
            let regions = [RegionId::Body2, RegionId::ModLayer, RegionId::Gap, RegionId::Body1];
            for (k, z) in [-22.0, 0.0, 10.0].into_iter().enumerate() {
                let (ua, ya) = sol.tangential(regions[k], &amps[k], z);
                let (ub, yb) = sol.tangential(regions[k + 1], &amps[k + 1], z);
                let su = ua.iter().chain(ub.iter()).map(|x| x.norm()).fold(0.0, f64::max);
                let sy = ya.iter().chain(yb.iter()).map(|x| x.norm()).fold(0.0, f64::max);
                assert!((ua - ub).iter().all(|x| x.norm() <= 1e-10 * su), "u residual at z={z}, k={kpar}");
                assert!((ya - yb).iter().all(|x| x.norm() <= 1e-10 * sy), "y residual at z={z}, k={kpar}");
            }
        }
    }

    #[test]
    fn single_interface_matches_fresnel() {
        // vacuum everywhere above a quartz half-space: the stack collapses to one interface
        let quartz = Material::Lorentz(LorentzParams::QUARTZ);
        let s = LayerStack::new(
            Material::VACUUM,
            10.0,
            ModulatedLayerSpec {
                eps_static: 1.0,
                delta_eps: 0.0,
                mod_freq: 92.0,
            },
            22.0,
            quartz,
        );
        let omega = 49.5;
        let basis = HarmonicBasis::new(92.0, omega, 1);
        let kpar = 0.3 * crate::units::vacuum_wavenumber(omega);
        let eps = quartz.permittivity(omega);
        let k1 = super::super::kz_branch(C::new(1.0, 0.0), omega, kpar);
        let k2 = super::super::kz_branch(eps, omega, kpar);
        // reflection of a wave incident from the vacuum side, referenced at z = −t
        let shift = (C::i() * k1 * 2.0 * 32.0).exp();
        for pol in Polarization::BOTH {
            let sol = solve_unchecked(&s, &PlaneWaveContext { kpar, pol }, &basis).unwrap();
            let (r, t) = match pol {
                Polarization::S => ((k1 - k2) / (k1 + k2), 2.0 * k1 / (k1 + k2)),
                // E_x amplitudes: the H_y coefficient (εk1 − k2)/(εk1 + k2) with opposite sign
                Polarization::P => ((k2 - eps * k1) / (eps * k1 + k2), 2.0 * k2 / (eps * k1 + k2)),
            };
            let r_num = sol.s.s22[(1, 1)] / shift;
            assert!((r_num - r).norm() < 1e-12 * r.norm().max(1.0), "{pol:?}: {r_num} vs {r}");
            let t_num = sol.s.s12[(1, 1)] / (C::i() * k1 * 32.0).exp();
            assert!((t_num - t).norm() < 1e-12 * t.norm().max(1.0), "{pol:?}: {t_num} vs {t}");
        }
    }

    #[test]
    fn lossless_static_stack_conserves_energy() {
        let glass = Material::Constant(C::new(2.25, 0.0));
        let s = LayerStack {
            top_half_space: Material::VACUUM,
            inner_layers: vec![
                crate::stack::Layer {
                    material: Material::VACUUM,
                    thickness: 150.0,
                },
                crate::stack::Layer {
                    material: Material::Modulated(ModulatedLayerSpec {
                        eps_static: 4.0,
                        delta_eps: 0.0,
                        mod_freq: 92.0,
                    }),
                    thickness: 220.0,
                },
            ],
            bottom_half_space: glass,
        };
        let omega = 500.0;
        let basis = HarmonicBasis::new(92.0, omega, 1);
        let kpar = 0.4 * crate::units::vacuum_wavenumber(omega);
        let k1 = super::super::kz_branch(C::new(1.0, 0.0), omega, kpar);
        let k2 = super::super::kz_branch(glass.permittivity(omega), omega, kpar);
        for pol in Polarization::BOTH {
            let sol = solve_unchecked(&s, &PlaneWaveContext { kpar, pol }, &basis).unwrap();
            let r = sol.s.s22[(1, 1)];
            let t = sol.s.s12[(1, 1)];
            let ratio = match pol {
                Polarization::S => k2.re / k1.re,
                // Poynting flux of a p wave with E_x amplitude a: ∝ ε|a|²/k_z
                Polarization::P => (2.25 / k2.re) / (1.0 / k1.re),
            };
            let total = r.norm_sqr() + t.norm_sqr() * ratio;
            assert!((total - 1.0).abs() < 1e-10, "{pol:?}: {total}");
        }
    }
}
