//! Modal bases of the four regions.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{kz_branch, HarmonicBasis, PlaneWaveContext, Polarization};
use crate::material::{Material, ModulatedLayerSpec};
use crate::units::vacuum_wavenumber;

type C = Complex64;

/// Eigen-decomposition of the modulated-layer wave operator
/// K = diag(k0_l²)·T_ε − k∥² I, where T_ε is the Toeplitz matrix of ε̂_{l−m}.
///
/// The same operator governs E_y (s) and E_x (p). Columns of `mixing` are the
/// harmonic contents of the modes, ordered so that at δε = 0 mode m is
/// harmonic m.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetLayerModes {
    pub q2: Vec<C>,
    /// Eigenvalues of diag(k0_l²)·T_ε, i.e. q² + k∥², kept separately because
    /// recovering them from q² cancels catastrophically when |ω_l| is tiny.
    pub lambda: Vec<f64>,
    pub mixing: DMatrix<C>,
    /// Exact inverse of `mixing`, available in closed form from the
    /// orthogonality of the symmetric eigenvectors.
    pub mixing_inv: DMatrix<C>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModeError {
    #[error("harmonic at zero frequency (l = {0}) cannot carry a mode")]
    ZeroFrequencyHarmonic(i32),
    #[error("vanishing propagation constant at k∥ = {kpar} 1/nm (mode {mode})")]
    DegenerateMode { kpar: f64, mode: usize },
}

/// Modes of one region: u = W(a⁺e^{iq(z−z_b)} + a⁻e^{−iq(z−z_t)}),
/// second tangential field Y(a⁺… − a⁻…), and for p the normal component
/// E_z = EZ(a⁺… − a⁻…).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionModes {
    pub q: Vec<C>,
    pub w: DMatrix<C>,
    pub y: DMatrix<C>,
    pub ez: DMatrix<C>,
    pub w_inv: DMatrix<C>,
    pub y_inv: DMatrix<C>,
}

/// Diagonalises K through the symmetric similar matrix D^{1/2} T D^{1/2}.
pub fn layer_mode_decomposition(
    layer: &ModulatedLayerSpec,
    ctx: &PlaneWaveContext,
    basis: &HarmonicBasis,
) -> Result<FloquetLayerModes, ModeError> {
    let n = basis.len();
    let mut sqrt_d = vec![0.0; n];
    for (i, l) in basis.orders().enumerate() {
        let w = basis.energy(l);
        if w == 0.0 {
            return Err(ModeError::ZeroFrequencyHarmonic(l));
        }
        sqrt_d[i] = vacuum_wavenumber(w).abs();
    }
    let off = 0.5 * layer.delta_eps;
    let sym = DMatrix::<f64>::from_fn(n, n, |i, j| {
        let t = if i == j {
            layer.eps_static
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            0.0
        };
        sqrt_d[i] * t * sqrt_d[j]
    });
    let eig = SymmetricEigen::new(sym);
    let order = harmonic_order(&eig.eigenvectors);
    let k2 = ctx.kpar * ctx.kpar;
    let mut q2 = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut mixing = DMatrix::<C>::zeros(n, n);
    let mut mixing_inv = DMatrix::<C>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        lambda.push(eig.eigenvalues[src]);
        q2.push(C::new(eig.eigenvalues[src] - k2, 0.0));
        let v = eig.eigenvectors.column(src);
        // fix the sign so the dominant entry is positive
        let (imax, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        let sign = v[imax].signum();
        let mut norm = 0.0;
        for i in 0..n {
            let x = sqrt_d[i] * v[i] * sign;
            mixing[(i, col)] = C::new(x, 0.0);
            norm += x * x;
        }
        let norm = norm.sqrt();
        for i in 0..n {
            mixing[(i, col)] /= norm;
            mixing_inv[(col, i)] = C::new(norm * sign * v[i] / sqrt_d[i], 0.0);
        }
    }
    Ok(FloquetLayerModes {
        q2,
        lambda,
        mixing,
        mixing_inv,
    })
}

/// Column permutation assigning each eigenvector to its dominant harmonic,
/// falling back to eigenvalue order when two vectors claim the same one.
fn harmonic_order(vecs: &DMatrix<f64>) -> Vec<usize> {
    let n = vecs.ncols();
    let mut slot = vec![usize::MAX; n];
    for c in 0..n {
        let col = vecs.column(c);
        let (imax, _) = col.iter().enumerate().fold((0, -1.0), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        if slot[imax] != usize::MAX {
            return (0..n).collect();
        }
        slot[imax] = c;
    }
    slot
}

/// √q² with Im q ≥ 0; a real root follows the sign of its dominant
/// harmonic's frequency, matching `kz_branch` in the neighbouring media.
fn propagation_constant(q2: C, energy: f64) -> C {
    let mut q = q2.sqrt();
    if q.im < 0.0 {
        q = -q;
    }
    if q.im == 0.0 && energy < 0.0 {
        q = -q;
    }
    q
}

impl RegionModes {
    /// Modes of a homogeneous, possibly dispersive, medium: one plane wave per harmonic.
    pub fn homogeneous(material: &Material, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<Self, ModeError> {
        let n = basis.len();
        let mut q = Vec::with_capacity(n);
        let mut y = DMatrix::<C>::zeros(n, n);
        let mut ez = DMatrix::<C>::zeros(n, n);
        let mut y_inv = DMatrix::<C>::zeros(n, n);
        for (i, l) in basis.orders().enumerate() {
            let w = basis.energy(l);
            let eps = material.permittivity(w);
            let kz = kz_branch(eps, w, ctx.kpar);
            if kz == C::new(0.0, 0.0) {
                return Err(ModeError::DegenerateMode { kpar: ctx.kpar, mode: i });
            }
            match ctx.pol {
                Polarization::S => y[(i, i)] = C::i() * kz,
                Polarization::P => {
                    y[(i, i)] = eps / kz;
                    ez[(i, i)] = -ctx.kpar / kz;
                }
            }
            y_inv[(i, i)] = C::new(1.0, 0.0) / y[(i, i)];
            q.push(kz);
        }
        Ok(RegionModes {
            q,
            w: DMatrix::identity(n, n),
            y,
            ez,
            w_inv: DMatrix::identity(n, n),
            y_inv,
        })
    }

    /// Coupled-harmonic modes of the modulated layer.
    pub fn modulated(layer: &ModulatedLayerSpec, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> Result<Self, ModeError> {
        let modes = layer_mode_decomposition(layer, ctx, basis)?;
        let n = basis.len();
        let q: Vec<C> = modes
            .q2
            .iter()
            .enumerate()
            .map(|(j, &x)| propagation_constant(x, basis.energy(basis.order(j))))
            .collect();
        if let Some(m) = q.iter().position(|x| *x == C::new(0.0, 0.0)) {
            return Err(ModeError::DegenerateMode { kpar: ctx.kpar, mode: m });
        }
        let w = modes.mixing;
        let w_inv = modes.mixing_inv;
        let w_over_q = DMatrix::<C>::from_fn(n, n, |i, j| w[(i, j)] / q[j]);
        let (y, ez, y_inv) = match ctx.pol {
            Polarization::S => (
                DMatrix::<C>::from_fn(n, n, |i, j| w[(i, j)] * C::i() * q[j]),
                DMatrix::zeros(n, n),
                DMatrix::<C>::from_fn(n, n, |i, j| w_inv[(i, j)] / (C::i() * q[i])),
            ),
            Polarization::P => {
                // Y = T_ε W q⁻¹ with tridiagonal T_ε
                let off = 0.5 * layer.delta_eps;
                let y = DMatrix::<C>::from_fn(n, n, |i, j| {
                    let mut acc = w_over_q[(i, j)] * layer.eps_static;
                    if i > 0 {
                        acc += w_over_q[(i - 1, j)] * off;
                    }
                    if i + 1 < n {
                        acc += w_over_q[(i + 1, j)] * off;
                    }
                    acc
                });
                // T_ε W = D⁻¹ W (q² + k∥²), so Y⁻¹ = q (q² + k∥²)⁻¹ W⁻¹ D
                let d: Vec<f64> = basis.orders().map(|l| vacuum_wavenumber(basis.energy(l)).powi(2)).collect();
                let y_inv = DMatrix::<C>::from_fn(n, n, |i, j| w_inv[(i, j)] * d[j] * q[i] / modes.lambda[i]);
                (y, w_over_q * C::new(-ctx.kpar, 0.0), y_inv)
            }
        };
        Ok(RegionModes { q, w, y, ez, w_inv, y_inv })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}
