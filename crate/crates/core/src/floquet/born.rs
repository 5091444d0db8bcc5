//! First Born approximation of the |l| = 1 conversion amplitudes.
//!
//! Works entirely with single-frequency static solutions of the stack
//! (modulated layer at ε_s), computed here by a separate 2×2 layer-matrix
//! recursion so that it can serve as an independent check of the coupled
//! solver. By reciprocity, the first-order amplitude of the harmonic-0 wave
//! reflected into body 1 for a unit wave incident from body 1 at harmonic l' is
//!
//! r^{(0←l')} = k0² (δε/2) c̃(ω) ∫_layer [ψ_x^ω ψ_x^{ω_l'} − ψ_z^ω ψ_z^{ω_l'}] dz
//!
//! for p (ψ_y products for s), where ψ^ω is the static field excited by a unit
//! down-going wave from body 1 and c̃ the point-source coefficient.

use num_complex::Complex64;

use super::{HarmonicBasis, PlaneWaveContext, Polarization};
use crate::stack::LayerStack;
use crate::units::vacuum_wavenumber;

type C = Complex64;

/// Born amplitudes for conversion from harmonics −1 and +1 into harmonic 0,
/// as reflection into body 1 of a wave incident from body 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornAmplitudes {
    pub from_minus: C,
    pub from_plus: C,
}

fn kz(eps: C, omega: f64, kpar: f64) -> C {
    let k0 = omega / crate::units::HBAR_C_MEV_NM;
    let mut w = (eps * k0 * k0 - kpar * kpar).sqrt();
    if w.im < 0.0 || (w.im == 0.0 && w.re * omega < 0.0) {
        w = -w;
    }
    w
}

/// Static field inside the modulated layer for a unit (E-tangential) wave
/// incident downward from body 1, expressed by its exponential amplitudes
/// u(z) = a e^{iqz} + b e^{−iqz} for −t < z < 0.
struct LayerField {
    q: C,
    a: C,
    b: C,
    /// E_z = ez_coef·(a e^{iqz} − b e^{−iqz}) for p.
    ez_coef: C,
}

fn static_layer_field(s: &LayerStack, pol: Polarization, omega: f64, kpar: f64) -> LayerField {
    let t = s.mod_thickness();
    let d = s.gap();
    let eps2 = s.bottom_half_space.permittivity(omega);
    let eps_l = C::new(s.modulation().eps_static, 0.0);
    let eps_g = s.gap_material().permittivity(omega);
    let eps1 = s.top_half_space.permittivity(omega);
    let admittance = |eps: C, q: C| match pol {
        Polarization::S => C::i() * q,
        Polarization::P => eps / q,
    };
    // start in body 2 with a unit down-going wave at z = −t: (u, y) = (1, −Y2)
    let q2 = kz(eps2, omega, kpar);
    let mut u = C::new(1.0, 0.0);
    let mut y = -admittance(eps2, q2);
    // layer amplitudes at its bottom plane
    let ql = kz(eps_l, omega, kpar);
    let yl = admittance(eps_l, ql);
    let al = 0.5 * (u + y / yl);
    let bl = 0.5 * (u - y / yl);
    let (ep, em) = ((C::i() * ql * t).exp(), (-C::i() * ql * t).exp());
    u = al * ep + bl * em;
    y = yl * (al * ep - bl * em);
    // through the gap
    let qg = kz(eps_g, omega, kpar);
    let yg = admittance(eps_g, qg);
    let ag = 0.5 * (u + y / yg);
    let bg = 0.5 * (u - y / yg);
    let (ep, em) = ((C::i() * qg * d).exp(), (-C::i() * qg * d).exp());
    u = ag * ep + bg * em;
    y = yg * (ag * ep - bg * em);
    // decompose in body 1; normalise the down-going part to one
    let q1 = kz(eps1, omega, kpar);
    let y1 = admittance(eps1, q1);
    let down = 0.5 * (u - y / y1);
    // express the layer field relative to z (layer spans −t..0): u = a e^{iqz} + b e^{−iqz}
    let a = al / down * (C::i() * ql * t).exp();
    let b = bl / down * (-C::i() * ql * t).exp();
    LayerField {
        q: ql,
        a,
        b,
        ez_coef: match pol {
            Polarization::S => C::new(0.0, 0.0),
            Polarization::P => C::new(-kpar, 0.0) / ql,
        },
    }
}

/// ∫_{−t}^{0} e^{iκz} dz.
fn exp_integral(kappa: C, t: f64) -> C {
    if kappa.norm() * t < 1e-8 {
        C::new(t, 0.0)
    } else {
        (C::new(1.0, 0.0) - (-C::i() * kappa * t).exp()) / (C::i() * kappa)
    }
}

fn overlap(f: &LayerField, g: &LayerField, pol: Polarization, t: f64) -> C {
    // tangential products
    let pp = exp_integral(f.q + g.q, t);
    let pm = exp_integral(f.q - g.q, t);
    let mp = exp_integral(-f.q + g.q, t);
    let mm = exp_integral(-f.q - g.q, t);
    let uu = f.a * g.a * pp + f.a * g.b * pm + f.b * g.a * mp + f.b * g.b * mm;
    match pol {
        Polarization::S => uu,
        Polarization::P => {
            let zz = f.ez_coef * g.ez_coef * (f.a * g.a * pp - f.a * g.b * pm - f.b * g.a * mp + f.b * g.b * mm);
            uu - zz
        }
    }
}

/// First-order conversion amplitudes into harmonic 0 from harmonics ∓1,
/// for a wave incident from and reflected into body 1 (amplitudes referenced
/// at the body-1 surface).
pub fn perturbative_first_order(s: &LayerStack, ctx: &PlaneWaveContext, basis: &HarmonicBasis) -> BornAmplitudes {
    let m = s.modulation();
    let t = s.mod_thickness();
    let omega = basis.output_energy;
    let k0 = vacuum_wavenumber(omega);
    let f0 = static_layer_field(s, ctx.pol, omega, ctx.kpar);
    let eps1 = s.top_half_space.permittivity(omega);
    let q1 = kz(eps1, omega, ctx.kpar);
    let c_src = match ctx.pol {
        Polarization::S => C::i() / (2.0 * q1),
        Polarization::P => C::i() * q1 / (2.0 * k0 * k0 * eps1),
    };
    let amp = |l: i32| {
        let w = basis.energy(l);
        if w == 0.0 || m.delta_eps == 0.0 {
            return C::new(0.0, 0.0);
        }
        let fl = static_layer_field(s, ctx.pol, w, ctx.kpar);
        k0 * k0 * 0.5 * m.delta_eps * c_src * overlap(&f0, &fl, ctx.pol, t)
    };
    BornAmplitudes {
        from_minus: amp(-1),
        from_plus: amp(1),
    }
}
