//! Independent reference calculations shared by the oracle and acceptance targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use dce_core::floquet::{perturbative_first_order, stack_scattering, HarmonicBasis, PlaneWaveContext, Polarization};
use dce_core::flux::kernel_from_solution;
use dce_core::material::ModulatedLayerSpec;
use dce_core::stack::{Body, LayerStack};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Intervals per depth integral; depths are truncated at five skin depths.
const NQ: usize = 200;
const HBAR_C: f64 = 197_326.980_4;

/// ε(ω) of a single Lorentz oscillator, written out independently.
fn lorentz(eps_inf: f64, wl: f64, wt: f64, g: f64, w: f64) -> C {
    let den = C::new(wt * wt - w * w, -g * w);
    eps_inf * (C::new(wl * wl - w * w, -g * w) / den)
}

pub fn quartz(w: f64) -> C {
    lorentz(2.4, 50.0, 49.0, 0.26, w)
}

pub fn inp(w: f64) -> C {
    lorentz(9.6, 43.0, 38.0, 0.43, w)
}

fn kz(eps: C, w: f64, k: f64) -> C {
    let k0 = w / HBAR_C;
    let r = (eps * k0 * k0 - k * k).sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Fresnel reflection from medium i into medium j. Numerators are written
/// in difference-of-squares form so that they keep full relative precision
/// deep in the evanescent range, where k_zi ≈ k_zj.
fn fresnel(pol: Polarization, ei: C, ej: C, ki: C, kj: C, w: f64, k: f64) -> C {
    let k02 = (w / HBAR_C).powi(2);
    match pol {
        Polarization::S => (ei - ej) * k02 / (ki + kj) / (ki + kj),
        Polarization::P => (ej - ei) * (ei * ej * k02 - (ei + ej) * k * k) / (ej * ki + ei * kj) / (ej * ki + ei * kj),
    }
}

/// Two-slab transmission probability across a vacuum gap d between body 1
/// (half space) and body 2 coated by a lossless film (ε_f, thickness t).
pub fn two_slab_transmission(pol: Polarization, w: f64, k: f64, d: f64, eps_f: f64, t: f64) -> f64 {
    let one = C::new(1.0, 0.0);
    let (e1, e2, ef) = (quartz(w), inp(w), C::new(eps_f, 0.0));
    let (k0z, k1z, k2z, kfz) = (kz(one, w, k), kz(e1, w, k), kz(e2, w, k), kz(ef, w, k));
    let r1 = fresnel(pol, one, e1, k0z, k1z, w, k);
    let r0f = fresnel(pol, one, ef, k0z, kfz, w, k);
    let rf2 = fresnel(pol, ef, e2, kfz, k2z, w, k);
    let ph = (C::i() * 2.0 * kfz * t).exp();
    let r2 = (r0f + rf2 * ph) / (one + r0f * rf2 * ph);
    let prop = (C::i() * 2.0 * k0z * d).exp();
    let den = (one - r1 * r2 * prop).norm_sqr();
    if k < w / HBAR_C {
        (1.0 - r1.norm_sqr()) * (1.0 - r2.norm_sqr()) / den
    } else {
        4.0 * r1.im * r2.im * prop.norm() / den
    }
}

pub fn static_stack(d: f64) -> LayerStack {
    LayerStack::paper_default(92.3)
        .with_gap(d)
        .with_modulation(ModulatedLayerSpec::new(4.0, 0.0, 92.3).unwrap())
}

/// Worst relative deviation between the l = 0 kernel of the unmodulated
/// stack and τ/(2π) on a 20×20 (ω, k∥) grid, both polarizations.
pub fn pvh_worst_deviation() -> f64 {
    let s = static_stack(10.0);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let w = 30.0 + 35.0 * i as f64 / 19.0 + 0.0123;
        for j in 0..20 {
            // log grid across the light line and deep into the evanescent range
            let k = 1e-5 * (1e5f64).powf(j as f64 / 19.0);
            for pol in Polarization::BOTH {
                let basis = HarmonicBasis::new(92.3, w, 1);
                let sol = stack_scattering(&s, &PlaneWaveContext { kpar: k, pol }, &basis).unwrap();
                let kernel = kernel_from_solution(&sol, &s, Body::One, Body::Two, 0).unwrap();
                let oracle = two_slab_transmission(pol, w, k, 10.0, 4.0, 22.0) / (2.0 * PI);
                worst = worst.max((kernel - oracle).abs() / oracle.abs());
            }
        }
    }
    worst
}

/// Composite Simpson weights on [0, L] with n (even) intervals.
fn simpson(l: f64, n: usize) -> Vec<(f64, f64)> {
    let h = l / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (i as f64 * h, w * h / 3.0)
        })
        .collect()
}

/// Worst relative deviation of the closed-form depth integrals from a
/// brute-force double Simpson quadrature of |G|² at ten random points.
pub fn volume_worst_deviation(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = LayerStack::paper_default(92.3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w = rng.gen_range(36.0..56.0);
        let k = 10f64.powf(rng.gen_range(-3.5..-0.5));
        let pol = if rng.gen_bool(0.5) { Polarization::S } else { Polarization::P };
        let l: i32 = rng.gen_range(-1..=1);
        let alpha = if l == 0 || rng.gen_bool(0.5) { Body::Two } else { Body::One };
        let basis = HarmonicBasis::new(92.3, w, 2);
        let sol = stack_scattering(&s, &PlaneWaveContext { kpar: k, pol }, &basis).unwrap();
        let closed = kernel_from_solution(&sol, &s, Body::One, alpha, l).unwrap();

        let idx = basis.index(l).unwrap();
        let wl = basis.energy(l);
        let i0 = basis.index(0).unwrap();
        let kb = sol.modes(Body::One.region()).q[i0];
        let ka = sol.modes(alpha.region()).q[idx];
        let (ob, src) = (simpson(5.0 / kb.im, NQ), simpson(5.0 / ka.im, NQ));
        let d = s.gap();
        let surf_a = s.body_surface(alpha);
        let mut acc = 0.0;
        for &(u, wu) in &ob {
            let z = d + 1e-9 + u;
            for &(v, wv) in &src {
                let zp = match alpha {
                    Body::One => d + 1e-9 + v,
                    Body::Two => surf_a - 1e-9 - v,
                };
                if alpha == Body::One && (z - zp).abs() < 1e-12 {
                    continue;
                }
                let g = sol.green_dyad(&s, l, z, zp).unwrap();
                // for α = β = 1 only the scattered part contributes at l ≠ 0
                let sum: f64 = g.iter().flatten().map(|x| x.norm_sqr()).sum();
                acc += wu * wv * sum;
            }
        }
        let k0 = wl / HBAR_C;
        let loss = quartz(w).im * s.body(alpha).permittivity(wl).im.abs();
        let brute = (2.0 / PI) * k0.powi(4) * loss * acc;
        worst = worst.max((brute - closed).abs() / closed);
    }
    worst
}

/// Worst relative deviation of the l = ±1 → 0 Floquet amplitudes from the
/// first Born approximation at δε = 0.01 over twenty random points.
pub fn born_worst_deviation(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = LayerStack::paper_default(92.3).with_modulation(ModulatedLayerSpec::new(4.0, 0.01, 92.3).unwrap());
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w = rng.gen_range(36.0..56.0);
        let k = 10f64.powf(rng.gen_range(-3.0..-0.3));
        let pol = if rng.gen_bool(0.5) { Polarization::S } else { Polarization::P };
        let basis = HarmonicBasis::new(92.3, w, 3);
        let ctx = PlaneWaveContext { kpar: k, pol };
        let sol = stack_scattering(&s, &ctx, &basis).unwrap();
        let born = perturbative_first_order(&s, &ctx, &basis);
        let i0 = basis.index(0).unwrap();
        for (l, b) in [(-1, born.from_minus), (1, born.from_plus)] {
            let f = sol.s.s22[(i0, basis.index(l).unwrap())];
            worst = worst.max((f - b).norm() / b.norm());
        }
    }
    worst
}

/// Local maxima of a sampled curve with their topographic prominence.
///
/// A plateau counts once, at its first sample. End points are not maxima.
pub fn local_maxima(y: &[f64]) -> Vec<(usize, f64)> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let mut left = y[i];
                for k in (0..i).rev() {
                    if y[k] > y[i] {
                        break;
                    }
                    left = left.min(y[k]);
                }
                let mut right = y[i];
                for &v in &y[j + 1..] {
                    if v > y[i] {
                        break;
                    }
                    right = right.min(v);
                }
                out.push((i, y[i] - left.max(right)));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}
