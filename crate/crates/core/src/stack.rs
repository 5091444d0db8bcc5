//! Planar two-body geometry: body 1 / vacuum gap / modulated layer / body 2.
//!
//! The z-axis points from body 2 towards body 1 with z = 0 on the top surface
//! of the modulated layer. Body 1 fills z > d, the gap 0 < z ≤ d, the
//! modulated layer −t < z ≤ 0 and body 2 z ≤ −t. Boundary points belong to
//! the lower region.

use thiserror::Error;

use crate::material::{surface_mode_against, LorentzParams, Material, ModulatedLayerSpec};
use crate::roots;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StackError {
    #[error("invalid stack: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub material: Material,
    /// Thickness in nm.
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionId {
    Body2,
    ModLayer,
    Gap,
    Body1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Body {
    One,
    Two,
}

impl Body {
    pub const BOTH: [Body; 2] = [Body::One, Body::Two];

    pub fn region(self) -> RegionId {
        match self {
            Body::One => RegionId::Body1,
            Body::Two => RegionId::Body2,
        }
    }
}

/// The layered system. `inner_layers` lists the finite layers from top to
/// bottom: the vacuum gap, then the modulated layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub top_half_space: Material,
    pub inner_layers: Vec<Layer>,
    pub bottom_half_space: Material,
}

impl LayerStack {
    /// Body 1 / gap `gap_nm` / modulated layer / body 2.
    pub fn new(
        body1: Material,
        gap_nm: f64,
        modulated: ModulatedLayerSpec,
        mod_thickness_nm: f64,
        body2: Material,
    ) -> Self {
        LayerStack {
            top_half_space: body1,
            inner_layers: vec![
                Layer {
                    material: Material::VACUUM,
                    thickness: gap_nm,
                },
                Layer {
                    material: Material::Modulated(modulated),
                    thickness: mod_thickness_nm,
                },
            ],
            bottom_half_space: body2,
        }
    }

    /// Quartz / 10 nm vacuum / 22 nm modulated (ε_s = 4, δε = 0.4) / InP.
    pub fn paper_default(mod_freq: f64) -> Self {
        LayerStack::new(
            Material::Lorentz(LorentzParams::QUARTZ),
            10.0,
            ModulatedLayerSpec {
                eps_static: 4.0,
                delta_eps: 0.4,
                mod_freq,
            },
            22.0,
            Material::Lorentz(LorentzParams::INP),
        )
    }

    pub fn gap(&self) -> f64 {
        self.inner_layers[0].thickness
    }

    pub fn gap_material(&self) -> &Material {
        &self.inner_layers[0].material
    }

    pub fn mod_thickness(&self) -> f64 {
        self.inner_layers[1].thickness
    }

    /// Modulation parameters. Panics on a stack that failed validation.
    pub fn modulation(&self) -> ModulatedLayerSpec {
        match self.inner_layers[1].material {
            Material::Modulated(m) => m,
            _ => panic!("second inner layer must be the modulated layer"),
        }
    }

    pub fn body(&self, body: Body) -> &Material {
        match body {
            Body::One => &self.top_half_space,
            Body::Two => &self.bottom_half_space,
        }
    }

    /// z of the body's surface.
    pub fn body_surface(&self, body: Body) -> f64 {
        match body {
            Body::One => self.gap(),
            Body::Two => -self.mod_thickness(),
        }
    }

    pub fn with_gap(&self, gap_nm: f64) -> Self {
        let mut s = self.clone();
        s.inner_layers[0].thickness = gap_nm;
        s
    }

    pub fn with_modulation(&self, m: ModulatedLayerSpec) -> Self {
        let mut s = self.clone();
        s.inner_layers[1].material = Material::Modulated(m);
        s
    }

    pub fn validate(&self) -> Result<(), StackError> {
        let mut problems = Vec::new();
        for (name, body) in [("top half-space", &self.top_half_space), ("bottom half-space", &self.bottom_half_space)] {
            if let Err(e) = body.validate() {
                problems.push(format!("{name}: {e}"));
            }
            if matches!(body, Material::Modulated(_)) {
                problems.push(format!("{name} cannot be time-modulated"));
            } else if !body.is_lossy() {
                problems.push(format!("{name} must be lossy"));
            }
        }
        if self.inner_layers.len() != 2 {
            problems.push(format!(
                "expected two inner layers (gap, modulated layer), found {}",
                self.inner_layers.len()
            ));
        } else {
            let gap = &self.inner_layers[0];
            let modl = &self.inner_layers[1];
            match gap.material {
                Material::Constant(eps) if eps.im == 0.0 && eps.re > 0.0 => {}
                Material::Constant(eps) if eps.im != 0.0 => {
                    problems.push("gap layer must be lossless".to_string())
                }
                _ => problems.push("gap layer must be a lossless constant medium".to_string()),
            }
            match modl.material {
                Material::Modulated(m) => {
                    if let Err(e) = m.validate() {
                        problems.push(format!("modulated layer: {e}"));
                    }
                }
                Material::Lorentz(_) => problems.push("modulated layer must be lossless".to_string()),
                _ => problems.push("second inner layer must be time-modulated".to_string()),
            }
            for (name, layer) in [("gap", gap), ("modulated layer", modl)] {
                if !(layer.thickness > 0.0) || !layer.thickness.is_finite() {
                    problems.push(format!("{name} thickness {} nm must be positive", layer.thickness));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(StackError::Invalid(problems))
        }
    }

    pub fn region_of(&self, z: f64) -> RegionId {
        if z > self.gap() {
            RegionId::Body1
        } else if z > 0.0 {
            RegionId::Gap
        } else if z > -self.mod_thickness() {
            RegionId::ModLayer
        } else {
            RegionId::Body2
        }
    }
}

/// Free function form of [`LayerStack::validate`].
pub fn validate_stack(s: &LayerStack) -> Result<(), StackError> {
    s.validate()
}

/// Free function form of [`LayerStack::region_of`].
pub fn region_of(s: &LayerStack, z: f64) -> RegionId {
    s.region_of(z)
}

/// Electrostatic gap-mode energies for each k∥ in `kpar_grid` (1/nm).
///
/// Solves 1 − r₁ r₂ e^{−2k∥d} = 0 with r_i = (ε_i − 1)/(ε_i + 1) for the
/// lossless Lorentz bodies, in the pole-free form
/// (ε₁+1)(ε₂+1) − (ε₁−1)(ε₂−1)e^{−2k∥d} = 0. Roots are searched inside the
/// reststrahlen band (ω_T, ω_L) of each body and returned in ascending
/// order. The time modulation is ignored.
pub fn gap_mode_dispersion(s: &LayerStack, kpar_grid: &[f64]) -> Vec<Vec<f64>> {
    let lorentz = |m: &Material| match m {
        Material::Lorentz(p) => Some(p.lossless()),
        _ => None,
    };
    let (Some(p1), Some(p2)) = (lorentz(&s.top_half_space), lorentz(&s.bottom_half_space)) else {
        return vec![Vec::new(); kpar_grid.len()];
    };
    let d = s.gap();
    kpar_grid
        .iter()
        .map(|&k| {
            if !(k > 0.0) {
                return Vec::new();
            }
            let decay = (-2.0 * k * d).exp();
            let f = |w: f64| {
                let e1 = p1.permittivity(w).re;
                let e2 = p2.permittivity(w).re;
                (e1 + 1.0) * (e2 + 1.0) - (e1 - 1.0) * (e2 - 1.0) * decay
            };
            let mut out = Vec::new();
            for p in [p1, p2] {
                let width = p.omega_l - p.omega_t;
                let lo = p.omega_t + 1e-9 * width;
                let hi = p.omega_l;
                for r in roots::all_roots(f, lo, hi, 4000, 1e-12 * p.omega_l) {
                    out.push(r);
                }
            }
            out.sort_by(|a, b| a.partial_cmp(b).unwrap());
            out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            out
        })
        .collect()
}

/// Large-k∥ surface-mode energies of the two bodies, each against its
/// neighbouring inner medium (body 1 against the gap, body 2 against the
/// static modulated layer). Used to seed quadrature panels.
pub fn coated_surface_modes(s: &LayerStack) -> Vec<f64> {
    let mut out = Vec::new();
    let gap_eps = s.gap_material().permittivity(1.0).re;
    let coat_eps = match s.inner_layers.get(1).map(|l| l.material) {
        Some(Material::Modulated(m)) => m.eps_static,
        _ => 1.0,
    };
    for (body, ambient) in [(&s.top_half_space, gap_eps), (&s.bottom_half_space, coat_eps)] {
        if let Material::Lorentz(p) = body {
            for eps_amb in [1.0, ambient] {
                if let Ok(w) = surface_mode_against(p, eps_amb, 1e-12) {
                    out.push(w);
                }
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}
