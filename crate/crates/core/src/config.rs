//! Run configuration: a TOML document describing the stack, the modulation,
//! run-level settings, quadrature tolerances and the sweeps to perform.
//!
//! ```toml
//! [stack]
//! gap_nm = 10.0
//! mod_thickness_nm = 22.0
//! body1 = { kind = "quartz" }
//! body2 = { kind = "inp" }
//!
//! [modulation]
//! eps_static = 4.0
//! delta_eps = 0.4
//! mod_freq = "omega1+omega2"     # or a number in meV
//!
//! [run]
//! temperature = 300.0
//! truncation = 3
//! output_dir = "out"
//!
//! [[sweep]]
//! name = "fig1d"
//! variable = "mod_freq"
//! start = 80.0
//! stop = 105.0
//! points = 60
//! ```
//!
//! Unknown keys are rejected. Physics checks run after parsing and every
//! problem found is reported together, each with the line of the offending
//! key when it can be located.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::{surface_polariton_frequency, LorentzParams, Material, ModulatedLayerSpec};
use crate::quadrature::QuadratureSpec;
use crate::stack::LayerStack;

/// A single configuration problem with its TOML key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", format_parse(*.line, .message))]
    Parse { line: Option<usize>, message: String },
    #[error("{} configuration problem(s):\n{}", .0.len(), join_issues(.0))]
    Invalid(Vec<ConfigIssue>),
    #[error("cannot serialize configuration: {0}")]
    Serialize(String),
}

fn format_parse(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("parse error at line {l}: {message}"),
        None => format!("parse error: {message}"),
    }
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

/// Body permittivity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialConfig {
    /// Built-in quartz oscillator.
    Quartz,
    /// Built-in InP oscillator.
    Inp,
    /// ε(ω) = ε_∞ (ω_L² − ω² − iγω)/(ω_T² − ω² − iγω), energies in meV.
    Lorentz { eps_inf: f64, omega_l: f64, omega_t: f64, gamma: f64 },
    /// Frequency-independent ε = re + i·im.
    Constant { re: f64, #[serde(default)] im: f64 },
}

impl MaterialConfig {
    pub fn material(&self) -> Material {
        match *self {
            MaterialConfig::Quartz => Material::Lorentz(LorentzParams::QUARTZ),
            MaterialConfig::Inp => Material::Lorentz(LorentzParams::INP),
            MaterialConfig::Lorentz { eps_inf, omega_l, omega_t, gamma } => Material::Lorentz(LorentzParams {
                eps_inf,
                omega_l,
                omega_t,
                gamma,
            }),
            MaterialConfig::Constant { re, im } => Material::Constant(Complex64::new(re, im)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    pub gap_nm: f64,
    pub mod_thickness_nm: f64,
    pub body1: MaterialConfig,
    pub body2: MaterialConfig,
}

/// An energy given either in meV or by name relative to the body surface
/// modes Ω₁ (body 1) and Ω₂ (body 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Energy {
    Value(f64),
    Named(String),
}

/// Names accepted by [`Energy::Named`], with the coefficients (a, b) of a·Ω₁ + b·Ω₂.
pub const NAMED_ENERGIES: [(&str, f64, f64); 9] = [
    ("omega1", 1.0, 0.0),
    ("omega2", 0.0, 1.0),
    ("2*omega1", 2.0, 0.0),
    ("2*omega2", 0.0, 2.0),
    ("omega1+omega2", 1.0, 1.0),
    ("(omega1+omega2)/2", 0.5, 0.5),
    ("2*omega1/3", 2.0 / 3.0, 0.0),
    ("2*omega2/3", 0.0, 2.0 / 3.0),
    ("omega1-omega2", 1.0, -1.0),
];

impl Energy {
    pub fn resolve(&self, surface: Option<(f64, f64)>) -> Result<f64, String> {
        match self {
            Energy::Value(v) => Ok(*v),
            Energy::Named(name) => {
                let key: String = name.chars().filter(|c| !c.is_whitespace()).collect();
                let Some(&(_, a, b)) = NAMED_ENERGIES.iter().find(|(n, _, _)| *n == key) else {
                    let known: Vec<&str> = NAMED_ENERGIES.iter().map(|(n, _, _)| *n).collect();
                    return Err(format!("unknown energy name {name:?} (known: {})", known.join(", ")));
                };
                let (w1, w2) = surface.ok_or_else(|| {
                    format!("{name:?} needs Lorentz bodies with a surface-polariton root")
                })?;
                Ok(a * w1 + b * w2)
            }
        }
    }
}

impl From<f64> for Energy {
    fn from(v: f64) -> Self {
        Energy::Value(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub eps_static: f64,
    pub delta_eps: f64,
    /// ħΩ in meV or a named combination of Ω₁, Ω₂.
    pub mod_freq: Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Kelvin.
    pub temperature: f64,
    /// Harmonic truncation N_h.
    pub truncation: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            temperature: 300.0,
            truncation: 3,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_depth: u32,
    pub kpar_max_factor: f64,
    /// [start, stop] of the base-frequency window in meV.
    pub omega_window: [f64; 2],
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        QuadratureConfig {
            rel_tol: q.rel_tol,
            abs_floor: q.abs_floor,
            max_depth: q.max_depth,
            kpar_max_factor: q.kpar_max_factor,
            omega_window: [q.omega_window.0, q.omega_window.1],
        }
    }
}

impl QuadratureConfig {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_floor: self.abs_floor,
            max_depth: self.max_depth,
            kpar_max_factor: self.kpar_max_factor,
            omega_window: (self.omega_window[0], self.omega_window[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    ModFreq,
    Gap,
    Temperature,
    ZHeight,
    DeltaEps,
}

impl SweepVariable {
    /// CSV header of the swept column.
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::ModFreq => "mod_freq_meV",
            SweepVariable::Gap => "gap_nm",
            SweepVariable::Temperature => "temperature_K",
            SweepVariable::ZHeight => "z_nm",
            SweepVariable::DeltaEps => "delta_eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Evenly spaced points between `start` and `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.stop;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + f * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }

    fn check(&self, path: &str, min_points: usize, issues: &mut Vec<(String, String)>) {
        if self.points < min_points {
            issues.push((format!("{path}.points"), format!("needs at least {min_points} points, got {}", self.points)));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            issues.push((format!("{path}.start"), "range endpoints must be finite".into()));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            issues.push((format!("{path}.scale"), "log sweeps require positive endpoints".into()));
        }
    }
}

/// One sweep: either a range (`start`, `stop`, `points`, `scale`) or an
/// explicit `values` list. Optional fields override the base configuration
/// for this sweep only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub variable: SweepVariable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
    /// Explicit sweep values; named energies are allowed for `mod_freq`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Energy>>,
    /// Write `spectrum_<i>.csv` for every point.
    #[serde(default)]
    pub spectra: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mod_freq: Option<Energy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Extra temperatures at which the dominance L is tabulated for every
    /// point (written to `dominance_map.csv`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance_temperatures: Option<RangeSpec>,
    /// Quadrature pair offset δω for `z_height` sweeps (meV, or "nondegenerate").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_omega: Option<PairOffset>,
}

impl SweepSpec {
    fn range(&self) -> Option<RangeSpec> {
        Some(RangeSpec {
            start: self.start?,
            stop: self.stop?,
            points: self.points?,
            scale: self.scale,
        })
    }
}

/// Offset δω of the two-mode pair: a number, `"degenerate"` (δω = 0) or
/// `"nondegenerate"` (ω± = Ω₁, Ω₂ mapped onto Ω/2 ± δω).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairOffset {
    Value(f64),
    Named(String),
}

impl Default for PairOffset {
    fn default() -> Self {
        PairOffset::Named("degenerate".into())
    }
}

impl PairOffset {
    pub fn resolve(&self, surface: Option<(f64, f64)>) -> Result<f64, String> {
        match self {
            PairOffset::Value(v) => Ok(*v),
            PairOffset::Named(n) if n == "degenerate" => Ok(0.0),
            PairOffset::Named(n) if n == "nondegenerate" => {
                let (w1, w2) = surface.ok_or("\"nondegenerate\" needs Lorentz bodies with surface-polariton roots")?;
                Ok(0.5 * (w1 - w2).abs())
            }
            PairOffset::Named(n) => Err(format!("unknown pair offset {n:?} (use a number, \"degenerate\" or \"nondegenerate\")")),
        }
    }
}

/// Nonclassicality grid over observer height and temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mod_freq: Option<Energy>,
    #[serde(default)]
    pub delta_omega: PairOffset,
    /// Heights above the modulated layer in nm.
    pub z: RangeSpec,
    /// Temperatures in K.
    pub temperature: RangeSpec,
}

/// Gap-mode dispersion ω(k∥) with the modulation switched off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSpec {
    /// k∥ range in nm⁻¹.
    pub kpar: RangeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub stack: StackConfig,
    pub modulation: ModulationConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indicator: Vec<IndicatorSpec>,
}

impl SimulationConfig {
    /// Vacuum surface-polariton energies (Ω₁, Ω₂) of the two bodies.
    pub fn surface_modes(&self) -> Option<(f64, f64)> {
        let root = |m: &MaterialConfig| match m.material() {
            Material::Lorentz(p) => surface_polariton_frequency(&p.lossless(), 1e-12).ok(),
            _ => None,
        };
        Some((root(&self.stack.body1)?, root(&self.stack.body2)?))
    }

    pub fn resolve_energy(&self, e: &Energy) -> Result<f64, String> {
        e.resolve(self.surface_modes())
    }

    /// ħΩ of the base configuration in meV.
    pub fn mod_freq(&self) -> Result<f64, String> {
        self.resolve_energy(&self.modulation.mod_freq)
    }

    /// Builds the stack for the base configuration.
    pub fn stack(&self) -> Result<LayerStack, String> {
        let m = ModulatedLayerSpec {
            eps_static: self.modulation.eps_static,
            delta_eps: self.modulation.delta_eps,
            mod_freq: self.mod_freq()?,
        };
        Ok(LayerStack::new(
            self.stack.body1.material(),
            self.stack.gap_nm,
            m,
            self.stack.mod_thickness_nm,
            self.stack.body2.material(),
        ))
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        self.quadrature.spec()
    }

    pub fn sweep_named(&self, name: &str) -> Option<&SweepSpec> {
        self.sweep.iter().find(|s| s.name == name)
    }

    /// Values of a sweep in its own units (meV, nm, K or dimensionless).
    pub fn sweep_values(&self, sweep: &SweepSpec) -> Result<Vec<f64>, String> {
        if let Some(vals) = &sweep.values {
            return vals.iter().map(|v| self.resolve_energy(v)).collect();
        }
        sweep
            .range()
            .map(|r| r.values())
            .ok_or_else(|| "sweep needs start, stop and points, or values".to_string())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimulationConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        let issues = cfg.issues();
        if issues.is_empty() {
            return Ok(cfg);
        }
        Err(ConfigError::Invalid(
            issues
                .into_iter()
                .map(|(path, message)| ConfigIssue {
                    line: locate_key(text, &path),
                    path,
                    message,
                })
                .collect(),
        ))
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Serialize(e.to_string()))
    }

    /// Physics and schema checks beyond what deserialization enforces.
    /// Returns (key path, message) pairs.
    pub fn issues(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |p: &str, m: String| out.push((p.to_string(), m));

        let st = &self.stack;
        if !(st.gap_nm > 0.0) {
            push("stack.gap_nm", format!("must be > 0, got {}", st.gap_nm));
        }
        if !(st.mod_thickness_nm > 0.0) {
            push("stack.mod_thickness_nm", format!("must be > 0, got {}", st.mod_thickness_nm));
        }
        for (key, body) in [("stack.body1", &st.body1), ("stack.body2", &st.body2)] {
            if let Err(e) = body.material().validate() {
                push(key, e.to_string());
            }
            if let MaterialConfig::Constant { re, im } = body {
                if !(*im >= 0.0) || !re.is_finite() {
                    push(key, format!("constant permittivity needs finite re and im >= 0, got {re} + {im}i"));
                }
            }
        }

        let m = &self.modulation;
        if !(m.eps_static > 0.0) {
            push("modulation.eps_static", format!("must be > 0, got {}", m.eps_static));
        }
        if !(m.delta_eps >= 0.0) {
            push("modulation.delta_eps", format!("must be >= 0, got {}", m.delta_eps));
        } else if !(m.delta_eps < m.eps_static) {
            push(
                "modulation.delta_eps",
                format!("delta_eps = {} must be smaller than eps_static = {}", m.delta_eps, m.eps_static),
            );
        }
        match self.mod_freq() {
            Ok(w) if !(w > 0.0) => push("modulation.mod_freq", format!("must be > 0 meV, got {w}")),
            Ok(_) => {}
            Err(e) => push("modulation.mod_freq", e),
        }

        if !(self.run.temperature >= 0.0) {
            push("run.temperature", format!("must be >= 0 K, got {}", self.run.temperature));
        }
        if self.run.truncation == 0 {
            push("run.truncation", "must be >= 1".into());
        }
        if self.run.truncation > 12 {
            push("run.truncation", format!("{} harmonics per side is beyond the supported 12", self.run.truncation));
        }
        if let Err(e) = self.quadrature.spec().validate() {
            push("quadrature", e);
        }

        if let Some(d) = &self.dispersion {
            d.kpar.check("dispersion.kpar", 2, &mut out);
            if !(d.kpar.start > 0.0) {
                out.push(("dispersion.kpar.start".into(), "k∥ must be > 0".into()));
            }
        }

        let mut names = std::collections::BTreeSet::new();
        for (i, sw) in self.sweep.iter().enumerate() {
            let p = format!("sweep[{i}]");
            if sw.name.is_empty() || !sw.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                out.push((format!("{p}.name"), format!("{:?} must be non-empty and use [A-Za-z0-9_-]", sw.name)));
            }
            if !names.insert(sw.name.clone()) {
                out.push((format!("{p}.name"), format!("duplicate sweep name {:?}", sw.name)));
            }
            match (&sw.values, sw.range()) {
                (Some(_), Some(_)) => out.push((format!("{p}.values"), "give either values or start/stop/points, not both".into())),
                (None, None) => out.push((format!("{p}.points"), "needs start, stop and points, or values".into())),
                (Some(v), None) => {
                    if v.is_empty() {
                        out.push((format!("{p}.values"), "must not be empty".into()));
                    }
                    if sw.variable != SweepVariable::ModFreq && v.iter().any(|e| matches!(e, Energy::Named(_))) {
                        out.push((format!("{p}.values"), "named energies are only valid for mod_freq sweeps".into()));
                    }
                }
                (None, Some(r)) => r.check(&p, 2, &mut out),
            }
            if sw.values.is_none() && (sw.start.is_some() || sw.stop.is_some() || sw.points.is_some()) && sw.range().is_none() {
                out.push((format!("{p}.points"), "start, stop and points must all be given".into()));
            }
            if let Ok(vals) = self.sweep_values(sw) {
                let bad = vals.iter().find(|&&v| match sw.variable {
                    SweepVariable::ModFreq | SweepVariable::Gap | SweepVariable::ZHeight => !(v > 0.0),
                    SweepVariable::Temperature => !(v >= 0.0),
                    SweepVariable::DeltaEps => !(v >= 0.0 && v < self.modulation.eps_static),
                });
                if let Some(v) = bad {
                    let rule = match sw.variable {
                        SweepVariable::Temperature => "must be >= 0",
                        SweepVariable::DeltaEps => "must lie in [0, eps_static)",
                        _ => "must be > 0",
                    };
                    out.push((format!("{p}.start"), format!("sweep value {v} {rule}")));
                }
                if sw.variable == SweepVariable::ZHeight {
                    let gap = sw.gap_nm.unwrap_or(self.stack.gap_nm);
                    if vals.iter().any(|&z| z >= gap) {
                        out.push((format!("{p}.stop"), format!("heights must lie inside the gap (0, {gap}) nm")));
                    }
                }
            } else if let Err(e) = self.sweep_values(sw) {
                out.push((format!("{p}.values"), e));
            }
            if let Some(g) = sw.gap_nm {
                if !(g > 0.0) {
                    out.push((format!("{p}.gap_nm"), format!("must be > 0, got {g}")));
                }
            }
            if let Some(e) = &sw.mod_freq {
                match self.resolve_energy(e) {
                    Ok(w) if !(w > 0.0) => out.push((format!("{p}.mod_freq"), format!("must be > 0, got {w}"))),
                    Ok(_) => {}
                    Err(msg) => out.push((format!("{p}.mod_freq"), msg)),
                }
            }
            if let Some(t) = sw.temperature {
                if !(t >= 0.0) {
                    out.push((format!("{p}.temperature"), format!("must be >= 0, got {t}")));
                }
            }
            if let Some(n) = sw.truncation {
                if n == 0 || n > 12 {
                    out.push((format!("{p}.truncation"), format!("must lie in 1..=12, got {n}")));
                }
            }
            if let Some(r) = &sw.dominance_temperatures {
                r.check(&format!("{p}.dominance_temperatures"), 1, &mut out);
                if sw.variable == SweepVariable::Temperature || sw.variable == SweepVariable::ZHeight {
                    out.push((format!("{p}.dominance_temperatures"), "not valid for temperature or z_height sweeps".into()));
                }
            }
            if let Some(off) = &sw.delta_omega {
                if sw.variable != SweepVariable::ZHeight {
                    out.push((format!("{p}.delta_omega"), "only valid for z_height sweeps".into()));
                } else if let Err(e) = off.resolve(self.surface_modes()) {
                    out.push((format!("{p}.delta_omega"), e));
                }
            }
        }
        for (i, ind) in self.indicator.iter().enumerate() {
            let p = format!("indicator[{i}]");
            if !names.insert(ind.name.clone()) {
                out.push((format!("{p}.name"), format!("duplicate name {:?}", ind.name)));
            }
            if ind.name.is_empty() || !ind.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                out.push((format!("{p}.name"), format!("{:?} must be non-empty and use [A-Za-z0-9_-]", ind.name)));
            }
            ind.z.check(&format!("{p}.z"), 1, &mut out);
            ind.temperature.check(&format!("{p}.temperature"), 1, &mut out);
            if ind.z.values().iter().any(|&z| !(z > 0.0 && z < self.stack.gap_nm)) {
                out.push((format!("{p}.z"), format!("heights must lie inside the gap (0, {}) nm", self.stack.gap_nm)));
            }
            if ind.temperature.values().iter().any(|&t| !(t >= 0.0)) {
                out.push((format!("{p}.temperature"), "temperatures must be >= 0".into()));
            }
            if let Some(e) = &ind.mod_freq {
                if let Err(msg) = self.resolve_energy(e) {
                    out.push((format!("{p}.mod_freq"), msg));
                }
            }
            if let Err(e) = ind.delta_omega.resolve(self.surface_modes()) {
                out.push((format!("{p}.delta_omega"), e));
            }
        }
        out
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<SimulationConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SimulationConfig::from_toml_str(&text)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Finds the 1-based line defining a key path such as `modulation.delta_eps`
/// or `sweep[2].points`. Falls back to the enclosing table header, then None.
fn locate_key(text: &str, path: &str) -> Option<usize> {
    let mut segments: Vec<(String, Option<usize>)> = Vec::new();
    for seg in path.split('.') {
        match seg.find('[') {
            Some(b) => {
                let idx = seg[b + 1..seg.len() - 1].parse().ok();
                segments.push((seg[..b].to_string(), idx));
            }
            None => segments.push((seg.to_string(), None)),
        }
    }
    let (table, idx) = segments.first()?.clone();
    let key = segments.get(1).map(|s| s.0.clone());
    let sub = segments.get(2).map(|s| s.0.clone());

    let mut in_table = false;
    let mut array_count = 0usize;
    let mut header_line = None;
    let mut in_subtable = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_start_matches('[').split(']').next().unwrap_or("").trim();
            let is_array = line.starts_with("[[");
            in_subtable = false;
            if name == table {
                if is_array {
                    in_table = idx == Some(array_count);
                    array_count += 1;
                } else {
                    in_table = idx.is_none();
                }
                if in_table {
                    header_line = Some(n + 1);
                }
            } else if in_table && key.as_deref().is_some_and(|k| name == format!("{table}.{k}")) {
                in_subtable = true;
                header_line = Some(n + 1);
            } else {
                in_table = false;
            }
            continue;
        }
        if !in_table {
            continue;
        }
        let lhs = line.split('=').next().unwrap_or("").trim();
        if in_subtable {
            if sub.as_deref() == Some(lhs) {
                return Some(n + 1);
            }
        } else if key.as_deref() == Some(lhs) {
            return Some(n + 1);
        }
    }
    header_line
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[stack]
gap_nm = 10.0
mod_thickness_nm = 22.0
body1 = { kind = "quartz" }
body2 = { kind = "inp" }

[modulation]
eps_static = 4.0
delta_eps = 0.4
mod_freq = "omega1+omega2"
"#;

    #[test]
    fn base_config_resolves_named_frequency() {
        let cfg = SimulationConfig::from_toml_str(BASE).unwrap();
        let (w1, w2) = cfg.surface_modes().unwrap();
        assert!((cfg.mod_freq().unwrap() - (w1 + w2)).abs() < 1e-12);
        assert_eq!(cfg.run, RunConfig::default());
        assert_eq!(cfg.quadrature_spec(), QuadratureSpec::default());
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let text = BASE.replace("delta_eps = 0.4", "delta_eps = 0.4\nbogus = 1");
        match SimulationConfig::from_toml_str(&text) {
            Err(ConfigError::Parse { line, message }) => {
                assert!(message.contains("bogus"), "{message}");
                assert!(line.is_some());
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn issues_are_aggregated_with_lines() {
        let text = BASE.replace("delta_eps = 0.4", "delta_eps = 5.0").replace("gap_nm = 10.0", "gap_nm = -1.0");
        match SimulationConfig::from_toml_str(&text) {
            Err(ConfigError::Invalid(issues)) => {
                assert_eq!(issues.len(), 2, "{issues:?}");
                let gap = issues.iter().find(|i| i.path == "stack.gap_nm").unwrap();
                assert_eq!(gap.line, Some(3));
                let de = issues.iter().find(|i| i.path == "modulation.delta_eps").unwrap();
                assert_eq!(de.line, Some(10));
            }
            other => panic!("expected aggregated issues, got {other:?}"),
        }
    }

    #[test]
    fn locate_key_in_array_tables() {
        let text = "[[sweep]]\nname = \"a\"\npoints = 3\n\n[[sweep]]\nname = \"b\"\npoints = 1\n";
        assert_eq!(locate_key(text, "sweep[1].points"), Some(7));
        assert_eq!(locate_key(text, "sweep[0].points"), Some(3));
        assert_eq!(locate_key(text, "sweep[1].stop"), Some(5));
        assert_eq!(locate_key(text, "run.temperature"), None);
    }

    #[test]
    fn range_values() {
        let r = RangeSpec { start: 1.0, stop: 100.0, points: 3, scale: Scale::Log };
        let v = r.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(v[2], 100.0);
        let r = RangeSpec { start: 80.0, stop: 105.0, points: 6, scale: Scale::Linear };
        assert_eq!(r.values(), vec![80.0, 85.0, 90.0, 95.0, 100.0, 105.0]);
    }
}
