//! Sweep orchestration and file output.
//!
//! Output layout under the output directory, one subdirectory per named task:
//!
//! | file | columns |
//! |------|---------|
//! | `<sweep>/flux_sweep.csv` | swept value, `phi_q`, `phi_t`, `upsilon`, `q_net` (W/m²), `dominance`, `converged`, `spectrum_file` |
//! | `<sweep>/spectrum_<i>.csv` | `freq_meV`, `weight_meV`, `F1_l<l>` for l = −N_h..N_h (photons m⁻² per unit angular frequency) |
//! | `<sweep>/dominance_map.csv` | swept value, `temperature_K`, `dominance` |
//! | `<sweep>/convergence.csv` | swept value, `phi_q`, `phi_q_refined`, `rel_change`, `ok` |
//! | `<grid>/indicator_grid.csv` | `z_nm`, `T_K`, `indicator_normalized` |
//! | `dispersion/dispersion.csv` | `kpar_per_nm`, `branch`, `energy_meV` |
//! | `<task>/run_manifest.json` | config hash, version, wall time, workers, files |
//!
//! Swept-value column names: `omega_meV` (ħΩ), `gap_nm`, `temperature_K`,
//! `z_nm`, `delta_eps`. Numbers are written with 12 significant digits in
//! exponent form so files are byte-reproducible.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, IndicatorSpec, SimulationConfig, SweepSpec, SweepVariable};
use crate::flux::{spectral_flux_table, FluxError, SpectralFluxTable};
use crate::material::ModulatedLayerSpec;
use crate::nonclassicality::{indicator_grid, IndicatorError, IndicatorGrid, QuadraturePairSpec};
use crate::stack::{gap_mode_dispersion, LayerStack};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "DCE_WORKERS";

/// Relative Φ^Q change above which a convergence check fails.
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid run request: {0}")]
    Request(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("flux computation failed: {0}")]
    Flux(#[from] FluxError),
    #[error("indicator computation failed: {0}")]
    Indicator(#[from] IndicatorError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

impl RunError {
    /// Process exit code: 2 for numerical failures, 1 for everything else
    /// (configuration, request, files).
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Flux(_) | RunError::Indicator(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line style overrides for a run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Run only the named sweep or indicator grid.
    pub only: Option<String>,
    pub truncation: Option<usize>,
    /// Recompute every point with N_h + 1 and report the relative change.
    pub check_convergence: bool,
    /// Worker threads; `None` reads [`WORKERS_ENV`], then available parallelism.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// False when any quadrature or convergence check failed.
    pub converged: bool,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            2
        }
    }

    fn merge(&mut self, other: RunReport) {
        self.files.extend(other.files);
        self.converged &= other.converged;
    }
}

/// Worker count from [`WORKERS_ENV`], falling back to available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let n = workers.unwrap_or_else(worker_count);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// SHA-256 of the canonical serialization of the effective configuration.
pub fn config_hash(cfg: &SimulationConfig) -> Result<String, RunError> {
    let text = cfg.to_toml_string()?;
    Ok(format!("{:x}", Sha256::digest(text.as_bytes())))
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.11e}")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> RunError + '_ {
    move |e| RunError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct Manifest<'a> {
    task: &'a str,
    config_sha256: String,
    version: &'static str,
    wall_time_s: f64,
    workers: usize,
    truncation: usize,
    converged: bool,
    files: Vec<String>,
}

fn write_manifest(
    dir: &Path,
    task: &str,
    cfg: &SimulationConfig,
    started: Instant,
    workers: usize,
    report: &RunReport,
) -> Result<PathBuf, RunError> {
    let manifest = Manifest {
        task,
        config_sha256: config_hash(cfg)?,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: started.elapsed().as_secs_f64(),
        workers,
        truncation: cfg.run.truncation,
        converged: report.converged,
        files: report
            .files
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
    };
    let path = dir.join("run_manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Request(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}

fn effective_config(cfg: &SimulationConfig, opts: &RunOptions) -> Result<SimulationConfig, RunError> {
    let mut cfg = cfg.clone();
    if let Some(n) = opts.truncation {
        cfg.run.truncation = n;
        for sw in &mut cfg.sweep {
            sw.truncation = None;
        }
    }
    if let Some(dir) = &opts.out_dir {
        cfg.run.output_dir = dir.clone();
    }
    let issues = cfg.issues();
    if !issues.is_empty() {
        return Err(ConfigError::Invalid(
            issues
                .into_iter()
                .map(|(path, message)| crate::config::ConfigIssue { path, line: None, message })
                .collect(),
        )
        .into());
    }
    Ok(cfg)
}

fn task_dir(cfg: &SimulationConfig, name: &str) -> Result<PathBuf, RunError> {
    let dir = cfg.run.output_dir.join(name);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

/// Stack, temperature and truncation for one point of a sweep.
struct Point {
    stack: LayerStack,
    temperature: f64,
    truncation: usize,
}

fn sweep_point(cfg: &SimulationConfig, sw: &SweepSpec, value: f64) -> Result<Point, RunError> {
    let base = cfg.stack().map_err(RunError::Request)?;
    let mut m: ModulatedLayerSpec = base.modulation();
    if let Some(e) = &sw.mod_freq {
        m.mod_freq = cfg.resolve_energy(e).map_err(RunError::Request)?;
    }
    let mut gap = sw.gap_nm.unwrap_or(cfg.stack.gap_nm);
    let mut temperature = sw.temperature.unwrap_or(cfg.run.temperature);
    match sw.variable {
        SweepVariable::ModFreq => m.mod_freq = value,
        SweepVariable::Gap => gap = value,
        SweepVariable::Temperature => temperature = value,
        SweepVariable::DeltaEps => m.delta_eps = value,
        SweepVariable::ZHeight => {}
    }
    Ok(Point {
        stack: base.with_gap(gap).with_modulation(m),
        temperature,
        truncation: sw.truncation.unwrap_or(cfg.run.truncation),
    })
}

fn spectrum_rows(table: &SpectralFluxTable) -> (Vec<String>, Vec<Vec<String>>) {
    let n = table.trunc as i32;
    let mut header = vec!["freq_meV".to_string(), "weight_meV".to_string()];
    header.extend((-n..=n).map(|l| format!("F1_l{l}")));
    let rows = table
        .omega
        .iter()
        .zip(&table.weights)
        .zip(&table.f1)
        .map(|((&w, &q), f)| {
            let mut r = vec![fmt_num(w), fmt_num(q)];
            r.extend(f.iter().map(|&v| fmt_num(v)));
            r
        })
        .collect();
    (header, rows)
}

/// Runs every `[[sweep]]` (or only `opts.only`), writing one directory per sweep.
pub fn run_sweep(cfg: &SimulationConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let cfg = effective_config(cfg, opts)?;
    let sweeps: Vec<&SweepSpec> = match &opts.only {
        Some(name) => vec![cfg.sweep_named(name).ok_or_else(|| {
            let known: Vec<&str> = cfg.sweep.iter().map(|s| s.name.as_str()).collect();
            RunError::Request(format!("no sweep named {name:?} (available: {})", known.join(", ")))
        })?],
        None => cfg.sweep.iter().collect(),
    };
    if sweeps.is_empty() {
        return Err(RunError::Request("configuration defines no [[sweep]] entries".into()));
    }
    let workers = opts.workers.unwrap_or_else(worker_count);
    let mut report = RunReport {
        files: Vec::new(),
        converged: true,
    };
    for sw in sweeps {
        let r = run_one_sweep(&cfg, sw, opts.check_convergence, workers)?;
        report.merge(r);
    }
    Ok(report)
}

fn run_one_sweep(cfg: &SimulationConfig, sw: &SweepSpec, check: bool, workers: usize) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let dir = task_dir(cfg, &sw.name)?;
    let values = cfg.sweep_values(sw).map_err(RunError::Request)?;
    if values.is_empty() {
        return Err(RunError::Request(format!("sweep {:?} is empty", sw.name)));
    }
    let mut report = RunReport {
        files: Vec::new(),
        converged: true,
    };

    if sw.variable == SweepVariable::ZHeight {
        let point = sweep_point(cfg, sw, values[0])?;
        let offset = sw.delta_omega.clone().unwrap_or_default();
        let grid = compute_indicator(cfg, &point.stack, point.truncation, &offset, &values, &[point.temperature], workers)?;
        let path = write_indicator_grid(&dir, &grid)?;
        report.files.push(path);
        let manifest = write_manifest(&dir, &sw.name, cfg, started, workers, &report)?;
        report.files.push(manifest);
        return Ok(report);
    }

    let quad = cfg.quadrature_spec();
    let mut rows = Vec::with_capacity(values.len());
    let mut dominance_rows = Vec::new();
    let mut convergence_rows = Vec::new();
    let mut shared: Option<SpectralFluxTable> = None;
    for (i, &v) in values.iter().enumerate() {
        let point = sweep_point(cfg, sw, v)?;
        let table = match (&shared, sw.variable) {
            (Some(t), SweepVariable::Temperature) => t.clone(),
            _ => {
                let t = with_pool(Some(workers), || spectral_flux_table(&point.stack, point.truncation, &quad))??;
                if sw.variable == SweepVariable::Temperature {
                    shared = Some(t.clone());
                }
                t
            }
        };
        let b = table.breakdown(point.temperature);
        let ok = table.converged();
        report.converged &= ok;
        let spectrum_file = if sw.spectra {
            let name = format!("spectrum_{i}.csv");
            let path = dir.join(&name);
            let (h, r) = spectrum_rows(&table);
            write_csv(&path, &h, &r)?;
            report.files.push(path);
            name
        } else {
            String::new()
        };
        rows.push(vec![
            fmt_num(v),
            fmt_num(b.phi_q),
            fmt_num(b.phi_t),
            fmt_num(b.upsilon),
            fmt_num(b.q_net),
            fmt_num(b.dominance),
            ok.to_string(),
            spectrum_file,
        ]);
        if let Some(r) = &sw.dominance_temperatures {
            for t in r.values() {
                dominance_rows.push(vec![fmt_num(v), fmt_num(t), fmt_num(table.breakdown(t).dominance)]);
            }
        }
        if check {
            let refined = if sw.variable == SweepVariable::Temperature && i > 0 {
                None
            } else {
                Some(with_pool(Some(workers), || spectral_flux_table(&point.stack, point.truncation + 1, &quad))??)
            };
            if let Some(t2) = refined {
                let (a, b2) = (table.phi_q(), t2.phi_q());
                let rel = if a == b2 { 0.0 } else { (a - b2).abs() / a.abs().max(b2.abs()) };
                let pass = rel < CONVERGENCE_TOLERANCE && t2.converged();
                report.converged &= pass;
                convergence_rows.push(vec![fmt_num(v), fmt_num(a), fmt_num(b2), fmt_num(rel), pass.to_string()]);
            }
        }
    }
    let col = sweep_column(sw.variable).to_string();
    let path = dir.join("flux_sweep.csv");
    let header: Vec<String> = [col.as_str(), "phi_q", "phi_t", "upsilon", "q_net", "dominance", "converged", "spectrum_file"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    write_csv(&path, &header, &rows)?;
    report.files.insert(0, path);
    if !dominance_rows.is_empty() {
        let path = dir.join("dominance_map.csv");
        write_csv(&path, &[col.clone(), "temperature_K".into(), "dominance".into()], &dominance_rows)?;
        report.files.push(path);
    }
    if check {
        let path = dir.join("convergence.csv");
        let header: Vec<String> = [col.as_str(), "phi_q", "phi_q_refined", "rel_change", "ok"].iter().map(|s| s.to_string()).collect();
        write_csv(&path, &header, &convergence_rows)?;
        report.files.push(path);
    }
    let manifest = write_manifest(&dir, &sw.name, cfg, started, workers, &report)?;
    report.files.push(manifest);
    Ok(report)
}

fn sweep_column(v: SweepVariable) -> &'static str {
    match v {
        SweepVariable::ModFreq => "omega_meV",
        other => other.column(),
    }
}

fn compute_indicator(
    cfg: &SimulationConfig,
    stack: &LayerStack,
    truncation: usize,
    offset: &crate::config::PairOffset,
    zs: &[f64],
    ts: &[f64],
    workers: usize,
) -> Result<IndicatorGrid, RunError> {
    let m = stack.modulation().mod_freq;
    let dw = offset.resolve(cfg.surface_modes()).map_err(RunError::Request)?;
    let pair = QuadraturePairSpec::new(m, dw)?;
    let quad = cfg.quadrature_spec();
    Ok(with_pool(Some(workers), || indicator_grid(stack, truncation, &pair, zs, ts, &quad))??)
}

fn write_indicator_grid(dir: &Path, grid: &IndicatorGrid) -> Result<PathBuf, RunError> {
    let path = dir.join("indicator_grid.csv");
    let mut rows = Vec::new();
    for (iz, &z) in grid.z_grid.iter().enumerate() {
        for (it, &t) in grid.t_grid.iter().enumerate() {
            rows.push(vec![fmt_num(z), fmt_num(t), fmt_num(grid.values[iz][it])]);
        }
    }
    let header = ["z_nm", "T_K", "indicator_normalized"].map(String::from);
    write_csv(&path, &header, &rows)?;
    Ok(path)
}

/// Runs every `[[indicator]]` grid (or only `opts.only`).
pub fn run_indicators(cfg: &SimulationConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let cfg = effective_config(cfg, opts)?;
    let grids: Vec<&IndicatorSpec> = match &opts.only {
        Some(name) => vec![cfg
            .indicator
            .iter()
            .find(|g| &g.name == name)
            .ok_or_else(|| RunError::Request(format!("no indicator grid named {name:?}")))?],
        None => cfg.indicator.iter().collect(),
    };
    if grids.is_empty() {
        return Err(RunError::Request("configuration defines no [[indicator]] grids".into()));
    }
    let workers = opts.workers.unwrap_or_else(worker_count);
    let mut report = RunReport {
        files: Vec::new(),
        converged: true,
    };
    for g in grids {
        let started = Instant::now();
        let dir = task_dir(&cfg, &g.name)?;
        let mut stack = cfg.stack().map_err(RunError::Request)?;
        if let Some(e) = &g.mod_freq {
            let mut m = stack.modulation();
            m.mod_freq = cfg.resolve_energy(e).map_err(RunError::Request)?;
            stack = stack.with_modulation(m);
        }
        let grid = compute_indicator(&cfg, &stack, cfg.run.truncation, &g.delta_omega, &g.z.values(), &g.temperature.values(), workers)?;
        let mut part = RunReport {
            files: vec![write_indicator_grid(&dir, &grid)?],
            converged: true,
        };
        let manifest = write_manifest(&dir, &g.name, &cfg, started, workers, &part)?;
        part.files.push(manifest);
        report.merge(part);
    }
    Ok(report)
}

/// Gap-mode dispersion of the static stack, written to `dispersion/dispersion.csv`.
pub fn run_dispersion(cfg: &SimulationConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let cfg = effective_config(cfg, opts)?;
    let spec = cfg
        .dispersion
        .ok_or_else(|| RunError::Request("configuration has no [dispersion] section".into()))?;
    let started = Instant::now();
    let dir = task_dir(&cfg, "dispersion")?;
    let stack = cfg.stack().map_err(RunError::Request)?;
    let ks = spec.kpar.values();
    let branches = gap_mode_dispersion(&stack, &ks);
    let mut rows = Vec::new();
    for (k, roots) in ks.iter().zip(&branches) {
        for (b, w) in roots.iter().enumerate() {
            rows.push(vec![fmt_num(*k), b.to_string(), fmt_num(*w)]);
        }
    }
    let path = dir.join("dispersion.csv");
    write_csv(&path, &["kpar_per_nm", "branch", "energy_meV"].map(String::from), &rows)?;
    let mut report = RunReport {
        files: vec![path],
        converged: true,
    };
    let manifest = write_manifest(&dir, "dispersion", &cfg, started, 1, &report)?;
    report.files.push(manifest);
    Ok(report)
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), RunError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err(path))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize, RunError> {
    header.iter().position(|h| h == name).ok_or_else(|| RunError::Csv {
        path: path.to_path_buf(),
        message: format!("missing column {name:?}"),
    })
}

fn parse_num(s: &str, path: &Path) -> Result<f64, RunError> {
    s.parse::<f64>().map_err(|_| RunError::Csv {
        path: path.to_path_buf(),
        message: format!("not a number: {s:?}"),
    })
}

/// Converts a run CSV into a whitespace-separated `.dat` file named after the
/// task directory (`<task>.dat`), or after the file stem for spectra
/// (`<task>_spectrum_<i>.dat`).
///
/// * `flux_sweep.csv` → swept column, `phi_q`, `phi_t`, `upsilon`.
/// * `indicator_grid.csv` → `z_nm T_K indicator_normalized` blocks separated
///   by blank lines, followed by `# zero_contour` rows `z_nm T_K` found by
///   linear interpolation along T.
/// * `spectrum_<i>.csv` → `freq_meV` and the `F1_l<l>` columns.
/// * `dispersion.csv` → `kpar_per_nm branch energy_meV`.
pub fn emit_plot_data(csv_path: &Path, out_dir: &Path) -> Result<PathBuf, RunError> {
    let (header, rows) = read_table(csv_path)?;
    if rows.is_empty() {
        return Err(RunError::Csv {
            path: csv_path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    let file = csv_path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let stem = csv_path.file_stem().and_then(|n| n.to_str()).unwrap_or("data");
    let task = csv_path
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|n| n.to_str())
        .unwrap_or(stem)
        .to_string();

    let (name, cols): (String, Vec<usize>) = if file == "flux_sweep.csv" {
        let mut cols = vec![0];
        for c in ["phi_q", "phi_t", "upsilon"] {
            cols.push(column(&header, c, csv_path)?);
        }
        (task.clone(), cols)
    } else if file == "indicator_grid.csv" {
        let cols = ["z_nm", "T_K", "indicator_normalized"]
            .iter()
            .map(|c| column(&header, c, csv_path))
            .collect::<Result<Vec<_>, _>>()?;
        (task.clone(), cols)
    } else if file.starts_with("spectrum_") {
        let mut cols = vec![column(&header, "freq_meV", csv_path)?];
        cols.extend(header.iter().enumerate().filter(|(_, h)| h.starts_with("F1_l")).map(|(i, _)| i));
        if cols.len() == 1 {
            return Err(RunError::Csv {
                path: csv_path.to_path_buf(),
                message: "missing F1_l columns".into(),
            });
        }
        (format!("{task}_{stem}"), cols)
    } else if file == "dispersion.csv" {
        let cols = ["kpar_per_nm", "branch", "energy_meV"]
            .iter()
            .map(|c| column(&header, c, csv_path))
            .collect::<Result<Vec<_>, _>>()?;
        (task.clone(), cols)
    } else {
        return Err(RunError::Csv {
            path: csv_path.to_path_buf(),
            message: "unrecognised run file (expected flux_sweep, indicator_grid, spectrum_<i> or dispersion)".into(),
        });
    };

    let mut out = String::new();
    out.push_str("# ");
    out.push_str(&cols.iter().map(|&c| header[c].as_str()).collect::<Vec<_>>().join(" "));
    out.push('\n');
    let indicator = file == "indicator_grid.csv";
    let mut last_z: Option<String> = None;
    for r in &rows {
        if r.len() != header.len() {
            return Err(RunError::Csv {
                path: csv_path.to_path_buf(),
                message: "ragged row".into(),
            });
        }
        if indicator {
            if last_z.as_ref().is_some_and(|z| z != &r[cols[0]]) {
                out.push('\n');
            }
            last_z = Some(r[cols[0]].clone());
        }
        out.push_str(&cols.iter().map(|&c| r[c].as_str()).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    if indicator {
        out.push_str("\n# zero_contour z_nm T_K\n");
        let mut blocks: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for r in &rows {
            let z = parse_num(&r[cols[0]], csv_path)?;
            let t = parse_num(&r[cols[1]], csv_path)?;
            let v = parse_num(&r[cols[2]], csv_path)?;
            match blocks.last_mut() {
                Some(b) if b.0 == z => {
                    b.1.push(t);
                    b.2.push(v);
                }
                _ => blocks.push((z, vec![t], vec![v])),
            }
        }
        for (z, ts, vs) in blocks {
            if let Some(t) = crate::nonclassicality::zero_crossing(&ts, &vs) {
                out.push_str(&format!("# zero_contour {} {}\n", fmt_num(z), fmt_num(t)));
            }
        }
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let path = out_dir.join(format!("{name}.dat"));
    fs::write(&path, out).map_err(io_err(&path))?;
    Ok(path)
}
