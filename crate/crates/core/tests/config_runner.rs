//! Configuration loading and sweep output.

use std::fs;
use std::path::{Path, PathBuf};

use dce_core::config::{load_config, ConfigError, SimulationConfig};
use dce_core::runner::{emit_plot_data, run_dispersion, run_indicators, run_sweep, RunOptions};
use dce_core::stack::LayerStack;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const BASE: &str = r#"
[stack]
gap_nm = 10.0
mod_thickness_nm = 22.0
body1 = { kind = "quartz" }
body2 = { kind = "inp" }

[modulation]
eps_static = 4.0
delta_eps = 0.4
mod_freq = 92.0
"#;

fn issues_of(text: &str) -> Vec<(String, Option<usize>)> {
    match SimulationConfig::from_toml_str(text) {
        Err(ConfigError::Invalid(v)) => v.into_iter().map(|i| (i.path, i.line)).collect(),
        other => panic!("expected validation issues, got {other:?}"),
    }
}

#[test]
fn bundled_configs_load_and_round_trip() {
    let mut n = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let text = cfg.to_toml_string().unwrap();
        let again = SimulationConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        n += 1;
    }
    assert!(n >= 4, "expected the default and one recipe per figure");
}

#[test]
fn paper_default_matches_reference_setup() {
    let cfg = load_config(&configs_dir().join("paper_default.toml")).unwrap();
    let (w1, w2) = cfg.surface_modes().unwrap();
    assert_eq!(cfg.stack().unwrap(), LayerStack::paper_default(w1 + w2));
    assert_eq!(cfg.run.temperature, 300.0);
    assert_eq!(cfg.run.truncation, 3);
    assert_eq!(cfg.stack.gap_nm, 10.0);
}

#[test]
fn modulation_deeper_than_static_permittivity_is_rejected() {
    let text = BASE.replace("delta_eps = 0.4", "delta_eps = 5.0");
    let issues = issues_of(&text);
    assert_eq!(issues, vec![("modulation.delta_eps".to_string(), Some(10))]);
}

#[test]
fn unknown_keys_are_rejected_everywhere() {
    for extra in ["[run]\ntemprature = 3.0\n", "[[sweep]]\nname = \"a\"\nvariable = \"gap\"\nvalues = [1.0]\ncolour = 1\n"] {
        let text = format!("{BASE}\n{extra}");
        assert!(matches!(SimulationConfig::from_toml_str(&text), Err(ConfigError::Parse { line: Some(_), .. })), "{extra}");
    }
    let text = BASE.replace("{ kind = \"inp\" }", "{ kind = \"unobtainium\" }");
    assert!(matches!(SimulationConfig::from_toml_str(&text), Err(ConfigError::Parse { .. })));
}

#[test]
fn sweep_ranges_are_checked() {
    let text = format!("{BASE}\n[[sweep]]\nname = \"a\"\nvariable = \"gap\"\nstart = -1.0\nstop = 10.0\npoints = 5\nscale = \"log\"\n\n[[sweep]]\nname = \"b\"\nvariable = \"mod_freq\"\nstart = 80.0\nstop = 90.0\npoints = 1\n");
    let issues = issues_of(&text);
    let paths: Vec<&str> = issues.iter().map(|(p, _)| p.as_str()).collect();
    assert!(paths.contains(&"sweep[0].scale"), "{issues:?}");
    assert!(paths.contains(&"sweep[1].points"), "{issues:?}");
    let line = issues.iter().find(|(p, _)| p == "sweep[1].points").unwrap().1;
    assert_eq!(line, Some(26));
}

#[test]
fn empty_and_unknown_names_are_rejected() {
    let text = format!("{BASE}\n[[sweep]]\nname = \"a\"\nvariable = \"mod_freq\"\nvalues = []\n");
    assert_eq!(issues_of(&text)[0].0, "sweep[0].values");
    let text = BASE.replace("mod_freq = 92.0", "mod_freq = \"3*omega7\"");
    assert_eq!(issues_of(&text)[0].0, "modulation.mod_freq");
    let text = BASE.replace("body2 = { kind = \"inp\" }", "body2 = { kind = \"constant\", re = 3.0, im = 0.2 }").replace("mod_freq = 92.0", "mod_freq = \"2*omega2\"");
    assert_eq!(issues_of(&text)[0].0, "modulation.mod_freq");
}

fn quick_config(out: &Path) -> SimulationConfig {
    let text = format!(
        "{BASE}\n[run]\ntruncation = 1\noutput_dir = {:?}\n\n[quadrature]\nrel_tol = 1e-2\n\n\
         [[sweep]]\nname = \"omega\"\nvariable = \"mod_freq\"\nvalues = [85.0, \"omega1+omega2\"]\nspectra = true\n\
         dominance_temperatures = {{ start = 100.0, stop = 300.0, points = 3 }}\n\n\
         [[sweep]]\nname = \"temps\"\nvariable = \"temperature\"\nstart = 0.0\nstop = 400.0\npoints = 3\n\n\
         [[indicator]]\nname = \"grid\"\nmod_freq = \"2*omega2\"\nz = {{ start = 2.0, stop = 6.0, points = 2 }}\n\
         temperature = {{ start = 0.0, stop = 300.0, points = 4 }}\n\n\
         [dispersion]\nkpar = {{ start = 0.01, stop = 1.0, points = 5, scale = \"log\" }}\n",
        out.display().to_string()
    );
    SimulationConfig::from_toml_str(&text).unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn sweeps_are_byte_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = quick_config(a.path());
    let ra = run_sweep(&cfg, &RunOptions { workers: Some(1), ..Default::default() }).unwrap();
    let rb = run_sweep(
        &cfg,
        &RunOptions {
            workers: Some(4),
            out_dir: Some(b.path().to_path_buf()),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(ra.converged && rb.converged);
    let csvs: Vec<&PathBuf> = ra.files.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    assert_eq!(csvs.len(), 2 + 2 + 1);
    for p in csvs {
        let rel = p.strip_prefix(a.path()).unwrap();
        assert_eq!(read(p), read(&b.path().join(rel)), "{}", rel.display());
    }

    let flux = read(&a.path().join("omega/flux_sweep.csv"));
    let mut lines = flux.lines();
    assert_eq!(lines.next().unwrap(), "omega_meV,phi_q,phi_t,upsilon,q_net,dominance,converged,spectrum_file");
    assert!(lines.next().unwrap().ends_with(",true,spectrum_0.csv"));
    assert_eq!(read(&a.path().join("omega/dominance_map.csv")).lines().count(), 1 + 2 * 3);
    let spectrum = read(&a.path().join("omega/spectrum_1.csv"));
    assert!(spectrum.starts_with("freq_meV,weight_meV,F1_l-1,F1_l0,F1_l1\n"));

    // one shared table for a temperature sweep: Φ^Q identical in every row
    let temps = read(&a.path().join("temps/flux_sweep.csv"));
    let phi_q: Vec<&str> = temps.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(phi_q.len(), 3);
    assert!(phi_q.iter().all(|v| *v == phi_q[0]));

    let manifest: serde_json::Value = serde_json::from_str(&read(&a.path().join("omega/run_manifest.json"))).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time_s"].as_f64().unwrap() > 0.0);

    let dat = emit_plot_data(&a.path().join("omega/flux_sweep.csv"), a.path()).unwrap();
    assert_eq!(read(&dat).lines().next().unwrap(), "# omega_meV phi_q phi_t upsilon");
    assert_eq!(read(&dat).lines().count(), 3);
}

#[test]
fn single_sweep_selection_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let opts = RunOptions {
        only: Some("temps".into()),
        truncation: Some(2),
        ..Default::default()
    };
    let r = run_sweep(&cfg, &opts).unwrap();
    assert!(r.files.iter().all(|p| p.starts_with(dir.path().join("temps"))));
    let manifest = read(&dir.path().join("temps/run_manifest.json"));
    assert!(manifest.contains("\"truncation\": 2"));
    let missing = RunOptions {
        only: Some("nope".into()),
        ..Default::default()
    };
    let err = run_sweep(&cfg, &missing).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn indicator_and_dispersion_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    run_indicators(&cfg, &RunOptions::default()).unwrap();
    let grid = read(&dir.path().join("grid/indicator_grid.csv"));
    let rows: Vec<&str> = grid.lines().collect();
    assert_eq!(rows[0], "z_nm,T_K,indicator_normalized");
    assert_eq!(rows.len(), 1 + 2 * 4);
    // T = 0 with modulation is nonclassical
    let first: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(first < 0.0);
    let dat = read(&emit_plot_data(&dir.path().join("grid/indicator_grid.csv"), dir.path()).unwrap());
    assert!(dat.contains("# zero_contour z_nm T_K"));

    run_dispersion(&cfg, &RunOptions::default()).unwrap();
    let disp = read(&dir.path().join("dispersion/dispersion.csv"));
    assert_eq!(disp.lines().count(), 1 + 5 * 2);
}
