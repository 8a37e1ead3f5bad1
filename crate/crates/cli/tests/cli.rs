use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracms")).args(args).output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        "[domain]\nnx = 32\nny = 32\n\n[material]\ntau = 30.0\nn_steps = 10\n\n[cloud]\nn_points = 36\n\n[basis]\nm = 3\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn mesh_prints_statistics() {
    let out = fracms(&["mesh"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices        25921"));
    assert!(text.contains("triangles       51200"));
    assert!(text.contains("dirichlet nodes 161"));
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = fracms(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["manifest.toml", "cloud.csv", "errors_fine_vs_ms_partial.csv", "pressure_fine_t300.0.vtk"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let manifest = fs::read_to_string(out_dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 7"));
}

#[test]
fn sweep_and_cfl() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("sweep");
    let out = fracms(&["sweep", "--param", "kf", "--values", "1e1,1e3", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("kf_10.0/manifest.toml").exists());
    assert!(out_dir.join("kf_1000.0/manifest.toml").exists());
    let out = fracms(&["cfl", "--config", &cfg]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("tau_stable(all)"));
}

#[test]
fn failures_exit_nonzero_with_a_stage_tag() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[material]\nk_f = -1.0\n").unwrap();
    let out = fracms(&["mesh", "--config", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage `config`"));

    let out = fracms(&["mesh", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage `config`"));

    let frac = dir.path().join("outside.toml");
    fs::write(&frac, "[domain]\nfractures = { file = \"nope.csv\" }\n").unwrap();
    let out = fracms(&["mesh", "--config", frac.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage `mesh`"));

    let out = fracms(&["sweep", "--param", "zeta", "--values", "1"]);
    assert!(!out.status.success());
}
