mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::asset;

fn idec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idec")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.conf");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn strip_config(extra: &str) -> String {
    format!(
        "mesh = {}\nmode = te\ndt = 0.1\n{extra}\n",
        asset("meshes/strip.obj").display()
    )
}

#[test]
fn zero_steps_writes_only_the_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &strip_config("steps = 0\noutput.dir = out"));
    let out = idec(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<String> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(
        files,
        ["energy.csv", "manifest.txt", "probes.csv", "snapshot_000000.csv", "snapshot_000000.vtk"]
    );
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("status = complete"));
    assert!(manifest.contains("last_completed_step = 0"));
}

#[test]
fn out_of_range_index_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &strip_config("steps = 5\nprobes.e = 41\noutput.dir = out"));
    let out = idec(&["run", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("edge index 41"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn failed_step_leaves_an_incomplete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &strip_config(
            "steps = 5\ninitial.kind = gaussian\ninitial.center = 3, 0.8, 0\nsolver.tolerance = 1e-15\n\
             solver.max_iters = 1\noutput.dir = out",
        ),
    );
    let out = idec(&["run", &cfg]);
    assert!(!out.status.success());
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("status = incomplete"), "{manifest}");
    assert!(manifest.contains("last_completed_step = 0"));
    assert!(dir.path().join("out/snapshot_000000.vtk").exists());
}

#[test]
fn output_dir_and_direct_solver_flags_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &strip_config("steps = 3\ninitial.kind = gaussian\ninitial.center = 3, 0.8, 0"));
    let target = dir.path().join("elsewhere");
    let out = idec(&["run", &cfg, "--direct-solver", "--output-dir", target.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("snapshot_000003.vtk").exists());
}

#[test]
fn check_mesh_verdicts() {
    for (name, ok) in [("icosphere_3", true), ("strip", true), ("cavity_16", true), ("square_diagonal", false)] {
        let path = asset(&format!("meshes/{name}.obj"));
        let out = idec(&["check-mesh", path.to_str().unwrap()]);
        let text = String::from_utf8_lossy(&out.stdout);
        assert_eq!(out.status.success(), ok, "{name}: {text}");
        if !ok {
            assert!(text.contains("zero dual edge"), "{text}");
        }
    }
    let sphere = idec(&["check-mesh", asset("meshes/icosphere_1.obj").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&sphere.stdout).contains("euler characteristic: 2"));
}

#[test]
fn stability_command_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = asset("configs/cavity_stability.conf");
    let out = idec(&["stability", cfg.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("growth.csv")).unwrap();
    assert!(csv.starts_with("face_id,k,M,xi_mod,dt\n"));
    let summary = fs::read_to_string(dir.path().join("stability_summary.txt")).unwrap();
    assert!(summary.contains("phi"));
    assert!(summary.contains("verdict: stable"));
}

#[test]
fn convergence_without_mesh_family_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &strip_config(""));
    let out = idec(&["convergence", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("convergence.meshes"));
}

#[test]
fn unknown_config_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &strip_config("solver.tolerence = 1"));
    let out = idec(&["run", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `solver.tolerence`"));
}

#[test]
fn signed_mode_is_flagged_in_the_manifest() {
    use idec::mesh::{write_obj, Point3, SimplicialSurface};
    let dir = tempfile::tempdir().unwrap();
    let s = SimplicialSurface::from_triangles(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(1.0, 0.2, 0.0),
            Point3::new(1.0, -1.5, 0.0),
        ],
        vec![[0, 1, 2], [0, 3, 1]],
    )
    .unwrap();
    fs::write(dir.path().join("obtuse.obj"), write_obj(&s)).unwrap();
    let cfg = write_config(dir.path(), "mesh = obtuse.obj\ndt = 0.1\nsteps = 2\nboundary = natural\noutput.dir = out");

    let refused = idec(&["run", &cfg]);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("non-well-centered"));

    let no_indefinite = idec(&["run", &cfg, "--allow-non-well-centered"]);
    assert!(String::from_utf8_lossy(&no_indefinite.stderr).contains("indefinite"));

    let out = idec(&["run", &cfg, "--allow-non-well-centered", "--allow-indefinite", "--direct-solver"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("warning = mesh is not well-centered"), "{manifest}");
    assert!(manifest.contains("warning = negative Hodge star"), "{manifest}");
}
