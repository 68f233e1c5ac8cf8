mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{random_cube, solver_json, uniform_spec, write_spec};
use hsfuse::envi::{read_cube, write_cube};
use hsfuse::pipeline::simulate_cube;
use hsfuse_core::{fuse, FusionConfig, SpatialDegradation, SpectralResponse, StepSize};

fn hsfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsfuse"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = hsfuse(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_at_factor_32() {
    let dir = tempfile::tempdir().unwrap();
    let x = random_cube(512, 512, 31, 11).map(|v| v.abs());
    let xp = dir.path().join("scene.bsq");
    write_cube(&x, &xp).unwrap();
    let spec = write_spec(
        dir.path(),
        &uniform_spec(&[xp], 32, 0.0, 0, &solver_json(5, 8, 0.0)),
    );
    let out = dir.path().join("sim");
    ok(&["simulate", "--config", s(&spec), "--out", s(&out)]);
    assert_eq!(
        read_cube(out.join("scene/lrhs.bsq")).unwrap().shape(),
        (16, 16, 31)
    );
    assert_eq!(
        read_cube(out.join("scene/hrms.bsq")).unwrap().shape(),
        (512, 512, 3)
    );
    assert_eq!(read_cube(out.join("scene/truth.bsq")).unwrap(), x);
}

#[test]
fn evaluate_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let x = random_cube(24, 24, 6, 12).map(|v| v.abs() + 0.1);
    let xp = dir.path().join("ref.bsq");
    write_cube(&x, &xp).unwrap();
    let out = dir.path().join("eval");
    ok(&[
        "evaluate",
        "--reference",
        s(&xp),
        "--test",
        s(&xp),
        "--factor",
        "4",
        "--out",
        s(&out),
    ]);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["sam"], 0.0);
    assert_eq!(m["ergas"], 0.0);
    assert_eq!(m["ssim"], 1.0);
    assert_eq!(m["psnr"], 99.0);
    assert!(fs::read_to_string(out.join("metrics.txt"))
        .unwrap()
        .contains("PSNR"));
}

#[test]
fn benchmark_over_twelve_cubes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&[
        "generate",
        "--out",
        s(&data),
        "--count",
        "12",
        "--height",
        "32",
        "--width",
        "32",
        "--bands",
        "16",
        "--rank",
        "5",
    ]);
    let spec = format!(
        r#"{{"input_dir": "data", "degradation": {{"kernel": {{"preset": "uniform"}}, "factor": 4}},
            "response": {{"preset": "rgb"}}, "noise": {{"sigma": 1e-3, "seed": 3}}, "solver": {}}}"#,
        solver_json(60, 5, 1e-10)
    );
    let sp = write_spec(dir.path(), &spec);
    let out = dir.path().join("bench");
    ok(&[
        "benchmark",
        "--config",
        s(&sp),
        "--out",
        s(&out),
        "--threads",
        "3",
    ]);

    let mut per_cube = csv::Reader::from_path(out.join("per_cube.csv")).unwrap();
    let header = per_cube.headers().unwrap().clone();
    assert_eq!(&header[0], "cube");
    let rows: Vec<_> = per_cube.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(&rows[0][0], "scene_00");
    assert_eq!(&rows[11][0], "scene_11");

    let mut summary = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let srows: Vec<_> = summary.records().map(Result::unwrap).collect();
    assert_eq!(srows.len(), 1);
    assert_eq!(&srows[0][0], "12");
    // The summary is the column mean of the per-cube rows.
    let col = header.iter().position(|h| h == "fused_psnr").unwrap();
    let mean = rows
        .iter()
        .map(|r| r[col].parse::<f64>().unwrap())
        .sum::<f64>()
        / 12.0;
    let sh = summary
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "fused_psnr")
        .unwrap();
    let reported: f64 = srows[0][sh].parse().unwrap();
    assert!((mean - reported).abs() <= 1e-9 * mean.abs());
    assert!(fs::read_to_string(out.join("table.txt"))
        .unwrap()
        .contains("bicubic"));
}

#[test]
fn simulate_then_fuse_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&[
        "generate",
        "--out",
        s(&data),
        "--count",
        "1",
        "--height",
        "32",
        "--width",
        "32",
        "--bands",
        "12",
        "--rank",
        "5",
        "--seed",
        "9",
    ]);
    let xp = data.join("scene_00.bsq");
    let spec = write_spec(
        dir.path(),
        &uniform_spec(
            std::slice::from_ref(&xp),
            4,
            0.0,
            0,
            &solver_json(40, 5, 0.0),
        ),
    );
    let sim = dir.path().join("sim");
    ok(&["simulate", "--config", s(&spec), "--out", s(&sim)]);
    let fused = dir.path().join("fused");
    let cube_dir = sim.join("scene_00");
    ok(&[
        "fuse",
        "--config",
        s(&spec),
        "--out",
        s(&fused),
        "--hrms",
        s(&cube_dir.join("hrms.bsq")),
        "--lrhs",
        s(&cube_dir.join("lrhs.bsq")),
    ]);

    let x = read_cube(&xp).unwrap();
    let c = SpatialDegradation::uniform(4).unwrap();
    let r = SpectralResponse::rgb_preset(12).unwrap();
    let obs = simulate_cube(&x, &c, &r, 0.0, 0, 0).unwrap();
    let cfg = FusionConfig {
        max_iters: 40,
        eta: StepSize::Auto,
        rank: 5,
        tolerance: 0.0,
        ..FusionConfig::default()
    };
    let expected = fuse(&obs.hrms, &obs.lrhs, &c, &r, &cfg).unwrap();
    assert_eq!(read_cube(fused.join("fused.bsq")).unwrap(), expected.x_hat);
    assert_eq!(read_cube(fused.join("bases.bsq")).unwrap(), expected.y_hat);
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fused.join("fusion.json")).unwrap()).unwrap();
    assert_eq!(diag["iterations_run"], 40);
    assert_eq!(diag["objective_trace"].as_array().unwrap().len(), 40);
    assert!(fused.join("coefficients.csv").is_file());
}

#[test]
fn wald_and_composite_commands() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.bsq");
    let z = dir.path().join("z.bsq");
    write_cube(&random_cube(144, 144, 3, 13), &y).unwrap();
    write_cube(&random_cube(36, 36, 8, 14), &z).unwrap();
    let spec = write_spec(
        dir.path(),
        &uniform_spec(&[], 4, 0.0, 0, &solver_json(5, 4, 0.0)),
    );
    let out = dir.path().join("wald");
    ok(&[
        "wald",
        "--config",
        s(&spec),
        "--out",
        s(&out),
        "--hrms",
        s(&y),
        "--lrhs",
        s(&z),
    ]);
    assert_eq!(
        read_cube(out.join("hrms_down.bsq")).unwrap().shape(),
        (36, 36, 3)
    );
    assert_eq!(
        read_cube(out.join("lrhs_down.bsq")).unwrap().shape(),
        (9, 9, 8)
    );
    assert_eq!(
        read_cube(out.join("reference.bsq")).unwrap().shape(),
        (36, 36, 8)
    );

    let png = dir.path().join("z.png");
    ok(&[
        "composite",
        "--input",
        s(&z),
        "--bands",
        "7,4,0",
        "--out",
        s(&png),
    ]);
    assert_eq!(image::open(&png).unwrap().width(), 36);
}

#[test]
fn errors_carry_category_path_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = hsfuse(&["simulate", "--config", s(&missing), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.starts_with("error [io]") && err.contains("missing.json"),
        "{err}"
    );

    let z = dir.path().join("z.bsq");
    write_cube(&random_cube(4, 4, 5, 1), &z).unwrap();
    let out = hsfuse(&[
        "composite",
        "--input",
        s(&z),
        "--bands",
        "0,1,9",
        "--out",
        s(&dir.path().join("c.png")),
    ]);
    assert_eq!(out.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error [parameter]"));

    let bad = write_spec(dir.path(), "{\"inputs\": [");
    let out = hsfuse(&["benchmark", "--config", s(&bad), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(4));

    let out = hsfuse(&["fuse", "--config"]);
    assert_eq!(out.status.code(), Some(2));
}
