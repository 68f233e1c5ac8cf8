mod common;

use std::fs;

use common::random_cube;
use hsfuse::composite::export_composite;
use hsfuse::config::load_spec;
use hsfuse::envi::{header_path, read_cube, write_cube, write_cube_as, DataType};
use hsfuse::tables::{read_coefficients, read_matrix_csv, write_coefficients, write_matrix_csv};
use hsfuse_core::{
    derive_coefficients, spectral_subspace_from_lrhs, HsCube, Matrix, SpectralResponse,
};

#[test]
fn f64_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.bsq");
    let x = random_cube(7, 5, 4, 1);
    write_cube(&x, &p).unwrap();
    let back = read_cube(&p).unwrap();
    assert_eq!(back.shape(), x.shape());
    assert!(back
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
    // Opening through the header path gives the same cube.
    assert_eq!(read_cube(header_path(&p)).unwrap(), x);
}

#[test]
fn truncated_payload_is_a_size_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.bsq");
    fs::write(
        header_path(&p),
        "ENVI\nsamples = 2\nlines = 2\nbands = 2\ndata type = 4\ninterleave = bsq\nbyte order = 0\n",
    )
    .unwrap();
    let payload: Vec<u8> = (0..7).flat_map(|i| (i as f32).to_le_bytes()).collect();
    fs::write(&p, payload).unwrap();
    let err = read_cube(&p).unwrap_err();
    assert_eq!(err.category(), "size", "{err}");
}

#[test]
fn malformed_header_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.bsq");
    fs::write(header_path(&p), "ENVI\nsamples = 2\nlines 2\n").unwrap();
    fs::write(&p, [0u8; 32]).unwrap();
    match read_cube(&p).unwrap_err() {
        hsfuse::Error::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other}"),
    }
}

#[test]
fn f32_round_trip_within_single_precision() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x32.bsq");
    let x = random_cube(9, 6, 5, 2);
    write_cube_as(&x, &p, DataType::F32).unwrap();
    let back = read_cube(&p).unwrap();
    let max = x.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = 2f64.powi(-23) * max;
    let worst = back
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(worst <= bound, "max error {worst} exceeds {bound}");
}

#[test]
fn constant_cube_composite_is_mid_gray() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.png");
    let x = HsCube::from_fn(6, 4, 3, |_, _, _| 0.37);
    export_composite(&x, [0, 1, 2], &p).unwrap();
    let img = image::open(&p).unwrap().to_rgb8();
    assert_eq!((img.width(), img.height()), (4, 6));
    assert!(img.pixels().all(|px| px.0 == [128, 128, 128]));
}

#[test]
fn composite_of_128_band_cube() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("chikusei.png");
    let x = random_cube(20, 30, 128, 3);
    export_composite(&x, [70, 100, 36], &p).unwrap();
    let img = image::open(&p).unwrap();
    assert_eq!(img.color(), image::ColorType::Rgb8);
    assert_eq!((img.width(), img.height()), (30, 20));
    let rgb = img.to_rgb8();
    // Per-channel stretch reaches both ends of the 8-bit range.
    for ch in 0..3 {
        assert_eq!(rgb.pixels().map(|px| px.0[ch]).min(), Some(0));
        assert_eq!(rgb.pixels().map(|px| px.0[ch]).max(), Some(255));
    }

    let again = dir.path().join("again.png");
    export_composite(&x, [70, 100, 36], &again).unwrap();
    assert_eq!(fs::read(&p).unwrap(), fs::read(&again).unwrap());

    let err = export_composite(&x, [70, 128, 36], dir.path().join("bad.png")).unwrap_err();
    assert_eq!(err.category(), "parameter");
}

#[test]
fn matrix_and_coefficient_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = Matrix::from_fn(3, 4, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
    let mp = dir.path().join("m.csv");
    write_matrix_csv(&m, &mp).unwrap();
    assert_eq!(read_matrix_csv(&mp).unwrap(), m);

    let z = random_cube(8, 8, 12, 4).map(|v| v.abs());
    let basis = spectral_subspace_from_lrhs(&z, 5).unwrap();
    let coeff = derive_coefficients(&basis, &SpectralResponse::rgb_preset(12).unwrap()).unwrap();
    let cp = dir.path().join("coefficients.csv");
    write_coefficients(&coeff, &cp).unwrap();
    assert_eq!(read_coefficients(&cp).unwrap(), coeff);
}

#[test]
fn spec_resolves_relative_paths_and_checks_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    write_cube(&random_cube(4, 4, 6, 5), data.join("a.bsq")).unwrap();
    write_cube(&random_cube(4, 4, 6, 6), data.join("b.bsq")).unwrap();
    write_matrix_csv(
        &Matrix::from_fn(2, 2, |_, _| 0.25),
        dir.path().join("k.csv"),
    )
    .unwrap();
    let solver = common::solver_json(10, 4, 0.0);
    let spec = format!(
        r#"{{"input_dir": "data", "degradation": {{"kernel": {{"path": "k.csv"}}, "factor": 2}},
            "response": {{"preset": "rgb"}}, "solver": {solver}}}"#
    );
    let sp = common::write_spec(dir.path(), &spec);
    let resolved = load_spec(&sp).unwrap();
    let names: Vec<_> = resolved
        .inputs
        .iter()
        .map(|p| p.file_name().unwrap().to_owned())
        .collect();
    assert_eq!(names, ["a.hdr", "b.hdr"]);
    assert_eq!(resolved.degradation.factor(), 2);
    assert_eq!(resolved.noise.sigma, 0.0);

    let missing = spec.replace(r#""input_dir": "data""#, r#""inputs": ["data/nope.bsq"]"#);
    let err = load_spec(common::write_spec(dir.path(), &missing)).unwrap_err();
    assert_eq!(err.category(), "io");
    let unknown = spec.replace(r#""preset": "rgb""#, r#""preset": "cmyk""#);
    assert_eq!(
        load_spec(common::write_spec(dir.path(), &unknown))
            .unwrap_err()
            .category(),
        "config"
    );
    let bad_kernel = spec.replace("0.25", "0.3");
    write_matrix_csv(&Matrix::from_fn(2, 2, |_, _| 0.3), dir.path().join("k.csv")).unwrap();
    assert_eq!(
        load_spec(common::write_spec(dir.path(), &bad_kernel))
            .unwrap_err()
            .category(),
        "parameter"
    );
}
