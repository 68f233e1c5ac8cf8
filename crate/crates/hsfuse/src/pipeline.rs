//! File-level workflows behind the CLI: simulate, fuse, evaluate, benchmark, wald, generate.

use std::fs;
use std::path::{Path, PathBuf};

use hsfuse_core::baseline::bicubic_baseline;
use hsfuse_core::metrics::evaluate as evaluate_metrics;
use hsfuse_core::synth::{generate_scene, SceneSpec};
use hsfuse_core::{
    add_noise, apply_spatial_degradation, apply_spectral_response, fuse as fuse_core,
    wald_downsample, FusionConfig, FusionResult, HsCube, MetricReport, NoiseSpec,
    SpatialDegradation, SpectralResponse,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ResolvedSpec;
use crate::envi::{read_cube, write_cube};
use crate::error::{Error, Result, WithPath};
use crate::report::{mean_report, render_table, write_json, write_text, FusionDiagnostics};
use crate::tables::write_coefficients;

/// Overrides applied on top of a spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: usize,
    pub peak: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            threads: 1,
            peak: None,
        }
    }
}

/// Noise stream for the multispectral observation.
pub const STREAM_HRMS: u64 = 0;
/// Noise stream for the hyperspectral observation.
pub const STREAM_LRHS: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-cube, per-stream noise seed; independent of scheduling order.
pub fn derive_seed(seed: u64, index: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ stream)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Name used for a cube's output directory and table row.
pub fn cube_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cube".into())
}

fn check_factor(x: &HsCube, c: &SpatialDegradation, path: &Path) -> Result<()> {
    let f = c.factor();
    if !x.height().is_multiple_of(f) || !x.width().is_multiple_of(f) {
        return Err(Error::Core {
            path: path.to_path_buf(),
            source: hsfuse_core::FusionError::Shape(format!(
                "cube is {}x{}, not divisible by factor {f}",
                x.height(),
                x.width()
            )),
        });
    }
    Ok(())
}

/// Observed pair degraded from a ground-truth cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub hrms: HsCube,
    pub lrhs: HsCube,
}

pub fn simulate_cube(
    x: &HsCube,
    c: &SpatialDegradation,
    r: &SpectralResponse,
    sigma: f64,
    seed: u64,
    index: u64,
) -> hsfuse_core::Result<Observation> {
    let mut hrms = apply_spectral_response(x, r)?;
    let mut lrhs = apply_spatial_degradation(x, c)?;
    if sigma > 0.0 {
        hrms = add_noise(
            &hrms,
            &NoiseSpec::new(sigma, derive_seed(seed, index, STREAM_HRMS))?,
        );
        lrhs = add_noise(
            &lrhs,
            &NoiseSpec::new(sigma, derive_seed(seed, index, STREAM_LRHS))?,
        );
    }
    Ok(Observation { hrms, lrhs })
}

fn noise_seed(spec: &ResolvedSpec, opts: &RunOptions) -> u64 {
    opts.seed.unwrap_or(spec.noise.seed)
}

/// Writes `<out>/<stem>/{hrms,lrhs,truth}.bsq` for every input cube.
pub fn simulate(spec: &ResolvedSpec, out: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let seed = noise_seed(spec, opts);
    let mut dirs = Vec::new();
    for (i, path) in spec.inputs.iter().enumerate() {
        let x = read_cube(path)?;
        check_factor(&x, &spec.degradation, path)?;
        let r = spec.response_for(x.bands()).at(path)?;
        let obs =
            simulate_cube(&x, &spec.degradation, &r, spec.noise.sigma, seed, i as u64).at(path)?;
        let dir = out.join(cube_name(path));
        create_dir(&dir)?;
        write_cube(&obs.hrms, dir.join("hrms.bsq"))?;
        write_cube(&obs.lrhs, dir.join("lrhs.bsq"))?;
        write_cube(&x, dir.join("truth.bsq"))?;
        dirs.push(dir);
    }
    Ok(dirs)
}

/// Fuses one observed pair from disk, writing the estimate, bases, coefficients and diagnostics.
pub fn fuse_files(
    spec: &ResolvedSpec,
    hrms: &Path,
    lrhs: &Path,
    out: &Path,
) -> Result<FusionResult> {
    let y = read_cube(hrms)?;
    let z = read_cube(lrhs)?;
    let r = spec.response_for(z.bands()).at(lrhs)?;
    let res = fuse_core(&y, &z, &spec.degradation, &r, &spec.solver).at(lrhs)?;
    create_dir(out)?;
    write_fusion_outputs(&spec.solver, &res, out)?;
    Ok(res)
}

pub fn write_fusion_outputs(cfg: &FusionConfig, res: &FusionResult, out: &Path) -> Result<()> {
    write_cube(&res.x_hat, out.join("fused.bsq"))?;
    write_cube(&res.y_hat, out.join("bases.bsq"))?;
    write_coefficients(&res.coeff, out.join("coefficients.csv"))?;
    write_json(&FusionDiagnostics::new(cfg, res), out.join("fusion.json"))
}

/// Scores `test` against `reference`, writing `metrics.json` and `metrics.txt`.
pub fn evaluate_files(
    reference: &Path,
    test: &Path,
    factor: f64,
    peak: Option<f64>,
    out: &Path,
) -> Result<MetricReport> {
    let x = read_cube(reference)?;
    let t = read_cube(test)?;
    let report = evaluate_metrics(&x, &t, factor, peak).at(test)?;
    create_dir(out)?;
    write_json(&report, out.join("metrics.json"))?;
    write_text(
        &render_table(&[(&cube_name(test), &report)]),
        out.join("metrics.txt"),
    )?;
    Ok(report)
}

/// Reduced-resolution triplet from an observed pair on disk.
pub fn wald_files(spec: &ResolvedSpec, hrms: &Path, lrhs: &Path, out: &Path) -> Result<()> {
    let y = read_cube(hrms)?;
    let z = read_cube(lrhs)?;
    let t = wald_downsample(&y, &z, &spec.degradation).at(hrms)?;
    create_dir(out)?;
    write_cube(&t.hrms, out.join("hrms_down.bsq"))?;
    write_cube(&t.lrhs, out.join("lrhs_down.bsq"))?;
    write_cube(&t.reference, out.join("reference.bsq"))
}

/// Writes `count` synthetic low-rank scenes named `scene_NN.bsq`.
pub fn generate(
    out: &Path,
    count: usize,
    shape: (usize, usize, usize),
    rank: usize,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let width = count.saturating_sub(1).to_string().len().max(2);
    (0..count)
        .map(|i| {
            let path = out.join(format!("scene_{i:0width$}.bsq"));
            let spec = SceneSpec {
                height: shape.0,
                width: shape.1,
                bands: shape.2,
                rank,
                seed: derive_seed(seed, i as u64, 2),
            };
            write_cube(&generate_scene(&spec).at(&path)?, &path)?;
            Ok(path)
        })
        .collect()
}

/// Metrics for one benchmark cube.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeRow {
    pub name: String,
    pub iterations: usize,
    pub fused: MetricReport,
    pub bicubic: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkOutcome {
    pub cubes: usize,
    pub rows: Vec<CubeRow>,
    pub mean_fused: MetricReport,
    pub mean_bicubic: MetricReport,
}

fn benchmark_cube(
    spec: &ResolvedSpec,
    path: &Path,
    index: usize,
    seed: u64,
    peak: Option<f64>,
) -> Result<CubeRow> {
    let x = read_cube(path)?;
    check_factor(&x, &spec.degradation, path)?;
    let r = spec.response_for(x.bands()).at(path)?;
    let c = &spec.degradation;
    let obs = simulate_cube(&x, c, &r, spec.noise.sigma, seed, index as u64).at(path)?;
    let res = fuse_core(&obs.hrms, &obs.lrhs, c, &r, &spec.solver).at(path)?;
    let baseline = bicubic_baseline(&obs.lrhs, c).at(path)?;
    let factor = c.factor() as f64;
    Ok(CubeRow {
        name: cube_name(path),
        iterations: res.iterations_run,
        fused: evaluate_metrics(&x, &res.x_hat, factor, peak).at(path)?,
        bicubic: evaluate_metrics(&x, &baseline, factor, peak).at(path)?,
    })
}

const METRIC_COLUMNS: [&str; 4] = ["psnr", "sam", "ergas", "ssim"];

fn metric_values(m: &MetricReport) -> [f64; 4] {
    [m.psnr, m.sam, m.ergas, m.ssim]
}

fn csv_header(first: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    for method in ["fused", "bicubic"] {
        h.extend(METRIC_COLUMNS.iter().map(|m| format!("{method}_{m}")));
    }
    h
}

fn write_csv(path: &Path, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Simulates, fuses and scores every input cube; writes `per_cube.csv`,
/// `summary.csv`, `summary.json` and `table.txt` under `out`.
pub fn benchmark(spec: &ResolvedSpec, out: &Path, opts: &RunOptions) -> Result<BenchmarkOutcome> {
    if spec.inputs.is_empty() {
        return Err(Error::Usage("benchmark spec lists no input cubes".into()));
    }
    let seed = noise_seed(spec, opts);
    let peak = opts.peak.or(spec.peak);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<CubeRow> = pool.install(|| {
        spec.inputs
            .par_iter()
            .enumerate()
            .map(|(i, p)| benchmark_cube(spec, p, i, seed, peak))
            .collect::<Result<Vec<_>>>()
    })?;

    let fused: Vec<MetricReport> = rows.iter().map(|r| r.fused.clone()).collect();
    let bicubic: Vec<MetricReport> = rows.iter().map(|r| r.bicubic.clone()).collect();
    let outcome = BenchmarkOutcome {
        cubes: rows.len(),
        mean_fused: mean_report(&fused),
        mean_bicubic: mean_report(&bicubic),
        rows,
    };

    create_dir(out)?;
    let per_cube = outcome
        .rows
        .iter()
        .map(|r| {
            let mut rec = vec![r.name.clone(), r.iterations.to_string()];
            rec.extend(
                metric_values(&r.fused)
                    .iter()
                    .chain(&metric_values(&r.bicubic))
                    .map(f64::to_string),
            );
            rec
        })
        .collect();
    write_csv(
        &out.join("per_cube.csv"),
        csv_header(&["cube", "iterations"]),
        per_cube,
    )?;
    let mut summary = vec![outcome.cubes.to_string()];
    summary.extend(
        metric_values(&outcome.mean_fused)
            .iter()
            .chain(&metric_values(&outcome.mean_bicubic))
            .map(f64::to_string),
    );
    write_csv(
        &out.join("summary.csv"),
        csv_header(&["cubes"]),
        vec![summary],
    )?;
    write_json(&outcome, out.join("summary.json"))?;
    write_text(
        &render_table(&[
            ("fused", &outcome.mean_fused),
            ("bicubic", &outcome.mean_bicubic),
        ]),
        out.join("table.txt"),
    )?;
    Ok(outcome)
}
