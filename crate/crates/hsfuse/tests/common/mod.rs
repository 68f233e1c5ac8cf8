#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use hsfuse_core::HsCube;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_cube(h: usize, w: usize, b: usize, seed: u64) -> HsCube {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    HsCube::from_fn(h, w, b, |_, _, _| rng.random_range(-2.0..3.0))
}

/// Writes a run spec into `dir` and returns its path.
pub fn write_spec(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("spec.json");
    fs::write(&p, body).unwrap();
    p
}

pub fn solver_json(max_iters: usize, rank: usize, tolerance: f64) -> String {
    format!(
        r#"{{"max_iters": {max_iters}, "eta": "auto", "lambda": 0.0, "prox": "identity", "rank": {rank}, "tolerance": {tolerance:e}, "record_trace": true}}"#
    )
}

/// Spec over explicit inputs with the uniform kernel and RGB response.
pub fn uniform_spec(
    inputs: &[PathBuf],
    factor: usize,
    sigma: f64,
    seed: u64,
    solver: &str,
) -> String {
    let list: Vec<String> = inputs
        .iter()
        .map(|p| format!("{:?}", p.to_str().unwrap()))
        .collect();
    format!(
        r#"{{
  "inputs": [{}],
  "degradation": {{"kernel": {{"preset": "uniform"}}, "factor": {factor}}},
  "response": {{"preset": "rgb"}},
  "noise": {{"sigma": {sigma:e}, "seed": {seed}}},
  "solver": {solver}
}}"#,
        list.join(", ")
    )
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}
