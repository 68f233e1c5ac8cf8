//! Report rendering: metric JSON, solver diagnostics and the method comparison table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hsfuse_core::{FusionConfig, FusionResult, MetricReport};
use serde::Serialize;

use crate::config::FusionConfigJson;
use crate::error::{Error, Result};

/// Solver diagnostics written next to a fused cube.
#[derive(Debug, Clone, Serialize)]
pub struct FusionDiagnostics {
    pub config: FusionConfigJson,
    pub eta: f64,
    pub iterations_run: usize,
    pub rank: usize,
    pub ms_bands: usize,
    pub hs_bands: usize,
    pub final_objective: Option<f64>,
    pub final_data_residual: Option<f64>,
    pub objective_trace: Vec<f64>,
    pub data_residual_trace: Vec<f64>,
}

impl FusionDiagnostics {
    pub fn new(cfg: &FusionConfig, res: &FusionResult) -> Self {
        Self {
            config: FusionConfigJson::from_config(cfg),
            eta: res.eta,
            iterations_run: res.iterations_run,
            rank: res.coeff.rank(),
            ms_bands: res.coeff.ms_bands(),
            hs_bands: res.coeff.hs_bands(),
            final_objective: res.objective_trace.last().copied(),
            final_data_residual: res.data_residual_trace.last().copied(),
            objective_trace: res.objective_trace.clone(),
            data_residual_trace: res.data_residual_trace.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(value)).map_err(|e| Error::io(path, e))
}

pub fn write_text(text: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Aligned table, one row per method, columns PSNR / SAM / ERGAS / SSIM.
pub fn render_table(rows: &[(&str, &MetricReport)]) -> String {
    let name_w = rows
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(0)
        .max("method".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$}  {:>9}  {:>9}  {:>9}  {:>7}",
        "method", "PSNR", "SAM", "ERGAS", "SSIM"
    );
    for (name, m) in rows {
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>9.3}  {:>9.4}  {:>9.4}  {:>7.4}",
            name, m.psnr, m.sam, m.ergas, m.ssim
        );
    }
    out
}

/// Element-wise mean of several reports (per-band PSNR included when lengths agree).
pub fn mean_report(reports: &[MetricReport]) -> MetricReport {
    let n = reports.len().max(1) as f64;
    let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let bands = reports.first().map_or(0, |r| r.per_band_psnr.len());
    let per_band_psnr = if reports.iter().all(|r| r.per_band_psnr.len() == bands) {
        (0..bands)
            .map(|b| reports.iter().map(|r| r.per_band_psnr[b]).sum::<f64>() / n)
            .collect()
    } else {
        Vec::new()
    };
    MetricReport {
        psnr: avg(|r| r.psnr),
        sam: avg(|r| r.sam),
        ergas: avg(|r| r.ergas),
        ssim: avg(|r| r.ssim),
        per_band_psnr,
    }
}
