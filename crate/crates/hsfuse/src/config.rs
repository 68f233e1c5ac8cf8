//! JSON documents: the solver configuration and the benchmark/run spec.
//!
//! Relative paths inside a spec resolve against the spec file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use hsfuse_core::{FusionConfig, FusionError, SpatialDegradation, SpectralResponse, StepSize};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, WithPath};
use crate::tables::read_matrix_csv;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaJson {
    Number(f64),
    Text(String),
}

/// Solver configuration as it appears on disk. Every key is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionConfigJson {
    pub max_iters: usize,
    pub eta: EtaJson,
    pub lambda: f64,
    pub prox: String,
    pub rank: usize,
    pub tolerance: f64,
    pub record_trace: bool,
}

impl FusionConfigJson {
    pub fn to_config(&self) -> hsfuse_core::Result<FusionConfig> {
        let eta = match &self.eta {
            EtaJson::Number(v) => StepSize::Fixed(*v),
            EtaJson::Text(t) if t == "auto" => StepSize::Auto,
            EtaJson::Text(t) => {
                return Err(FusionError::Config(format!(
                    "eta must be \"auto\" or a number, got {t:?}"
                )))
            }
        };
        let cfg = FusionConfig {
            max_iters: self.max_iters,
            eta,
            lambda: self.lambda,
            prox: self.prox.parse()?,
            rank: self.rank,
            tolerance: self.tolerance,
            record_trace: self.record_trace,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(cfg: &FusionConfig) -> Self {
        Self {
            max_iters: cfg.max_iters,
            eta: match cfg.eta {
                StepSize::Auto => EtaJson::Text("auto".into()),
                StepSize::Fixed(v) => EtaJson::Number(v),
            },
            lambda: cfg.lambda,
            prox: cfg.prox.as_str().into(),
            rank: cfg.rank,
            tolerance: cfg.tolerance,
            record_trace: cfg.record_trace,
        }
    }
}

pub fn parse_fusion_config(path: &Path, text: &str) -> Result<FusionConfig> {
    let raw: FusionConfigJson =
        serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    raw.to_config().at(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSpec {
    Preset {
        preset: String,
        #[serde(default)]
        size: Option<usize>,
        #[serde(default)]
        sigma: Option<f64>,
    },
    Path {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationSpec {
    pub kernel: KernelSpec,
    pub factor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResponseSpec {
    Preset { preset: String },
    Path { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseJson {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    /// Explicit input cubes (payload paths).
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    /// Directory scanned for `*.hdr` cubes, in name order.
    #[serde(default)]
    pub input_dir: Option<PathBuf>,
    pub degradation: DegradationSpec,
    pub response: ResponseSpec,
    #[serde(default)]
    pub noise: NoiseJson,
    pub solver: FusionConfigJson,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Peak value for PSNR/SSIM; defaults to each reference's maximum.
    #[serde(default)]
    pub peak: Option<f64>,
}

/// A spec with every referenced resource loaded and validated.
#[derive(Debug, Clone)]
pub struct ResolvedSpec {
    pub inputs: Vec<PathBuf>,
    pub degradation: SpatialDegradation,
    pub response: Option<SpectralResponse>,
    pub response_spec: ResponseSpec,
    pub noise: NoiseJson,
    pub solver: FusionConfig,
    pub output: Option<PathBuf>,
    pub peak: Option<f64>,
    base: PathBuf,
}

impl ResolvedSpec {
    /// The response for a given hyperspectral band count.
    pub fn response_for(&self, bands: usize) -> hsfuse_core::Result<SpectralResponse> {
        match (&self.response, &self.response_spec) {
            (Some(r), _) => Ok(r.clone()),
            (None, ResponseSpec::Preset { .. }) => SpectralResponse::rgb_preset(bands),
            (None, ResponseSpec::Path { .. }) => unreachable!("path responses are loaded eagerly"),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        resolve(&self.base, p)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<ResolvedSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: BenchmarkSpec =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve_spec(&spec, &base, path)
}

pub fn resolve_spec(spec: &BenchmarkSpec, base: &Path, origin: &Path) -> Result<ResolvedSpec> {
    let mut inputs: Vec<PathBuf> = spec.inputs.iter().map(|p| resolve(base, p)).collect();
    if let Some(dir) = &spec.input_dir {
        let dir = resolve(base, dir);
        let mut found = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let p = entry.path();
            if p.extension().is_some_and(|e| e == "hdr") {
                found.push(p);
            }
        }
        found.sort();
        inputs.extend(found);
    }
    for p in &inputs {
        let hdr = crate::envi::header_path(p);
        if !(p.is_file() || hdr.is_file()) {
            return Err(Error::io(
                p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input cube not found"),
            ));
        }
    }

    let factor = spec.degradation.factor;
    let degradation = match &spec.degradation.kernel {
        KernelSpec::Preset {
            preset,
            size,
            sigma,
        } => match preset.as_str() {
            "uniform" => SpatialDegradation::uniform(factor),
            "gaussian" => SpatialDegradation::gaussian(
                size.unwrap_or(factor + 1),
                sigma.unwrap_or(factor as f64 / 2.0),
                factor,
            ),
            other => Err(FusionError::Config(format!(
                "unknown kernel preset {other:?} (expected uniform or gaussian)"
            ))),
        }
        .at(origin)?,
        KernelSpec::Path { path } => {
            let kp = resolve(base, path);
            SpatialDegradation::new(read_matrix_csv(&kp)?, factor).at(&kp)?
        }
    };
    let (response, response_spec) = match &spec.response {
        ResponseSpec::Preset { preset } if preset == "rgb" => (None, spec.response.clone()),
        ResponseSpec::Preset { preset } => {
            return Err(Error::Core {
                path: origin.to_path_buf(),
                source: FusionError::Config(format!(
                    "unknown response preset {preset:?} (expected rgb)"
                )),
            })
        }
        ResponseSpec::Path { path } => {
            let rp = resolve(base, path);
            let r = SpectralResponse::new(read_matrix_csv(&rp)?).at(&rp)?;
            (Some(r), ResponseSpec::Path { path: rp })
        }
    };
    hsfuse_core::NoiseSpec::new(spec.noise.sigma, spec.noise.seed).at(origin)?;
    Ok(ResolvedSpec {
        inputs,
        degradation,
        response,
        response_spec,
        noise: spec.noise,
        solver: spec.solver.to_config().at(origin)?,
        output: spec.output.as_ref().map(|p| resolve(base, p)),
        peak: spec.peak,
        base: base.to_path_buf(),
    })
}
