use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use hsfuse_core::{FusionError, HsCube};
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

/// Writes an 8-bit RGB PNG from three bands, each min-max stretched on its
/// own. A flat band maps to 128.
pub fn export_composite(cube: &HsCube, bands: [usize; 3], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(&bad) = bands.iter().find(|&&b| b >= cube.bands()) {
        return Err(Error::Core {
            path: path.to_path_buf(),
            source: FusionError::Parameter(format!(
                "band {bad} out of range for a {}-band cube",
                cube.bands()
            )),
        });
    }
    let stretched: Vec<Vec<u8>> = bands.iter().map(|&b| stretch(cube.plane(b))).collect();
    let mut rgb = Vec::with_capacity(cube.pixels() * 3);
    for p in 0..cube.pixels() {
        rgb.extend(stretched.iter().map(|ch| ch[p]));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    PngEncoder::new(BufWriter::new(file))
        .write_image(
            &rgb,
            cube.width() as u32,
            cube.height() as u32,
            ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::format(path, e.to_string()))
}

fn stretch(plane: &[f64]) -> Vec<u8> {
    let lo = plane.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = plane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![128; plane.len()];
    }
    plane
        .iter()
        .map(|v| (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8)
        .collect()
}
