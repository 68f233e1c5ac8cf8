//! ENVI-style cube files: a text header (`name.hdr`) next to a raw
//! band-sequential little-endian payload.
//!
//! Header grammar: an optional `ENVI` magic line, then one `key = value` per
//! line. Keys are case-insensitive, values in `{...}` may span lines, and
//! unknown keys are ignored.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use hsfuse_core::HsCube;

use crate::error::{Error, Result, WithPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataType {
    F32,
    F64,
}

impl DataType {
    fn code(self) -> u32 {
        match self {
            DataType::F32 => 4,
            DataType::F64 => 5,
        }
    }

    fn bytes(self) -> usize {
        match self {
            DataType::F32 => 4,
            DataType::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub data_type: DataType,
    pub header_offset: usize,
}

/// Header path for a payload path: the same name with a `.hdr` extension.
pub fn header_path(data: &Path) -> PathBuf {
    data.with_extension("hdr")
}

fn required<'a>(
    path: &Path,
    fields: &'a HashMap<String, (usize, String)>,
    key: &str,
    last_line: usize,
) -> Result<&'a (usize, String)> {
    fields
        .get(key)
        .ok_or_else(|| Error::parse(path, last_line, format!("missing required key `{key}`")))
}

fn parse_usize(path: &Path, entry: &(usize, String), key: &str) -> Result<usize> {
    entry.1.parse::<usize>().map_err(|_| {
        Error::parse(
            path,
            entry.0,
            format!("`{key}` must be a nonnegative integer, got `{}`", entry.1),
        )
    })
}

pub fn parse_header(path: &Path, text: &str) -> Result<CubeHeader> {
    let mut fields: HashMap<String, (usize, String)> = HashMap::new();
    let mut lines = text.lines().enumerate().peekable();
    let mut last_line = 0;
    while let Some((idx, raw)) = lines.next() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || (line_no == 1 && line.eq_ignore_ascii_case("envi")) {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        let mut value = value.trim().to_string();
        if value.starts_with('{') && !value.contains('}') {
            loop {
                let Some((_, more)) = lines.next() else {
                    return Err(Error::parse(path, line_no, "unterminated `{` value"));
                };
                value.push('\n');
                value.push_str(more.trim());
                if more.contains('}') {
                    break;
                }
            }
        }
        fields.insert(key.trim().to_ascii_lowercase(), (line_no, value));
    }

    let samples = parse_usize(
        path,
        required(path, &fields, "samples", last_line)?,
        "samples",
    )?;
    let lines_n = parse_usize(path, required(path, &fields, "lines", last_line)?, "lines")?;
    let bands = parse_usize(path, required(path, &fields, "bands", last_line)?, "bands")?;
    let dt = required(path, &fields, "data type", last_line)?;
    let data_type = match dt.1.as_str() {
        "4" => DataType::F32,
        "5" => DataType::F64,
        other => {
            return Err(Error::parse(
                path,
                dt.0,
                format!("unsupported data type `{other}` (expected 4 or 5)"),
            ))
        }
    };
    let il = required(path, &fields, "interleave", last_line)?;
    if !il.1.eq_ignore_ascii_case("bsq") {
        return Err(Error::parse(
            path,
            il.0,
            format!("unsupported interleave `{}` (expected bsq)", il.1),
        ));
    }
    let bo = required(path, &fields, "byte order", last_line)?;
    if bo.1 != "0" {
        return Err(Error::parse(
            path,
            bo.0,
            format!(
                "unsupported byte order `{}` (expected 0, little-endian)",
                bo.1
            ),
        ));
    }
    let header_offset = match fields.get("header offset") {
        Some(entry) => parse_usize(path, entry, "header offset")?,
        None => 0,
    };
    for (key, value) in [("samples", samples), ("lines", lines_n), ("bands", bands)] {
        if value == 0 {
            return Err(Error::parse(
                path,
                fields[key].0,
                format!("`{key}` must be positive"),
            ));
        }
    }
    Ok(CubeHeader {
        samples,
        lines: lines_n,
        bands,
        data_type,
        header_offset,
    })
}

pub fn render_header(cube: &HsCube, data_type: DataType) -> String {
    format!(
        "ENVI\ndescription = {{hsfuse cube}}\nsamples = {}\nlines = {}\nbands = {}\nheader offset = 0\nfile type = ENVI Standard\ndata type = {}\ninterleave = bsq\nbyte order = 0\n",
        cube.width(),
        cube.height(),
        cube.bands(),
        data_type.code()
    )
}

/// Reads the cube whose payload lives at `path` (header at `path.hdr`).
/// A `.hdr` path is also accepted; the payload is then looked up as
/// `.bsq`, `.img`, `.dat` or the bare stem.
pub fn read_cube(path: impl AsRef<Path>) -> Result<HsCube> {
    let given = path.as_ref();
    let (hdr, data) = if given
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("hdr"))
    {
        let data = ["bsq", "img", "dat"]
            .iter()
            .map(|ext| given.with_extension(ext))
            .chain(std::iter::once(given.with_extension("")))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::format(given, "no payload file found next to header"))?;
        (given.to_path_buf(), data)
    } else {
        (header_path(given), given.to_path_buf())
    };
    let text = fs::read_to_string(&hdr).map_err(|e| Error::io(&hdr, e))?;
    let header = parse_header(&hdr, &text)?;
    let bytes = fs::read(&data).map_err(|e| Error::io(&data, e))?;
    decode_payload(&data, &header, &bytes)
}

fn decode_payload(path: &Path, header: &CubeHeader, bytes: &[u8]) -> Result<HsCube> {
    let count = header.samples * header.lines * header.bands;
    let width = header.data_type.bytes();
    let expected = (header.header_offset + count * width) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Size {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    let payload = &bytes[header.header_offset..];
    let values: Vec<f64> = match header.data_type {
        DataType::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect(),
        DataType::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
            .collect(),
    };
    HsCube::from_vec(header.lines, header.samples, header.bands, values).at(path)
}

/// Writes a 64-bit cube: payload at `path`, header at `path.hdr`.
pub fn write_cube(cube: &HsCube, path: impl AsRef<Path>) -> Result<()> {
    write_cube_as(cube, path, DataType::F64)
}

pub fn write_cube_as(cube: &HsCube, path: impl AsRef<Path>, data_type: DataType) -> Result<()> {
    let path = path.as_ref();
    let mut payload = Vec::with_capacity(cube.as_slice().len() * data_type.bytes());
    for &v in cube.as_slice() {
        match data_type {
            DataType::F64 => payload.extend_from_slice(&v.to_le_bytes()),
            DataType::F32 => payload.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }
    fs::write(path, payload).map_err(|e| Error::io(path, e))?;
    let hdr = header_path(path);
    fs::write(&hdr, render_header(cube, data_type)).map_err(|e| Error::io(&hdr, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_parsing_rules() {
        let p = Path::new("x.hdr");
        let text = "ENVI\nSAMPLES = 3\ndescription = {multi\n line}\nLines=2\nbands = 4\ndata type = 4\nInterleave = BSQ\nbyte order = 0\nwavelength units = nm\n";
        let h = parse_header(p, text).unwrap();
        assert_eq!(
            (h.samples, h.lines, h.bands, h.data_type),
            (3, 2, 4, DataType::F32)
        );

        let err = parse_header(p, "ENVI\nsamples = 3\nthis line is broken\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_header(
            p,
            "samples = 1\nlines = 1\nbands = 1\ndata type = 12\ninterleave = bsq\nbyte order = 0\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_header(
            p,
            "samples = 1\nlines = 1\nbands = 1\ndata type = 5\ninterleave = bil\nbyte order = 0\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
        let err = parse_header(
            p,
            "samples = 1\nlines = 1\ndata type = 5\ninterleave = bsq\nbyte order = 0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("bands"), "{err}");
    }

    #[test]
    fn short_payload_is_a_size_error() {
        let header = CubeHeader {
            samples: 2,
            lines: 2,
            bands: 2,
            data_type: DataType::F64,
            header_offset: 0,
        };
        let bytes = vec![0u8; 7 * 8];
        let err = decode_payload(Path::new("c.bsq"), &header, &bytes).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Size {
                    expected: 64,
                    actual: 56,
                    ..
                }
            ),
            "{err}"
        );
        assert_eq!(err.category(), "size");
    }
}
