//! On-disk formats: the dataset container, 16-bit graymaps and map exports.
//!
//! Container layout (all integers and floats little-endian):
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0 | 8 | magic `XNUCSEN1` |
//! | 8 | 24 | `u32` dimensions C, P, T, M, H, W |
//! | 32 | 1 | domain, 0 = k-space, 1 = image |
//! | 33 | 8 | `f64` pixel size, meters |
//! | 41 | 16·C·P·T·M·H·W | samples as interleaved `f64` (re, im), index order (c, λ, t, m, y, x) with x fastest |
//!
//! The payload is the C-ordered array `complex128[C][P][T][M][H][W]`.

use std::fs;
use std::io::Read;
use std::path::Path;

use ndarray::{Array2, Array6};
use num_complex::Complex64;

use crate::acquisition::{Domain, MultiCoilSpectralDataset};
use crate::coilsim::CoilSensitivitySet;
use crate::error::{invalid, Error, Result};
use crate::image::{ComplexImage, RealImage};

pub const MAGIC: &[u8; 8] = b"XNUCSEN1";
pub const HEADER_LEN: usize = 41;

fn domain_tag(domain: Domain) -> u8 {
    match domain {
        Domain::KSpace => 0,
        Domain::Image => 1,
    }
}

/// Serialize a dataset into container bytes.
pub fn write_dataset(data: &MultiCoilSpectralDataset) -> Result<Vec<u8>> {
    let dims = data.dims();
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    for d in [dims.coils, dims.bins, dims.frames, dims.metabolites, dims.height, dims.width] {
        let d = u32::try_from(d).map_err(|_| invalid(format!("dimension {d} does not fit in u32")))?;
        header.extend_from_slice(&d.to_le_bytes());
    }
    header.push(domain_tag(data.domain()));
    header.extend_from_slice(&data.pixel_size().to_le_bytes());
    let mut out = header;
    out.reserve(data.samples().len() * 16);
    for v in data.samples().iter() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

fn f64_at(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8 bytes"))
}

/// Parse container bytes. Anything malformed is rejected with the offending offset.
pub fn read_dataset(bytes: &[u8]) -> Result<MultiCoilSpectralDataset> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated { offset: 0, expected: HEADER_LEN as u64, actual: bytes.len() as u64 });
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format { offset: 0, message: "bad magic, expected XNUCSEN1".into() });
    }
    let mut dims = [0usize; 6];
    for (i, d) in dims.iter_mut().enumerate() {
        let off = 8 + 4 * i;
        *d = u32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes")) as usize;
        if *d == 0 {
            return Err(Error::Format { offset: off as u64, message: "zero dimension".into() });
        }
    }
    let domain = match bytes[32] {
        0 => Domain::KSpace,
        1 => Domain::Image,
        other => return Err(Error::Format { offset: 32, message: format!("unknown domain tag {other}") }),
    };
    let pixel_size = f64_at(bytes, 33);
    if !(pixel_size.is_finite() && pixel_size > 0.0) {
        return Err(Error::Format { offset: 33, message: format!("pixel size must be positive, got {pixel_size}") });
    }
    let payload = dims
        .iter()
        .try_fold(16u64, |acc, &d| acc.checked_mul(d as u64))
        .filter(|&n| n <= (usize::MAX - HEADER_LEN) as u64)
        .ok_or_else(|| Error::Format { offset: 8, message: "dimensions overflow the payload size".into() })?;
    let actual = (bytes.len() - HEADER_LEN) as u64;
    if actual < payload {
        return Err(Error::Truncated { offset: HEADER_LEN as u64, expected: payload, actual });
    }
    if actual > payload {
        return Err(Error::Format {
            offset: HEADER_LEN as u64 + payload,
            message: format!("{} trailing bytes after payload", actual - payload),
        });
    }
    let n = (payload / 16) as usize;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let off = HEADER_LEN + 16 * k;
        let v = Complex64::new(f64_at(bytes, off), f64_at(bytes, off + 8));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Format { offset: off as u64, message: "non-finite sample".into() });
        }
        samples.push(v);
    }
    let shape = (dims[0], dims[1], dims[2], dims[3], dims[4], dims[5]);
    let array = Array6::from_shape_vec(shape, samples).expect("length checked");
    MultiCoilSpectralDataset::new(array, pixel_size, domain)
}

pub fn save_dataset(path: &Path, data: &MultiCoilSpectralDataset) -> Result<()> {
    fs::write(path, write_dataset(data)?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<MultiCoilSpectralDataset> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    read_dataset(&bytes)
}

/// Image-domain container with one coil per map and P = T = M = 1.
pub fn maps_to_dataset(maps: &CoilSensitivitySet) -> Result<MultiCoilSpectralDataset> {
    let g = maps.grid();
    let mut array = Array6::zeros((maps.n_coils(), 1, 1, 1, g.height, g.width));
    for (c, m) in maps.maps().iter().enumerate() {
        array.slice_mut(ndarray::s![c, 0, 0, 0, .., ..]).assign(&m.samples);
    }
    MultiCoilSpectralDataset::new(array, g.pixel_size, Domain::Image)
}

/// Inverse of [`maps_to_dataset`].
pub fn maps_from_dataset(data: &MultiCoilSpectralDataset) -> Result<CoilSensitivitySet> {
    let d = data.dims();
    if d.bins != 1 || d.frames != 1 || d.metabolites != 1 || data.domain() != Domain::Image {
        return Err(invalid(format!("map container must be image-domain with P = T = M = 1, got {d:?}")));
    }
    let grid = data.grid();
    CoilSensitivitySet::new(
        (0..d.coils)
            .map(|c| ComplexImage::new(grid, data.slice(c, 0, 0, 0).to_owned()))
            .collect::<Result<_>>()?,
    )
}

/// Real image as a single-slice image-domain container (imaginary parts zero).
pub fn real_image_to_dataset(image: &RealImage) -> Result<MultiCoilSpectralDataset> {
    let g = image.grid;
    let array = image.samples.mapv(|v| Complex64::new(v, 0.0)).into_shape_with_order((1, 1, 1, 1, g.height, g.width));
    MultiCoilSpectralDataset::new(array.expect("same element count"), g.pixel_size, Domain::Image)
}

pub fn real_image_from_dataset(data: &MultiCoilSpectralDataset) -> Result<RealImage> {
    let d = data.dims();
    if d.n_slices() != 1 || data.domain() != Domain::Image {
        return Err(invalid(format!("real image container must hold one image-domain slice, got {d:?}")));
    }
    RealImage::new(data.grid(), data.slice(0, 0, 0, 0).mapv(|v| v.re))
}

/// Binary 16-bit graymap of values in [0, 1] (clamped), row 0 first, most significant byte first.
pub fn write_pgm16(values: &Array2<f64>) -> Vec<u8> {
    let (h, w) = values.dim();
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(2 * h * w);
    for &v in values.iter() {
        let level = if v.is_nan() { 0.0 } else { (v.clamp(0.0, 1.0) * 65535.0).round() };
        out.extend_from_slice(&(level as u16).to_be_bytes());
    }
    out
}

/// Parse a binary 16-bit graymap written by [`write_pgm16`] into raw levels.
pub fn read_pgm16(bytes: &[u8]) -> Result<Array2<u16>> {
    let text_end = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .nth(2)
        .map(|(i, _)| i + 1)
        .ok_or_else(|| Error::Format { offset: 0, message: "incomplete graymap header".into() })?;
    let header = std::str::from_utf8(&bytes[..text_end])
        .map_err(|_| Error::Format { offset: 0, message: "graymap header is not text".into() })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parsed: Option<(usize, usize, u32)> = match fields.as_slice() {
        ["P5", w, h, max] => w.parse().ok().zip(h.parse().ok()).zip(max.parse().ok()).map(|((w, h), m)| (w, h, m)),
        _ => None,
    };
    let (w, h, max) = parsed.ok_or_else(|| Error::Format { offset: 0, message: format!("bad graymap header {header:?}") })?;
    if max != 65535 {
        return Err(Error::Format { offset: 0, message: format!("expected maxval 65535, got {max}") });
    }
    let expected = (2 * w * h) as u64;
    let actual = (bytes.len() - text_end) as u64;
    if actual != expected {
        return Err(Error::Truncated { offset: text_end as u64, expected, actual });
    }
    let levels = bytes[text_end..].chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]])).collect();
    Ok(Array2::from_shape_vec((h, w), levels).expect("length checked"))
}

/// Magnitude image normalized to its maximum (all black when identically zero).
pub fn magnitude_graymap(samples: &Array2<Complex64>) -> (Vec<u8>, f64) {
    let max = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    (write_pgm16(&samples.mapv(|v| v.norm() * scale)), max)
}

/// Per-coil graymaps of `|ρ̂ − ρ|` on the fixed scale `[0, scale_max]`.
pub fn export_difference_map(est: &CoilSensitivitySet, truth: &CoilSensitivitySet, scale_max: f64) -> Result<Vec<Vec<u8>>> {
    est.grid().ensure_compatible(truth.grid(), "difference map")?;
    if est.n_coils() != truth.n_coils() {
        return Err(invalid(format!("coil counts differ: {} vs {}", est.n_coils(), truth.n_coils())));
    }
    if !(scale_max.is_finite() && scale_max > 0.0) {
        return Err(invalid(format!("difference scale must be positive, got {scale_max}")));
    }
    Ok(est
        .maps()
        .iter()
        .zip(truth.maps())
        .map(|(e, t)| {
            let diff = ndarray::Zip::from(&e.samples).and(&t.samples).map_collect(|a, b| (a - b).norm() / scale_max);
            write_pgm16(&diff)
        })
        .collect())
}

/// Human-readable and raw forms of a map set.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExport {
    /// one max-normalized magnitude graymap per coil
    pub graymaps: Vec<Vec<u8>>,
    /// `coil,max_magnitude` rows giving each graymap's full-white value
    pub scaling_csv: String,
    pub container: Vec<u8>,
}

pub fn export_maps(maps: &CoilSensitivitySet) -> Result<MapExport> {
    let mut graymaps = Vec::with_capacity(maps.n_coils());
    let mut scaling_csv = String::from("coil,max_magnitude\n");
    for (c, m) in maps.maps().iter().enumerate() {
        let (pgm, max) = magnitude_graymap(&m.samples);
        graymaps.push(pgm);
        scaling_csv.push_str(&format!("{c},{max:e}\n"));
    }
    Ok(MapExport { graymaps, scaling_csv, container: write_dataset(&maps_to_dataset(maps)?)? })
}

impl MapExport {
    /// Write `{prefix}.xns`, `{prefix}_scaling.csv` and `{prefix}_coilNN.pgm` into `dir`.
    pub fn write_to(&self, dir: &Path, prefix: &str) -> Result<Vec<std::path::PathBuf>> {
        let mut written = Vec::new();
        let mut put = |name: String, bytes: &[u8]| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            written.push(p);
            Ok(())
        };
        put(format!("{prefix}.xns"), &self.container)?;
        put(format!("{prefix}_scaling.csv"), self.scaling_csv.as_bytes())?;
        for (c, g) in self.graymaps.iter().enumerate() {
            put(format!("{prefix}_coil{c:02}.pgm"), g)?;
        }
        Ok(written)
    }
}
