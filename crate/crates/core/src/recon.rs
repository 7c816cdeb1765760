//! Coil combination: Roemer matched filtering with known maps, or root-sum-of-squares.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::coilsim::CoilSensitivitySet;
use crate::error::{invalid, Error, Result};
use crate::image::{ComplexImage, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombineMethod {
    Roemer,
    Rss,
}

impl CombineMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            CombineMethod::Roemer => "roemer",
            CombineMethod::Rss => "rss",
        }
    }
}

impl fmt::Display for CombineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CombineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "roemer" => Ok(CombineMethod::Roemer),
            "rss" => Ok(CombineMethod::Rss),
            other => Err(invalid(format!("unknown combination `{other}` (expected roemer or rss)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedImage {
    pub image: ComplexImage,
    pub method: CombineMethod,
    /// maps used for Roemer combination
    pub maps: Option<Arc<CoilSensitivitySet>>,
}

impl CombinedImage {
    pub fn grid(&self) -> &Grid {
        &self.image.grid
    }
}

fn check_images(coil_images: &[ComplexImage]) -> Result<Grid> {
    let first = coil_images.first().ok_or_else(|| invalid("no coil images to combine"))?;
    for im in &coil_images[1..] {
        first.grid.ensure_compatible(&im.grid, "coil combination")?;
    }
    Ok(first.grid)
}

/// `m = Σ_c ρ_c* s_c / Σ_c |ρ_c|²`, zero where every map vanishes.
pub fn roemer_combine(coil_images: &[ComplexImage], maps: &CoilSensitivitySet) -> Result<CombinedImage> {
    let grid = check_images(coil_images)?;
    grid.ensure_compatible(maps.grid(), "coil combination maps")?;
    if maps.n_coils() != coil_images.len() {
        return Err(invalid(format!("{} coil images but {} maps", coil_images.len(), maps.n_coils())));
    }
    let mut out = ComplexImage::zeros(grid);
    for (idx, m) in out.samples.indexed_iter_mut() {
        let (mut num, mut den) = (Complex64::default(), 0.0);
        for (s, rho) in coil_images.iter().zip(maps.maps()) {
            let r = rho.samples[idx];
            num += r.conj() * s.samples[idx];
            den += r.norm_sqr();
        }
        if den > 0.0 {
            *m = num / den;
        }
    }
    Ok(CombinedImage { image: out, method: CombineMethod::Roemer, maps: Some(Arc::new(maps.clone())) })
}

/// `m = √(Σ_c |s_c|²)`.
pub fn rss_combine(coil_images: &[ComplexImage]) -> Result<CombinedImage> {
    let grid = check_images(coil_images)?;
    let mut out = ComplexImage::zeros(grid);
    for (idx, m) in out.samples.indexed_iter_mut() {
        let e: f64 = coil_images.iter().map(|s| s.samples[idx].norm_sqr()).sum();
        *m = Complex64::new(e.sqrt(), 0.0);
    }
    Ok(CombinedImage { image: out, method: CombineMethod::Rss, maps: None })
}
