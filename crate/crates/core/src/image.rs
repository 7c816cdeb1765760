//! Image grids and the real/complex/boolean images that live on them.
//!
//! Row 0 is the top of the image (largest `y`), column 0 the left edge
//! (smallest `x`). Coordinates are pixel centers about `origin`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    /// meters per pixel
    pub pixel_size: f64,
    /// physical coordinates of the grid center, meters
    pub origin: [f64; 2],
}

impl Grid {
    pub fn new(width: usize, height: usize, pixel_size: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!("grid dimensions must be positive, got {width}x{height}")));
        }
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(invalid(format!("pixel size must be positive and finite, got {pixel_size}")));
        }
        Ok(Self { width, height, pixel_size, origin: [0.0, 0.0] })
    }

    /// Square grid covering `fov` meters in each direction.
    pub fn square(n: usize, fov: f64) -> Result<Self> {
        Self::new(n, n, fov / n as f64)
    }

    pub fn n_voxels(&self) -> usize {
        self.width * self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Physical (x, y) of the center of pixel (row, col).
    pub fn coords(&self, row: usize, col: usize) -> (f64, f64) {
        let x = self.origin[0] + (col as f64 - (self.width as f64 - 1.0) / 2.0) * self.pixel_size;
        let y = self.origin[1] + ((self.height as f64 - 1.0) / 2.0 - row as f64) * self.pixel_size;
        (x, y)
    }

    pub fn compatible(&self, other: &Grid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        self.width == other.width
            && self.height == other.height
            && close(self.pixel_size, other.pixel_size)
            && (self.origin[0] - other.origin[0]).abs() <= 1e-12
            && (self.origin[1] - other.origin[1]).abs() <= 1e-12
    }

    pub(crate) fn ensure_compatible(&self, other: &Grid, what: &str) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(invalid(format!(
                "grid mismatch in {what}: {}x{} @ {} m vs {}x{} @ {} m",
                self.width, self.height, self.pixel_size, other.width, other.height, other.pixel_size
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    pub grid: Grid,
    /// shape (height, width)
    pub samples: Array2<f64>,
}

impl RealImage {
    pub fn new(grid: Grid, samples: Array2<f64>) -> Result<Self> {
        if samples.dim() != grid.shape() {
            return Err(invalid(format!("sample shape {:?} does not match grid {:?}", samples.dim(), grid.shape())));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("image samples must be finite"));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, samples: Array2::zeros(grid.shape()) }
    }

    /// Voxels with strictly positive intensity.
    pub fn support(&self) -> Mask {
        Mask { grid: self.grid, data: self.samples.mapv(|v| v > 0.0) }
    }

    pub fn with_pixel_size(mut self, pixel_size: f64) -> Result<Self> {
        self.grid = Grid::new(self.grid.width, self.grid.height, pixel_size)?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    pub grid: Grid,
    pub samples: Array2<Complex64>,
}

impl ComplexImage {
    pub fn new(grid: Grid, samples: Array2<Complex64>) -> Result<Self> {
        if samples.dim() != grid.shape() {
            return Err(invalid(format!("sample shape {:?} does not match grid {:?}", samples.dim(), grid.shape())));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, samples: Array2::zeros(grid.shape()) }
    }
}

/// Boolean voxel mask, `true` marks membership.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub grid: Grid,
    pub data: Array2<bool>,
}

impl Mask {
    pub fn full(grid: Grid) -> Self {
        Self { grid, data: Array2::from_elem(grid.shape(), true) }
    }

    pub fn empty(grid: Grid) -> Self {
        Self { grid, data: Array2::from_elem(grid.shape(), false) }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self { grid: self.grid, data: self.data.mapv(|b| !b) }
    }

    pub fn is_disjoint(&self, other: &Mask) -> bool {
        self.data.iter().zip(other.data.iter()).all(|(&a, &b)| !(a && b))
    }

    /// Flat (row-major) indices of the member voxels.
    pub fn indices(&self) -> Vec<usize> {
        self.data.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
    }
}
