//! Numerical object, shared voxel spectrum and bolus time course.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::image::{Grid, RealImage};

/// Field of view assigned to generated phantoms, meters.
pub const DEFAULT_FOV: f64 = 0.24;

/// One ellipse of the phantom in normalized [-1, 1]² coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    /// counter-clockwise rotation of the `semi_x` axis, degrees
    pub angle_deg: f64,
}

const fn ellipse(intensity: f64, semi_x: f64, semi_y: f64, center_x: f64, center_y: f64, angle_deg: f64) -> Ellipse {
    Ellipse { intensity, semi_x, semi_y, center_x, center_y, angle_deg }
}

/// The original Shepp-Logan head (skull intensity 2.0, not the high-contrast variant).
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    ellipse(2.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    ellipse(-0.98, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    ellipse(-0.02, 0.11, 0.31, 0.22, 0.0, -18.0),
    ellipse(-0.02, 0.16, 0.41, -0.22, 0.0, 18.0),
    ellipse(0.01, 0.21, 0.25, 0.0, 0.35, 0.0),
    ellipse(0.01, 0.046, 0.046, 0.0, 0.1, 0.0),
    ellipse(0.01, 0.046, 0.046, 0.0, -0.1, 0.0),
    ellipse(0.01, 0.046, 0.023, -0.08, -0.605, 0.0),
    ellipse(0.01, 0.023, 0.023, 0.0, -0.606, 0.0),
    ellipse(0.01, 0.023, 0.046, 0.06, -0.605, 0.0),
];

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.center_x, y - self.center_y);
        let u = (dx * c + dy * s) / self.semi_x;
        let v = (-dx * s + dy * c) / self.semi_y;
        u * u + v * v <= 1.0
    }
}

/// Phantom intensity at normalized coordinates.
pub fn shepp_logan_value(x: f64, y: f64) -> f64 {
    SHEPP_LOGAN.iter().filter(|e| e.contains(x, y)).map(|e| e.intensity).sum()
}

/// Sample the phantom at pixel centers of a `width`×`height` raster spanning [-1, 1]².
///
/// The returned image carries a pixel size of [`DEFAULT_FOV`]`/width`; use
/// [`RealImage::with_pixel_size`] for another field of view.
pub fn generate_shepp_logan(width: usize, height: usize) -> Result<RealImage> {
    if width < 8 || height < 8 {
        return Err(invalid(format!("phantom needs at least 8x8 pixels, got {width}x{height}")));
    }
    let grid = Grid::new(width, height, DEFAULT_FOV / width as f64)?;
    let samples = ndarray::Array2::from_shape_fn((height, width), |(row, col)| {
        let x = (2 * col + 1) as f64 / width as f64 - 1.0;
        let y = 1.0 - (2 * row + 1) as f64 / height as f64;
        shepp_logan_value(x, y)
    });
    RealImage::new(grid, samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub center_bin: f64,
    pub amplitude: f64,
    pub fwhm_bins: f64,
    /// radians
    pub phase: f64,
}

impl SpectralLine {
    pub fn new(center_bin: f64, amplitude: f64, fwhm_bins: f64, phase: f64) -> Self {
        Self { center_bin, amplitude, fwhm_bins, phase }
    }

    /// Unit-peak Lorentzian profile in bin units.
    pub fn profile(&self, bin: f64) -> f64 {
        let d = 2.0 * (bin - self.center_bin) / self.fwhm_bins;
        1.0 / (1.0 + d * d)
    }
}

/// Lorentzian line list shared by every voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    n_bins: usize,
    lines: Vec<SpectralLine>,
}

impl SpectrumModel {
    pub fn new(n_bins: usize, lines: Vec<SpectralLine>) -> Result<Self> {
        if n_bins == 0 {
            return Err(invalid("spectrum needs at least one bin"));
        }
        for l in &lines {
            if !(l.amplitude.is_finite() && l.amplitude >= 0.0) {
                return Err(invalid(format!("line amplitude must be finite and nonnegative, got {}", l.amplitude)));
            }
            if !(l.fwhm_bins.is_finite() && l.fwhm_bins > 0.0) {
                return Err(invalid(format!("line width must be positive, got {}", l.fwhm_bins)));
            }
            if !(l.center_bin.is_finite() && l.phase.is_finite()) {
                return Err(invalid("line center and phase must be finite"));
            }
        }
        if let Some(top) = lines.iter().map(|l| l.amplitude).reduce(f64::max) {
            if lines.iter().filter(|l| l.amplitude == top).count() != 1 {
                return Err(invalid("exactly one line must have the strictly largest amplitude"));
            }
        }
        Ok(Self { n_bins, lines })
    }

    /// Four zero-phase lines on 64 bins, dominant line four times the others.
    pub fn default_model() -> Self {
        Self::scaled_default(64)
    }

    /// The default line pattern with positions and widths rescaled to `n_bins`.
    pub fn scaled_default(n_bins: usize) -> Self {
        let s = n_bins as f64 / 64.0;
        let lines = [(12.0, 4.0), (28.0, 1.0), (40.0, 1.0), (52.0, 1.0)]
            .into_iter()
            .map(|(c, a)| SpectralLine::new(c * s, a, 32.0 * s, 0.0))
            .collect();
        Self::new(n_bins, lines).expect("default spectrum is valid")
    }

    /// Single line centered in the spectrum, as for one spectrally selective excitation.
    pub fn single_line(n_bins: usize, amplitude: f64, fwhm_bins: f64) -> Result<Self> {
        Self::new(n_bins, vec![SpectralLine::new((n_bins / 2) as f64, amplitude, fwhm_bins, 0.0)])
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn dominant_line(&self) -> Option<&SpectralLine> {
        self.lines.iter().max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
    }

    pub fn with_amplitudes_scaled(&self, factor: f64) -> Result<Self> {
        let lines = self.lines.iter().map(|l| SpectralLine { amplitude: l.amplitude * factor, ..*l }).collect();
        Self::new(self.n_bins, lines)
    }
}

/// Evaluate the emitted spectrum on bins `0..n_bins`.
pub fn synthesize_spectrum(model: &SpectrumModel) -> Vec<Complex64> {
    (0..model.n_bins)
        .map(|bin| {
            model.lines.iter().fold(Complex64::default(), |acc, line| {
                acc + Complex64::from_polar(1.0, line.phase) * (line.amplitude * line.profile(bin as f64))
            })
        })
        .collect()
}

/// Bin with the largest magnitude; the lowest index wins ties.
pub fn dominant_bin(spectrum: &[Complex64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in spectrum.iter().enumerate() {
        let m = v.norm_sqr();
        if best.map_or(true, |(_, b)| m > b) {
            best = Some((i, m));
        }
    }
    best.map(|(i, _)| i)
}

/// Gamma-variate bolus sampled at uniformly spaced frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BolusCurve {
    pub n_frames: usize,
    /// seconds between frames; frame `k` is acquired at `k * frame_spacing`
    pub frame_spacing: f64,
    /// arrival time t0, seconds
    pub arrival: f64,
    /// shape α
    pub shape: f64,
    /// rate β, seconds
    pub rate: f64,
    pub peak_amplitude: f64,
}

impl BolusCurve {
    pub fn new(n_frames: usize, frame_spacing: f64, arrival: f64, shape: f64, rate: f64, peak_amplitude: f64) -> Result<Self> {
        if n_frames == 0 {
            return Err(invalid("bolus needs at least one frame"));
        }
        if !(frame_spacing.is_finite() && frame_spacing > 0.0) {
            return Err(invalid("frame spacing must be positive"));
        }
        if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(invalid("gamma-variate shape and rate must be positive"));
        }
        if !(peak_amplitude.is_finite() && peak_amplitude >= 0.0 && arrival.is_finite()) {
            return Err(invalid("peak amplitude must be finite and nonnegative"));
        }
        Ok(Self { n_frames, frame_spacing, arrival, shape, rate, peak_amplitude })
    }

    /// Constant unit weight for a single static frame.
    pub fn single_frame() -> Self {
        // arrival before t=0 and peak at t=0 so frame 0 carries weight exactly 1
        Self { n_frames: 1, frame_spacing: 1.0, arrival: -1.0, shape: 1.0, rate: 1.0, peak_amplitude: 1.0 }
    }

    pub fn peak_time(&self) -> f64 {
        self.arrival + self.shape * self.rate
    }

    pub fn frame_time(&self, frame: usize) -> f64 {
        frame as f64 * self.frame_spacing
    }

    pub fn amplitude_at(&self, t: f64) -> f64 {
        if t <= self.arrival {
            return 0.0;
        }
        let dt = t - self.arrival;
        self.peak_amplitude * (dt / (self.shape * self.rate)).powf(self.shape) * (self.shape - dt / self.rate).exp()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        (0..self.n_frames).map(|k| self.amplitude_at(self.frame_time(k))).collect()
    }
}

pub fn bolus_amplitude(curve: &BolusCurve, frame: usize) -> Result<f64> {
    if frame >= curve.n_frames {
        return Err(invalid(format!("frame {frame} out of range for {} frames", curve.n_frames)));
    }
    Ok(curve.amplitude_at(curve.frame_time(frame)))
}
