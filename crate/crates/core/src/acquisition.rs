//! Spectral encoding of the object through the coil maps, noise injection and
//! per-coil reconstruction.
//!
//! All transforms are unitary, so noise with per-component standard deviation
//! σ in k-space is still σ per component in image space.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array6, ArrayView2};
use num_complex::Complex64;

use crate::coilsim::CoilSensitivitySet;
use crate::error::{invalid, Error, Result};
use crate::fft::Fft2;
use crate::image::{ComplexImage, Grid, RealImage};
use crate::phantom::{dominant_bin, BolusCurve};
use crate::rng::GaussianStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    KSpace,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetDims {
    pub coils: usize,
    pub bins: usize,
    pub frames: usize,
    pub metabolites: usize,
    pub height: usize,
    pub width: usize,
}

impl DatasetDims {
    pub fn shape(&self) -> (usize, usize, usize, usize, usize, usize) {
        (self.coils, self.bins, self.frames, self.metabolites, self.height, self.width)
    }

    pub fn n_slices(&self) -> usize {
        self.coils * self.bins * self.frames * self.metabolites
    }

    pub fn n_voxels(&self) -> usize {
        self.height * self.width
    }

    pub fn n_samples(&self) -> Option<usize> {
        [self.coils, self.bins, self.frames, self.metabolites, self.height, self.width]
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
    }
}

/// Complex samples indexed `(coil, bin, frame, metabolite, y, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCoilSpectralDataset {
    samples: Array6<Complex64>,
    pixel_size: f64,
    domain: Domain,
    /// Peak image-domain signal magnitude at the dominant bin, when known.
    signal_peak: Option<f64>,
}

impl MultiCoilSpectralDataset {
    pub fn new(samples: Array6<Complex64>, pixel_size: f64, domain: Domain) -> Result<Self> {
        if samples.shape().iter().any(|&d| d == 0) {
            return Err(invalid(format!("dataset dimensions must be positive, got {:?}", samples.shape())));
        }
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(invalid("pixel size must be positive"));
        }
        if samples.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("dataset samples must be finite"));
        }
        let samples = if samples.is_standard_layout() { samples } else { samples.as_standard_layout().into_owned() };
        Ok(Self { samples, pixel_size, domain, signal_peak: None })
    }

    pub fn zeros(dims: DatasetDims, pixel_size: f64, domain: Domain) -> Result<Self> {
        if dims.n_samples().is_none() {
            return Err(invalid("dataset dimensions overflow"));
        }
        Self::new(Array6::zeros(dims.shape()), pixel_size, domain)
    }

    pub fn dims(&self) -> DatasetDims {
        let s = self.samples.shape();
        DatasetDims { coils: s[0], bins: s[1], frames: s[2], metabolites: s[3], height: s[4], width: s[5] }
    }

    pub fn grid(&self) -> Grid {
        let d = self.dims();
        Grid::new(d.width, d.height, self.pixel_size).expect("validated on construction")
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn signal_peak(&self) -> Option<f64> {
        self.signal_peak
    }

    pub fn with_signal_peak(mut self, peak: Option<f64>) -> Self {
        self.signal_peak = peak;
        self
    }

    pub fn samples(&self) -> &Array6<Complex64> {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut Array6<Complex64> {
        &mut self.samples
    }

    pub fn into_samples(self) -> Array6<Complex64> {
        self.samples
    }

    pub fn slice(&self, coil: usize, bin: usize, frame: usize, metabolite: usize) -> ArrayView2<'_, Complex64> {
        self.samples.slice(s![coil, bin, frame, metabolite, .., ..])
    }

    /// The `C` coil images of one `(bin, frame, metabolite)` slice.
    pub fn coil_images(&self, bin: usize, frame: usize, metabolite: usize) -> Result<Vec<ComplexImage>> {
        let d = self.dims();
        if bin >= d.bins || frame >= d.frames || metabolite >= d.metabolites {
            return Err(invalid(format!("slice ({bin}, {frame}, {metabolite}) out of range for {d:?}")));
        }
        let grid = self.grid();
        (0..d.coils).map(|c| ComplexImage::new(grid, self.slice(c, bin, frame, metabolite).to_owned())).collect()
    }

    /// Multiply every sample by a real factor.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.samples.mapv_inplace(|v| v * factor);
        self.signal_peak = self.signal_peak.map(|p| p * factor);
        self
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    fn transform_all(&mut self, inverse: bool) {
        let d = self.dims();
        let plan = Fft2::new(d.height, d.width);
        for c in 0..d.coils {
            for l in 0..d.bins {
                for t in 0..d.frames {
                    for m in 0..d.metabolites {
                        let view = self.samples.slice_mut(s![c, l, t, m, .., ..]);
                        if inverse {
                            plan.inverse(view)
                        } else {
                            plan.forward(view)
                        }
                    }
                }
            }
        }
    }

    /// Forward unitary DFT of every slice of an image-domain dataset.
    pub fn to_kspace(mut self) -> Result<Self> {
        if self.domain != Domain::Image {
            return Err(invalid("dataset is already in k-space"));
        }
        self.transform_all(false);
        self.domain = Domain::KSpace;
        Ok(self)
    }
}

/// Signal-to-noise ratio: peak image-domain signal over per-component noise σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Infinite,
    Finite(f64),
}

impl Snr {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Snr::Finite(value))
        } else if value == f64::INFINITY {
            Ok(Snr::Infinite)
        } else {
            Err(invalid(format!("SNR must be positive, got {value}")))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Snr::Infinite => f64::INFINITY,
            Snr::Finite(v) => *v,
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Infinite => write!(f, "inf"),
            Snr::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Snr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Snr::Infinite);
        }
        let v: f64 = t.parse().map_err(|_| invalid(format!("cannot parse SNR `{s}`")))?;
        Snr::finite(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr: Snr,
    pub seed: u64,
    /// Overrides the dataset's recorded signal peak.
    pub reference_peak: Option<f64>,
}

impl NoiseSpec {
    pub fn new(snr: Snr, seed: u64) -> Self {
        Self { snr, seed, reference_peak: None }
    }

    pub fn with_reference_peak(mut self, peak: f64) -> Self {
        self.reference_peak = Some(peak);
        self
    }
}

/// Spectral content per metabolite: one shared spectrum, or one per metabolite.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralSource {
    Shared(Vec<Complex64>),
    PerMetabolite(Vec<Vec<Complex64>>),
}

impl SpectralSource {
    fn spectra(&self) -> Result<&[Vec<Complex64>]> {
        let list = match self {
            SpectralSource::Shared(x) => std::slice::from_ref(x),
            SpectralSource::PerMetabolite(xs) => xs.as_slice(),
        };
        let n = list.first().map(|x| x.len()).unwrap_or(0);
        if n == 0 || list.iter().any(|x| x.len() != n) {
            return Err(invalid("spectra must be nonempty and share one bin count"));
        }
        Ok(list)
    }
}

fn encode(
    phantom: &RealImage,
    maps: &CoilSensitivitySet,
    spectra: &[Vec<Complex64>],
    weights: &[f64],
) -> Result<MultiCoilSpectralDataset> {
    phantom.grid.ensure_compatible(maps.grid(), "forward_encode")?;
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(invalid(format!("bolus weight must be finite and nonnegative, got {w}")));
    }
    let grid = phantom.grid;
    let dims = DatasetDims {
        coils: maps.n_coils(),
        bins: spectra[0].len(),
        frames: weights.len(),
        metabolites: spectra.len(),
        height: grid.height,
        width: grid.width,
    };
    let mut data = MultiCoilSpectralDataset::zeros(dims, grid.pixel_size, Domain::KSpace)?;
    let plan = Fft2::new(grid.height, grid.width);

    let mut object_peak = 0.0f64;
    for (c, map) in maps.maps().iter().enumerate() {
        // the encoding is linear, so transform phantom·ρ_c once and scale per slice
        let mut base = ndarray::Zip::from(&phantom.samples).and(&map.samples).map_collect(|p, r| r * *p);
        object_peak = base.iter().fold(object_peak, |m, v| m.max(v.norm()));
        plan.forward(base.view_mut());
        for (m, x) in spectra.iter().enumerate() {
            for (l, xl) in x.iter().enumerate() {
                for (t, w) in weights.iter().enumerate() {
                    let factor = xl * *w;
                    data.samples.slice_mut(s![c, l, t, m, .., ..]).zip_mut_with(&base, |o, b| *o = b * factor);
                }
            }
        }
    }
    let spectral_peak = spectra
        .iter()
        .map(|x| dominant_bin(x).map_or(0.0, |k| x[k].norm()))
        .fold(0.0, f64::max);
    let weight_peak = weights.iter().copied().fold(0.0, f64::max);
    Ok(data.with_signal_peak(Some(object_peak * spectral_peak * weight_peak)))
}

/// Image-domain signal `w · phantom · ρ_c · x_λ`, transformed to fully sampled Cartesian k-space.
pub fn forward_encode(
    phantom: &RealImage,
    maps: &CoilSensitivitySet,
    spectrum: &[Complex64],
    bolus_weight: f64,
) -> Result<MultiCoilSpectralDataset> {
    if spectrum.is_empty() {
        return Err(invalid("spectrum must have at least one bin"));
    }
    encode(phantom, maps, std::slice::from_ref(&spectrum.to_vec()), &[bolus_weight])
}

/// Add i.i.d. complex Gaussian noise with σ = S_peak / snr per real and imaginary component.
///
/// Slice `(c, λ, t, m)` draws from its own stream of `seed`, so the result does
/// not depend on traversal order.
pub fn add_noise(mut data: MultiCoilSpectralDataset, noise: &NoiseSpec) -> Result<MultiCoilSpectralDataset> {
    if data.domain != Domain::KSpace {
        return Err(invalid("noise is injected in k-space; dataset is image-domain"));
    }
    let snr = match noise.snr {
        Snr::Infinite => return Ok(data),
        Snr::Finite(v) if v > 0.0 && v.is_finite() => v,
        Snr::Finite(v) => return Err(invalid(format!("SNR must be positive, got {v}"))),
    };
    let peak = noise
        .reference_peak
        .or(data.signal_peak)
        .ok_or_else(|| invalid("no reference signal peak recorded for noise calibration"))?;
    let sigma = peak / snr;
    let voxels = data.dims().n_voxels();
    let flat = data.samples.as_slice_mut().expect("standard layout");
    for (slice, chunk) in flat.chunks_mut(voxels).enumerate() {
        let mut g = GaussianStream::new(noise.seed, slice as u64);
        for v in chunk {
            let (re, im) = g.next_pair();
            *v += Complex64::new(re * sigma, im * sigma);
        }
    }
    Ok(data)
}

/// Inverse unitary DFT of every slice.
pub fn inverse_recon(mut data: MultiCoilSpectralDataset) -> Result<MultiCoilSpectralDataset> {
    if data.domain != Domain::KSpace {
        return Err(invalid("inverse reconstruction needs k-space data"));
    }
    data.transform_all(true);
    data.domain = Domain::Image;
    Ok(data)
}

/// Dynamic series: frame `t` scaled by the bolus amplitude, independent noise per frame.
pub fn simulate_dynamic(
    phantom: &RealImage,
    maps: &CoilSensitivitySet,
    spectra: &SpectralSource,
    bolus: &BolusCurve,
    noise: &NoiseSpec,
) -> Result<MultiCoilSpectralDataset> {
    let clean = encode(phantom, maps, spectra.spectra()?, &bolus.amplitudes())?;
    add_noise(clean, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coilsim::{normalize_maps, place_coils_ring};
    use crate::image::Mask;
    use crate::phantom::{generate_shepp_logan, synthesize_spectrum, SpectrumModel};
    use ndarray::Array2;

    fn small_setup(n: usize) -> (RealImage, CoilSensitivitySet) {
        let phantom = generate_shepp_logan(n, n).unwrap();
        let coils = place_coils_ring(4, 0.5, 0.12, 0.12, 0.0).unwrap();
        let raw = CoilSensitivitySet::simulate(&coils, &phantom.grid).unwrap();
        let maps = normalize_maps(&raw, &Mask::full(phantom.grid)).unwrap();
        (phantom, maps)
    }

    fn pseudo_random(i: usize) -> f64 {
        ((i as f64 * 12.9898).sin() * 43758.5453).fract()
    }

    #[test]
    fn zero_phantom_gives_zero_kspace() {
        let (p, maps) = small_setup(16);
        let zero = RealImage::zeros(p.grid);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(8));
        let d = forward_encode(&zero, &maps, &x, 1.0).unwrap();
        assert!(d.samples().iter().all(|v| *v == Complex64::default()));
        assert_eq!(d.domain(), Domain::KSpace);
    }

    #[test]
    fn constant_object_is_a_dc_delta() {
        let grid = Grid::square(8, 0.1).unwrap();
        let phantom = RealImage::new(grid, Array2::from_elem((8, 8), 1.0)).unwrap();
        let maps = CoilSensitivitySet::new(vec![ComplexImage::new(grid, Array2::from_elem((8, 8), Complex64::new(1.0, 0.0))).unwrap()]).unwrap();
        let d = forward_encode(&phantom, &maps, &[Complex64::new(1.0, 0.0)], 1.0).unwrap();
        let k = d.slice(0, 0, 0, 0);
        assert!((k[[0, 0]] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        let rest: f64 = k.iter().skip(1).map(|v| v.norm()).sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn parseval_against_direct_sum() {
        let grid = Grid::new(12, 10, 0.01).unwrap();
        let phantom = RealImage::new(grid, Array2::from_shape_fn((10, 12), |(r, c)| pseudo_random(r * 12 + c).abs())).unwrap();
        let maps = CoilSensitivitySet::new(
            (0..3)
                .map(|k| {
                    ComplexImage::new(grid, Array2::from_shape_fn((10, 12), |(r, c)| {
                        Complex64::new(pseudo_random(1000 * k + r * 12 + c + 7), pseudo_random(5000 * k + r + c * 10 + 3))
                    }))
                    .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let x: Vec<Complex64> = (0..5).map(|i| Complex64::new(pseudo_random(900 + i), pseudo_random(950 + i))).collect();
        let d = forward_encode(&phantom, &maps, &x, 0.7).unwrap();
        let mut direct = 0.0;
        for m in maps.maps() {
            for xl in &x {
                for (p, r) in phantom.samples.iter().zip(m.samples.iter()) {
                    direct += (r * *p * *xl * 0.7).norm_sqr();
                }
            }
        }
        assert!((d.energy() - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn noise_infinite_snr_is_identity() {
        let (p, maps) = small_setup(16);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(4));
        let d = forward_encode(&p, &maps, &x, 1.0).unwrap();
        let n = add_noise(d.clone(), &NoiseSpec::new(Snr::Infinite, 3)).unwrap();
        assert_eq!(n, d);
    }

    #[test]
    fn noise_is_deterministic() {
        let (p, maps) = small_setup(16);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(4));
        let d = forward_encode(&p, &maps, &x, 1.0).unwrap();
        let spec = NoiseSpec::new(Snr::Finite(10.0), 99);
        let a = add_noise(d.clone(), &spec).unwrap();
        let b = add_noise(d.clone(), &spec).unwrap();
        assert_eq!(a, b);
        let c = add_noise(d, &NoiseSpec::new(Snr::Finite(10.0), 100)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_variance_matches_snr() {
        let dims = DatasetDims { coils: 4, bins: 4, frames: 1, metabolites: 1, height: 256, width: 256 };
        let d = MultiCoilSpectralDataset::zeros(dims, 0.001, Domain::KSpace).unwrap();
        let n = add_noise(d, &NoiseSpec::new(Snr::Finite(10.0), 5).with_reference_peak(1.0)).unwrap();
        let count = n.samples().len() as f64;
        assert!(count >= 1e6);
        let mean = n.samples().iter().map(|v| v.re).sum::<f64>() / count;
        let var = n.samples().iter().map(|v| (v.re - mean).powi(2)).sum::<f64>() / count;
        assert!((var - 0.01).abs() / 0.01 < 0.02, "variance {var}");
    }

    #[test]
    fn noise_rejects_image_domain_and_missing_peak() {
        let dims = DatasetDims { coils: 1, bins: 1, frames: 1, metabolites: 1, height: 4, width: 4 };
        let img = MultiCoilSpectralDataset::zeros(dims, 0.01, Domain::Image).unwrap();
        assert!(add_noise(img, &NoiseSpec::new(Snr::Finite(10.0), 1).with_reference_peak(1.0)).is_err());
        let k = MultiCoilSpectralDataset::zeros(dims, 0.01, Domain::KSpace).unwrap();
        assert!(add_noise(k, &NoiseSpec::new(Snr::Finite(10.0), 1)).is_err());
    }

    #[test]
    fn recon_round_trip_and_domain_checks() {
        let dims = DatasetDims { coils: 2, bins: 3, frames: 2, metabolites: 1, height: 6, width: 10 };
        let mut d = MultiCoilSpectralDataset::zeros(dims, 0.01, Domain::Image).unwrap();
        for (i, v) in d.samples_mut().iter_mut().enumerate() {
            *v = Complex64::new(pseudo_random(i), pseudo_random(i + 77_777));
        }
        let original = d.clone();
        let k = d.to_kspace().unwrap();
        assert!(inverse_recon(original.clone()).is_err());
        let back = inverse_recon(k.clone()).unwrap();
        assert!(back.to_kspace().is_ok());
        let back = inverse_recon(k).unwrap();
        let err = back.samples().iter().zip(original.samples().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert_eq!(back.domain(), Domain::Image);
    }

    #[test]
    fn dc_delta_reconstructs_to_constant() {
        let dims = DatasetDims { coils: 1, bins: 1, frames: 1, metabolites: 1, height: 4, width: 4 };
        let mut d = MultiCoilSpectralDataset::zeros(dims, 0.01, Domain::KSpace).unwrap();
        d.samples_mut()[[0, 0, 0, 0, 0, 0]] = Complex64::new(4.0, 0.0);
        let img = inverse_recon(d).unwrap();
        assert!(img.samples().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn noiseless_voxel_spectrum_matches_model() {
        let (p, maps) = small_setup(32);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(16));
        let img = inverse_recon(forward_encode(&p, &maps, &x, 1.0).unwrap()).unwrap();
        let (r, c) = (16, 13);
        for coil in 0..maps.n_coils() {
            for (l, xl) in x.iter().enumerate() {
                let expect = maps.map(coil).samples[[r, c]] * p.samples[[r, c]] * *xl;
                assert!((img.slice(coil, l, 0, 0)[[r, c]] - expect).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn signal_peak_is_recorded_at_dominant_bin() {
        let (p, maps) = small_setup(16);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(8));
        let d = forward_encode(&p, &maps, &x, 2.0).unwrap();
        let img = inverse_recon(d.clone()).unwrap();
        let k = dominant_bin(&x).unwrap();
        let direct = (0..maps.n_coils())
            .flat_map(|c| img.slice(c, k, 0, 0).iter().map(|v| v.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        assert!((d.signal_peak().unwrap() - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn dynamic_single_frame_matches_static() {
        let (p, maps) = small_setup(16);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(4));
        let noise = NoiseSpec::new(Snr::Finite(20.0), 11);
        let bolus = BolusCurve::single_frame();
        let dyn_ = simulate_dynamic(&p, &maps, &SpectralSource::Shared(x.clone()), &bolus, &noise).unwrap();
        let stat = add_noise(forward_encode(&p, &maps, &x, 1.0).unwrap(), &noise).unwrap();
        assert_eq!(dyn_, stat);
    }

    #[test]
    fn dynamic_frame_energy_follows_bolus() {
        let (p, maps) = small_setup(16);
        let x = synthesize_spectrum(&SpectrumModel::scaled_default(4));
        let bolus = BolusCurve::new(30, 2.0, 0.0, 2.0, 3.0, 1.0).unwrap();
        let d = simulate_dynamic(&p, &maps, &SpectralSource::Shared(x), &bolus, &NoiseSpec::new(Snr::Infinite, 0)).unwrap();
        let amps = bolus.amplitudes();
        let peak_frame = amps.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let frame_energy = |t: usize| d.samples().slice(s![.., .., t, .., .., ..]).iter().map(|v| v.norm_sqr()).sum::<f64>();
        let e_peak = frame_energy(peak_frame);
        for (t, a) in amps.iter().enumerate() {
            let expect = e_peak * a * a / (amps[peak_frame] * amps[peak_frame]);
            assert!((frame_energy(t) - expect).abs() <= 1e-9 * e_peak);
        }
        assert_eq!(frame_energy(0), 0.0);
    }

    #[test]
    fn per_metabolite_spectra() {
        let (p, maps) = small_setup(16);
        let specs: Vec<Vec<Complex64>> = (0..3)
            .map(|m| synthesize_spectrum(&SpectrumModel::single_line(1, 1.0 + m as f64, 1.0).unwrap()))
            .collect();
        let bolus = BolusCurve::new(4, 2.0, 0.0, 1.0, 3.0, 1.0).unwrap();
        let d = simulate_dynamic(&p, &maps, &SpectralSource::PerMetabolite(specs), &bolus, &NoiseSpec::new(Snr::Infinite, 0)).unwrap();
        assert_eq!(d.dims().metabolites, 3);
        assert_eq!(d.dims().bins, 1);
        let bad = SpectralSource::PerMetabolite(vec![vec![Complex64::new(1.0, 0.0)], vec![]]);
        assert!(simulate_dynamic(&p, &maps, &bad, &bolus, &NoiseSpec::new(Snr::Infinite, 0)).is_err());
    }

    #[test]
    fn snr_parsing() {
        assert_eq!("inf".parse::<Snr>().unwrap(), Snr::Infinite);
        assert_eq!("10".parse::<Snr>().unwrap(), Snr::Finite(10.0));
        assert!("-1".parse::<Snr>().is_err());
        assert!("abc".parse::<Snr>().is_err());
        assert_eq!(Snr::Finite(50.0).to_string(), "50");
    }
}
