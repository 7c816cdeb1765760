//! The simulated experiment: phantom, coupled coil ring, spectrum, and noisy trials.

use crate::acquisition::{
    add_noise, forward_encode, inverse_recon, simulate_dynamic, MultiCoilSpectralDataset, NoiseSpec, Snr,
    SpectralSource,
};
use crate::coilsim::{couple_coils, normalize_maps, place_coils_ring, CoilGeometry, CoilSensitivitySet};
use crate::error::{invalid, Result};
use crate::image::{Grid, Mask, RealImage};
use crate::phantom::{dominant_bin, generate_shepp_logan, synthesize_spectrum, BolusCurve, SpectrumModel, DEFAULT_FOV};

/// Rectangular receive coils evenly spaced on a ring around the object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilRing {
    pub n_coils: usize,
    /// distance between the centers of opposite coils, meters
    pub opposite_distance: f64,
    pub coil_width: f64,
    pub coil_height: f64,
    /// z of the coil centers; the imaging plane is z = 0
    pub plane_offset: f64,
}

impl Default for CoilRing {
    fn default() -> Self {
        Self { n_coils: 8, opposite_distance: 0.5, coil_width: 0.12, coil_height: 0.12, plane_offset: 0.0 }
    }
}

impl CoilRing {
    pub fn coils(&self) -> Result<Vec<CoilGeometry>> {
        place_coils_ring(self.n_coils, self.opposite_distance, self.coil_width, self.coil_height, self.plane_offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// phantom width and height, pixels
    pub phantom_size: usize,
    /// field of view, meters
    pub fov: f64,
    pub spectrum: SpectrumModel,
    pub ring: CoilRing,
    pub coupling_rank: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            phantom_size: 128,
            fov: DEFAULT_FOV,
            spectrum: SpectrumModel::default_model(),
            ring: CoilRing::default(),
            coupling_rank: 5,
        }
    }
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid> {
        Grid::square(self.phantom_size, self.fov)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.phantom_size < 8 {
            return Err(invalid(format!("phantom size must be at least 8, got {}", self.phantom_size)));
        }
        if self.coupling_rank == 0 || self.coupling_rank > self.ring.n_coils {
            return Err(invalid(format!(
                "coupling rank must be in 1..={}, got {}",
                self.ring.n_coils, self.coupling_rank
            )));
        }
        if self.spectrum.lines().is_empty() {
            return Err(invalid("spectrum needs at least one line"));
        }
        self.ring.coils()?;
        Ok(())
    }
}

/// Ground truth of a scenario and the noiseless k-space it produces.
#[derive(Debug, Clone)]
pub struct Truth {
    pub scenario: Scenario,
    pub phantom: RealImage,
    pub support: Mask,
    /// coupled maps, unit coil-vector norm on the support and zero elsewhere
    pub maps: CoilSensitivitySet,
    /// coupled maps with unit coil-vector norm everywhere in the field of view
    pub full_maps: CoilSensitivitySet,
    pub spectrum: Vec<num_complex::Complex64>,
    clean: MultiCoilSpectralDataset,
}

impl Truth {
    pub fn build(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let grid = scenario.grid()?;
        let phantom = generate_shepp_logan(scenario.phantom_size, scenario.phantom_size)?.with_pixel_size(grid.pixel_size)?;
        let support = phantom.support();
        let raw = CoilSensitivitySet::simulate(&scenario.ring.coils()?, &grid)?;
        let coupled = couple_coils(&raw, scenario.coupling_rank)?;
        let maps = normalize_maps(&coupled, &support)?;
        let full_maps = normalize_maps(&coupled, &Mask::full(grid))?;
        let spectrum = synthesize_spectrum(&scenario.spectrum);
        let clean = forward_encode(&phantom, &maps, &spectrum, 1.0)?;
        Ok(Self { scenario: scenario.clone(), phantom, support, maps, full_maps, spectrum, clean })
    }

    pub fn grid(&self) -> Grid {
        self.phantom.grid
    }

    pub fn dominant_bin(&self) -> usize {
        dominant_bin(&self.spectrum).expect("spectrum is nonempty")
    }

    pub fn clean_kspace(&self) -> &MultiCoilSpectralDataset {
        &self.clean
    }

    /// Image-domain multi-coil data for one trial.
    pub fn simulate(&self, snr: Snr, seed: u64) -> Result<MultiCoilSpectralDataset> {
        inverse_recon(add_noise(self.clean.clone(), &NoiseSpec::new(snr, seed))?)
    }

    /// Image-domain dynamic series with the bolus applied frame by frame.
    pub fn simulate_dynamic(&self, bolus: &BolusCurve, snr: Snr, seed: u64) -> Result<MultiCoilSpectralDataset> {
        let source = SpectralSource::Shared(self.spectrum.clone());
        inverse_recon(simulate_dynamic(&self.phantom, &self.maps, &source, bolus, &NoiseSpec::new(snr, seed))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scenario {
        Scenario { phantom_size: 32, spectrum: SpectrumModel::scaled_default(8), ..Scenario::default() }
    }

    #[test]
    fn defaults() {
        let s = Scenario::default();
        assert_eq!((s.phantom_size, s.ring.n_coils, s.coupling_rank, s.spectrum.n_bins()), (128, 8, 5, 64));
        assert_eq!(s.ring.opposite_distance, 0.5);
        s.validate().unwrap();
    }

    #[test]
    fn truth_maps_are_normalized_on_support() {
        let t = Truth::build(&small()).unwrap();
        let w = t.grid().width;
        for v in 0..t.grid().n_voxels() {
            let n: f64 = t.maps.voxel(v).iter().map(|x| x.norm_sqr()).sum();
            let full: f64 = t.full_maps.voxel(v).iter().map(|x| x.norm_sqr()).sum();
            assert!((full - 1.0).abs() < 1e-12);
            if t.support.data[[v / w, v % w]] {
                assert!((n - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(n, 0.0);
            }
        }
    }

    #[test]
    fn invalid_scenarios() {
        assert!(Scenario { coupling_rank: 9, ..Scenario::default() }.validate().is_err());
        assert!(Scenario { phantom_size: 4, ..Scenario::default() }.validate().is_err());
        assert!(Scenario { fov: 0.0, ..Scenario::default() }.validate().is_err());
    }

    #[test]
    fn trials_are_reproducible_and_seed_dependent() {
        let t = Truth::build(&small()).unwrap();
        let a = t.simulate(Snr::Finite(20.0), 3).unwrap();
        let b = t.simulate(Snr::Finite(20.0), 3).unwrap();
        let c = t.simulate(Snr::Finite(20.0), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
