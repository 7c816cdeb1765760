//! Coil-sensitivity estimation for multi-coil spectroscopic imaging.
//!
//! The crate simulates a multi-coil spectral acquisition of a numerical
//! phantom, estimates coil sensitivity maps voxel by voxel with a
//! reference-peak method or a least-squares ("L2 Optimal") method, combines
//! coil images, and scores the estimates against the simulated truth.

pub mod acquisition;
pub mod coilsim;
pub mod error;
pub mod estimators;
pub mod fft;
pub mod image;
pub mod io;
pub mod metrics;
mod numeric;
pub mod phantom;
pub mod pipeline;
pub mod recon;
pub mod rng;

pub use acquisition::{
    add_noise, forward_encode, inverse_recon, simulate_dynamic, DatasetDims, Domain, MultiCoilSpectralDataset,
    NoiseSpec, Snr, SpectralSource,
};
pub use coilsim::{
    biot_savart_field, biot_savart_map, couple_coils, normalize_maps, place_coils_ring, CoilGeometry,
    CoilSensitivitySet, SensitivityMatrix,
};
pub use error::{Error, Result};
pub use estimators::{
    build_rss_regressor, estimate_maps, l2_optimal_voxel, ref_peak_voxel, EstimatorConfig, GeneralizedIndex,
    IndexMode, IndexSet, Method, RefPeakBinMode, RegressorMode, VoxelObservations,
};
pub use image::{ComplexImage, Grid, Mask, RealImage};
pub use metrics::{mse, reproduce_table1, roi_snr, MseReport, RoiSnrReport, Table1, Table1Row};
pub use phantom::{
    bolus_amplitude, dominant_bin, generate_shepp_logan, synthesize_spectrum, BolusCurve, SpectralLine,
    SpectrumModel,
};
pub use pipeline::{CoilRing, Scenario, Truth};
pub use recon::{roemer_combine, rss_combine, CombineMethod, CombinedImage};
