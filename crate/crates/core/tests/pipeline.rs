//! End-to-end behaviour of the library across modules.

use ndarray::Array2;
use num_complex::Complex64;

use xsens_core::acquisition::{add_noise, forward_encode, inverse_recon, NoiseSpec, Snr};
use xsens_core::coilsim::CoilSensitivitySet;
use xsens_core::estimators::{estimate_maps, EstimatorConfig, IndexSet, Method};
use xsens_core::image::{ComplexImage, Grid, Mask, RealImage};
use xsens_core::metrics::mse;
use xsens_core::phantom::{BolusCurve, SpectrumModel};
use xsens_core::pipeline::{Scenario, Truth};
use xsens_core::recon::roemer_combine;

fn small_truth() -> Truth {
    Truth::build(&Scenario { phantom_size: 48, spectrum: SpectrumModel::scaled_default(16), ..Scenario::default() }).unwrap()
}

#[test]
fn noiseless_estimates_match_the_truth() {
    let truth = small_truth();
    let data = truth.simulate(Snr::Infinite, 0).unwrap();
    let set = IndexSet::spectral(&data.dims(), 0, 0).unwrap();
    for method in Method::ALL {
        let est = estimate_maps(&data, method, &set, &EstimatorConfig::unmasked()).unwrap().masked(&truth.support).unwrap();
        assert!(mse(&est, &truth.maps, &truth.support, false).unwrap().aggregate < 1e-24, "{method}");
    }
}

#[test]
fn refpeak_voxel_values_are_conjugate_weights() {
    let truth = small_truth();
    let data = truth.simulate(Snr::Infinite, 0).unwrap();
    let set = IndexSet::spectral(&data.dims(), 0, 0).unwrap();
    let est = estimate_maps(&data, Method::RefPeak, &set, &EstimatorConfig::unmasked()).unwrap();
    let v = truth.support.indices()[100];
    let rows: Vec<Vec<Complex64>> = (0..data.dims().bins)
        .map(|b| (0..data.dims().coils).map(|c| data.slice(c, b, 0, 0).as_slice().unwrap()[v]).collect())
        .collect();
    let obs = xsens_core::VoxelObservations::from_rows(&rows).unwrap();
    let raw = xsens_core::ref_peak_voxel(&obs, &EstimatorConfig::default()).unwrap();
    for (m, r) in est.voxel(v).iter().zip(&raw) {
        assert!((m - r.conj()).norm() < 1e-15);
    }
}

#[test]
fn degenerate_time_axis_matches_spectral_set() {
    let truth = small_truth();
    let data = truth.simulate_dynamic(&BolusCurve::single_frame(), Snr::Finite(15.0), 3).unwrap();
    assert_eq!(data.dims().frames, 1);
    let cfg = EstimatorConfig::default();
    for method in Method::ALL {
        let a = estimate_maps(&data, method, &IndexSet::spectral(&data.dims(), 0, 0).unwrap(), &cfg).unwrap();
        let b = estimate_maps(&data, method, &IndexSet::spectral_time(&data.dims(), 0).unwrap(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn single_frame_dynamic_equals_static() {
    let truth = small_truth();
    let dynamic = truth.simulate_dynamic(&BolusCurve::single_frame(), Snr::Finite(20.0), 9).unwrap();
    let fixed = truth.simulate(Snr::Finite(20.0), 9).unwrap();
    assert_eq!(dynamic.samples(), fixed.samples());
}

#[test]
fn data_driven_threshold_blanks_background() {
    let truth = small_truth();
    let data = truth.simulate(Snr::Finite(30.0), 5).unwrap();
    let set = IndexSet::spectral(&data.dims(), 0, 0).unwrap();
    let est = estimate_maps(&data, Method::L2Optimal, &set, &EstimatorConfig::default()).unwrap();
    let outside = truth.support.complement().indices();
    let zeroed = outside.iter().filter(|&&v| est.voxel(v).iter().all(|x| *x == Complex64::default())).count();
    assert!(zeroed as f64 > 0.95 * outside.len() as f64, "{zeroed} of {}", outside.len());
    let inside = truth.support.indices();
    let kept = inside.iter().filter(|&&v| est.voxel(v).iter().any(|x| *x != Complex64::default())).count();
    assert_eq!(kept, inside.len());
}

#[test]
fn roemer_with_true_maps_recovers_the_object_at_the_dominant_bin() {
    let truth = small_truth();
    let data = truth.simulate(Snr::Infinite, 0).unwrap();
    let bin = truth.dominant_bin();
    let images = data.coil_images(bin, 0, 0).unwrap();
    let m = roemer_combine(&images, &truth.maps).unwrap();
    let x = truth.spectrum[bin];
    for (got, p) in m.image.samples.iter().zip(truth.phantom.samples.iter()) {
        assert!((got - x * *p).norm() < 1e-9);
    }
}

#[test]
fn roemer_combination_is_independent_of_coil_count() {
    for n_coils in [2, 5, 8] {
        let mut scenario = Scenario { phantom_size: 32, spectrum: SpectrumModel::scaled_default(8), ..Scenario::default() };
        scenario.ring.n_coils = n_coils;
        scenario.coupling_rank = n_coils.min(5);
        let truth = Truth::build(&scenario).unwrap();
        let data = truth.simulate(Snr::Infinite, 0).unwrap();
        let bin = truth.dominant_bin();
        let m = roemer_combine(&data.coil_images(bin, 0, 0).unwrap(), &truth.maps).unwrap();
        for (got, p) in m.image.samples.iter().zip(truth.phantom.samples.iter()) {
            assert!((got - truth.spectrum[bin] * *p).norm() < 1e-9);
        }
    }
}

#[test]
fn noise_is_zero_mean_over_seeds() {
    let grid = Grid::square(8, 0.08).unwrap();
    let phantom = RealImage::new(grid, Array2::from_shape_fn((8, 8), |(y, x)| ((x + 2 * y) % 5) as f64)).unwrap();
    let maps = CoilSensitivitySet::new(vec![ComplexImage::new(grid, Array2::from_elem((8, 8), Complex64::new(0.6, 0.8))).unwrap()]).unwrap();
    let clean = forward_encode(&phantom, &maps, &[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)], 1.0).unwrap();
    let snr = 5.0;
    let sigma = clean.signal_peak().unwrap() / snr;
    let n = 600;
    let mut sum = clean.samples().mapv(|_| Complex64::default());
    for seed in 0..n {
        let noisy = add_noise(clean.clone(), &NoiseSpec::new(Snr::Finite(snr), seed)).unwrap();
        sum = sum + noisy.samples();
    }
    let se = sigma / (n as f64).sqrt();
    let deviations: Vec<f64> = sum
        .iter()
        .zip(clean.samples().iter())
        .flat_map(|(s, c)| {
            let mean = s / n as f64;
            [(mean.re - c.re).abs() / se, (mean.im - c.im).abs() / se]
        })
        .collect();
    // 0.27% of comparisons are expected beyond 3 SE by chance
    let beyond = deviations.iter().filter(|&&d| d > 3.0).count();
    assert!(beyond as f64 <= 0.01 * deviations.len() as f64, "{beyond} of {} beyond 3 SE", deviations.len());
    assert!(deviations.iter().all(|&d| d < 5.0));
    let image = inverse_recon(clean).unwrap();
    assert!(image.energy() > 0.0);
}

#[test]
fn support_mask_matches_phantom() {
    let truth = small_truth();
    assert_eq!(truth.support, truth.phantom.support());
    assert!(truth.support.count() > 0 && truth.support.count() < truth.grid().n_voxels());
    assert!(Mask::full(truth.grid()).count() == truth.grid().n_voxels());
}
