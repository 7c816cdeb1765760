//! Estimator accuracy (MSE against the truth) and combined-image SNR.

use num_complex::Complex64;

use crate::acquisition::Snr;
use crate::coilsim::CoilSensitivitySet;
use crate::error::{invalid, Result};
use crate::estimators::{estimate_maps, EstimatorConfig, IndexSet, Method};
use crate::image::Mask;
use crate::pipeline::Truth;
use crate::recon::CombinedImage;
use crate::rng::trial_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MseReport {
    pub method: Option<Method>,
    pub snr: Option<Snr>,
    pub per_coil: Vec<f64>,
    /// mean over supported voxels and coils of `|ρ̂ − ρ|²`
    pub aggregate: f64,
    pub n_trials: usize,
    pub seeds: Vec<u64>,
}

/// Mean squared complex deviation over the supported voxels and all coils.
///
/// With `phase_align`, each voxel's estimate is first rotated by the unit
/// scalar that minimizes that voxel's error.
pub fn mse(est: &CoilSensitivitySet, truth: &CoilSensitivitySet, support: &Mask, phase_align: bool) -> Result<MseReport> {
    est.grid().ensure_compatible(truth.grid(), "mse")?;
    est.grid().ensure_compatible(&support.grid, "mse support")?;
    if est.n_coils() != truth.n_coils() {
        return Err(invalid(format!("coil counts differ: {} vs {}", est.n_coils(), truth.n_coils())));
    }
    let voxels = support.indices();
    if voxels.is_empty() {
        return Err(invalid("mse support is empty"));
    }
    let w = support.grid.width;
    let n_coils = est.n_coils();
    let mut per_coil = vec![0.0; n_coils];
    for &v in &voxels {
        let idx = [v / w, v % w];
        let rotation = if phase_align {
            let cross: Complex64 =
                est.maps().iter().zip(truth.maps()).map(|(e, t)| t.samples[idx].conj() * e.samples[idx]).sum();
            if cross.norm() > 0.0 { (cross / cross.norm()).conj() } else { Complex64::new(1.0, 0.0) }
        } else {
            Complex64::new(1.0, 0.0)
        };
        for (c, acc) in per_coil.iter_mut().enumerate() {
            *acc += (est.map(c).samples[idx] * rotation - truth.map(c).samples[idx]).norm_sqr();
        }
    }
    let aggregate = per_coil.iter().sum::<f64>() / (voxels.len() * n_coils) as f64;
    per_coil.iter_mut().for_each(|m| *m /= voxels.len() as f64);
    Ok(MseReport { method: None, snr: None, per_coil, aggregate, n_trials: 1, seeds: Vec::new() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiSnrReport {
    pub signal_roi: Mask,
    pub noise_roi: Mask,
    pub signal_mean: f64,
    pub noise_std: f64,
    /// `signal_mean / noise_std`; infinite when the noise ROI has no spread
    pub snr: f64,
    pub unbounded: bool,
}

fn check_rois(image: &CombinedImage, signal_roi: &Mask, noise_roi: &Mask) -> Result<()> {
    image.grid().ensure_compatible(&signal_roi.grid, "signal ROI")?;
    image.grid().ensure_compatible(&noise_roi.grid, "noise ROI")?;
    if signal_roi.count() == 0 || noise_roi.count() == 0 {
        return Err(invalid("ROIs must be nonempty"));
    }
    if !signal_roi.is_disjoint(noise_roi) {
        return Err(invalid("signal and noise ROIs overlap"));
    }
    Ok(())
}

/// Single-image SNR: mean magnitude in the signal ROI over the standard
/// deviation of the real parts in the noise ROI.
pub fn roi_snr(image: &CombinedImage, signal_roi: &Mask, noise_roi: &Mask) -> Result<RoiSnrReport> {
    check_rois(image, signal_roi, noise_roi)?;
    let samples = &image.image.samples;
    let signal: Vec<f64> = samples.iter().zip(signal_roi.data.iter()).filter(|(_, &m)| m).map(|(v, _)| v.norm()).collect();
    let noise: Vec<f64> = samples.iter().zip(noise_roi.data.iter()).filter(|(_, &m)| m).map(|(v, _)| v.re).collect();
    let signal_mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let noise_mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let noise_std = (noise.iter().map(|x| (x - noise_mean).powi(2)).sum::<f64>() / noise.len() as f64).sqrt();
    let unbounded = noise_std == 0.0;
    let snr = if unbounded { f64::INFINITY } else { signal_mean / noise_std };
    Ok(RoiSnrReport {
        signal_roi: signal_roi.clone(),
        noise_roi: noise_roi.clone(),
        signal_mean,
        noise_std,
        snr,
        unbounded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaSnrReport {
    /// mean noiseless magnitude over the ROI
    pub signal: f64,
    /// root-mean-square magnitude error over the ROI and all replicas
    pub noise: f64,
    pub snr: f64,
    pub n_replicas: usize,
}

/// Monte Carlo SNR from repeated noisy combinations of the same object.
///
/// Noise is the RMS deviation of each replica's magnitude from the noiseless
/// magnitude, so magnitude bias counts as error alongside variance.
pub fn replica_snr(noiseless: &CombinedImage, replicas: &[CombinedImage], roi: &Mask) -> Result<ReplicaSnrReport> {
    noiseless.grid().ensure_compatible(&roi.grid, "replica SNR ROI")?;
    if replicas.is_empty() {
        return Err(invalid("replica SNR needs at least one replica"));
    }
    let voxels = roi.indices();
    if voxels.is_empty() {
        return Err(invalid("replica SNR ROI is empty"));
    }
    let w = roi.grid.width;
    let clean: Vec<f64> = voxels.iter().map(|&v| noiseless.image.samples[[v / w, v % w]].norm()).collect();
    let signal = clean.iter().sum::<f64>() / clean.len() as f64;
    let mut sq = 0.0;
    for r in replicas {
        noiseless.grid().ensure_compatible(r.grid(), "replica SNR")?;
        for (&v, c) in voxels.iter().zip(&clean) {
            sq += (r.image.samples[[v / w, v % w]].norm() - c).powi(2);
        }
    }
    let noise = (sq / (voxels.len() * replicas.len()) as f64).sqrt();
    let snr = if noise == 0.0 { f64::INFINITY } else { signal / noise };
    Ok(ReplicaSnrReport { signal, noise, snr, n_replicas: replicas.len() })
}

/// Maps estimated from one simulated trial, vacant (out-of-support) voxels set to 0.
pub fn run_trial(truth: &Truth, snr: Snr, seed: u64, methods: &[Method]) -> Result<Vec<CoilSensitivitySet>> {
    let data = truth.simulate(snr, seed)?;
    let index_set = IndexSet::spectral(&data.dims(), 0, 0)?;
    let config = EstimatorConfig::unmasked();
    methods
        .iter()
        .map(|&m| estimate_maps(&data, m, &index_set, &config)?.masked(&truth.support))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub snr: Snr,
    pub method: Method,
    pub mse_mean: f64,
    /// sample standard deviation over trials (0 for a single trial)
    pub mse_std: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub trial_mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub master_seed: u64,
}

pub const TABLE1_CSV_HEADER: &str = "snr,method,mse_mean,mse_std,n_trials,seed";

impl Table1 {
    pub fn row(&self, snr: Snr, method: Method) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.snr == snr && r.method == method)
    }

    /// Achieved `MSE(L2 Optimal) / MSE(RefPeak)` at one SNR.
    pub fn ratio(&self, snr: Snr) -> Option<f64> {
        let l2 = self.row(snr, Method::L2Optimal)?;
        let rp = self.row(snr, Method::RefPeak)?;
        Some(l2.mse_mean / rp.mse_mean)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{TABLE1_CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:e},{:e},{},{}\n", r.snr, r.method, r.mse_mean, r.mse_std, r.n_trials, r.seed));
        }
        out
    }

    pub fn ratios_csv(&self) -> String {
        let mut out = String::from("snr,l2_over_refpeak\n");
        let mut seen = Vec::new();
        for r in &self.rows {
            if seen.contains(&r.snr) {
                continue;
            }
            seen.push(r.snr);
            if let Some(q) = self.ratio(r.snr) {
                out.push_str(&format!("{},{:e}\n", r.snr, q));
            }
        }
        out
    }
}

/// Monte Carlo MSE of both estimators against the truth, per SNR.
///
/// Trial `k` uses the same noise seed at every SNR and for both methods, so
/// rows differ only in noise level and estimator.
pub fn reproduce_table1(truth: &Truth, snrs: &[Snr], n_trials: usize, master_seed: u64) -> Result<Table1> {
    if snrs.is_empty() {
        return Err(invalid("SNR list is empty"));
    }
    if n_trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let seeds: Vec<u64> = (0..n_trials as u64).map(|k| trial_seed(master_seed, k)).collect();
    let mut rows = Vec::new();
    for &snr in snrs {
        let mut per_method = vec![Vec::with_capacity(n_trials); Method::ALL.len()];
        for &seed in &seeds {
            let estimates = run_trial(truth, snr, seed, &Method::ALL)?;
            for (acc, est) in per_method.iter_mut().zip(&estimates) {
                acc.push(mse(est, &truth.maps, &truth.support, false)?.aggregate);
            }
        }
        for (method, trial_mse) in Method::ALL.into_iter().zip(per_method) {
            let n = trial_mse.len() as f64;
            let mean = trial_mse.iter().sum::<f64>() / n;
            let std = if trial_mse.len() > 1 {
                (trial_mse.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            rows.push(Table1Row { snr, method, mse_mean: mean, mse_std: std, n_trials, seed: master_seed, trial_mse });
        }
    }
    Ok(Table1 { rows, master_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{ComplexImage, Grid};
    use crate::phantom::SpectrumModel;
    use crate::pipeline::Scenario;
    use crate::recon::{rss_combine, CombineMethod};
    use crate::rng::GaussianStream;
    use ndarray::Array2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_set(seed: u64, coils: usize, grid: Grid) -> CoilSensitivitySet {
        let mut g = GaussianStream::new(seed, 0);
        let maps = (0..coils)
            .map(|_| {
                let data = Array2::from_shape_simple_fn(grid.shape(), || {
                    let (a, b) = g.next_pair();
                    c(a, b)
                });
                ComplexImage::new(grid, data).unwrap()
            })
            .collect();
        CoilSensitivitySet::new(maps).unwrap()
    }

    #[test]
    fn mse_of_identical_sets_is_zero() {
        let grid = Grid::new(5, 4, 0.01).unwrap();
        let x = random_set(1, 3, grid);
        let r = mse(&x, &x, &Mask::full(grid), false).unwrap();
        assert_eq!(r.aggregate, 0.0);
        assert!(r.per_coil.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn mse_single_deviation_hand_value() {
        // 40×25 support = 1000 voxels, 8 coils, one entry off by 0.1
        let grid = Grid::new(40, 25, 0.01).unwrap();
        let truth = random_set(2, 8, grid);
        let mut est = truth.clone();
        est.map_voxels(|v, coils| {
            if v == 517 {
                coils[3] += c(0.06, -0.08);
            }
        });
        let r = mse(&est, &truth, &Mask::full(grid), false).unwrap();
        assert!((r.aggregate - 1.25e-6).abs() < 1e-18);
        assert!((r.per_coil[3] - 1e-5).abs() < 1e-17);
    }

    #[test]
    fn mse_phase_alignment() {
        let grid = Grid::new(6, 6, 0.01).unwrap();
        let truth = random_set(3, 4, grid);
        let mut est = truth.clone();
        est.map_voxels(|v, coils| {
            let rot = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3 + 0.1 * v as f64);
            coils.iter_mut().for_each(|x| *x *= rot);
        });
        let support = Mask::full(grid);
        assert!(mse(&est, &truth, &support, true).unwrap().aggregate < 1e-24);
        assert!(mse(&est, &truth, &support, false).unwrap().aggregate > 0.1);
    }

    #[test]
    fn mse_properties() {
        let grid = Grid::new(7, 5, 0.01).unwrap();
        let support = Mask::full(grid);
        for seed in 0..20 {
            let x = random_set(10 + seed, 3, grid);
            let y = random_set(100 + seed, 3, grid);
            let a = mse(&x, &y, &support, false).unwrap().aggregate;
            let b = mse(&y, &x, &support, false).unwrap().aggregate;
            assert!((a - b).abs() <= 1e-15 * a);
            let alpha = c(0.7, -1.9);
            let scaled = mse(&x.clone().scaled(alpha), &y.clone().scaled(alpha), &support, false).unwrap().aggregate;
            assert!((scaled - alpha.norm_sqr() * a).abs() <= 1e-12 * scaled);
            assert!(mse(&x, &y, &support, true).unwrap().aggregate <= a * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mse_errors() {
        let grid = Grid::new(4, 4, 0.01).unwrap();
        let other = Grid::new(4, 5, 0.01).unwrap();
        let x = random_set(1, 2, grid);
        assert!(mse(&x, &random_set(2, 2, other), &Mask::full(grid), false).is_err());
        assert!(mse(&x, &random_set(2, 3, grid), &Mask::full(grid), false).is_err());
        assert!(mse(&x, &x, &Mask::empty(grid), false).is_err());
    }

    fn halves(grid: Grid) -> (Mask, Mask) {
        let mut top = Mask::empty(grid);
        for ((r, _), m) in top.data.indexed_iter_mut() {
            *m = r < grid.height / 2;
        }
        let bottom = top.complement();
        (top, bottom)
    }

    fn combined(samples: Array2<Complex64>, grid: Grid) -> CombinedImage {
        CombinedImage { image: ComplexImage::new(grid, samples).unwrap(), method: CombineMethod::Roemer, maps: None }
    }

    #[test]
    fn noiseless_snr_is_unbounded() {
        let grid = Grid::new(8, 8, 0.01).unwrap();
        let (top, bottom) = halves(grid);
        let data = Array2::from_shape_fn(grid.shape(), |(r, _)| if r < 4 { c(1.0, 0.5) } else { c(0.0, 0.0) });
        let rep = roi_snr(&combined(data, grid), &top, &bottom).unwrap();
        assert!(rep.unbounded && rep.snr.is_infinite());
    }

    #[test]
    fn pure_noise_snr_matches_rayleigh_mean() {
        let grid = Grid::new(200, 200, 0.01).unwrap();
        let (top, bottom) = halves(grid);
        let sigma = 0.7;
        let mut g = GaussianStream::new(9, 1);
        let data = Array2::from_shape_simple_fn(grid.shape(), || {
            let (a, b) = g.next_pair();
            c(a * sigma, b * sigma)
        });
        // oracle: mean |z| / σ for z with i.i.d. N(0, σ²) parts, estimated by direct simulation
        let mut h = GaussianStream::new(77, 5);
        let oracle = (0..200_000).map(|_| {
            let (a, b) = h.next_pair();
            a.hypot(b)
        }).sum::<f64>() / 200_000.0;
        let rep = roi_snr(&combined(data, grid), &top, &bottom).unwrap();
        assert!((rep.snr / oracle - 1.0).abs() < 0.1, "snr {} oracle {oracle}", rep.snr);
        assert!(!rep.unbounded);
    }

    #[test]
    fn roi_snr_is_scale_invariant() {
        let grid = Grid::new(16, 16, 0.01).unwrap();
        let (top, bottom) = halves(grid);
        let x = random_set(4, 1, grid).map(0).samples.clone();
        let a = roi_snr(&combined(x.clone(), grid), &top, &bottom).unwrap().snr;
        let b = roi_snr(&combined(x.mapv(|v| v * 2.0), grid), &top, &bottom).unwrap().snr;
        assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn roi_validation() {
        let grid = Grid::new(8, 8, 0.01).unwrap();
        let (top, _) = halves(grid);
        let im = combined(Array2::zeros(grid.shape()), grid);
        assert!(roi_snr(&im, &top, &top).is_err());
        assert!(roi_snr(&im, &top, &Mask::empty(grid)).is_err());
    }

    #[test]
    fn replica_snr_of_known_noise() {
        let grid = Grid::new(32, 32, 0.01).unwrap();
        let clean = Array2::from_elem(grid.shape(), c(5.0, 0.0));
        let mut g = GaussianStream::new(2, 2);
        let replicas: Vec<CombinedImage> = (0..50)
            .map(|_| {
                let noisy = clean.mapv(|v| {
                    let (a, b) = g.next_pair();
                    v + c(a * 0.05, b * 0.05)
                });
                combined(noisy, grid)
            })
            .collect();
        let rep = replica_snr(&combined(clean, grid), &replicas, &Mask::full(grid)).unwrap();
        // high SNR: magnitude error ≈ the in-phase noise component
        assert!((rep.noise / 0.05 - 1.0).abs() < 0.05, "{rep:?}");
        assert!((rep.signal - 5.0).abs() < 1e-12);
        let rss = rss_combine(&[ComplexImage::new(grid, Array2::zeros(grid.shape())).unwrap()]).unwrap();
        assert!(replica_snr(&rss, &[], &Mask::full(grid)).is_err());
    }

    #[test]
    fn small_table_is_reproducible_and_ordered() {
        let scenario = Scenario { phantom_size: 32, spectrum: SpectrumModel::scaled_default(16), ..Scenario::default() };
        let truth = Truth::build(&scenario).unwrap();
        let snrs = [Snr::Infinite, Snr::Finite(20.0)];
        let a = reproduce_table1(&truth, &snrs, 3, 7).unwrap();
        let b = reproduce_table1(&truth, &snrs, 3, 7).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 4);
        assert!(a.to_csv().starts_with("snr,method,mse_mean,mse_std,n_trials,seed\ninf,refpeak,"));
        for m in Method::ALL {
            assert!(a.row(Snr::Infinite, m).unwrap().mse_mean < 1e-12);
            assert!(a.row(Snr::Finite(20.0), m).unwrap().mse_mean > 1e-6);
        }
        assert!(a.ratio(Snr::Finite(20.0)).unwrap() < 1.0);
        assert!(reproduce_table1(&truth, &[], 3, 7).is_err());
        assert!(reproduce_table1(&truth, &snrs, 0, 7).is_err());
    }
}
