//! Subcommand implementations. Each writes its outputs plus a `run.meta` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use xsens_core::acquisition::{inverse_recon, Domain, MultiCoilSpectralDataset};
use xsens_core::coilsim::CoilSensitivitySet;
use xsens_core::estimators::{estimate_maps, IndexSet};
use xsens_core::io::{
    export_difference_map, export_maps, load_dataset, magnitude_graymap, maps_from_dataset, maps_to_dataset,
    real_image_to_dataset, write_dataset, write_pgm16,
};
use xsens_core::metrics::{mse, reproduce_table1, run_trial};
use xsens_core::pipeline::Truth;
use xsens_core::recon::{roemer_combine, rss_combine, CombineMethod};
use xsens_core::rng::trial_seed;
use xsens_core::Mask;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Kind};

/// Output directory plus the files written into it.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn create(cfg: &RunConfig) -> CliResult<Self> {
        let dir = cfg.output_dir();
        fs::create_dir_all(&dir).map_err(|e| CliError::writing(&dir, e))?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::writing(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_maps(&mut self, prefix: &str, maps: &CoilSensitivitySet) -> CliResult<()> {
        let export = export_maps(maps)?;
        self.write(&format!("{prefix}.xns"), &export.container)?;
        self.write(&format!("{prefix}_scaling.csv"), export.scaling_csv.as_bytes())?;
        for (c, pgm) in export.graymaps.iter().enumerate() {
            self.write(&format!("{prefix}_coil{c:02}.pgm"), pgm)?;
        }
        Ok(())
    }

    /// Sidecar whose body is a valid config file reproducing the run.
    fn finish(mut self, command: &str, cfg: &RunConfig, inputs: &[&Path]) -> CliResult<Vec<String>> {
        let mut meta = format!("# tool = xsens\n# version = {}\n# command = {command}\n# seed = {}\n", env!("CARGO_PKG_VERSION"), cfg.seed());
        for input in inputs {
            meta.push_str(&format!("# input = {}\n", input.display()));
        }
        for out in &self.written {
            meta.push_str(&format!("# output = {out}\n"));
        }
        meta.push_str(&cfg.echo());
        self.write("run.meta", meta.as_bytes())?;
        Ok(self.written)
    }
}

fn read_dataset_file(path: &Path) -> CliResult<MultiCoilSpectralDataset> {
    load_dataset(path).map_err(|e| CliError::reading(path, e))
}

fn image_domain(data: MultiCoilSpectralDataset) -> CliResult<MultiCoilSpectralDataset> {
    Ok(match data.domain() {
        Domain::Image => data,
        Domain::KSpace => inverse_recon(data)?,
    })
}

fn read_maps_file(path: &Path) -> CliResult<CoilSensitivitySet> {
    maps_from_dataset(&read_dataset_file(path)?).map_err(|e| CliError::reading(path, e))
}

/// Bin carrying the most energy across coils, frames and metabolites; lowest index on ties.
fn highest_energy_bin(data: &MultiCoilSpectralDataset) -> usize {
    let d = data.dims();
    let energy = |bin: usize| -> f64 {
        let mut e = 0.0;
        for c in 0..d.coils {
            for t in 0..d.frames {
                for m in 0..d.metabolites {
                    e += data.slice(c, bin, t, m).iter().map(|v| v.norm_sqr()).sum::<f64>();
                }
            }
        }
        e
    };
    (0..d.bins).fold((0, f64::NEG_INFINITY), |(bi, be), b| {
        let e = energy(b);
        if e > be { (b, e) } else { (bi, be) }
    })
    .0
}

pub fn phantom(cfg: &RunConfig) -> CliResult<Vec<String>> {
    let truth = Truth::build(&cfg.scenario()?)?;
    let mut out = Outputs::create(cfg)?;
    out.write("phantom.xns", &write_dataset(&real_image_to_dataset(&truth.phantom)?)?)?;
    let max = truth.phantom.samples.iter().copied().fold(0.0, f64::max);
    out.write("phantom.pgm", &write_pgm16(&truth.phantom.samples.mapv(|v| v / max)))?;
    out.write("support.pgm", &write_pgm16(&truth.support.data.mapv(|b| if b { 1.0 } else { 0.0 })))?;
    let mut csv = String::from("bin,re,im\n");
    for (k, x) in truth.spectrum.iter().enumerate() {
        csv.push_str(&format!("{k},{:e},{:e}\n", x.re, x.im));
    }
    out.write("spectrum.csv", csv.as_bytes())?;
    out.write_maps("truth_maps", &truth.maps)?;
    out.finish("phantom", cfg, &[])
}

pub fn simulate(cfg: &RunConfig) -> CliResult<Vec<String>> {
    let truth = Truth::build(&cfg.scenario()?)?;
    let data = if cfg.usize("frames") == 1 {
        truth.simulate(cfg.snr(), cfg.seed())?
    } else {
        truth.simulate_dynamic(&cfg.bolus()?, cfg.snr(), cfg.seed())?
    };
    let data = if cfg.raw("domain") == "kspace" { data.to_kspace()? } else { data };
    let mut out = Outputs::create(cfg)?;
    out.write("dataset.xns", &write_dataset(&data)?)?;
    out.write_maps("truth_maps", &truth.maps)?;
    out.finish("simulate", cfg, &[])
}

fn index_set(cfg: &RunConfig, data: &MultiCoilSpectralDataset) -> CliResult<IndexSet> {
    let dims = data.dims();
    let set = match cfg.raw("index_set") {
        "spectral" => IndexSet::spectral(&dims, cfg.usize("frame"), cfg.usize("metabolite")),
        "spectral-time" => IndexSet::spectral_time(&dims, cfg.usize("metabolite")),
        "metabolite-time" => IndexSet::metabolite_time(&dims, cfg.bin().unwrap_or_else(|| highest_energy_bin(data))),
        _ => IndexSet::all(&dims),
    };
    Ok(set?)
}

pub fn estimate(cfg: &RunConfig, dataset: &Path) -> CliResult<Vec<String>> {
    let data = image_domain(read_dataset_file(dataset)?)?;
    let set = index_set(cfg, &data)?;
    let maps = estimate_maps(&data, cfg.method(), &set, &cfg.estimator()?)?;
    let mut out = Outputs::create(cfg)?;
    out.write_maps("maps", &maps)?;
    out.finish("estimate", cfg, &[dataset])
}

pub fn combine(cfg: &RunConfig, dataset: &Path, maps: Option<&Path>) -> CliResult<Vec<String>> {
    let data = image_domain(read_dataset_file(dataset)?)?;
    let bin = cfg.bin().unwrap_or_else(|| highest_energy_bin(&data));
    let images = data.coil_images(bin, cfg.usize("frame"), cfg.usize("metabolite"))?;
    let (combined, inputs) = match (cfg.combination(), maps) {
        (CombineMethod::Rss, _) => (rss_combine(&images)?, vec![dataset]),
        (CombineMethod::Roemer, Some(path)) => (roemer_combine(&images, &read_maps_file(path)?)?, vec![dataset, path]),
        (CombineMethod::Roemer, None) => {
            return Err(CliError::new(Kind::InvalidArgument, "roemer combination needs --maps"));
        }
    };
    let as_set = CoilSensitivitySet::new(vec![combined.image.clone()])?;
    let mut out = Outputs::create(cfg)?;
    out.write("combined.xns", &write_dataset(&maps_to_dataset(&as_set)?)?)?;
    out.write("combined.pgm", &magnitude_graymap(&combined.image.samples).0)?;
    out.finish("combine", cfg, &inputs)
}

/// Voxels where the reference maps are nonzero in any coil.
fn nonzero_support(maps: &CoilSensitivitySet) -> Mask {
    let mut support = Mask::empty(*maps.grid());
    for m in maps.maps() {
        support.data.zip_mut_with(&m.samples, |s, v| *s |= *v != Complex64::default());
    }
    support
}

pub fn evaluate(cfg: &RunConfig, estimate: &Path, truth: &Path) -> CliResult<(Vec<String>, f64)> {
    let est = read_maps_file(estimate)?;
    let reference = read_maps_file(truth)?;
    let support = nonzero_support(&reference);
    let report = mse(&est, &reference, &support, cfg.flag("phase_align"))?;
    let mut csv = String::from("coil,mse\n");
    for (c, m) in report.per_coil.iter().enumerate() {
        csv.push_str(&format!("{c},{m:e}\n"));
    }
    csv.push_str(&format!("all,{:e}\n", report.aggregate));
    let mut out = Outputs::create(cfg)?;
    out.write("evaluation.csv", csv.as_bytes())?;
    Ok((out.finish("evaluate", cfg, &[estimate, truth])?, report.aggregate))
}

pub fn reproduce_table1_cmd(cfg: &RunConfig) -> CliResult<(Vec<String>, String)> {
    let truth = Truth::build(&cfg.scenario()?)?;
    let snrs = cfg.snr_list();
    let table = reproduce_table1(&truth, &snrs, cfg.usize("n_trials"), cfg.seed())?;
    let mut out = Outputs::create(cfg)?;
    let csv = table.to_csv();
    out.write("table1.csv", csv.as_bytes())?;
    out.write("table1_ratios.csv", table.ratios_csv().as_bytes())?;
    // difference maps of the first trial, as in a per-SNR figure panel
    let methods = xsens_core::Method::ALL;
    for snr in &snrs {
        let estimates = run_trial(&truth, *snr, trial_seed(cfg.seed(), 0), &methods)?;
        for (method, est) in methods.iter().zip(&estimates) {
            for (c, pgm) in export_difference_map(est, &truth.maps, cfg.f64("difference_scale"))?.iter().enumerate() {
                out.write(&format!("diff_{method}_snr{snr}_coil{c:02}.pgm"), pgm)?;
            }
        }
    }
    Ok((out.finish("reproduce-table1", cfg, &[])?, csv))
}
