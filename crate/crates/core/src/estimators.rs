//! Voxelwise coil-sensitivity estimators.
//!
//! For one voxel the observations form an `N × C` matrix: row `n` holds the
//! coil values `v⁽ᶜ⁾ₙ` at generalized index `n` (a spectral bin, a time frame,
//! a metabolite, or a combination).
//!
//! * **RefPeak** takes the row with the largest magnitude, `A_c = v⁽ᶜ⁾_λ*`, and
//!   returns `ρ_c = A_c* / √(Σ|A_c|²)`.
//! * **L2 Optimal** assumes `v⁽ᶜ⁾ₙ = ρ_c · aₙ` with `aₙ = √(Σ_γ |v⁽ᵞ⁾ₙ|²)` and
//!   solves the one-unknown least-squares problem per coil by pseudo-inverse,
//!   `ρ_c = (a · v⁽ᶜ⁾) / ‖a‖²`. The result is the minimum-norm minimizer and is
//!   deliberately not re-normalized.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::acquisition::{DatasetDims, Domain, MultiCoilSpectralDataset};
use crate::coilsim::CoilSensitivitySet;
use crate::error::{invalid, Error, Result};
use crate::image::ComplexImage;
use crate::numeric::Accum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneralizedIndex {
    pub bin: usize,
    pub frame: usize,
    pub metabolite: usize,
}

impl GeneralizedIndex {
    pub fn new(bin: usize, frame: usize, metabolite: usize) -> Self {
        Self { bin, frame, metabolite }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    /// every bin of one frame and metabolite
    Spectral { frame: usize, metabolite: usize },
    /// every (bin, frame) of one metabolite
    SpectralTime { metabolite: usize },
    /// every (frame, metabolite) at one bin
    MetaboliteTime { bin: usize },
    /// every (bin, frame, metabolite)
    All,
    Custom,
}

/// Ordered, duplicate-free list of generalized indices stacked into the estimator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    mode: IndexMode,
    entries: Vec<GeneralizedIndex>,
}

impl IndexSet {
    pub fn spectral(dims: &DatasetDims, frame: usize, metabolite: usize) -> Result<Self> {
        let entries = (0..dims.bins).map(|b| GeneralizedIndex::new(b, frame, metabolite)).collect();
        Self::build(IndexMode::Spectral { frame, metabolite }, entries, dims)
    }

    pub fn spectral_time(dims: &DatasetDims, metabolite: usize) -> Result<Self> {
        let entries = (0..dims.frames)
            .flat_map(|t| (0..dims.bins).map(move |b| GeneralizedIndex::new(b, t, metabolite)))
            .collect();
        Self::build(IndexMode::SpectralTime { metabolite }, entries, dims)
    }

    pub fn metabolite_time(dims: &DatasetDims, bin: usize) -> Result<Self> {
        let entries = (0..dims.frames)
            .flat_map(|t| (0..dims.metabolites).map(move |m| GeneralizedIndex::new(bin, t, m)))
            .collect();
        Self::build(IndexMode::MetaboliteTime { bin }, entries, dims)
    }

    pub fn all(dims: &DatasetDims) -> Result<Self> {
        let mut entries = Vec::with_capacity(dims.bins * dims.frames * dims.metabolites);
        for t in 0..dims.frames {
            for m in 0..dims.metabolites {
                for b in 0..dims.bins {
                    entries.push(GeneralizedIndex::new(b, t, m));
                }
            }
        }
        Self::build(IndexMode::All, entries, dims)
    }

    pub fn custom(dims: &DatasetDims, entries: Vec<GeneralizedIndex>) -> Result<Self> {
        Self::build(IndexMode::Custom, entries, dims)
    }

    fn build(mode: IndexMode, entries: Vec<GeneralizedIndex>, dims: &DatasetDims) -> Result<Self> {
        let set = Self { mode, entries };
        set.validate(dims)?;
        Ok(set)
    }

    /// Check that the set is nonempty, duplicate-free and within `dims`.
    pub fn validate(&self, dims: &DatasetDims) -> Result<()> {
        if self.entries.is_empty() {
            return Err(invalid("index set is empty"));
        }
        for e in &self.entries {
            if e.bin >= dims.bins || e.frame >= dims.frames || e.metabolite >= dims.metabolites {
                return Err(invalid(format!("index {e:?} outside dataset bounds {dims:?}")));
            }
        }
        let mut sorted = self.entries.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("index set contains duplicates"));
        }
        Ok(())
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn entries(&self) -> &[GeneralizedIndex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `N × C` observation matrix of one voxel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelObservations {
    rows: usize,
    coils: usize,
    data: Vec<Complex64>,
}

impl VoxelObservations {
    pub fn new(rows: usize, coils: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || coils == 0 || data.len() != rows * coils {
            return Err(invalid(format!("observation matrix {rows}x{coils} with {} entries", data.len())));
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("observations must be finite"));
        }
        Ok(Self { rows, coils, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let coils = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != coils) {
            return Err(invalid("ragged observation rows"));
        }
        Self::new(rows.len(), coils, rows.concat())
    }

    /// Build from per-coil columns.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(invalid("ragged observation columns"));
        }
        let data = (0..rows).flat_map(|n| columns.iter().map(move |c| c[n])).collect();
        Self::new(rows, columns.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn coils(&self) -> usize {
        self.coils
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.coils..(n + 1) * self.coils]
    }

    pub fn get(&self, n: usize, c: usize) -> Complex64 {
        self.data[n * self.coils + c]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { data: self.data.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    pub fn energy(&self) -> f64 {
        energy(&self.data)
    }
}

fn energy(values: &[Complex64]) -> f64 {
    energy_accum(values).value()
}

fn energy_accum(values: &[Complex64]) -> Accum {
    let mut acc = Accum::default();
    for v in values {
        acc.add_product(v.re, v.re);
        acc.add_product(v.im, v.im);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefPeakBinMode {
    /// one peak row, chosen by root-sum-of-squares across coils, shared by all coils
    #[default]
    SharedPeak,
    /// each coil takes its own largest-magnitude entry
    PerCoilMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegressorMode {
    /// `aₙ = √(Σ_c |vₙ⁽ᶜ⁾|²)`, real and nonnegative
    #[default]
    MagnitudeSquared,
    /// `aₙ = (Σ_c (vₙ⁽ᶜ⁾)²)^{1/2}`, principal branch, complex in general
    LiteralSquare,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub refpeak_bin_mode: RefPeakBinMode,
    pub regressor_mode: RegressorMode,
    /// Voxels whose total energy over the index set falls below this fraction
    /// of the largest voxel energy are treated as vacant.
    pub support_threshold: f64,
}

impl EstimatorConfig {
    /// Threshold used when the support is inferred from the data.
    pub const DATA_DRIVEN_THRESHOLD: f64 = 0.05;

    pub fn with_threshold(mut self, tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return Err(invalid(format!("support threshold must lie in [0, 1), got {tau}")));
        }
        self.support_threshold = tau;
        Ok(self)
    }

    /// No data-driven masking; only all-zero voxels are vacant.
    pub fn unmasked() -> Self {
        Self { support_threshold: 0.0, ..Self::default() }
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            refpeak_bin_mode: RefPeakBinMode::SharedPeak,
            regressor_mode: RegressorMode::MagnitudeSquared,
            support_threshold: Self::DATA_DRIVEN_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    RefPeak,
    L2Optimal,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::RefPeak, Method::L2Optimal];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::RefPeak => "refpeak",
            Method::L2Optimal => "l2optimal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "refpeak" | "ref-peak" => Ok(Method::RefPeak),
            "l2" | "l2optimal" | "l2-optimal" => Ok(Method::L2Optimal),
            other => Err(invalid(format!("unknown method `{other}` (expected refpeak or l2)"))),
        }
    }
}

/// Index of the largest value; the lowest index wins ties.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// RefPeak estimate for one voxel, exactly `ρ_c = A_c* / √(Σ|A_c|²)`.
pub fn ref_peak_voxel(obs: &VoxelObservations, config: &EstimatorConfig) -> Result<Vec<Complex64>> {
    let peaks: Vec<Complex64> = match config.refpeak_bin_mode {
        RefPeakBinMode::SharedPeak => {
            let (row, e) = argmax((0..obs.rows).map(|n| energy(obs.row(n)))).expect("nonempty");
            if e == 0.0 {
                return Err(Error::VacantVoxel);
            }
            obs.row(row).to_vec()
        }
        RefPeakBinMode::PerCoilMax => (0..obs.coils)
            .map(|c| {
                let (row, _) = argmax((0..obs.rows).map(|n| obs.get(n, c).norm_sqr())).expect("nonempty");
                obs.get(row, c)
            })
            .collect(),
    };
    let norm = energy_accum(&peaks).sqrt();
    if norm == 0.0 {
        return Err(Error::VacantVoxel);
    }
    Ok(peaks.iter().map(|a| Complex64::new(a.re / norm, -a.im / norm)).collect())
}

/// Root-sum-of-squares regressor `a`, one entry per row.
pub fn build_rss_regressor(obs: &VoxelObservations, config: &EstimatorConfig) -> Vec<Complex64> {
    (0..obs.rows)
        .map(|n| match config.regressor_mode {
            RegressorMode::MagnitudeSquared => Complex64::new(energy_accum(obs.row(n)).sqrt(), 0.0),
            RegressorMode::LiteralSquare => obs.row(n).iter().map(|v| v * v).sum::<Complex64>().sqrt(),
        })
        .collect()
}

/// Pseudo-inverse solution of `a ρ_c = v⁽ᶜ⁾` for every coil: `ρ_c = (aᴴ v⁽ᶜ⁾) / ‖a‖²`.
pub fn l2_optimal_voxel(obs: &VoxelObservations, config: &EstimatorConfig) -> Result<Vec<Complex64>> {
    let a = build_rss_regressor(obs, config);
    let mut denom = Accum::default();
    for an in &a {
        denom.add_product(an.re, an.re);
        denom.add_product(an.im, an.im);
    }
    let denom = denom.value();
    if denom == 0.0 {
        return Err(Error::VacantVoxel);
    }
    Ok((0..obs.coils)
        .map(|c| {
            let (mut re, mut im) = (Accum::default(), Accum::default());
            for (n, an) in a.iter().enumerate() {
                let v = obs.get(n, c);
                // conj(a) · v
                re.add_product(an.re, v.re);
                re.add_product(an.im, v.im);
                im.add_product(an.re, v.im);
                im.add_product(-an.im, v.re);
            }
            Complex64::new(re.value() / denom, im.value() / denom)
        })
        .collect())
}

/// Estimate sensitivity maps voxel by voxel from an image-domain dataset.
///
/// Maps are returned in the receive-sensitivity convention of the simulated
/// truth (`v⁽ᶜ⁾ ∝ ρ_c`). RefPeak's per-voxel value is a conjugated combination
/// weight, so it is conjugated back when placed in the map. Vacant voxels are 0.
pub fn estimate_maps(
    data: &MultiCoilSpectralDataset,
    method: Method,
    index_set: &IndexSet,
    config: &EstimatorConfig,
) -> Result<CoilSensitivitySet> {
    if data.domain() != Domain::Image {
        return Err(invalid("sensitivity estimation needs image-domain data"));
    }
    if !(0.0..1.0).contains(&config.support_threshold) {
        return Err(invalid(format!("support threshold must lie in [0, 1), got {}", config.support_threshold)));
    }
    let dims = data.dims();
    index_set.validate(&dims)?;
    let (n_rows, n_coils, n_vox) = (index_set.len(), dims.coils, dims.n_voxels());
    let flat = data.samples().as_slice().expect("standard layout");

    // offset of slice (entry n, coil c) in the flat sample buffer
    let offsets: Vec<usize> = index_set
        .entries()
        .iter()
        .flat_map(|e| {
            (0..n_coils).map(move |c| {
                (((c * dims.bins + e.bin) * dims.frames + e.frame) * dims.metabolites + e.metabolite) * n_vox
            })
        })
        .collect();

    let energies: Vec<f64> = (0..n_vox)
        .map(|v| {
            let mut acc = Accum::default();
            for off in &offsets {
                let s = flat[off + v];
                acc.add_product(s.re, s.re);
                acc.add_product(s.im, s.im);
            }
            acc.value()
        })
        .collect();
    let max_energy = energies.iter().copied().fold(0.0, f64::max);
    let floor = config.support_threshold * max_energy;

    let grid = data.grid();
    let mut maps = vec![ComplexImage::zeros(grid); n_coils];
    let mut buf = vec![Complex64::default(); n_rows * n_coils];
    for v in 0..n_vox {
        if energies[v] == 0.0 || energies[v] < floor {
            continue;
        }
        for (b, off) in buf.iter_mut().zip(&offsets) {
            *b = flat[off + v];
        }
        let obs = VoxelObservations { rows: n_rows, coils: n_coils, data: std::mem::take(&mut buf) };
        let rho = match method {
            Method::RefPeak => ref_peak_voxel(&obs, config).map(|r| r.into_iter().map(|x| x.conj()).collect()),
            Method::L2Optimal => l2_optimal_voxel(&obs, config),
        };
        buf = obs.data;
        match rho {
            Ok(rho) => {
                let idx = [v / grid.width, v % grid.width];
                for (m, r) in maps.iter_mut().zip(rho) {
                    m.samples[idx] = r;
                }
            }
            Err(Error::VacantVoxel) => {}
            Err(e) => return Err(e),
        }
    }
    CoilSensitivitySet::new(maps)
}
