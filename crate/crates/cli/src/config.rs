//! Run configuration: a `key = value` file with `#` comments, overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use xsens_core::acquisition::Snr;
use xsens_core::estimators::{EstimatorConfig, Method, RefPeakBinMode, RegressorMode};
use xsens_core::phantom::{BolusCurve, SpectralLine, SpectrumModel};
use xsens_core::pipeline::{CoilRing, Scenario};
use xsens_core::recon::CombineMethod;

use crate::error::{CliError, CliResult, Kind};

type Check = fn(&str) -> Result<(), String>;

struct KeySpec {
    name: &'static str,
    default: &'static str,
    help: &'static str,
    check: Check,
}

fn positive_int(v: &str) -> Result<(), String> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(()),
        _ => Err("expected a positive integer".into()),
    }
}

fn index(v: &str) -> Result<(), String> {
    v.parse::<usize>().map(|_| ()).map_err(|_| "expected a nonnegative integer".into())
}

fn optional_index(v: &str) -> Result<(), String> {
    if v == "auto" { Ok(()) } else { index(v) }
}

fn positive_real(v: &str) -> Result<(), String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(()),
        _ => Err("expected a positive number".into()),
    }
}

fn real(v: &str) -> Result<(), String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(()),
        _ => Err("expected a finite number".into()),
    }
}

fn unit_interval(v: &str) -> Result<(), String> {
    match v.parse::<f64>() {
        Ok(x) if (0.0..1.0).contains(&x) => Ok(()),
        _ => Err("expected a number in [0, 1)".into()),
    }
}

fn seed(v: &str) -> Result<(), String> {
    v.parse::<u64>().map(|_| ()).map_err(|_| "expected an unsigned 64-bit integer".into())
}

fn boolean(v: &str) -> Result<(), String> {
    parse_bool(v).map(|_| ())
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn snr(v: &str) -> Result<(), String> {
    v.parse::<Snr>().map(|_| ()).map_err(|e| e.to_string())
}

fn snr_list(v: &str) -> Result<(), String> {
    parse_list(v, |s| s.parse::<Snr>().map_err(|e| e.to_string())).map(|_| ())
}

fn method(v: &str) -> Result<(), String> {
    v.parse::<Method>().map(|_| ()).map_err(|e| e.to_string())
}

fn combination(v: &str) -> Result<(), String> {
    v.parse::<CombineMethod>().map(|_| ()).map_err(|e| e.to_string())
}

fn one_of(options: &'static [&'static str]) -> impl Fn(&str) -> Result<(), String> {
    move |v| if options.contains(&v) { Ok(()) } else { Err(format!("expected one of {}", options.join(", "))) }
}

const INDEX_SETS: &[&str] = &["spectral", "spectral-time", "metabolite-time", "all"];
const REGRESSORS: &[&str] = &["magnitude", "literal"];
const PEAK_MODES: &[&str] = &["shared", "per-coil"];
const DOMAINS: &[&str] = &["image", "kspace"];

fn index_set(v: &str) -> Result<(), String> {
    one_of(INDEX_SETS)(v)
}
fn regressor(v: &str) -> Result<(), String> {
    one_of(REGRESSORS)(v)
}
fn peak_mode(v: &str) -> Result<(), String> {
    one_of(PEAK_MODES)(v)
}
fn domain(v: &str) -> Result<(), String> {
    one_of(DOMAINS)(v)
}

fn lines(v: &str) -> Result<(), String> {
    if v == "default" { Ok(()) } else { parse_lines(v).map(|_| ()) }
}

fn any(_: &str) -> Result<(), String> {
    Ok(())
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err("expected a comma-separated list".into());
    }
    items.into_iter().map(f).collect()
}

/// `center:amplitude:fwhm[:phase]` entries separated by `;`.
fn parse_lines(v: &str) -> Result<Vec<SpectralLine>, String> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let f: Vec<f64> = entry
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number in line `{entry}`")))
                .collect::<Result<_, _>>()?;
            match f.as_slice() {
                [c, a, w] => Ok(SpectralLine::new(*c, *a, *w, 0.0)),
                [c, a, w, p] => Ok(SpectralLine::new(*c, *a, *w, *p)),
                _ => Err(format!("line `{entry}` needs center:amplitude:fwhm[:phase]")),
            }
        })
        .collect()
}

const KEYS: &[KeySpec] = &[
    KeySpec { name: "phantom_size", default: "128", help: "phantom width and height, pixels", check: positive_int },
    KeySpec { name: "fov", default: "0.24", help: "field of view, meters", check: positive_real },
    KeySpec { name: "spectrum_bins", default: "64", help: "number of spectral bins", check: positive_int },
    KeySpec {
        name: "spectrum_lines",
        default: "default",
        help: "`default`, or center:amplitude:fwhm[:phase] entries separated by `;`",
        check: lines,
    },
    KeySpec { name: "n_coils", default: "8", help: "coils on the ring", check: positive_int },
    KeySpec { name: "opposite_distance", default: "0.5", help: "distance between opposite coils, meters", check: positive_real },
    KeySpec { name: "coil_width", default: "0.12", help: "coil width, meters", check: positive_real },
    KeySpec { name: "coil_height", default: "0.12", help: "coil height, meters", check: positive_real },
    KeySpec { name: "plane_offset", default: "0", help: "z of the coil centers, meters (imaging plane at z = 0)", check: real },
    KeySpec { name: "coupling_rank", default: "5", help: "rank of the coupled sensitivity matrix", check: positive_int },
    KeySpec { name: "snr", default: "inf", help: "SNR for `simulate` (`inf` for noiseless)", check: snr },
    KeySpec { name: "snr_list", default: "inf,50,20,10", help: "SNR rows for `reproduce-table1`", check: snr_list },
    KeySpec { name: "n_trials", default: "20", help: "Monte Carlo trials per SNR", check: positive_int },
    KeySpec { name: "seed", default: "1", help: "master seed", check: seed },
    KeySpec { name: "frames", default: "1", help: "time frames for `simulate` (bolus applied when > 1)", check: positive_int },
    KeySpec { name: "frame_spacing", default: "2", help: "seconds between frames", check: positive_real },
    KeySpec { name: "bolus_arrival", default: "0", help: "bolus arrival time, seconds", check: real },
    KeySpec { name: "bolus_shape", default: "1", help: "gamma-variate shape", check: positive_real },
    KeySpec { name: "bolus_rate", default: "30", help: "gamma-variate rate, seconds", check: positive_real },
    KeySpec { name: "domain", default: "image", help: "domain of the simulated dataset: image or kspace", check: domain },
    KeySpec { name: "method", default: "l2", help: "estimator: refpeak or l2", check: method },
    KeySpec {
        name: "index_set",
        default: "spectral",
        help: "spectral, spectral-time, metabolite-time or all",
        check: index_set,
    },
    KeySpec { name: "frame", default: "0", help: "frame for the spectral index set and for `combine`", check: index },
    KeySpec { name: "metabolite", default: "0", help: "metabolite for spectral index sets and `combine`", check: index },
    KeySpec {
        name: "bin",
        default: "auto",
        help: "bin for metabolite-time and `combine`; `auto` picks the highest-energy bin",
        check: optional_index,
    },
    KeySpec { name: "threshold", default: "0.05", help: "vacant-voxel energy fraction in [0, 1)", check: unit_interval },
    KeySpec { name: "regressor", default: "magnitude", help: "L2 regressor: magnitude or literal", check: regressor },
    KeySpec { name: "refpeak_bin", default: "shared", help: "RefPeak peak row: shared or per-coil", check: peak_mode },
    KeySpec { name: "combination", default: "roemer", help: "coil combination: roemer or rss", check: combination },
    KeySpec { name: "phase_align", default: "false", help: "align per-voxel phase before MSE", check: boolean },
    KeySpec { name: "difference_scale", default: "0.25", help: "full-white value of difference maps", check: positive_real },
    KeySpec { name: "output_dir", default: ".", help: "output directory", check: any },
];

/// Effective configuration; every value has passed its key's validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect() }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let spec = KEYS
            .iter()
            .find(|k| k.name == key)
            .ok_or_else(|| CliError::config(format!("unknown config key `{key}`")))?;
        let value = value.trim();
        (spec.check)(value).map_err(|e| CliError::config(format!("invalid value `{value}` for `{key}`: {e}")))?;
        self.values.insert(spec.name, value.to_string());
        Ok(())
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value).map_err(|e| CliError::config(format!("line {}: {}", n + 1, e.message)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(Kind::Config, format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical `key = value` echo of every key.
    pub fn echo(&self) -> String {
        KEYS.iter().map(|k| format!("{} = {}\n", k.name, self.values[k.name])).collect()
    }

    pub fn raw(&self, key: &str) -> &str {
        &self.values[key]
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> T {
        self.values[key].parse().ok().expect("validated on set")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.get(key)
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.get(key)
    }

    pub fn seed(&self) -> u64 {
        self.get("seed")
    }

    pub fn flag(&self, key: &str) -> bool {
        parse_bool(&self.values[key]).expect("validated on set")
    }

    pub fn snr(&self) -> Snr {
        self.get("snr")
    }

    pub fn snr_list(&self) -> Vec<Snr> {
        parse_list(&self.values["snr_list"], |s| s.parse::<Snr>().map_err(|e| e.to_string())).expect("validated on set")
    }

    pub fn method(&self) -> Method {
        self.get("method")
    }

    pub fn combination(&self) -> CombineMethod {
        self.get("combination")
    }

    pub fn bin(&self) -> Option<usize> {
        self.values["bin"].parse().ok()
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(&self.values["output_dir"])
    }

    pub fn estimator(&self) -> CliResult<EstimatorConfig> {
        let cfg = EstimatorConfig {
            refpeak_bin_mode: if self.raw("refpeak_bin") == "per-coil" { RefPeakBinMode::PerCoilMax } else { RefPeakBinMode::SharedPeak },
            regressor_mode: if self.raw("regressor") == "literal" { RegressorMode::LiteralSquare } else { RegressorMode::MagnitudeSquared },
            ..EstimatorConfig::default()
        };
        Ok(cfg.with_threshold(self.f64("threshold"))?)
    }

    pub fn spectrum(&self) -> CliResult<SpectrumModel> {
        let bins = self.usize("spectrum_bins");
        match self.raw("spectrum_lines") {
            "default" => Ok(SpectrumModel::scaled_default(bins)),
            text => {
                let lines = parse_lines(text).map_err(CliError::config)?;
                SpectrumModel::new(bins, lines).map_err(|e| CliError::config(format!("spectrum_lines: {e}")))
            }
        }
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let scenario = Scenario {
            phantom_size: self.usize("phantom_size"),
            fov: self.f64("fov"),
            spectrum: self.spectrum()?,
            ring: CoilRing {
                n_coils: self.usize("n_coils"),
                opposite_distance: self.f64("opposite_distance"),
                coil_width: self.f64("coil_width"),
                coil_height: self.f64("coil_height"),
                plane_offset: self.f64("plane_offset"),
            },
            coupling_rank: self.usize("coupling_rank"),
        };
        scenario.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(scenario)
    }

    pub fn bolus(&self) -> CliResult<BolusCurve> {
        let frames = self.usize("frames");
        if frames == 1 {
            return Ok(BolusCurve::single_frame());
        }
        BolusCurve::new(
            frames,
            self.f64("frame_spacing"),
            self.f64("bolus_arrival"),
            self.f64("bolus_shape"),
            self.f64("bolus_rate"),
            1.0,
        )
        .map_err(|e| CliError::config(e.to_string()))
    }
}

/// Key reference appended to `--help`.
pub fn keys_help() -> String {
    let mut out = String::from("Config file keys (key = value, `#` starts a comment; flags override keys):\n");
    for k in KEYS {
        out.push_str(&format!("  {:<18} {} [default: {}]\n", k.name, k.help, k.default));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_the_reference_scenario() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.scenario().unwrap(), Scenario::default());
        assert_eq!(cfg.snr_list(), vec![Snr::Infinite, Snr::Finite(50.0), Snr::Finite(20.0), Snr::Finite(10.0)]);
        assert_eq!(cfg.method(), Method::L2Optimal);
        assert_eq!(cfg.bin(), None);
        assert_eq!(cfg.estimator().unwrap(), EstimatorConfig::default());
    }

    #[test]
    fn parses_comments_and_whitespace() {
        let cfg = RunConfig::parse("# header\n phantom_size = 32  # small\n\nsnr=20\nspectrum_lines = 4:4:2; 10:1:2:0.5\n").unwrap();
        assert_eq!(cfg.usize("phantom_size"), 32);
        assert_eq!(cfg.snr(), Snr::Finite(20.0));
        let s = cfg.spectrum().unwrap();
        assert_eq!(s.lines().len(), 2);
        assert_eq!(s.lines()[1].phase, 0.5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in ["colour = red", "phantom_size = -3", "snr = 0", "method = svd", "threshold = 1", "no equals sign"] {
            let e = RunConfig::parse(text).unwrap_err();
            assert_eq!(e.kind, Kind::Config, "{text}");
        }
        assert!(RunConfig::parse("colour = red").unwrap_err().message.contains("unknown config key `colour`"));
    }

    #[test]
    fn echo_lists_every_key_once() {
        let echo = RunConfig::default().echo();
        assert_eq!(echo.lines().count(), KEYS.len());
        let again = RunConfig::parse(&echo).unwrap();
        assert_eq!(again, RunConfig::default());
        for k in KEYS {
            assert!(keys_help().contains(k.name));
        }
    }

    #[test]
    fn scenario_validation_is_a_config_error() {
        let mut cfg = RunConfig::default();
        cfg.set("coupling_rank", "9").unwrap();
        assert_eq!(cfg.scenario().unwrap_err().kind, Kind::Config);
    }
}
