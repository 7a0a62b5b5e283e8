//! `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Physical quantities carry
//! their unit in the key name (`theta_b_deg` or `theta_b_rad`, `p0_dbm` or
//! `p0_w`); giving both spellings of one quantity is an error. Lists are
//! comma separated.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::HarnessError;
use crate::array::{ArrayConfig, ArrayType, RailGeometry};
use crate::encounter::{EncounterScenario, DEFAULT_NOISE_DBM, DEFAULT_POWER_DBM};
use crate::positioning::PositioningModel;
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Tradeoff,
    DVsTheta,
    DirectivityVsSigma,
    RateRegion,
    Symmetric,
    All,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::DVsTheta => "d-vs-theta",
            ExperimentKind::DirectivityVsSigma => "directivity-vs-sigma",
            ExperimentKind::RateRegion => "rate-region",
            ExperimentKind::Symmetric => "symmetric",
            ExperimentKind::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ExperimentKind::Tradeoff,
            ExperimentKind::DVsTheta,
            ExperimentKind::DirectivityVsSigma,
            ExperimentKind::RateRegion,
            ExperimentKind::Symmetric,
            ExperimentKind::All,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// Fully resolved configuration, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub parallel: bool,

    pub carrier_hz: f64,
    pub element_count: usize,
    pub beam_count: usize,
    /// Element spacing in meters.
    pub spacing_m: f64,
    pub design_constant: f64,
    pub array_type: ArrayType,
    pub bs_coverage_rad: Option<f64>,

    pub d0_m: f64,
    pub h0_m: f64,
    pub theta_b_rad: f64,

    pub sigma_m: f64,
    pub p_th: f64,
    pub n_max: usize,

    pub l_m: f64,
    pub v0_mps: f64,
    pub alpha0: f64,
    pub p0_w: f64,
    pub noise_w: f64,
    pub eta: f64,
    pub beam_weight_1: f64,
    pub beam_weight_2: f64,

    pub tradeoff_theta_min_rad: f64,
    pub tradeoff_theta_max_rad: f64,
    pub tradeoff_points: usize,
    pub tradeoff_beam_counts: Vec<usize>,
    pub p_th_grid: Vec<f64>,
    pub theta_points: usize,
    /// Explicit `theta_b` sweep; `None` spreads `theta_points` over the
    /// coverage interval.
    pub theta_grid_rad: Option<Vec<f64>>,
    pub sigma_grid_m: Vec<f64>,
    pub eta_grid: Vec<f64>,
    pub region_points: usize,
    pub symmetric_eta_points: usize,
    pub p0_dbm_grid: Vec<f64>,
    pub traverse_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let carrier_hz = 2.4e9;
        let wavelength = units::wavelength_from_carrier(carrier_hz);
        let element_count = 128;
        Self {
            experiment: ExperimentKind::All,
            output_dir: PathBuf::from("out"),
            seed: 42,
            parallel: false,
            carrier_hz,
            element_count,
            beam_count: 128,
            spacing_m: 0.5 * wavelength,
            design_constant: crate::array::DEFAULT_DESIGN_CONSTANT,
            array_type: ArrayType::Broadside,
            bs_coverage_rad: None,
            d0_m: 50.0,
            h0_m: 20.0,
            theta_b_rad: FRAC_PI_4,
            sigma_m: 1.0,
            p_th: 0.9,
            n_max: element_count,
            l_m: 800.0,
            v0_mps: units::kmh_to_mps(360.0),
            alpha0: 3.0,
            p0_w: units::dbm_to_watt(DEFAULT_POWER_DBM),
            noise_w: units::dbm_to_watt(DEFAULT_NOISE_DBM),
            eta: 0.0,
            beam_weight_1: 128.0,
            beam_weight_2: 128.0,
            tradeoff_theta_min_rad: 0.01,
            tradeoff_theta_max_rad: std::f64::consts::PI,
            tradeoff_points: 200,
            tradeoff_beam_counts: powers_of_two(element_count),
            p_th_grid: vec![0.7, 0.8, 0.9],
            theta_points: 41,
            theta_grid_rad: None,
            sigma_grid_m: (1..=20).map(|k| 0.5 * k as f64).collect(),
            eta_grid: vec![0.0, 0.8, 1.6, 2.0],
            region_points: 51,
            symmetric_eta_points: 21,
            p0_dbm_grid: vec![37.0, 43.0, 47.0],
            traverse_samples: 2001,
        }
    }
}

fn powers_of_two(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= max)
        .collect()
}

impl ExperimentConfig {
    pub fn wavelength(&self) -> f64 {
        units::wavelength_from_carrier(self.carrier_hz)
    }

    pub fn array(&self) -> crate::Result<ArrayConfig> {
        let cfg = ArrayConfig::new(self.element_count, self.spacing_m, self.wavelength())?
            .with_array_type(self.array_type)
            .with_design_constant(self.design_constant)?;
        match self.bs_coverage_rad {
            Some(delta) => cfg.with_bs_coverage_angle(delta),
            None => Ok(cfg),
        }
    }

    pub fn rail(&self) -> crate::Result<RailGeometry> {
        RailGeometry::new(self.d0_m, self.h0_m, self.theta_b_rad)
    }

    pub fn positioning(&self) -> crate::Result<PositioningModel> {
        PositioningModel::new(self.sigma_m, self.p_th, self.n_max)
    }

    pub fn scenario(&self) -> EncounterScenario {
        EncounterScenario {
            half_coverage: self.l_m,
            speed: self.v0_mps,
            perpendicular_distance: self.d0_m,
            antenna_height: self.h0_m,
            path_loss_exponent: self.alpha0,
            avg_power: self.p0_w,
            noise_power: self.noise_w,
            offset: self.eta,
            beam_weight_1: self.beam_weight_1,
            beam_weight_2: self.beam_weight_2,
        }
    }

    /// Cross-field checks; `lines` maps keys to the line that set them.
    fn validate(&self, lines: &HashMap<String, usize>) -> Result<(), HarnessError> {
        let line_of = |keys: &[&str]| {
            keys.iter()
                .filter_map(|k| lines.get(*k))
                .copied()
                .max()
                .unwrap_or(0)
        };
        let err = |keys: &[&str], reason: String| HarnessError::Config {
            line: line_of(keys),
            reason,
        };
        let array = self.array().map_err(|e| {
            err(
                &[
                    "element_count",
                    "spacing_m",
                    "spacing_wavelengths",
                    "design_constant",
                    "bs_coverage_deg",
                    "bs_coverage_rad",
                ],
                e.to_string(),
            )
        })?;
        array
            .check_beam_count(self.beam_count)
            .map_err(|e| err(&["beam_count", "element_count"], e.to_string()))?;
        self.rail().map_err(|e| {
            err(
                &["d0_m", "h0_m", "theta_b_deg", "theta_b_rad"],
                e.to_string(),
            )
        })?;
        self.positioning()
            .map_err(|e| err(&["sigma_m", "p_th", "n_max"], e.to_string()))?;
        self.scenario()
            .validate()
            .map_err(|e| err(&["eta", "alpha0"], e.to_string()))?;
        let (lo, hi) = array.coverage_interval();
        if let Some(grid) = &self.theta_grid_rad {
            if let Some(t) = grid.iter().find(|t| !(**t > lo && **t < hi)) {
                return Err(err(
                    &["theta_grid_deg", "theta_grid_rad"],
                    format!("theta_b {t} rad outside coverage ({lo}, {hi})"),
                ));
            }
        }
        if self.tradeoff_points < 2 || self.region_points < 2 || self.symmetric_eta_points < 2 {
            return Err(err(
                &["tradeoff_points", "region_points", "symmetric_eta_points"],
                "point counts must be at least 2".into(),
            ));
        }
        if !(self.tradeoff_theta_min_rad > 0.0
            && self.tradeoff_theta_min_rad < self.tradeoff_theta_max_rad)
        {
            return Err(err(
                &["tradeoff_theta_min_rad", "tradeoff_theta_max_rad"],
                "need 0 < tradeoff_theta_min_rad < tradeoff_theta_max_rad".into(),
            ));
        }
        if let Some(n) = self
            .tradeoff_beam_counts
            .iter()
            .find(|&&n| n == 0 || n > self.element_count)
        {
            return Err(err(
                &["tradeoff_beam_counts"],
                format!("beam count {n} outside [1, {}]", self.element_count),
            ));
        }
        if let Some(p) = self.p_th_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(err(&["p_th_grid"], format!("{p} not in (0, 1)")));
        }
        if let Some(s) = self
            .sigma_grid_m
            .iter()
            .find(|s| !(**s >= 0.0 && s.is_finite()))
        {
            return Err(err(&["sigma_grid_m"], format!("{s} must be nonnegative")));
        }
        if let Some(e) = self.eta_grid.iter().find(|e| !(0.0..=2.0).contains(*e)) {
            return Err(err(&["eta_grid"], format!("{e} not in [0, 2]")));
        }
        if self.traverse_samples < 2 {
            return Err(err(&["traverse_samples"], "must be at least 2".into()));
        }
        Ok(())
    }
}

/// Reads and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

// Quantities that may be given in either of two units.
const ALIASES: &[(&str, &str)] = &[
    ("carrier_hz", "carrier_ghz"),
    ("spacing_m", "spacing_wavelengths"),
    ("bs_coverage_rad", "bs_coverage_deg"),
    ("theta_b_rad", "theta_b_deg"),
    ("v0_mps", "v0_kmh"),
    ("p0_w", "p0_dbm"),
    ("noise_w", "noise_dbm"),
    ("theta_grid_rad", "theta_grid_deg"),
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::default();
    let mut lines: HashMap<String, usize> = HashMap::new();
    let mut spacing_wavelengths = 0.5;
    let mut spacing_m: Option<f64> = None;
    let mut weights: [Option<f64>; 2] = [None, None];
    let mut n_max: Option<usize> = None;
    let mut beam_counts: Option<Vec<usize>> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |reason: String| HarnessError::Config { line, reason };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(prev) = lines.get(key) {
            return Err(err(format!("`{key}` already set on line {prev}")));
        }
        for &(a, b) in ALIASES {
            let other = if key == a {
                b
            } else if key == b {
                a
            } else {
                continue;
            };
            if let Some(prev) = lines.get(other) {
                return Err(err(format!(
                    "`{key}` conflicts with `{other}` on line {prev}"
                )));
            }
        }

        let num = || -> Result<f64, HarnessError> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("`{key}`: cannot parse `{value}` as a number")))
        };
        let positive = || -> Result<f64, HarnessError> {
            let v = num()?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(err(format!("`{key}` = {v} must be positive")))
            }
        };
        let count = || -> Result<usize, HarnessError> {
            value.parse::<usize>().map_err(|_| {
                err(format!(
                    "`{key}`: cannot parse `{value}` as a nonnegative integer"
                ))
            })
        };
        let list = || -> Result<Vec<f64>, HarnessError> {
            value
                .split(',')
                .map(|v| {
                    let v = v.trim();
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(format!("`{key}`: cannot parse list entry `{v}`")))
                })
                .collect()
        };
        let in_range = |v: f64, lo: f64, hi: f64| -> Result<f64, HarnessError> {
            if (lo..=hi).contains(&v) {
                Ok(v)
            } else {
                Err(err(format!("`{key}` = {v} not in [{lo}, {hi}]")))
            }
        };

        match key {
            "experiment" => {
                cfg.experiment = ExperimentKind::parse(value)
                    .ok_or_else(|| err(format!("unknown experiment `{value}`")))?
            }
            "output" => cfg.output_dir = PathBuf::from(value),
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| err(format!("`seed`: cannot parse `{value}`")))?
            }
            "parallel" => {
                cfg.parallel = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => {
                        return Err(err(format!(
                            "`parallel`: expected true or false, found `{value}`"
                        )))
                    }
                }
            }
            "carrier_hz" => cfg.carrier_hz = positive()?,
            "carrier_ghz" => cfg.carrier_hz = positive()? * 1e9,
            "element_count" => cfg.element_count = count()?,
            "beam_count" => cfg.beam_count = count()?,
            "spacing_m" => spacing_m = Some(positive()?),
            "spacing_wavelengths" => spacing_wavelengths = positive()?,
            "design_constant" => cfg.design_constant = positive()?,
            "array_type" => {
                cfg.array_type = match value {
                    "broadside" => ArrayType::Broadside,
                    "end-fire" | "endfire" => ArrayType::EndFire,
                    _ => {
                        return Err(err(format!(
                            "`array_type`: expected broadside or end-fire, found `{value}`"
                        )))
                    }
                }
            }
            "bs_coverage_rad" => cfg.bs_coverage_rad = Some(num()?),
            "bs_coverage_deg" => cfg.bs_coverage_rad = Some(num()?.to_radians()),
            "d0_m" => cfg.d0_m = positive()?,
            "h0_m" => cfg.h0_m = in_range(num()?, 0.0, f64::MAX)?,
            "theta_b_rad" => cfg.theta_b_rad = in_range(num()?, 0.0, std::f64::consts::PI)?,
            "theta_b_deg" => cfg.theta_b_rad = in_range(num()?, 0.0, 180.0)?.to_radians(),
            "sigma_m" => cfg.sigma_m = in_range(num()?, 0.0, f64::MAX)?,
            "p_th" => {
                let v = num()?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(err(format!("`p_th` = {v} not in (0, 1)")));
                }
                cfg.p_th = v;
            }
            "n_max" => n_max = Some(count()?),
            "l_m" => cfg.l_m = positive()?,
            "v0_mps" => cfg.v0_mps = positive()?,
            "v0_kmh" => cfg.v0_mps = units::kmh_to_mps(positive()?),
            "alpha0" => cfg.alpha0 = in_range(num()?, 2.0, 5.0)?,
            "p0_w" => cfg.p0_w = positive()?,
            "p0_dbm" => cfg.p0_w = units::dbm_to_watt(num()?),
            "noise_w" => cfg.noise_w = positive()?,
            "noise_dbm" => cfg.noise_w = units::dbm_to_watt(num()?),
            "eta" => cfg.eta = in_range(num()?, 0.0, 2.0)?,
            "beam_weight_1" => weights[0] = Some(positive()?),
            "beam_weight_2" => weights[1] = Some(positive()?),
            "tradeoff_theta_min_rad" => cfg.tradeoff_theta_min_rad = positive()?,
            "tradeoff_theta_max_rad" => cfg.tradeoff_theta_max_rad = positive()?,
            "tradeoff_points" => cfg.tradeoff_points = count()?,
            "tradeoff_beam_counts" => {
                let values = list()?;
                let counts = values
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(err(format!(
                                "`tradeoff_beam_counts`: {v} is not a positive integer"
                            )))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                beam_counts = Some(counts);
            }
            "p_th_grid" => cfg.p_th_grid = list()?,
            "theta_points" => cfg.theta_points = count()?,
            "theta_grid_rad" => cfg.theta_grid_rad = Some(list()?),
            "theta_grid_deg" => {
                cfg.theta_grid_rad = Some(list()?.into_iter().map(f64::to_radians).collect())
            }
            "sigma_grid_m" => cfg.sigma_grid_m = list()?,
            "eta_grid" => cfg.eta_grid = list()?,
            "region_points" => cfg.region_points = count()?,
            "symmetric_eta_points" => cfg.symmetric_eta_points = count()?,
            "p0_dbm_grid" => cfg.p0_dbm_grid = list()?,
            "traverse_samples" => cfg.traverse_samples = count()?,
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
        lines.insert(key.to_owned(), line);
    }

    cfg.spacing_m = spacing_m.unwrap_or(spacing_wavelengths * cfg.wavelength());
    cfg.n_max = n_max.unwrap_or(cfg.element_count);
    cfg.tradeoff_beam_counts = beam_counts.unwrap_or_else(|| powers_of_two(cfg.element_count));
    // Beam gains default to the directivity of the configured beam count.
    if weights.iter().any(Option::is_none) {
        let directivity = cfg
            .array()
            .and_then(|a| a.directivity(cfg.beam_count))
            .unwrap_or(f64::NAN);
        cfg.beam_weight_1 = weights[0].unwrap_or(directivity);
        cfg.beam_weight_2 = weights[1].unwrap_or(directivity);
    } else {
        cfg.beam_weight_1 = weights[0].unwrap_or_default();
        cfg.beam_weight_2 = weights[1].unwrap_or_default();
    }
    cfg.validate(&lines)?;
    Ok(cfg)
}
