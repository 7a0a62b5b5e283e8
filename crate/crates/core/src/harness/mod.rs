//! Experiment sweeps, CSV emission and run manifests.
//!
//! Every experiment is a pure function of an [`ExperimentConfig`] returning
//! in-memory [`CsvTable`]s; [`write_outputs`] puts them on disk next to a
//! JSON manifest. Sweep points may be evaluated in parallel but rows always
//! follow sweep order.

mod config;

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentKind};

use crate::array::{directivity_from_beamwidth, ArrayType};
use crate::codebook::{pass_angle, PhaseMapper};
use crate::error::Error;
use crate::positioning::{search_beam_count, PositioningModel, SearchResult};
use crate::table::{fmt_bool, fmt_num, row};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error at line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One CSV file held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub file_name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl CsvTable {
    fn new(file_name: impl Into<String>, header: &str) -> Self {
        Self {
            file_name: file_name.into(),
            header: header.to_owned(),
            rows: Vec::new(),
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn contents(&self) -> String {
        let mut s = format!("{}\n", self.header);
        for r in &self.rows {
            s.push_str(r);
        }
        s
    }

    /// Fields of each data row.
    pub fn records(&self) -> impl Iterator<Item = Vec<&str>> {
        self.rows.iter().map(|r| r.trim_end().split(',').collect())
    }
}

fn map_points<T, R, F>(items: &[T], parallel: bool, f: F) -> Result<Vec<R>, HarnessError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, HarnessError> + Sync + Send,
{
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Directivity against beamwidth for both array types, plus the
/// configured array at each beam count.
pub fn tradeoff(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let mut sweep = CsvTable::new(
        "tradeoff.csv",
        "array_type,theta_h_rad,directivity,d_times_theta",
    );
    for theta in linspace(
        cfg.tradeoff_theta_min_rad,
        cfg.tradeoff_theta_max_rad,
        cfg.tradeoff_points,
    ) {
        for (name, t) in [
            ("broadside", ArrayType::Broadside),
            ("end-fire", ArrayType::EndFire),
        ] {
            let d = directivity_from_beamwidth(theta, t, cfg.design_constant);
            sweep.rows.push(row([
                name.to_owned(),
                fmt_num(theta),
                fmt_num(d),
                fmt_num(d * theta),
            ]));
        }
    }
    let array = cfg.array()?;
    let mut beams = CsvTable::new(
        "tradeoff_beams.csv",
        "n_beams,spacing_m,theta_h_rad,directivity",
    );
    for &n in &cfg.tradeoff_beam_counts {
        beams.rows.push(row([
            n.to_string(),
            fmt_num(array.spacing),
            fmt_num(array.beamwidth(n)?),
            fmt_num(array.directivity(n)?),
        ]));
    }
    Ok(vec![sweep, beams])
}

/// `theta_b` values swept by the d-vs-theta experiment.
pub fn theta_sweep(cfg: &ExperimentConfig) -> Result<Vec<f64>, HarnessError> {
    if let Some(grid) = &cfg.theta_grid_rad {
        return Ok(grid.clone());
    }
    let (lo, hi) = cfg.array()?.coverage_interval();
    let n = cfg.theta_points;
    Ok((0..n)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64)
        .collect())
}

fn search_at(
    cfg: &ExperimentConfig,
    theta: f64,
    sigma: f64,
    p_th: f64,
) -> Result<SearchResult, HarnessError> {
    let array = cfg.array()?;
    let geo = cfg.rail()?.at_angle(theta);
    let model = PositioningModel::new(sigma, p_th, cfg.n_max)?;
    Ok(search_beam_count(&array, &geo, &model)?)
}

/// Optimal beam count across `theta_b`, with the spacing that would keep
/// the configured directivity at that beam count.
pub fn d_vs_theta(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let thetas = theta_sweep(cfg)?;
    let points: Vec<(f64, f64)> = cfg
        .p_th_grid
        .iter()
        .flat_map(|&p| thetas.iter().map(move |&t| (p, t)))
        .collect();
    let n_ref = cfg.beam_count as f64;
    let rows = map_points(&points, cfg.parallel, |&(p_th, theta)| {
        let r = search_at(cfg, theta, cfg.sigma_m, p_th)?;
        let n_prime = r.optimal_n as f64;
        let d_prime = cfg.spacing_m * n_ref / n_prime;
        Ok(row([
            fmt_num(p_th),
            fmt_num(theta),
            r.optimal_n.to_string(),
            fmt_num(r.achieved_probability),
            fmt_num(r.directivity),
            fmt_num(d_prime),
            fmt_num(cfg.spacing_m / d_prime),
            fmt_num(n_prime / n_ref),
            fmt_bool(!r.feasible).to_owned(),
        ]))
    })?;
    let mut t = CsvTable::new(
        "d_vs_theta.csv",
        "p_th,theta_b_rad,optimal_n,achieved_probability,directivity,d_prime_m,d_over_d_prime,n_prime_over_n,infeasible",
    );
    t.rows = rows;
    Ok(vec![t])
}

/// Optimal directivity against the positioning error at fixed `theta_b`.
pub fn directivity_vs_sigma(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let points: Vec<(f64, f64)> = cfg
        .p_th_grid
        .iter()
        .flat_map(|&p| cfg.sigma_grid_m.iter().map(move |&s| (p, s)))
        .collect();
    let theta = cfg.theta_b_rad;
    let rows = map_points(&points, cfg.parallel, |&(p_th, sigma)| {
        let r = search_at(cfg, theta, sigma, p_th)?;
        Ok(row([
            fmt_num(p_th),
            fmt_num(sigma),
            fmt_num(theta),
            r.optimal_n.to_string(),
            fmt_num(r.achieved_probability),
            fmt_num(r.directivity),
            fmt_bool(!r.feasible).to_owned(),
        ]))
    })?;
    let mut t = CsvTable::new(
        "directivity_vs_sigma.csv",
        "p_th,sigma_m,theta_b_rad,optimal_n,achieved_probability,directivity,infeasible",
    );
    t.rows = rows;
    Ok(vec![t])
}

pub fn region_file_name(eta: f64) -> String {
    format!("rate_region_eta{}.csv", fmt_num(eta))
}

/// One boundary file per `eta`, plus the time-sharing baseline.
pub fn rate_region(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let base = cfg.scenario();
    let mut tables = Vec::new();
    for &eta in &cfg.eta_grid {
        let region = base
            .with_offset(eta)
            .rate_region_with(cfg.region_points, cfg.parallel)?;
        tables.push(region_table(region_file_name(eta), &region));
    }
    let tfds = base.tfds_baseline(cfg.region_points)?;
    tables.push(region_table("tfds.csv".to_owned(), &tfds));
    Ok(tables)
}

fn region_table(name: String, region: &crate::RateRegion) -> CsvTable {
    let mut t = CsvTable::new(name, "R2_bps_hz,R1_bps_hz");
    t.rows = region
        .pairs
        .iter()
        .map(|&(r1, r2)| row([fmt_num(r2), fmt_num(r1)]))
        .collect();
    t
}

/// Largest common rate across `eta` for each transmit power.
pub fn symmetric(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let etas = linspace(0.0, 2.0, cfg.symmetric_eta_points);
    let points: Vec<(f64, f64)> = cfg
        .p0_dbm_grid
        .iter()
        .flat_map(|&p| etas.iter().map(move |&e| (p, e)))
        .collect();
    let base = cfg.scenario();
    let rows = map_points(&points, cfg.parallel, |&(p0_dbm, eta)| {
        let r0 = base
            .with_offset(eta)
            .with_power_dbm(p0_dbm)
            .symmetric_rate()?;
        Ok(row([fmt_num(eta), fmt_num(r0), fmt_num(p0_dbm)]))
    })?;
    let mut t = CsvTable::new("symmetric.csv", "eta,R0_bps_hz,p0_dbm");
    t.rows = rows;
    Ok(vec![t])
}

/// The configured codebook as `beam_id,element_id,phase_rad`.
pub fn export_codebook(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let mapper = PhaseMapper::build(&cfg.array()?, cfg.beam_count)?;
    let mut buf = Vec::new();
    mapper.write_csv(&mut buf).expect("writing to memory");
    let text = String::from_utf8(buf).expect("ASCII output");
    let mut lines = text.lines();
    let mut t = CsvTable::new("codebook.csv", lines.next().unwrap_or_default());
    t.rows = lines.map(|l| format!("{l}\n")).collect();
    Ok(vec![t])
}

/// Beam selection along one pass through the coverage interval, driven by
/// a position estimate with seeded Gaussian error of `sigma_m`.
///
/// `beam_id` is 0 while the estimate has not yet entered coverage;
/// `on_target` tells whether the selected beam contains the true angle.
pub fn traverse(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    let array = cfg.array()?;
    let mapper = PhaseMapper::build(&array, cfg.beam_count)?;
    let (lo, hi) = array.coverage_interval();
    let d0 = cfg.d0_m;
    let x_start = d0 / lo.tan();
    let x_end = d0 / hi.tan();
    let duration = (x_start - x_end) / cfg.v0_mps;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise =
        Normal::new(0.0, cfg.sigma_m).map_err(|e| crate::error::invalid("sigma", e.to_string()))?;

    let mut t = CsvTable::new(
        "traverse.csv",
        "t_s,x_m,theta_b_rad,theta_est_rad,beam_id,switch,on_target",
    );
    let mut prev: Option<usize> = None;
    let n = cfg.traverse_samples;
    for k in 0..n {
        let time = duration * k as f64 / (n - 1) as f64;
        let x = x_start - cfg.v0_mps * time;
        let theta = pass_angle(d0, cfg.v0_mps, x_start, time);
        let x_est = x + noise.sample(&mut rng);
        let theta_est = d0.atan2(x_est);
        let chosen = match mapper.select_beam(theta_est) {
            Ok(sel) if !sel.exited => sel.beam_id,
            Ok(_) | Err(Error::NotYetEntered { .. }) => 0,
            Err(e) => return Err(e.into()),
        };
        let truth = match mapper.select_beam(theta) {
            Ok(sel) if !sel.exited => Some(sel.beam_id),
            _ => None,
        };
        let switched = prev.is_some_and(|p| p != chosen);
        prev = Some(chosen);
        t.rows.push(row([
            fmt_num(time),
            fmt_num(x),
            fmt_num(theta),
            fmt_num(theta_est),
            chosen.to_string(),
            fmt_bool(switched).to_owned(),
            fmt_bool(chosen != 0 && truth == Some(chosen)).to_owned(),
        ]));
    }
    Ok(vec![t])
}

/// Runs the experiment named in the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CsvTable>, HarnessError> {
    run_kind(cfg, cfg.experiment)
}

pub fn run_kind(
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
) -> Result<Vec<CsvTable>, HarnessError> {
    match kind {
        ExperimentKind::Tradeoff => tradeoff(cfg),
        ExperimentKind::DVsTheta => d_vs_theta(cfg),
        ExperimentKind::DirectivityVsSigma => directivity_vs_sigma(cfg),
        ExperimentKind::RateRegion => rate_region(cfg),
        ExperimentKind::Symmetric => symmetric(cfg),
        ExperimentKind::All => {
            let mut all = Vec::new();
            for k in [
                ExperimentKind::Tradeoff,
                ExperimentKind::DVsTheta,
                ExperimentKind::DirectivityVsSigma,
                ExperimentKind::RateRegion,
                ExperimentKind::Symmetric,
            ] {
                all.extend(run_kind(cfg, k)?);
            }
            Ok(all)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileSummary {
    pub file: String,
    pub rows: usize,
}

/// Metadata written next to the CSVs of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix_s: u64,
    pub run: String,
    pub config: ExperimentConfig,
    pub coverage_interval_rad: (f64, f64),
    pub reference_theta_b_rad: f64,
    pub reference_theta_b_in_coverage: bool,
    pub files: Vec<FileSummary>,
}

impl RunManifest {
    pub fn new(
        run: &str,
        cfg: &ExperimentConfig,
        tables: &[CsvTable],
    ) -> Result<Self, HarnessError> {
        let (lo, hi) = cfg.array()?.coverage_interval();
        let timestamp_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix_s,
            run: run.to_owned(),
            config: cfg.clone(),
            coverage_interval_rad: (lo, hi),
            reference_theta_b_rad: FRAC_PI_4,
            reference_theta_b_in_coverage: FRAC_PI_4 > lo && FRAC_PI_4 < hi,
            files: tables
                .iter()
                .map(|t| FileSummary {
                    file: t.file_name.clone(),
                    rows: t.row_count(),
                })
                .collect(),
        })
    }
}

/// Writes each table and `manifest_<run>.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    run: &str,
    cfg: &ExperimentConfig,
    tables: &[CsvTable],
) -> Result<RunManifest, HarnessError> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| HarnessError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for t in tables {
        let path = dir.join(&t.file_name);
        std::fs::write(&path, t.contents()).map_err(io(&path))?;
    }
    let manifest = RunManifest::new(run, cfg, tables)?;
    let path = dir.join(format!("manifest_{run}.json"));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(manifest)
}
