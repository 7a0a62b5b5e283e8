//! Gaussian positioning error and the beam-count search.
//!
//! With an along-rail position error `dx ~ N(0, sigma^2)` the serving beam
//! still covers the base station with probability
//!
//! ```text
//! P_i = 1 - (Q(left / sigma) + Q(right / sigma)) / 2
//! ```
//!
//! Doubling the beam count splits the serving cell in two: one bound is
//! kept and the other moves inward, so `P_i` can only drop. The search walks
//! the doubling sequence `1, 2, 4, ...` and keeps the last beam count whose
//! probability still meets the threshold.

use std::f64::consts::SQRT_2;

use libm::erfc;

use crate::array::{ArrayConfig, RailGeometry};
use crate::error::{invalid, Result};

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn gaussian_tail(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x / SQRT_2)
}

/// Probability that the serving beam covers the base station.
///
/// `sigma = 0` means perfect positioning and yields exactly 1.
pub fn effective_probability(left: f64, right: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    1.0 - 0.5 * (gaussian_tail(left / sigma) + gaussian_tail(right / sigma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositioningModel {
    /// Standard deviation of the along-rail position error, meters.
    pub error_stddev: f64,
    /// Required effective beamforming probability, in (0, 1).
    pub threshold: f64,
    /// Largest beam count the search may return.
    pub max_beam_count: usize,
}

impl PositioningModel {
    pub fn new(error_stddev: f64, threshold: f64, max_beam_count: usize) -> Result<Self> {
        let model = Self {
            error_stddev,
            threshold,
            max_beam_count,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.error_stddev >= 0.0 && self.error_stddev.is_finite()) {
            return Err(invalid("sigma", "must be nonnegative and finite"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(invalid("p_th", format!("{} not in (0, 1)", self.threshold)));
        }
        if self.max_beam_count == 0 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        Ok(())
    }
}

/// Candidate set scanned by [`search_beam_count_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// `1, 2, 4, ...` up to the cap, stopping at the first failure.
    #[default]
    Doubling,
    /// Every integer `1..=cap`; returns the largest feasible one.
    AllIntegers,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub optimal_n: usize,
    pub achieved_probability: f64,
    pub directivity: f64,
    /// `false` when even a single beam misses the threshold.
    pub feasible: bool,
}

/// Effective beamforming probability when `n` beams tile the coverage.
pub fn probability_for(cfg: &ArrayConfig, geo: &RailGeometry, sigma: f64, n: usize) -> Result<f64> {
    let b = cfg.beam_bounds_on_rail(geo, n)?;
    Ok(effective_probability(b.left, b.right, sigma))
}

/// Largest doubling beam count meeting the probability threshold.
pub fn search_beam_count(
    cfg: &ArrayConfig,
    geo: &RailGeometry,
    model: &PositioningModel,
) -> Result<SearchResult> {
    search_beam_count_with(cfg, geo, model, SearchMode::Doubling)
}

pub fn search_beam_count_with(
    cfg: &ArrayConfig,
    geo: &RailGeometry,
    model: &PositioningModel,
    mode: SearchMode,
) -> Result<SearchResult> {
    model.validate()?;
    let cap = model.max_beam_count.min(cfg.element_count);
    let sigma = model.error_stddev;
    let p1 = probability_for(cfg, geo, sigma, 1)?;

    let (n_opt, p_opt) = match mode {
        SearchMode::Doubling => {
            let (mut n, mut p) = (1, p1);
            while 2 * n <= cap {
                let next = probability_for(cfg, geo, sigma, 2 * n)?;
                if next < model.threshold {
                    break;
                }
                n *= 2;
                p = next;
            }
            (n, p)
        }
        SearchMode::AllIntegers => {
            let mut best = (1, p1);
            for n in 2..=cap {
                let p = probability_for(cfg, geo, sigma, n)?;
                if p >= model.threshold {
                    best = (n, p);
                }
            }
            best
        }
    };

    Ok(SearchResult {
        optimal_n: n_opt,
        achieved_probability: p_opt,
        directivity: cfg.directivity(n_opt)?,
        feasible: p1 >= model.threshold,
    })
}
