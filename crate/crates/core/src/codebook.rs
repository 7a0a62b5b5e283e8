//! Offline beam codebook and location-driven beam selection.
//!
//! Every beam `i` is steered to the midpoint `theta_i` of its angular cell by
//! the progressive phase excitation
//!
//! ```text
//! beta_i^m = -(m - 1) k d cos(theta_i),   k = 2 pi / lambda
//! ```
//!
//! The phases are computed once into an `M x N` table. At run time the beam
//! is picked from the train angle alone, so no channel estimate enters any
//! signature here.
//!
//! The steering vector is written elsewhere as
//! `[1, e^{j(kd cos(theta) + beta_i^2)}, ..., e^{j(M-1)(kd cos(theta) + beta_i^M)}]`.
//! Here `beta_i^m` is the cumulative phase on element `m`, which makes the
//! entry `exp(j((m - 1) k d cos(theta) + beta_i^m))`; reading `beta` as the
//! per-element increment `-k d cos(theta_i)` inside the `(M - 1)` multiplier
//! gives the same vector.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::array::ArrayConfig;
use crate::error::{invalid, Error, Result};
use crate::table::{fmt_bool, fmt_num, row};

/// The `M x N` phase-excitation table.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMapper {
    cfg: ArrayConfig,
    beam_count: usize,
    // columns[i - 1][m - 1] = beta_i^m
    columns: Vec<Vec<f64>>,
    beam_centers: Vec<f64>,
}

impl PhaseMapper {
    /// Builds the codebook for `n` beams tiling the coverage of `cfg`.
    pub fn build(cfg: &ArrayConfig, n: usize) -> Result<Self> {
        cfg.check_beam_count(n)?;
        let k = wavenumber(cfg);
        let mut columns = Vec::with_capacity(n);
        let mut beam_centers = Vec::with_capacity(n);
        for i in 1..=n {
            let (lower, upper) = cfg.beam_cell_unchecked(i, n);
            let center = 0.5 * (lower + upper);
            let step = -k * cfg.spacing * center.cos();
            columns.push((0..cfg.element_count).map(|m| m as f64 * step).collect());
            beam_centers.push(center);
        }
        Ok(Self {
            cfg: *cfg,
            beam_count: n,
            columns,
            beam_centers,
        })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn element_count(&self) -> usize {
        self.cfg.element_count
    }

    pub fn beam_count(&self) -> usize {
        self.beam_count
    }

    pub fn beam_centers(&self) -> &[f64] {
        &self.beam_centers
    }

    /// Phase `beta_i^m` (both indices 1-based).
    pub fn phase(&self, element: usize, beam: usize) -> f64 {
        self.columns[beam - 1][element - 1]
    }

    /// Column `beta_i` of the table.
    pub fn column(&self, beam: usize) -> Result<&[f64]> {
        self.check_beam(beam)?;
        Ok(&self.columns[beam - 1])
    }

    fn check_beam(&self, beam: usize) -> Result<()> {
        if beam == 0 || beam > self.beam_count {
            return Err(invalid(
                "beam",
                format!("{beam} outside [1, {}]", self.beam_count),
            ));
        }
        Ok(())
    }

    /// Per-element phasors seen from angle `theta` with beam `beam` applied.
    pub fn steering_vector(&self, theta: f64, beam: usize) -> Result<SteeringVector> {
        self.check_beam(beam)?;
        let k = wavenumber(&self.cfg);
        let progressive = k * self.cfg.spacing * theta.cos();
        let entries = self.columns[beam - 1]
            .iter()
            .enumerate()
            .map(|(m, &beta)| Complex64::cis(m as f64 * progressive + beta))
            .collect();
        Ok(SteeringVector {
            entries,
            wavenumber: k,
        })
    }

    /// Normalized power pattern of beam `beam` at `theta`; 1 at the beam center.
    pub fn array_factor(&self, theta: f64, beam: usize, weight: &BeamWeight) -> Result<f64> {
        let sv = self.steering_vector(theta, beam)?;
        if weight.amplitudes.len() != sv.entries.len() {
            return Err(invalid(
                "amplitudes",
                format!(
                    "{} amplitudes for {} elements",
                    weight.amplitudes.len(),
                    sv.entries.len()
                ),
            ));
        }
        let total = weight.amplitude_sum();
        if total <= 0.0 {
            return Err(invalid("amplitudes", "sum must be positive"));
        }
        let field: Complex64 = sv
            .entries
            .iter()
            .zip(&weight.amplitudes)
            .map(|(e, &a)| e * a)
            .sum();
        Ok(field.norm_sqr() / (total * total))
    }

    /// Picks the beam whose cell contains `theta`.
    ///
    /// Cells are half-open `[lower, upper)`, so a shared boundary belongs to
    /// the higher-indexed beam. Past the end of coverage the table resets to
    /// beam 1, ready for the next base station.
    pub fn select_beam(&self, theta: f64) -> Result<BeamSelection<'_>> {
        let (lo, hi) = self.cfg.coverage_interval();
        if theta < lo {
            return Err(Error::NotYetEntered { theta, lo });
        }
        if theta >= hi {
            return Ok(BeamSelection {
                beam_id: 1,
                phases: &self.columns[0],
                exited: true,
            });
        }
        let n = self.beam_count;
        let width = self.cfg.beamwidth_unchecked(n);
        let u = (theta - std::f64::consts::FRAC_PI_2) / width + 0.5 * n as f64;
        let beam_id = ((u.floor() + 1.0).max(1.0) as usize).min(n);
        Ok(BeamSelection {
            beam_id,
            phases: &self.columns[beam_id - 1],
            exited: false,
        })
    }

    /// Runs beam selection along a sampled trajectory of `(time, theta)`.
    pub fn simulate_traverse(&self, trajectory: &[(f64, f64)]) -> Result<TraverseLog> {
        let mut entries: Vec<TraverseEntry> = Vec::with_capacity(trajectory.len());
        for (index, &(time, theta)) in trajectory.iter().enumerate() {
            if let Some(prev) = entries.last() {
                if time.is_nan() || time <= prev.time {
                    return Err(Error::NonMonotoneTime { index });
                }
            }
            let beam_id = self.select_beam(theta)?.beam_id;
            let switched = entries.last().is_some_and(|p| p.beam_id != beam_id);
            entries.push(TraverseEntry {
                time,
                angle: theta,
                beam_id,
                switched,
            });
        }
        Ok(TraverseLog { entries })
    }

    /// Writes the table as `beam_id,element_id,phase_rad`, beam-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"beam_id,element_id,phase_rad\n")?;
        for (i, col) in self.columns.iter().enumerate() {
            for (m, &beta) in col.iter().enumerate() {
                let line = row([(i + 1).to_string(), (m + 1).to_string(), fmt_num(beta)]);
                out.write_all(line.as_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a table written by [`write_csv`](Self::write_csv). Rows may come
    /// in any order but every `(beam, element)` pair must appear once.
    pub fn read_csv<R: BufRead>(cfg: &ArrayConfig, input: R) -> Result<Self> {
        let csv_err = |line: usize, reason: String| Error::CodebookCsv { line, reason };
        let mut cells: Vec<(usize, usize, f64, usize)> = Vec::new();
        let mut saw_header = false;
        for (k, line) in input.lines().enumerate() {
            let lineno = k + 1;
            let line = line.map_err(|e| csv_err(lineno, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != "beam_id,element_id,phase_rad" {
                    return Err(csv_err(lineno, format!("unexpected header `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(csv_err(
                    lineno,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            }
            let beam: usize = fields[0]
                .parse()
                .map_err(|_| csv_err(lineno, "bad beam_id".into()))?;
            let element: usize = fields[1]
                .parse()
                .map_err(|_| csv_err(lineno, "bad element_id".into()))?;
            let phase: f64 = fields[2]
                .parse()
                .map_err(|_| csv_err(lineno, "bad phase_rad".into()))?;
            if beam == 0 || element == 0 || element > cfg.element_count {
                return Err(csv_err(
                    lineno,
                    format!("index ({beam}, {element}) out of range"),
                ));
            }
            cells.push((beam, element, phase, lineno));
        }
        if !saw_header {
            return Err(csv_err(1, "missing header".into()));
        }
        let n = cells.iter().map(|c| c.0).max().unwrap_or(0);
        cfg.check_beam_count(n)?;
        let m = cfg.element_count;
        let mut columns = vec![vec![f64::NAN; m]; n];
        for &(beam, element, phase, lineno) in &cells {
            let slot = &mut columns[beam - 1][element - 1];
            if !slot.is_nan() {
                return Err(csv_err(
                    lineno,
                    format!("duplicate entry ({beam}, {element})"),
                ));
            }
            *slot = phase;
        }
        if cells.len() != n * m {
            return Err(csv_err(
                0,
                format!("expected {} rows, found {}", n * m, cells.len()),
            ));
        }
        let beam_centers = (1..=n)
            .map(|i| {
                let (l, u) = cfg.beam_cell_unchecked(i, n);
                0.5 * (l + u)
            })
            .collect();
        Ok(Self {
            cfg: *cfg,
            beam_count: n,
            columns,
            beam_centers,
        })
    }
}

fn wavenumber(cfg: &ArrayConfig) -> f64 {
    2.0 * PI / cfg.wavelength
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub wavenumber: f64,
}

impl SteeringVector {
    /// Magnitude of the coherent element sum.
    pub fn coherent_gain(&self) -> f64 {
        self.entries.iter().sum::<Complex64>().norm()
    }
}

/// Amplitude excitations of a beam together with its directivity.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeight {
    /// Per-element amplitude excitation `f_i(m)`.
    pub amplitudes: Vec<f64>,
    pub directivity: f64,
}

impl BeamWeight {
    /// Equal excitation on every element.
    pub fn uniform(element_count: usize, amplitude: f64, directivity: f64) -> Self {
        Self {
            amplitudes: vec![amplitude; element_count],
            directivity,
        }
    }

    /// Power allocation coefficient `f_i = sum_m f_i(m)`.
    pub fn amplitude_sum(&self) -> f64 {
        self.amplitudes.iter().sum()
    }

    /// Beam weight `w_i = f_i D_i`.
    pub fn weight(&self) -> f64 {
        self.amplitude_sum() * self.directivity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSelection<'a> {
    pub beam_id: usize,
    pub phases: &'a [f64],
    /// Set once the train has left the coverage; the returned column is
    /// beam 1.
    pub exited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraverseEntry {
    pub time: f64,
    pub angle: f64,
    pub beam_id: usize,
    pub switched: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraverseLog {
    pub entries: Vec<TraverseEntry>,
}

impl TraverseLog {
    pub fn switch_count(&self) -> usize {
        self.entries.iter().filter(|e| e.switched).count()
    }

    pub fn switch_times(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.switched)
            .map(|e| e.time)
            .collect()
    }

    /// Writes `t_s,theta_b_rad,beam_id,switch`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"t_s,theta_b_rad,beam_id,switch\n")?;
        for e in &self.entries {
            let line = row([
                fmt_num(e.time),
                fmt_num(e.angle),
                e.beam_id.to_string(),
                fmt_bool(e.switched).to_owned(),
            ]);
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Angle of the base station seen from a train moving at `speed` along the
/// rail. `x_start` is the along-rail distance from the train to the
/// base-station foot at `t = 0` (positive while approaching).
pub fn pass_angle(perpendicular_distance: f64, speed: f64, x_start: f64, t: f64) -> f64 {
    perpendicular_distance.atan2(x_start - speed * t)
}

/// Uniformly sampled trajectory `(t, theta_b)` over `[0, duration]`.
pub fn pass_trajectory(
    perpendicular_distance: f64,
    speed: f64,
    x_start: f64,
    duration: f64,
    samples: usize,
) -> Vec<(f64, f64)> {
    let step = if samples > 1 {
        duration / (samples - 1) as f64
    } else {
        0.0
    };
    (0..samples)
        .map(|k| {
            let t = k as f64 * step;
            (t, pass_angle(perpendicular_distance, speed, x_start, t))
        })
        .collect()
}
