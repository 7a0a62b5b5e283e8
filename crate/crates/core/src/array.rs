//! Closed-form beam geometry of the train-mounted uniform linear array.
//!
//! The array axis is aligned with the rail. A base station at perpendicular
//! distance `d0` from the rail is seen from the train at angle `theta_b`,
//! measured from the rail direction, so the boresight of the array points at
//! the base station when `theta_b = pi/2`. The `N` beams tile the coverage
//! interval `[pi/2 - alpha/2, pi/2 + alpha/2]` in cells of equal width.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Error, Result};
use crate::units;

/// Default aperture design constant of the half-power beamwidth formula.
pub const DEFAULT_DESIGN_CONSTANT: f64 = 2.782;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayType {
    #[default]
    Broadside,
    EndFire,
}

impl ArrayType {
    /// Directivity factor `T`: 2 for broadside, 4 for ordinary end-fire.
    pub fn factor(self) -> f64 {
        match self {
            ArrayType::Broadside => 2.0,
            ArrayType::EndFire => 4.0,
        }
    }

    pub fn from_factor(t: f64) -> Result<Self> {
        if t == 2.0 {
            Ok(ArrayType::Broadside)
        } else if t == 4.0 {
            Ok(ArrayType::EndFire)
        } else {
            Err(invalid("array_type_factor", format!("{t} is not 2 or 4")))
        }
    }
}

/// Antenna array and carrier parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    /// Number of physical elements `M`.
    pub element_count: usize,
    /// Element spacing in meters.
    pub spacing: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    pub design_constant: f64,
    pub array_type: ArrayType,
    /// Coverage angle of the base station, when known. The total beam
    /// coverage must exceed it.
    pub bs_coverage_angle: Option<f64>,
}

impl ArrayConfig {
    pub fn new(element_count: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        let cfg = Self {
            element_count,
            spacing,
            wavelength,
            design_constant: DEFAULT_DESIGN_CONSTANT,
            array_type: ArrayType::Broadside,
            bs_coverage_angle: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Array with spacing given in wavelengths and the wavelength derived
    /// from the carrier frequency.
    pub fn from_carrier(
        element_count: usize,
        carrier_hz: f64,
        spacing_wavelengths: f64,
    ) -> Result<Self> {
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(invalid("carrier_hz", "must be positive"));
        }
        let wavelength = units::wavelength_from_carrier(carrier_hz);
        Self::new(element_count, spacing_wavelengths * wavelength, wavelength)
    }

    pub fn with_array_type(mut self, array_type: ArrayType) -> Self {
        self.array_type = array_type;
        self
    }

    pub fn with_design_constant(mut self, c: f64) -> Result<Self> {
        self.design_constant = c;
        self.validate()?;
        Ok(self)
    }

    pub fn with_bs_coverage_angle(mut self, delta: f64) -> Result<Self> {
        self.bs_coverage_angle = Some(delta);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.element_count == 0 {
            return Err(invalid("element_count", "must be at least 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(invalid(
                "spacing",
                format!("{} must be positive", self.spacing),
            ));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(invalid(
                "wavelength",
                format!("{} must be positive", self.wavelength),
            ));
        }
        if !(self.design_constant > 0.0 && self.design_constant.is_finite()) {
            return Err(invalid("design_constant", "must be positive"));
        }
        if let Some(delta) = self.bs_coverage_angle {
            let alpha = self.total_coverage();
            if delta.is_nan() || delta < 0.0 || alpha <= delta {
                return Err(invalid(
                    "bs_coverage_angle",
                    format!(
                        "beam coverage {alpha} rad must exceed base-station coverage {delta} rad"
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Total angular coverage `alpha = C lambda / (pi d)` of all beams.
    pub fn total_coverage(&self) -> f64 {
        self.design_constant * self.wavelength / (PI * self.spacing)
    }

    /// `(pi/2 - alpha/2, pi/2 + alpha/2)`.
    pub fn coverage_interval(&self) -> (f64, f64) {
        let half = 0.5 * self.total_coverage();
        (FRAC_PI_2 - half, FRAC_PI_2 + half)
    }

    pub fn check_beam_count(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.element_count {
            return Err(Error::BeamCount {
                n,
                max: self.element_count,
            });
        }
        Ok(())
    }

    /// Half-power beamwidth `C lambda / (pi d N)` of each of `n` beams.
    pub fn beamwidth(&self, n: usize) -> Result<f64> {
        self.check_beam_count(n)?;
        Ok(self.beamwidth_unchecked(n))
    }

    // The aperture product `d * N` is formed first so that trading spacing
    // for beam count leaves the result bit-identical whenever the product is.
    pub(crate) fn beamwidth_unchecked(&self, n: usize) -> f64 {
        let aperture = self.spacing * n as f64;
        self.design_constant * self.wavelength / (PI * aperture)
    }

    /// Directivity `T d N / lambda` of each of `n` beams.
    pub fn directivity(&self, n: usize) -> Result<f64> {
        self.check_beam_count(n)?;
        let aperture = self.spacing * n as f64;
        Ok(self.array_type.factor() * aperture / self.wavelength)
    }

    fn check_in_coverage(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.coverage_interval();
        if !(theta >= lo && theta <= hi) {
            return Err(Error::OutOfCoverage { theta, lo, hi });
        }
        Ok(())
    }

    /// 1-based index of the beam whose cell `(lower, upper]` contains `theta`.
    ///
    /// Cells are closed on the high-angle side, so an angle on a shared
    /// boundary (boresight included) belongs to the lower-indexed beam. The
    /// left coverage edge is clamped into beam 1.
    pub fn beam_index(&self, theta: f64, n: usize) -> Result<usize> {
        self.check_beam_count(n)?;
        self.check_in_coverage(theta)?;
        Ok(self.beam_index_unchecked(theta, n))
    }

    pub(crate) fn beam_index_unchecked(&self, theta: f64, n: usize) -> usize {
        let width = self.beamwidth_unchecked(n);
        let u = (theta - FRAC_PI_2) / width + 0.5 * n as f64;
        (u.ceil().max(1.0) as usize).min(n)
    }

    /// Angular cell `(lower, upper)` of 1-based beam `i` out of `n`.
    pub fn beam_cell(&self, i: usize, n: usize) -> Result<(f64, f64)> {
        self.check_beam_count(n)?;
        if i == 0 || i > n {
            return Err(invalid("beam", format!("{i} outside [1, {n}]")));
        }
        Ok(self.beam_cell_unchecked(i, n))
    }

    pub(crate) fn beam_cell_unchecked(&self, i: usize, n: usize) -> (f64, f64) {
        let width = self.beamwidth_unchecked(n);
        let half_n = 0.5 * n as f64;
        let lower = FRAC_PI_2 + ((i - 1) as f64 - half_n) * width;
        let upper = FRAC_PI_2 + (i as f64 - half_n) * width;
        (lower, upper)
    }

    /// Center angle of beam `i` (midpoint of its cell).
    pub fn beam_center(&self, i: usize, n: usize) -> Result<f64> {
        let (lower, upper) = self.beam_cell(i, n)?;
        Ok(0.5 * (lower + upper))
    }

    /// Geometry of the beam serving a base station at `geo.train_angle`,
    /// with distances measured along the rail.
    ///
    /// Both cell edges are projected onto the line through the base station
    /// parallel to the rail, using the rail coordinate `x(theta) = d0 / tan(theta)`.
    /// `left` is the distance to the high-angle edge and `right` to the
    /// low-angle edge.
    pub fn beam_bounds_on_rail(&self, geo: &RailGeometry, n: usize) -> Result<BeamGeometry> {
        self.check_beam_count(n)?;
        let theta = geo.train_angle;
        check_not_singular(theta)?;
        self.check_in_coverage(theta)?;
        let i = self.beam_index_unchecked(theta, n);
        let (lower, upper) = self.beam_cell_unchecked(i, n);
        check_not_singular(lower)?;
        check_not_singular(upper)?;

        let d0 = geo.perpendicular_distance;
        let x = |angle: f64| d0 / angle.tan();
        let at = x(theta);
        let left = (at - x(upper)).max(0.0);
        let right = (x(lower) - at).max(0.0);
        Ok(self.geometry(theta, n, i, left, right))
    }

    /// Small-beam closed form of the same bounds: arc lengths at slant
    /// range `d0 / sin(theta_b)`,
    ///
    /// ```text
    /// left  = (chi * Theta - (theta_b - pi/2)) * d0 / sin(theta_b)
    /// right = ((theta_b - pi/2) - (chi - 1) * Theta) * d0 / sin(theta_b)
    /// ```
    ///
    /// with `chi = ceil((theta_b - pi/2) / Theta)`, so both terms are
    /// nonnegative and sum to `d0 Theta / sin(theta_b)`. Agrees with
    /// [`beam_bounds_on_rail`](Self::beam_bounds_on_rail) near boresight;
    /// away from it the rail projection is longer by `1 / sin(theta_b)`.
    pub fn beam_bounds_small_angle(&self, geo: &RailGeometry, n: usize) -> Result<BeamGeometry> {
        self.check_beam_count(n)?;
        let theta = geo.train_angle;
        check_not_singular(theta)?;
        self.check_in_coverage(theta)?;
        let i = self.beam_index_unchecked(theta, n);
        let width = self.beamwidth_unchecked(n);
        let chi = i as f64 - 0.5 * n as f64;
        let range = geo.perpendicular_distance / theta.sin();
        let offset = theta - FRAC_PI_2;
        let left = ((chi * width - offset) * range).max(0.0);
        let right = ((offset - (chi - 1.0) * width) * range).max(0.0);
        Ok(self.geometry(theta, n, i, left, right))
    }

    fn geometry(&self, theta: f64, n: usize, i: usize, left: f64, right: f64) -> BeamGeometry {
        let beamwidth = self.beamwidth_unchecked(n);
        let aperture = self.spacing * n as f64;
        BeamGeometry {
            beam_count: n,
            beamwidth,
            directivity: self.array_type.factor() * aperture / self.wavelength,
            beam_index: i,
            index_offset: ((theta - FRAC_PI_2) / beamwidth).ceil() as i64,
            left,
            right,
            coverage: left + right,
        }
    }
}

fn check_not_singular(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) || theta.sin() <= 0.0 {
        return Err(Error::SingularGeometry { theta });
    }
    Ok(())
}

/// Directivity implied by a beamwidth: `T C / (pi Theta)`.
pub fn directivity_from_beamwidth(
    beamwidth: f64,
    array_type: ArrayType,
    design_constant: f64,
) -> f64 {
    array_type.factor() * design_constant / (PI * beamwidth)
}

/// Position of the base station relative to the rail and the train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RailGeometry {
    /// Perpendicular distance `d0` from the base station to the rail, meters.
    pub perpendicular_distance: f64,
    /// Base-station antenna height `h0`, meters. Only the encounter
    /// distance law uses it.
    pub antenna_height: f64,
    /// Angle `theta_b` of the base station seen from the train.
    pub train_angle: f64,
}

impl RailGeometry {
    pub fn new(perpendicular_distance: f64, antenna_height: f64, train_angle: f64) -> Result<Self> {
        if !(perpendicular_distance > 0.0 && perpendicular_distance.is_finite()) {
            return Err(invalid("d0", "must be positive"));
        }
        if !(antenna_height >= 0.0 && antenna_height.is_finite()) {
            return Err(invalid("h0", "must be nonnegative"));
        }
        if !train_angle.is_finite() {
            return Err(invalid("theta_b", "must be finite"));
        }
        Ok(Self {
            perpendicular_distance,
            antenna_height,
            train_angle,
        })
    }

    pub fn at_angle(&self, train_angle: f64) -> Self {
        Self {
            train_angle,
            ..*self
        }
    }
}

/// Serving-beam geometry for a given beam count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    pub beam_count: usize,
    pub beamwidth: f64,
    pub directivity: f64,
    /// 1-based serving beam.
    pub beam_index: usize,
    /// Cell offset `chi` from boresight: the serving cell spans
    /// `(pi/2 + (chi - 1) Theta, pi/2 + chi Theta]`.
    pub index_offset: i64,
    /// Distance along the rail to the high-angle edge of the serving beam.
    pub left: f64,
    /// Distance along the rail to the low-angle edge of the serving beam.
    pub right: f64,
    pub coverage: f64,
}
