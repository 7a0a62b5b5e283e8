//! Two trains sharing one base station.
//!
//! Train `H1` enters the coverage `[-L, L]` first; when `H2` enters, `H1` has
//! already covered `eta * L`. Time is measured from `H2`'s entry, so the
//! encounter spans `[-eta L / v0, 2 L / v0]` and splits into
//!
//! ```text
//! T1 = [-eta L/v0, 0)           only H1 served
//! T2 = [0, (2 - eta) L/v0]      both served (multiple access)
//! T3 = ((2 - eta) L/v0, 2 L/v0] only H2 served
//! ```
//!
//! Each train's beam gain `w` is held constant; time variation enters only
//! through the amplitude excitation `f(t)`, whose average over the train's
//! `2 L / v0` pass is at most one. With `g(t) = d(t)^alpha0 sigma0^2 / w`
//! the received SNR is `f(t) p0 / g(t)`, and channel inversion
//! `f = g (2^R - 1) / p0` holds the rate constant at `R`.
//!
//! Without decoding priority `T2` is split at `lambda L / v0`: on
//! `T21 = [0, lambda L/v0]` `H2` is decoded last (clean channel) and `H1`
//! first, treating `H2` as noise; on `T22` the roles swap. The conditional
//! capacity `C(R2)` and the split `lambda` are fixed by requiring both
//! average-power constraints to hold with equality.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::units;

/// Relative tolerance of every time integral.
pub const QUAD_REL_TOL: f64 = 1e-9;

/// Default receiver noise power, -104 dBm.
pub const DEFAULT_NOISE_DBM: f64 = -104.0;

/// Default average transmit power.
pub const DEFAULT_POWER_DBM: f64 = 43.0;

/// Default beam gain of both trains: directivity of 128 half-wavelength
/// spaced beams of a broadside array.
pub const DEFAULT_BEAM_WEIGHT: f64 = 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Train {
    H1,
    H2,
}

impl Train {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Train::H1),
            2 => Ok(Train::H2),
            _ => Err(invalid("train", format!("{n} is not 1 or 2"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Train::H1 => Train::H2,
            Train::H2 => Train::H1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncounterScenario {
    /// Half the rail length covered by the base station, `L`, meters.
    pub half_coverage: f64,
    /// Train speed `v0`, m/s.
    pub speed: f64,
    /// Perpendicular distance `d0` from base station to rail, meters.
    pub perpendicular_distance: f64,
    /// Base-station antenna height `h0`, meters.
    pub antenna_height: f64,
    /// Path-loss exponent `alpha0`, in [2, 5].
    pub path_loss_exponent: f64,
    /// Average transmit power `p0` of each train, watts.
    pub avg_power: f64,
    /// Noise power `sigma0^2`, watts.
    pub noise_power: f64,
    /// Entry offset `eta`, in [0, 2].
    pub offset: f64,
    pub beam_weight_1: f64,
    pub beam_weight_2: f64,
}

impl Default for EncounterScenario {
    fn default() -> Self {
        Self {
            half_coverage: 800.0,
            speed: units::kmh_to_mps(360.0),
            perpendicular_distance: 50.0,
            antenna_height: 20.0,
            path_loss_exponent: 3.0,
            avg_power: units::dbm_to_watt(DEFAULT_POWER_DBM),
            noise_power: units::dbm_to_watt(DEFAULT_NOISE_DBM),
            offset: 0.0,
            beam_weight_1: DEFAULT_BEAM_WEIGHT,
            beam_weight_2: DEFAULT_BEAM_WEIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    T1,
    T21,
    T22,
    T3,
}

/// The encounter phases for a given split of `T2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePartition {
    pub t1: (f64, f64),
    pub t21: (f64, f64),
    pub t22: (f64, f64),
    pub t3: (f64, f64),
    /// `lambda`: `T21` ends at `lambda L / v0`.
    pub split: f64,
}

impl PhasePartition {
    pub fn t2(&self) -> (f64, f64) {
        (self.t21.0, self.t22.1)
    }

    /// Phase containing `t`; `None` outside the encounter. Shared boundaries
    /// go to `T21` (split point) and `T2` (its end points).
    pub fn phase_of(&self, t: f64) -> Option<Phase> {
        if t < self.t1.0 || t > self.t3.1 {
            None
        } else if t < self.t21.0 {
            Some(Phase::T1)
        } else if t <= self.t21.1 {
            Some(Phase::T21)
        } else if t <= self.t22.1 {
            Some(Phase::T22)
        } else {
            Some(Phase::T3)
        }
    }
}

/// Successive-decoding order at an instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodePriority {
    /// `H1` is decoded first and sees `H2` as noise.
    H1First,
    /// `H2` is decoded first and sees `H1` as noise.
    H2First,
    /// Only one train is served.
    Single,
}

impl EncounterScenario {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("L", self.half_coverage),
            ("v0", self.speed),
            ("d0", self.perpendicular_distance),
            ("p0", self.avg_power),
            ("noise_power", self.noise_power),
            ("beam_weight_1", self.beam_weight_1),
            ("beam_weight_2", self.beam_weight_2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        if !(self.antenna_height >= 0.0 && self.antenna_height.is_finite()) {
            return Err(invalid("h0", "must be nonnegative"));
        }
        if !(2.0..=5.0).contains(&self.path_loss_exponent) {
            return Err(invalid(
                "alpha0",
                format!("{} not in [2, 5]", self.path_loss_exponent),
            ));
        }
        if !(0.0..=2.0).contains(&self.offset) {
            return Err(invalid("eta", format!("{} not in [0, 2]", self.offset)));
        }
        Ok(())
    }

    pub fn with_offset(&self, eta: f64) -> Self {
        Self {
            offset: eta,
            ..*self
        }
    }

    pub fn with_power_dbm(&self, dbm: f64) -> Self {
        Self {
            avg_power: units::dbm_to_watt(dbm),
            ..*self
        }
    }

    /// Duration `2 L / v0` of one pass.
    pub fn pass_duration(&self) -> f64 {
        2.0 * self.half_coverage / self.speed
    }

    /// Energy budget `p0 * 2L / v0` of one pass.
    pub fn energy_budget(&self) -> f64 {
        self.avg_power * self.pass_duration()
    }

    pub fn encounter_window(&self) -> (f64, f64) {
        (
            -self.offset * self.half_coverage / self.speed,
            self.pass_duration(),
        )
    }

    /// End of the shared phase, `(2 - eta) L / v0`.
    pub fn shared_end(&self) -> f64 {
        (2.0 - self.offset) * self.half_coverage / self.speed
    }

    /// Largest admissible split, `2 - eta`.
    pub fn max_split(&self) -> f64 {
        2.0 - self.offset
    }

    /// Serving window of a train.
    pub fn window(&self, train: Train) -> (f64, f64) {
        match train {
            Train::H1 => (self.encounter_window().0, self.shared_end()),
            Train::H2 => (0.0, self.pass_duration()),
        }
    }

    pub fn partition(&self, split: f64) -> Result<PhasePartition> {
        if !(0.0..=self.max_split()).contains(&split) {
            return Err(invalid(
                "lambda",
                format!("{split} not in [0, {}]", self.max_split()),
            ));
        }
        let (start, end) = self.encounter_window();
        let cut = split * self.half_coverage / self.speed;
        let t2_end = self.shared_end();
        Ok(PhasePartition {
            t1: (start, 0.0),
            t21: (0.0, cut),
            t22: (cut, t2_end),
            t3: (t2_end, end),
            split,
        })
    }

    fn rail_offset(&self, train: Train, t: f64) -> f64 {
        let l = self.half_coverage;
        match train {
            Train::H1 => self.speed * t - l + self.offset * l,
            Train::H2 => self.speed * t - l,
        }
    }

    /// Distance from `train` to the base station at `t`, ignoring windows.
    pub fn distance(&self, train: Train, t: f64) -> f64 {
        let x = self.rail_offset(train, t);
        (self.perpendicular_distance.powi(2) + self.antenna_height.powi(2) + x * x).sqrt()
    }

    /// Distances of both trains; a train outside its serving window is `None`.
    pub fn train_distances(&self, t: f64) -> Result<(Option<f64>, Option<f64>)> {
        let (start, end) = self.encounter_window();
        if !(t >= start && t <= end) {
            return Err(Error::OutsideWindow { t, start, end });
        }
        let served = |train| {
            let (a, b) = self.window(train);
            (t >= a && t <= b).then(|| self.distance(train, t))
        };
        Ok((served(Train::H1), served(Train::H2)))
    }

    fn beam_weight(&self, train: Train) -> f64 {
        match train {
            Train::H1 => self.beam_weight_1,
            Train::H2 => self.beam_weight_2,
        }
    }

    /// Inverse effective channel gain `g(t) = d(t)^alpha0 sigma0^2 / w`.
    pub fn inverse_gain(&self, train: Train, t: f64) -> f64 {
        let x = self.rail_offset(train, t);
        let d2 = self.perpendicular_distance.powi(2) + self.antenna_height.powi(2) + x * x;
        d2.powf(0.5 * self.path_loss_exponent) * self.noise_power / self.beam_weight(train)
    }

    /// `integral of g` over `[a, b]`.
    pub fn inverse_gain_integral(&self, train: Train, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        // Split at the closest approach, where the integrand bends most.
        let closest = match train {
            Train::H1 => (1.0 - self.offset) * self.half_coverage / self.speed,
            Train::H2 => self.half_coverage / self.speed,
        };
        let f = |t| self.inverse_gain(train, t);
        if closest > a && closest < b {
            quadrature::integrate(f, a, closest, QUAD_REL_TOL)
                + quadrature::integrate(f, closest, b, QUAD_REL_TOL)
        } else {
            quadrature::integrate(f, a, b, QUAD_REL_TOL)
        }
    }

    fn window_integral(&self, train: Train) -> f64 {
        let (a, b) = self.window(train);
        self.inverse_gain_integral(train, a, b)
    }

    /// Largest constant rate of a train served alone over its whole pass:
    /// `log2(1 + p0 (2L/v0) / integral g)`.
    pub fn single_train_rmax(&self, train: Train) -> f64 {
        (self.energy_budget() / self.window_integral(train)).ln_1p() / std::f64::consts::LN_2
    }

    /// Interference multiplier `M = 1 + p0 (2L/v0) / integral_{T2} g_holder`
    /// seen by the other train when `holder` is decoded last over all of `T2`.
    pub fn priority_multiplier(&self, holder: Train) -> f64 {
        let t2 = self.shared_end();
        let shared = self.inverse_gain_integral(holder, 0.0, t2);
        if shared <= 0.0 {
            return f64::INFINITY;
        }
        1.0 + self.energy_budget() / shared
    }

    /// Largest rate of the train without priority when `holder` is decoded
    /// last throughout `T2`.
    ///
    /// With `H2` holding priority:
    /// `log2(1 + p0 (2L/v0) / (M integral_{T2} g1 + integral_{T1} g1))`.
    /// With no shared phase (`eta = 2`) this is the single-train maximum.
    pub fn priority_rate(&self, holder: Train) -> f64 {
        let other = holder.other();
        let t2 = self.shared_end();
        if t2 <= 0.0 {
            return self.single_train_rmax(other);
        }
        let m = self.priority_multiplier(holder);
        let shared = self.inverse_gain_integral(other, 0.0, t2);
        let (a, b) = self.window(other);
        let alone = match other {
            Train::H1 => self.inverse_gain_integral(other, a, 0.0),
            Train::H2 => self.inverse_gain_integral(other, t2, b),
        };
        (self.energy_budget() / (m * shared + alone)).ln_1p() / std::f64::consts::LN_2
    }

    /// Conditional capacity of `H1` when `H2` holds rate `r2`, together with
    /// the time split and the allocation achieving it.
    pub fn no_priority_allocation(&self, r2: f64) -> Result<Allocation> {
        self.validate()?;
        if !(r2 >= 0.0 && r2.is_finite()) {
            return Err(invalid("R2", format!("{r2} must be nonnegative")));
        }
        let budget = self.energy_budget();
        let i1_total = self.window_integral(Train::H1);
        let i2_total = self.window_integral(Train::H2);
        let r1_max = (budget / i1_total).ln_1p() / std::f64::consts::LN_2;
        let r2_max = (budget / i2_total).ln_1p() / std::f64::consts::LN_2;
        if r2 > r2_max * (1.0 + 1e-12) {
            return Err(Error::InfeasibleRate {
                requested: r2,
                max: r2_max,
            });
        }
        let r2 = r2.min(r2_max);
        let t2_end = self.shared_end();
        let done = |capacity: f64, split: f64, h2_power_slack: bool| {
            Ok(Allocation {
                conditional_capacity: capacity,
                split,
                h2_power_slack,
                profile: AllocationProfile {
                    scenario: *self,
                    rate_1: capacity,
                    rate_2: r2,
                    partition: self.partition(split)?,
                },
            })
        };

        if r2 == 0.0 {
            return done(r1_max, 0.0, false);
        }
        if t2_end <= 0.0 {
            return done(r1_max, 0.0, r2 < r2_max);
        }

        // (2^R2 - 1) (i2_total + snr1 * I2(T22)) = budget
        // snr1 = budget / (i1_total + (2^R2 - 1) I1(T21))
        let k2 = (r2 * std::f64::consts::LN_2).exp_m1();
        let slack = budget / k2 - i2_total;
        let max_split = self.max_split();
        let time_of = |split: f64| split * self.half_coverage / self.speed;
        let snr1 = |split: f64| {
            budget / (i1_total + k2 * self.inverse_gain_integral(Train::H1, 0.0, time_of(split)))
        };
        let capacity = |snr: f64| snr.ln_1p() / std::f64::consts::LN_2;

        if slack <= 0.0 {
            return done(capacity(snr1(max_split)), max_split, false);
        }
        let residual = |split: f64| {
            snr1(split) * self.inverse_gain_integral(Train::H2, time_of(split), t2_end) - slack
        };
        if residual(0.0) <= 0.0 {
            // H2 meets R2 even when H1 is decoded last over all of T2.
            return done(r1_max, 0.0, true);
        }
        let (mut lo, mut hi) = (0.0, max_split);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * max_split {
                break;
            }
        }
        let split = 0.5 * (lo + hi);
        done(capacity(snr1(split)), split, false)
    }

    /// Boundary of the achievable rate region on a uniform `R2` grid over
    /// `[0, R2max]`.
    pub fn rate_region(&self, grid_size: usize) -> Result<RateRegion> {
        self.rate_region_with(grid_size, false)
    }

    /// As [`rate_region`](Self::rate_region); `parallel` evaluates grid points
    /// concurrently, keeping grid order in the output.
    pub fn rate_region_with(&self, grid_size: usize, parallel: bool) -> Result<RateRegion> {
        self.validate()?;
        if grid_size < 2 {
            return Err(invalid("grid_size", "must be at least 2"));
        }
        let r_max = self.single_train_rmax(Train::H2);
        let grid: Vec<f64> = (0..grid_size)
            .map(|k| r_max * k as f64 / (grid_size - 1) as f64)
            .collect();
        let point = |&r2: &f64| {
            self.no_priority_allocation(r2)
                .map(|a| (a.conditional_capacity, r2))
        };
        let pairs: Result<Vec<(f64, f64)>> = if parallel {
            grid.par_iter().map(point).collect()
        } else {
            grid.iter().map(point).collect()
        };
        Ok(RateRegion {
            pairs: pairs?,
            r_max,
            r_prime_max: self.priority_rate(Train::H2),
        })
    }

    /// Time-sharing segment between the two single-train optima.
    pub fn tfds_baseline(&self, grid_size: usize) -> Result<RateRegion> {
        self.validate()?;
        if grid_size < 2 {
            return Err(invalid("grid_size", "must be at least 2"));
        }
        let r1 = self.single_train_rmax(Train::H1);
        let r2 = self.single_train_rmax(Train::H2);
        let pairs = (0..grid_size)
            .map(|k| {
                let share = 1.0 - k as f64 / (grid_size - 1) as f64;
                (share * r1, (1.0 - share) * r2)
            })
            .collect();
        Ok(RateRegion {
            pairs,
            r_max: r2,
            r_prime_max: self.priority_rate(Train::H2),
        })
    }

    /// Largest common rate `R0` with `(R0, R0)` in the region.
    pub fn symmetric_rate(&self) -> Result<f64> {
        self.validate()?;
        let r1 = self.single_train_rmax(Train::H1);
        let r2 = self.single_train_rmax(Train::H2);
        let top = r1.min(r2);
        let margin = |r0: f64| -> Result<f64> {
            Ok(self.no_priority_allocation(r0)?.conditional_capacity - r0)
        };
        if margin(top)? >= 0.0 {
            return Ok(top);
        }
        let (mut lo, mut hi) = (0.0, top);
        while hi - lo > 1e-12 * top {
            let mid = 0.5 * (lo + hi);
            if margin(mid)? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Result of the no-priority optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    /// `C(R2)`, bit/s/Hz.
    pub conditional_capacity: f64,
    /// `lambda`.
    pub split: f64,
    /// `H2` meets its rate without spending its whole budget; only
    /// happens for very small `R2`, where `H1` keeps its single-train rate.
    pub h2_power_slack: bool,
    pub profile: AllocationProfile,
}

/// Channel-inversion amplitude excitations of both trains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationProfile {
    pub scenario: EncounterScenario,
    pub rate_1: f64,
    pub rate_2: f64,
    pub partition: PhasePartition,
}

impl AllocationProfile {
    fn served(&self, train: Train, t: f64) -> bool {
        let (a, b) = self.scenario.window(train);
        t >= a && t <= b
    }

    /// `2^R - 1`.
    fn snr_target(rate: f64) -> f64 {
        (rate * std::f64::consts::LN_2).exp_m1()
    }

    /// Excitation `f1(t)`; zero outside `H1`'s window.
    pub fn f1(&self, t: f64) -> f64 {
        if !self.served(Train::H1, t) {
            return 0.0;
        }
        let sc = &self.scenario;
        let base = sc.inverse_gain(Train::H1, t) * Self::snr_target(self.rate_1) / sc.avg_power;
        match self.partition.phase_of(t) {
            Some(Phase::T21) => base * self.rate_2.exp2(),
            _ => base,
        }
    }

    /// Excitation `f2(t)`; zero outside `H2`'s window.
    pub fn f2(&self, t: f64) -> f64 {
        if !self.served(Train::H2, t) {
            return 0.0;
        }
        let sc = &self.scenario;
        let base = sc.inverse_gain(Train::H2, t) * Self::snr_target(self.rate_2) / sc.avg_power;
        match self.partition.phase_of(t) {
            Some(Phase::T22) => base * self.rate_1.exp2(),
            _ => base,
        }
    }

    pub fn decode_priority(&self, t: f64) -> DecodePriority {
        match self.partition.phase_of(t) {
            Some(Phase::T21) => DecodePriority::H1First,
            Some(Phase::T22) => DecodePriority::H2First,
            _ => DecodePriority::Single,
        }
    }

    /// Received SNRs `f_i p0 / g_i` of both trains at `t`.
    pub fn snrs(&self, t: f64) -> (f64, f64) {
        let sc = &self.scenario;
        let s1 = self.f1(t) * sc.avg_power / sc.inverse_gain(Train::H1, t);
        let s2 = self.f2(t) * sc.avg_power / sc.inverse_gain(Train::H2, t);
        (s1, s2)
    }

    /// Instantaneous rates delivered under the decode order at `t`.
    pub fn instantaneous_rates(&self, t: f64) -> (f64, f64) {
        let (s1, s2) = self.snrs(t);
        let log2_1p = |x: f64| x.ln_1p() / std::f64::consts::LN_2;
        let r1 = self.served(Train::H1, t);
        let r2 = self.served(Train::H2, t);
        match self.decode_priority(t) {
            DecodePriority::H1First if r1 && r2 => (log2_1p(s1 / (1.0 + s2)), log2_1p(s2)),
            DecodePriority::H2First if r1 && r2 => (log2_1p(s1), log2_1p(s2 / (1.0 + s1))),
            _ => (
                if r1 { log2_1p(s1) } else { 0.0 },
                if r2 { log2_1p(s2) } else { 0.0 },
            ),
        }
    }

    /// Time-averaged excitation `(v0 / 2L) integral f` over the train's pass.
    pub fn average_excitation(&self, train: Train) -> f64 {
        let sc = &self.scenario;
        let (a, b) = sc.window(train);
        let p = &self.partition;
        let cuts = [a, p.t21.0, p.t21.1, p.t22.1, b];
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0].max(a), w[1].min(b));
            if hi > lo {
                let mid = 0.5 * (lo + hi);
                let scale = match (train, p.phase_of(mid)) {
                    (Train::H1, Some(Phase::T21)) => self.rate_2.exp2(),
                    (Train::H2, Some(Phase::T22)) => self.rate_1.exp2(),
                    _ => 1.0,
                };
                let rate = match train {
                    Train::H1 => self.rate_1,
                    Train::H2 => self.rate_2,
                };
                total += scale * Self::snr_target(rate) / sc.avg_power
                    * sc.inverse_gain_integral(train, lo, hi);
            }
        }
        total / sc.pass_duration()
    }
}

/// Boundary points `(R1, R2)` of a rate region.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    /// `(R1, R2)` pairs in increasing `R2`.
    pub pairs: Vec<(f64, f64)>,
    /// `R2max`, the largest rate of `H2` alone.
    pub r_max: f64,
    /// Rate of `H1` when `H2` holds priority throughout the shared phase.
    pub r_prime_max: f64,
}

impl RateRegion {
    /// Whether `(r1, r2)` lies under the piecewise-linear boundary.
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        if r1 < 0.0 || r2 < 0.0 || r2 > self.r_max {
            return false;
        }
        let bound = self
            .pairs
            .windows(2)
            .find(|w| r2 >= w[0].1 && r2 <= w[1].1)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                if b.1 == a.1 {
                    a.0.max(b.0)
                } else {
                    a.0 + (b.0 - a.0) * (r2 - a.1) / (b.1 - a.1)
                }
            })
            .unwrap_or(0.0);
        r1 <= bound
    }

    /// Writes `R2_bps_hz,R1_bps_hz`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::table::{fmt_num, row};
        out.write_all(b"R2_bps_hz,R1_bps_hz\n")?;
        for &(r1, r2) in &self.pairs {
            out.write_all(row([fmt_num(r2), fmt_num(r1)]).as_bytes())?;
        }
        Ok(())
    }
}
