//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's quadrature, Q function or allocation code.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use hst_beam::codebook::{BeamWeight, PhaseMapper};
use hst_beam::EncounterScenario;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for k in 1..n {
        s += f(a + k as f64 * h);
    }
    s * h
}

/// `Q(x)` by Simpson integration of the normal density.
pub fn q_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_oracle(-x);
    }
    if x > 12.0 {
        return 0.0;
    }
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    0.5 - simpson(phi, 0.0, x, 4000)
}

/// Effective beamforming probability from first principles: ceil-based
/// cell lookup, rail projection `x = d0 / tan(theta)` and the oracle `Q`.
pub fn probability_oracle(
    spacing: f64,
    wavelength: f64,
    design_constant: f64,
    d0: f64,
    theta_b: f64,
    sigma: f64,
    n: usize,
) -> f64 {
    let width = design_constant * wavelength / (PI * spacing * n as f64);
    let u = (theta_b - FRAC_PI_2) / width + n as f64 / 2.0;
    let i = (u.ceil() as i64).clamp(1, n as i64) as f64;
    let lower = FRAC_PI_2 + ((i - 1.0) - n as f64 / 2.0) * width;
    let upper = FRAC_PI_2 + (i - n as f64 / 2.0) * width;
    let x = |t: f64| d0 / t.tan();
    let left = x(theta_b) - x(upper);
    let right = x(lower) - x(theta_b);
    if sigma == 0.0 {
        return 1.0;
    }
    1.0 - 0.5 * (q_oracle(left / sigma) + q_oracle(right / sigma))
}

/// `g(t) = d(t)^alpha0 sigma0^2 / w` written out directly.
pub fn g_oracle(sc: &EncounterScenario, train: u8, t: f64) -> f64 {
    let l = sc.half_coverage;
    let x = match train {
        1 => sc.speed * t - l + sc.offset * l,
        _ => sc.speed * t - l,
    };
    let d = (sc.perpendicular_distance.powi(2) + sc.antenna_height.powi(2) + x * x).sqrt();
    let w = if train == 1 {
        sc.beam_weight_1
    } else {
        sc.beam_weight_2
    };
    d.powf(sc.path_loss_exponent) * sc.noise_power / w
}

pub fn window(sc: &EncounterScenario, train: u8) -> (f64, f64) {
    let lv = sc.half_coverage / sc.speed;
    match train {
        1 => (-sc.offset * lv, (2.0 - sc.offset) * lv),
        _ => (0.0, 2.0 * lv),
    }
}

/// Single-train maximum rate with a fine trapezoid rule.
pub fn rmax_oracle(sc: &EncounterScenario, train: u8) -> f64 {
    let (a, b) = window(sc, train);
    let integral = trapezoid(|t| g_oracle(sc, train, t), a, b, 400_000);
    (1.0 + sc.avg_power * 2.0 * sc.half_coverage / sc.speed / integral).log2()
}

/// Midpoints and width of a uniform grid of `cells` over `[a, b]`.
pub fn midpoints(a: f64, b: f64, cells: usize) -> (Vec<f64>, f64) {
    let h = (b - a) / cells as f64;
    ((0..cells).map(|k| a + (k as f64 + 0.5) * h).collect(), h)
}

/// Priority rate on a time grid: the holder is decoded last over the whole
/// shared phase at a constant rate that spends its whole budget there; the other
/// train then runs at the largest constant rate its budget allows while
/// treating the holder as noise on the shared phase.
pub fn priority_oracle(sc: &EncounterScenario, holder: u8, cells: usize) -> f64 {
    let other = 3 - holder;
    let budget = sc.avg_power * 2.0 * sc.half_coverage / sc.speed;
    let t2 = (2.0 - sc.offset) * sc.half_coverage / sc.speed;
    let (ow_a, ow_b) = window(sc, other);
    let (ht, hh) = midpoints(0.0, t2, cells);
    let holder_sum: f64 = ht.iter().map(|&t| g_oracle(sc, holder, t)).sum::<f64>() * hh;
    let k_holder = budget / holder_sum;
    let (ot, oh) = midpoints(ow_a, ow_b, cells);
    let mut weighted = 0.0;
    for &t in &ot {
        let shared = (0.0..=t2).contains(&t);
        let interferer_snr = if shared { k_holder } else { 0.0 };
        weighted += g_oracle(sc, other, t) * (1.0 + interferer_snr);
    }
    let k_other = budget / (weighted * oh);
    (1.0 + k_other).log2()
}

/// Best rate of `H1` under a given per-cell decode order, with `H2` held at
/// constant rate `r2`. `h1_first[k]` marks cells where `H1` is decoded first
/// and sees `H2` as noise. Only meaningful for `eta = 0`, where both trains
/// share every cell. Returns `None` if `H2` cannot meet `r2` in budget.
pub fn rate_for_order(
    sc: &EncounterScenario,
    r2: f64,
    times: &[f64],
    h: f64,
    h1_first: &[bool],
) -> Option<f64> {
    let budget = sc.avg_power * 2.0 * sc.half_coverage / sc.speed;
    let k2 = r2.exp2() - 1.0;
    // H1: s1 = k1 (1 + k2) where first, k1 where last.
    let mut h1_load = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let g1 = g_oracle(sc, 1, t);
        h1_load += if h1_first[k] { (1.0 + k2) * g1 } else { g1 };
    }
    let k1 = budget / (h1_load * h);
    // H2: s2 = k2 where last, k2 (1 + k1) where first.
    let mut h2_energy = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let g2 = g_oracle(sc, 2, t);
        h2_energy += if h1_first[k] {
            k2 * g2
        } else {
            k2 * (1.0 + k1) * g2
        };
    }
    (h2_energy * h <= budget * (1.0 + 1e-12)).then(|| (1.0 + k1).log2())
}

/// Conditional capacity of `H1` at `H2` rate `r2` on a midpoint grid of
/// each phase, with the set of H1-first cells chosen freely: cells are
/// ranked by `g1 / g2` and every threshold of the ranking is tried.
pub fn threshold_oracle(sc: &EncounterScenario, r2: f64, cells: usize) -> f64 {
    let budget = sc.avg_power * 2.0 * sc.half_coverage / sc.speed;
    let lv = sc.half_coverage / sc.speed;
    let t2_end = (2.0 - sc.offset) * lv;
    let (t1, h1) = midpoints(-sc.offset * lv, 0.0, cells);
    let (t2, h2) = midpoints(0.0, t2_end, cells);
    let (t3, h3) = midpoints(t2_end, 2.0 * lv, cells);
    let sum = |ts: &[f64], train: u8| ts.iter().map(|&t| g_oracle(sc, train, t)).sum::<f64>();
    let i1 = sum(&t1, 1) * h1 + sum(&t2, 1) * h2;
    let i2 = sum(&t2, 2) * h2 + sum(&t3, 2) * h3;
    let k2 = r2.exp2() - 1.0;
    let mut shared: Vec<(f64, f64)> = t2
        .iter()
        .map(|&t| (g_oracle(sc, 1, t), g_oracle(sc, 2, t)))
        .collect();
    shared.sort_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
    let total_g2: f64 = shared.iter().map(|p| p.1).sum::<f64>() * h2;
    let (mut first_g1, mut first_g2) = (0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    for m in 0..=shared.len() {
        if m > 0 {
            first_g1 += shared[m - 1].0 * h2;
            first_g2 += shared[m - 1].1 * h2;
        }
        let k1 = budget / (i1 + k2 * first_g1);
        if k2 * (i2 + k1 * (total_g2 - first_g2)) <= budget * (1.0 + 1e-12) {
            best = best.max((1.0 + k1).log2());
        }
    }
    best
}

/// Measured -3 dB width of the main lobe of `beam` around `center`.
pub fn half_power_width(mapper: &PhaseMapper, beam: usize, center: f64) -> f64 {
    let weight = BeamWeight::uniform(mapper.element_count(), 1.0, 1.0);
    let af = |t: f64| mapper.array_factor(t, beam, &weight).unwrap();
    // Peak on a fine local grid.
    let span = 0.05;
    let mut peak = (center, af(center));
    for k in -500..=500 {
        let t = center + span * k as f64 / 500.0;
        let v = af(t);
        if v > peak.1 {
            peak = (t, v);
        }
    }
    let half = 0.5 * peak.1;
    let edge = |dir: f64| {
        let mut step = 1e-4;
        let mut t = peak.0;
        while af(t + dir * step) > half {
            t += dir * step;
            step *= 1.2;
        }
        let (mut inside, mut outside) = (t, t + dir * step);
        for _ in 0..80 {
            let mid = 0.5 * (inside + outside);
            if af(mid) > half {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    edge(1.0) - edge(-1.0)
}
