//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hst_beam::array::{ArrayConfig, ArrayType, RailGeometry};
use hst_beam::codebook::{BeamWeight, PhaseMapper};
use hst_beam::encounter::{Allocation, Train};
use hst_beam::harness::{self, ExperimentConfig};
use hst_beam::positioning::{probability_for, search_beam_count, PositioningModel};
use hst_beam::EncounterScenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_array(n: usize) -> ArrayConfig {
    ArrayConfig::from_carrier(n, 2.4e9, 0.5).unwrap()
}

fn product_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let wavelength = rng.random_range(0.01..1.0);
        let spacing = rng.random_range(0.05..2.0) * wavelength;
        let n = rng.random_range(1..=1024usize);
        let t = if rng.random_bool(0.5) {
            ArrayType::Broadside
        } else {
            ArrayType::EndFire
        };
        let cfg = ArrayConfig::new(n, spacing, wavelength)
            .unwrap()
            .with_array_type(t);
        let product = cfg.directivity(n).unwrap() * cfg.beamwidth(n).unwrap();
        let target = t.factor() * cfg.design_constant / PI;
        worst = worst.max((product - target).abs() / target);
    }
    check(
        worst <= 1e-12,
        format!("max relative error {worst:.2e} over 1000 draws"),
    )
}

fn scaling_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut mismatches = 0;
    for _ in 0..100 {
        let q = rng.random_range(1..=64usize);
        let s = rng.random_range(2..=8usize);
        let n = s * q;
        // Dyadic spacings keep d * N exact, so both apertures are the same double.
        let spacing = rng.random_range(1..=2048u32) as f64 / 4096.0;
        let wavelength = rng.random_range(0.01..1.0);
        let a = ArrayConfig::new(n, spacing, wavelength).unwrap();
        let b = ArrayConfig::new(n, s as f64 * spacing, wavelength).unwrap();
        let same_width = a.beamwidth(n).unwrap().to_bits() == b.beamwidth(q).unwrap().to_bits();
        let same_gain = a.directivity(n).unwrap().to_bits() == b.directivity(q).unwrap().to_bits();
        if !(same_width && same_gain) {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0,
        format!("{mismatches}/100 configs differ bitwise"),
    )
}

fn search_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = default_array(128);
    let (lo, hi) = cfg.coverage_interval();
    let mut mismatches = Vec::new();
    for case in 0..500 {
        let theta = rng.random_range(lo + 1e-6..hi - 1e-6);
        let sigma = rng.random_range(0.01..20.0);
        let p_th = rng.random_range(0.5..0.99);
        let geo = RailGeometry::new(50.0, 20.0, theta).unwrap();
        let model = PositioningModel::new(sigma, p_th, 128).unwrap();
        let got = search_beam_count(&cfg, &geo, &model).unwrap().optimal_n;
        let want = (0..=7)
            .map(|e| 1usize << e)
            .filter(|&n| {
                common::probability_oracle(
                    cfg.spacing,
                    cfg.wavelength,
                    cfg.design_constant,
                    50.0,
                    theta,
                    sigma,
                    n,
                ) >= p_th
            })
            .max()
            .unwrap_or(1);
        if got != want {
            mismatches.push(format!("case {case}: {got} vs {want}"));
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{} mismatches out of 500 {:?}",
            mismatches.len(),
            mismatches.first()
        ),
    )
}

fn probability_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = default_array(128);
    let (lo, hi) = cfg.coverage_interval();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let theta = rng.random_range(lo + 1e-6..hi - 1e-6);
        let sigma = rng.random_range(0.01..20.0);
        let n = 1usize << rng.random_range(0..=6u32);
        let geo = RailGeometry::new(50.0, 20.0, theta).unwrap();
        let p_n = probability_for(&cfg, &geo, sigma, n).unwrap();
        let p_2n = probability_for(&cfg, &geo, sigma, 2 * n).unwrap();
        worst = worst.max(p_2n - p_n);
    }
    check(
        worst <= 1e-12,
        format!("max P(2N) - P(N) = {worst:.2e} over 500 cases"),
    )
}

fn beamwidth_validation() -> Outcome {
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for n in [16, 32, 64] {
        let cfg = default_array(n);
        let mapper = PhaseMapper::build(&cfg, n).unwrap();
        let expected = cfg.beamwidth(n).unwrap();
        for beam in [n / 2, n / 2 + 1] {
            let center = mapper.beam_centers()[beam - 1];
            let measured = common::half_power_width(&mapper, beam, center);
            let err = (measured - expected).abs() / expected;
            worst = worst.max(err);
            details.push(format!("N={n} beam {beam}: {:.2}%", 100.0 * err));
        }
    }
    check(
        worst <= 0.15,
        format!(
            "max relative error {:.2}% ({})",
            100.0 * worst,
            details.join(", ")
        ),
    )
}

fn codebook_pointing() -> Outcome {
    let n = 64;
    let cfg = default_array(n);
    let mapper = PhaseMapper::build(&cfg, n).unwrap();
    let weight = BeamWeight::uniform(n, 1.0, 1.0);
    let steps = (PI / 1e-4) as usize;
    let mut inside = 0;
    let mut misses = Vec::new();
    for beam in 1..=n {
        let (mut best_t, mut best_v) = (0.0, f64::NEG_INFINITY);
        for k in 1..steps {
            let t = k as f64 * 1e-4;
            let v = mapper.array_factor(t, beam, &weight).unwrap();
            if v > best_v {
                best_t = t;
                best_v = v;
            }
        }
        let (lower, upper) = cfg.beam_cell(beam, n).unwrap();
        if best_t >= lower && best_t <= upper {
            inside += 1;
        } else {
            misses.push(beam);
        }
    }
    check(
        inside == n,
        format!("{inside}/{n} beams peak inside their cell; misses {misses:?}"),
    )
}

fn phase_integral(a: &Allocation, train: u8) -> f64 {
    let sc = &a.profile.scenario;
    let (lo, hi) = common::window(sc, train);
    let p = &a.profile.partition;
    let mut cuts = vec![lo, hi, p.t21.0, p.t21.1, p.t22.1];
    cuts.retain(|&c| c >= lo && c <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |t: f64| {
        if train == 1 {
            a.profile.f1(t)
        } else {
            a.profile.f2(t)
        }
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let eps = (w[1] - w[0]) * 1e-13;
        total += common::simpson(f, w[0] + eps, w[1] - eps, 4000);
    }
    total * sc.speed / (2.0 * sc.half_coverage)
}

fn criterion_allocations() -> Vec<(f64, f64, Allocation)> {
    let mut out = Vec::new();
    for eta in [0.0, 0.8, 1.6] {
        let sc = EncounterScenario::default().with_offset(eta);
        let r_max = sc.single_train_rmax(Train::H2);
        for k in 1..=5 {
            let r2 = r_max * k as f64 / 5.0;
            out.push((eta, r2, sc.no_priority_allocation(r2).unwrap()));
        }
    }
    out
}

fn power_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for (eta, r2, a) in criterion_allocations() {
        for train in [1, 2] {
            let err = (phase_integral(&a, train) - 1.0).abs();
            if err > worst {
                worst = err;
                at = format!("eta {eta}, R2 {r2:.3}, train {train}");
            }
        }
    }
    check(
        worst <= 1e-6,
        format!("max |avg f - 1| = {worst:.2e} ({at}); 15 allocations"),
    )
}

fn mac_feasibility() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut allocations = criterion_allocations();
    for eta in [0.0, 0.8, 1.6, 2.0] {
        let sc = EncounterScenario::default().with_offset(eta);
        allocations.push((eta, 0.0, sc.no_priority_allocation(0.0).unwrap()));
    }
    let count = allocations.len();
    for (_, r2, a) in allocations {
        let sc = a.profile.scenario;
        let r1 = a.conditional_capacity;
        let (start, end) = sc.encounter_window();
        for k in 0..10_000 {
            let t = start + (end - start) * (k as f64 + 0.5) / 10_000.0;
            let (d1, d2) = sc.train_distances(t).unwrap();
            let s1 = if d1.is_some() {
                a.profile.f1(t) * sc.avg_power / common::g_oracle(&sc, 1, t)
            } else {
                0.0
            };
            let s2 = if d2.is_some() {
                a.profile.f2(t) * sc.avg_power / common::g_oracle(&sc, 2, t)
            } else {
                0.0
            };
            let mut excess: Vec<f64> = Vec::new();
            if d1.is_some() {
                excess.push(r1 - (1.0 + s1).log2());
            }
            if d2.is_some() {
                excess.push(r2 - (1.0 + s2).log2());
            }
            if d1.is_some() && d2.is_some() {
                excess.push(r1 + r2 - (1.0 + s1 + s2).log2());
            }
            worst = excess.into_iter().fold(worst, f64::max);
        }
    }
    check(
        worst <= 1e-9,
        format!(
            "max constraint excess {worst:.2e} bit/s/Hz over {count} allocations x 1e4 samples"
        ),
    )
}

fn optimality_oracle() -> Outcome {
    let sc = EncounterScenario::default();
    let r2 = 0.5 * sc.single_train_rmax(Train::H2);
    let c = sc.no_priority_allocation(r2).unwrap().conditional_capacity;
    let cells = 200;
    let (times, h) = common::midpoints(0.0, sc.pass_duration(), cells);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut feasible = 0;
    let mut attempts = 0;
    let mut best = f64::NEG_INFINITY;
    while feasible < 1000 && attempts < 1_000_000 {
        attempts += 1;
        let order: Vec<bool> = match rng.random_range(0..3) {
            // H1 first on a random prefix.
            0 => {
                let m = rng.random_range(0..=cells);
                (0..cells).map(|k| k < m).collect()
            }
            // Independent random order per cell.
            1 => {
                let p = rng.random_range(0.0..1.0);
                (0..cells).map(|_| rng.random_bool(p)).collect()
            }
            // Random set of runs.
            _ => {
                let mut v = Vec::with_capacity(cells);
                let mut state = rng.random_bool(0.5);
                while v.len() < cells {
                    let run = rng.random_range(1..=40);
                    v.extend(std::iter::repeat_n(state, run.min(cells - v.len())));
                    state = !state;
                }
                v
            }
        };
        if let Some(rate) = common::rate_for_order(&sc, r2, &times, h, &order) {
            // Random underuse of H1's budget keeps the allocation feasible.
            let scale: f64 = if rng.random_bool(0.5) {
                1.0
            } else {
                rng.random_range(0.0..1.0)
            };
            let rate = (1.0 + (rate.exp2() - 1.0) * scale).log2();
            feasible += 1;
            best = best.max(rate);
        }
    }
    check(
        feasible == 1000 && best <= c + 1e-3,
        format!("best of {feasible} feasible draws ({attempts} tried): {best:.6} vs C = {c:.6} (gap {:.2e})", c - best),
    )
}

fn region_structure() -> Outcome {
    let grid = 21;
    let regions: Vec<_> = [0.0, 0.8, 1.6, 2.0]
        .iter()
        .map(|&eta| {
            (
                eta,
                EncounterScenario::default()
                    .with_offset(eta)
                    .rate_region_with(grid, true)
                    .unwrap(),
            )
        })
        .collect();
    let mut problems = Vec::new();
    for w in regions.windows(2) {
        let ((ea, a), (eb, b)) = (&w[0], &w[1]);
        let violations: Vec<(f64, f64, f64)> = a
            .pairs
            .iter()
            .zip(&b.pairs)
            .filter(|(p, q)| p.0 > q.0 * (1.0 + 1e-9))
            .map(|(p, q)| (p.1, p.0, q.0))
            .collect();
        if let Some(&(r2, ra, rb)) = violations
            .iter()
            .max_by(|x, y| (x.1 - x.2).total_cmp(&(y.1 - y.2)))
        {
            problems.push(format!(
                "eta {ea} not inside eta {eb} at {}/{grid} points (worst R2 {r2:.3}: {ra:.4} > {rb:.4})",
                violations.len()
            ));
        }
    }
    let rect = &regions[3].1;
    let (min, max) = rect
        .pairs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    if max - min >= 1e-9 {
        problems.push(format!("eta 2 boundary varies by {:.2e}", max - min));
    }
    let tfds = EncounterScenario::default().tfds_baseline(grid).unwrap();
    let below = regions[0]
        .1
        .pairs
        .iter()
        .zip(&tfds.pairs)
        .filter(|(p, q)| p.0 < q.0)
        .count();
    if below > 0 {
        problems.push(format!("eta 0 below T/FDS at {below} points"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "nested on {grid} points, rectangle spread {:.1e}, T/FDS dominated",
                max - min
            )
        } else {
            problems.join("; ")
        },
    )
}

fn symmetric_sweep() -> Outcome {
    let cfg = ExperimentConfig {
        symmetric_eta_points: 21,
        p0_dbm_grid: vec![37.0, 43.0, 47.0],
        parallel: true,
        ..ExperimentConfig::default()
    };
    let table = &harness::symmetric(&cfg).unwrap()[0];
    let values: Vec<(f64, f64, f64)> = table
        .records()
        .map(|r| {
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
            )
        })
        .collect();
    let mut problems = Vec::new();
    for curve in values.chunks(21) {
        let drops: Vec<String> = curve
            .windows(2)
            .filter(|w| w[1].1 < w[0].1)
            .map(|w| format!("{:.1}->{:.1}: {:.4}->{:.4}", w[0].0, w[1].0, w[0].1, w[1].1))
            .collect();
        if !drops.is_empty() {
            problems.push(format!(
                "p0 {} dBm decreases at {} steps (first {})",
                curve[0].2,
                drops.len(),
                drops[0]
            ));
        }
    }
    let unordered = (0..21)
        .filter(|&k| !(values[k].1 < values[21 + k].1 && values[21 + k].1 < values[42 + k].1))
        .count();
    if unordered > 0 {
        problems.push(format!("p0 ordering broken at {unordered} eta points"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            "monotone in eta and ordered in p0 on 21 x 3 points".to_owned()
        } else {
            problems.join("; ")
        },
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::default();
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let mut tables = harness::run_kind(&cfg, harness::ExperimentKind::All).unwrap();
        tables.extend(harness::traverse(&cfg).unwrap());
        tables.extend(harness::export_codebook(&cfg).unwrap());
        harness::write_outputs(dir.path(), "all", &cfg, &tables).unwrap();
        tables
            .iter()
            .map(|t| {
                (
                    t.file_name.clone(),
                    std::fs::read(dir.path().join(&t.file_name)).unwrap(),
                )
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (run(), run());
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    check(
        differing.is_empty() && a.len() == b.len(),
        format!(
            "{} CSV files compared, {} differ {:?}",
            a.len(),
            differing.len(),
            differing
        ),
    )
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "directivity-beamwidth identity",
            limit: Duration::from_secs(1),
            run: product_identity,
        },
        Criterion {
            id: 2,
            name: "spacing/beam-count duality",
            limit: Duration::from_secs(1),
            run: scaling_duality,
        },
        Criterion {
            id: 3,
            name: "doubling search vs exhaustive oracle",
            limit: Duration::from_secs(5),
            run: search_oracle,
        },
        Criterion {
            id: 4,
            name: "probability monotone under doubling",
            limit: Duration::from_secs(5),
            run: probability_monotone,
        },
        Criterion {
            id: 5,
            name: "measured -3 dB beamwidth",
            limit: Duration::from_secs(10),
            run: beamwidth_validation,
        },
        Criterion {
            id: 6,
            name: "codebook pointing",
            limit: Duration::from_secs(30),
            run: codebook_pointing,
        },
        Criterion {
            id: 7,
            name: "average-power equality",
            limit: Duration::from_secs(10),
            run: power_equality,
        },
        Criterion {
            id: 8,
            name: "multiple-access feasibility",
            limit: Duration::from_secs(10),
            run: mac_feasibility,
        },
        Criterion {
            id: 9,
            name: "random feasible allocation oracle",
            limit: Duration::from_secs(60),
            run: optimality_oracle,
        },
        Criterion {
            id: 10,
            name: "rate region structure",
            limit: Duration::from_secs(60),
            run: region_structure,
        },
        Criterion {
            id: 11,
            name: "symmetric rate sweep",
            limit: Duration::from_secs(120),
            run: symmetric_sweep,
        },
        Criterion {
            id: 12,
            name: "harness determinism",
            limit: Duration::from_secs(60),
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".to_owned()));
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] AC{:<2} {} ({:.2} s, limit {} s): {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
