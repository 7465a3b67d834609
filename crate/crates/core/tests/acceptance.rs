//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Run with `cargo test -p cris-core --test acceptance`. Expensive Monte Carlo
//! batches are shared between criteria through [`Runs`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cris_core::analytic::{
    analyze, gamma_fit, moment_m1, moment_m2_iso, moment_m2_quad4, moments_m3_m4, outage_probability,
    rect_distance_pdf, Analysis, QuadratureSpec,
};
use cris_core::mcsim::{
    compute_y, norm_form_snr, optimal_phase_profile, optimal_snr_sample, snr_with_profile, GridSpec, ReplicateBatch,
    Simulator,
};
use cris_core::quadrature::{integrate, AdaptiveRule};
use cris_core::sysmodel::{CorrelationKind, SpatialCorrelation, SurfaceGeometry, SystemConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const KINDS: [CorrelationKind; 2] = [CorrelationKind::Sinc, CorrelationKind::Jakes];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Reference layout with the given surface; the BS antennas share the
/// surface correlation model.
fn config(area: f64, aspect: f64, kind: CorrelationKind, kappa: f64) -> SystemConfig {
    let mut cfg = SystemConfig::default().with_geometry(SurfaceGeometry::with_area(area, aspect).unwrap());
    cfg.correlation = cfg.correlation.with_kind(kind).with_kappa(kappa);
    cfg.bs_correlation = cfg.correlation;
    cfg
}

fn analysis(cfg: &SystemConfig) -> Analysis {
    analyze(cfg, &QuadratureSpec::default()).unwrap()
}

/// Monte Carlo batches keyed by configuration, grid and replicate count.
#[derive(Default)]
struct Runs {
    cache: HashMap<String, (SystemConfig, ReplicateBatch)>,
}

impl Runs {
    fn get(&mut self, cfg: &SystemConfig, grid: &GridSpec, n: usize) -> &ReplicateBatch {
        let key = format!("{cfg:?}|{}x{}|{n}", grid.nx, grid.ny);
        &self
            .cache
            .entry(key)
            .or_insert_with(|| (cfg.clone(), Simulator::new(cfg, grid).unwrap().run(n, SEED).unwrap()))
            .1
    }
}

fn within_se(mc: f64, se: f64, exact: f64) -> f64 {
    (mc - exact).abs() / se
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn c1_moment_oracles() -> Outcome {
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for aspect in [1.0, 2.0, 20.0] {
        let geom = SurfaceGeometry::with_area(0.2, aspect).unwrap();
        for kind in KINDS {
            for kappa in [0.1, 0.5, 1.0] {
                let model = SystemConfig::default().correlation.with_kind(kind).with_kappa(kappa);
                let iso = moment_m2_iso(&geom, &model, 1.0, &quad).unwrap();
                let quad4 = moment_m2_quad4(&geom, &model, 1.0, &quad).unwrap();
                worst = worst.max(((iso - quad4) / quad4).abs());
            }
        }
    }
    Outcome::new(worst < 1e-4, format!("max |iso - 4D| / 4D = {worst:.2e} over 18 cases (< 1e-4)"))
}

/// Fully uncorrelated surface: `rho(0) = 1`, zero elsewhere.
struct White;

impl SpatialCorrelation for White {
    fn rho(&self, separation_m: f64) -> f64 {
        if separation_m == 0.0 {
            1.0
        } else {
            0.0
        }
    }

    fn correlation_length_m(&self) -> Option<f64> {
        None
    }
}

fn c2_closed_form_corners() -> Outcome {
    let quad = QuadratureSpec::default();
    let beta = SystemConfig::default().gains().unwrap().beta_ur;
    let (mut full, mut white) = (0.0f64, 0.0f64);
    for aspect in [1.0, 2.0, 20.0] {
        let geom = SurfaceGeometry::with_area(0.2, aspect).unwrap();
        let exact = beta * geom.area_m2().powi(2);
        for kind in KINDS {
            let model = SystemConfig::default().correlation.with_kind(kind).with_kappa(0.0);
            for m2 in [
                moment_m2_iso(&geom, &model, beta, &quad).unwrap(),
                moment_m2_quad4(&geom, &model, beta, &quad).unwrap(),
            ] {
                full = full.max((m2 / exact - 1.0).abs());
            }
        }
        let m1 = moment_m1(&geom, beta);
        let m2 = moment_m2_iso(&geom, &White, beta, &quad).unwrap();
        white = white.max((m2 / (m1 * m1) - 1.0).abs());
    }
    Outcome::new(
        full < 1e-8 && white < 1e-8,
        format!("kappa=0 rel err {full:.1e}, uncorrelated rel err {white:.1e} (< 1e-8)"),
    )
}

fn c3_mean_amplitude(runs: &mut Runs) -> Outcome {
    let cfg = SystemConfig::default();
    let m1 = moment_m1(&cfg.geometry, cfg.gains().unwrap().beta_ur);
    let mut pass = true;
    let mut parts = Vec::new();
    for side in [16, 64] {
        let grid = GridSpec::new(&cfg.geometry, side, side).unwrap();
        let y = runs.get(&cfg, &grid, 10_000).summary.y;
        let z = within_se(y.mean, y.std_error, m1);
        pass &= z < 3.0;
        parts.push(format!("{side}x{side}: {z:.2} SE"));
    }
    Outcome::new(pass, format!("|mean Y - m1| {} (< 3 SE)", parts.join(", ")))
}

fn c4_mean_snr(runs: &mut Runs) -> Outcome {
    let areas = [0.1, 0.2, 0.3, 0.4];
    let mut worst = 0.0f64;
    let mut slopes = Vec::new();
    for kind in KINDS {
        let mut curve = Vec::new();
        for area in areas {
            let cfg = config(area, 1.0, kind, 1.0);
            let a = analysis(&cfg);
            let grid = GridSpec::new(&cfg.geometry, 64, 64).unwrap();
            let snr = runs.get(&cfg, &grid, 10_000).summary.snr;
            worst = worst.max(within_se(snr.mean, snr.std_error, a.snr.mu1));
            let direct_only = cfg.transmit_snr * a.link.antennas as f64 * a.gains.beta_d;
            curve.push((area, a.snr.mu1 - direct_only));
        }
        slopes.push((kind, log_slope(&curve[areas.len() / 2..])));
    }
    let slopes_ok = slopes.iter().all(|(_, s)| (1.8..=2.05).contains(s));
    let text: Vec<String> = slopes.iter().map(|(k, s)| format!("{} {s:.3}", k.label())).collect();
    Outcome::new(
        worst < 3.0 && slopes_ok,
        format!("worst |MC - mu1| = {worst:.2} SE (< 3); log-log slope {} (in [1.8, 2.05])", text.join(", ")),
    )
}

fn c5_jensen(runs: &mut Runs) -> Outcome {
    let mut ratios = Vec::new();
    for kappa in [0.0, 0.1, 0.5, 1.0] {
        let cfg = config(0.4, 1.0, CorrelationKind::Jakes, kappa);
        let a = analysis(&cfg);
        ratios.push(a.det / a.se_bound);
        let grid = GridSpec::new(&cfg.geometry, 64, 64).unwrap();
        runs.get(&cfg, &grid, 10_000);
    }
    // Every Monte Carlo batch of the suite so far.
    let violations = runs.cache.values().filter(|(cfg, batch)| analysis(cfg).se_bound < batch.summary.se.mean).count();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().unwrap();
    let pct: Vec<String> = ratios.iter().map(|r| format!("{:.3}%", 100.0 * r)).collect();
    Outcome::new(
        violations == 0 && decreasing && last < 0.01,
        format!(
            "SEB < MC mean SE on {violations} of {} configs; DET/SEB at kappa 0, 0.1, 0.5, 1 = [{}] (strictly decreasing, last < 1%)",
            runs.cache.len(),
            pct.join(", ")
        ),
    )
}

fn c6_outage() -> Outcome {
    let mut worst = 0.0f64;
    let mut narrower = true;
    let mut spreads = Vec::new();
    for area in [0.3, 0.4] {
        for kind in KINDS {
            let mut spread = Vec::new();
            for aspect in [1.0, 20.0] {
                let cfg = config(area, aspect, kind, 1.0);
                let a = analysis(&cfg);
                let fit = a.gamma.unwrap();
                let grid = GridSpec::isotropic(&cfg.geometry, 4096).unwrap();
                let batch = Simulator::new(&cfg, &grid).unwrap().run(100_000, SEED).unwrap();
                let cdf = batch.empirical_cdf();
                worst = worst.max(cdf.ks_distance(|x| outage_probability(&fit, x)));
                spread.push((cdf.quantile(0.9) - cdf.quantile(0.1)) / cdf.quantile(0.5));
            }
            if kind == CorrelationKind::Jakes {
                narrower &= spread[1] < spread[0];
                spreads.push(format!("A={area}: {:.4} vs {:.4}", spread[1], spread[0]));
            }
        }
    }
    Outcome::new(
        worst < 0.03 && narrower,
        format!("max KS = {worst:.4} (< 0.03); Jakes 10-90% spread / median, 20:1 vs 1:1: {}", spreads.join(", ")),
    )
}

fn c7_hardening() -> Outcome {
    let setups = [("A", 1.0, 40.0, 27.0), ("B", 1.0, 40.0, 53.0), ("C", 1.0, 5.0, 27.0)];
    let areas = [0.1, 0.2, 0.3, 0.4];
    let kappas = [0.25, 0.5, 1.0];
    let mut cv2 = HashMap::new();
    let mut mc_worst = 0.0f64;
    for (name, dy, drb, dx) in setups {
        for &area in &areas {
            for &kappa in &kappas {
                let mut cfg = config(area, 1.0, CorrelationKind::Jakes, kappa);
                cfg.link = cfg.link.with_layout(dy, drb, dx);
                let a = analysis(&cfg);
                cv2.insert((name, area.to_bits(), kappa.to_bits()), a.cv2);
                if area >= 0.2 {
                    let grid = GridSpec::isotropic(&cfg.geometry, 1024).unwrap();
                    let mc = Simulator::new(&cfg, &grid).unwrap().run(10_000, SEED).unwrap().summary.cv2;
                    mc_worst = mc_worst.max((mc / a.cv2 - 1.0).abs());
                }
            }
        }
    }
    let at = |s: &str, a: f64, k: f64| cv2[&(s, a.to_bits(), k.to_bits())];
    let mut in_area = true;
    let mut in_kappa = true;
    let mut b_below_a = true;
    for (name, ..) in setups {
        for &k in &kappas {
            in_area &= areas.windows(2).all(|w| at(name, w[1], k) <= at(name, w[0], k));
        }
        for &a in &areas {
            in_kappa &= kappas.windows(2).all(|w| at(name, a, w[1]) <= at(name, a, w[0]));
            for &k in &kappas[1..] {
                b_below_a &= at("B", a, k) < at("A", a, k);
            }
        }
    }
    Outcome::new(
        in_area && in_kappa && b_below_a && mc_worst < 0.15,
        format!(
            "nonincreasing in area: {in_area}, in kappa: {in_kappa}; B < A: {b_below_a}; worst |MC/fit - 1| = {:.1}% (< 15%)",
            100.0 * mc_worst
        ),
    )
}

fn c8_per_sample() -> Outcome {
    let cfg = SystemConfig::default();
    let grid = GridSpec::new(&cfg.geometry, 16, 16).unwrap();
    let sim = Simulator::new(&cfg, &grid).unwrap();
    let a_b = &sim.direct.steering;
    let mut worst = 0.0f64;
    let mut violations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for index in 0..10_000u64 {
        let (field, h_d) = sim.draw(SEED, index);
        let y = compute_y(&field, &grid);
        let profile = optimal_phase_profile(&field, &h_d, a_b).unwrap();
        let closed = optimal_snr_sample(&h_d, y, a_b, &sim.link);
        let norm = norm_form_snr(&h_d, y, profile.omega, a_b, &sim.link);
        worst = worst.max(((closed - norm) / norm).abs());
        if index < 100 {
            let best = snr_with_profile(&field, &grid, &profile.phases, &h_d, a_b, &sim.link);
            for _ in 0..100 {
                let random: Vec<Complex64> =
                    (0..grid.len()).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect();
                if snr_with_profile(&field, &grid, &random, &h_d, a_b, &sim.link) > best {
                    violations += 1;
                }
            }
        }
    }
    Outcome::new(
        worst < 1e-10 && violations == 0,
        format!("max rel gap closed vs norm form {worst:.1e} (< 1e-10); {violations} of 10000 random profiles win"),
    )
}

fn c9_moment_recursion() -> Outcome {
    let mut worst = 0.0f64;
    for k in [0.5, 1.0, 2.0, 7.0] {
        for theta in [0.1, 1.0, 10.0] {
            let m1 = k * theta;
            let m2 = k * (k + 1.0) * theta * theta;
            let m3 = m2 * (k + 2.0) * theta;
            let m4 = m3 * (k + 3.0) * theta;
            let (g3, g4) = moments_m3_m4(m1, m2).unwrap();
            worst = worst.max((g3 / m3 - 1.0).abs()).max((g4 / m4 - 1.0).abs());
            let fit = gamma_fit(m1, m2).unwrap();
            worst = worst.max((fit.alpha_g / k - 1.0).abs());
        }
    }
    Outcome::new(worst < 1e-12, format!("max rel err of m3, m4 and fitted shape {worst:.1e} (< 1e-12)"))
}

fn c10_distance_plumbing() -> Outcome {
    let rule = AdaptiveRule { rel_tol: 1e-13, abs_tol: 1e-300, max_intervals: 4000 };
    let moment = |geom: &SurfaceGeometry, power: i32| {
        let c = geom.canonical();
        let breaks = [0.0, c.height_m(), c.width_m(), c.diagonal_m()];
        integrate(|r| r.powi(power) * rect_distance_pdf(geom, r), &breaks, &rule).unwrap().value
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let geom = SurfaceGeometry::with_area(rng.random_range(0.01..4.0), rng.random_range(1.0..50.0)).unwrap();
        worst = worst.max((moment(&geom, 0) - 1.0).abs());
    }
    let mean = moment(&SurfaceGeometry::new(1.0, 1.0).unwrap(), 1);
    let n = 10_000_000u64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let (x1, y1, x2, y2): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
        let d = (x1 - x2).hypot(y1 - y2);
        sum += d;
        sum_sq += d * d;
    }
    let mc = sum / n as f64;
    let se = ((sum_sq / n as f64 - mc * mc) / (n - 1) as f64).sqrt();
    let z = within_se(mc, se, mean);
    Outcome::new(
        worst < 1e-10 && z < 3.0,
        format!("max |int f_s - 1| = {worst:.1e} (< 1e-10); unit-square mean {mean:.7} vs MC {mc:.7}: {z:.2} SE (< 3)"),
    )
}

type Criterion = Box<dyn FnOnce(&mut Runs) -> Outcome>;

fn main() -> ExitCode {
    println!("acceptance suite, seed {SEED}");
    let mut runs = Runs::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("moment-oracle equivalence", Box::new(|_| c1_moment_oracles())),
        ("closed-form corners", Box::new(|_| c2_closed_form_corners())),
        ("mean-Y exactness", Box::new(c3_mean_amplitude)),
        ("mean SNR and area scaling", Box::new(c4_mean_snr)),
        ("Jensen bound and DET ordering", Box::new(c5_jensen)),
        ("gamma outage approximation", Box::new(|_| c6_outage())),
        ("channel hardening", Box::new(|_| c7_hardening())),
        ("per-sample identity and optimality", Box::new(|_| c8_per_sample())),
        ("moment recursion", Box::new(|_| c9_moment_recursion())),
        ("distance-distribution plumbing", Box::new(|_| c10_distance_plumbing())),
    ];
    let mut failures = 0;
    for (index, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check(&mut runs);
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!outcome.pass);
        println!("[{verdict}] {:>2} {name}: {} [{:.1} s]", index + 1, outcome.detail, start.elapsed().as_secs_f64());
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
