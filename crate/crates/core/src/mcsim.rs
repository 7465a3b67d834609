//! Monte Carlo oracle for the optimal SNR.
//!
//! The continuous surface is discretized at cell centres, the correlated
//! UE-RIS field is drawn through a low-rank eigen-factor of its covariance,
//! and every replicate applies the SNR-optimal phase design, for which the
//! surface contributes only through `Y = int int |h_ur|`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytic::LinkStatistics;
use crate::error::{Error, Result};
use crate::linalg::factor_correlation;
use crate::sysmodel::{DirectChannel, SpatialCorrelation, SurfaceGeometry, SystemConfig};

/// Largest tolerated fraction of eigenvalue mass removed by clamping.
pub const MAX_CLIPPED_MASS: f64 = 1e-6;

/// Dropped trailing modes may change any correlation entry by at most this.
const TRUNCATION_TOL: f64 = 1e-11;

/// Replicates per deterministic work unit.
const BATCH: usize = 128;

/// Midpoint grid over the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub cell_area: f64,
    width_m: f64,
    height_m: f64,
}

impl GridSpec {
    pub fn new(geom: &SurfaceGeometry, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Config(format!("grid needs at least 2 x 2 points, got {nx} x {ny}")));
        }
        Ok(Self {
            nx,
            ny,
            cell_area: geom.area_m2() / (nx * ny) as f64,
            width_m: geom.width_m(),
            height_m: geom.height_m(),
        })
    }

    /// Grid with (nearly) square cells and about `points` cells in total.
    pub fn isotropic(geom: &SurfaceGeometry, points: usize) -> Result<Self> {
        let pitch = (geom.area_m2() / points as f64).sqrt();
        let nx = ((geom.width_m() / pitch).round() as usize).max(2);
        let ny = ((geom.height_m() / pitch).round() as usize).max(2);
        Self::new(geom, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell centre of flat index `ix * ny + iy`.
    pub fn point(&self, index: usize) -> (f64, f64) {
        let (ix, iy) = (index / self.ny, index % self.ny);
        ((ix as f64 + 0.5) * self.width_m / self.nx as f64, (iy as f64 + 0.5) * self.height_m / self.ny as f64)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Sampler of the UE-RIS field on a grid: `h = sqrt(beta_ur) L z`.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    /// Correlation factor `L` (`points x rank`), `L L^T ~ Sigma`.
    factor: Mat<f64>,
    pub grid: GridSpec,
    pub beta_ur: f64,
    /// Negative eigenvalue mass over total mass.
    pub clipped_mass: f64,
}

impl FieldSampler {
    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn factor(&self) -> &Mat<f64> {
        &self.factor
    }

    fn draw_latent(&self, rng: &mut ChaCha8Rng, re: &mut [f64], im: &mut [f64]) {
        for (r, i) in re.iter_mut().zip(im.iter_mut()) {
            let (a, b) = complex_normal(rng);
            *r = a;
            *i = b;
        }
    }
}

pub fn build_surface_covariance<C: SpatialCorrelation + ?Sized>(
    geom: &SurfaceGeometry,
    grid: &GridSpec,
    model: &C,
    beta_ur: f64,
) -> Result<FieldSampler> {
    if !(beta_ur > 0.0) {
        return Err(Error::Domain(format!("beta_ur must be positive, got {beta_ur}")));
    }
    let expected = GridSpec::new(geom, grid.nx, grid.ny)?;
    if expected != *grid {
        return Err(Error::Config("grid was built for a different surface".into()));
    }
    let points = grid.points();
    let n = points.len();
    let sigma = Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            let (xi, yi) = points[i];
            let (xj, yj) = points[j];
            model.rho((xi - xj).hypot(yi - yj))
        }
    });
    let repaired = factor_correlation(&sigma, f64::INFINITY, TRUNCATION_TOL)?;
    if repaired.clipped_mass > MAX_CLIPPED_MASS {
        return Err(Error::CovarianceRepairFailure(format!(
            "clipped eigenvalue mass {:.3e} exceeds {MAX_CLIPPED_MASS:.0e}",
            repaired.clipped_mass
        )));
    }
    Ok(FieldSampler { factor: repaired.factor, grid: *grid, beta_ur, clipped_mass: repaired.clipped_mass })
}

/// Circular complex Gaussian with unit variance, as `(re, im)`.
fn complex_normal(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (a * std::f64::consts::FRAC_1_SQRT_2, b * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn sample_field(sampler: &FieldSampler, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let rank = sampler.rank();
    let mut re = vec![0.0; rank];
    let mut im = vec![0.0; rank];
    sampler.draw_latent(rng, &mut re, &mut im);
    let scale = sampler.beta_ur.sqrt();
    let l = &sampler.factor;
    (0..l.nrows())
        .map(|i| {
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..rank {
                a += l[(i, k)] * re[k];
                b += l[(i, k)] * im[k];
            }
            Complex64::new(scale * a, scale * b)
        })
        .collect()
}

/// Riemann sum `cell_area * sum |h|` of the field magnitude.
pub fn compute_y(field: &[Complex64], grid: &GridSpec) -> f64 {
    assert_eq!(field.len(), grid.len(), "field does not match the grid");
    grid.cell_area * field.iter().map(|h| h.norm()).sum::<f64>()
}

/// `h_d ~ CN(0, beta_d R_d)`.
pub fn sample_direct_channel(direct: &DirectChannel, beta_d: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let l = &direct.factor;
    let z: Vec<(f64, f64)> = (0..l.ncols()).map(|_| complex_normal(rng)).collect();
    let scale = beta_d.sqrt();
    (0..l.nrows())
        .map(|i| {
            let (mut a, mut b) = (0.0, 0.0);
            for (k, (zr, zi)) in z.iter().enumerate() {
                a += l[(i, k)] * zr;
                b += l[(i, k)] * zi;
            }
            Complex64::new(scale * a, scale * b)
        })
        .collect()
}

fn projection(a_b: &[Complex64], h_d: &[Complex64]) -> Complex64 {
    a_b.iter().zip(h_d).map(|(a, h)| a.conj() * h).sum()
}

/// Reflection coefficients of the SNR-optimal design (surface steering taken as 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    /// Common phase `a_b^H h_d / |a_b^H h_d|`.
    pub omega: Complex64,
    /// `Phi` at every grid point.
    pub phases: Vec<Complex64>,
}

pub fn optimal_phase_profile(field: &[Complex64], h_d: &[Complex64], a_b: &[Complex64]) -> Result<PhaseProfile> {
    let p = projection(a_b, h_d);
    if p.norm() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let omega = p / p.norm();
    let phases = field
        .iter()
        .map(|h| {
            let mag = h.norm();
            if mag > 0.0 {
                omega * h.conj() / mag
            } else {
                omega
            }
        })
        .collect();
    Ok(PhaseProfile { omega, phases })
}

/// `gamma ||h_d + sqrt(beta_rb) a_b sum_i cell Phi_i h_i||^2` for any profile.
pub fn snr_with_profile(
    field: &[Complex64],
    grid: &GridSpec,
    phases: &[Complex64],
    h_d: &[Complex64],
    a_b: &[Complex64],
    link: &LinkStatistics,
) -> f64 {
    let reflected: Complex64 = field.iter().zip(phases).map(|(h, p)| p * h).sum::<Complex64>() * grid.cell_area;
    let gain = link.beta_rb.sqrt() * reflected;
    link.transmit_snr * h_d.iter().zip(a_b).map(|(h, a)| (h + a * gain).norm_sqr()).sum::<f64>()
}

/// Optimal SNR `gamma (h_d^H h_d + M beta_rb Y^2 + 2 sqrt(beta_rb) Y |a_b^H h_d|)`.
pub fn optimal_snr_sample(h_d: &[Complex64], y: f64, a_b: &[Complex64], link: &LinkStatistics) -> f64 {
    let power: f64 = h_d.iter().map(|h| h.norm_sqr()).sum();
    let m = a_b.len() as f64;
    let proj = projection(a_b, h_d).norm();
    link.transmit_snr * (power + m * link.beta_rb * y * y + 2.0 * link.beta_rb.sqrt() * y * proj)
}

/// Norm form `gamma ||h_d + sqrt(beta_rb) a_b Y omega||^2` of the optimal SNR.
pub fn norm_form_snr(h_d: &[Complex64], y: f64, omega: Complex64, a_b: &[Complex64], link: &LinkStatistics) -> f64 {
    let gain = link.beta_rb.sqrt() * y * omega;
    link.transmit_snr * h_d.iter().zip(a_b).map(|(h, a)| (h + a * gain).norm_sqr()).sum::<f64>()
}

/// Mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl SampleStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance =
            if samples.len() > 1 { samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { mean, variance, std_error: (variance / n).sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    pub snr: SampleStats,
    pub y: SampleStats,
    /// Spectral efficiency `log2(1 + SNR)`.
    pub se: SampleStats,
    /// `Var[||h||^2] / E[||h||^2]^2`, identical for the SNR.
    pub cv2: f64,
}

impl BatchSummary {
    pub fn from_samples(y: &[f64], snr: &[f64]) -> Self {
        let se: Vec<f64> = snr.iter().map(|s| (1.0 + s).log2()).collect();
        let snr_stats = SampleStats::from_samples(snr);
        Self {
            snr: snr_stats,
            y: SampleStats::from_samples(y),
            se: SampleStats::from_samples(&se),
            cv2: snr_stats.variance / (snr_stats.mean * snr_stats.mean),
        }
    }
}

/// Replicates of `(Y, SNR)` and their summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateBatch {
    pub n: usize,
    pub seed: u64,
    pub y_samples: Vec<f64>,
    pub snr_samples: Vec<f64>,
    pub summary: BatchSummary,
}

impl ReplicateBatch {
    pub fn empirical_cdf(&self) -> EmpiricalCdf {
        EmpiricalCdf::new(&self.snr_samples)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for replicate `index`; independent of scheduling.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Surface sampler, direct channel and link statistics of one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub sampler: FieldSampler,
    pub direct: DirectChannel,
    pub link: LinkStatistics,
}

impl Simulator {
    pub fn new(cfg: &SystemConfig, grid: &GridSpec) -> Result<Self> {
        cfg.validate()?;
        let gains = cfg.gains()?;
        let direct = cfg.direct_channel()?;
        let sampler = build_surface_covariance(&cfg.geometry, grid, &cfg.correlation, gains.beta_ur)?;
        let link = LinkStatistics::new(cfg.transmit_snr, &gains, &direct);
        Ok(Self { sampler, direct, link })
    }

    /// Draw one replicate's field and direct channel from its own generator.
    pub fn draw(&self, seed: u64, index: u64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut rng = replicate_rng(seed, index);
        let field = sample_field(&self.sampler, &mut rng);
        let h_d = sample_direct_channel(&self.direct, self.link.beta_d, &mut rng);
        (field, h_d)
    }

    /// `(Y, SNR)` for replicates `start..end`; matches [`Simulator::draw`].
    fn run_block(&self, seed: u64, start: usize, end: usize) -> Vec<(f64, f64)> {
        let count = end - start;
        let rank = self.sampler.rank();
        let mut latent = Mat::<f64>::zeros(rank, 2 * count);
        let mut direct = Vec::with_capacity(count);
        let mut re = vec![0.0; rank];
        let mut im = vec![0.0; rank];
        for k in 0..count {
            let mut rng = replicate_rng(seed, (start + k) as u64);
            self.sampler.draw_latent(&mut rng, &mut re, &mut im);
            for j in 0..rank {
                latent[(j, 2 * k)] = re[j];
                latent[(j, 2 * k + 1)] = im[j];
            }
            direct.push(sample_direct_channel(&self.direct, self.link.beta_d, &mut rng));
        }
        let points = self.sampler.grid.len();
        let mut field = Mat::<f64>::zeros(points, 2 * count);
        matmul(&mut field, Accum::Replace, &self.sampler.factor, &latent, 1.0, Par::Seq);

        let amplitude = self.sampler.beta_ur.sqrt() * self.sampler.grid.cell_area;
        let a_b = &self.direct.steering;
        (0..count)
            .map(|k| {
                let (re_col, im_col) = (field.col(2 * k), field.col(2 * k + 1));
                let sum: f64 = re_col.iter().zip(im_col.iter()).map(|(a, b)| a.hypot(*b)).sum();
                let y = amplitude * sum;
                (y, optimal_snr_sample(&direct[k], y, a_b, &self.link))
            })
            .collect()
    }

    /// `n` replicates on the current rayon pool.
    pub fn run(&self, n: usize, seed: u64) -> Result<ReplicateBatch> {
        if n == 0 {
            return Err(Error::Config("at least one replicate is required".into()));
        }
        let blocks: Vec<(usize, usize)> = (0..n).step_by(BATCH).map(|s| (s, (s + BATCH).min(n))).collect();
        let pairs: Vec<(f64, f64)> = blocks
            .par_iter()
            .map(|&(s, e)| self.run_block(seed, s, e))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        let (y_samples, snr_samples): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let summary = BatchSummary::from_samples(&y_samples, &snr_samples);
        Ok(ReplicateBatch { n, seed, y_samples, snr_samples, summary })
    }

    /// `n` replicates on a dedicated pool of `workers` threads.
    pub fn run_with_workers(&self, n: usize, seed: u64, workers: usize) -> Result<ReplicateBatch> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| self.run(n, seed))
    }
}

/// `n` independent replicates of the optimal-design SNR for `cfg`.
pub fn run_replicates(cfg: &SystemConfig, grid: &GridSpec, n: usize, seed: u64) -> Result<ReplicateBatch> {
    Simulator::new(cfg, grid)?.run(n, seed)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Self {
        assert!(!samples.is_empty(), "empirical CDF of an empty sample");
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Empirical quantile (order statistic) at probability `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    /// Kolmogorov-Smirnov distance `sup |F_n - F|` to a continuous CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let f = cdf(x);
            worst = worst.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
            i = j;
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::{CorrelationKind, IsotropicCorrelation};

    fn geom() -> SurfaceGeometry {
        SurfaceGeometry::with_area(0.2, 1.0).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = geom();
        let grid = GridSpec::new(&g, 4, 3).unwrap();
        assert_eq!(grid.len(), 12);
        assert!((grid.cell_area * 12.0 - 0.2).abs() < 1e-15);
        let (x, y) = grid.point(0);
        assert!((x - g.width_m() / 8.0).abs() < 1e-15 && (y - g.height_m() / 6.0).abs() < 1e-15);
        assert!(GridSpec::new(&g, 1, 4).is_err());
        let wide = SurfaceGeometry::with_area(0.4, 20.0).unwrap();
        let grid = GridSpec::isotropic(&wide, 1000).unwrap();
        assert!(grid.nx > 10 * grid.ny);
        assert!((grid.len() as f64 - 1000.0).abs() < 100.0);
    }

    #[test]
    fn y_of_simple_fields() {
        let grid = GridSpec::new(&geom(), 5, 4).unwrap();
        let ones = vec![Complex64::from_polar(1.0, 0.7); 20];
        assert!((compute_y(&ones, &grid) - 0.2).abs() < 1e-15);
        assert_eq!(compute_y(&vec![Complex64::new(0.0, 0.0); 20], &grid), 0.0);
    }

    #[test]
    fn perfect_correlation_gives_rank_one_field() {
        let model = IsotropicCorrelation::new(CorrelationKind::Jakes, 0.0, 0.0517).unwrap();
        let grid = GridSpec::new(&geom(), 6, 6).unwrap();
        let sampler = build_surface_covariance(&geom(), &grid, &model, 2e-6).unwrap();
        assert_eq!(sampler.rank(), 1);
        let field = sample_field(&sampler, &mut replicate_rng(3, 0));
        for h in &field {
            assert!((h - field[0]).norm() < 1e-12 * field[0].norm());
        }
    }

    #[test]
    fn empirical_cdf_examples() {
        let cdf = EmpiricalCdf::new(&[3.0, 1.0, 2.0, 5.0, 4.0]);
        assert_eq!(cdf.eval(0.5), 0.0);
        assert_eq!(cdf.eval(10.0), 1.0);
        assert_eq!(cdf.eval(3.0), 0.6);
        assert_eq!(cdf.quantile(0.5), 3.0);
        let uniform = |x: f64| (x / 6.0).clamp(0.0, 1.0);
        let ks = cdf.ks_distance(uniform);
        assert!((ks - (1.0 / 6.0)).abs() < 1e-12, "{ks}");
    }

    #[test]
    fn degenerate_projection() {
        let a_b = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let h_d = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let field = vec![Complex64::new(0.5, 0.5)];
        assert_eq!(optimal_phase_profile(&field, &h_d, &a_b), Err(Error::DegenerateChannel));
    }
}
