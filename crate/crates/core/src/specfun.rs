//! Special-function kernels: normalized sinc, Bessel `J0`, the restricted
//! hypergeometric function `2F1(-1/2, -1/2; 1; z)` and the regularized lower
//! incomplete gamma function.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

use crate::error::{Error, Result};

/// Stopping rules for the series and continued-fraction kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl EvalTolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_terms == 0 {
            return Err(Error::Domain(format!(
                "tolerances must be positive (abs {abs_tol}, rel {rel_tol}, terms {max_terms})"
            )));
        }
        Ok(Self { abs_tol, rel_tol, max_terms })
    }

    fn converged(&self, term: f64, sum: f64) -> bool {
        term.abs() <= self.abs_tol.min(self.rel_tol * sum.abs()).max(f64::EPSILON * sum.abs())
    }
}

impl Default for EvalTolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_terms: 1_000_000 }
    }
}

/// `sin(pi x) / (pi x)`, equal to 1 at the origin.
pub fn sinc_norm(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let arg = PI * x;
    if arg.abs() < 1e-4 {
        // Taylor tail keeps full precision where sin(arg)/arg would round.
        let a2 = arg * arg;
        return 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    }
    arg.sin() / arg
}

const J0_SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order zero.
///
/// Ascending series up to `|x| = 12`, Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= J0_SERIES_LIMIT {
        j0_series(x)
    } else {
        j0_asymptotic(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * k);
        sum += term;
        if term.abs() < 1e-17 {
            return sum;
        }
    }
}

fn j0_asymptotic(x: f64) -> f64 {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        a *= -(odd * odd) / (8.0 * k as f64 * x);
        if a.abs() >= prev {
            // Past the smallest term of the divergent expansion.
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            let sign = if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // cos(x - pi/4) and sin(x - pi/4) without rounding pi/4 into x.
    let cos_chi = (c + s) / SQRT_2;
    let sin_chi = (s - c) / SQRT_2;
    (FRAC_2_PI / x).sqrt() * (p * cos_chi - q * sin_chi)
}

const GAUSS_SUM_AT_ONE: f64 = 4.0 / PI;

/// `2F1(-1/2, -1/2; 1; z)` on `0 <= z <= 1`.
///
/// The power series is used for `z <= 1/2`; above that the function is
/// evaluated through the arithmetic-geometric mean, which converges
/// quadratically up to the endpoint where the series tail decays only like
/// `k^-2`. Within `1e-12` of `z = 1` the Gauss summation value `4/pi` is used.
pub fn gauss_2f1_half(z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1(-1/2,-1/2;1;z) requires 0 <= z <= 1, got {z}")));
    }
    if 1.0 - z < 1e-12 {
        return Ok(GAUSS_SUM_AT_ONE);
    }
    if z <= 0.5 {
        let full_precision = EvalTolerance { abs_tol: f64::MIN_POSITIVE, rel_tol: f64::EPSILON, ..Default::default() };
        return gauss_2f1_half_series(z, &full_precision);
    }
    Ok(gauss_2f1_half_agm(z))
}

/// Direct power series `sum ((-1/2)_k)^2 / (k!)^2 z^k`.
pub fn gauss_2f1_half_series(z: f64, tol: &EvalTolerance) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1(-1/2,-1/2;1;z) requires 0 <= z <= 1, got {z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..tol.max_terms {
        let kf = k as f64;
        let ratio = (kf - 0.5) / (kf + 1.0);
        term *= ratio * ratio * z;
        sum += term;
        if tol.converged(term, sum) {
            return Ok(sum);
        }
    }
    if 1.0 - z < 1e-12 {
        // Tail of the endpoint series: sum_{k>K} 1/(4 pi k^3) ~ 1/(8 pi K^2).
        let k = tol.max_terms as f64;
        return Ok(sum + 1.0 / (8.0 * PI * k * k));
    }
    Ok(sum)
}

/// `2F1(-1/2,-1/2;1;k^2) = (2/pi) [2 E(k) - (1 - k^2) K(k)]` with both
/// complete elliptic integrals from one AGM sweep.
fn gauss_2f1_half_agm(z: f64) -> f64 {
    let mut a = 1.0_f64;
    let mut b = (1.0 - z).sqrt();
    // sum_{n>=0} 2^(n-1) c_n^2, starting from c_0^2 = z.
    let mut weighted = 0.5 * z;
    let mut scale = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
        scale *= 2.0;
        weighted += scale * c * c;
        // Quadratic convergence: every later c is below (1e-9)^2 relative.
        if c.abs() <= 1e-9 * a {
            break;
        }
    }
    (1.0 + z - 2.0 * weighted) / a
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate half-plane.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x) = gamma(a, x) / Gamma(a)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    reg_lower_gamma_with(a, x, &EvalTolerance::default())
}

pub fn reg_lower_gamma_with(a: f64, x: f64, tol: &EvalTolerance) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("shape must be positive, got {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("argument must be nonnegative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    let p = if x < a + 1.0 {
        lower_gamma_series(a, x, log_prefactor, tol)?
    } else {
        1.0 - upper_gamma_fraction(a, x, log_prefactor, tol)?
    };
    Ok(p.clamp(0.0, 1.0))
}

fn lower_gamma_series(a: f64, x: f64, log_prefactor: f64, tol: &EvalTolerance) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..tol.max_terms {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * f64::EPSILON {
            return Ok(sum * log_prefactor.exp());
        }
    }
    Err(Error::Domain(format!("incomplete gamma series did not converge for a = {a}, x = {x}")))
}

/// Modified Lentz evaluation of the continued fraction for `Q(a, x)`.
fn upper_gamma_fraction(a: f64, x: f64, log_prefactor: f64, tol: &EvalTolerance) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=tol.max_terms {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(log_prefactor.exp() * h);
        }
    }
    Err(Error::Domain(format!("incomplete gamma continued fraction did not converge for a = {a}, x = {x}")))
}
