//! Closed-form and quadrature statistics of the optimal SNR.
//!
//! The surface enters the optimal SNR only through the aggregate amplitude
//! `Y = int int |h_ur(x, y)| dy dx`. Its first moment is closed form; the second
//! is an integral of `2F1(-1/2, -1/2; 1; |rho|^2)` over pairs of surface
//! points, reduced to one dimension for isotropic correlation by weighting
//! with the density of the distance between two uniform points in the
//! rectangle. Third and fourth moments follow from a gamma model of `Y`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate, AdaptiveRule};
use crate::specfun::{gauss_2f1_half, reg_lower_gamma};
use crate::sysmodel::{ChannelGains, DirectChannel, SpatialCorrelation, SurfaceGeometry, SystemConfig};

/// Moments `m_k = E[Y^k]`, `k = 1..4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl YMoments {
    /// Complete `(m1, m2)` with the gamma-model third and fourth moments.
    pub fn from_first_two(m1: f64, m2: f64) -> Result<Self> {
        let (m3, m4) = moments_m3_m4(m1, m2)?;
        Ok(Self { m1, m2, m3, m4 })
    }

    pub fn variance(&self) -> f64 {
        self.m2 - self.m1 * self.m1
    }
}

/// First two moments of the optimal SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrMoments {
    pub mu1: f64,
    pub mu2: f64,
}

impl SnrMoments {
    pub fn variance(&self) -> f64 {
        self.mu2 - self.mu1 * self.mu1
    }
}

/// Method-of-moments gamma law `G(alpha_g, beta_g)` (shape, rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub alpha_g: f64,
    pub beta_g: f64,
}

impl GammaFit {
    pub fn mean(&self) -> f64 {
        self.alpha_g / self.beta_g
    }

    pub fn variance(&self) -> f64 {
        self.alpha_g / (self.beta_g * self.beta_g)
    }
}

/// Tolerances for the 1-D reduced integral and the 4-D validation rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Gauss-Legendre nodes per panel and dimension of the 4-D rule.
    pub nodes_4d: usize,
    /// Maximum 4-D panel width in correlation lengths.
    pub panel_width: f64,
    /// Subdivision budget of the adaptive 1-D rule.
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-14, nodes_4d: 12, panel_width: 1.0, max_intervals: 4000 }
    }
}

impl QuadratureSpec {
    fn adaptive_rule(&self) -> AdaptiveRule {
        AdaptiveRule { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_intervals: self.max_intervals }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0 && self.abs_tol > 0.0) {
            return Err(Error::QuadratureFailure(format!(
                "tolerances must satisfy 0 < rel_tol < 1 and abs_tol > 0 (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.nodes_4d < 8 {
            return Err(Error::QuadratureFailure(format!(
                "the 4-D rule needs at least 8 nodes per panel, got {}",
                self.nodes_4d
            )));
        }
        if !(self.panel_width > 0.0) {
            return Err(Error::QuadratureFailure(format!("panel width must be positive, got {}", self.panel_width)));
        }
        Ok(())
    }
}

/// `E[Y] = (1/2) sqrt(pi beta_ur) W H`.
pub fn moment_m1(geom: &SurfaceGeometry, beta_ur: f64) -> f64 {
    0.5 * (PI * beta_ur).sqrt() * geom.area_m2()
}

/// Density of the distance between two independent uniform points in the
/// rectangle. Symmetric in `W` and `H`.
pub fn rect_distance_pdf(geom: &SurfaceGeometry, r: f64) -> f64 {
    let c = geom.canonical();
    let (w, h) = (c.width_m(), c.height_m());
    let diag = c.diagonal_m();
    if !(r >= 0.0) || r > diag {
        return 0.0;
    }
    let bracket = if r < h {
        0.5 * PI * w * h - (w + h) * r + 0.5 * r * r
    } else if r < w {
        w * h * (h / r).asin() - w * r + w * (r * r - h * h).sqrt() - 0.5 * h * h
    } else {
        w * h * ((h / r).min(1.0).asin() - (w / r).min(1.0).acos()) - 0.5 * (w * w + h * h)
            + w * (r * r - h * h).max(0.0).sqrt()
            - 0.5 * r * r
            + h * (r * r - w * w).max(0.0).sqrt()
    };
    (4.0 * r / (w * w * h * h) * bracket).max(0.0)
}

/// `2F1(-1/2,-1/2;1;|rho|^2)` with `|rho|^2` clamped into `[0, 1]`.
fn amplitude_correlation_factor(rho: f64) -> f64 {
    gauss_2f1_half((rho * rho).clamp(0.0, 1.0)).expect("argument clamped into [0, 1]")
}

fn validate_beta(beta_ur: f64) -> Result<()> {
    if !(beta_ur > 0.0 && beta_ur.is_finite()) {
        return Err(Error::Domain(format!("beta_ur must be positive, got {beta_ur}")));
    }
    Ok(())
}

/// `E[Y^2]` for isotropic correlation as `W^2 H^2 int g(r) f_s(r) dr`.
///
/// The integral is split at `H` and `W` (canonical orientation, `H <= W`)
/// where the distance density has derivative kinks.
pub fn moment_m2_iso<C: SpatialCorrelation + ?Sized>(
    geom: &SurfaceGeometry,
    model: &C,
    beta_ur: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    validate_beta(beta_ur)?;
    quad.validate()?;
    let c = geom.canonical();
    let breakpoints = [0.0, c.height_m(), c.width_m(), c.diagonal_m()];
    let est = integrate(
        |r| amplitude_correlation_factor(model.rho(r)) * rect_distance_pdf(&c, r),
        &breakpoints,
        &quad.adaptive_rule(),
    )?;
    let area = c.area_m2();
    Ok(0.25 * PI * beta_ur * area * area * est.value)
}

/// Aggregated weights of a composite Gauss-Legendre product rule on
/// `[0, len]^2`, keyed by `|x - x'|`.
///
/// The product rule `sum_i sum_j w_i w_j f(|x_i - x_j|)` only depends on the
/// node difference; pairs of panels at the same offset share differences, so
/// the rule collapses to `panels * nodes^2` distinct abscissae without
/// changing its value.
fn difference_rule(len: f64, panels: usize, nodes: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let h = len / panels as f64;
    let t: Vec<f64> = nodes.iter().map(|x| 0.5 * h * (x + 1.0)).collect();
    let w: Vec<f64> = weights.iter().map(|w| 0.5 * h * w).collect();
    let mut rule = Vec::with_capacity(panels * t.len() * t.len());
    for offset in 0..panels {
        // Panel pairs (p, q) with p - q = +-offset.
        let multiplicity = if offset == 0 { panels } else { 2 * (panels - offset) } as f64;
        for (ta, wa) in t.iter().zip(&w) {
            for (tb, wb) in t.iter().zip(&w) {
                let u = (offset as f64 * h + ta - tb).abs();
                rule.push((u, multiplicity * wa * wb));
            }
        }
    }
    rule
}

fn panel_count(len: f64, model_length: Option<f64>, width: f64) -> usize {
    match model_length {
        Some(l) => ((len / (l * width)).ceil() as usize).max(1),
        None => 1,
    }
}

/// `E[Y^2]` from the full four-fold integral over both surface points, by
/// tensor-product composite Gauss-Legendre. A validation path for
/// [`moment_m2_iso`]; far more expensive.
pub fn moment_m2_quad4<C: SpatialCorrelation + ?Sized>(
    geom: &SurfaceGeometry,
    model: &C,
    beta_ur: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    validate_beta(beta_ur)?;
    quad.validate()?;
    let (nodes, weights) = gauss_legendre(quad.nodes_4d);
    let (w, h) = (geom.width_m(), geom.height_m());
    let length = model.correlation_length_m();
    let x_rule = difference_rule(w, panel_count(w, length, quad.panel_width), &nodes, &weights);
    let y_rule = difference_rule(h, panel_count(h, length, quad.panel_width), &nodes, &weights);

    let mut total = 0.0;
    for &(u, wu) in &x_rule {
        let mut row = 0.0;
        for &(v, wv) in &y_rule {
            row += wv * amplitude_correlation_factor(model.rho(u.hypot(v)));
        }
        total += wu * row;
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure("non-finite 4-D quadrature sum".into()));
    }
    Ok(0.25 * PI * beta_ur * total)
}

/// Gamma-model third and fourth moments from `(m1, m2)`.
pub fn moments_m3_m4(m1: f64, m2: f64) -> Result<(f64, f64)> {
    if !(m1 > 0.0) {
        return Err(Error::Domain(format!("m1 must be positive, got {m1}")));
    }
    // Rounding slack for the zero-variance limit.
    if m2 < m1 * m1 * (1.0 - 1e-12) {
        return Err(Error::Domain(format!("m2 = {m2:e} < m1^2 = {:e} implies negative variance", m1 * m1)));
    }
    let m1_sq = m1 * m1;
    let m3 = (2.0 * m2 - m1_sq) * m2 / m1;
    let m4 = (3.0 * m2 - 2.0 * m1_sq) * (2.0 * m2 - m1_sq) * m2 / m1_sq;
    Ok((m3, m4))
}

/// Second-order statistics of the direct link that enter the SNR moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStatistics {
    /// `E_s / sigma^2`.
    pub transmit_snr: f64,
    pub antennas: usize,
    pub beta_d: f64,
    pub beta_rb: f64,
    /// `tr(R_d)`.
    pub trace: f64,
    /// `tr(R_d^2)`.
    pub trace_of_square: f64,
    /// `a_b^H R_d a_b`.
    pub steering_form: f64,
    /// `a_b^H R_d^2 a_b`.
    pub steering_form_sq: f64,
}

impl LinkStatistics {
    pub fn new(transmit_snr: f64, gains: &ChannelGains, direct: &DirectChannel) -> Self {
        Self {
            transmit_snr,
            antennas: direct.antenna_count(),
            beta_d: gains.beta_d,
            beta_rb: gains.beta_rb,
            trace: direct.trace,
            trace_of_square: direct.trace_of_square,
            steering_form: direct.steering_form,
            steering_form_sq: direct.steering_form_sq,
        }
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::new(cfg.transmit_snr, &cfg.gains()?, &cfg.direct_channel()?))
    }
}

/// `mu1 = gamma (M beta_d + M beta_rb m2 + m1 sqrt(pi beta_rb beta_d a^H R_d a))`.
pub fn mean_snr(link: &LinkStatistics, m1: f64, m2: f64) -> f64 {
    let m = link.antennas as f64;
    let cross = (PI * link.beta_rb * link.beta_d * link.steering_form).sqrt();
    link.transmit_snr * (m * link.beta_d + m * link.beta_rb * m2 + m1 * cross)
}

/// `mu2 = E[SNR^2]` with the direct-channel expectations in closed form and
/// `m3`, `m4` from the gamma model of `Y`.
pub fn second_moment_snr(link: &LinkStatistics, y: &YMoments) -> f64 {
    let m = link.antennas as f64;
    let (bd, brb) = (link.beta_d, link.beta_rb);
    let q1 = link.steering_form;
    let q2 = link.steering_form_sq;
    let direct = bd * bd * (link.trace_of_square + link.trace * link.trace);
    let power_cross = 2.0 * m * m * bd * brb * y.m2;
    let amplitude_cross = if q1 > 0.0 { y.m1 * (PI * brb * bd.powi(3) * q1).sqrt() * (2.0 * m + q2 / q1) } else { 0.0 };
    let surface = m * m * brb * brb * y.m4;
    let surface_cross = 2.0 * m * y.m3 * (PI * bd * brb.powi(3) * q1).sqrt();
    let aligned = 4.0 * bd * brb * y.m2 * q1;
    let gamma = link.transmit_snr;
    gamma * gamma * (direct + power_cross + amplitude_cross + surface + surface_cross + aligned)
}

pub fn gamma_fit(mu1: f64, mu2: f64) -> Result<GammaFit> {
    let variance = mu2 - mu1 * mu1;
    if !(variance > 0.0) || !(mu1 > 0.0) {
        return Err(Error::NonPositiveVariance { mean: mu1, second_moment: mu2 });
    }
    Ok(GammaFit { alpha_g: mu1 * mu1 / variance, beta_g: mu1 / variance })
}

/// Gamma approximation of `P(SNR <= x)`.
pub fn outage_probability(fit: &GammaFit, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    reg_lower_gamma(fit.alpha_g, fit.beta_g * x).expect("fitted shape is positive")
}

/// Jensen bound `log2(1 + mu1)` on the mean spectral efficiency.
pub fn se_bound(mu1: f64) -> f64 {
    (1.0 + mu1).log2()
}

/// Leading correction the Jensen bound omits: `(mu2 - mu1^2) / (2 ln2 (1 + mu1)^2)`.
pub fn dominant_error_term(mu1: f64, mu2: f64) -> f64 {
    (mu2 - mu1 * mu1) / (2.0 * LN_2 * (1.0 + mu1).powi(2))
}

/// Squared coefficient of variation `(mu2 - mu1^2) / mu1^2`.
pub fn cv_squared(mu1: f64, mu2: f64) -> f64 {
    (mu2 - mu1 * mu1) / (mu1 * mu1)
}

/// All closed-form statistics of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Analysis {
    pub gains: ChannelGains,
    pub link: LinkStatistics,
    pub y: YMoments,
    pub snr: SnrMoments,
    /// `None` when the SNR variance vanishes.
    pub gamma: Option<GammaFit>,
    pub se_bound: f64,
    pub det: f64,
    pub cv2: f64,
}

/// Evaluate the analytic pipeline with the reduced one-dimensional `E[Y^2]`.
pub fn analyze(cfg: &SystemConfig, quad: &QuadratureSpec) -> Result<Analysis> {
    let link = LinkStatistics::from_config(cfg)?;
    let gains = cfg.gains()?;
    let m1 = moment_m1(&cfg.geometry, gains.beta_ur);
    let m2 = moment_m2_iso(&cfg.geometry, &cfg.correlation, gains.beta_ur, quad)?;
    analyze_with_moments(link, gains, m1, m2)
}

/// Finish the pipeline from precomputed `(m1, m2)`.
pub fn analyze_with_moments(link: LinkStatistics, gains: ChannelGains, m1: f64, m2: f64) -> Result<Analysis> {
    let y = YMoments::from_first_two(m1, m2)?;
    let mu1 = mean_snr(&link, m1, m2);
    let mu2 = second_moment_snr(&link, &y);
    Ok(Analysis {
        gains,
        link,
        y,
        snr: SnrMoments { mu1, mu2 },
        gamma: gamma_fit(mu1, mu2).ok(),
        se_bound: se_bound(mu1),
        det: dominant_error_term(mu1, mu2),
        cv2: cv_squared(mu1, mu2),
    })
}
