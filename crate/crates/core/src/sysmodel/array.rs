use std::f64::consts::{PI, TAU};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::correlation::SpatialCorrelation;
use super::IsotropicCorrelation;
use crate::error::{Error, Result};
use crate::linalg::{factor_correlation, gram};

/// Vertical uniform rectangular array at the BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsArrayConfig {
    /// Antennas per row (horizontal).
    pub m_x: usize,
    /// Antennas per column (vertical).
    pub m_z: usize,
    pub spacing_wavelengths: f64,
    /// Elevation angle of arrival.
    pub theta_a_rad: f64,
    /// Azimuth angle of arrival.
    pub phi_a_rad: f64,
}

impl Default for BsArrayConfig {
    fn default() -> Self {
        Self { m_x: 8, m_z: 4, spacing_wavelengths: 0.5, theta_a_rad: PI / 2.0, phi_a_rad: PI / 4.0 }
    }
}

impl BsArrayConfig {
    pub fn antenna_count(&self) -> usize {
        self.m_x * self.m_z
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_x == 0 || self.m_z == 0 {
            return Err(Error::Config(format!(
                "array needs at least one antenna per row and column, got {} x {}",
                self.m_x, self.m_z
            )));
        }
        if !(self.spacing_wavelengths > 0.0 && self.spacing_wavelengths.is_finite()) {
            return Err(Error::Config(format!("antenna spacing must be positive, got {}", self.spacing_wavelengths)));
        }
        if !(0.0..=PI).contains(&self.theta_a_rad) {
            return Err(Error::Config(format!("elevation must lie in [0, pi], got {}", self.theta_a_rad)));
        }
        if !(self.phi_a_rad > -PI && self.phi_a_rad <= PI) {
            return Err(Error::Config(format!("azimuth must lie in (-pi, pi], got {}", self.phi_a_rad)));
        }
        Ok(())
    }

    /// `(row, column)` of flat antenna index `m = p * m_z + q`.
    fn position(&self, m: usize) -> (usize, usize) {
        (m / self.m_z, m % self.m_z)
    }
}

/// LoS steering vector; entry `p * m_z + q` is
/// `exp(j 2 pi d_b (p sin(theta) cos(phi) + q cos(theta)))`.
pub fn steering_vector(array: &BsArrayConfig) -> Vec<Complex64> {
    let horizontal = array.theta_a_rad.sin() * array.phi_a_rad.cos();
    let vertical = array.theta_a_rad.cos();
    (0..array.antenna_count())
        .map(|m| {
            let (p, q) = array.position(m);
            let phase = TAU * array.spacing_wavelengths * (p as f64 * horizontal + q as f64 * vertical);
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

fn raw_bs_correlation<C: SpatialCorrelation + ?Sized>(array: &BsArrayConfig, model: &C, wavelength_m: f64) -> Mat<f64> {
    let m = array.antenna_count();
    let pitch_m = array.spacing_wavelengths * wavelength_m;
    Mat::from_fn(m, m, |i, j| {
        if i == j {
            return 1.0;
        }
        let (pi, qi) = array.position(i);
        let (pj, qj) = array.position(j);
        let dp = pi as f64 - pj as f64;
        let dq = qi as f64 - qj as f64;
        model.rho(pitch_m * dp.hypot(dq))
    })
}

const BS_REPAIR_REJECT_RATIO: f64 = 1e-6;

/// Correlation matrix of the direct channel across the BS antennas, repaired
/// to be positive semidefinite with unit diagonal.
pub fn bs_correlation_matrix(array: &BsArrayConfig, model: &IsotropicCorrelation) -> Result<Mat<f64>> {
    let raw = raw_bs_correlation(array, model, model.wavelength_m);
    let repaired = factor_correlation(&raw, BS_REPAIR_REJECT_RATIO, 0.0)?;
    Ok(gram(&repaired.factor))
}

/// Direct UE-BS channel statistics: `h_d ~ CN(0, beta_d R_d)` seen through the
/// LoS steering vector `a_b` of the RIS-BS link.
#[derive(Debug, Clone)]
pub struct DirectChannel {
    pub steering: Vec<Complex64>,
    pub correlation: Mat<f64>,
    /// `L` with `L L^T = R_d`.
    pub factor: Mat<f64>,
    /// `tr(R_d)`.
    pub trace: f64,
    /// `tr(R_d^2)`.
    pub trace_of_square: f64,
    /// `a_b^H R_d a_b`.
    pub steering_form: f64,
    /// `a_b^H R_d^2 a_b`.
    pub steering_form_sq: f64,
}

impl DirectChannel {
    pub fn new(array: &BsArrayConfig, model: &IsotropicCorrelation) -> Result<Self> {
        array.validate()?;
        let raw = raw_bs_correlation(array, model, model.wavelength_m);
        let repaired = factor_correlation(&raw, BS_REPAIR_REJECT_RATIO, 0.0)?;
        let correlation = gram(&repaired.factor);
        Ok(Self::from_parts(steering_vector(array), correlation, repaired.factor))
    }

    /// Assemble from an explicit correlation matrix and its square-root factor.
    pub fn from_parts(steering: Vec<Complex64>, correlation: Mat<f64>, factor: Mat<f64>) -> Self {
        let m = steering.len();
        assert_eq!(correlation.nrows(), m, "steering/correlation size mismatch");
        let trace = (0..m).map(|i| correlation[(i, i)]).sum();
        let trace_of_square = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| correlation[(i, j)] * correlation[(j, i)])
            .sum();
        let r_a: Vec<Complex64> = (0..m).map(|i| (0..m).map(|j| steering[j] * correlation[(i, j)]).sum()).collect();
        let steering_form = steering.iter().zip(&r_a).map(|(a, ra)| (a.conj() * ra).re).sum();
        let steering_form_sq = r_a.iter().map(|v| v.norm_sqr()).sum();
        Self { steering, correlation, factor, trace, trace_of_square, steering_form, steering_form_sq }
    }

    pub fn antenna_count(&self) -> usize {
        self.steering.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::CorrelationKind;

    fn jakes(kappa: f64) -> IsotropicCorrelation {
        IsotropicCorrelation::new(CorrelationKind::Jakes, kappa, 0.0517).unwrap()
    }

    fn min_eigenvalue(m: &Mat<f64>) -> f64 {
        crate::linalg::symmetric_eigen(m).unwrap().values.last().copied().unwrap()
    }

    #[test]
    fn steering_examples() {
        let single = BsArrayConfig { m_x: 1, m_z: 1, ..Default::default() };
        assert_eq!(steering_vector(&single), vec![Complex64::new(1.0, 0.0)]);

        let broadside = BsArrayConfig { phi_a_rad: PI / 2.0, ..Default::default() };
        for a in steering_vector(&broadside) {
            assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }

        let a = steering_vector(&BsArrayConfig::default());
        assert_eq!(a.len(), 32);
        let power: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        assert!((power - 32.0).abs() < 1e-9 * 32.0);
        assert!(a.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn flat_index_convention() {
        let array = BsArrayConfig { theta_a_rad: 1.0, phi_a_rad: 0.3, ..Default::default() };
        let a = steering_vector(&array);
        let (p, q) = (5.0, 2.0);
        let expected = TAU * 0.5 * (p * 1f64.sin() * 0.3f64.cos() + q * 1f64.cos());
        let got = a[5 * 4 + 2];
        assert!((got - Complex64::from_polar(1.0, expected)).norm() < 1e-12);
    }

    #[test]
    fn correlation_matrix_examples() {
        let single = BsArrayConfig { m_x: 1, m_z: 1, ..Default::default() };
        let r = bs_correlation_matrix(&single, &jakes(1.0)).unwrap();
        assert_eq!((r.nrows(), r[(0, 0)]), (1, 1.0));

        let r = bs_correlation_matrix(&BsArrayConfig::default(), &jakes(0.0)).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                assert!((r[(i, j)] - 1.0).abs() < 1e-12);
            }
        }

        let r = bs_correlation_matrix(&BsArrayConfig::default(), &jakes(1.0)).unwrap();
        let trace: f64 = (0..32).map(|i| r[(i, i)]).sum();
        assert!((trace - 32.0).abs() < 1e-10);
        assert!(min_eigenvalue(&r) >= -1e-12 * 32.0);
    }

    #[test]
    fn raw_matrix_is_symmetric_with_unit_diagonal() {
        let model = jakes(1.0);
        let raw = raw_bs_correlation(&BsArrayConfig::default(), &model, model.wavelength_m);
        for i in 0..32 {
            assert_eq!(raw[(i, i)], 1.0);
            for j in 0..32 {
                assert_eq!(raw[(i, j)], raw[(j, i)]);
            }
        }
    }

    #[test]
    fn quadratic_forms() {
        let dc = DirectChannel::new(&BsArrayConfig::default(), &jakes(1.0)).unwrap();
        assert!((dc.trace - 32.0).abs() < 1e-10);
        assert!(dc.trace_of_square >= 32.0 - 1e-9);
        assert!(dc.steering_form > 0.0 && dc.steering_form_sq > 0.0);
        // Cauchy-Schwarz: (a^H R a)^2 <= (a^H a)(a^H R^2 a).
        assert!(dc.steering_form.powi(2) <= 32.0 * dc.steering_form_sq * (1.0 + 1e-12));

        let dc = DirectChannel::new(&BsArrayConfig::default(), &jakes(0.0)).unwrap();
        let sum: Complex64 = dc.steering.iter().sum();
        assert!((dc.steering_form - sum.norm_sqr()).abs() < 1e-9);
    }
}
