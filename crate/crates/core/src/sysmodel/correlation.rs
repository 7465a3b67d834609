use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{bessel_j0, sinc_norm};

/// Isotropic correlation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    /// `sinc(2 kappa d)`, 3-D isotropic scattering.
    Sinc,
    /// `J0(2 pi kappa d)`, 2-D isotropic scattering.
    Jakes,
}

impl CorrelationKind {
    pub fn label(&self) -> &'static str {
        match self {
            CorrelationKind::Sinc => "sinc",
            CorrelationKind::Jakes => "jakes",
        }
    }
}

/// A correlation coefficient that depends only on the separation of two points.
///
/// Implemented by [`IsotropicCorrelation`]; the moment engine and the field
/// sampler accept any implementation, which lets tests plug in synthetic models.
pub trait SpatialCorrelation: Sync {
    /// Correlation coefficient at separation `separation_m >= 0`.
    fn rho(&self, separation_m: f64) -> f64;

    /// Length scale over which `rho` varies appreciably; `None` if constant.
    fn correlation_length_m(&self) -> Option<f64>;
}

/// Scaled sinc or Jakes correlation with separations measured in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropicCorrelation {
    pub kind: CorrelationKind,
    /// Scaling `kappa >= 0`; zero gives perfect correlation.
    pub kappa: f64,
    pub wavelength_m: f64,
}

impl IsotropicCorrelation {
    pub fn new(kind: CorrelationKind, kappa: f64, wavelength_m: f64) -> Result<Self> {
        let model = Self { kind, kappa, wavelength_m };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.wavelength_m > 0.0 && self.wavelength_m.is_finite()) {
            return Err(Error::Config(format!("wavelength must be positive, got {}", self.wavelength_m)));
        }
        Ok(())
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self { kappa, ..*self }
    }

    pub fn with_kind(&self, kind: CorrelationKind) -> Self {
        Self { kind, ..*self }
    }
}

impl SpatialCorrelation for IsotropicCorrelation {
    fn rho(&self, separation_m: f64) -> f64 {
        let d = self.kappa * separation_m / self.wavelength_m;
        match self.kind {
            CorrelationKind::Sinc => sinc_norm(2.0 * d),
            CorrelationKind::Jakes => bessel_j0(2.0 * PI * d),
        }
    }

    fn correlation_length_m(&self) -> Option<f64> {
        (self.kappa > 0.0).then(|| self.wavelength_m / (2.0 * self.kappa))
    }
}

/// Correlation coefficient of `model` at separation `r_m` metres.
pub fn correlation_at<C: SpatialCorrelation + ?Sized>(model: &C, r_m: f64) -> f64 {
    model.rho(r_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 0.0516;

    #[test]
    fn zero_separation_and_first_zeros() {
        for kind in [CorrelationKind::Sinc, CorrelationKind::Jakes] {
            let m = IsotropicCorrelation::new(kind, 1.0, LAMBDA).unwrap();
            assert_eq!(correlation_at(&m, 0.0), 1.0);
        }
        let sinc = IsotropicCorrelation::new(CorrelationKind::Sinc, 1.0, LAMBDA).unwrap();
        assert!(correlation_at(&sinc, LAMBDA / 2.0).abs() < 1e-15);
        let jakes = IsotropicCorrelation::new(CorrelationKind::Jakes, 1.0, LAMBDA).unwrap();
        let r = LAMBDA * 2.404_825_557_7 / (2.0 * PI);
        assert!(correlation_at(&jakes, r).abs() < 1e-9);
    }

    #[test]
    fn kappa_zero_is_perfect_correlation() {
        for kind in [CorrelationKind::Sinc, CorrelationKind::Jakes] {
            let m = IsotropicCorrelation::new(kind, 0.0, LAMBDA).unwrap();
            for r in [0.0, 0.01, 1.0, 100.0] {
                assert_eq!(m.rho(r), 1.0);
            }
            assert!(m.correlation_length_m().is_none());
        }
    }

    #[test]
    fn bounded_and_first_lobe_monotone_in_kappa() {
        let first_zero = LAMBDA * 2.404_825_557_7 / (2.0 * PI);
        for i in 1..200 {
            let r = first_zero * i as f64 / 200.0;
            let lo = IsotropicCorrelation::new(CorrelationKind::Jakes, 0.8, LAMBDA).unwrap();
            let hi = lo.with_kappa(1.0);
            assert!(hi.rho(r) <= lo.rho(r));
            for kind in [CorrelationKind::Sinc, CorrelationKind::Jakes] {
                let m = lo.with_kind(kind);
                assert!(m.rho(r * 37.0).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn continuous_at_origin() {
        for kind in [CorrelationKind::Sinc, CorrelationKind::Jakes] {
            let m = IsotropicCorrelation::new(kind, 1.0, LAMBDA).unwrap();
            assert!((m.rho(1e-9) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_kappa() {
        assert!(IsotropicCorrelation::new(CorrelationKind::Sinc, -0.1, LAMBDA).is_err());
        assert!(IsotropicCorrelation::new(CorrelationKind::Sinc, 1.0, 0.0).is_err());
    }
}
