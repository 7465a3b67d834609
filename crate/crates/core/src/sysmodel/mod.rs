//! Physical setup: surface geometry, spatial correlation models, link budget
//! and the BS antenna array.

mod array;
mod correlation;
mod link;

pub use array::{bs_correlation_matrix, steering_vector, BsArrayConfig, DirectChannel};
pub use correlation::{correlation_at, CorrelationKind, IsotropicCorrelation, SpatialCorrelation};
pub use link::{derive_gains, derive_link_distances, path_loss_gain, ChannelGains, LinkBudget, LinkDistances};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used to turn a carrier frequency into a wavelength.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier wavelength for a frequency in hertz.
pub fn wavelength_m(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// Continuous rectangular surface of width `W` and height `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeometry {
    width_m: f64,
    height_m: f64,
}

impl SurfaceGeometry {
    pub fn new(width_m: f64, height_m: f64) -> Result<Self> {
        if !(width_m > 0.0 && width_m.is_finite() && height_m > 0.0 && height_m.is_finite()) {
            return Err(Error::DegenerateGeometry(format!(
                "surface dimensions must be positive, got {width_m} x {height_m}"
            )));
        }
        Ok(Self { width_m, height_m })
    }

    /// Surface with area `area_m2` and `width / height = aspect`.
    pub fn with_area(area_m2: f64, aspect: f64) -> Result<Self> {
        if !(area_m2 > 0.0 && aspect > 0.0) {
            return Err(Error::DegenerateGeometry(format!(
                "area and aspect must be positive, got {area_m2}, {aspect}"
            )));
        }
        Self::new((area_m2 * aspect).sqrt(), (area_m2 / aspect).sqrt())
    }

    pub fn width_m(&self) -> f64 {
        self.width_m
    }

    pub fn height_m(&self) -> f64 {
        self.height_m
    }

    pub fn area_m2(&self) -> f64 {
        self.width_m * self.height_m
    }

    pub fn diagonal_m(&self) -> f64 {
        self.width_m.hypot(self.height_m)
    }

    /// The same rectangle with the longer side as width.
    pub fn canonical(&self) -> Self {
        if self.height_m > self.width_m {
            Self { width_m: self.height_m, height_m: self.width_m }
        } else {
            *self
        }
    }
}

/// Everything needed to evaluate the closed-form statistics of one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub geometry: SurfaceGeometry,
    /// Correlation of the UE-RIS field across the surface.
    pub correlation: IsotropicCorrelation,
    /// Correlation across the BS antennas for the direct channel.
    pub bs_correlation: IsotropicCorrelation,
    pub link: LinkBudget,
    pub array: BsArrayConfig,
    /// `E_s / sigma^2`, linear.
    pub transmit_snr: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.transmit_snr > 0.0 && self.transmit_snr.is_finite()) {
            return Err(Error::Config(format!("transmit SNR must be positive, got {}", self.transmit_snr)));
        }
        SurfaceGeometry::new(self.geometry.width_m, self.geometry.height_m)?;
        self.correlation.validate()?;
        self.bs_correlation.validate()?;
        self.link.validate()?;
        self.array.validate()?;
        derive_link_distances(&self.link)?;
        Ok(())
    }

    pub fn with_geometry(&self, geometry: SurfaceGeometry) -> Self {
        Self { geometry, ..self.clone() }
    }

    pub fn gains(&self) -> Result<ChannelGains> {
        derive_gains(self)
    }

    pub fn direct_channel(&self) -> Result<DirectChannel> {
        DirectChannel::new(&self.array, &self.bs_correlation)
    }
}

impl Default for SystemConfig {
    /// 5.8 GHz carrier, Jakes correlation with `kappa = 1`, a 0.2 m^2 square
    /// surface, the 8 x 4 array and a 120 dB transmit SNR.
    fn default() -> Self {
        let correlation =
            IsotropicCorrelation::new(CorrelationKind::Jakes, 1.0, wavelength_m(5.8e9)).expect("static defaults");
        Self {
            geometry: SurfaceGeometry::with_area(0.2, 1.0).expect("static defaults"),
            correlation,
            bs_correlation: correlation,
            link: LinkBudget::default(),
            array: BsArrayConfig::default(),
            transmit_snr: 1e12,
        }
    }
}
