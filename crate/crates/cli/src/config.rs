//! JSON experiment files and their resolved form.
//!
//! Every field is optional; omitted fields take the reference layout (5.8 GHz,
//! 8 x 4 array, `d_rb = 5`, `d_x = 30`, `d_y = 1`, Jakes with `kappa = 1`).
//! Decibel fields carry a `_db` suffix and are converted at load.

use std::path::{Path, PathBuf};

use cris_core::analytic::QuadratureSpec;
use cris_core::mcsim::GridSpec;
use cris_core::sysmodel::{
    wavelength_m, BsArrayConfig, CorrelationKind, IsotropicCorrelation, LinkBudget, SurfaceGeometry, SystemConfig,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Surface layout presets `(d_y, d_rb, d_x)` in meters.
pub const SETUPS: [(&str, f64, f64, f64); 3] = [("A", 1.0, 40.0, 27.0), ("B", 1.0, 40.0, 53.0), ("C", 1.0, 5.0, 27.0)];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceFile {
    pub width_m: Option<f64>,
    pub height_m: Option<f64>,
    pub area_m2: Option<f64>,
    /// Width over height; defaults to 1 with `area_m2`.
    pub aspect: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationFile {
    pub model: CorrelationKind,
    #[serde(default = "one")]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkFile {
    /// `A`, `B`, `C` or `custom`.
    pub setup: Option<String>,
    pub c0_db: Option<f64>,
    pub d0_m: Option<f64>,
    pub alpha_d: Option<f64>,
    pub alpha_rb: Option<f64>,
    pub alpha_ur: Option<f64>,
    pub d_y_m: Option<f64>,
    pub d_rb_m: Option<f64>,
    pub d_x_m: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayFile {
    pub m_x: Option<usize>,
    pub m_z: Option<usize>,
    pub spacing_wavelengths: Option<f64>,
    pub theta_deg: Option<f64>,
    pub phi_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridFile {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Approximate cell count of a grid with square cells.
    pub points: Option<usize>,
}

/// Sweep axes; each scenario requires its primary axis and defaults the rest
/// to the single value of the base configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub areas_m2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aspects: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<CorrelationKind>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setups: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentFile {
    pub carrier_hz: Option<f64>,
    pub surface: SurfaceFile,
    pub correlation: Option<CorrelationFile>,
    /// Correlation across BS antennas; follows `correlation` when omitted.
    pub bs_correlation: Option<CorrelationFile>,
    pub link: LinkFile,
    pub array: ArrayFile,
    pub transmit_snr_db: Option<f64>,
    pub grid: GridFile,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub sweep: Sweep,
    pub output_path: Option<PathBuf>,
    pub quadrature: Option<QuadratureSpec>,
}

/// Monte Carlo grid, resolved against each swept geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Fixed { nx: usize, ny: usize },
    Isotropic { points: usize },
}

impl GridChoice {
    pub fn resolve(&self, geom: &SurfaceGeometry) -> Result<GridSpec, CliError> {
        Ok(match *self {
            GridChoice::Fixed { nx, ny } => GridSpec::new(geom, nx, ny)?,
            GridChoice::Isotropic { points } => GridSpec::isotropic(geom, points)?,
        })
    }

    /// Parse `NXxNY`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("grid must look like 32x32, got {text:?}"));
        let (nx, ny) = text.split_once(['x', 'X']).ok_or_else(bad)?;
        let nx = nx.trim().parse().map_err(|_| bad())?;
        let ny = ny.trim().parse().map_err(|_| bad())?;
        if nx < 2 || ny < 2 {
            return Err(bad());
        }
        Ok(GridChoice::Fixed { nx, ny })
    }
}

/// Fully resolved experiment; its JSON form is what the provenance hash covers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    /// The BS correlation tracks swept surface models and `kappa`.
    pub bs_follows_surface: bool,
    pub grid: GridChoice,
    pub replicates: usize,
    pub seed: u64,
    pub sweep: Sweep,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    pub quadrature: QuadratureSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentFile::default().resolve().expect("defaults are valid")
    }
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {value}")))
    }
}

fn nonempty<T>(name: &str, list: &Option<Vec<T>>) -> Result<(), CliError> {
    match list {
        Some(v) if v.is_empty() => Err(CliError::Config(format!("sweep.{name} is empty"))),
        _ => Ok(()),
    }
}

/// `(d_y, d_rb, d_x)` of a preset, or `None` for `custom`.
pub fn setup_layout(name: &str) -> Result<Option<(f64, f64, f64)>, CliError> {
    if name == "custom" {
        return Ok(None);
    }
    SETUPS
        .iter()
        .find(|(n, ..)| *n == name)
        .map(|&(_, dy, drb, dx)| Some((dy, drb, dx)))
        .ok_or_else(|| CliError::Config(format!("unknown setup {name:?}; expected A, B, C or custom")))
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Validate and convert; every failure is a [`CliError::Config`].
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        self.resolve_inner().map_err(|e| match e {
            CliError::Engine(inner) => CliError::Config(inner.to_string()),
            other => other,
        })
    }

    fn resolve_inner(&self) -> Result<ExperimentConfig, CliError> {
        let defaults = SystemConfig::default();
        let carrier = positive("carrier_hz", self.carrier_hz.unwrap_or(5.8e9))?;
        let lambda = wavelength_m(carrier);

        let s = &self.surface;
        let geometry = match (s.width_m, s.height_m, s.area_m2) {
            (Some(w), Some(h), None) if s.aspect.is_none() => SurfaceGeometry::new(w, h)?,
            (None, None, Some(a)) => SurfaceGeometry::with_area(a, s.aspect.unwrap_or(1.0))?,
            (None, None, None) if s.aspect.is_none() => defaults.geometry,
            _ => {
                return Err(CliError::Config(
                    "surface takes either width_m and height_m, or area_m2 with an optional aspect".into(),
                ))
            }
        };

        let model = |file: &CorrelationFile| IsotropicCorrelation::new(file.model, file.kappa, lambda);
        let correlation = match &self.correlation {
            Some(c) => model(c)?,
            None => IsotropicCorrelation::new(defaults.correlation.kind, defaults.correlation.kappa, lambda)?,
        };
        let bs_correlation = match &self.bs_correlation {
            Some(c) => model(c)?,
            None => correlation,
        };

        let l = &self.link;
        let base = LinkBudget::default();
        let mut link = LinkBudget {
            c0: l.c0_db.map(db_to_linear).unwrap_or(base.c0),
            d0_m: l.d0_m.unwrap_or(base.d0_m),
            alpha_d: l.alpha_d.unwrap_or(base.alpha_d),
            alpha_rb: l.alpha_rb.unwrap_or(base.alpha_rb),
            alpha_ur: l.alpha_ur.unwrap_or(base.alpha_ur),
            d_rb_m: l.d_rb_m.unwrap_or(base.d_rb_m),
            d_x_m: l.d_x_m.unwrap_or(base.d_x_m),
            d_y_m: l.d_y_m.unwrap_or(base.d_y_m),
        };
        if let Some((dy, drb, dx)) = setup_layout(l.setup.as_deref().unwrap_or("custom"))? {
            if l.d_y_m.is_some() || l.d_rb_m.is_some() || l.d_x_m.is_some() {
                return Err(CliError::Config("a setup preset cannot be combined with explicit distances".into()));
            }
            link = link.with_layout(dy, drb, dx);
        }

        let a = &self.array;
        let base = BsArrayConfig::default();
        let array = BsArrayConfig {
            m_x: a.m_x.unwrap_or(base.m_x),
            m_z: a.m_z.unwrap_or(base.m_z),
            spacing_wavelengths: a.spacing_wavelengths.unwrap_or(base.spacing_wavelengths),
            theta_a_rad: a.theta_deg.map(f64::to_radians).unwrap_or(base.theta_a_rad),
            phi_a_rad: a.phi_deg.map(f64::to_radians).unwrap_or(base.phi_a_rad),
        };

        let system = SystemConfig {
            geometry,
            correlation,
            bs_correlation,
            link,
            array,
            transmit_snr: self.transmit_snr_db.map(db_to_linear).unwrap_or(defaults.transmit_snr),
        };
        system.validate()?;

        let grid = match (self.grid.nx, self.grid.ny, self.grid.points) {
            (Some(nx), Some(ny), None) => GridChoice::Fixed { nx, ny },
            (None, None, points) => GridChoice::Isotropic { points: points.unwrap_or(1024) },
            _ => return Err(CliError::Config("grid takes either nx and ny, or points".into())),
        };
        if let GridChoice::Isotropic { points } = grid {
            if points < 4 {
                return Err(CliError::Config(format!("grid needs at least 4 points, got {points}")));
            }
        }
        grid.resolve(&system.geometry)?;

        let cfg = ExperimentConfig {
            system,
            bs_follows_surface: self.bs_correlation.is_none(),
            grid,
            replicates: self.replicates.unwrap_or(10_000),
            seed: self.seed.unwrap_or(1),
            sweep: self.sweep.clone(),
            output_path: self.output_path.clone(),
            quadrature: self.quadrature.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicates == 0 {
            return Err(CliError::Config("replicates must be at least 1".into()));
        }
        let s = &self.sweep;
        nonempty("areas_m2", &s.areas_m2)?;
        nonempty("aspects", &s.aspects)?;
        nonempty("kappas", &s.kappas)?;
        nonempty("models", &s.models)?;
        nonempty("thresholds_db", &s.thresholds_db)?;
        nonempty("setups", &s.setups)?;
        for (name, list) in [("areas_m2", &s.areas_m2), ("aspects", &s.aspects)] {
            for &v in list.iter().flatten() {
                positive(&format!("sweep.{name} entry"), v)?;
            }
        }
        for &k in s.kappas.iter().flatten() {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(CliError::Config(format!("sweep.kappas entries must be >= 0, got {k}")));
            }
        }
        for &t in s.thresholds_db.iter().flatten() {
            if !t.is_finite() {
                return Err(CliError::Config(format!("sweep.thresholds_db entries must be finite, got {t}")));
            }
        }
        for name in s.setups.iter().flatten() {
            setup_layout(name)?;
        }
        Ok(())
    }

    /// Base system with the surface correlation (and, if tracking, the BS
    /// correlation) replaced.
    pub fn with_model(&self, system: &SystemConfig, kind: CorrelationKind, kappa: f64) -> SystemConfig {
        let mut out = system.clone();
        out.correlation = system.correlation.with_kind(kind).with_kappa(kappa);
        if self.bs_follows_surface {
            out.bs_correlation = out.correlation;
        }
        out
    }
}
