use serde::{Deserialize, Serialize};

use super::SystemConfig;
use crate::error::{Error, Result};

/// Distance-based path loss `beta = C0 (d / D0)^-alpha` and the BS/RIS/UE layout.
///
/// The BS and the RIS sit `d_rb` apart on a baseline; the UE is `d_x` along
/// the baseline from the BS and `d_y` off it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Linear gain at the reference distance.
    pub c0: f64,
    pub d0_m: f64,
    pub alpha_d: f64,
    pub alpha_rb: f64,
    pub alpha_ur: f64,
    pub d_rb_m: f64,
    pub d_x_m: f64,
    pub d_y_m: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self { c0: 1e-3, d0_m: 1.0, alpha_d: 6.0, alpha_rb: 1.7, alpha_ur: 1.7, d_rb_m: 5.0, d_x_m: 30.0, d_y_m: 1.0 }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let positive = [("c0", self.c0), ("d0_m", self.d0_m)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let nonnegative = [
            ("alpha_d", self.alpha_d),
            ("alpha_rb", self.alpha_rb),
            ("alpha_ur", self.alpha_ur),
            ("d_rb_m", self.d_rb_m),
            ("d_x_m", self.d_x_m),
            ("d_y_m", self.d_y_m),
        ];
        for (name, v) in nonnegative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Replace the layout distances `(d_y, d_rb, d_x)`.
    pub fn with_layout(&self, d_y_m: f64, d_rb_m: f64, d_x_m: f64) -> Self {
        Self { d_y_m, d_rb_m, d_x_m, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDistances {
    pub d_d_m: f64,
    pub d_ur_m: f64,
    pub d_rb_m: f64,
}

pub fn derive_link_distances(link: &LinkBudget) -> Result<LinkDistances> {
    let d_d_m = link.d_x_m.hypot(link.d_y_m);
    let d_ur_m = (link.d_rb_m - link.d_x_m).hypot(link.d_y_m);
    if d_d_m == 0.0 {
        return Err(Error::DegenerateGeometry("UE coincides with the BS".into()));
    }
    if d_ur_m == 0.0 {
        return Err(Error::DegenerateGeometry("UE coincides with the RIS".into()));
    }
    Ok(LinkDistances { d_d_m, d_ur_m, d_rb_m: link.d_rb_m })
}

pub fn path_loss_gain(c0: f64, d0_m: f64, d_m: f64, alpha: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::DegenerateGeometry(format!("link distance must be positive, got {d_m}")));
    }
    Ok(c0 * (d_m / d0_m).powf(-alpha))
}

/// Large-scale gains of the direct, RIS-BS and UE-RIS links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub beta_d: f64,
    pub beta_rb: f64,
    pub beta_ur: f64,
}

pub fn derive_gains(cfg: &SystemConfig) -> Result<ChannelGains> {
    let link = &cfg.link;
    let d = derive_link_distances(link)?;
    Ok(ChannelGains {
        beta_d: path_loss_gain(link.c0, link.d0_m, d.d_d_m, link.alpha_d)?,
        beta_rb: path_loss_gain(link.c0, link.d0_m, d.d_rb_m, link.alpha_rb)?,
        beta_ur: path_loss_gain(link.c0, link.d0_m, d.d_ur_m, link.alpha_ur)?,
    })
}
