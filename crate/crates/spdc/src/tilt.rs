//! Pulse-front tilt and its effect on the propagation coefficients.
//!
//! A wave whose intensity front is tilted by an angle xi with respect to its
//! phase front acquires, inside the crystal, an effective inverse group
//! velocity N' = N + tan(xi) tan(rho) / c (through the walk-off angle rho)
//! and an effective group-velocity dispersion D' = D + tan(xi)^2 / (c^2 k).
//! Tilt is produced optically by angular dispersion, e.g. from a grating:
//! tan(xi) = lambda m G / cos(theta_d).

use crate::dispersion::WaveDispersion;
use crate::error::{Error, Result};
use crate::units::C_MM_PER_FS;
use serde::{Deserialize, Serialize};

/// Which of the three interacting waves carry the pulse-front tilt.
/// Default: all of them (tilt applied to the beam line feeding the crystal,
/// shared by pump and the co-propagating downconverted pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSelection {
    pub pump: bool,
    pub signal: bool,
    pub idler: bool,
}

impl Default for WaveSelection {
    fn default() -> Self {
        WaveSelection {
            pump: true,
            signal: true,
            idler: true,
        }
    }
}

/// In-crystal pulse-front tilt, signed, |xi| < 90 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltConfig {
    pub xi_deg: f64,
    #[serde(default)]
    pub applied_to: WaveSelection,
}

impl TiltConfig {
    pub fn new(xi_deg: f64) -> Result<Self> {
        Self::with_selection(xi_deg, WaveSelection::default())
    }

    pub fn with_selection(xi_deg: f64, applied_to: WaveSelection) -> Result<Self> {
        if !xi_deg.is_finite() || xi_deg.abs() >= 90.0 {
            return Err(Error::InvalidInput {
                what: "pulse-front tilt",
                why: format!("xi = {xi_deg} deg must be finite with |xi| < 90"),
            });
        }
        Ok(TiltConfig { xi_deg, applied_to })
    }

    pub fn validate(&self) -> Result<()> {
        Self::with_selection(self.xi_deg, self.applied_to).map(|_| ())
    }

    pub fn tan_xi(&self) -> f64 {
        self.xi_deg.to_radians().tan()
    }
}

/// Diffraction-grating line used to imprint the tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GratingSpec {
    pub groove_density_per_mm: f64,
    #[serde(default)]
    pub incidence_angle_deg: f64,
    #[serde(default = "default_order")]
    pub order: i32,
}

fn default_order() -> i32 {
    1
}

/// Signed pulse-front tilt produced by a grating at wavelength `lambda_nm`,
/// in degrees.
///
/// Reflection convention: sin(theta_d) = m G lambda - sin(theta_i); the tilt
/// follows from the angular dispersion, tan(xi) = lambda m G / cos(theta_d).
pub fn tilt_from_grating(g: &GratingSpec, lambda_nm: f64) -> Result<f64> {
    if !(g.groove_density_per_mm.is_finite() && g.groove_density_per_mm > 0.0) {
        return Err(Error::InvalidInput {
            what: "grating groove density",
            why: format!("{} per mm must be positive", g.groove_density_per_mm),
        });
    }
    if g.order == 0 {
        return Err(Error::InvalidInput {
            what: "grating order",
            why: "order 0 produces no angular dispersion".into(),
        });
    }
    if g.incidence_angle_deg.abs() >= 90.0 {
        return Err(Error::InvalidInput {
            what: "grating incidence angle",
            why: format!("{} deg must satisfy |theta_i| < 90", g.incidence_angle_deg),
        });
    }
    let lambda_mm = lambda_nm * 1e-6;
    let m_g_lambda = g.order as f64 * g.groove_density_per_mm * lambda_mm;
    let sin_d = m_g_lambda - g.incidence_angle_deg.to_radians().sin();
    if sin_d.abs() >= 1.0 {
        return Err(Error::InvalidInput {
            what: "grating geometry",
            why: format!("diffracted order is evanescent (sin theta_d = {sin_d:.4})"),
        });
    }
    let cos_d = (1.0 - sin_d * sin_d).sqrt();
    Ok((m_g_lambda / cos_d).atan().to_degrees())
}

/// N' = N + tan(xi) tan(rho) / c, in fs/mm. `rho_deg` is the wave's walk-off
/// angle; an ordinary wave (rho = 0) keeps its group velocity.
pub fn effective_inverse_group_velocity(n_fs_per_mm: f64, rho_deg: f64, xi_deg: f64) -> f64 {
    n_fs_per_mm + xi_deg.to_radians().tan() * rho_deg.to_radians().tan() / C_MM_PER_FS
}

/// D' = D + tan(xi)^2 / (c^2 k), in fs^2/mm; `k_rad_per_nm` as stored in
/// [`WaveDispersion`] (converted internally to rad/mm).
pub fn effective_gvd(d_fs2_per_mm: f64, k_rad_per_nm: f64, xi_deg: f64) -> f64 {
    let k_rad_per_mm = k_rad_per_nm * 1e6;
    let t = xi_deg.to_radians().tan();
    d_fs2_per_mm + t * t / (C_MM_PER_FS * C_MM_PER_FS * k_rad_per_mm)
}

/// Both effective coefficients for one wave; `apply` false returns the
/// untilted values unchanged.
pub fn effective_coefficients(w: &WaveDispersion, xi_deg: f64, apply: bool) -> (f64, f64) {
    if !apply {
        return (w.n_fs_per_mm, w.d_fs2_per_mm);
    }
    (
        effective_inverse_group_velocity(w.n_fs_per_mm, w.rho_deg, xi_deg),
        effective_gvd(w.d_fs2_per_mm, w.k_rad_per_nm, xi_deg),
    )
}
