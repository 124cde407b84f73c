//! Collinear type-II phase matching: the crystal configuration, exact
//! wavevector mismatch, the phase-matching angle solver, and the
//! second-order expansion of the mismatch around degeneracy.

use crate::dispersion::{wave_dispersion, Polarization};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::sellmeier::SellmeierSet;
use crate::tilt::{effective_coefficients, TiltConfig};
use crate::units::{lambda_nm_from_omega, omega_from_lambda_nm};
use serde::{Deserialize, Serialize};

/// Which downconverted wave carries which polarisation in the type-II pair
/// (the pump is always extraordinary). Default: extraordinary signal,
/// ordinary idler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PolarizationAssignment {
    #[default]
    #[serde(rename = "signal-e-idler-o")]
    SignalEIdlerO,
    #[serde(rename = "signal-o-idler-e")]
    SignalOIdlerE,
}

impl PolarizationAssignment {
    pub fn signal(self) -> Polarization {
        match self {
            PolarizationAssignment::SignalEIdlerO => Polarization::Extraordinary,
            PolarizationAssignment::SignalOIdlerE => Polarization::Ordinary,
        }
    }

    pub fn idler(self) -> Polarization {
        match self {
            PolarizationAssignment::SignalEIdlerO => Polarization::Ordinary,
            PolarizationAssignment::SignalOIdlerE => Polarization::Extraordinary,
        }
    }
}

/// A cut and oriented crystal ready for collinear type-II downconversion of
/// a pump at `lambda_p0_nm` into the degenerate pair at 2 lambda_p0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub length_mm: f64,
    /// Angle between propagation direction and optic axis, degrees.
    pub theta_pm_deg: f64,
    pub assignment: PolarizationAssignment,
    /// Central pump wavelength, nm.
    pub lambda_p0_nm: f64,
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm.is_finite() && self.length_mm > 0.0) {
            return Err(Error::InvalidInput {
                what: "crystal length",
                why: format!("{} mm must be positive", self.length_mm),
            });
        }
        if !(0.0..=90.0).contains(&self.theta_pm_deg) {
            return Err(Error::InvalidInput {
                what: "phase-matching angle",
                why: format!("{} deg outside [0, 90]", self.theta_pm_deg),
            });
        }
        if !(self.lambda_p0_nm.is_finite() && self.lambda_p0_nm > 0.0) {
            return Err(Error::InvalidInput {
                what: "pump wavelength",
                why: format!("{} nm must be positive", self.lambda_p0_nm),
            });
        }
        Ok(())
    }

    /// Degenerate signal/idler wavelength, nm.
    pub fn lambda_degenerate_nm(&self) -> f64 {
        2.0 * self.lambda_p0_nm
    }
}

/// k in rad/mm for one wave of the triple at angle theta.
fn k_rad_per_mm(
    set: &SellmeierSet,
    lambda_nm: f64,
    pol: Polarization,
    theta_deg: f64,
) -> Result<f64> {
    let n = crate::dispersion::refractive_index(set, lambda_nm, pol, theta_deg)?;
    Ok(n * omega_from_lambda_nm(lambda_nm) / crate::units::C_MM_PER_FS)
}

/// Exact collinear mismatch Delta k = k_p(omega_s + omega_i) - k_s - k_i in
/// rad/mm, with the pump extraordinary at the crystal angle and the pair
/// polarised per the assignment. Frequencies in rad/fs.
pub fn delta_k_exact(
    set: &SellmeierSet,
    crystal: &CrystalConfig,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    let th = crystal.theta_pm_deg;
    let lambda_p = lambda_nm_from_omega(omega_s + omega_i);
    let lambda_s = lambda_nm_from_omega(omega_s);
    let lambda_i = lambda_nm_from_omega(omega_i);
    let kp = k_rad_per_mm(set, lambda_p, Polarization::Extraordinary, th)?;
    let ks = k_rad_per_mm(set, lambda_s, crystal.assignment.signal(), th)?;
    let ki = k_rad_per_mm(set, lambda_i, crystal.assignment.idler(), th)?;
    Ok(kp - ks - ki)
}

/// Solve the crystal angle that phase-matches degenerate collinear type-II
/// downconversion of `lambda_p0_nm`: Delta k(theta) = 0 at
/// omega_s = omega_i = omega_p / 2. Bisection over theta in [20, 70] deg,
/// refined until the residual is below 1e-10 k_p.
pub fn solve_pm_angle(
    set: &SellmeierSet,
    lambda_p0_nm: f64,
    assignment: PolarizationAssignment,
) -> Result<f64> {
    let probe = CrystalConfig {
        length_mm: 1.0,
        theta_pm_deg: 0.0,
        assignment,
        lambda_p0_nm,
    };
    let w_half = omega_from_lambda_nm(lambda_p0_nm) / 2.0;
    let f = |th: f64| -> Result<f64> {
        let c = CrystalConfig {
            theta_pm_deg: th,
            ..probe.clone()
        };
        delta_k_exact(set, &c, w_half, w_half)
    };
    let (lo, hi) = (20.0, 70.0);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoPhaseMatch(format!(
            "Delta k does not change sign for theta in [{lo}, {hi}] deg at lambda_p = {lambda_p0_nm} nm \
             (Delta k = {flo:.3} / {fhi:.3} rad/mm)"
        )));
    }
    let theta = bisect(f, lo, hi, 1e-12, 200)?;
    // guard: the solve must actually close the mismatch
    let kp = k_rad_per_mm(
        set,
        lambda_p0_nm,
        Polarization::Extraordinary,
        theta,
    )?;
    let residual = f(theta)?.abs();
    if residual > 1e-10 * kp {
        return Err(Error::Numeric(format!(
            "phase-matching solve left residual {residual:.3e} rad/mm (> 1e-10 k_p)"
        )));
    }
    Ok(theta)
}

/// The five coefficients of the second-order expansion of Delta k around the
/// degenerate point, with pulse-front-tilt corrections applied per wave:
///
/// Delta k = nps Omega_s + npi Omega_i
///         + 0.5 dps Omega_s^2 + 0.5 dpi Omega_i^2 + dpp Omega_s Omega_i
///
/// where nps = N'_p - N'_s etc. (fs/mm), dps = D'_p - D'_s etc. (fs^2/mm),
/// dpp = D'_p, and Omega are detunings from degeneracy in rad/fs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoefficients {
    pub nps_fs_per_mm: f64,
    pub npi_fs_per_mm: f64,
    pub dps_fs2_per_mm: f64,
    pub dpi_fs2_per_mm: f64,
    pub dpp_fs2_per_mm: f64,
}

pub fn taylor_coefficients(
    set: &SellmeierSet,
    crystal: &CrystalConfig,
    tilt: &TiltConfig,
) -> Result<TaylorCoefficients> {
    crystal.validate()?;
    tilt.validate()?;
    let th = crystal.theta_pm_deg;
    let lambda_0 = crystal.lambda_degenerate_nm();
    let p = wave_dispersion(set, crystal.lambda_p0_nm, Polarization::Extraordinary, th)?;
    let s = wave_dispersion(set, lambda_0, crystal.assignment.signal(), th)?;
    let i = wave_dispersion(set, lambda_0, crystal.assignment.idler(), th)?;
    let (np, dp) = effective_coefficients(&p, tilt.xi_deg, tilt.applied_to.pump);
    let (ns, ds) = effective_coefficients(&s, tilt.xi_deg, tilt.applied_to.signal);
    let (ni, di) = effective_coefficients(&i, tilt.xi_deg, tilt.applied_to.idler);
    Ok(TaylorCoefficients {
        nps_fs_per_mm: np - ns,
        npi_fs_per_mm: np - ni,
        dps_fs2_per_mm: dp - ds,
        dpi_fs2_per_mm: dp - di,
        dpp_fs2_per_mm: dp,
    })
}

/// Evaluate the expansion at detunings (rad/fs); result in rad/mm.
#[inline]
pub fn delta_k_taylor(tc: &TaylorCoefficients, omega_s_det: f64, omega_i_det: f64) -> f64 {
    tc.nps_fs_per_mm * omega_s_det
        + tc.npi_fs_per_mm * omega_i_det
        + 0.5 * tc.dps_fs2_per_mm * omega_s_det * omega_s_det
        + 0.5 * tc.dpi_fs2_per_mm * omega_i_det * omega_i_det
        + tc.dpp_fs2_per_mm * omega_s_det * omega_i_det
}
