//! Propagation quantities for o- and e-polarised waves in a uniaxial crystal:
//! angle-dependent refractive index, wavevector, inverse group velocity,
//! group-velocity dispersion and spatial walk-off — all from analytic
//! derivatives of the Sellmeier forms.

use crate::error::Result;
use crate::sellmeier::{Axis, IndexDerivatives, SellmeierSet};
use crate::units::{C_MM_PER_FS, C_UM_PER_FS};

/// Polarisation of a wave relative to the crystal optic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Polarization {
    #[serde(rename = "o")]
    Ordinary,
    #[serde(rename = "e")]
    Extraordinary,
}

/// Everything the phase-matching layer needs about one wave at one
/// wavelength: wavevector magnitude k (rad/nm), inverse group velocity
/// N (fs/mm), group-velocity dispersion D (fs^2/mm) and the walk-off angle
/// rho (degrees; zero for ordinary waves).
#[derive(Debug, Clone, Copy)]
pub struct WaveDispersion {
    pub k_rad_per_nm: f64,
    pub n_fs_per_mm: f64,
    pub d_fs2_per_mm: f64,
    pub rho_deg: f64,
}

/// Refractive index seen by a wave propagating at `theta_deg` to the optic
/// axis: the principal value for o-waves, the index-ellipse combination
/// 1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2 for e-waves.
pub fn refractive_index(
    set: &SellmeierSet,
    lambda_nm: f64,
    pol: Polarization,
    theta_deg: f64,
) -> Result<f64> {
    match pol {
        Polarization::Ordinary => set.index(Axis::Ordinary, lambda_nm),
        Polarization::Extraordinary => {
            let no = set.index(Axis::Ordinary, lambda_nm)?;
            let ne = set.index(Axis::Extraordinary, lambda_nm)?;
            let th = theta_deg.to_radians();
            let g = th.cos().powi(2) / (no * no) + th.sin().powi(2) / (ne * ne);
            Ok(g.powf(-0.5))
        }
    }
}

/// Index and wavelength derivatives (per um) for a wave at angle theta.
///
/// For the e-wave, with g = cos^2(th) u + sin^2(th) v, u = n_o^-2, v = n_e^-2:
/// n = g^-1/2, n' = -g'/(2 g^3/2), n'' = 3 g'^2/(4 g^5/2) - g''/(2 g^3/2),
/// where u' = -f'/f^2 and u'' = (2 f'^2 - f f'')/f^3 for f = n_o^2 (same for v).
fn index_derivatives_at_angle(
    set: &SellmeierSet,
    lambda_nm: f64,
    pol: Polarization,
    theta_deg: f64,
) -> Result<IndexDerivatives> {
    match pol {
        Polarization::Ordinary => set.index_derivatives(Axis::Ordinary, lambda_nm),
        Polarization::Extraordinary => {
            let o = set.index_derivatives(Axis::Ordinary, lambda_nm)?;
            let e = set.index_derivatives(Axis::Extraordinary, lambda_nm)?;
            let th = theta_deg.to_radians();
            let (c2, s2) = (th.cos().powi(2), th.sin().powi(2));

            let recip = |d: &IndexDerivatives| {
                let f = d.n * d.n;
                let f1 = 2.0 * d.n * d.dn;
                let f2 = 2.0 * (d.dn * d.dn + d.n * d.d2n);
                let u = 1.0 / f;
                let u1 = -f1 / (f * f);
                let u2 = (2.0 * f1 * f1 - f * f2) / (f * f * f);
                (u, u1, u2)
            };
            let (uo, uo1, uo2) = recip(&o);
            let (ue, ue1, ue2) = recip(&e);
            let g = c2 * uo + s2 * ue;
            let g1 = c2 * uo1 + s2 * ue1;
            let g2 = c2 * uo2 + s2 * ue2;
            let n = g.powf(-0.5);
            let dn = -0.5 * g1 * g.powf(-1.5);
            let d2n = 0.75 * g1 * g1 * g.powf(-2.5) - 0.5 * g2 * g.powf(-1.5);
            Ok(IndexDerivatives { n, dn, d2n })
        }
    }
}

/// Spatial walk-off angle of an e-wave at `theta_deg`, in degrees:
/// tan(rho) = (n(theta)^2 / 2) (n_e^-2 - n_o^-2) sin(2 theta).
/// Ordinary waves do not walk off.
pub fn walk_off_deg(
    set: &SellmeierSet,
    lambda_nm: f64,
    pol: Polarization,
    theta_deg: f64,
) -> Result<f64> {
    match pol {
        Polarization::Ordinary => Ok(0.0),
        Polarization::Extraordinary => {
            let no = set.index(Axis::Ordinary, lambda_nm)?;
            let ne = set.index(Axis::Extraordinary, lambda_nm)?;
            let nth = refractive_index(set, lambda_nm, pol, theta_deg)?;
            let th = theta_deg.to_radians();
            let t = 0.5 * nth * nth * (1.0 / (ne * ne) - 1.0 / (no * no)) * (2.0 * th).sin();
            Ok(t.atan().to_degrees())
        }
    }
}

/// Full dispersion bundle for one wave.
///
/// k = 2 pi n / lambda (rad/nm); N = (n - x dn/dx)/c = group index / c (fs/mm);
/// D = x^3 (d2n/dx2) / (2 pi c^2) (fs^2/mm), with x the wavelength.
pub fn wave_dispersion(
    set: &SellmeierSet,
    lambda_nm: f64,
    pol: Polarization,
    theta_deg: f64,
) -> Result<WaveDispersion> {
    let d = index_derivatives_at_angle(set, lambda_nm, pol, theta_deg)?;
    let x_um = lambda_nm * 1e-3;
    let k_rad_per_nm = 2.0 * std::f64::consts::PI * d.n / lambda_nm;
    let group_index = d.n - x_um * d.dn;
    let n_fs_per_mm = group_index / C_MM_PER_FS;
    // x^3 n'' / (2 pi c^2) in fs^2/um, then um -> mm
    let d_fs2_per_um =
        x_um.powi(3) * d.d2n / (2.0 * std::f64::consts::PI * C_UM_PER_FS * C_UM_PER_FS);
    let d_fs2_per_mm = d_fs2_per_um * 1e3;
    let rho_deg = walk_off_deg(set, lambda_nm, pol, theta_deg)?;
    Ok(WaveDispersion {
        k_rad_per_nm,
        n_fs_per_mm,
        d_fs2_per_mm,
        rho_deg,
    })
}
