//! Physical constants and the wavelength/angular-frequency domain types.
//!
//! All public interfaces of the crate speak nm, fs, mm and degrees; this
//! module pins the conversion constants so no other file hard-codes c.

use crate::error::{Error, Result};

/// Speed of light in nm/fs.
pub const C_NM_PER_FS: f64 = 299.792458;
/// Speed of light in mm/fs.
pub const C_MM_PER_FS: f64 = 2.997_924_58e-4;
/// Speed of light in um/fs.
pub const C_UM_PER_FS: f64 = 0.299_792_458;

/// Vacuum wavelength, strictly positive and finite, in nm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

/// Angular frequency, strictly positive and finite, in rad/fs.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(f64);

impl Wavelength {
    pub fn from_nm(nm: f64) -> Result<Self> {
        if nm.is_finite() && nm > 0.0 {
            Ok(Wavelength(nm))
        } else {
            Err(Error::InvalidInput {
                what: "wavelength",
                why: format!("{nm} nm is not a positive finite number"),
            })
        }
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn um(self) -> f64 {
        self.0 * 1e-3
    }

    pub fn angular_frequency(self) -> AngularFrequency {
        AngularFrequency(2.0 * std::f64::consts::PI * C_NM_PER_FS / self.0)
    }
}

impl AngularFrequency {
    pub fn from_rad_per_fs(w: f64) -> Result<Self> {
        if w.is_finite() && w > 0.0 {
            Ok(AngularFrequency(w))
        } else {
            Err(Error::InvalidInput {
                what: "angular frequency",
                why: format!("{w} rad/fs is not a positive finite number"),
            })
        }
    }

    pub fn rad_per_fs(self) -> f64 {
        self.0
    }

    pub fn wavelength(self) -> Wavelength {
        Wavelength(2.0 * std::f64::consts::PI * C_NM_PER_FS / self.0)
    }
}

/// rad/fs for a vacuum wavelength in nm. Bare-f64 twin of the domain types
/// for hot loops; callers guarantee positivity.
#[inline]
pub fn omega_from_lambda_nm(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_NM_PER_FS / lambda_nm
}

/// nm for an angular frequency in rad/fs.
#[inline]
pub fn lambda_nm_from_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_NM_PER_FS / omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_trip_wavelength_frequency() {
        for nm in [220.0, 400.0, 532.0, 800.0, 1060.0] {
            let w = Wavelength::from_nm(nm).unwrap();
            let back = w.angular_frequency().wavelength();
            assert_relative_eq!(back.nm(), nm, max_relative = 1e-12);
        }
    }

    #[test]
    fn known_conversion_point() {
        // 800 nm -> 2*pi*299.792458/800 = 2.35456... rad/fs
        let w = Wavelength::from_nm(800.0).unwrap().angular_frequency();
        assert_relative_eq!(w.rad_per_fs(), 2.354_564_459_1, max_relative = 1e-10);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(Wavelength::from_nm(0.0).is_err());
        assert!(Wavelength::from_nm(-5.0).is_err());
        assert!(Wavelength::from_nm(f64::NAN).is_err());
        assert!(AngularFrequency::from_rad_per_fs(f64::INFINITY).is_err());
    }

    #[test]
    fn bare_helpers_match_domain_types() {
        let nm = 713.0;
        let w = Wavelength::from_nm(nm).unwrap();
        assert_eq!(omega_from_lambda_nm(nm), w.angular_frequency().rad_per_fs());
        assert_eq!(lambda_nm_from_omega(omega_from_lambda_nm(nm)), nm);
    }
}
