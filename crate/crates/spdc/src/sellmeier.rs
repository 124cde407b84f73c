//! Sellmeier dispersion data for uniaxial crystals: TOML-backed coefficient
//! sets with a validity window, principal-index evaluation and analytic
//! wavelength derivatives up to second order.
//!
//! The built-in set `bbo-kato-1986` covers beta barium borate from 220 nm to
//! 1060 nm with the widely used quadratic-offset form
//! n^2 = A + B/(x^2 - C) - D x^2 (x in um).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The one dispersion-formula shape currently supported:
/// n^2 = A + B/(x^2 - C) - D x^2 with x the wavelength in um.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    #[serde(rename = "quadratic-offset")]
    QuadraticOffset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisCoefficients {
    coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SellmeierFile {
    name: String,
    formula: Formula,
    validity_window_nm: [f64; 2],
    ordinary: AxisCoefficients,
    extraordinary: AxisCoefficients,
}

/// A validated uniaxial Sellmeier set (ordinary + extraordinary principal
/// axes), with its wavelength validity window in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierSet {
    pub name: String,
    pub formula: Formula,
    /// [A, B, C, D] for the ordinary axis.
    pub ordinary: [f64; 4],
    /// [A, B, C, D] for the extraordinary principal axis.
    pub extraordinary: [f64; 4],
    /// Inclusive validity window in nm.
    pub window_nm: (f64, f64),
}

/// Principal axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Ordinary,
    Extraordinary,
}

/// Index value with its first and second wavelength derivatives,
/// all with respect to the wavelength in um.
#[derive(Debug, Clone, Copy)]
pub struct IndexDerivatives {
    pub n: f64,
    /// dn/dx, x in um.
    pub dn: f64,
    /// d2n/dx2, x in um.
    pub d2n: f64,
}

const BUILTIN_BBO_KATO_1986: &str = include_str!("../data/bbo_kato_1986.toml");

impl SellmeierSet {
    /// The built-in BBO set (Kato 1986 coefficients).
    pub fn bbo_kato_1986() -> SellmeierSet {
        Self::from_toml_str(BUILTIN_BBO_KATO_1986, "<builtin bbo-kato-1986>")
            .expect("builtin Sellmeier data must parse")
    }

    /// Resolve a config-facing name: a registered set name, or a TOML file
    /// path (tried relative to `base_dir` when given, then as written).
    pub fn resolve(name: &str, base_dir: Option<&std::path::Path>) -> Result<SellmeierSet> {
        match name {
            "bbo-kato-1986" => Ok(Self::bbo_kato_1986()),
            path => {
                let candidate = match base_dir {
                    Some(dir) if !std::path::Path::new(path).is_absolute() => dir.join(path),
                    _ => std::path::PathBuf::from(path),
                };
                let text = std::fs::read_to_string(&candidate)
                    .map_err(|e| Error::io(candidate.display().to_string(), e))?;
                Self::from_toml_str(&text, &candidate.display().to_string())
            }
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<SellmeierSet> {
        let f: SellmeierFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            why: e.to_string(),
        })?;
        let take4 = |axis: &str, v: &[f64]| -> Result<[f64; 4]> {
            <[f64; 4]>::try_from(v).map_err(|_| Error::Parse {
                path: origin.to_string(),
                why: format!(
                    "{axis} axis needs exactly 4 coefficients [A, B, C, D], got {}",
                    v.len()
                ),
            })
        };
        let set = SellmeierSet {
            ordinary: take4("ordinary", &f.ordinary.coefficients)?,
            extraordinary: take4("extraordinary", &f.extraordinary.coefficients)?,
            name: f.name,
            formula: f.formula,
            window_nm: (f.validity_window_nm[0], f.validity_window_nm[1]),
        };
        set.validate(origin)?;
        Ok(set)
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let (lo, hi) = self.window_nm;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::Parse {
                path: origin.to_string(),
                why: format!("validity window [{lo}, {hi}] nm must satisfy 0 < lo < hi"),
            });
        }
        for (axis, c) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    why: format!("{axis} coefficients contain a non-finite value"),
                });
            }
            // the resonance at x^2 = C must sit outside the validity window
            let c2 = c[2];
            let (lo2, hi2) = ((lo * 1e-3).powi(2), (hi * 1e-3).powi(2));
            if c2 >= lo2 && c2 <= hi2 {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    why: format!("{axis} resonance C = {c2} um^2 lies inside the validity window"),
                });
            }
        }
        Ok(())
    }

    pub fn check_window(&self, lambda_nm: f64) -> Result<()> {
        let (lo, hi) = self.window_nm;
        if lambda_nm < lo || lambda_nm > hi || !lambda_nm.is_finite() {
            return Err(Error::WavelengthOutOfRange {
                lambda_nm,
                lo,
                hi,
                set: self.name.clone(),
            });
        }
        Ok(())
    }

    fn coefficients(&self, axis: Axis) -> &[f64; 4] {
        match axis {
            Axis::Ordinary => &self.ordinary,
            Axis::Extraordinary => &self.extraordinary,
        }
    }

    /// Principal refractive index at `lambda_nm` (window-checked).
    pub fn index(&self, axis: Axis, lambda_nm: f64) -> Result<f64> {
        self.check_window(lambda_nm)?;
        Ok(self.index_unchecked(axis, lambda_nm))
    }

    pub(crate) fn index_unchecked(&self, axis: Axis, lambda_nm: f64) -> f64 {
        let x = lambda_nm * 1e-3;
        let [a, b, c, d] = *self.coefficients(axis);
        (a + b / (x * x - c) - d * x * x).sqrt()
    }

    /// Index with analytic first and second derivatives with respect to the
    /// wavelength in um (window-checked).
    ///
    /// With f = n^2: f' = -2Bx/(x^2-C)^2 - 2Dx, f'' = 2B(3x^2+C)/(x^2-C)^3 - 2D,
    /// then n' = f'/(2n) and n'' = f''/(2n) - f'^2/(4 n^3).
    pub fn index_derivatives(&self, axis: Axis, lambda_nm: f64) -> Result<IndexDerivatives> {
        self.check_window(lambda_nm)?;
        let x = lambda_nm * 1e-3;
        let [a, b, c, d] = *self.coefficients(axis);
        let den = x * x - c;
        let f = a + b / den - d * x * x;
        let f1 = -2.0 * b * x / (den * den) - 2.0 * d * x;
        let f2 = 2.0 * b * (3.0 * x * x + c) / (den * den * den) - 2.0 * d;
        let n = f.sqrt();
        let dn = f1 / (2.0 * n);
        let d2n = f2 / (2.0 * n) - f1 * f1 / (4.0 * n * n * n);
        Ok(IndexDerivatives { n, dn, d2n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Hand-frozen check points for the builtin set, computed once from the
    // closed form n^2 = A + B/(x^2-C) - D x^2:
    //   x = 0.8: n_o^2 = 2.7359 + 0.01878/0.62178 - 0.0086656 -> n_o = 1.6605535249
    //   x = 0.4: n_o = 1.6929832660, n_e = 1.5678876665
    //   x = 0.8: n_e = 1.5444203018
    #[test]
    fn builtin_bbo_index_values() {
        let s = SellmeierSet::bbo_kato_1986();
        assert_relative_eq!(s.index(Axis::Ordinary, 800.0).unwrap(), 1.660_553_524_9, epsilon = 1e-9);
        assert_relative_eq!(s.index(Axis::Ordinary, 400.0).unwrap(), 1.692_983_266_0, epsilon = 1e-9);
        assert_relative_eq!(s.index(Axis::Extraordinary, 400.0).unwrap(), 1.567_887_666_5, epsilon = 1e-9);
        assert_relative_eq!(s.index(Axis::Extraordinary, 800.0).unwrap(), 1.544_420_301_8, epsilon = 1e-9);
    }

    #[test]
    fn negative_uniaxial_everywhere_in_window() {
        let s = SellmeierSet::bbo_kato_1986();
        for i in 0..85 {
            let nm = 220.0 + i as f64 * 10.0;
            assert!(
                s.index(Axis::Extraordinary, nm).unwrap() < s.index(Axis::Ordinary, nm).unwrap(),
                "n_e >= n_o at {nm} nm"
            );
        }
    }

    #[test]
    fn window_is_enforced() {
        let s = SellmeierSet::bbo_kato_1986();
        assert!(matches!(
            s.index(Axis::Ordinary, 219.9),
            Err(Error::WavelengthOutOfRange { .. })
        ));
        assert!(s.index(Axis::Ordinary, 1060.1).is_err());
        assert!(s.index(Axis::Ordinary, 220.0).is_ok());
        assert!(s.index(Axis::Ordinary, 1060.0).is_ok());
    }

    #[test]
    fn rejects_malformed_files() {
        let bad_count = r#"
name = "x"
formula = "quadratic-offset"
validity_window_nm = [300.0, 1000.0]
[ordinary]
coefficients = [1.0, 2.0, 3.0]
[extraordinary]
coefficients = [1.0, 2.0, 3.0, 4.0]
"#;
        assert!(SellmeierSet::from_toml_str(bad_count, "t").is_err());

        let unknown_key = r#"
name = "x"
formula = "quadratic-offset"
validity_window_nm = [300.0, 1000.0]
surprise = 1
[ordinary]
coefficients = [2.0, 0.01, 0.01, 0.01]
[extraordinary]
coefficients = [2.0, 0.01, 0.01, 0.01]
"#;
        assert!(SellmeierSet::from_toml_str(unknown_key, "t").is_err());

        let resonance_inside = r#"
name = "x"
formula = "quadratic-offset"
validity_window_nm = [300.0, 1000.0]
[ordinary]
coefficients = [2.0, 0.01, 0.25, 0.01]
[extraordinary]
coefficients = [2.0, 0.01, 0.01, 0.01]
"#;
        assert!(SellmeierSet::from_toml_str(resonance_inside, "t").is_err());
    }

    #[test]
    fn resolve_builtin_and_path() {
        assert_eq!(
            SellmeierSet::resolve("bbo-kato-1986", None).unwrap().name,
            "bbo-kato-1986"
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("custom.toml");
        std::fs::write(&p, BUILTIN_BBO_KATO_1986.replace("bbo-kato-1986", "my-copy")).unwrap();
        let s = SellmeierSet::resolve("custom.toml", Some(dir.path())).unwrap();
        assert_eq!(s.name, "my-copy");
        assert!(SellmeierSet::resolve("missing-set.toml", None).is_err());
    }

    proptest! {
        // analytic derivatives against a 5-point central finite-difference
        // stencil, the independent oracle for everything downstream
        #[test]
        fn derivatives_match_finite_difference(
            nm in 260.0f64..1000.0,
            axis_e in proptest::bool::ANY,
        ) {
            let s = SellmeierSet::bbo_kato_1986();
            let axis = if axis_e { Axis::Extraordinary } else { Axis::Ordinary };
            let d = s.index_derivatives(axis, nm).unwrap();
            let x = nm * 1e-3;
            let h = x * 1e-4;
            let f = |xx: f64| s.index_unchecked(axis, xx * 1e3);
            let fd1 = (f(x - 2.0*h) - 8.0*f(x - h) + 8.0*f(x + h) - f(x + 2.0*h)) / (12.0 * h);
            let fd2 = (-f(x - 2.0*h) + 16.0*f(x - h) - 30.0*f(x) + 16.0*f(x + h) - f(x + 2.0*h))
                / (12.0 * h * h);
            prop_assert!((d.dn - fd1).abs() <= 1e-6 * fd1.abs().max(1e-3));
            prop_assert!((d.d2n - fd2).abs() <= 1e-5 * fd2.abs().max(1e-2));
        }
    }
}
