//! Run configuration: one strict TOML file per run, resolved into the
//! domain configs plus a short hash naming the effective parameter set.
//!
//! Resolution fills defaults (pump carrier from the crystal design
//! wavelength, phase-matching angle from the Sellmeier data, tilt from a
//! grating geometry) and the hash is taken over the *resolved* values, so
//! two files that mean the same run share a hash and any parameter change
//! shows up in every emitted artifact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::RegimeThresholds;
use crate::biphoton::{GridSpec, JointSpectrum, PumpConfig, SpanSpec};
use crate::phasematch::{solve_pm_angle, CrystalConfig, PolarizationAssignment};
use crate::scan::ScanConfig;
use crate::sellmeier::SellmeierSet;
use crate::sweep::XiTarget;
use crate::tilt::{tilt_from_grating, GratingSpec, TiltConfig, WaveSelection};
use crate::{Error, Result};

/// Top-level run file. Unknown keys anywhere are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    /// RNG seed for simulated measurements.
    #[serde(default)]
    pub seed: u64,
    /// Output directory for emitted files; overridable from the CLI.
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub crystal: CrystalSection,
    pub pump: PumpSection,
    #[serde(default)]
    pub tilt: TiltSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub thresholds: Option<RegimeThresholds>,
    #[serde(default)]
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub solve: Option<SolveSection>,
    /// Directory the file was loaded from; anchors relative Sellmeier paths.
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    pub length_mm: f64,
    pub lambda_p0_nm: f64,
    /// Cut angle in degrees; when absent it is solved for collinear
    /// degenerate phase matching from the Sellmeier data.
    #[serde(default)]
    pub theta_pm_deg: Option<f64>,
    #[serde(default)]
    pub assignment: PolarizationAssignment,
    /// Registry name (`bbo-kato-1986`) or path to a Sellmeier TOML file.
    #[serde(default = "default_sellmeier")]
    pub sellmeier: String,
}

fn default_sellmeier() -> String {
    "bbo-kato-1986".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    /// Carrier wavelength; defaults to the crystal design wavelength.
    #[serde(default)]
    pub lambda_nm: Option<f64>,
    pub fwhm_nm: f64,
}

/// Either a direct tilt angle or a grating geometry it is derived from —
/// not both.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltSection {
    #[serde(default)]
    pub xi_deg: Option<f64>,
    #[serde(default)]
    pub grating: Option<GratingSpec>,
    #[serde(default)]
    pub applied_to: WaveSelection,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub span: SpanSpec,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n: 256,
            span: SpanSpec::Auto,
        }
    }
}

/// Scan parameters; unset fields fall back to surrogate defaults that are
/// recorded as assumptions in the emitted files (none of them are measured
/// properties of the reference setup).
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandpass_fwhm_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_s_nm: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_i_nm: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_rate_peak_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dark_rate_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integration_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            start_deg: -60.0,
            stop_deg: 45.0,
            points: 22,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    /// `"uncorrelated"` or a target correlation coefficient in [-1, 1].
    pub target: SolveTarget,
    #[serde(default = "default_solve_lo")]
    pub lo_deg: f64,
    #[serde(default = "default_solve_hi")]
    pub hi_deg: f64,
}

fn default_solve_lo() -> f64 {
    -75.0
}

fn default_solve_hi() -> f64 {
    75.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolveTarget {
    Name(SolveName),
    R(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveName {
    Uncorrelated,
}

impl SolveTarget {
    pub fn to_xi_target(self) -> XiTarget {
        match self {
            SolveTarget::Name(SolveName::Uncorrelated) => XiTarget::Uncorrelated,
            SolveTarget::R(r) => XiTarget::RValue(r),
        }
    }
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection {
            target: SolveTarget::Name(SolveName::Uncorrelated),
            lo_deg: default_solve_lo(),
            hi_deg: default_solve_hi(),
        }
    }
}

/// Fully resolved parameter set: what the run actually used. Serialized
/// into metadata files and hashed for traceability.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub seed: u64,
    /// Name of the resolved Sellmeier set.
    pub sellmeier: String,
    pub crystal: CrystalConfig,
    pub pump: PumpConfig,
    pub tilt: TiltConfig,
    /// Present when the tilt angle was derived from a grating geometry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grating: Option<GratingSpec>,
    pub grid: GridSpec,
    pub thresholds: RegimeThresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
}

/// A loaded run: the Sellmeier data, the resolved parameters, their hash,
/// and where outputs go.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub set: SellmeierSet,
    pub effective: EffectiveConfig,
    pub config_hash: String,
    pub out_dir: PathBuf,
}

/// CLI-level overrides; applied before hashing (seed) or after (out_dir —
/// file placement is not a physics parameter).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut file: RunConfigFile = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            why: e.to_string(),
        })?;
        file.base_dir = path.parent().map(|p| p.to_path_buf());
        Ok(file)
    }

    pub fn from_str_embedded(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            why: e.to_string(),
        })
    }

    /// Fill defaults, solve derived quantities, validate, hash.
    pub fn resolve(&self, over: &Overrides) -> Result<ResolvedRun> {
        let set = SellmeierSet::resolve(&self.crystal.sellmeier, self.base_dir.as_deref())?;

        let assignment = self.crystal.assignment;
        let theta_pm_deg = match self.crystal.theta_pm_deg {
            Some(t) => t,
            None => solve_pm_angle(&set, self.crystal.lambda_p0_nm, assignment)?,
        };
        let crystal = CrystalConfig {
            length_mm: self.crystal.length_mm,
            theta_pm_deg,
            assignment,
            lambda_p0_nm: self.crystal.lambda_p0_nm,
        };
        crystal.validate()?;

        let pump = PumpConfig {
            lambda_nm: self.pump.lambda_nm.unwrap_or(self.crystal.lambda_p0_nm),
            fwhm_nm: self.pump.fwhm_nm,
        };
        pump.validate()?;

        let tilt = match (self.tilt.xi_deg, &self.tilt.grating) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "tilt: give either xi_deg or a [tilt.grating] table, not both".into(),
                ));
            }
            (Some(xi), None) => TiltConfig::with_selection(xi, self.tilt.applied_to)?,
            (None, Some(g)) => {
                let xi = tilt_from_grating(g, pump.lambda_nm)?;
                TiltConfig::with_selection(xi, self.tilt.applied_to)?
            }
            (None, None) => TiltConfig::with_selection(0.0, self.tilt.applied_to)?,
        };

        let grid = GridSpec {
            n: self.grid.n,
            span: self.grid.span,
        };
        grid.validate()?;

        if let Some(s) = &self.solve {
            if let SolveTarget::R(r) = s.target {
                if !(-1.0..=1.0).contains(&r) {
                    return Err(Error::Config(format!(
                        "solve.target = {r} is not a correlation coefficient in [-1, 1]"
                    )));
                }
            }
            if !(s.lo_deg < s.hi_deg) {
                return Err(Error::Config(format!(
                    "solve range [{}, {}] deg is empty",
                    s.lo_deg, s.hi_deg
                )));
            }
        }
        if let Some(s) = &self.sweep {
            if !(s.start_deg < s.stop_deg) || s.points < 2 {
                return Err(Error::Config(format!(
                    "sweep range [{}, {}] deg with {} points needs start < stop and at least 2 points",
                    s.start_deg, s.stop_deg, s.points
                )));
            }
        }

        let effective = EffectiveConfig {
            seed: over.seed.unwrap_or(self.seed),
            sellmeier: set.name.clone(),
            crystal,
            pump,
            tilt,
            grating: self.tilt.grating,
            grid,
            thresholds: self.thresholds.unwrap_or_default(),
            scan: self.scan,
            sweep: self.sweep,
            solve: self.solve,
        };
        let config_hash = effective.hash()?;
        let out_dir = over
            .out_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.clone());
        Ok(ResolvedRun {
            set,
            effective,
            config_hash,
            out_dir,
        })
    }
}

impl EffectiveConfig {
    /// Canonical text form of the resolved parameters.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("config serialization: {e}")))
    }

    /// First 12 hex digits of the SHA-256 of the canonical text form.
    pub fn hash(&self) -> Result<String> {
        let text = self.to_toml_string()?;
        let digest = Sha256::digest(text.as_bytes());
        let mut out = String::with_capacity(12);
        for b in &digest[..6] {
            out.push_str(&format!("{b:02x}"));
        }
        Ok(out)
    }
}

impl ResolvedRun {
    /// Scan parameters with surrogate defaults filled in. Ranges default to
    /// the central 80% of the computed grid (snapped to whole steps around
    /// the centre); the returned list names every field that fell back to a
    /// default rather than a configured value.
    pub fn scan_config(&self, grid: &JointSpectrum) -> Result<(ScanConfig, Vec<&'static str>)> {
        let section = self.effective.scan.unwrap_or_default();
        let stock = ScanConfig::default();
        let mut assumed = Vec::new();
        let mut take = |given: Option<f64>, fallback: f64, name: &'static str| -> f64 {
            match given {
                Some(v) => v,
                None => {
                    assumed.push(name);
                    fallback
                }
            }
        };
        let bandpass_fwhm_nm = take(
            section.bandpass_fwhm_nm,
            stock.bandpass_fwhm_nm,
            "bandpass_fwhm_nm",
        );
        let step_nm = take(section.step_nm, stock.step_nm, "step_nm");
        let pair_rate_peak_hz = take(
            section.pair_rate_peak_hz,
            stock.pair_rate_peak_hz,
            "pair_rate_peak_hz",
        );
        let dark_rate_hz = take(section.dark_rate_hz, stock.dark_rate_hz, "dark_rate_hz");
        let efficiency = take(section.efficiency, stock.efficiency, "efficiency");
        let integration_time_s = take(
            section.integration_time_s,
            stock.integration_time_s,
            "integration_time_s",
        );

        let mut centered = |axis: &[f64], name: &'static str| -> (f64, f64) {
            assumed.push(name);
            let lo = axis[0];
            let hi = axis[axis.len() - 1];
            let center = 0.5 * (lo + hi);
            let half = 0.4 * (hi - lo);
            let k = (half / step_nm).floor().max(0.0);
            (center - k * step_nm, center + k * step_nm)
        };
        let range_s_nm = match section.range_s_nm {
            Some(r) => r,
            None => centered(&grid.lambda_s_nm, "range_s_nm"),
        };
        let range_i_nm = match section.range_i_nm {
            Some(r) => r,
            None => centered(&grid.lambda_i_nm, "range_i_nm"),
        };

        let cfg = ScanConfig {
            bandpass_fwhm_nm,
            step_nm,
            range_s_nm,
            range_i_nm,
            pair_rate_peak_hz,
            dark_rate_hz,
            efficiency,
            integration_time_s,
        };
        cfg.validate()?;
        Ok((cfg, assumed))
    }
}

/// Embedded one-command parameter sets reproducing the reference operating
/// points: `fig3a` (no tilt), `fig3c` (saturated anticorrelation, 38 deg),
/// `fig3e` (decorrelated, -20 deg), `fig3g` (positive correlation,
/// -52 deg), and `fig4` (0.5 nm pump at its own decorrelation angle).
pub const PRESET_NAMES: [&str; 5] = ["fig3a", "fig3c", "fig3e", "fig3g", "fig4"];

pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "fig3a" => Some(include_str!("../presets/fig3a.toml")),
        "fig3c" => Some(include_str!("../presets/fig3c.toml")),
        "fig3e" => Some(include_str!("../presets/fig3e.toml")),
        "fig3g" => Some(include_str!("../presets/fig3g.toml")),
        "fig4" => Some(include_str!("../presets/fig4.toml")),
        _ => None,
    }
}

pub fn load_preset(name: &str) -> Result<RunConfigFile> {
    let text = preset(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset '{name}' (available: {})",
            PRESET_NAMES.join(", ")
        ))
    })?;
    RunConfigFile::from_str_embedded(text, &format!("preset '{name}'"))
}
