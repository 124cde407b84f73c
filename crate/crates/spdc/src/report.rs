//! Analysis reports: fit, Schmidt spectrum, and regime for one joint
//! spectrum, serialised as TOML.

use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    classify_regime, fit_gaussian, schmidt_decompose, RegimeThresholds, FIT_MASK_REL,
};
use crate::biphoton::{marginals, JointSpectrum};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    /// What was analysed (file name or a synthetic label).
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    /// True when the source carried no amplitude (measured or ingested
    /// data): the Schmidt block then rests on a zero-phase assumption.
    pub intensity_only: bool,
    /// Fraction of the peak below which nodes are excluded from the fit.
    pub fit_mask_rel: f64,
    pub regime: String,
    pub fit: FitBlock,
    pub schmidt: SchmidtBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<MarginalsBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitBlock {
    pub a_fs2: f64,
    pub b_fs2: f64,
    pub c_fs2: f64,
    pub metric: f64,
    pub r: f64,
    pub overlap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchmidtBlock {
    pub entropy_bits: f64,
    pub schmidt_number: f64,
    pub zero_phase_assumed: bool,
    /// Largest mode weights, descending (at most eight).
    pub modes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalsBlock {
    pub fwhm_s_nm: f64,
    pub fwhm_i_nm: f64,
}

/// Run the full analysis chain on a spectrum. Marginal widths are included
/// when the support is contained; a clipped support drops the block rather
/// than failing the whole report.
pub fn analyze_spectrum(
    g: &JointSpectrum,
    th: &RegimeThresholds,
    source: String,
    config_hash: Option<String>,
) -> Result<AnalysisReport> {
    let fit = fit_gaussian(g)?;
    let schmidt = schmidt_decompose(g)?;
    let regime = classify_regime(&fit, th);
    let marg = marginals(g).ok().map(|m| MarginalsBlock {
        fwhm_s_nm: m.fwhm_s_nm,
        fwhm_i_nm: m.fwhm_i_nm,
    });
    Ok(AnalysisReport {
        source,
        config_hash,
        intensity_only: g.amplitude.is_none(),
        fit_mask_rel: FIT_MASK_REL,
        regime: regime.to_string(),
        fit: FitBlock {
            a_fs2: fit.a_fs2,
            b_fs2: fit.b_fs2,
            c_fs2: fit.c_fs2,
            metric: fit.decorrelation_metric,
            r: fit.correlation,
            overlap: fit.overlap,
        },
        schmidt: SchmidtBlock {
            entropy_bits: schmidt.entropy_bits,
            schmidt_number: schmidt.schmidt_number,
            zero_phase_assumed: schmidt.from_intensity_only,
            modes: schmidt.coefficients.iter().take(8).copied().collect(),
        },
        marginals: marg,
    })
}

impl AnalysisReport {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("report serialization: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{compute_jsa, GridSpec, PumpConfig};
    use crate::phasematch::{solve_pm_angle, CrystalConfig, PolarizationAssignment};
    use crate::sellmeier::SellmeierSet;
    use crate::tilt::TiltConfig;

    fn jsa(xi_deg: f64, n: usize) -> JointSpectrum {
        let set = SellmeierSet::bbo_kato_1986();
        let theta = solve_pm_angle(&set, 400.0, PolarizationAssignment::default()).unwrap();
        let crystal = CrystalConfig {
            length_mm: 3.5,
            theta_pm_deg: theta,
            assignment: PolarizationAssignment::default(),
            lambda_p0_nm: 400.0,
        };
        let pump = PumpConfig {
            lambda_nm: 400.0,
            fwhm_nm: 2.0,
        };
        compute_jsa(
            &set,
            &crystal,
            &TiltConfig::new(xi_deg).unwrap(),
            &pump,
            &GridSpec::auto(n),
        )
        .unwrap()
    }

    #[test]
    fn report_assembles_all_blocks_for_a_model_grid()
    {
        let g = jsa(0.0, 128);
        let report = analyze_spectrum(
            &g,
            &RegimeThresholds::default(),
            "model".into(),
            Some("deadbeef0123".into()),
        )
        .unwrap();
        assert!(!report.intensity_only);
        assert!(!report.schmidt.zero_phase_assumed);
        assert_eq!(report.regime, "anticorrelated");
        assert!((report.fit.r - -0.901).abs() < 5e-3);
        assert!((report.fit.metric - report.fit.r * report.fit.r).abs() < 1e-12);
        assert!(report.schmidt.modes.len() <= 8);
        assert!(report.schmidt.modes[0] > report.schmidt.modes[1]);
        let m = report.marginals.as_ref().unwrap();
        assert!(m.fwhm_i_nm > m.fwhm_s_nm);

        let text = report.to_toml_string().unwrap();
        let value: toml::Value = toml::from_str(&text).unwrap();
        assert_eq!(value["regime"].as_str().unwrap(), "anticorrelated");
        assert_eq!(value["config_hash"].as_str().unwrap(), "deadbeef0123");
        assert!(value["fit"]["overlap"].as_float().unwrap() > 0.9);
        assert_eq!(value["schmidt"]["zero_phase_assumed"].as_bool(), Some(false));
        assert_eq!(
            value["fit_mask_rel"].as_float().unwrap(),
            FIT_MASK_REL
        );
    }

    #[test]
    fn intensity_only_source_is_flagged_through_to_schmidt() {
        let g = jsa(0.0, 96);
        let stripped = JointSpectrum::from_intensity(
            g.lambda_s_nm.clone(),
            g.lambda_i_nm.clone(),
            g.intensity.clone(),
            g.meta.clone(),
        )
        .unwrap();
        let report = analyze_spectrum(
            &stripped,
            &RegimeThresholds::default(),
            "ingested".into(),
            None,
        )
        .unwrap();
        assert!(report.intensity_only);
        assert!(report.schmidt.zero_phase_assumed);
        let text = report.to_toml_string().unwrap();
        assert!(!text.contains("config_hash"));
    }
}
