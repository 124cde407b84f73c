//! Sweeps of the joint-spectrum shape over the pulse-front tilt angle and
//! solvers that pick the tilt producing a requested correlation regime.
//!
//! A sweep tolerates isolated point failures (a Gaussian fit can reject
//! spectra in small pockets where the intensity has no bell shape): the
//! affected row carries NaNs and the failure note, and the sweep continues.
//! The solvers instead demand clean evaluations near the solution.

use crate::analysis::{
    classify_regime, fit_gaussian, schmidt_decompose, GaussianFit, Regime, RegimeThresholds,
};
use crate::biphoton::{compute_jsa, marginals, GridSpec, JointSpectrum, PumpConfig};
use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_min};
use crate::phasematch::CrystalConfig;
use crate::sellmeier::SellmeierSet;
use crate::tilt::{TiltConfig, WaveSelection};
use serde::{Deserialize, Serialize};

/// Everything held fixed while the tilt angle varies.
#[derive(Debug, Clone)]
pub struct SweepContext<'a> {
    pub set: &'a SellmeierSet,
    pub crystal: CrystalConfig,
    pub pump: PumpConfig,
    pub grid: GridSpec,
    pub applied_to: WaveSelection,
    pub thresholds: RegimeThresholds,
}

/// One sweep row. On a failed evaluation the numeric fields are NaN and
/// `failure` holds the reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub xi_deg: f64,
    pub r: f64,
    pub metric: f64,
    pub entropy_bits: f64,
    pub schmidt_number: f64,
    pub fwhm_s_nm: f64,
    pub fwhm_i_nm: f64,
    pub regime: Option<Regime>,
    pub failure: Option<String>,
}

impl SweepPoint {
    pub fn failed(xi_deg: f64, why: String) -> Self {
        SweepPoint {
            xi_deg,
            r: f64::NAN,
            metric: f64::NAN,
            entropy_bits: f64::NAN,
            schmidt_number: f64::NAN,
            fwhm_s_nm: f64::NAN,
            fwhm_i_nm: f64::NAN,
            regime: None,
            failure: Some(why),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Tilt-angle targets for [`solve_xi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiTarget {
    /// Minimise the decorrelation metric c^2/(ab) (separable spectrum).
    Uncorrelated,
    /// Hit a given statistical correlation r = -c/sqrt(ab).
    RValue(f64),
}

/// Result of a tilt solve: the angle and the full evaluation there.
#[derive(Debug, Clone)]
pub struct XiSolution {
    pub xi_deg: f64,
    pub point: SweepPoint,
}

/// Abscissa tolerance of both solvers, degrees.
pub const XI_SOLVE_TOL_DEG: f64 = 0.02;
/// Pre-scan pitch used to localise the solver bracket, degrees.
const PRESCAN_PITCH_DEG: f64 = 5.0;

impl SweepContext<'_> {
    fn spectrum(&self, xi_deg: f64) -> Result<JointSpectrum> {
        let tilt = TiltConfig::with_selection(xi_deg, self.applied_to)?;
        compute_jsa(self.set, &self.crystal, &tilt, &self.pump, &self.grid)
    }

    fn fit_at(&self, xi_deg: f64) -> Result<GaussianFit> {
        fit_gaussian(&self.spectrum(xi_deg)?)
    }

    /// Full evaluation at one tilt angle: fit, marginals and Schmidt data.
    pub fn evaluate(&self, xi_deg: f64) -> Result<SweepPoint> {
        let g = self.spectrum(xi_deg)?;
        let fit = fit_gaussian(&g)?;
        let m = marginals(&g)?;
        let sch = schmidt_decompose(&g)?;
        Ok(SweepPoint {
            xi_deg,
            r: fit.correlation,
            metric: fit.decorrelation_metric,
            entropy_bits: sch.entropy_bits,
            schmidt_number: sch.schmidt_number,
            fwhm_s_nm: m.fwhm_s_nm,
            fwhm_i_nm: m.fwhm_i_nm,
            regime: Some(classify_regime(&fit, &self.thresholds)),
            failure: None,
        })
    }
}

/// Evaluate `n` tilt angles uniformly over `[xi_lo, xi_hi]` (inclusive).
pub fn sweep_xi(ctx: &SweepContext, xi_lo: f64, xi_hi: f64, n: usize) -> Result<Vec<SweepPoint>> {
    if n < 2 || !(xi_hi > xi_lo) {
        return Err(Error::InvalidInput {
            what: "tilt sweep",
            why: format!("need at least 2 points and xi_hi > xi_lo, got n = {n}, [{xi_lo}, {xi_hi}]"),
        });
    }
    let step = (xi_hi - xi_lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            let xi = xi_lo + k as f64 * step;
            ctx.evaluate(xi)
                .unwrap_or_else(|e| SweepPoint::failed(xi, e.to_string()))
        })
        .collect())
}

/// Find the tilt angle in `[xi_lo, xi_hi]` meeting `target`.
///
/// A coarse pre-scan localises the feature, then golden-section (metric
/// minimum) or bisection (r crossing) refines to [`XI_SOLVE_TOL_DEG`].
pub fn solve_xi(
    ctx: &SweepContext,
    target: XiTarget,
    xi_lo: f64,
    xi_hi: f64,
) -> Result<XiSolution> {
    if !(xi_hi > xi_lo) {
        return Err(Error::InvalidInput {
            what: "tilt solve",
            why: format!("empty bracket [{xi_lo}, {xi_hi}]"),
        });
    }
    let n = ((xi_hi - xi_lo) / PRESCAN_PITCH_DEG).ceil() as usize + 1;
    let n = n.max(3);
    let step = (xi_hi - xi_lo) / (n - 1) as f64;
    let scan: Vec<(f64, Option<GaussianFit>)> = (0..n)
        .map(|k| {
            let xi = xi_lo + k as f64 * step;
            (xi, ctx.fit_at(xi).ok())
        })
        .collect();

    let xi = match target {
        XiTarget::Uncorrelated => {
            let (k_best, _) = scan
                .iter()
                .enumerate()
                .filter_map(|(k, (_, f))| f.as_ref().map(|f| (k, f.decorrelation_metric)))
                .min_by(|(_, u), (_, v)| u.total_cmp(v))
                .ok_or_else(|| {
                    Error::Bracket(format!(
                        "no tilt in [{xi_lo}, {xi_hi}] deg yielded a usable fit"
                    ))
                })?;
            let lo = scan[k_best.saturating_sub(1)].0;
            let hi = scan[(k_best + 1).min(n - 1)].0;
            golden_min(
                |xi| Ok(ctx.fit_at(xi)?.decorrelation_metric),
                lo,
                hi,
                XI_SOLVE_TOL_DEG,
            )?
        }
        XiTarget::RValue(r_target) => {
            if !(-1.0..=1.0).contains(&r_target) {
                return Err(Error::InvalidInput {
                    what: "tilt solve",
                    why: format!("target correlation {r_target} outside [-1, 1]"),
                });
            }
            let pair = scan.windows(2).find_map(|w| {
                let (xa, fa) = (&w[0].0, w[0].1.as_ref()?);
                let (xb, fb) = (&w[1].0, w[1].1.as_ref()?);
                let (da, db) = (fa.correlation - r_target, fb.correlation - r_target);
                (da * db <= 0.0).then_some((*xa, *xb))
            });
            let (lo, hi) = pair.ok_or_else(|| {
                Error::Bracket(format!(
                    "r = {r_target} is not crossed for tilts in [{xi_lo}, {xi_hi}] deg"
                ))
            })?;
            bisect(
                |xi| Ok(ctx.fit_at(xi)?.correlation - r_target),
                lo,
                hi,
                XI_SOLVE_TOL_DEG,
                80,
            )?
        }
    };
    Ok(XiSolution {
        xi_deg: xi,
        point: ctx.evaluate(xi)?,
    })
}
