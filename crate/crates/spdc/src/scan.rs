//! Simulated filter-scan measurement of the joint spectrum and ingestion of
//! measured scan records back into an intensity grid.
//!
//! The simulator convolves the model intensity with the monochromator
//! bandpass, scales to a peak pair rate, adds a flat accidental rate and
//! draws Poisson counts; singles channels follow the convolved marginals
//! with a detection-efficiency factor. Every scan point uses an independent,
//! reproducible random substream derived from (seed, point index), so a
//! parallel evaluation order cannot change the result.

use crate::biphoton::{GridMeta, JointSpectrum};
use crate::error::{Error, Result};
use crate::numeric::quantile;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

/// Scan geometry and statistics. Wavelength ranges are inclusive starts with
/// `step_nm` pitch; ranges must lie inside the model grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Gaussian FWHM of each monochromator bandpass, nm.
    pub bandpass_fwhm_nm: f64,
    /// Scan pitch on both axes, nm; must not exceed the bandpass FWHM.
    pub step_nm: f64,
    /// Signal-axis scan range [lo, hi], nm.
    pub range_s_nm: (f64, f64),
    /// Idler-axis scan range [lo, hi], nm.
    pub range_i_nm: (f64, f64),
    /// Coincidence rate at the joint-spectrum peak, Hz.
    pub pair_rate_peak_hz: f64,
    /// Flat accidental/dark coincidence rate, Hz.
    pub dark_rate_hz: f64,
    /// Pair-to-singles detection efficiency: singles rates are the marginal
    /// rates divided by this factor.
    pub efficiency: f64,
    /// Integration time per point, s.
    pub integration_time_s: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            bandpass_fwhm_nm: 0.2,
            step_nm: 0.2,
            range_s_nm: (790.0, 810.0),
            range_i_nm: (790.0, 810.0),
            pair_rate_peak_hz: 1e4,
            dark_rate_hz: 0.0,
            efficiency: 0.1,
            integration_time_s: 1.0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandpass", self.bandpass_fwhm_nm),
            ("step", self.step_nm),
            ("peak pair rate", self.pair_rate_peak_hz),
            ("integration time", self.integration_time_s),
        ];
        for (what, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput {
                    what: "scan config",
                    why: format!("{what} = {v} must be positive"),
                });
            }
        }
        if self.step_nm > self.bandpass_fwhm_nm {
            return Err(Error::InvalidInput {
                what: "scan config",
                why: format!(
                    "step {} nm exceeds the bandpass FWHM {} nm: the scan would undersample",
                    self.step_nm, self.bandpass_fwhm_nm
                ),
            });
        }
        if !(self.dark_rate_hz.is_finite() && self.dark_rate_hz >= 0.0) {
            return Err(Error::InvalidInput {
                what: "scan config",
                why: format!("dark rate {} Hz must be non-negative", self.dark_rate_hz),
            });
        }
        if !(self.efficiency.is_finite() && self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::InvalidInput {
                what: "scan config",
                why: format!("efficiency {} must lie in (0, 1]", self.efficiency),
            });
        }
        for (axis, (lo, hi)) in [("signal", self.range_s_nm), ("idler", self.range_i_nm)] {
            if !(lo.is_finite() && hi.is_finite() && hi - lo >= self.step_nm) {
                return Err(Error::InvalidInput {
                    what: "scan config",
                    why: format!("{axis} range [{lo}, {hi}] nm must span at least one step"),
                });
            }
        }
        Ok(())
    }

    fn axis(&self, range: (f64, f64)) -> Vec<f64> {
        let n = ((range.1 - range.0) / self.step_nm + 1e-9).floor() as usize + 1;
        (0..n).map(|k| range.0 + k as f64 * self.step_nm).collect()
    }

    pub fn axis_s(&self) -> Vec<f64> {
        self.axis(self.range_s_nm)
    }

    pub fn axis_i(&self) -> Vec<f64> {
        self.axis(self.range_i_nm)
    }
}

/// One scan point: filter positions, counted coincidences, the two singles
/// counts and the integration time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub coincidences: u64,
    pub singles_s: u64,
    pub singles_i: u64,
    pub integration_time_s: f64,
}

/// Gaussian bandpass weights of one filter centred at `center` against axis
/// samples, windowed at +-4 sigma and normalised to unit sum.
fn bandpass_weights(axis: &[f64], center: f64, fwhm: f64) -> Vec<(usize, f64)> {
    let sigma = fwhm / (8.0f64 * 2.0f64.ln()).sqrt();
    let cut = 4.0 * sigma;
    let mut out = Vec::new();
    let mut total = 0.0;
    for (idx, &x) in axis.iter().enumerate() {
        let d = x - center;
        if d.abs() <= cut {
            let w = (-0.5 * (d / sigma) * (d / sigma)).exp();
            out.push((idx, w));
            total += w;
        }
    }
    if total > 0.0 {
        for (_, w) in &mut out {
            *w /= total;
        }
    }
    out
}

/// Expected (noise-free) coincidence-rate map of a scan over the model grid,
/// peak-normalised: the model intensity seen through both bandpasses.
/// Also returns the two convolved singles profiles, each peak-normalised.
fn expected_maps(
    grid: &JointSpectrum,
    cfg: &ScanConfig,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let axis_s = cfg.axis_s();
    let axis_i = cfg.axis_i();
    for (name, scan_axis, grid_axis) in [
        ("signal", &axis_s, &grid.lambda_s_nm),
        ("idler", &axis_i, &grid.lambda_i_nm),
    ] {
        let (lo, hi) = (grid_axis[0], grid_axis[grid_axis.len() - 1]);
        let (slo, shi) = (scan_axis[0], scan_axis[scan_axis.len() - 1]);
        if slo < lo || shi > hi {
            return Err(Error::InvalidInput {
                what: "scan range",
                why: format!(
                    "{name} scan [{slo}, {shi}] nm leaves the model grid [{lo:.3}, {hi:.3}] nm"
                ),
            });
        }
    }

    // per-scan-point weights on the model axes
    let ws: Vec<Vec<(usize, f64)>> = axis_s
        .iter()
        .map(|&c| bandpass_weights(&grid.lambda_s_nm, c, cfg.bandpass_fwhm_nm))
        .collect();
    let wi: Vec<Vec<(usize, f64)>> = axis_i
        .iter()
        .map(|&c| bandpass_weights(&grid.lambda_i_nm, c, cfg.bandpass_fwhm_nm))
        .collect();
    for (name, w) in [("signal", &ws), ("idler", &wi)] {
        if w.iter().any(|v| v.is_empty()) {
            return Err(Error::Numeric(format!(
                "a {name} bandpass window contains no model grid node; refine the model grid \
                 or widen the bandpass"
            )));
        }
    }

    // model marginals for the singles channels
    let (ns, ni) = (grid.n_s(), grid.n_i());
    let mut marg_s = vec![0.0; ns];
    let mut marg_i = vec![0.0; ni];
    for i in 0..ns {
        for j in 0..ni {
            let v = grid.intensity_at(i, j);
            marg_s[i] += v;
            marg_i[j] += v;
        }
    }

    let map: Vec<f64> = ws
        .iter()
        .flat_map(|rows| {
            wi.iter().map(move |cols| {
                let mut acc = 0.0;
                for &(i, a) in rows {
                    for &(j, b) in cols {
                        acc += a * b * grid.intensity_at(i, j);
                    }
                }
                acc
            })
        })
        .collect();
    let sing_s: Vec<f64> = ws
        .iter()
        .map(|rows| rows.iter().map(|&(i, a)| a * marg_s[i]).sum())
        .collect();
    let sing_i: Vec<f64> = wi
        .iter()
        .map(|cols| cols.iter().map(|&(j, b)| b * marg_i[j]).sum())
        .collect();

    let norm = |v: Vec<f64>| -> Result<Vec<f64>> {
        let peak = v.iter().cloned().fold(0.0f64, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Numeric("scan sees only zero intensity".into()));
        }
        Ok(v.iter().map(|x| x / peak).collect())
    };
    Ok((
        norm(map)?,
        norm(sing_s)?,
        norm(sing_i)?,
        axis_s,
        axis_i,
    ))
}

/// Simulate a full scan of the model `grid`. Deterministic for a given
/// (config, seed): point k draws from `ChaCha8` stream k of the seed, so any
/// evaluation order — serial or parallel — produces identical records.
pub fn simulate_scan(grid: &JointSpectrum, cfg: &ScanConfig, seed: u64) -> Result<Vec<ScanRecord>> {
    cfg.validate()?;
    let (map, sing_s, sing_i, axis_s, axis_i) = expected_maps(grid, cfg)?;
    let n_i = axis_i.len();

    let draw = |rng: &mut ChaCha8Rng, mean: f64| -> Result<u64> {
        if mean <= 0.0 {
            return Ok(0);
        }
        let p = Poisson::new(mean).map_err(|e| Error::Numeric(format!("poisson: {e}")))?;
        Ok(p.sample(rng).round() as u64)
    };

    let t = cfg.integration_time_s;
    let mut records = Vec::with_capacity(axis_s.len() * n_i);
    for (p, &ls) in axis_s.iter().enumerate() {
        for (q, &li) in axis_i.iter().enumerate() {
            let idx = p * n_i + q;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            let mean_c = (cfg.pair_rate_peak_hz * map[idx] + cfg.dark_rate_hz) * t;
            let mean_s = cfg.pair_rate_peak_hz / cfg.efficiency * sing_s[p] * t;
            let mean_i = cfg.pair_rate_peak_hz / cfg.efficiency * sing_i[q] * t;
            records.push(ScanRecord {
                lambda_s_nm: ls,
                lambda_i_nm: li,
                coincidences: draw(&mut rng, mean_c)?,
                singles_s: draw(&mut rng, mean_s)?,
                singles_i: draw(&mut rng, mean_i)?,
                integration_time_s: t,
            });
        }
    }
    Ok(records)
}

/// Quantile of the coincidence counts used as the flat dark/accidental
/// estimate during ingestion.
pub const DARK_QUANTILE: f64 = 0.05;

/// Rebuild an intensity-only joint spectrum from scan records.
///
/// The records must tile a full rectangle of filter positions. The flat
/// accidental background is estimated as the [`DARK_QUANTILE`] quantile of
/// the coincidence counts and subtracted; negative results clip to zero.
pub fn ingest_scan(records: &[ScanRecord]) -> Result<JointSpectrum> {
    if records.len() < 4 {
        return Err(Error::InvalidInput {
            what: "scan records",
            why: format!("{} records cannot form a grid", records.len()),
        });
    }
    // collect unique axis positions (quantised to fempto-nm to absorb
    // formatting round-trips)
    let q = |x: f64| (x * 1e6).round() as i64;
    let mut set_s: Vec<i64> = records.iter().map(|r| q(r.lambda_s_nm)).collect();
    let mut set_i: Vec<i64> = records.iter().map(|r| q(r.lambda_i_nm)).collect();
    set_s.sort_unstable();
    set_s.dedup();
    set_i.sort_unstable();
    set_i.dedup();
    let (ns, ni) = (set_s.len(), set_i.len());
    if ns < 2 || ni < 2 || ns * ni != records.len() {
        return Err(Error::InvalidInput {
            what: "scan records",
            why: format!(
                "{} records do not tile the {ns} x {ni} rectangle of filter positions",
                records.len()
            ),
        });
    }
    let pos_s: std::collections::BTreeMap<i64, usize> =
        set_s.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let pos_i: std::collections::BTreeMap<i64, usize> =
        set_i.iter().enumerate().map(|(k, &v)| (v, k)).collect();

    let mut rate = vec![f64::NAN; ns * ni];
    for r in records {
        if !(r.integration_time_s.is_finite() && r.integration_time_s > 0.0) {
            return Err(Error::InvalidInput {
                what: "scan records",
                why: format!("integration time {} s must be positive", r.integration_time_s),
            });
        }
        let i = pos_s[&q(r.lambda_s_nm)];
        let j = pos_i[&q(r.lambda_i_nm)];
        let slot = &mut rate[i * ni + j];
        if !slot.is_nan() {
            return Err(Error::InvalidInput {
                what: "scan records",
                why: format!(
                    "duplicate record at ({}, {}) nm",
                    r.lambda_s_nm, r.lambda_i_nm
                ),
            });
        }
        *slot = r.coincidences as f64 / r.integration_time_s;
    }
    // ns * ni == len and no duplicates => every slot filled

    let dark = quantile(&rate, DARK_QUANTILE)?;
    for v in &mut rate {
        *v = (*v - dark).max(0.0);
    }

    let lambda_s: Vec<f64> = set_s.iter().map(|&v| v as f64 * 1e-6).collect();
    let lambda_i: Vec<f64> = set_i.iter().map(|&v| v as f64 * 1e-6).collect();
    JointSpectrum::from_intensity(lambda_s, lambda_i, rate, GridMeta::default())
}
