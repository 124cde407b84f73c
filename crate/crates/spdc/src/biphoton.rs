//! The two-photon joint spectrum: pump envelope, wavelength-gridded joint
//! spectral amplitude/intensity, spectral marginals and the width of the
//! temporal correlation function.

use crate::error::{Error, Result};
use crate::numeric::{fwhm_interpolated, sinc};
use crate::phasematch::{delta_k_taylor, taylor_coefficients, CrystalConfig, TaylorCoefficients};
use crate::sellmeier::SellmeierSet;
use crate::tilt::TiltConfig;
use crate::units::omega_from_lambda_nm;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Transform-limited Gaussian pump pulse, specified by its central
/// wavelength and intensity-FWHM bandwidth (both nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub lambda_nm: f64,
    pub fwhm_nm: f64,
}

impl PumpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_nm.is_finite() && self.lambda_nm > 0.0) {
            return Err(Error::InvalidInput {
                what: "pump wavelength",
                why: format!("{} nm must be positive", self.lambda_nm),
            });
        }
        if !(self.fwhm_nm.is_finite() && self.fwhm_nm > 0.0 && self.fwhm_nm < self.lambda_nm) {
            return Err(Error::InvalidInput {
                what: "pump bandwidth",
                why: format!(
                    "{} nm FWHM must be positive and below the carrier wavelength",
                    self.fwhm_nm
                ),
            });
        }
        Ok(())
    }

    /// Intensity-FWHM bandwidth converted to angular frequency, rad/fs.
    pub fn fwhm_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * crate::units::C_NM_PER_FS * self.fwhm_nm
            / (self.lambda_nm * self.lambda_nm)
    }

    /// Field envelope at detuning `omega_det` (rad/fs) of the summed pair
    /// frequency from the pump carrier: exp(-2 ln2 w^2 / dw^2), normalised to
    /// 1 at zero detuning so that |envelope|^2 has FWHM `fwhm_omega`.
    pub fn envelope(&self, omega_det: f64) -> f64 {
        let dw = self.fwhm_omega();
        (-2.0 * std::f64::consts::LN_2 * omega_det * omega_det / (dw * dw)).exp()
    }
}

/// Grid sizing: node count per axis plus either explicit wavelength spans or
/// automatic sizing from a coarse probe pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub span: SpanSpec,
}

/// Half-width of each wavelength axis around the degenerate wavelength:
/// the signal axis runs from `lambda_0 - span_s_nm` to `lambda_0 + span_s_nm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpanSpec {
    #[serde(with = "auto_str")]
    Auto,
    Explicit {
        span_s_nm: f64,
        span_i_nm: f64,
    },
}

mod auto_str {
    pub fn serialize<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<(), D::Error> {
        use serde::Deserialize;
        let v = String::deserialize(d)?;
        if v == "auto" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!(
                "span must be \"auto\" or {{ span_s_nm, span_i_nm }}, got \"{v}\""
            )))
        }
    }
}

impl GridSpec {
    pub fn auto(n: usize) -> Self {
        GridSpec {
            n,
            span: SpanSpec::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(Error::InvalidInput {
                what: "grid size",
                why: format!("n = {} must be at least 16", self.n),
            });
        }
        if let SpanSpec::Explicit { span_s_nm, span_i_nm } = self.span {
            for (axis, v) in [("signal", span_s_nm), ("idler", span_i_nm)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidInput {
                        what: "grid span",
                        why: format!("{axis} span {v} nm must be positive"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Provenance carried by a computed grid into reports and files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridMeta {
    pub lambda_p0_nm: Option<f64>,
    pub pump_fwhm_nm: Option<f64>,
    pub xi_deg: Option<f64>,
    pub theta_pm_deg: Option<f64>,
    pub crystal_length_mm: Option<f64>,
    pub sellmeier_name: Option<String>,
}

/// A joint spectrum sampled on a rectilinear wavelength grid (signal axis
/// outer/rows, idler inner/columns, both ascending in nm). The intensity is
/// peak-normalised to 1; the amplitude, when the grid was produced by the
/// model rather than ingested from measured counts, is peak-normalised in
/// magnitude and carries the sign structure of the phase-matching function.
#[derive(Debug, Clone)]
pub struct JointSpectrum {
    pub lambda_s_nm: Vec<f64>,
    pub lambda_i_nm: Vec<f64>,
    /// Row-major n_s x n_i amplitude; `None` for intensity-only data.
    pub amplitude: Option<Vec<Complex64>>,
    /// Row-major n_s x n_i intensity, max exactly 1.
    pub intensity: Vec<f64>,
    pub meta: GridMeta,
}

impl JointSpectrum {
    pub fn n_s(&self) -> usize {
        self.lambda_s_nm.len()
    }

    pub fn n_i(&self) -> usize {
        self.lambda_i_nm.len()
    }

    #[inline]
    pub fn intensity_at(&self, i_s: usize, i_i: usize) -> f64 {
        self.intensity[i_s * self.n_i() + i_i]
    }

    /// Build from a complex amplitude; normalises so that peak |amp|^2 = 1.
    pub fn from_amplitude(
        lambda_s_nm: Vec<f64>,
        lambda_i_nm: Vec<f64>,
        amplitude: Vec<Complex64>,
        meta: GridMeta,
    ) -> Result<Self> {
        check_axes(&lambda_s_nm, &lambda_i_nm, amplitude.len())?;
        let peak = amplitude
            .iter()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Numeric("joint amplitude is identically zero".into()));
        }
        let amplitude: Vec<Complex64> = amplitude.iter().map(|a| a / peak).collect();
        let intensity = amplitude.iter().map(|a| a.norm_sqr()).collect();
        Ok(JointSpectrum {
            lambda_s_nm,
            lambda_i_nm,
            amplitude: Some(amplitude),
            intensity,
            meta,
        })
    }

    /// Build from a non-negative intensity map (e.g. ingested counts);
    /// normalises the peak to 1 and leaves the amplitude empty.
    pub fn from_intensity(
        lambda_s_nm: Vec<f64>,
        lambda_i_nm: Vec<f64>,
        intensity: Vec<f64>,
        meta: GridMeta,
    ) -> Result<Self> {
        check_axes(&lambda_s_nm, &lambda_i_nm, intensity.len())?;
        if intensity.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidInput {
                what: "intensity grid",
                why: "contains negative or non-finite entries".into(),
            });
        }
        let peak = intensity.iter().cloned().fold(0.0f64, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Numeric("joint intensity is identically zero".into()));
        }
        let intensity = intensity.iter().map(|v| v / peak).collect();
        Ok(JointSpectrum {
            lambda_s_nm,
            lambda_i_nm,
            amplitude: None,
            intensity,
            meta,
        })
    }

    /// Largest intensity on the outer frame of the grid (support check).
    pub fn edge_intensity(&self) -> f64 {
        let (ns, ni) = (self.n_s(), self.n_i());
        let mut edge = 0.0f64;
        for j in 0..ni {
            edge = edge.max(self.intensity_at(0, j)).max(self.intensity_at(ns - 1, j));
        }
        for i in 0..ns {
            edge = edge.max(self.intensity_at(i, 0)).max(self.intensity_at(i, ni - 1));
        }
        edge
    }
}

fn check_axes(s: &[f64], i: &[f64], len: usize) -> Result<()> {
    for (name, ax) in [("signal", s), ("idler", i)] {
        if ax.len() < 2 || ax.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput {
                what: "grid axis",
                why: format!("{name} axis must be strictly ascending with >= 2 points"),
            });
        }
    }
    if s.len() * i.len() != len {
        return Err(Error::InvalidInput {
            what: "grid data",
            why: format!("{} x {} axes vs {} values", s.len(), i.len(), len),
        });
    }
    Ok(())
}

/// Maximum relative edge intensity accepted before a grid (or slice) is
/// declared clipped.
pub const EDGE_INTENSITY_LIMIT: f64 = 1e-3;

const AUTO_PROBE_N: usize = 64;
const AUTO_GROWTH: f64 = 1.4;
const AUTO_MAX_ROUNDS: usize = 16;

/// Compute the joint spectral amplitude
/// phi = pump_envelope(Omega_s + Omega_i) * sinc(Delta k L / 2)
/// on a wavelength grid centred at the degenerate pair wavelength, with
/// Delta k from the tilted second-order expansion. Intensity is
/// peak-normalised.
///
/// With `SpanSpec::Auto` the spans start at the pump-bandwidth scale and are
/// grown per axis by a coarse probe pass until the edge intensity falls
/// below [`EDGE_INTENSITY_LIMIT`] (error if the Sellmeier window is hit
/// first).
pub fn compute_jsa(
    set: &SellmeierSet,
    crystal: &CrystalConfig,
    tilt: &TiltConfig,
    pump: &PumpConfig,
    grid: &GridSpec,
) -> Result<JointSpectrum> {
    crystal.validate()?;
    tilt.validate()?;
    pump.validate()?;
    grid.validate()?;
    if (pump.lambda_nm - crystal.lambda_p0_nm).abs() > 1e-9 {
        return Err(Error::InvalidInput {
            what: "pump wavelength",
            why: format!(
                "pump carrier {} nm does not match the crystal design wavelength {} nm",
                pump.lambda_nm, crystal.lambda_p0_nm
            ),
        });
    }
    let tc = taylor_coefficients(set, crystal, tilt)?;

    let meta = GridMeta {
        lambda_p0_nm: Some(crystal.lambda_p0_nm),
        pump_fwhm_nm: Some(pump.fwhm_nm),
        xi_deg: Some(tilt.xi_deg),
        theta_pm_deg: Some(crystal.theta_pm_deg),
        crystal_length_mm: Some(crystal.length_mm),
        sellmeier_name: Some(set.name.clone()),
    };

    let (mut span_s, mut span_i) = match grid.span {
        SpanSpec::Explicit { span_s_nm, span_i_nm } => {
            return build_grid(crystal, pump, &tc, grid.n, span_s_nm, span_i_nm, meta);
        }
        SpanSpec::Auto => auto_spans(set, crystal, pump, &tc)?,
    };

    // the coarse probe can under-sample an oscillatory border, so confirm at
    // the requested resolution and keep growing while the edge peeks over
    let lambda_0 = crystal.lambda_degenerate_nm();
    let window = set.window_nm;
    for _ in 0..AUTO_MAX_ROUNDS {
        let g = build_grid(crystal, pump, &tc, grid.n, span_s, span_i, meta.clone())?;
        let (edge_s, edge_i) = edge_by_axis(&g);
        if edge_s < EDGE_INTENSITY_LIMIT && edge_i < EDGE_INTENSITY_LIMIT {
            return Ok(g);
        }
        if edge_s >= EDGE_INTENSITY_LIMIT {
            span_s *= AUTO_GROWTH;
        }
        if edge_i >= EDGE_INTENSITY_LIMIT {
            span_i *= AUTO_GROWTH;
        }
        let reach = span_s.max(span_i);
        if lambda_0 - reach < window.0 || lambda_0 + reach > window.1 {
            return Err(Error::SupportClipped {
                location: "auto span refinement (Sellmeier validity window reached)",
                edge: edge_s.max(edge_i),
                limit: EDGE_INTENSITY_LIMIT,
            });
        }
    }
    Err(Error::SupportClipped {
        location: "auto span refinement (growth did not converge)",
        edge: 1.0,
        limit: EDGE_INTENSITY_LIMIT,
    })
}

/// Border maxima of the normalized intensity split by axis: first/last
/// signal rows and first/last idler columns.
fn edge_by_axis(g: &JointSpectrum) -> (f64, f64) {
    let (ns, ni) = (g.lambda_s_nm.len(), g.lambda_i_nm.len());
    let mut edge_s = 0.0f64;
    for j in 0..ni {
        edge_s = edge_s.max(g.intensity_at(0, j)).max(g.intensity_at(ns - 1, j));
    }
    let mut edge_i = 0.0f64;
    for i in 0..ns {
        edge_i = edge_i.max(g.intensity_at(i, 0)).max(g.intensity_at(i, ni - 1));
    }
    (edge_s, edge_i)
}

/// One evaluation pass at fixed half-width spans.
fn build_grid(
    crystal: &CrystalConfig,
    pump: &PumpConfig,
    tc: &TaylorCoefficients,
    n: usize,
    span_s_nm: f64,
    span_i_nm: f64,
    meta: GridMeta,
) -> Result<JointSpectrum> {
    let lambda_0 = crystal.lambda_degenerate_nm();
    let omega_0 = omega_from_lambda_nm(lambda_0);
    let omega_p0 = omega_from_lambda_nm(crystal.lambda_p0_nm);
    let axis = |half: f64| -> Vec<f64> {
        (0..n)
            .map(|j| lambda_0 - half + 2.0 * half * j as f64 / (n - 1) as f64)
            .collect()
    };
    let lambda_s = axis(span_s_nm);
    let lambda_i = axis(span_i_nm);
    let om_s: Vec<f64> = lambda_s.iter().map(|&l| omega_from_lambda_nm(l)).collect();
    let om_i: Vec<f64> = lambda_i.iter().map(|&l| omega_from_lambda_nm(l)).collect();

    let half_l = 0.5 * crystal.length_mm;
    let mut amp = vec![Complex64::new(0.0, 0.0); n * n];
    for (is, &ws) in om_s.iter().enumerate() {
        let os = ws - omega_0;
        for (ii, &wi) in om_i.iter().enumerate() {
            let oi = wi - omega_0;
            let dk = delta_k_taylor(tc, os, oi);
            let env = pump.envelope(ws + wi - omega_p0);
            amp[is * n + ii] = Complex64::new(env * sinc(dk * half_l), 0.0);
        }
    }
    JointSpectrum::from_amplitude(lambda_s, lambda_i, amp, meta)
}

/// Probe-driven half-span search: start at the larger of 1 nm and 2x the
/// pump-bandwidth image on the pair axes, grow a dirty axis geometrically.
fn auto_spans(
    set: &SellmeierSet,
    crystal: &CrystalConfig,
    pump: &PumpConfig,
    tc: &TaylorCoefficients,
) -> Result<(f64, f64)> {
    let lambda_0 = crystal.lambda_degenerate_nm();
    // pump bandwidth maps onto the pair axes scaled by (lambda_0/lambda_p)^2
    let scale = (lambda_0 / crystal.lambda_p0_nm).powi(2);
    let start = (2.0 * pump.fwhm_nm * scale).max(1.0);
    let (mut span_s, mut span_i) = (start, start);
    let window = set.window_nm;

    for _ in 0..AUTO_MAX_ROUNDS {
        let g = build_grid(
            crystal,
            pump,
            tc,
            AUTO_PROBE_N,
            span_s,
            span_i,
            GridMeta::default(),
        )?;
        let (edge_s, edge_i) = edge_by_axis(&g);
        if edge_s < EDGE_INTENSITY_LIMIT && edge_i < EDGE_INTENSITY_LIMIT {
            return Ok((span_s, span_i));
        }
        if edge_s >= EDGE_INTENSITY_LIMIT {
            span_s *= AUTO_GROWTH;
        }
        if edge_i >= EDGE_INTENSITY_LIMIT {
            span_i *= AUTO_GROWTH;
        }
        let reach = span_s.max(span_i);
        if lambda_0 - reach < window.0 || lambda_0 + reach > window.1 {
            return Err(Error::SupportClipped {
                location: "auto span search (Sellmeier validity window reached)",
                edge: edge_s.max(edge_i),
                limit: EDGE_INTENSITY_LIMIT,
            });
        }
    }
    Err(Error::SupportClipped {
        location: "auto span search (growth did not converge)",
        edge: 1.0,
        limit: EDGE_INTENSITY_LIMIT,
    })
}

/// Spectral marginals of the intensity with interpolated FWHMs.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
    pub fwhm_s_nm: f64,
    pub fwhm_i_nm: f64,
}

/// Row/column sums of the intensity and their FWHMs. Errors if the support
/// is clipped (edge intensity above [`EDGE_INTENSITY_LIMIT`]), since widths
/// of a clipped distribution would be biased.
pub fn marginals(g: &JointSpectrum) -> Result<Marginals> {
    let edge = g.edge_intensity();
    if edge >= EDGE_INTENSITY_LIMIT {
        return Err(Error::SupportClipped {
            location: "marginal computation",
            edge,
            limit: EDGE_INTENSITY_LIMIT,
        });
    }
    let (ns, ni) = (g.n_s(), g.n_i());
    let mut signal = vec![0.0; ns];
    let mut idler = vec![0.0; ni];
    for i in 0..ns {
        for j in 0..ni {
            let v = g.intensity_at(i, j);
            signal[i] += v;
            idler[j] += v;
        }
    }
    let (fwhm_s_nm, _, _) = fwhm_interpolated(&g.lambda_s_nm, &signal)?;
    let (fwhm_i_nm, _, _) = fwhm_interpolated(&g.lambda_i_nm, &idler)?;
    Ok(Marginals {
        signal,
        idler,
        fwhm_s_nm,
        fwhm_i_nm,
    })
}

/// Intensity FWHM (fs) of the Fourier transform of the amplitude along the
/// antidiagonal Omega_s = -Omega_i = u through degeneracy — the width of the
/// arrival-time-difference correlation.
///
/// The antidiagonal slice is sampled over the largest symmetric detuning
/// range reachable on both axes; if the slice has not decayed below
/// [`EDGE_INTENSITY_LIMIT`] at that range the transform would be biased by
/// truncation and an error is returned instead.
pub fn temporal_correlation_width(g: &JointSpectrum) -> Result<f64> {
    let amp = g.amplitude.as_ref().ok_or_else(|| Error::InvalidInput {
        what: "joint spectrum",
        why: "temporal correlation width needs the complex amplitude (model grid), \
              not intensity-only data"
            .into(),
    })?;

    // detuning axes (ascending in omega: reverse of wavelength order)
    let lambda_0 = 0.5 * (g.lambda_s_nm[0] + g.lambda_s_nm[g.n_s() - 1]);
    let lambda_0_i = 0.5 * (g.lambda_i_nm[0] + g.lambda_i_nm[g.n_i() - 1]);
    let w0_s = omega_from_lambda_nm(lambda_0);
    let w0_i = omega_from_lambda_nm(lambda_0_i);
    let os: Vec<f64> = g.lambda_s_nm.iter().map(|&l| omega_from_lambda_nm(l) - w0_s).collect();
    let oi: Vec<f64> = g.lambda_i_nm.iter().map(|&l| omega_from_lambda_nm(l) - w0_i).collect();

    // largest |u| reachable with both omega_s = +u and omega_i = -u in range
    let reach = |v: &[f64]| -> (f64, f64) {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (s_lo, s_hi) = reach(&os);
    let (i_lo, i_hi) = reach(&oi);
    let u_max = s_hi.min(-s_lo).min(i_hi.min(-i_lo));
    if !(u_max > 0.0) {
        return Err(Error::Numeric(
            "grid does not span the degenerate point symmetrically".into(),
        ));
    }

    // bilinear sample of the amplitude at (omega_s, omega_i) detunings
    let ni = g.n_i();
    let sample = |ou: f64, ov: f64| -> Complex64 {
        // omega axes descend with index (wavelength ascends): locate brackets
        let locate = |axis: &[f64], w: f64| -> (usize, f64) {
            // axis is strictly descending
            let n = axis.len();
            if w >= axis[0] {
                return (0, 0.0);
            }
            if w <= axis[n - 1] {
                return (n - 2, 1.0);
            }
            let mut j = axis.partition_point(|&v| v > w);
            j = j.clamp(1, n - 1);
            let t = (w - axis[j - 1]) / (axis[j] - axis[j - 1]);
            (j - 1, t)
        };
        let (isx, ts) = locate(&os, ou);
        let (iix, ti) = locate(&oi, ov);
        let a00 = amp[isx * ni + iix];
        let a01 = amp[isx * ni + iix + 1];
        let a10 = amp[(isx + 1) * ni + iix];
        let a11 = amp[(isx + 1) * ni + iix + 1];
        a00 * ((1.0 - ts) * (1.0 - ti))
            + a01 * ((1.0 - ts) * ti)
            + a10 * (ts * (1.0 - ti))
            + a11 * (ts * ti)
    };

    const N_U: usize = 1024;
    let du = 2.0 * u_max / (N_U - 1) as f64;
    let slice: Vec<Complex64> = (0..N_U)
        .map(|k| sample(-u_max + k as f64 * du, u_max - k as f64 * du))
        .collect();

    let peak = slice.iter().map(|a| a.norm_sqr()).fold(0.0f64, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Numeric("antidiagonal slice is identically zero".into()));
    }
    let edge = slice[0].norm_sqr().max(slice[N_U - 1].norm_sqr()) / peak;
    if edge >= EDGE_INTENSITY_LIMIT {
        return Err(Error::SupportClipped {
            location: "antidiagonal slice for the temporal correlation",
            edge,
            limit: EDGE_INTENSITY_LIMIT,
        });
    }

    // direct transform on an adaptive tau window; widen until the temporal
    // intensity is resolved and unclipped
    let slice_x: Vec<f64> = (0..N_U).map(|k| -u_max + k as f64 * du).collect();
    let slice_i: Vec<f64> = slice.iter().map(|a| a.norm_sqr()).collect();
    let (w_slice, _, _) = fwhm_interpolated(&slice_x, &slice_i)?;
    // Gaussian guide: tau_fwhm ~ 8 ln2 / w_slice (amplitude width pairing);
    // start several times wider to be safe for sinc-like slices
    let mut t_half = 12.0 * 8.0 * std::f64::consts::LN_2 / w_slice.max(1e-12);
    const N_T: usize = 4096;
    for _round in 0..8 {
        let dt = 2.0 * t_half / (N_T - 1) as f64;
        let mut tau_axis = Vec::with_capacity(N_T);
        let mut intensity = Vec::with_capacity(N_T);
        for k in 0..N_T {
            let tau = -t_half + k as f64 * dt;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, a) in slice.iter().enumerate() {
                let phase = slice_x[j] * tau;
                acc += a * Complex64::new(phase.cos(), phase.sin());
            }
            tau_axis.push(tau);
            intensity.push(acc.norm_sqr());
        }
        let peak_t = intensity.iter().cloned().fold(0.0f64, f64::max);
        let edge_t = intensity[0].max(intensity[N_T - 1]) / peak_t;
        // require the peak resolved by enough samples and unclipped edges
        if edge_t < EDGE_INTENSITY_LIMIT {
            let (w, _, _) = fwhm_interpolated(&tau_axis, &intensity)?;
            if w > 16.0 * dt {
                return Ok(w);
            }
            t_half = (w * 8.0).max(t_half / 8.0);
        } else {
            t_half *= 4.0;
        }
    }
    Err(Error::Numeric(
        "temporal correlation window did not converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasematch::{solve_pm_angle, PolarizationAssignment};
    use approx::assert_relative_eq;

    fn bbo() -> SellmeierSet {
        SellmeierSet::bbo_kato_1986()
    }

    fn standard_crystal(set: &SellmeierSet) -> CrystalConfig {
        let theta = solve_pm_angle(set, 400.0, PolarizationAssignment::default()).unwrap();
        CrystalConfig {
            length_mm: 3.5,
            theta_pm_deg: theta,
            assignment: PolarizationAssignment::default(),
            lambda_p0_nm: 400.0,
        }
    }

    fn standard_pump() -> PumpConfig {
        PumpConfig {
            lambda_nm: 400.0,
            fwhm_nm: 2.0,
        }
    }

    #[test]
    fn pump_envelope_has_requested_intensity_fwhm() {
        let p = standard_pump();
        let dw = p.fwhm_omega();
        // |E|^2 at half the FWHM detuning must be exactly 1/2
        let half = (p.envelope(dw / 2.0)).powi(2);
        assert_relative_eq!(half, 0.5, max_relative = 1e-12);
        assert_eq!(p.envelope(0.0), 1.0);
    }

    #[test]
    fn jsa_peak_is_normalised_and_edges_clean() {
        let set = bbo();
        let g = compute_jsa(
            &set,
            &standard_crystal(&set),
            &TiltConfig::new(0.0).unwrap(),
            &standard_pump(),
            &GridSpec::auto(128),
        )
        .unwrap();
        let peak = g.intensity.iter().cloned().fold(0.0f64, f64::max);
        assert_eq!(peak, 1.0);
        assert!(g.edge_intensity() < EDGE_INTENSITY_LIMIT);
        assert_eq!(g.n_s(), 128);
        // amplitude present and consistent with intensity
        let amp = g.amplitude.as_ref().unwrap();
        let k = 128 * 64 + 64;
        assert_relative_eq!(amp[k].norm_sqr(), g.intensity[k], max_relative = 1e-12);
    }

    #[test]
    fn cw_limit_pins_energy_conservation() {
        // a very narrow pump forces omega_s + omega_i = omega_p: everything
        // off the antidiagonal ridge must vanish
        let set = bbo();
        let crystal = standard_crystal(&set);
        let pump = PumpConfig {
            lambda_nm: 400.0,
            fwhm_nm: 1e-4,
        };
        let g = compute_jsa(
            &set,
            &crystal,
            &TiltConfig::new(0.0).unwrap(),
            &pump,
            &GridSpec {
                n: 64,
                span: SpanSpec::Explicit {
                    span_s_nm: 5.0,
                    span_i_nm: 5.0,
                },
            },
        )
        .unwrap();
        let w0 = omega_from_lambda_nm(800.0);
        let mut off_ridge_max = 0.0f64;
        for (is, &ls) in g.lambda_s_nm.iter().enumerate() {
            for (ii, &li) in g.lambda_i_nm.iter().enumerate() {
                let sum_det = omega_from_lambda_nm(ls) + omega_from_lambda_nm(li) - 2.0 * w0;
                if sum_det.abs() > 20.0 * pump.fwhm_omega() {
                    off_ridge_max = off_ridge_max.max(g.intensity_at(is, ii));
                }
            }
        }
        assert!(off_ridge_max < 1e-30, "off-ridge intensity {off_ridge_max}");
    }

    #[test]
    fn marginals_of_synthetic_gaussian_match_analytic() {
        // S = exp(-a os^2 - b oi^2 - 2 c os oi): marginal over oi has
        // variance-equivalent exponent (a - c^2/b) in os
        let (a, b, c) = (25_000.0, 12_000.0, 8_000.0);
        let n = 257;
        let lambda_0 = 800.0;
        let span = 30.0;
        let axis: Vec<f64> = (0..n)
            .map(|i| lambda_0 - 0.5 * span + span * i as f64 / (n - 1) as f64)
            .collect();
        let w0 = omega_from_lambda_nm(lambda_0);
        let om: Vec<f64> = axis.iter().map(|&l| omega_from_lambda_nm(l) - w0).collect();
        let mut amp = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let e = -a * om[i] * om[i] - b * om[j] * om[j] - 2.0 * c * om[i] * om[j];
                amp[i * n + j] = Complex64::new((0.5 * e).exp(), 0.0);
            }
        }
        let g = JointSpectrum::from_amplitude(axis.clone(), axis, amp, GridMeta::default())
            .unwrap();
        let m = marginals(&g).unwrap();
        // FWHM in omega, then converted to nm at 800 nm
        let eff_s = a - c * c / b;
        let eff_i = b - c * c / a;
        let to_nm = |eff: f64| {
            let w_fwhm = (4.0 * 2.0f64.ln() / eff).sqrt();
            w_fwhm * lambda_0 * lambda_0 / (2.0 * std::f64::consts::PI * crate::units::C_NM_PER_FS)
        };
        assert_relative_eq!(m.fwhm_s_nm, to_nm(eff_s), max_relative = 2e-3);
        assert_relative_eq!(m.fwhm_i_nm, to_nm(eff_i), max_relative = 2e-3);
    }

    #[test]
    fn clipped_support_is_rejected() {
        let set = bbo();
        let g = compute_jsa(
            &set,
            &standard_crystal(&set),
            &TiltConfig::new(0.0).unwrap(),
            &standard_pump(),
            &GridSpec {
                n: 64,
                span: SpanSpec::Explicit {
                    span_s_nm: 1.0,
                    span_i_nm: 1.0,
                },
            },
        )
        .unwrap();
        assert!(matches!(
            marginals(&g),
            Err(Error::SupportClipped { .. })
        ));
    }

    #[test]
    fn temporal_width_of_gaussian_matches_transform_pair() {
        // separable symmetric Gaussian amplitude: antidiagonal amplitude
        // slice exp(-a u^2) transforms to intensity FWHM 2 sqrt(2 ln2 a) ...
        // check against the closed form tau = sqrt(8 ln2 a) for the
        // intensity correlation: |FT of exp(-a u^2)|^2 = exp(-tau^2/(2a))
        // -> FWHM_tau = 2 sqrt(2 a ln 2)
        let a = 2000.0; // fs^2
        let n = 301;
        let lambda_0 = 800.0;
        let span = 60.0;
        let axis: Vec<f64> = (0..n)
            .map(|i| lambda_0 - 0.5 * span + span * i as f64 / (n - 1) as f64)
            .collect();
        let w0 = omega_from_lambda_nm(lambda_0);
        let om: Vec<f64> = axis.iter().map(|&l| omega_from_lambda_nm(l) - w0).collect();
        let mut amp = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let u = 0.5 * (om[i] - om[j]);
                let v = om[i] + om[j];
                let e = (-a * u * u - 900.0 * v * v).exp();
                amp[i * n + j] = Complex64::new(e, 0.0);
            }
        }
        let g = JointSpectrum::from_amplitude(axis.clone(), axis, amp, GridMeta::default())
            .unwrap();
        let tau = temporal_correlation_width(&g).unwrap();
        let expect = 2.0 * (2.0 * a * 2.0f64.ln()).sqrt();
        assert_relative_eq!(tau, expect, max_relative = 2e-2);
    }

    #[test]
    fn temporal_width_rejects_intensity_only() {
        let g = JointSpectrum::from_intensity(
            vec![799.0, 800.0, 801.0],
            vec![799.0, 800.0, 801.0],
            vec![0.1; 9],
            GridMeta::default(),
        )
        .unwrap();
        assert!(temporal_correlation_width(&g).is_err());
    }

    #[test]
    fn auto_span_grows_until_clean() {
        let set = bbo();
        // broad case: 38 deg tilt needs a much wider grid than the start span
        let g = compute_jsa(
            &set,
            &standard_crystal(&set),
            &TiltConfig::new(38.0).unwrap(),
            &standard_pump(),
            &GridSpec::auto(96),
        )
        .unwrap();
        assert!(g.edge_intensity() < EDGE_INTENSITY_LIMIT);
        let span = g.lambda_s_nm[95] - g.lambda_s_nm[0];
        assert!(span > 60.0, "span {span} nm unexpectedly small");
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::auto(8).validate().is_err());
        assert!(GridSpec {
            n: 64,
            span: SpanSpec::Explicit {
                span_s_nm: -1.0,
                span_i_nm: 5.0
            }
        }
        .validate()
        .is_err());
        assert!(GridSpec::auto(64).validate().is_ok());
    }

    #[test]
    fn mismatched_pump_and_crystal_rejected() {
        let set = bbo();
        let crystal = standard_crystal(&set);
        let pump = PumpConfig {
            lambda_nm: 405.0,
            fwhm_nm: 2.0,
        };
        assert!(compute_jsa(
            &set,
            &crystal,
            &TiltConfig::new(0.0).unwrap(),
            &pump,
            &GridSpec::auto(64)
        )
        .is_err());
    }
}
