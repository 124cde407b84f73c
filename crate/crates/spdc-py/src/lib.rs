//! Python bindings: crystal setup, joint-spectrum computation and the
//! analysis toolkit, mirroring the CLI's capabilities for scripting.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spdc::analysis::{classify_regime, fit_gaussian, schmidt_decompose, RegimeThresholds};
use spdc::biphoton::{compute_jsa, marginals, temporal_correlation_width, GridSpec, PumpConfig, SpanSpec};
use spdc::dispersion::{wave_dispersion, Polarization};
use spdc::phasematch::{solve_pm_angle, CrystalConfig, PolarizationAssignment};
use spdc::sellmeier::SellmeierSet;
use spdc::sweep::{self, SweepContext, XiTarget};
use spdc::tilt::{tilt_from_grating, GratingSpec, TiltConfig, WaveSelection};

/// Configuration errors become ValueError; numeric failures RuntimeError,
/// matching the CLI's exit-code split.
fn pyerr(e: spdc::Error) -> PyErr {
    if e.exit_code() == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_assignment(text: &str) -> PyResult<PolarizationAssignment> {
    match text {
        "signal-e-idler-o" => Ok(PolarizationAssignment::SignalEIdlerO),
        "signal-o-idler-e" => Ok(PolarizationAssignment::SignalOIdlerE),
        other => Err(PyValueError::new_err(format!(
            "assignment '{other}' is neither 'signal-e-idler-o' nor 'signal-o-idler-e'"
        ))),
    }
}

/// Dispersion quantities of one wave at its reference wavelength.
#[pyclass(frozen)]
struct WaveInfo {
    #[pyo3(get)]
    k_rad_per_nm: f64,
    #[pyo3(get)]
    n_fs_per_mm: f64,
    #[pyo3(get)]
    d_fs2_per_mm: f64,
    #[pyo3(get)]
    rho_deg: f64,
}

#[pymethods]
impl WaveInfo {
    fn __repr__(&self) -> String {
        format!(
            "WaveInfo(k_rad_per_nm={:.6}, n_fs_per_mm={:.3}, d_fs2_per_mm={:.3}, rho_deg={:.4})",
            self.k_rad_per_nm, self.n_fs_per_mm, self.d_fs2_per_mm, self.rho_deg
        )
    }
}

/// A nonlinear crystal cut for collinear degenerate type-II downconversion.
/// Without an explicit `theta_pm_deg` the phase-matching angle is solved.
#[pyclass]
struct Crystal {
    set: SellmeierSet,
    cfg: CrystalConfig,
}

#[pymethods]
impl Crystal {
    #[new]
    #[pyo3(signature = (length_mm, lambda_p0_nm, theta_pm_deg=None, assignment="signal-e-idler-o"))]
    fn new(
        length_mm: f64,
        lambda_p0_nm: f64,
        theta_pm_deg: Option<f64>,
        assignment: &str,
    ) -> PyResult<Self> {
        let assignment = parse_assignment(assignment)?;
        let set = SellmeierSet::bbo_kato_1986();
        let theta_pm_deg = match theta_pm_deg {
            Some(t) => t,
            None => solve_pm_angle(&set, lambda_p0_nm, assignment).map_err(pyerr)?,
        };
        let cfg = CrystalConfig {
            length_mm,
            theta_pm_deg,
            assignment,
            lambda_p0_nm,
        };
        cfg.validate().map_err(pyerr)?;
        Ok(Crystal { set, cfg })
    }

    #[getter]
    fn length_mm(&self) -> f64 {
        self.cfg.length_mm
    }

    #[getter]
    fn lambda_p0_nm(&self) -> f64 {
        self.cfg.lambda_p0_nm
    }

    #[getter]
    fn theta_pm_deg(&self) -> f64 {
        self.cfg.theta_pm_deg
    }

    #[getter]
    fn lambda_degenerate_nm(&self) -> f64 {
        self.cfg.lambda_degenerate_nm()
    }

    /// Dispersion bundle for "pump", "signal" or "idler".
    fn wave_dispersion(&self, wave: &str) -> PyResult<WaveInfo> {
        let (lambda, pol) = match wave {
            "pump" => (self.cfg.lambda_p0_nm, Polarization::Extraordinary),
            "signal" => (self.cfg.lambda_degenerate_nm(), self.cfg.assignment.signal()),
            "idler" => (self.cfg.lambda_degenerate_nm(), self.cfg.assignment.idler()),
            other => {
                return Err(PyValueError::new_err(format!(
                    "wave '{other}' is not 'pump', 'signal' or 'idler'"
                )))
            }
        };
        let w = wave_dispersion(&self.set, lambda, pol, self.cfg.theta_pm_deg).map_err(pyerr)?;
        Ok(WaveInfo {
            k_rad_per_nm: w.k_rad_per_nm,
            n_fs_per_mm: w.n_fs_per_mm,
            d_fs2_per_mm: w.d_fs2_per_mm,
            rho_deg: w.rho_deg,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Crystal(length_mm={}, lambda_p0_nm={}, theta_pm_deg={:.4})",
            self.cfg.length_mm, self.cfg.lambda_p0_nm, self.cfg.theta_pm_deg
        )
    }
}

/// A computed joint spectrum with its wavelength axes, plus the analysis
/// operations of the toolkit.
#[pyclass]
struct JointSpectrum {
    inner: spdc::biphoton::JointSpectrum,
}

#[pymethods]
impl JointSpectrum {
    #[getter]
    fn lambda_s_nm(&self) -> Vec<f64> {
        self.inner.lambda_s_nm.clone()
    }

    #[getter]
    fn lambda_i_nm(&self) -> Vec<f64> {
        self.inner.lambda_i_nm.clone()
    }

    /// Peak-normalised intensity, rows over the signal axis.
    fn intensity(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n_s())
            .map(|i| {
                (0..self.inner.n_i())
                    .map(|j| self.inner.intensity_at(i, j))
                    .collect()
            })
            .collect()
    }

    /// (signal, idler) marginal FWHMs in nm.
    fn fwhm_nm(&self) -> PyResult<(f64, f64)> {
        let m = marginals(&self.inner).map_err(pyerr)?;
        Ok((m.fwhm_s_nm, m.fwhm_i_nm))
    }

    /// (signal, idler) marginal intensity profiles.
    fn marginals(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let m = marginals(&self.inner).map_err(pyerr)?;
        Ok((m.signal, m.idler))
    }

    /// Gaussian fit of the intensity as a dict: coefficients (fs^2), the
    /// decorrelation metric c^2/(ab), the correlation r and the fit overlap.
    fn fit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let f = fit_gaussian(&self.inner).map_err(pyerr)?;
        let d = PyDict::new(py);
        d.set_item("a_fs2", f.a_fs2)?;
        d.set_item("b_fs2", f.b_fs2)?;
        d.set_item("c_fs2", f.c_fs2)?;
        d.set_item("metric", f.decorrelation_metric)?;
        d.set_item("r", f.correlation)?;
        d.set_item("overlap", f.overlap)?;
        Ok(d)
    }

    /// Schmidt decomposition as a dict: entropy (bits), Schmidt number K,
    /// the leading mode weights, and whether phases were assumed flat.
    fn schmidt<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = schmidt_decompose(&self.inner).map_err(pyerr)?;
        let d = PyDict::new(py);
        d.set_item("entropy_bits", s.entropy_bits)?;
        d.set_item("schmidt_number", s.schmidt_number)?;
        d.set_item(
            "coefficients",
            s.coefficients.iter().take(8).copied().collect::<Vec<_>>(),
        )?;
        d.set_item("from_intensity_only", s.from_intensity_only)?;
        Ok(d)
    }

    /// FWHM of the arrival-time-difference correlation, fs.
    fn temporal_width_fs(&self) -> PyResult<f64> {
        temporal_correlation_width(&self.inner).map_err(pyerr)
    }

    /// Regime label under the default thresholds: "anticorrelated",
    /// "uncorrelated", "correlated" or "intermediate".
    fn regime(&self) -> PyResult<String> {
        let f = fit_gaussian(&self.inner).map_err(pyerr)?;
        Ok(classify_regime(&f, &RegimeThresholds::default()).to_string())
    }

    fn __repr__(&self) -> String {
        format!(
            "JointSpectrum({} x {} over [{:.2}, {:.2}] x [{:.2}, {:.2}] nm)",
            self.inner.n_s(),
            self.inner.n_i(),
            self.inner.lambda_s_nm[0],
            self.inner.lambda_s_nm[self.inner.n_s() - 1],
            self.inner.lambda_i_nm[0],
            self.inner.lambda_i_nm[self.inner.n_i() - 1],
        )
    }
}

fn grid_spec(n: usize, span_nm: Option<(f64, f64)>) -> GridSpec {
    GridSpec {
        n,
        span: match span_nm {
            None => SpanSpec::Auto,
            Some((s, i)) => SpanSpec::Explicit {
                span_s_nm: s,
                span_i_nm: i,
            },
        },
    }
}

/// Joint spectrum of `crystal` pumped at its design wavelength with the
/// given bandwidth, under `xi_deg` of pulse-front tilt. `span_nm` fixes the
/// grid half-widths; by default they are sized automatically.
#[pyfunction]
#[pyo3(signature = (crystal, xi_deg, pump_fwhm_nm, n=256, span_nm=None))]
fn compute_joint_spectrum(
    crystal: &Crystal,
    xi_deg: f64,
    pump_fwhm_nm: f64,
    n: usize,
    span_nm: Option<(f64, f64)>,
) -> PyResult<JointSpectrum> {
    let tilt = TiltConfig::new(xi_deg).map_err(pyerr)?;
    let pump = PumpConfig {
        lambda_nm: crystal.cfg.lambda_p0_nm,
        fwhm_nm: pump_fwhm_nm,
    };
    let g = compute_jsa(
        &crystal.set,
        &crystal.cfg,
        &tilt,
        &pump,
        &grid_spec(n, span_nm),
    )
    .map_err(pyerr)?;
    Ok(JointSpectrum { inner: g })
}

#[derive(FromPyObject)]
enum TargetArg {
    Name(String),
    R(f64),
}

fn sweep_ctx<'a>(crystal: &'a Crystal, pump_fwhm_nm: f64, n: usize) -> SweepContext<'a> {
    SweepContext {
        set: &crystal.set,
        crystal: crystal.cfg.clone(),
        pump: PumpConfig {
            lambda_nm: crystal.cfg.lambda_p0_nm,
            fwhm_nm: pump_fwhm_nm,
        },
        grid: GridSpec::auto(n),
        applied_to: WaveSelection::default(),
        thresholds: RegimeThresholds::default(),
    }
}

fn point_dict<'py>(py: Python<'py>, p: &sweep::SweepPoint) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("xi_deg", p.xi_deg)?;
    d.set_item("r", p.r)?;
    d.set_item("metric", p.metric)?;
    d.set_item("entropy_bits", p.entropy_bits)?;
    d.set_item("schmidt_number", p.schmidt_number)?;
    d.set_item("fwhm_s_nm", p.fwhm_s_nm)?;
    d.set_item("fwhm_i_nm", p.fwhm_i_nm)?;
    d.set_item("regime", p.regime.map(|r| r.to_string()))?;
    d.set_item("failure", p.failure.clone())?;
    Ok(d)
}

/// Solve the tilt angle for a correlation target — "uncorrelated" or a value
/// of r in [-1, 1] — inside [lo_deg, hi_deg]; returns the solved operating
/// point as a dict.
#[pyfunction]
#[pyo3(signature = (crystal, pump_fwhm_nm, target=TargetArg::Name(String::from("uncorrelated")), lo_deg=-75.0, hi_deg=75.0, n=256))]
fn solve_xi<'py>(
    py: Python<'py>,
    crystal: &Crystal,
    pump_fwhm_nm: f64,
    target: TargetArg,
    lo_deg: f64,
    hi_deg: f64,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let target = match target {
        TargetArg::Name(name) if name.eq_ignore_ascii_case("uncorrelated") => {
            XiTarget::Uncorrelated
        }
        TargetArg::Name(name) => {
            return Err(PyValueError::new_err(format!(
                "target '{name}' is neither 'uncorrelated' nor a number"
            )))
        }
        TargetArg::R(r) => XiTarget::RValue(r),
    };
    let ctx = sweep_ctx(crystal, pump_fwhm_nm, n);
    let sol = sweep::solve_xi(&ctx, target, lo_deg, hi_deg).map_err(pyerr)?;
    point_dict(py, &sol.point)
}

/// Evaluate `points` tilt angles uniformly over [lo_deg, hi_deg]; returns a
/// list of dicts (rows that fail to evaluate carry a "failure" message).
#[pyfunction]
#[pyo3(signature = (crystal, pump_fwhm_nm, lo_deg, hi_deg, points, n=256))]
fn sweep_xi<'py>(
    py: Python<'py>,
    crystal: &Crystal,
    pump_fwhm_nm: f64,
    lo_deg: f64,
    hi_deg: f64,
    points: usize,
    n: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ctx = sweep_ctx(crystal, pump_fwhm_nm, n);
    let rows = sweep::sweep_xi(&ctx, lo_deg, hi_deg, points).map_err(pyerr)?;
    rows.iter().map(|p| point_dict(py, p)).collect()
}

/// Pulse-front tilt (degrees) imprinted by a diffraction grating at
/// `lambda_nm`, from its groove density, incidence angle and order.
#[pyfunction]
#[pyo3(signature = (groove_density_per_mm, lambda_nm, incidence_angle_deg=0.0, order=1))]
fn grating_tilt_deg(
    groove_density_per_mm: f64,
    lambda_nm: f64,
    incidence_angle_deg: f64,
    order: i32,
) -> PyResult<f64> {
    let g = GratingSpec {
        groove_density_per_mm,
        incidence_angle_deg,
        order,
    };
    tilt_from_grating(&g, lambda_nm).map_err(pyerr)
}

#[pymodule]
fn spdc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Crystal>()?;
    m.add_class::<WaveInfo>()?;
    m.add_class::<JointSpectrum>()?;
    m.add_function(wrap_pyfunction!(compute_joint_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(solve_xi, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_xi, m)?)?;
    m.add_function(wrap_pyfunction!(grating_tilt_deg, m)?)?;
    Ok(())
}
