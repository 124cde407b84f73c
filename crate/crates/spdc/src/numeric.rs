//! Small numerical building blocks: guarded sinc, bracketed root finding,
//! golden-section minimisation, quantiles and interpolated FWHM extraction.

use crate::error::{Error, Result};

/// sin(x)/x with the removable singularity handled by its Taylor series.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // |x| < 1e-4 keeps the truncation error below 1e-18.
        1.0 - x * x / 6.0 * (1.0 - x * x / 20.0)
    } else {
        x.sin() / x
    }
}

/// Bisection on a bracketing interval [a, b]; f(a) and f(b) must differ in
/// sign. Converges to `xtol` on the abscissa.
pub fn bisect<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo:.6}, {hi:.6}] (f = {flo:.6e}, {fhi:.6e})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo < xtol {
            return Ok(mid);
        }
        let fmid = f(mid)?;
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "bisection did not reach xtol {xtol:.3e} within {max_iter} iterations"
    )))
}

/// Golden-section minimisation of a unimodal function on [a, b] to `xtol`.
pub fn golden_min<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INVPHI: f64 = 0.618_033_988_749_894_8; // (sqrt(5)-1)/2
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if hi - lo < xtol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Full width at half maximum of sampled data `y(x)`, located by linear
/// interpolation of the outermost half-height crossings. `x` must be strictly
/// monotone (either direction). Returns (width, left_x, right_x) with
/// width = |right - left|.
pub fn fwhm_interpolated(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidInput {
            what: "fwhm samples",
            why: format!("need >= 3 equal-length samples, got {} / {}", x.len(), y.len()),
        });
    }
    let peak = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Numeric("fwhm of non-positive data".into()));
    }
    let half = 0.5 * peak;
    let n = y.len();

    let cross = |i0: usize, i1: usize| -> f64 {
        // linear interpolation of the half crossing between samples i0, i1
        let (y0, y1) = (y[i0], y[i1]);
        let t = (half - y0) / (y1 - y0);
        x[i0] + t * (x[i1] - x[i0])
    };

    let mut left = None;
    for i in 1..n {
        if y[i - 1] < half && y[i] >= half {
            left = Some(cross(i - 1, i));
            break;
        }
    }
    let mut right = None;
    for i in (1..n).rev() {
        if y[i] < half && y[i - 1] >= half {
            right = Some(cross(i - 1, i));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(((r - l).abs(), l, r)),
        _ => Err(Error::Numeric(
            "fwhm: no half-height crossing on one or both sides (peak touches the edge?)".into(),
        )),
    }
}

/// Nearest-rank style quantile with linear interpolation between order
/// statistics, q in [0, 1]. `values` need not be sorted.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput {
            what: "quantile input",
            why: "empty slice".into(),
        });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidInput {
            what: "quantile order",
            why: format!("q = {q} outside [0, 1]"),
        });
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        Ok(v[i] * (1.0 - frac) + v[i + 1] * frac)
    } else {
        Ok(v[i])
    }
}

/// Linear interpolation of tabulated data on a strictly ascending axis;
/// clamps outside the range.
pub fn interp_ascending(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v < x).max(1);
    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    ys[j - 1] * (1.0 - t) + ys[j] * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sinc_at_zero_and_pi() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
        assert_relative_eq!(sinc(1.0), 1.0f64.sin(), max_relative = 1e-15);
    }

    #[test]
    fn sinc_series_matches_ratio_near_threshold() {
        for &x in &[9.9e-5, 1.01e-4, 5e-5, -9.9e-5] {
            assert_relative_eq!(sinc(x), x.sin() / x, max_relative = 1e-14);
        }
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12, 200).unwrap();
        assert_relative_eq!(r, 2.0f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn bisect_rejects_unbracketed() {
        assert!(matches!(
            bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-9, 100),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn golden_finds_parabola_min() {
        let m = golden_min(|x| Ok((x - 0.3).powi(2)), -4.0, 5.0, 1e-10).unwrap();
        assert_relative_eq!(m, 0.3, epsilon = 1e-8);
    }

    #[test]
    fn fwhm_of_triangle() {
        // triangle peaking at 0 with half-width 1 -> FWHM exactly 1
        let x: Vec<f64> = (0..201).map(|i| -1.0 + i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|&v| (1.0 - v.abs()).max(0.0)).collect();
        let (w, l, r) = fwhm_interpolated(&x, &y).unwrap();
        assert_relative_eq!(w, 1.0, epsilon = 1e-12);
        assert_relative_eq!(l, -0.5, epsilon = 1e-12);
        assert_relative_eq!(r, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fwhm_clipped_peak_errors() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.0 - v / 100.0).collect(); // no left crossing
        assert!(fwhm_interpolated(&x, &y).is_err());
    }

    #[test]
    fn quantile_of_known_vector() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_relative_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_relative_eq!(quantile(&v, 1.0).unwrap(), 5.0);
        assert_relative_eq!(quantile(&v, 0.5).unwrap(), 3.0);
        assert_relative_eq!(quantile(&v, 0.05).unwrap(), 1.2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn sinc_is_even_and_bounded(x in -50.0f64..50.0) {
            prop_assert!((sinc(x) - sinc(-x)).abs() < 1e-15);
            prop_assert!(sinc(x) <= 1.0 + 1e-15);
            prop_assert!(sinc(x) >= -0.25);
        }

        #[test]
        fn gaussian_fwhm_matches_analytic(sigma in 0.05f64..3.0, x0 in -1.0f64..1.0) {
            let x: Vec<f64> = (0..4001).map(|i| -10.0 + i as f64 * 0.005).collect();
            let y: Vec<f64> = x.iter().map(|&v| (-0.5 * ((v - x0) / sigma).powi(2)).exp()).collect();
            let (w, _, _) = fwhm_interpolated(&x, &y).unwrap();
            let expect = sigma * (8.0f64 * 2.0f64.ln()).sqrt();
            prop_assert!((w - expect).abs() / expect < 1e-3);
        }
    }
}
