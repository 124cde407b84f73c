//! File emission and ingestion: grid CSV, heatmap PPM, metadata TOML, sweep
//! and scan CSVs. Text files are UTF-8 with LF endings and carry the short
//! config hash in a comment so every artifact traces back to its parameters.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::biphoton::{GridMeta, JointSpectrum};
use crate::config::EffectiveConfig;
use crate::scan::{ScanConfig, ScanRecord};
use crate::sweep::SweepPoint;
use crate::{Error, Result};

/// First 12 hex digits of a SHA-256 over the axis and intensity samples
/// (little-endian doubles). Identifies grid *content*, unlike the config
/// hash which identifies parameters.
pub fn grid_hash(g: &JointSpectrum) -> String {
    let mut h = Sha256::new();
    for v in g
        .lambda_s_nm
        .iter()
        .chain(g.lambda_i_nm.iter())
        .chain(g.intensity.iter())
    {
        h.update(v.to_le_bytes());
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(12);
    for b in &digest[..6] {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Stem shared by the files of one computed grid, e.g. `jsa_xi+38.000_1a2b3c4d5e6f`.
pub fn jsa_basename(xi_deg: f64, grid_hash: &str) -> String {
    format!("jsa_xi{xi_deg:+.3}_{grid_hash}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------- grid CSV

/// Intensity grid as CSV: comment block, one header row per axis, then the
/// n_s x n_i matrix (signal varies by row, idler by column).
pub fn write_grid_csv(path: &Path, g: &JointSpectrum, config_hash: &str) -> Result<()> {
    let mut out = String::new();
    out.push_str("# joint spectral intensity, peak-normalised\n");
    let _ = writeln!(out, "# config {config_hash}");
    let m = &g.meta;
    let mut meta_num = |key: &str, v: Option<f64>| {
        if let Some(v) = v {
            let _ = writeln!(out, "# {key} = {v}");
        }
    };
    meta_num("lambda_p0_nm", m.lambda_p0_nm);
    meta_num("pump_fwhm_nm", m.pump_fwhm_nm);
    meta_num("xi_deg", m.xi_deg);
    meta_num("theta_pm_deg", m.theta_pm_deg);
    meta_num("crystal_length_mm", m.crystal_length_mm);
    if let Some(name) = &m.sellmeier_name {
        let _ = writeln!(out, "# sellmeier = {name}");
    }
    for (label, axis) in [("lambda_s_nm", &g.lambda_s_nm), ("lambda_i_nm", &g.lambda_i_nm)] {
        out.push_str(label);
        for v in axis {
            let _ = write!(out, ",{v:.9}");
        }
        out.push('\n');
    }
    for is in 0..g.n_s() {
        for ii in 0..g.n_i() {
            if ii > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.9e}", g.intensity_at(is, ii));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Read a grid CSV back as intensity-only data. Recognised `# key = value`
/// comments are restored into the metadata; unknown comments are ignored.
pub fn read_grid_csv(path: &Path) -> Result<JointSpectrum> {
    let text = read_text(path)?;
    let origin = path.display().to_string();
    let bad = |line: usize, why: String| Error::Parse {
        path: format!("{origin}:{line}"),
        why,
    };

    let mut meta = GridMeta::default();
    let mut axes: Vec<Vec<f64>> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "lambda_p0_nm" => meta.lambda_p0_nm = value.parse().ok(),
                    "pump_fwhm_nm" => meta.pump_fwhm_nm = value.parse().ok(),
                    "xi_deg" => meta.xi_deg = value.parse().ok(),
                    "theta_pm_deg" => meta.theta_pm_deg = value.parse().ok(),
                    "crystal_length_mm" => meta.crystal_length_mm = value.parse().ok(),
                    "sellmeier" => meta.sellmeier_name = Some(value.to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if axes.len() < 2 {
            let expect = ["lambda_s_nm", "lambda_i_nm"][axes.len()];
            let Some(values) = line.strip_prefix(&format!("{expect},")) else {
                return Err(bad(
                    lineno,
                    format!("expected the '{expect}' axis header row, got '{line}'"),
                ));
            };
            let axis = parse_floats(values, lineno, &origin)?;
            if axis.len() < 2 {
                return Err(bad(lineno, format!("axis '{expect}' has {} values", axis.len())));
            }
            axes.push(axis);
            continue;
        }
        rows.push(parse_floats(line, lineno, &origin)?);
    }
    if axes.len() < 2 {
        return Err(bad(
            text.lines().count(),
            "file ends before both axis header rows".into(),
        ));
    }
    let (n_s, n_i) = (axes[0].len(), axes[1].len());
    if rows.len() != n_s {
        return Err(bad(
            text.lines().count(),
            format!("expected {n_s} intensity rows, found {}", rows.len()),
        ));
    }
    let mut intensity = Vec::with_capacity(n_s * n_i);
    for (k, row) in rows.iter().enumerate() {
        if row.len() != n_i {
            return Err(bad(
                0,
                format!("intensity row {k} has {} columns, expected {n_i}", row.len()),
            ));
        }
        intensity.extend_from_slice(row);
    }
    let lambda_i = axes.pop().expect("two axes");
    let lambda_s = axes.pop().expect("one axis");
    JointSpectrum::from_intensity(lambda_s, lambda_i, intensity, meta)
}

fn parse_floats(csv: &str, lineno: usize, origin: &str) -> Result<Vec<f64>> {
    csv.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: format!("{origin}:{lineno}"),
                why: format!("'{tok}' is not a number"),
            })
        })
        .collect()
}

// ------------------------------------------------------------- heatmap PPM

/// Colormap anchor points (position, RGB), interpolated linearly.
const COLORMAP: [(f64, [u8; 3]); 5] = [
    (0.0, [0x00, 0x00, 0x04]),
    (0.25, [0x56, 0x10, 0x6e]),
    (0.5, [0xbb, 0x37, 0x54]),
    (0.75, [0xf9, 0x8c, 0x0a]),
    (1.0, [0xfc, 0xff, 0xa4]),
];

fn colormap(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    let mut lo = COLORMAP[0];
    for hi in COLORMAP.iter().skip(1) {
        if v <= hi.0 {
            let t = (v - lo.0) / (hi.0 - lo.0);
            let mut rgb = [0u8; 3];
            for (c, slot) in rgb.iter_mut().enumerate() {
                let x = lo.1[c] as f64 + t * (hi.1[c] as f64 - lo.1[c] as f64);
                *slot = x.round() as u8;
            }
            return rgb;
        }
        lo = *hi;
    }
    COLORMAP[4].1
}

/// Binary PPM heatmap of the intensity: signal wavelength left to right,
/// idler wavelength bottom to top.
pub fn write_heatmap_ppm(path: &Path, g: &JointSpectrum, config_hash: &str) -> Result<()> {
    let (w, h) = (g.n_s(), g.n_i());
    let mut bytes = format!("P6\n# config {config_hash}\n{w} {h}\n255\n").into_bytes();
    bytes.reserve(3 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            bytes.extend_from_slice(&colormap(g.intensity_at(col, row)));
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

// ----------------------------------------------------------- metadata TOML

#[derive(Serialize)]
struct MetadataFile<'a> {
    config_hash: &'a str,
    grid_hash: &'a str,
    n_s: usize,
    n_i: usize,
    lambda_s_nm: (f64, f64),
    lambda_i_nm: (f64, f64),
    config: &'a EffectiveConfig,
}

/// Companion metadata for a grid: hashes, axis ranges, and the complete
/// resolved parameter set.
pub fn write_metadata_toml(
    path: &Path,
    g: &JointSpectrum,
    effective: &EffectiveConfig,
    config_hash: &str,
) -> Result<()> {
    let file = MetadataFile {
        config_hash,
        grid_hash: &grid_hash(g),
        n_s: g.n_s(),
        n_i: g.n_i(),
        lambda_s_nm: (g.lambda_s_nm[0], g.lambda_s_nm[g.n_s() - 1]),
        lambda_i_nm: (g.lambda_i_nm[0], g.lambda_i_nm[g.n_i() - 1]),
        config: effective,
    };
    let text = toml::to_string(&file)
        .map_err(|e| Error::Config(format!("metadata serialization: {e}")))?;
    write_text(path, &text)
}

// -------------------------------------------------------------- sweep CSV

pub const SWEEP_CSV_HEADER: &str = "xi_deg,r,metric,entropy_bits,K,fwhm_s_nm,fwhm_i_nm";

/// Sweep table; failed points keep their row with NaN metrics so the angle
/// column stays complete.
pub fn write_sweep_csv(path: &Path, rows: &[SweepPoint], config_hash: &str) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# config {config_hash}");
    for p in rows {
        if let Some(reason) = &p.failure {
            let _ = writeln!(out, "# failed at xi = {:.4} deg: {reason}", p.xi_deg);
        }
    }
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in rows {
        let _ = writeln!(
            out,
            "{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            p.xi_deg, p.r, p.metric, p.entropy_bits, p.schmidt_number, p.fwhm_s_nm, p.fwhm_i_nm
        );
    }
    write_text(path, &out)
}

// --------------------------------------------------------------- scan CSV

pub const SCAN_CSV_HEADER: &str = "lambda_s_nm,lambda_i_nm,coincidences,singles_s,singles_i,t_s";

/// Scan records as CSV. `assumed` names the config fields that fell back to
/// surrogate defaults; each is recorded with the value actually used.
pub fn write_scan_csv(
    path: &Path,
    records: &[ScanRecord],
    cfg: &ScanConfig,
    assumed: &[&str],
    config_hash: &str,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# config {config_hash}");
    let _ = writeln!(
        out,
        "# bandpass_fwhm_nm = {}, step_nm = {}, pair_rate_peak_hz = {}, dark_rate_hz = {}, efficiency = {}",
        cfg.bandpass_fwhm_nm, cfg.step_nm, cfg.pair_rate_peak_hz, cfg.dark_rate_hz, cfg.efficiency
    );
    for name in assumed {
        let _ = writeln!(out, "# assumed {name} (surrogate default, not a measured property)");
    }
    out.push_str(SCAN_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{},{},{},{:.6}",
            r.lambda_s_nm, r.lambda_i_nm, r.coincidences, r.singles_s, r.singles_i,
            r.integration_time_s
        );
    }
    write_text(path, &out)
}

/// Parse a scan CSV (comments skipped, header verified) into records.
pub fn read_scan_csv(path: &Path) -> Result<Vec<ScanRecord>> {
    let text = read_text(path)?;
    let origin = path.display().to_string();
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != SCAN_CSV_HEADER {
                return Err(Error::Parse {
                    path: format!("{origin}:{lineno}"),
                    why: format!("expected header '{SCAN_CSV_HEADER}', got '{line}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                path: format!("{origin}:{lineno}"),
                why: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let num = |k: usize| -> Result<f64> {
            fields[k].trim().parse().map_err(|_| Error::Parse {
                path: format!("{origin}:{lineno}"),
                why: format!("'{}' is not a number", fields[k]),
            })
        };
        let count = |k: usize| -> Result<u64> {
            fields[k].trim().parse().map_err(|_| Error::Parse {
                path: format!("{origin}:{lineno}"),
                why: format!("'{}' is not a count", fields[k]),
            })
        };
        records.push(ScanRecord {
            lambda_s_nm: num(0)?,
            lambda_i_nm: num(1)?,
            coincidences: count(2)?,
            singles_s: count(3)?,
            singles_i: count(4)?,
            integration_time_s: num(5)?,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            path: origin,
            why: "no header line found".into(),
        });
    }
    Ok(records)
}

/// A file is treated as a scan if its first non-comment line is the scan
/// header; otherwise it is read as a grid.
pub fn looks_like_scan_csv(path: &Path) -> Result<bool> {
    let text = read_text(path)?;
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        return Ok(line == SCAN_CSV_HEADER);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{compute_jsa, GridSpec, PumpConfig};
    use crate::config::{Overrides, RunConfigFile};
    use crate::phasematch::{solve_pm_angle, CrystalConfig, PolarizationAssignment};
    use crate::scan::simulate_scan;
    use crate::sellmeier::SellmeierSet;
    use crate::tilt::TiltConfig;

    fn small_jsa(n: usize) -> JointSpectrum {
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
            &TiltConfig::new(0.0).unwrap(),
            &pump,
            &GridSpec::auto(n),
        )
        .unwrap()
    }

    #[test]
    fn grid_csv_round_trips_axes_intensity_and_meta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let g = small_jsa(48);
        write_grid_csv(&path, &g, "deadbeef0123").unwrap();
        let back = read_grid_csv(&path).unwrap();
        assert_eq!(back.n_s(), g.n_s());
        assert_eq!(back.n_i(), g.n_i());
        for (a, b) in g.lambda_s_nm.iter().zip(&back.lambda_s_nm) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in g.intensity.iter().zip(&back.intensity) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(back.amplitude.is_none());
        assert_eq!(back.meta.xi_deg, Some(0.0));
        assert_eq!(back.meta.lambda_p0_nm, Some(400.0));
        assert_eq!(back.meta.sellmeier_name.as_deref(), Some("bbo-kato-1986"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("# config deadbeef0123"));
    }

    #[test]
    fn grid_csv_rejects_truncation_and_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let g = small_jsa(32);
        write_grid_csv(&path, &g, "deadbeef0123").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..lines.len() - 3].join("\n");
        std::fs::write(&path, truncated).unwrap();
        assert!(matches!(read_grid_csv(&path), Err(Error::Parse { .. })));

        let mut ragged: Vec<String> = text.lines().map(str::to_string).collect();
        let last = ragged.last_mut().unwrap();
        *last = last.rsplit_once(',').unwrap().0.to_string();
        std::fs::write(&path, ragged.join("\n")).unwrap();
        assert!(matches!(read_grid_csv(&path), Err(Error::Parse { .. })));

        std::fs::write(&path, "lambda_i_nm,1,2\n").unwrap();
        let err = read_grid_csv(&path).unwrap_err();
        assert!(err.to_string().contains("lambda_s_nm"), "{err}");
    }

    #[test]
    fn heatmap_has_ppm_header_and_colormap_endpoints() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.ppm");
        let g = small_jsa(32);
        write_heatmap_ppm(&path, &g, "deadbeef0123").unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header_end = bytes
            .windows(4)
            .position(|w| w == b"255\n")
            .expect("maxval line")
            + 4;
        let header = std::str::from_utf8(&bytes[..header_end]).unwrap();
        assert!(header.starts_with("P6\n"));
        assert!(header.contains("# config deadbeef0123"));
        assert!(header.contains(&format!("{} {}", g.n_s(), g.n_i())));
        assert_eq!(bytes.len() - header_end, 3 * g.n_s() * g.n_i());

        let (pk, _) = g
            .intensity
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let (ps, pi) = (pk / g.n_i(), pk % g.n_i());
        // row (n_i - 1 - pi) top-down, column ps
        let off = header_end + 3 * ((g.n_i() - 1 - pi) * g.n_s() + ps);
        assert_eq!(&bytes[off..off + 3], &[0xfc, 0xff, 0xa4]);
        assert_eq!(colormap(0.0), [0x00, 0x00, 0x04]);
        assert_eq!(colormap(0.5), [0xbb, 0x37, 0x54]);
    }

    #[test]
    fn metadata_records_hashes_and_full_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.toml");
        let text = "[crystal]\nlength_mm = 3.5\nlambda_p0_nm = 400.0\n\n[pump]\nfwhm_nm = 2.0\n";
        let run = RunConfigFile::from_str_embedded(text, "test")
            .unwrap()
            .resolve(&Overrides::default())
            .unwrap();
        let g = small_jsa(32);
        write_metadata_toml(&path, &g, &run.effective, &run.config_hash).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        let value: toml::Value = toml::from_str(&body).unwrap();
        assert_eq!(
            value["config_hash"].as_str().unwrap(),
            run.config_hash.as_str()
        );
        assert_eq!(value["grid_hash"].as_str().unwrap(), grid_hash(&g));
        assert_eq!(
            value["config"]["sellmeier"].as_str().unwrap(),
            "bbo-kato-1986"
        );
        assert!(value["config"]["crystal"]["theta_pm_deg"].as_float().unwrap() > 40.0);
    }

    #[test]
    fn sweep_csv_writes_header_and_nan_rows_for_failures() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let ok = SweepPoint {
            xi_deg: 0.0,
            r: -0.9,
            metric: 0.81,
            entropy_bits: 2.0,
            schmidt_number: 3.0,
            fwhm_s_nm: 4.2,
            fwhm_i_nm: 11.9,
            regime: None,
            failure: None,
        };
        let bad = SweepPoint::failed(38.0, "window too small".into());
        write_sweep_csv(&path, &[ok, bad], "deadbeef0123").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("0.0000,-0.900000"));
        let nan_row = lines.next().unwrap();
        assert!(nan_row.starts_with("38.0000,NaN"), "{nan_row}");
        assert!(text.contains("# failed at xi = 38.0000 deg: window too small"));
    }

    #[test]
    fn scan_csv_round_trips_and_flags_assumptions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let g = small_jsa(96);
        let (lo_s, hi_s) = (g.lambda_s_nm[10], g.lambda_s_nm[80]);
        let lo_i = g.lambda_i_nm[10];
        let step = (hi_s - lo_s) / 6.0;
        let cfg = ScanConfig {
            bandpass_fwhm_nm: step,
            step_nm: step,
            range_s_nm: (lo_s, lo_s + 6.0 * step),
            range_i_nm: (lo_i, lo_i + 6.0 * step),
            pair_rate_peak_hz: 1e4,
            dark_rate_hz: 0.0,
            efficiency: 0.1,
            integration_time_s: 1.0,
        };
        let records = simulate_scan(&g, &cfg, 7).unwrap();
        write_scan_csv(&path, &records, &cfg, &["dark_rate_hz"], "deadbeef0123").unwrap();
        let back = read_scan_csv(&path).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            assert!((a.lambda_s_nm - b.lambda_s_nm).abs() < 1e-6);
            assert_eq!(a.coincidences, b.coincidences);
            assert_eq!(a.singles_i, b.singles_i);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("# assumed dark_rate_hz"));
        assert!(looks_like_scan_csv(&path).unwrap());

        let gpath = dir.path().join("grid.csv");
        write_grid_csv(&gpath, &g, "deadbeef0123").unwrap();
        assert!(!looks_like_scan_csv(&gpath).unwrap());
    }

    #[test]
    fn scan_csv_rejects_bad_header_and_short_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        std::fs::write(&path, "lambda_s,lambda_i\n1,2\n").unwrap();
        assert!(matches!(read_scan_csv(&path), Err(Error::Parse { .. })));
        std::fs::write(&path, format!("{SCAN_CSV_HEADER}\n1,2,3\n")).unwrap();
        assert!(matches!(read_scan_csv(&path), Err(Error::Parse { .. })));
        std::fs::write(&path, "").unwrap();
        assert!(matches!(read_scan_csv(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn basename_embeds_signed_angle_and_hash()
    {
        assert_eq!(jsa_basename(38.0, "1a2b3c4d5e6f"), "jsa_xi+38.000_1a2b3c4d5e6f");
        assert_eq!(jsa_basename(-52.5, "ff0011223344"), "jsa_xi-52.500_ff0011223344");
    }
}
