//! Command-line front end: argument definitions and the per-subcommand
//! drivers. Failures map onto exit code 2 (configuration, parsing, i/o) or
//! 3 (numeric), with one JSON error line on stderr.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::biphoton::compute_jsa;
use crate::config::{self, Overrides, ResolvedRun, RunConfigFile, SweepSection};
use crate::export::{
    grid_hash, jsa_basename, looks_like_scan_csv, read_grid_csv, read_scan_csv, write_grid_csv,
    write_heatmap_ppm, write_metadata_toml, write_scan_csv, write_sweep_csv,
};
use crate::report::analyze_spectrum;
use crate::scan::{ingest_scan, simulate_scan};
use crate::sweep::{solve_xi, sweep_xi, SweepContext, XiTarget};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "spdc",
    version,
    about = "Joint spectral simulation of pulse-front-tilted downconversion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a joint spectrum; emit grid CSV, heatmap PPM, and metadata TOML
    Jsa(RunArgs),
    /// Analyse a grid or scan CSV into a report TOML
    Analyze(AnalyzeArgs),
    /// Sweep the tilt angle; emit the sweep table CSV
    Sweep(SweepArgs),
    /// Simulate a monochromator coincidence scan; emit its CSV
    Scan(RunArgs),
    /// Solve for the tilt angle hitting a correlation target
    SolveXi(SolveArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration file (TOML)
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Embedded parameter set: fig3a, fig3c, fig3e, fig3g, or fig4
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Override the configured RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the configured output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Grid CSV or scan CSV to analyse
    pub input: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Sweep start angle, degrees (overrides the config)
    #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Sweep stop angle, degrees (overrides the config)
    #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Number of sweep points (overrides the config)
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// "uncorrelated" or a correlation coefficient in [-1, 1]
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Lower search bound, degrees
    #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Upper search bound, degrees
    #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
    pub hi: Option<f64>,
}

/// One stable JSON line describing a failure, for scripting against stderr.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({
        "error": e.code(),
        "message": e.to_string(),
    })
    .to_string()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Jsa(a) => cmd_jsa(&load_run(&a)?),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Sweep(a) => cmd_sweep(&load_run(&a.run)?, &a),
        Command::Scan(a) => cmd_scan(&load_run(&a)?),
        Command::SolveXi(a) => cmd_solve_xi(&load_run(&a.run)?, &a),
    }
}

fn load_run(a: &RunArgs) -> Result<ResolvedRun> {
    let file = load_file(a)?.ok_or_else(|| {
        Error::Config("this command needs --config <file> or --preset <name>".into())
    })?;
    resolve(&file, a)
}

fn load_file(a: &RunArgs) -> Result<Option<RunConfigFile>> {
    match (&a.config, &a.preset) {
        (Some(_), Some(_)) => Err(Error::Config(
            "give --config or --preset, not both".into(),
        )),
        (Some(path), None) => RunConfigFile::load(path).map(Some),
        (None, Some(name)) => config::load_preset(name).map(Some),
        (None, None) => Ok(None),
    }
}

fn resolve(file: &RunConfigFile, a: &RunArgs) -> Result<ResolvedRun> {
    file.resolve(&Overrides {
        seed: a.seed,
        out_dir: a.out.clone(),
    })
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn emitted(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_jsa(run: &ResolvedRun) -> Result<()> {
    let e = &run.effective;
    let g = compute_jsa(&run.set, &e.crystal, &e.tilt, &e.pump, &e.grid)?;
    ensure_out_dir(&run.out_dir)?;
    let base = jsa_basename(e.tilt.xi_deg, &grid_hash(&g));

    let csv = run.out_dir.join(format!("{base}.csv"));
    write_grid_csv(&csv, &g, &run.config_hash)?;
    emitted(&csv);

    let ppm = run.out_dir.join(format!("{base}.ppm"));
    write_heatmap_ppm(&ppm, &g, &run.config_hash)?;
    emitted(&ppm);

    let meta = run.out_dir.join(format!("{base}.toml"));
    write_metadata_toml(&meta, &g, e, &run.config_hash)?;
    emitted(&meta);
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    // an optional config supplies classification thresholds and tags the
    // report with the parameter hash; without one, defaults apply
    let loaded = match load_file(&a.run)? {
        Some(file) => Some(resolve(&file, &a.run)?),
        None => None,
    };
    let thresholds = loaded
        .as_ref()
        .map(|r| r.effective.thresholds)
        .unwrap_or_default();
    let config_hash = loaded.as_ref().map(|r| r.config_hash.clone());

    let g = if looks_like_scan_csv(&a.input)? {
        ingest_scan(&read_scan_csv(&a.input)?)?
    } else {
        read_grid_csv(&a.input)?
    };
    let source = a
        .input
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| a.input.display().to_string());
    let report = analyze_spectrum(&g, &thresholds, source, config_hash)?;

    let out_dir = loaded
        .as_ref()
        .map(|r| r.out_dir.clone())
        .or_else(|| a.run.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    ensure_out_dir(&out_dir)?;
    let stem = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    let path = out_dir.join(format!("report_{stem}.toml"));
    report.write(&path)?;
    emitted(&path);
    println!("regime {}", report.regime);
    Ok(())
}

fn sweep_context<'a>(run: &'a ResolvedRun) -> SweepContext<'a> {
    let e = &run.effective;
    SweepContext {
        set: &run.set,
        crystal: e.crystal.clone(),
        pump: e.pump,
        grid: e.grid,
        applied_to: e.tilt.applied_to,
        thresholds: e.thresholds,
    }
}

fn cmd_sweep(run: &ResolvedRun, a: &SweepArgs) -> Result<()> {
    let section = run.effective.sweep.unwrap_or_default();
    let range = SweepSection {
        start_deg: a.from.unwrap_or(section.start_deg),
        stop_deg: a.to.unwrap_or(section.stop_deg),
        points: a.points.unwrap_or(section.points),
    };
    let ctx = sweep_context(run);
    let rows = sweep_xi(&ctx, range.start_deg, range.stop_deg, range.points)?;
    ensure_out_dir(&run.out_dir)?;
    let path = run.out_dir.join(format!("sweep_{}.csv", run.config_hash));
    write_sweep_csv(&path, &rows, &run.config_hash)?;
    emitted(&path);
    Ok(())
}

fn cmd_scan(run: &ResolvedRun) -> Result<()> {
    let e = &run.effective;
    let g = compute_jsa(&run.set, &e.crystal, &e.tilt, &e.pump, &e.grid)?;
    let (cfg, assumed) = run.scan_config(&g)?;
    let records = simulate_scan(&g, &cfg, e.seed)?;
    ensure_out_dir(&run.out_dir)?;
    let path = run.out_dir.join(format!("scan_{}.csv", run.config_hash));
    write_scan_csv(&path, &records, &cfg, &assumed, &run.config_hash)?;
    emitted(&path);
    Ok(())
}

#[derive(Serialize)]
struct SolveReport<'a> {
    config_hash: &'a str,
    xi_deg: f64,
    r: f64,
    metric: f64,
    entropy_bits: f64,
    schmidt_number: f64,
    fwhm_s_nm: f64,
    fwhm_i_nm: f64,
    regime: String,
}

fn cmd_solve_xi(run: &ResolvedRun, a: &SolveArgs) -> Result<()> {
    let section = run.effective.solve.unwrap_or_default();
    let target = match &a.target {
        None => section.target.to_xi_target(),
        Some(text) => parse_target(text)?,
    };
    let (lo, hi) = (a.lo.unwrap_or(section.lo_deg), a.hi.unwrap_or(section.hi_deg));

    let ctx = sweep_context(run);
    let sol = solve_xi(&ctx, target, lo, hi)?;
    let p = &sol.point;
    let report = SolveReport {
        config_hash: &run.config_hash,
        xi_deg: sol.xi_deg,
        r: p.r,
        metric: p.metric,
        entropy_bits: p.entropy_bits,
        schmidt_number: p.schmidt_number,
        fwhm_s_nm: p.fwhm_s_nm,
        fwhm_i_nm: p.fwhm_i_nm,
        regime: p
            .regime
            .map(|r| r.to_string())
            .unwrap_or_else(|| "unknown".into()),
    };
    let text = toml::to_string(&report)
        .map_err(|e| Error::Config(format!("solution serialization: {e}")))?;
    print!("{text}");

    ensure_out_dir(&run.out_dir)?;
    let path = run.out_dir.join(format!("solve_{}.toml", run.config_hash));
    std::fs::write(&path, &text).map_err(|e| Error::io(path.display().to_string(), e))?;
    emitted(&path);
    Ok(())
}

fn parse_target(text: &str) -> Result<XiTarget> {
    if text.eq_ignore_ascii_case("uncorrelated") {
        return Ok(XiTarget::Uncorrelated);
    }
    let r: f64 = text.parse().map_err(|_| {
        Error::Config(format!(
            "target '{text}' is neither \"uncorrelated\" nor a number"
        ))
    })?;
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::Config(format!(
            "target {r} is not a correlation coefficient in [-1, 1]"
        )));
    }
    Ok(XiTarget::RValue(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_line_is_machine_readable_json() {
        let e = Error::Config("bad".into());
        let line = error_json(&e);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "config");
        assert_eq!(v["message"], "config error: bad");
    }

    #[test]
    fn target_strings_parse_or_reject() {
        assert!(matches!(
            parse_target("uncorrelated").unwrap(),
            XiTarget::Uncorrelated
        ));
        assert!(matches!(
            parse_target("-0.9").unwrap(),
            XiTarget::RValue(v) if v == -0.9
        ));
        assert!(parse_target("2.0").is_err());
        assert!(parse_target("circular").is_err());
    }

    #[test]
    fn missing_config_and_preset_is_a_config_error() {
        let args = RunArgs {
            config: None,
            preset: None,
            seed: None,
            out: None,
        };
        let err = load_run(&args).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn cli_parses_all_subcommands() {
        for argv in [
            vec!["spdc", "jsa", "--preset", "fig3a"],
            vec!["spdc", "analyze", "grid.csv"],
            vec!["spdc", "sweep", "--preset", "fig3a", "--from", "-60", "--to", "45"],
            vec!["spdc", "scan", "--preset", "fig3c", "--seed", "7"],
            vec!["spdc", "solve-xi", "--preset", "fig3e", "--target", "uncorrelated"],
        ] {
            Cli::try_parse_from(&argv).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
        }
        assert!(Cli::try_parse_from(["spdc", "jsa", "--config", "a.toml", "--preset", "fig3a"])
            .is_err());
    }
}
