//! Command-line front end.
//!
//! Precedence for parameters: preset defaults, then the `--config` file,
//! then `--set key=value` overrides in the order given, then dedicated
//! flags such as `--no-coupling`.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure.

pub mod output;
pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::analytic::{dressed_eigenvalues, linewidths_from};
use crate::analysis::{convolve_laser_linewidth, fit_lorentzian, sweep_linewidth, SweepOptions};
use crate::config::RunConfig;
use crate::doppler::{
    averaged_spectrum, calibrate_od, gaussian_quadrature, transmission, FineWindow, Quadrature,
    DEFAULT_NODES, DEFAULT_SPAN,
};
use crate::error::Error;
use crate::model::{cesium, FieldSpec, Quantity, Spectrum, SpectrumMeta, ValidConfig};
use crate::num::fmt_sig;
use output::{csv_table, num, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Self::numeric(e.to_string())
        } else {
            Self::usage(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "subdoppler",
    version,
    about = "Doppler-broadened Lambda-system probe absorption: spectra, linewidths, fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Doppler-averaged probe absorption and transmission spectrum.
    Spectrum(SpectrumArgs),
    /// Fitted narrow-peak width against coupling detuning.
    Sweep(SweepArgs),
    /// Closed-form widths of the two absorption peaks.
    Analytic(AnalyticArgs),
    /// Dressed-state energies of the coupled transition.
    Dressed(DressedArgs),
    /// Lorentzian fit to a measured or simulated trace.
    Fit(FitArgs),
    /// Optical depth for a target no-coupling peak absorption.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable, applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Velocity-quadrature node count (odd, >= 11).
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Velocity-quadrature half-range in Doppler standard deviations.
    #[arg(long, default_value_t = DEFAULT_SPAN)]
    pub span: f64,
}

#[derive(Debug, Args)]
pub struct FineArgs {
    /// Half-width (MHz) of the fine window around the upper dressed state.
    #[arg(long, default_value_t = 25.0)]
    pub fine_half_width: f64,
    /// Fine-window step (MHz).
    #[arg(long, default_value_t = 0.05)]
    pub fine_step: f64,
}

impl FineArgs {
    fn window(&self) -> FineWindow<f64> {
        FineWindow {
            half_width: self.fine_half_width,
            step: self.fine_step,
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub fine_window: FineArgs,
    /// Switch the coupling field off (coupling_rabi = 0).
    #[arg(long)]
    pub no_coupling: bool,
    /// Scan the fine window around λ+ instead of the configured grid.
    #[arg(long)]
    pub fine: bool,
    /// CSV output path; stdout if absent. A `.manifest` file is written next to it.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot of the absorption.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub fine_window: FineArgs,
    /// Coupling detunings (MHz): `start:stop:step` or a comma-separated list.
    #[arg(long, short = 'd', allow_hyphen_values = true)]
    pub detunings: String,
    /// Minimum peak prominence as a fraction of the window's dynamic range.
    #[arg(long, default_value_t = 0.02)]
    pub min_prominence: f64,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot of fitted width against detuning.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Γ31 + Γ32 (MHz).
    #[arg(long, default_value_t = cesium::GAMMA_SUM, allow_negative_numbers = true)]
    pub gamma_sum: f64,
    /// Full Doppler width D (MHz).
    #[arg(long, default_value_t = cesium::DOPPLER_FWHM, allow_negative_numbers = true)]
    pub doppler_fwhm: f64,
    /// Coupling detuning ΔC (MHz).
    #[arg(long, allow_negative_numbers = true)]
    pub delta_c: f64,
    /// Coupling Rabi frequency ΩC (MHz).
    #[arg(long, default_value_t = cesium::COUPLING_RABI, allow_negative_numbers = true)]
    pub omega_c: f64,
}

#[derive(Debug, Args)]
pub struct DressedArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta_c: f64,
    #[arg(long, default_value_t = cesium::COUPLING_RABI, allow_negative_numbers = true)]
    pub omega_c: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns `delta_p_mhz` and `absorption`; `#` lines are skipped.
    pub input: PathBuf,
    /// Lower window edge (MHz); defaults to the first sample.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Upper window edge (MHz); defaults to the last sample.
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Target peak absorption fraction of the no-coupling line, in [0, 1).
    #[arg(long, short = 't')]
    pub target: f64,
    /// Write a copy of the resolved configuration with the calibrated od0.
    #[arg(long, short = 'w')]
    pub write: Option<PathBuf>,
}

fn load_config(args: &ConfigArgs) -> CliResult<RunConfig<f64>> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config file {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&args.set)?;
    Ok(cfg)
}

fn quadrature(args: &ConfigArgs, cfg: &ValidConfig<f64>) -> CliResult<Quadrature<f64>> {
    Ok(gaussian_quadrature(
        cfg.ensemble().doppler_fwhm,
        args.nodes,
        args.span,
    )?)
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Writes the table to `out` (plus manifest) or to stdout.
fn emit(
    out: &Option<PathBuf>,
    manifest: &RunManifest,
    table: &str,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    match out {
        Some(path) => {
            write_file(path, table)?;
            write_file(&manifest_path(path), &manifest.file_body())
        }
        None => stdout
            .write_all(table.as_bytes())
            .map_err(|e| CliError::usage(format!("cannot write output: {e}"))),
    }
}

fn common_flags(args: &ConfigArgs) -> Vec<(&'static str, String)> {
    vec![
        ("quadrature_nodes", args.nodes.to_string()),
        ("quadrature_span", args.span.to_string()),
    ]
}

fn cmd_spectrum(a: &SpectrumArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut cfg = load_config(&a.cfg)?;
    if a.no_coupling {
        cfg.coupling.rabi = 0.0;
    }
    let valid = cfg.validated()?;
    let quad = quadrature(&a.cfg, &valid)?;
    let grid = if a.fine {
        a.fine_window.window().grid(valid.coupling())?
    } else {
        cfg.grid()?
    };
    let mut spec = averaged_spectrum(&valid, &grid, &quad)?;
    if let Some(lw) = valid.combined_linewidth() {
        spec = convolve_laser_linewidth(&spec, lw)?;
    }
    let trans = transmission(&spec, cfg.od0)?;

    let mut flags = Vec::new();
    if a.fine {
        flags.push("--fine".to_string());
    }
    let mut manifest = RunManifest::new("spectrum", flags, cfg);
    for (k, v) in common_flags(&a.cfg) {
        manifest = manifest.with(k, v);
    }
    if a.fine {
        manifest = manifest
            .with("fine_half_width", a.fine_window.fine_half_width)
            .with("fine_step", a.fine_window.fine_step);
    }
    let rows: Vec<Vec<String>> = spec
        .detunings()
        .iter()
        .zip(spec.values())
        .zip(trans.values())
        .map(|((d, a), t)| vec![num(Some(*d)), num(Some(*a)), num(Some(*t))])
        .collect();
    let table = csv_table(
        &manifest,
        &["delta_p_mhz", "absorption", "transmission"],
        &rows,
    );
    emit(&a.out, &manifest, &table, stdout)?;
    if let Some(path) = &a.svg {
        let title = format!(
            "coupling detuning {} MHz, Rabi {} MHz",
            cfg.coupling.detuning, cfg.coupling.rabi
        );
        write_file(
            path,
            &svg::line_plot(
                spec.detunings(),
                spec.values(),
                &title,
                "probe detuning (MHz)",
                "normalized absorption",
            ),
        )?;
    }
    Ok(())
}

/// `start:stop:step` (inclusive of stop) or a comma-separated list.
pub fn parse_detunings(list: &str) -> CliResult<Vec<f64>> {
    let list = list.trim();
    if list.is_empty() {
        return Err(CliError::usage("empty detuning list"));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::usage(format!("cannot parse detuning `{}`", s.trim())))
    };
    if list.contains(':') {
        let parts: Vec<&str> = list.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(CliError::usage(format!(
                "range `{list}` must be start:stop:step"
            )));
        };
        let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
        if !(step > 0.0) || stop < start {
            return Err(CliError::usage(format!(
                "range `{list}` needs step > 0 and stop >= start"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(CliError::usage(format!(
                "range `{list}` has too many points"
            )));
        }
        return Ok((0..count).map(|k| start + step * k as f64).collect());
    }
    let values: Vec<f64> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse)
        .collect::<CliResult<_>>()?;
    if values.is_empty() {
        return Err(CliError::usage("empty detuning list"));
    }
    Ok(values)
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let detunings = parse_detunings(&a.detunings)?;
    let cfg = load_config(&a.cfg)?;
    let valid = cfg.validated()?;
    let quad = quadrature(&a.cfg, &valid)?;
    let opts = SweepOptions {
        fine: a.fine_window.window(),
        min_prominence: a.min_prominence,
        ..SweepOptions::default()
    };
    if !(opts.min_prominence > 0.0 && opts.min_prominence < 1.0) {
        return Err(CliError::usage("--min-prominence must lie in (0, 1)"));
    }
    let rows = sweep_linewidth(&valid, &detunings, &opts, &quad);

    let mut manifest = RunManifest::new("sweep", vec![format!("--detunings {}", a.detunings)], cfg);
    for (k, v) in common_flags(&a.cfg) {
        manifest = manifest.with(k, v);
    }
    manifest = manifest
        .with("fine_half_width", a.fine_window.fine_half_width)
        .with("fine_step", a.fine_window.fine_step)
        .with("min_prominence", a.min_prominence);
    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let ok = r.outcome.as_ref().ok();
            let note = match &r.outcome {
                Ok(_) => String::new(),
                Err(e) => e.replace([',', '\n'], ";"),
            };
            vec![
                num(Some(r.coupling_detuning)),
                num(ok.map(|p| p.fwhm_numeric)),
                num(r.fwhm_analytic),
                num(ok.map(|p| p.peak_center)),
                num(r.residual()),
                note,
            ]
        })
        .collect();
    let table = csv_table(
        &manifest,
        &[
            "delta_c_mhz",
            "fwhm_numeric_mhz",
            "fwhm_analytic_mhz",
            "peak_center_mhz",
            "residual",
            "note",
        ],
        &table_rows,
    );
    emit(&a.out, &manifest, &table, stdout)?;
    if let Some(path) = &a.svg {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter_map(|r| {
                r.outcome
                    .as_ref()
                    .ok()
                    .map(|p| (r.coupling_detuning, p.fwhm_numeric))
            })
            .unzip();
        write_file(
            path,
            &svg::line_plot(
                &x,
                &y,
                "narrow-peak linewidth",
                "coupling detuning (MHz)",
                "FWHM (MHz)",
            ),
        )?;
    }
    if rows.iter().all(|r| r.outcome.is_err()) {
        return Err(CliError::numeric("every sweep row failed"));
    }
    Ok(())
}

fn cmd_analytic(a: &AnalyticArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let p = linewidths_from(a.gamma_sum, a.doppler_fwhm, a.delta_c, a.omega_c)?;
    writeln!(stdout, "nu_plus = {} MHz", fmt_sig(p.nu_plus, 4))
        .and_then(|_| writeln!(stdout, "nu_minus = {} MHz", fmt_sig(p.nu_minus, 4)))
        .map_err(|e| CliError::usage(e.to_string()))
}

fn cmd_dressed(a: &DressedArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if a.omega_c < 0.0 {
        return Err(CliError::usage("coupling Rabi frequency must be >= 0"));
    }
    let (plus, minus) = dressed_eigenvalues(&FieldSpec::new(a.omega_c, a.delta_c));
    writeln!(stdout, "lambda_plus = {} MHz", fmt_sig(plus, 6))
        .and_then(|_| writeln!(stdout, "lambda_minus = {} MHz", fmt_sig(minus, 6)))
        .and_then(|_| writeln!(stdout, "splitting = {} MHz", fmt_sig(plus - minus, 6)))
        .map_err(|e| CliError::usage(e.to_string()))
}

/// Reads `delta_p_mhz` and `absorption` columns from a CSV trace.
pub fn read_trace(path: &Path) -> CliResult<Spectrum<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::usage(format!("{}: bad header: {e}", path.display())))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::usage(format!("{}: missing column `{name}`", path.display())))
    };
    let (xi, yi) = (column("delta_p_mhz")?, column("absorption")?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(k as u64 + 2);
        let cell = |i: usize, name: &str| {
            record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::usage(format!(
                        "{}: line {line}, column `{name}`: not a number",
                        path.display()
                    ))
                })
        };
        x.push(cell(xi, "delta_p_mhz")?);
        y.push(cell(yi, "absorption")?);
    }
    if x.len() < crate::analysis::fit::MIN_SAMPLES {
        return Err(CliError::usage(format!(
            "{}: {} data rows, need at least {}",
            path.display(),
            x.len(),
            crate::analysis::fit::MIN_SAMPLES
        )));
    }
    Spectrum::new(x, y, SpectrumMeta::external(Quantity::Absorption))
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_fit(a: &FitArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let spec = read_trace(&a.input)?;
    let d = spec.detunings();
    let lo = a.lo.unwrap_or(d[0]);
    let hi = a.hi.unwrap_or(d[d.len() - 1]);
    if !(hi > lo) {
        return Err(CliError::usage("fit window needs --hi > --lo"));
    }
    let f = fit_lorentzian(&spec, (lo, hi)).map_err(|e| match e {
        Error::Fit(_) => CliError::numeric(e.to_string()),
        other => other.into(),
    })?;
    let json = serde_json::json!({
        "center": f.center,
        "fwhm": f.fwhm,
        "amplitude": f.amplitude,
        "offset": f.offset,
        "residual_norm": f.residual_norm,
        "iterations": f.iterations,
    });
    let text = format!(
        "Lorentzian fit over [{lo}, {hi}] MHz\n\
         center = {} MHz\nfwhm = {} MHz\namplitude = {}\noffset = {}\nresidual = {}\n{}\n",
        f.center,
        f.fwhm,
        f.amplitude,
        f.offset,
        f.residual_norm,
        serde_json::to_string_pretty(&json).expect("plain numbers serialize"),
    );
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::usage(e.to_string()))
}

fn cmd_calibrate(a: &CalibrateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut cfg = load_config(&a.cfg)?;
    let valid = cfg.validated()?;
    let quad = quadrature(&a.cfg, &valid)?;
    let cal = calibrate_od(a.target, &valid, &quad)?;
    cfg.od0 = cal.od0;
    writeln!(stdout, "od0 = {}", cal.od0)
        .and_then(|_| writeln!(stdout, "a_peak = {}", cal.a_peak))
        .map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(path) = &a.write {
        let mut manifest =
            RunManifest::new("calibrate", vec![format!("--target {}", a.target)], cfg);
        for (k, v) in common_flags(&a.cfg) {
            manifest = manifest.with(k, v);
        }
        write_file(path, &manifest.file_body())?;
    }
    Ok(())
}

/// Runs the already-parsed command.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Analytic(a) => cmd_analytic(a, stdout),
        Command::Dressed(a) => cmd_dressed(a, stdout),
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Calibrate(a) => cmd_calibrate(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
