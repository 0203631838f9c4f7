//! Command-line front end shared by the `spectra-lab` binary and the tests.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::asymptotics::{fit_power_law, predict, FitSummary, WindowRule};
use crate::error::{Error, Result};
use crate::experiments::{emit_report, exit_code, run_experiment, ExperimentConfig, ExperimentKind, Format, Report};
use crate::measure::{ahlfors_estimate, default_radii, discretize, AtomicMeasure, CenterRule};
use crate::operators::{assemble_selfadjoint, symmetric_eigenvalues, SpectralResult};

#[derive(Debug, Parser)]
#[command(name = "spectra-lab", about = "Spectra of Birman-Schwinger operators on singular measures")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Discretize the measure; writes measure.csv and ahlfors.json.
    Measure(Common),
    /// Spectrum, fit and theory comparison.
    Spectrum(Common),
    /// Power-law fit of a spectrum (computed, or read from `--spectrum`).
    Fit {
        #[command(flatten)]
        common: Common,
        /// A `k,value` CSV to fit instead of computing the spectrum.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Theoretical exponent, Weyl coefficients and bound inputs.
    Predict(Common),
    Covering(Common),
    Clr(Common),
    Nonsa(Common),
    Localize(Common),
    /// Run the experiment named in the config.
    Report(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: the config's `output.dir`, else `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<usize>,
    /// Atom count for spheres and circles (same slot as `--level`).
    #[arg(long)]
    pub atoms: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `auto` or `k_min:k_max`.
    #[arg(long)]
    pub window: Option<String>,
}

impl Common {
    fn load(&self, kind: Option<ExperimentKind>) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(l) = self.level.or(self.atoms) {
            cfg.measure.level = l;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = &self.window {
            cfg.fit.window = w.clone();
        }
        if let Some(k) = kind {
            cfg.experiment = k;
        }
        let out = self.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), body)?;
    Ok(())
}

fn measure_of(cfg: &ExperimentConfig) -> Result<AtomicMeasure> {
    discretize(&cfg.measure.to_spec()?, cfg.measure.level)
}

fn spectrum_of(cfg: &ExperimentConfig) -> Result<(AtomicMeasure, Vec<f64>, SpectralResult)> {
    let m = measure_of(cfg)?;
    let v = cfg.density.table(&m, cfg.seed, 0)?;
    let op = assemble_selfadjoint(&cfg.kernel_spec()?, &m, &v, cfg.diagonal_rule())?;
    let sr = symmetric_eigenvalues(&op, 1e-9)?;
    Ok((m, v, sr))
}

/// Parse a `k,value` spectrum CSV.
pub fn read_spectrum_csv(text: &str) -> Result<SpectralResult> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("k,value") {
        return Err(Error::Config("spectrum CSV must start with `k,value`".into()));
    }
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .nth(1)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad spectrum row `{l}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralResult::eigen(values))
}

fn run_report(common: &Common, kind: Option<ExperimentKind>) -> Result<Report> {
    let (cfg, out) = common.load(kind)?;
    let report = run_experiment(&cfg)?;
    emit_report(&report, &out, &[Format::Json, Format::Csv])?;
    Ok(report)
}

fn theory_json(cfg: &ExperimentConfig, m: &AtomicMeasure, v: &[f64]) -> Result<serde_json::Value> {
    let k = cfg.kernel_spec()?;
    let ahl = ahlfors_estimate(m, m.nominal_dim(), &default_radii(m, 16), CenterRule::default())?;
    let one_sign = v.iter().all(|x| *x >= 0.0) || v.iter().all(|x| *x <= 0.0);
    let p = predict(&k, m, v, cfg.measure.is_surface() && one_sign, Some(&ahl))?;
    Ok(serde_json::json!({ "config_hash": cfg.config_hash(), "prediction": p, "ahlfors": ahl }))
}

/// Run one verb; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.verb {
        Verb::Measure(c) => {
            let (cfg, out) = c.load(None)?;
            let m = measure_of(&cfg)?;
            let ahl = ahlfors_estimate(&m, m.nominal_dim(), &default_radii(&m, 16), CenterRule::default())?;
            write(&out, "measure.csv", &m.to_csv())?;
            write(&out, "ahlfors.json", &serde_json::to_string_pretty(&ahl)?)?;
            Ok(0)
        }
        Verb::Predict(c) => {
            let (cfg, out) = c.load(None)?;
            cfg.validate()?;
            let m = measure_of(&cfg)?;
            let v = cfg.density.table(&m, cfg.seed, 0)?;
            write(&out, "prediction.json", &serde_json::to_string_pretty(&theory_json(&cfg, &m, &v)?)?)?;
            Ok(0)
        }
        Verb::Fit { common, spectrum } => {
            let (cfg, out) = common.load(Some(ExperimentKind::Spectrum))?;
            cfg.validate()?;
            let window: WindowRule = cfg.window()?;
            let m = measure_of(&cfg)?;
            let v = cfg.density.table(&m, cfg.seed, 0)?;
            let sr = match spectrum {
                Some(p) => read_spectrum_csv(&fs::read_to_string(p)?)?,
                None => spectrum_of(&cfg)?.2,
            };
            let ahl = ahlfors_estimate(&m, m.nominal_dim(), &default_radii(&m, 16), CenterRule::default())?;
            let one_sign = v.iter().all(|x| *x >= 0.0);
            let theory = predict(&cfg.kernel_spec()?, &m, &v, cfg.measure.is_surface() && one_sign, Some(&ahl))?;
            let fit = fit_power_law(&sr, window)?;
            let ratio = theory
                .bound_plus
                .as_ref()
                .map(|b| crate::asymptotics::bound_ratio(&sr, theory.theta, b.bound_k))
                .transpose()?;
            let summary = FitSummary::new(&theory, &fit, ratio);
            write(&out, "fit.json", &serde_json::to_string_pretty(&summary)?)?;
            Ok(0)
        }
        Verb::Spectrum(c) => Ok(run_report(&c, Some(ExperimentKind::Spectrum))?.exit_code()),
        Verb::Covering(c) => Ok(run_report(&c, Some(ExperimentKind::Covering))?.exit_code()),
        Verb::Clr(c) => Ok(run_report(&c, Some(ExperimentKind::Clr))?.exit_code()),
        Verb::Nonsa(c) => Ok(run_report(&c, Some(ExperimentKind::Nonsa))?.exit_code()),
        Verb::Localize(c) => Ok(run_report(&c, Some(ExperimentKind::Localization))?.exit_code()),
        Verb::Report(c) => Ok(run_report(&c, None)?.exit_code()),
    }
}

/// Parse `args` (program name first), run, print errors, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = execute(cli);
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("spectra-lab: {e}");
            exit_code(&Err(e))
        }
    }
}
