//! Command-line front end.
//!
//! Every subcommand resolves its flags (optionally on top of a previously
//! emitted `run_config.toml`), writes plain CSV outputs into `--out`, and
//! records the resolved configuration next to them.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coda::clr;
use crate::dfm::{component_counts, fit_dfm, ComponentPolicy, DfmConfig};
use crate::error::{Error, Result};
use crate::evaluation::{run_backtest, BacktestPlan, LabeledModel, ModelSpec};
use crate::forecast::{validate_levels, BootstrapConfig, ForecastMethod};
use crate::fts::{difference, independence_test, kpss_test};
use crate::lc::{fit_lc, LcConfig, Resampling};
use crate::lifetable::{gini_series, parse_lifetable, rebuild_deaths, LifeTableGrid, Sex, DEFAULT_RADIX};
use crate::synth::synth_fixture;

pub const CONFIG_FILE: &str = "run_config.toml";
const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "coda-dfm", version, about = "Bootstrap prediction intervals for life-table death distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rebuild death counts from q_x and write the years × ages grid.
    Ingest(CommonArgs),
    /// Stationarity and residual-independence diagnostics.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Fit a model and write its summary and fitted matrices.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Bootstrap forecasts with pointwise prediction intervals.
    Forecast {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Forecast horizons 1..=H.
        #[arg(long)]
        horizon_max: Option<usize>,
        /// Also write every bootstrap sample (age × B) per horizon.
        #[arg(long)]
        dump_samples: bool,
    },
    /// Expanding-window coverage backtest.
    Backtest {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Years in the first fitting window (default 80)
        #[arg(long)]
        initial_window: Option<usize>,
        /// Longest horizon evaluated (default 20)
        #[arg(long)]
        max_horizon: Option<usize>,
    },
    /// One Gini coefficient per year.
    Gini(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Life-table file (whitespace-columnar with a Year/Age/qx header, or CSV).
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Generated fixture instead of a file: YEARS or YEARS:SEED.
    #[arg(long)]
    synthetic: Option<String>,
    /// female, male or total (default female)
    #[arg(long)]
    sex: Option<Sex>,
    /// Output directory (default coda-dfm-out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start from a previously written run_config.toml; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master RNG seed (default 1)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// dfm or lc.
    #[arg(long)]
    model: Option<ModelKind>,
    /// one, six, or an integer.
    #[arg(long)]
    components: Option<ComponentPolicy>,
    /// Score forecaster: rwd, ar or ets.
    #[arg(long)]
    method: Option<ForecastMethod>,
    /// Bootstrap replications B (default 1000)
    #[arg(long)]
    replications: Option<usize>,
    /// Nominal coverages, as fractions or percentages (80,95).
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Kernel bandwidth for the long-run covariance estimates.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Run the second DFM stage regardless of the independence test.
    #[arg(long)]
    force_second_stage: bool,
    /// Resample whole residual rows in the Lee–Carter bootstrap.
    #[arg(long)]
    rows: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dfm,
    Lc,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfm" => Ok(ModelKind::Dfm),
            "lc" => Ok(ModelKind::Lc),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub synthetic: Option<String>,
    pub sex: Sex,
    pub out: PathBuf,
    pub seed: u64,
    pub model: ModelKind,
    pub components: Option<ComponentPolicy>,
    pub method: Option<ForecastMethod>,
    pub replications: usize,
    pub levels: Vec<f64>,
    pub bandwidth: Option<f64>,
    pub force_second_stage: bool,
    pub rows: bool,
    pub horizon_max: usize,
    pub dump_samples: bool,
    pub initial_window: usize,
    pub max_horizon: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            input: None,
            synthetic: None,
            sex: Sex::Female,
            out: PathBuf::from("coda-dfm-out"),
            seed: 1,
            model: ModelKind::Dfm,
            components: None,
            method: None,
            replications: 1000,
            levels: vec![0.8, 0.95],
            bandwidth: None,
            force_second_stage: false,
            rows: false,
            horizon_max: 20,
            dump_samples: false,
            initial_window: 80,
            max_horizon: 20,
        }
    }
}

impl RunConfig {
    /// Component policy after model defaults: six for the DFM, one for
    /// Lee–Carter.
    pub fn component_policy(&self) -> ComponentPolicy {
        self.components.unwrap_or(match self.model {
            ModelKind::Dfm => ComponentPolicy::FixedSix,
            ModelKind::Lc => ComponentPolicy::FixedOne,
        })
    }

    pub fn score_method(&self) -> ForecastMethod {
        self.method.unwrap_or(match self.model {
            ModelKind::Dfm => ForecastMethod::RandomWalkDrift,
            ModelKind::Lc => ForecastMethod::EtsLike,
        })
    }

    fn resolve_defaults(&mut self) {
        self.components = Some(self.component_policy());
        self.method = Some(self.score_method());
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        validate_levels(&self.levels)?;
        let counts = component_counts(self.component_policy())?;
        Ok(match self.model {
            ModelKind::Dfm => {
                let mut fit = DfmConfig::new(counts.r, counts.residual_components);
                fit.bandwidth = self.bandwidth;
                fit.force_second_stage = self.force_second_stage;
                ModelSpec::Dfm {
                    fit,
                    bootstrap: BootstrapConfig {
                        replications: self.replications,
                        levels: self.levels.clone(),
                        radix: DEFAULT_RADIX,
                        primary_method: self.score_method(),
                        ..BootstrapConfig::default()
                    },
                }
            }
            ModelKind::Lc => ModelSpec::Lc {
                components: counts.r,
                bootstrap: LcConfig {
                    replications: self.replications,
                    levels: self.levels.clone(),
                    radix: DEFAULT_RADIX,
                    resampling: if self.rows { Resampling::Rows } else { Resampling::Entries },
                    method: self.score_method(),
                },
            },
        })
    }
}

fn normalize_levels(levels: Vec<f64>) -> Vec<f64> {
    levels
        .into_iter()
        .map(|l| if l > 1.0 { l / 100.0 } else { l })
        .collect()
}

fn apply_common(cfg: &mut RunConfig, a: &CommonArgs) {
    if let Some(p) = &a.input {
        cfg.input = Some(p.clone());
        cfg.synthetic = None;
    }
    if let Some(s) = &a.synthetic {
        cfg.synthetic = Some(s.clone());
        cfg.input = None;
    }
    if let Some(s) = a.sex {
        cfg.sex = s;
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
}

fn apply_model(cfg: &mut RunConfig, a: &ModelArgs) {
    if let Some(m) = a.model {
        if m != cfg.model {
            cfg.components = None;
            cfg.method = None;
        }
        cfg.model = m;
    }
    if a.components.is_some() {
        cfg.components = a.components;
    }
    if a.method.is_some() {
        cfg.method = a.method;
    }
    if let Some(b) = a.replications {
        cfg.replications = b;
    }
    if let Some(l) = &a.levels {
        cfg.levels = normalize_levels(l.clone());
    }
    if a.bandwidth.is_some() {
        cfg.bandwidth = a.bandwidth;
    }
    cfg.force_second_stage |= a.force_second_stage;
    cfg.rows |= a.rows;
}

fn load_config(path: &Path, command: &str) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if !cfg.command.is_empty() && cfg.command != command {
        return Err(Error::Config(format!(
            "{} was written by '{}', not '{command}'",
            path.display(),
            cfg.command
        )));
    }
    Ok(cfg)
}

fn base_config(common: &CommonArgs, command: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p, command)?,
        None => RunConfig::default(),
    };
    cfg.command = command.to_string();
    apply_common(&mut cfg, common);
    Ok(cfg)
}

pub fn load_grid(cfg: &RunConfig) -> Result<LifeTableGrid> {
    match (&cfg.input, &cfg.synthetic) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let rows = parse_lifetable(BufReader::new(file), cfg.sex)?;
            rebuild_deaths(&rows, DEFAULT_RADIX)
        }
        (None, Some(spec)) => {
            let (years, seed) = parse_synthetic(spec)?;
            synth_fixture(years, seed)
        }
        (None, None) => Err(Error::Config("one of --input or --synthetic is required".into())),
    }
}

fn parse_synthetic(spec: &str) -> Result<(usize, u64)> {
    let bad = || Error::Config(format!("--synthetic expects YEARS or YEARS:SEED, got '{spec}'"));
    let mut parts = spec.splitn(2, ':');
    let years = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let seed = match parts.next() {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => 1,
    };
    Ok((years, seed))
}

/// Percent label used in column and file names: 0.8 → "80", 0.975 → "97.5".
pub fn level_label(level: f64) -> String {
    let pct = (level * 1e6).round() / 1e4;
    format!("{pct}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn matrix_csv(row_labels: &[String], header: &str, m: &DMatrix<f64>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for (i, label) in row_labels.iter().enumerate() {
        s.push_str(label);
        for v in m.row(i).iter() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

fn age_header(first: &str, ages: &[u32]) -> String {
    let mut h = first.to_string();
    for a in ages {
        let _ = write!(h, ",{a}");
    }
    h
}

fn basis_csv(ages: &[u32], functions: &DMatrix<f64>, prefix: &str) -> String {
    let mut s = String::from("age");
    for k in 0..functions.ncols() {
        let _ = write!(s, ",{prefix}{}", k + 1);
    }
    s.push('\n');
    for (u, age) in ages.iter().enumerate() {
        s.push_str(&age.to_string());
        for v in functions.row(u).iter() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

fn vector_csv(ages: &[u32], name: &str, v: &DVector<f64>) -> String {
    let mut s = format!("age,{name}\n");
    for (a, x) in ages.iter().zip(v.iter()) {
        let _ = writeln!(s, "{a},{x}");
    }
    s
}

fn year_labels(years: &[i32]) -> Vec<String> {
    years.iter().map(|y| y.to_string()).collect()
}

fn decision(rejects: bool) -> &'static str {
    if rejects {
        "reject"
    } else {
        "accept"
    }
}

fn cmd_ingest(cfg: &RunConfig) -> Result<()> {
    let grid = load_grid(cfg)?;
    let mut s = age_header("year", &grid.ages);
    s.push('\n');
    for (t, year) in grid.years.iter().enumerate() {
        s.push_str(&year.to_string());
        for v in grid.deaths.row(t).iter() {
            let _ = write!(s, ",{v:.6}");
        }
        s.push('\n');
    }
    write_file(&cfg.out, "grid.csv", &s)
}

fn cmd_gini(cfg: &RunConfig) -> Result<()> {
    let grid = load_grid(cfg)?;
    let mut s = String::from("year,gini\n");
    for (year, g) in gini_series(&grid)? {
        let _ = writeln!(s, "{year},{g}");
    }
    write_file(&cfg.out, "gini.csv", &s)
}

fn cmd_diagnose(cfg: &RunConfig) -> Result<()> {
    let grid = load_grid(cfg)?;
    let series = clr(&grid)?;
    let q = &series.quadrature;
    let levels = kpss_test(&series.values, q, cfg.replications, cfg.seed)?;
    let diffs = kpss_test(&difference(&series.values)?, q, cfg.replications, cfg.seed)?;

    let counts = component_counts(cfg.component_policy())?;
    let mut dfm = DfmConfig::new(counts.r, 0);
    dfm.bandwidth = cfg.bandwidth;
    let fit = fit_dfm(&series, &dfm)?;
    let indep = independence_test(&fit.stage_one_residuals(), q, dfm.lag_count, dfm.projection_dim)?;

    let mut s = String::from("test,statistic,p_value,decision\n");
    let _ = writeln!(s, "kpss_levels,{},{},{}", levels.statistic, levels.p_value, decision(levels.p_value < SIGNIFICANCE));
    let _ = writeln!(s, "kpss_differences,{},{},{}", diffs.statistic, diffs.p_value, decision(diffs.p_value < SIGNIFICANCE));
    let indep_decision = if indep.degenerate {
        "degenerate"
    } else {
        decision(indep.rejects(SIGNIFICANCE))
    };
    let _ = writeln!(s, "independence_residuals,{},{},{}", indep.statistic, indep.p_value, indep_decision);
    write_file(&cfg.out, "diagnostics.csv", &s)
}

fn cmd_fit(cfg: &RunConfig) -> Result<()> {
    let grid = load_grid(cfg)?;
    let series = clr(&grid)?;
    let bundle = cfg.out.join("fit");
    fs::create_dir_all(&bundle).map_err(|e| Error::io(&bundle, e))?;
    let years = year_labels(&series.years);
    match cfg.model_spec()? {
        ModelSpec::Dfm { fit: dfm, .. } => {
            let fit = fit_dfm(&series, &dfm)?;
            let mut s = String::from("stage,component,eigenvalue,variance_explained\n");
            for (stage, basis, total) in [
                ("primary", &fit.primary_basis, fit.primary_total_variance),
                ("residual", &fit.residual_basis, fit.residual_total_variance),
            ] {
                for (k, (l, v)) in basis.eigenvalues.iter().zip(basis.variance_explained(total)).enumerate() {
                    let _ = writeln!(s, "{stage},{},{l},{v}", k + 1);
                }
            }
            write_file(&cfg.out, "fit_summary.csv", &s)?;

            let i = &fit.independence;
            let mut s = String::from("statistic,p_value,degrees_of_freedom,degenerate,second_stage\n");
            let _ = writeln!(s, "{},{},{},{},{}", i.statistic, i.p_value, i.degrees_of_freedom, i.degenerate, fit.second_stage);
            write_file(&cfg.out, "independence.csv", &s)?;

            write_file(&bundle, "mean_curve.csv", &vector_csv(&fit.ages, "mean", &fit.mean_curve))?;
            write_file(&bundle, "primary_basis.csv", &basis_csv(&fit.ages, &fit.primary_basis.functions, "k"))?;
            write_file(&bundle, "residual_basis.csv", &basis_csv(&fit.ages, &fit.residual_basis.functions, "w"))?;
            let score_header = |prefix: &str, k: usize| {
                let mut h = String::from("year");
                for j in 0..k {
                    let _ = write!(h, ",{prefix}{}", j + 1);
                }
                h
            };
            write_file(&bundle, "primary_scores.csv", &matrix_csv(&years, &score_header("k", fit.primary_scores.ncols()), &fit.primary_scores))?;
            write_file(&bundle, "residual_scores.csv", &matrix_csv(&years, &score_header("w", fit.residual_scores.ncols()), &fit.residual_scores))?;
            write_file(&bundle, "final_residuals.csv", &matrix_csv(&years, &age_header("year", &fit.ages), &fit.final_residuals))
        }
        ModelSpec::Lc { components, .. } => {
            let fit = fit_lc(&series, components)?;
            let energy: f64 = fit.singular_values.iter().map(|s| s * s).sum();
            let mut s = String::from("component,singular_value,variance_explained\n");
            for (k, sv) in fit.singular_values.iter().take(components).enumerate() {
                let share = if energy > 0.0 { sv * sv / energy } else { 0.0 };
                let _ = writeln!(s, "{},{sv},{share}", k + 1);
            }
            write_file(&cfg.out, "fit_summary.csv", &s)?;
            write_file(&bundle, "mean_curve.csv", &vector_csv(&fit.ages, "mean", &fit.mean_curve))?;
            write_file(&bundle, "components.csv", &basis_csv(&fit.ages, &fit.components, "k"))?;
            let mut header = String::from("year");
            for j in 0..components {
                let _ = write!(header, ",k{}", j + 1);
            }
            write_file(&bundle, "scores.csv", &matrix_csv(&years, &header, &fit.scores))?;
            write_file(&bundle, "residuals.csv", &matrix_csv(&years, &age_header("year", &fit.ages), &fit.residuals))
        }
    }
}

fn cmd_forecast(cfg: &RunConfig) -> Result<()> {
    if cfg.horizon_max == 0 {
        return Err(Error::Config("--horizon-max must be at least 1".into()));
    }
    let grid = load_grid(cfg)?;
    let series = clr(&grid)?;
    let spec = cfg.model_spec()?;
    let forecasts = spec.forecast(&series, cfg.horizon_max, cfg.seed)?;
    for fc in &forecasts {
        let mut s = String::from("age,point");
        for band in &fc.bands {
            let l = level_label(band.level);
            let _ = write!(s, ",lower_{l},upper_{l}");
        }
        s.push('\n');
        for (u, age) in grid.ages.iter().enumerate() {
            let _ = write!(s, "{age},{}", fc.point[u]);
            for band in &fc.bands {
                let _ = write!(s, ",{},{}", band.lower[u], band.upper[u]);
            }
            s.push('\n');
        }
        write_file(&cfg.out, &format!("forecast_h{:02}.csv", fc.horizon), &s)?;

        if cfg.dump_samples {
            let mut s = String::from("age");
            for b in 0..fc.replications() {
                let _ = write!(s, ",b{}", b + 1);
            }
            s.push('\n');
            for (u, age) in grid.ages.iter().enumerate() {
                s.push_str(&age.to_string());
                for v in fc.samples.column(u).iter() {
                    let _ = write!(s, ",{v}");
                }
                s.push('\n');
            }
            write_file(&cfg.out, &format!("samples_h{:02}.csv", fc.horizon), &s)?;
        }
    }
    Ok(())
}

fn cmd_backtest(cfg: &RunConfig) -> Result<()> {
    let grid = load_grid(cfg)?;
    let spec = cfg.model_spec()?;
    let label = spec.name().to_string();
    let plan = BacktestPlan {
        initial_window: cfg.initial_window,
        max_horizon: cfg.max_horizon,
        models: vec![LabeledModel {
            label: label.clone(),
            spec,
        }],
        unbounded_intervals: false,
    };
    let report = run_backtest(&grid, &plan, cfg.seed)?;
    for &level in &cfg.levels {
        let mut s = String::from("h,origins,ecp,cpd\n");
        for m in report.horizons.iter().filter(|m| m.level == level) {
            let _ = writeln!(s, "{},{},{},{}", m.horizon, m.origins, m.ecp, m.cpd);
        }
        write_file(&cfg.out, &format!("horizons_{label}_{}.csv", level_label(level)), &s)?;
    }
    let mut s = String::from("method,components,level,sex,ecp_bar,cpd_bar\n");
    for row in &report.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.model,
            cfg.component_policy(),
            level_label(row.level),
            cfg.sex.as_str(),
            row.ecp_bar,
            row.cpd_bar
        );
    }
    write_file(&cfg.out, "summary.csv", &s)
}

fn execute(cli: Cli) -> Result<()> {
    let (mut cfg, threads) = match &cli.command {
        Command::Ingest(c) => (base_config(c, "ingest")?, c.threads),
        Command::Gini(c) => (base_config(c, "gini")?, c.threads),
        Command::Diagnose { common, model } => {
            let mut cfg = base_config(common, "diagnose")?;
            apply_model(&mut cfg, model);
            (cfg, common.threads)
        }
        Command::Fit { common, model } => {
            let mut cfg = base_config(common, "fit")?;
            apply_model(&mut cfg, model);
            (cfg, common.threads)
        }
        Command::Forecast {
            common,
            model,
            horizon_max,
            dump_samples,
        } => {
            let mut cfg = base_config(common, "forecast")?;
            apply_model(&mut cfg, model);
            if let Some(h) = horizon_max {
                cfg.horizon_max = *h;
            }
            cfg.dump_samples |= dump_samples;
            (cfg, common.threads)
        }
        Command::Backtest {
            common,
            model,
            initial_window,
            max_horizon,
        } => {
            let mut cfg = base_config(common, "backtest")?;
            apply_model(&mut cfg, model);
            if let Some(w) = initial_window {
                cfg.initial_window = *w;
            }
            if let Some(h) = max_horizon {
                cfg.max_horizon = *h;
            }
            (cfg, common.threads)
        }
    };
    cfg.resolve_defaults();

    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let run = |cfg: &RunConfig| -> Result<()> {
        match cfg.command.as_str() {
            "ingest" => cmd_ingest(cfg),
            "gini" => cmd_gini(cfg),
            "diagnose" => cmd_diagnose(cfg),
            "fit" => cmd_fit(cfg),
            "forecast" => cmd_forecast(cfg),
            _ => cmd_backtest(cfg),
        }
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run(&cfg))?;
        }
        None => run(&cfg)?,
    }
    let toml = toml::to_string(&cfg).map_err(|e| Error::Config(format!("serializing run config: {e}")))?;
    write_file(&cfg.out, CONFIG_FILE, &toml)
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: kind={} {}", e.kind(), e);
            1
        }
    }
}
