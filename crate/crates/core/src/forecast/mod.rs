//! Score forecasting, bootstrap of forecast errors and residual curves, and
//! pointwise prediction intervals for the dynamic factor model.

mod forecaster;

pub use forecaster::{
    build_error_pool, build_error_pools, forecast_scores, ErrorPool, FittedForecaster,
    ForecastMethod, MAX_AR_ORDER, MIN_SERIES_LEN,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coda::inverse_clr;
use crate::dfm::DfmFit;
use crate::error::{Error, Result};
use crate::lifetable::DEFAULT_RADIX;
use crate::rng::stream_rng;

pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const DEFAULT_LEVELS: [f64; 2] = [0.80, 0.95];

/// Linear interpolation between order statistics of an ascending sample.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn validate_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Config("at least one nominal level is required".into()));
    }
    for &l in levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::Config(format!("nominal level {l} is not in (0, 1)")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub level: f64,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

/// Pointwise bands from the `α/2` and `1 − α/2` quantiles of each column.
pub fn pointwise_bands(samples: &DMatrix<f64>, levels: &[f64]) -> Vec<Band> {
    let d = samples.ncols();
    let mut bands: Vec<Band> = levels
        .iter()
        .map(|&level| Band {
            level,
            lower: DVector::zeros(d),
            upper: DVector::zeros(d),
        })
        .collect();
    let mut column = Vec::with_capacity(samples.nrows());
    for u in 0..d {
        column.clear();
        column.extend(samples.column(u).iter().copied());
        column.sort_by(f64::total_cmp);
        for band in &mut bands {
            let alpha = 1.0 - band.level;
            band.lower[u] = quantile_type7(&column, alpha / 2.0);
            band.upper[u] = quantile_type7(&column, 1.0 - alpha / 2.0);
        }
    }
    bands
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapForecast {
    pub horizon: usize,
    /// `B × D` back-transformed death-count curves.
    pub samples: DMatrix<f64>,
    /// Back-transform of the central forecast curve.
    pub point: DVector<f64>,
    pub bands: Vec<Band>,
    pub rng_seed: u64,
}

impl BootstrapForecast {
    pub fn from_samples(
        horizon: usize,
        samples: DMatrix<f64>,
        point: DVector<f64>,
        levels: &[f64],
        rng_seed: u64,
    ) -> Self {
        let bands = pointwise_bands(&samples, levels);
        Self {
            horizon,
            samples,
            point,
            bands,
            rng_seed,
        }
    }

    pub fn replications(&self) -> usize {
        self.samples.nrows()
    }

    pub fn band(&self, level: f64) -> Option<&Band> {
        self.bands.iter().find(|b| (b.level - level).abs() < 1e-12)
    }
}

fn check_replications(replications: usize) -> Result<()> {
    if replications == 0 {
        Err(Error::Config("replications must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `central + e*` with `e*` drawn uniformly from the pool; draw `b` uses
/// stream `b` of the generator keyed by `seed`.
pub fn bootstrap_scores(central: f64, pool: &[f64], replications: usize, seed: u64) -> Result<Vec<f64>> {
    if pool.is_empty() {
        return Err(Error::Pool("empty forecast-error pool".into()));
    }
    check_replications(replications)?;
    Ok((0..replications)
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            central + pool[rng.gen_range(0..pool.len())]
        })
        .collect())
}

/// Whole-curve resampling of residual rows.
pub fn bootstrap_residual_curves(
    residuals: &DMatrix<f64>,
    replications: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if residuals.nrows() == 0 {
        return Err(Error::Pool("no residual curves to resample".into()));
    }
    check_replications(replications)?;
    let mut out = DMatrix::zeros(replications, residuals.ncols());
    for b in 0..replications {
        let mut rng = stream_rng(seed, b as u64);
        let row = rng.gen_range(0..residuals.nrows());
        out.row_mut(b).copy_from(&residuals.row(row));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub levels: Vec<f64>,
    pub radix: f64,
    pub primary_method: ForecastMethod,
    pub residual_method: ForecastMethod,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            levels: DEFAULT_LEVELS.to_vec(),
            radix: DEFAULT_RADIX,
            primary_method: ForecastMethod::RandomWalkDrift,
            residual_method: ForecastMethod::ArAic,
        }
    }
}

#[derive(Debug, Clone)]
struct ComponentPaths {
    /// `central[h − 1]`
    central: Vec<f64>,
    /// `pools[h − 1]`
    pools: Vec<ErrorPool>,
}

impl ComponentPaths {
    fn build(series: &[f64], method: ForecastMethod, max_horizon: usize) -> Result<Self> {
        Ok(Self {
            central: forecast_scores(series, method, max_horizon)?,
            pools: build_error_pools(series, method, max_horizon)?,
        })
    }
}

/// Central forecasts and error pools for every score series of a fit,
/// computed once for horizons `1..=max_horizon`.
#[derive(Debug, Clone)]
pub struct DfmForecaster<'a> {
    fit: &'a DfmFit,
    config: BootstrapConfig,
    max_horizon: usize,
    primary: Vec<ComponentPaths>,
    residual: Vec<ComponentPaths>,
}

impl<'a> DfmForecaster<'a> {
    pub fn new(fit: &'a DfmFit, config: &BootstrapConfig, max_horizon: usize) -> Result<Self> {
        if max_horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        check_replications(config.replications)?;
        validate_levels(&config.levels)?;
        let columns = |m: &DMatrix<f64>, method| -> Result<Vec<ComponentPaths>> {
            m.column_iter()
                .map(|c| ComponentPaths::build(c.as_slice(), method, max_horizon))
                .collect()
        };
        Ok(Self {
            fit,
            config: config.clone(),
            max_horizon,
            primary: columns(&fit.primary_scores, config.primary_method)?,
            residual: columns(&fit.residual_scores, config.residual_method)?,
        })
    }

    pub fn max_horizon(&self) -> usize {
        self.max_horizon
    }

    /// Central curve `X̄ + Σ β̂_{n+h|n,k} ζ̂_k + Σ β̂_{n+h|n,ω} ζ̂_ω`.
    pub fn central_curve(&self, horizon: usize) -> DVector<f64> {
        let i = horizon - 1;
        let mut curve = self.fit.mean_curve.clone();
        for (k, c) in self.primary.iter().enumerate() {
            curve.axpy(c.central[i], &self.fit.primary_basis.function(k), 1.0);
        }
        for (w, c) in self.residual.iter().enumerate() {
            curve.axpy(c.central[i], &self.fit.residual_basis.function(w), 1.0);
        }
        curve
    }

    /// Bootstrap forecast at one horizon.
    ///
    /// Replicate `b` draws from stream `b` of the generator keyed by `seed`,
    /// in the order: one error per primary component, one error per residual
    /// component, then one residual-curve row.
    pub fn forecast(&self, horizon: usize, seed: u64) -> Result<BootstrapForecast> {
        if horizon == 0 || horizon > self.max_horizon {
            return Err(Error::Config(format!(
                "horizon {horizon} outside 1..={}",
                self.max_horizon
            )));
        }
        let i = horizon - 1;
        let fit = self.fit;
        let radix = self.config.radix;
        let central = self.central_curve(horizon);
        let primary_fns: Vec<DVector<f64>> =
            (0..fit.primary_basis.len()).map(|k| fit.primary_basis.function(k)).collect();
        let residual_fns: Vec<DVector<f64>> =
            (0..fit.residual_basis.len()).map(|k| fit.residual_basis.function(k)).collect();
        let residuals = &fit.final_residuals;

        let b_total = self.config.replications;
        let mut samples = DMatrix::zeros(b_total, fit.n_ages());
        for b in 0..b_total {
            let mut rng = stream_rng(seed, b as u64);
            let mut curve = central.clone();
            for (paths, f) in self.primary.iter().zip(&primary_fns) {
                let pool = &paths.pools[i].errors;
                curve.axpy(pool[rng.gen_range(0..pool.len())], f, 1.0);
            }
            for (paths, f) in self.residual.iter().zip(&residual_fns) {
                let pool = &paths.pools[i].errors;
                curve.axpy(pool[rng.gen_range(0..pool.len())], f, 1.0);
            }
            let row = rng.gen_range(0..residuals.nrows());
            curve += residuals.row(row).transpose();
            let counts = inverse_clr(curve.as_slice(), radix)?;
            samples.row_mut(b).copy_from_slice(&counts);
        }
        let point = DVector::from_vec(inverse_clr(central.as_slice(), radix)?);
        Ok(BootstrapForecast::from_samples(
            horizon,
            samples,
            point,
            &self.config.levels,
            seed,
        ))
    }
}

pub fn assemble_forecast(
    fit: &DfmFit,
    config: &BootstrapConfig,
    horizon: usize,
    seed: u64,
) -> Result<BootstrapForecast> {
    DfmForecaster::new(fit, config, horizon)?.forecast(horizon, seed)
}
