//! Two-stage dynamic factor model for a nonstationary curve series.
//!
//! Stage one extracts `r` eigenfunctions from the long-run covariance of the
//! differenced series and projects the centered original series on them.
//! Stage two runs on what is left: if those residual curves still show serial
//! dependence (or the caller forces it), a second set of eigenfunctions is
//! taken from their own long-run covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coda::ClrSeries;
use crate::error::{Error, Result};
use crate::fts::{
    column_means, difference, expand_scores, fpca, independence_test, long_run_covariance,
    plugin_bandwidth, project_scores, EigenBasis, IndependenceResult, DEFAULT_LAG_COUNT,
    DEFAULT_PROJECTION_DIM,
};

pub const MIN_YEARS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentPolicy {
    FixedOne,
    FixedSix,
    Explicit(usize),
}

impl std::str::FromStr for ComponentPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(ComponentPolicy::FixedOne),
            "six" => Ok(ComponentPolicy::FixedSix),
            other => other
                .parse::<usize>()
                .map(ComponentPolicy::Explicit)
                .map_err(|_| Error::Config(format!("components must be one, six or an integer, got '{other}'"))),
        }
    }
}

impl std::fmt::Display for ComponentPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComponentPolicy::FixedOne => f.write_str("one"),
            ComponentPolicy::FixedSix => f.write_str("six"),
            ComponentPolicy::Explicit(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentCounts {
    pub r: usize,
    pub residual_components: usize,
}

/// Primary and residual component counts; both conventions use the same
/// number for each stage.
pub fn component_counts(policy: ComponentPolicy) -> Result<ComponentCounts> {
    let k = match policy {
        ComponentPolicy::FixedOne => 1,
        ComponentPolicy::FixedSix => 6,
        ComponentPolicy::Explicit(0) => {
            return Err(Error::Domain(
                "at least one primary component is required".into(),
            ))
        }
        ComponentPolicy::Explicit(k) => k,
    };
    Ok(ComponentCounts {
        r: k,
        residual_components: k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfmConfig {
    pub r: usize,
    pub residual_components: usize,
    /// Kernel bandwidth for both long-run covariance estimates; the `m^{1/3}`
    /// rule when absent.
    pub bandwidth: Option<f64>,
    /// Run stage two even when the residual curves pass the independence test.
    pub force_second_stage: bool,
    pub lag_count: usize,
    pub projection_dim: usize,
    pub significance: f64,
}

impl DfmConfig {
    pub fn new(r: usize, residual_components: usize) -> Self {
        Self {
            r,
            residual_components,
            bandwidth: None,
            force_second_stage: false,
            lag_count: DEFAULT_LAG_COUNT,
            projection_dim: DEFAULT_PROJECTION_DIM,
            significance: 0.05,
        }
    }

    pub fn from_policy(policy: ComponentPolicy) -> Result<Self> {
        let c = component_counts(policy)?;
        Ok(Self::new(c.r, c.residual_components))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfmFit {
    pub years: Vec<i32>,
    pub ages: Vec<u32>,
    pub mean_curve: DVector<f64>,
    pub primary_basis: EigenBasis,
    /// `n × r`
    pub primary_scores: DMatrix<f64>,
    pub residual_basis: EigenBasis,
    /// `n × (N̂ − r)`
    pub residual_scores: DMatrix<f64>,
    pub final_residuals: DMatrix<f64>,
    pub r: usize,
    pub n_hat: usize,
    pub independence: IndependenceResult,
    pub second_stage: bool,
    pub primary_bandwidth: f64,
    pub residual_bandwidth: Option<f64>,
    /// `∫ Ĉ(u, u) du` of each stage's long-run covariance.
    pub primary_total_variance: f64,
    pub residual_total_variance: f64,
}

impl DfmFit {
    pub fn n_years(&self) -> usize {
        self.primary_scores.nrows()
    }

    pub fn n_ages(&self) -> usize {
        self.mean_curve.len()
    }

    /// The stage-one residual curves `Z_t`.
    pub fn stage_one_residuals(&self) -> DMatrix<f64> {
        expand_scores(&self.residual_scores, &self.residual_basis) + &self.final_residuals
    }

    /// `X̄ + Σ β_k ζ_k + Σ β_ω ζ_ω + Y` for every year.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut out = expand_scores(&self.primary_scores, &self.primary_basis)
            + expand_scores(&self.residual_scores, &self.residual_basis)
            + &self.final_residuals;
        for mut row in out.row_iter_mut() {
            row += self.mean_curve.transpose();
        }
        out
    }
}

pub fn fit_dfm(series: &ClrSeries, config: &DfmConfig) -> Result<DfmFit> {
    let n = series.len();
    let d = series.n_ages();
    if n < MIN_YEARS {
        return Err(Error::InsufficientData {
            what: "dynamic factor model",
            needed: MIN_YEARS,
            got: n,
        });
    }
    if config.r == 0 {
        return Err(Error::Domain("at least one primary component is required".into()));
    }
    if config.r + config.residual_components > d {
        return Err(Error::Rank {
            requested: config.r + config.residual_components,
            available: d,
        });
    }
    if let Some(h) = config.bandwidth {
        if !(h > 0.0) {
            return Err(Error::Config(format!("bandwidth must be positive, got {h}")));
        }
    }
    let quadrature = &series.quadrature;
    let x = &series.values;

    // Stage one: long-run covariance of the differenced series.
    let diffs = difference(x)?;
    let primary_bandwidth = match config.bandwidth {
        Some(h) => h,
        None => plugin_bandwidth(&diffs)?,
    };
    let lrc = long_run_covariance(&diffs, quadrature, primary_bandwidth)?;
    let primary_total_variance = quadrature.integrate(lrc.values.diagonal().as_slice());
    let primary_basis = fpca(&lrc, config.r)?;

    let mean_curve = column_means(x);
    let primary_scores = project_scores(x, &primary_basis, &mean_curve)?;
    let mut residuals = crate::fts::center_rows(x, &mean_curve);
    residuals -= expand_scores(&primary_scores, &primary_basis);

    let independence = independence_test(
        &residuals,
        quadrature,
        config.lag_count,
        config.projection_dim,
    )?;
    let dependent = independence.rejects(config.significance);
    let second_stage = config.residual_components > 0
        && !independence.degenerate
        && (dependent || config.force_second_stage);

    let (residual_basis, residual_scores, residual_bandwidth, residual_total_variance) =
        if second_stage {
            let h = match config.bandwidth {
                Some(h) => h,
                None => plugin_bandwidth(&residuals)?,
            };
            let lrc_z = long_run_covariance(&residuals, quadrature, h)?;
            let total = quadrature.integrate(lrc_z.values.diagonal().as_slice());
            let basis = fpca(&lrc_z, config.residual_components)?;
            let scores = project_scores(&residuals, &basis, &DVector::zeros(d))?;
            (basis, scores, Some(h), total)
        } else {
            (
                EigenBasis::empty(quadrature.clone()),
                DMatrix::zeros(n, 0),
                None,
                0.0,
            )
        };
    let final_residuals = &residuals - expand_scores(&residual_scores, &residual_basis);

    Ok(DfmFit {
        years: series.years.clone(),
        ages: series.ages.clone(),
        mean_curve,
        r: config.r,
        n_hat: config.r + residual_basis.len(),
        primary_basis,
        primary_scores,
        residual_basis,
        residual_scores,
        final_residuals,
        independence,
        second_stage,
        primary_bandwidth,
        residual_bandwidth,
        primary_total_variance,
        residual_total_variance,
    })
}
