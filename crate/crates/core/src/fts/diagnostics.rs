//! Stationarity and independence diagnostics for curve sequences.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::covariance::{
    bandwidth_rule, center_rows, column_means, long_run_covariance_raw, long_run_variance_diagonal,
    bartlett_weight,
};
use super::covariance::CovSurface;
use super::fpca::{fpca, project_scores};
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::rng::seeded_rng;

/// Below this total variance a residual sequence is treated as identically zero.
pub const DEGENERATE_VARIANCE: f64 = 1e-20;

pub const DEFAULT_LAG_COUNT: usize = 5;
pub const DEFAULT_PROJECTION_DIM: usize = 3;

/// Residuals of a pointwise regression of every column on `(1, t)`.
fn detrend(values: &DMatrix<f64>) -> DMatrix<f64> {
    let n = values.nrows();
    let t_mean = (n as f64 - 1.0) / 2.0;
    let stt: f64 = (0..n).map(|t| (t as f64 - t_mean).powi(2)).sum();
    let mut out = values.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        let slope = (0..n)
            .map(|t| (t as f64 - t_mean) * (col[t] - mean))
            .sum::<f64>()
            / stt;
        for t in 0..n {
            col[t] -= mean + slope * (t as f64 - t_mean);
        }
    }
    out
}

fn kpss_from_residuals(resid: &DMatrix<f64>, quadrature: &Quadrature) -> f64 {
    let n = resid.nrows();
    let mut partial = DVector::<f64>::zeros(resid.ncols());
    let mut numer = 0.0;
    for row in resid.row_iter() {
        partial += row.transpose();
        numer += quadrature.inner(partial.as_slice(), partial.as_slice());
    }
    numer /= (n * n) as f64;
    let lrv = long_run_variance_diagonal(resid, bandwidth_rule(n));
    let denom = quadrature.integrate(lrv.as_slice());
    if denom <= DEGENERATE_VARIANCE {
        0.0
    } else {
        numer / denom
    }
}

/// KPSS-type statistic for trend stationarity of a curve sequence.
///
/// Each age is detrended by least squares on `(1, t)`; the statistic is the
/// integrated squared partial-sum process scaled by `n²`, divided by the
/// integrated Bartlett long-run variance. Large values point to a unit root.
pub fn functional_kpss_statistic(values: &DMatrix<f64>, quadrature: &Quadrature) -> Result<f64> {
    let n = values.nrows();
    if n < 10 {
        return Err(Error::InsufficientData {
            what: "KPSS statistic",
            needed: 10,
            got: n,
        });
    }
    if values.ncols() != quadrature.len() {
        return Err(Error::Shape("series and quadrature differ in length".into()));
    }
    Ok(kpss_from_residuals(&detrend(values), quadrature))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpssResult {
    pub statistic: f64,
    /// Monte Carlo p-value against i.i.d. Gaussian curves sharing the
    /// detrended series' long-run covariance.
    pub p_value: f64,
    pub replications: usize,
}

/// KPSS statistic plus a simulated reference distribution.
pub fn kpss_test(
    values: &DMatrix<f64>,
    quadrature: &Quadrature,
    replications: usize,
    seed: u64,
) -> Result<KpssResult> {
    let statistic = functional_kpss_statistic(values, quadrature)?;
    let n = values.nrows();
    let d = values.ncols();
    let resid = detrend(values);
    let cov = long_run_covariance_raw(&resid, bandwidth_rule(n), bartlett_weight)?;
    let eig = SymmetricEigen::new(cov);
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));

    let mut rng = seeded_rng(seed);
    let mut exceed = 0usize;
    for _ in 0..replications {
        let z = DMatrix::<f64>::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        let sim = z * root.transpose();
        if functional_kpss_statistic(&sim, quadrature)? >= statistic {
            exceed += 1;
        }
    }
    Ok(KpssResult {
        statistic,
        p_value: (exceed + 1) as f64 / (replications + 1) as f64,
        replications,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceResult {
    pub statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: usize,
    /// Set when the residuals carry no variance; statistic 0 and p-value 1.
    pub degenerate: bool,
}

impl IndependenceResult {
    fn degenerate() -> Self {
        Self {
            statistic: 0.0,
            p_value: 1.0,
            degrees_of_freedom: 0,
            degenerate: true,
        }
    }

    pub fn rejects(&self, level: f64) -> bool {
        !self.degenerate && self.p_value < level
    }
}

/// Portmanteau test of serial independence for a curve sequence.
///
/// Curves are projected on their leading `projection_dim` principal
/// components; with `C_h` the lag-h autocovariance of the score vectors,
/// `Q = N Σ_{h=1}^{H} tr(C_hᵀ C_0⁻¹ C_h C_0⁻¹)` is referred to χ² with
/// `p² H` degrees of freedom. Components with negligible variance are dropped
/// from `p`.
pub fn independence_test(
    residuals: &DMatrix<f64>,
    quadrature: &Quadrature,
    lag_count: usize,
    projection_dim: usize,
) -> Result<IndependenceResult> {
    let n = residuals.nrows();
    if lag_count == 0 || projection_dim == 0 {
        return Err(Error::Config(
            "lag count and projection dimension must be positive".into(),
        ));
    }
    if n < lag_count + 5 {
        return Err(Error::InsufficientData {
            what: "independence test",
            needed: lag_count + 5,
            got: n,
        });
    }
    if residuals.ncols() != quadrature.len() {
        return Err(Error::Shape("residuals and quadrature differ in length".into()));
    }

    let mean = column_means(residuals);
    let centered = center_rows(residuals, &mean);
    let cov0 = centered.transpose() * &centered / n as f64;
    let total: f64 = quadrature.integrate(cov0.diagonal().as_slice());
    if total <= DEGENERATE_VARIANCE {
        return Ok(IndependenceResult::degenerate());
    }

    let dim = projection_dim.min(residuals.ncols());
    let basis = fpca(&CovSurface::new(cov0, quadrature.clone())?, dim)?;
    let lead = basis.eigenvalues[0];
    let p = basis
        .eigenvalues
        .iter()
        .take_while(|&&l| l > lead * 1e-10 && l > DEGENERATE_VARIANCE)
        .count();
    if p == 0 {
        return Ok(IndependenceResult::degenerate());
    }
    let scores = project_scores(&centered, &basis, &DVector::zeros(residuals.ncols()))?;
    let x = scores.columns(0, p).into_owned();

    let c0 = x.transpose() * &x / n as f64;
    let Some(c0_inv) = c0.clone().try_inverse() else {
        return Ok(IndependenceResult::degenerate());
    };
    let mut statistic = 0.0;
    for h in 1..=lag_count {
        let ch = x.rows(0, n - h).transpose() * x.rows(h, n - h) / n as f64;
        statistic += (ch.transpose() * &c0_inv * &ch * &c0_inv).trace();
    }
    statistic *= n as f64;

    let df = p * p * lag_count;
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Domain(e.to_string()))?;
    let p_value = (1.0 - chi.cdf(statistic)).clamp(0.0, 1.0);
    Ok(IndependenceResult {
        statistic,
        p_value,
        degrees_of_freedom: df,
        degenerate: false,
    })
}
