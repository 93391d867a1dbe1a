//! Autocovariance surfaces and the kernel-sandwich long-run covariance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::coda::ClrSeries;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// A covariance function `c(u, v)` tabulated on the age grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CovSurface {
    pub values: DMatrix<f64>,
    pub quadrature: Quadrature,
}

impl CovSurface {
    pub fn new(values: DMatrix<f64>, quadrature: Quadrature) -> Result<Self> {
        if !values.is_square() || values.nrows() != quadrature.len() {
            return Err(Error::Shape(format!(
                "{}×{} surface on a grid of {} points",
                values.nrows(),
                values.ncols(),
                quadrature.len()
            )));
        }
        Ok(Self { values, quadrature })
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Row-wise first differences: row `s` is `X_{s+1} − X_s`.
pub fn difference(values: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = values.nrows();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "differencing",
            needed: 2,
            got: n,
        });
    }
    Ok(values.rows(1, n - 1) - values.rows(0, n - 1))
}

/// First-differenced series `W_s = X_s − X_{s−1}`, labelled by the later year.
pub fn difference_series(series: &ClrSeries) -> Result<ClrSeries> {
    let values = difference(&series.values)?;
    Ok(ClrSeries {
        years: series.years[1..].to_vec(),
        ages: series.ages.clone(),
        values,
        quadrature: series.quadrature.clone(),
    })
}

pub fn column_means(values: &DMatrix<f64>) -> DVector<f64> {
    let n = values.nrows().max(1) as f64;
    values.row_sum().transpose() / n
}

pub fn center_rows(values: &DMatrix<f64>, center: &DVector<f64>) -> DMatrix<f64> {
    let mut out = values.clone();
    for mut row in out.row_iter_mut() {
        row -= center.transpose();
    }
    out
}

fn autocov_centered(centered: &DMatrix<f64>, lag: usize) -> DMatrix<f64> {
    let m = centered.nrows();
    let len = m - lag;
    centered.rows(0, len).transpose() * centered.rows(lag, len) / m as f64
}

/// Lag-`lag` autocovariance surface of a curve sequence (rows = time),
/// demeaned by the sample mean curve and normalized by the series length.
/// Negative lags return the transpose of the matching positive lag.
pub fn empirical_autocov(series: &DMatrix<f64>, lag: isize) -> Result<DMatrix<f64>> {
    let m = series.nrows();
    let abs = lag.unsigned_abs();
    if m == 0 || abs >= m {
        return Err(Error::LagRange { lag: abs, len: m });
    }
    let centered = center_rows(series, &column_means(series));
    let gamma = autocov_centered(&centered, abs);
    Ok(if lag < 0 { gamma.transpose() } else { gamma })
}

/// First-order (Bartlett) lag window, `max(0, 1 − |x|)`.
pub fn bartlett_weight(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// Bandwidth rule used in place of a data-driven plug-in selector:
/// `m^{1/3}` rounded to the nearest integer, at least 1.
pub fn bandwidth_rule(m: usize) -> f64 {
    (m as f64).cbrt().round().max(1.0)
}

pub fn plugin_bandwidth(series: &DMatrix<f64>) -> Result<f64> {
    let m = series.nrows();
    if m < 4 {
        return Err(Error::InsufficientData {
            what: "bandwidth selection",
            needed: 4,
            got: m,
        });
    }
    Ok(bandwidth_rule(m))
}

/// Kernel-weighted sum of autocovariance surfaces over all lags
/// `−(m−1)..=(m−1)`, symmetrized, before any PSD correction.
pub fn long_run_covariance_raw<K>(series: &DMatrix<f64>, bandwidth: f64, kernel: K) -> Result<DMatrix<f64>>
where
    K: Fn(f64) -> f64,
{
    let m = series.nrows();
    if m < 2 {
        return Err(Error::InsufficientData {
            what: "long-run covariance",
            needed: 2,
            got: m,
        });
    }
    if !(bandwidth > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let centered = center_rows(series, &column_means(series));
    let mut total = autocov_centered(&centered, 0) * kernel(0.0);
    for lag in 1..m {
        let w = kernel(lag as f64 / bandwidth);
        if w == 0.0 {
            continue;
        }
        let gamma = autocov_centered(&centered, lag);
        total += (&gamma + gamma.transpose()) * w;
    }
    Ok((&total + total.transpose()) * 0.5)
}

/// Clip negative eigenvalues of a symmetric matrix to zero. Matrices that are
/// already nonnegative-definite are returned unchanged.
pub fn psd_projection(values: DMatrix<f64>) -> DMatrix<f64> {
    if values.nrows() == 0 {
        return values;
    }
    let eig = SymmetricEigen::new(values.clone());
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return values;
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    (&out + out.transpose()) * 0.5
}

/// Bartlett long-run covariance surface of a curve sequence, projected onto
/// the nonnegative-definite cone.
pub fn long_run_covariance(
    series: &DMatrix<f64>,
    quadrature: &Quadrature,
    bandwidth: f64,
) -> Result<CovSurface> {
    if series.ncols() != quadrature.len() {
        return Err(Error::Shape(format!(
            "series has {} ages but quadrature has {}",
            series.ncols(),
            quadrature.len()
        )));
    }
    let raw = long_run_covariance_raw(series, bandwidth, bartlett_weight)?;
    CovSurface::new(psd_projection(raw), quadrature.clone())
}

/// Diagonal of the Bartlett long-run covariance, `Ĉ(u, u)`, without forming
/// the full surface.
pub fn long_run_variance_diagonal(series: &DMatrix<f64>, bandwidth: f64) -> DVector<f64> {
    let m = series.nrows();
    let centered = center_rows(series, &column_means(series));
    DVector::from_fn(series.ncols(), |u, _| {
        let col = centered.column(u);
        let mut acc = col.dot(&col) / m as f64;
        for lag in 1..m {
            let w = bartlett_weight(lag as f64 / bandwidth);
            if w == 0.0 {
                break;
            }
            let len = m - lag;
            acc += 2.0 * w * col.rows(0, len).dot(&col.rows(lag, len)) / m as f64;
        }
        acc
    })
}
